"""Command-line entry point of the ustlab experiment harness.

Flags override the values read from ``--config`` (a JSON document with the
fields of :class:`ExperimentConfig`).  Exit status: 0 on success, 1 when a
decomposition audit fails, 2 on invalid input or parameters.  Statistical
misses never change the exit status; they show up in the ``pass`` columns.
"""

import argparse
import json
import sys
import warnings

import numpy as np

from . import experiments as ex
from .decomposition import good_decomposition
from .errors import AuditFailure, UstlabError
from .generators import FAMILIES
from .graph import dump_edge_list, dump_json
from .rng import derive_seed
from .spectral import (
    decomposition_gap_bound, decomposition_gap_params, jsvt_lower_bound, path_method_bound, spectrum,
)
from .ust import wilson

SCHEMAS = {
    "gen": "edge list 'n m' then 'u v' lines (csv), or {schema, n, edges} (json)",
    "sample": "trial,seed,diameter,path_len,contained_flag (contained_flag empty without --eps/--delta)",
    "spectral": "JSON {schema, gap, lambda2, lambda_k_list, trace_p2, bounds:{jsvt, path_method, decomposition}}",
    "cheeger": ",".join(ex.CHEEGER_COLUMNS),
    "decompose": "JSON {schema, k, theta, blocks, audit:{condition:[value, threshold, pass]}, negligible_edges, evil_count}",
    "bubble": ",".join(ex.TAIL_COLUMNS),
    "scaling": "family,n,trial,seed,diameter",
    "paths": ",".join(ex.PATH_COLUMNS),
    "probe": ",".join(ex.PROBE_COLUMNS),
}

HELP = {
    "gen": "generate a graph of the chosen family",
    "sample": "sample uniform spanning trees and report diameters and a tree path",
    "spectral": "spectrum, trace(P^2) and gap lower bounds of one graph",
    "cheeger": "Cheeger constant against spectral gap",
    "decompose": "(eps, delta, beta)-good decomposition with its audit",
    "bubble": "bubble sum of a path-built W and the diameter tail of UST(G/W)",
    "scaling": "UST diameter against n with the fitted log-log slope",
    "paths": "tree-path length and containment inside decomposition blocks",
    "probe": "hitting and stay-in-block walk probes",
}


def _common(p):
    p.add_argument("--config", help="JSON config; explicit flags override it")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--beta", type=float, help="default n^1.5")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed, required for randomized runs")
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--p", type=float, help="edge probability for dense-gnp")
    p.add_argument("--a", type=int, help="left side of complete-bipartite")
    p.add_argument("--b", type=int, help="right side of complete-bipartite")
    p.add_argument("--path", help="graph file for family 'file'")
    p.add_argument("--c", type=float, help="stay-probe horizon constant (horizon = c sqrt n)")
    p.add_argument("--probe-trials", type=int, dest="probe_trials")
    p.add_argument("--ell", type=int, nargs="+", help="diameter thresholds for the tail check")
    p.add_argument("--w-mode", choices=("path", "prefix", "all"), dest="w_mode")


def build_parser():
    parser = argparse.ArgumentParser(prog="ustlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCHEMAS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name],
                           epilog=f"output: {SCHEMAS[name]}")
        _common(p)
        if name == "sample":
            p.add_argument("--u", type=int, default=0, help="path endpoint (default 0)")
            p.add_argument("--v", type=int, default=None, help="path endpoint (default n-1)")
            p.add_argument("--parents", action="store_true", help="include parent arrays (json output)")
        if name == "spectral":
            p.add_argument("--k", type=int, default=None, help="number of leading eigenvalues to list")
    return parser


def make_config(args):
    doc = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    names = {f for f in ex.ExperimentConfig.__dataclass_fields__}
    for key, val in vars(args).items():
        if key in names and val is not None:
            doc[key] = val
    return ex.ExperimentConfig.from_dict(doc)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_doc(doc):
    return json.dumps(ex._plain({"schema": ex.SCHEMA, **doc}), indent=1) + "\n"


def cmd_gen(cfg, args):
    g = ex.build_graph(cfg, cfg.n[0])
    if cfg.format == "json":
        _emit(_json_doc(json.loads(dump_json(g))), cfg.out)
    else:
        _emit(dump_edge_list(g), cfg.out)
    return 0


def _decompose_quiet(cfg, g):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return good_decomposition(g, cfg.eps, cfg.delta, cfg.beta_for(g.n))


def cmd_sample(cfg, args):
    master = cfg.require_seed()
    g = ex.build_graph(cfg, cfg.n[0])
    net = g.network
    net.require_connected()
    u = args.u
    v = g.n - 1 if args.v is None else args.v
    mask = None
    if cfg.eps is not None and cfg.delta is not None:
        gd = _decompose_quiet(cfg, g)
        mask = gd.partition.mask(int(gd.partition.block_of[u]))
    seeds = [derive_seed(master, ex.TAG_SCALING, g.n, t) for t in range(cfg.trials)]
    trees = ex._map(lambda s: wilson(net, s, check=False), seeds, cfg.threads)
    rows = []
    for t, (s, tree) in enumerate(zip(seeds, trees)):
        phi = tree.path(u, v).vertices
        row = {"trial": t, "seed": s, "diameter": tree.diameter(), "path_len": len(phi) - 1,
               "contained_flag": None if mask is None else bool(mask[list(phi)].all())}
        if args.parents:
            row["parent"] = tree.parent.tolist()
        rows.append(row)
    cols = ["trial", "seed", "diameter", "path_len", "contained_flag"] + (["parent"] if args.parents else [])
    res = ex.ExperimentResult("sample", cols, rows, {"u": u, "v": v}, cfg.to_dict())
    _emit(res.to_csv() if cfg.format == "csv" else res.to_json() + "\n", cfg.out)
    return 0


def spectral_report(g, gd=None, k=None):
    """Spectral summary plus the three gap lower bounds (the partition comes from ``gd`` if given)."""
    spec = spectrum(g)
    lam = spec.eigenvalues if k is None else spec.eigenvalues[:k]
    bounds = {"jsvt": None, "path_method": None, "decomposition": None}
    bounds["path_method"] = path_method_bound(g)
    if gd is not None:
        part = gd.partition
        bounds["jsvt"] = jsvt_lower_bound(g, part)
        a, b, c = decomposition_gap_params(g, part)
        if a > 0 and b > 0 and c >= 0:
            bounds["decomposition"] = decomposition_gap_bound(g, part, a, b, c)
    else:
        bounds["jsvt"] = spec.gap
    return {"n": g.n, "gap": spec.gap, "lambda2": spec.lambda2, "lambda_k_list": np.asarray(lam),
            "trace_p2": spec.trace_p2, "bounds": bounds}


def cmd_spectral(cfg, args):
    g = ex.build_graph(cfg, cfg.n[0])
    gd = _decompose_quiet(cfg, g) if cfg.eps is not None and cfg.delta is not None else None
    _emit(_json_doc(spectral_report(g, gd, args.k)), cfg.out)
    return 0


def cmd_decompose(cfg, args):
    g = ex.build_graph(cfg, cfg.n[0])
    status = 0
    try:
        gd = _decompose_quiet(cfg, g)
    except AuditFailure as err:
        gd = err.result
        if gd is None or not hasattr(gd, "report"):
            raise
        status = 1
    _emit(_json_doc(gd.report()), cfg.out)
    return status


def _run(driver):
    def cmd(cfg, args):
        res = driver(cfg)
        _emit(res.to_csv() if cfg.format == "csv" else res.to_json() + "\n", cfg.out)
        return 0
    return cmd


COMMANDS = {
    "gen": cmd_gen,
    "sample": cmd_sample,
    "spectral": cmd_spectral,
    "cheeger": _run(ex.run_cheeger_vs_gap),
    "decompose": cmd_decompose,
    "bubble": _run(ex.run_bubble_and_tail),
    "scaling": _run(ex.run_diameter_scaling),
    "paths": _run(ex.run_path_experiment),
    "probe": _run(ex.run_probes),
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg, args)
    except (UstlabError, OSError, json.JSONDecodeError) as err:
        print(f"ustlab {args.command}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

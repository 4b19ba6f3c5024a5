"""Seeded experiment drivers and their CSV / JSON reports.

Every randomized quantity in a run is drawn from a seed derived from
``(master seed, experiment tag, n, index...)``, so reports do not depend on
the number of worker threads.  The first CSV line (and the ``generated``
field of JSON reports) carries a timestamp and is the only part of a report
that changes between identical runs.
"""

import csv
import dataclasses
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cheeger import cheeger_exact, cheeger_sweep
from .decomposition import good_decomposition
from .errors import ParameterError
from .estimators import (
    bubble_sum, degree_ratio, diameter_tail_bound, hit_horizon, mns_c3, probe_hit_large_set,
    probe_stay_in_block, select_path_endpoints,
)
from .generators import generate
from .graph import contract
from .rng import derive_seed
from .spectral import spectrum
from .tolerances import CHEEGER_MAX_N
from .ust import wilson

SCHEMA = "ustlab/1"

# experiment tags folded into derived seeds
TAG_GRAPH, TAG_SCALING, TAG_CHEEGER, TAG_PATHS, TAG_ENDPOINTS, TAG_W, TAG_TAIL, TAG_PROBE = range(1, 9)


@dataclass
class ExperimentConfig:
    family: str = "complete"
    n: list = field(default_factory=lambda: [64])
    delta: float | None = None
    eps: float | None = None
    beta: float | None = None
    trials: int = 100
    seed: int | None = None
    threads: int = 1
    out: str | None = None
    format: str = "csv"
    p: float = 0.9
    a: int | None = None
    b: int | None = None
    path: str | None = None
    c: float = 1.0
    probe_trials: int = 200
    ell: list | None = None
    w_mode: str = "path"

    def __post_init__(self):
        if isinstance(self.n, int):
            self.n = [self.n]
        self.n = [int(v) for v in self.n]
        if self.format not in ("csv", "json"):
            raise ParameterError("format must be csv or json")
        if self.trials < 1:
            raise ParameterError("trials must be positive")
        if self.w_mode not in ("path", "prefix", "all"):
            raise ParameterError("w_mode must be path, prefix or all")

    @classmethod
    def from_dict(cls, doc):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return dataclasses.asdict(self)

    def require_seed(self):
        if self.seed is None:
            raise ParameterError("randomized runs need a master seed")
        return int(self.seed)

    def beta_for(self, n):
        return n ** 1.5 if self.beta is None else float(self.beta)


@dataclass
class ExperimentResult:
    command: str
    columns: list
    rows: list
    summary: dict
    config: dict

    def data_lines(self):
        """CSV text without the timestamp header (what determinism checks compare)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def to_csv(self):
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        cfg = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return f"# {SCHEMA} {self.command} generated={stamp} config={cfg}\n" + self.data_lines()

    def to_json(self):
        doc = {
            "schema": SCHEMA,
            "command": self.command,
            "generated": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "config": self.config,
            "summary": _plain(self.summary),
            "rows": [{c: _plain(r[c]) for c in self.columns} for r in self.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False)

    def write(self, out=None, fmt="csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json() + "\n"
        if out is None:
            return text
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return text


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def build_graph(cfg, n):
    seed = None if cfg.seed is None else derive_seed(cfg.seed, TAG_GRAPH, n)
    return generate(cfg.family, n, rng=seed, p=cfg.p, a=cfg.a, b=cfg.b, delta=cfg.delta,
                    path_file=cfg.path)


def log_log_slope(ns, values):
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


# ---------------------------------------------------------------------------

def run_diameter_scaling(cfg):
    """UST diameters per n; summary holds median/quantiles and the log-log slope of the median."""
    master = cfg.require_seed()
    rows, per_n = [], []
    for n in cfg.n:
        g = build_graph(cfg, n)
        net = g.network
        net.require_connected()
        seeds = [derive_seed(master, TAG_SCALING, n, t) for t in range(cfg.trials)]
        diams = _map(lambda s: wilson(net, s, check=False).diameter(), seeds, cfg.threads)
        rows += [{"family": cfg.family, "n": g.n, "trial": t, "seed": s, "diameter": d}
                 for t, (s, d) in enumerate(zip(seeds, diams))]
        d = np.asarray(diams, float)
        per_n.append({"n": g.n, "median": float(np.median(d)), "mean": float(d.mean()),
                      "q10": float(np.quantile(d, 0.1)), "q90": float(np.quantile(d, 0.9)),
                      "median_over_sqrt_n": float(np.median(d) / math.sqrt(g.n))})
        del g, net
    summary = {"family": cfg.family, "per_n": per_n, "slope": None}
    if len(per_n) >= 2 and all(r["median"] > 0 for r in per_n):
        summary["slope"] = log_log_slope([r["n"] for r in per_n], [r["median"] for r in per_n])
    return ExperimentResult("scaling", ["family", "n", "trial", "seed", "diameter"], rows, summary,
                            cfg.to_dict())


CHEEGER_COLUMNS = ["family", "n", "instance", "seed", "delta", "phi", "phi_exact", "gamma", "ratio",
                   "cheeger_lower", "cheeger_upper", "c_delta", "c_delta_ok", "trace_p2", "trace_ok"]


def cheeger_row(g, delta=None, slack=1e-9):
    """Phi (exact up to 24 vertices, sweep bound above), gamma and the inequality flags."""
    exact = g.n <= CHEEGER_MAX_N
    phi = (cheeger_exact(g) if exact else cheeger_sweep(g)).value
    spec = spectrum(g)
    gamma = spec.gap
    dl = float(g.degrees.min()) / g.n if delta is None else float(delta)
    c_delta = dl ** 19 / 2 ** 34
    return {
        "n": g.n, "delta": dl, "phi": phi, "phi_exact": exact, "gamma": gamma,
        "ratio": gamma / phi,
        # with a sweep value phi is only an upper bound, so the lower inequality is not checkable
        "cheeger_lower": bool(phi * phi / 2 - slack <= gamma) if exact else None,
        "cheeger_upper": bool(gamma <= 2 * phi + slack),
        "c_delta": c_delta,
        "c_delta_ok": bool(gamma >= c_delta * phi - slack),
        "trace_p2": spec.trace_p2,
        "trace_ok": bool(spec.trace_p2 <= 1.0 / dl + slack),
    }


def run_cheeger_vs_gap(cfg):
    """Phi, gamma, gamma/Phi and the inequality flags for every instance (``trials`` per n for dense-gnp)."""
    master = cfg.seed
    rows = []
    for n in cfg.n:
        count = cfg.trials if cfg.family == "dense-gnp" else 1
        for inst in range(count):
            seed = None if master is None else derive_seed(master, TAG_CHEEGER, n, inst)
            g = generate(cfg.family, n, rng=seed, p=cfg.p, a=cfg.a, b=cfg.b, delta=cfg.delta,
                         path_file=cfg.path)
            row = cheeger_row(g, cfg.delta)
            row.update(family=cfg.family, instance=inst, seed=seed)
            rows.append(row)
    ratios = [r["ratio"] for r in rows]
    summary = {
        "instances": len(rows),
        "min_ratio": min(ratios) if ratios else None,
        "cheeger_violations": sum(1 for r in rows if r["cheeger_lower"] is False or not r["cheeger_upper"]),
        "c_delta_violations": sum(1 for r in rows if not r["c_delta_ok"]),
        "trace_violations": sum(1 for r in rows if not r["trace_ok"]),
    }
    return ExperimentResult("cheeger", CHEEGER_COLUMNS, rows, summary, cfg.to_dict())


def _decompose(cfg, g):
    if cfg.eps is None or cfg.delta is None:
        raise ParameterError("this experiment needs eps and delta")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return good_decomposition(g, cfg.eps, cfg.delta, cfg.beta_for(g.n))


PATH_COLUMNS = ["family", "n", "block", "trial", "seed", "v1", "v2", "path_len", "lower", "upper",
                "in_window", "contained", "event"]


def run_path_experiment(cfg):
    """Frequency of {eps^8 theta sqrt n <= |phi| <= sqrt n / (theta eps^8), phi inside V_i}.

    phi is the path of a UST of G between the two endpoints chosen in each
    block by :func:`select_path_endpoints`.
    """
    master = cfg.require_seed()
    rows, blocks = [], []
    for n in cfg.n:
        g = build_graph(cfg, n)
        net = g.network
        gd = _decompose(cfg, g)
        th, eps = gd.theta, gd.epsilon
        lower = eps ** 8 * th * math.sqrt(n)
        upper = math.sqrt(n) / (th * eps ** 8)
        for i in range(gd.k):
            v1, v2 = select_path_endpoints(g, gd, i, derive_seed(master, TAG_ENDPOINTS, n, i),
                                           c=cfg.c, trials=cfg.probe_trials)
            mask = gd.partition.mask(i)
            seeds = [derive_seed(master, TAG_PATHS, n, i, t) for t in range(cfg.trials)]

            def one(s):
                phi = wilson(net, s, check=False).path(v1, v2).vertices
                return len(phi) - 1, bool(mask[list(phi)].all())

            res = _map(one, seeds, cfg.threads)
            hits = 0
            for t, (s, (length, inside)) in enumerate(zip(seeds, res)):
                window = lower <= length <= upper
                hits += window and inside
                rows.append({"family": cfg.family, "n": n, "block": i, "trial": t, "seed": s,
                             "v1": v1, "v2": v2, "path_len": length, "lower": lower, "upper": upper,
                             "in_window": window, "contained": inside, "event": window and inside})
            blocks.append({"n": n, "block": i, "k": gd.k, "theta": th, "v1": v1, "v2": v2,
                           "frequency": hits / cfg.trials})
    return ExperimentResult("paths", PATH_COLUMNS, rows, {"blocks": blocks}, cfg.to_dict())


TAIL_COLUMNS = ["family", "n", "ell", "trials", "seed", "w_size", "bubble_lo", "bubble_hi", "c3",
                "empirical", "stderr", "bound", "pass"]


def build_w(cfg, g, gd, master):
    """Union over blocks of UST-path vertices (all of them, or the first ceil(eps^8 theta sqrt n))."""
    n = g.n
    if cfg.w_mode == "all":
        return np.arange(n), [int(s) for s in gd.partition.sizes]
    need = math.ceil(gd.epsilon ** 8 * gd.theta * math.sqrt(n))
    chosen, per_block = [], []
    for i in range(gd.k):
        v1, v2 = select_path_endpoints(g, gd, i, derive_seed(master, TAG_ENDPOINTS, n, i),
                                       c=cfg.c, trials=cfg.probe_trials)
        tree = wilson(g, derive_seed(master, TAG_W, n, i))
        mask = gd.partition.mask(i)
        inside = [v for v in tree.path(v1, v2).vertices if mask[v]]
        if cfg.w_mode == "prefix":
            inside = inside[:need]
        chosen += inside
        per_block.append(len(inside))
    return np.unique(np.asarray(chosen, np.int64)), per_block


def run_bubble_and_tail(cfg):
    """Bubble sum of a path-built W, the constant C3, and the diameter tail of UST(G/W) against C3 |W| / ell."""
    master = cfg.require_seed()
    rows, instances = [], []
    for n in cfg.n:
        g = build_graph(cfg, n)
        gd = _decompose(cfg, g)
        w, per_block = build_w(cfg, g, gd, master)
        need = gd.epsilon ** 8 * gd.theta * math.sqrt(n)
        bub = bubble_sum(g, w)
        d_ratio = degree_ratio(g)
        c3 = mns_c3(d_ratio, bub.upper) if bub.upper >= 1 else math.nan
        quotient = contract(g.network, [w]).contracted
        inst_seed = derive_seed(master, TAG_TAIL, n)
        seeds = [derive_seed(inst_seed, t) for t in range(cfg.trials)]
        diams = np.asarray(_map(lambda s: wilson(quotient, s, check=False).diameter(), seeds, cfg.threads))
        ells = cfg.ell if cfg.ell else list(range(1, int(diams.max()) + 2))
        for ell in ells:
            freq = float(np.mean(diams >= ell))
            se = math.sqrt(freq * (1 - freq) / cfg.trials)
            bound = diameter_tail_bound(c3, w.size, ell) if math.isfinite(c3) else 0.0
            rows.append({"family": cfg.family, "n": n, "ell": int(ell), "trials": cfg.trials, "seed": inst_seed,
                         "w_size": int(w.size), "bubble_lo": bub.value, "bubble_hi": bub.upper, "c3": c3,
                         "empirical": freq, "stderr": se, "bound": bound, "pass": freq <= bound})
        instances.append({"n": n, "k": gd.k, "theta": gd.theta, "w_size": int(w.size),
                          "w_per_block": per_block, "per_block_needed": need,
                          "hypothesis_met": all(c >= need for c in per_block),
                          "bubble_interval": list(bub.interval), "d_ratio": d_ratio, "c3": c3,
                          "median_quotient_diameter": float(np.median(diams))})
    return ExperimentResult("bubble", TAIL_COLUMNS, rows, {"instances": instances}, cfg.to_dict())


PROBE_COLUMNS = ["instance", "n", "param_json", "estimate", "stderr", "trials", "seed", "bound", "pass"]


def run_probes(cfg, slack=3.0):
    """Hitting-a-large-set and stay-in-block probes, one row per (instance, probe).

    ``pass`` compares the estimate to the reference value with ``slack``
    standard errors; it is a report column, not an assertion.
    """
    master = cfg.require_seed()
    rows = []
    for n in cfg.n:
        g = build_graph(cfg, n)
        gd = _decompose(cfg, g)
        eps, dl = gd.epsilon, gd.delta
        size = max(1, math.ceil(eps * math.sqrt(n)))
        seed = derive_seed(master, TAG_PROBE, n, 0)
        u = np.arange(n - size, n)
        horizon = hit_horizon(g, eps)
        pr = probe_hit_large_set(g, u, 0, horizon, cfg.probe_trials, seed, eps=eps)
        bound = eps * dl / 4
        rows.append({"instance": f"{cfg.family}-hit", "n": n,
                     "param_json": json.dumps({"u_size": size, "start": 0, "horizon": horizon}, sort_keys=True),
                     "estimate": pr.estimate, "stderr": pr.stderr, "trials": pr.trials, "seed": seed,
                     "bound": bound, "pass": pr.estimate + slack * pr.stderr >= bound})
        for i in range(gd.k):
            seed = derive_seed(master, TAG_PROBE, n, 1, i)
            sp = probe_stay_in_block(g, gd, i, cfg.c, cfg.probe_trials, seed)
            rows.append({"instance": f"{cfg.family}-stay", "n": n,
                         "param_json": json.dumps({"block": i, "c": cfg.c, "horizon": sp.horizon,
                                                   "selected": int(sp.selected.size)}, sort_keys=True),
                         "estimate": sp.escape_frequency, "stderr": sp.escape_stderr,
                         "trials": sp.trials, "seed": seed, "bound": sp.escape_bound,
                         "pass": sp.escape_frequency - slack * sp.escape_stderr <= sp.escape_bound})
    return ExperimentResult("probe", PROBE_COLUMNS, rows, {}, cfg.to_dict())

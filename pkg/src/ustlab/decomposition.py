"""Block decompositions of graphs with linear minimum degree.

Pipeline: sparse-cut refinement into a primary decomposition, then greedy
coarsening driven by the theta recursion, then an exact audit of every
condition.  Correctness is certified by the audit; the cut search only has to
be good enough for the audit to pass.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .cheeger import neighbor_bits
from .errors import AuditFailure, GraphError, ParameterError
from .graph import Graph, induced_subgraph
from .partition import Partition, block_cut_matrix, h_graph
from .spectral import block_gaps, internal_degrees
from .tolerances import EXHAUSTIVE_CUT_MAX_N

__all__ = [
    "Partition", "block_cut_matrix", "h_graph", "find_sparse_cut", "PrimaryAudit",
    "primary_decomposition", "verify_primary", "coarsen", "coarsening_conditions",
    "AuditItem", "GoodDecomposition", "good_decomposition", "verify_good",
]


# ---------------------------------------------------------------------------
# sparse cuts

@dataclass(frozen=True)
class SparseCut:
    side: np.ndarray
    other: np.ndarray
    edges: int
    method: str


def _ratio_better(c1, d1, c2, d2):
    return c1 * d2 < c2 * d1


def _local_moves(a, side, cut, max_rounds):
    """Greedy single-vertex moves lowering cut / (|A| |B|); ``a`` is the dense block adjacency."""
    n = side.size
    to_side = a[:, side].sum(axis=1)
    to_other = a.sum(axis=1) - to_side
    s = int(side.sum())
    for _ in range(max_rounds):
        # moving v flips its side: edges to the other side stop being cut and vice versa
        new_cut = np.where(side, cut - to_other + to_side, cut - to_side + to_other)
        new_s = np.where(side, s - 1, s + 1)
        den = new_s * (n - new_s)
        ok = den > 0
        ratio = np.full(n, np.inf)
        ratio[ok] = new_cut[ok] / den[ok]
        v = int(np.argmin(ratio))
        if not ratio[v] < cut / (s * (n - s)) - 1e-15:
            break
        sign = -1.0 if side[v] else 1.0
        side[v] = ~side[v]
        to_side += sign * a[:, v]
        to_other -= sign * a[:, v]
        s = int(new_s[v])
        cut = int(new_cut[v])
    return side, cut


def find_sparse_cut(g, block, factor):
    """Split ``block`` into W1, W2 with |E(W1, W2)| <= factor |W1| |W2|, or return None.

    Disconnected blocks split along a component.  Blocks with at most 22
    vertices are searched exhaustively, so None certifies that no such cut
    exists.  Larger blocks try every single vertex, sweeps along the Fiedler
    vectors of the combinatorial and normalized Laplacians, and greedy vertex
    moves; None then only means that the search found nothing.
    """
    ids = np.sort(np.asarray(block, dtype=np.int64))
    w = ids.size
    if w < 2:
        return None
    sub, _ = induced_subgraph(g, ids)
    ncomp, lab = connected_components(_csr(sub), directed=False, return_labels=True)
    if ncomp > 1:
        first = lab == lab[0]
        return SparseCut(ids[first], ids[~first], 0, "component")
    if w <= EXHAUSTIVE_CUT_MAX_N:
        cut, den, mask = _kernels.min_ratio_cut(neighbor_bits(sub), _kernels._POPCOUNT16)
        side = np.array([(int(mask) >> j) & 1 for j in range(w)], dtype=bool)
        if cut <= factor * den:
            return SparseCut(ids[side], ids[~side], int(cut), "exhaustive")
        return None
    a = sub.adjacency_matrix()
    deg = sub.degrees.astype(np.float64)
    # single vertices: cut = deg(v, W), |W1||W2| = w - 1
    v = int(np.argmin(deg))
    if deg[v] <= factor * (w - 1):
        side = np.zeros(w, bool)
        side[v] = True
        return SparseCut(ids[side], ids[~side], int(deg[v]), "singleton")
    best = None
    lap = np.diag(deg) - a
    inv = 1.0 / np.sqrt(deg)
    for mat, scale in ((lap, None), (lap * inv[:, None] * inv[None, :], inv)):
        _, vec = eigh(mat, subset_by_index=[1, 1], check_finite=False)
        f = vec[:, 0] if scale is None else vec[:, 0] * scale
        order = np.lexsort((np.arange(w), f))
        pos = np.empty(w, np.int64)
        pos[order] = np.arange(w)
        lo = np.minimum(pos[sub.edges[:, 0]], pos[sub.edges[:, 1]])
        hi = np.maximum(pos[sub.edges[:, 0]], pos[sub.edges[:, 1]])
        delta = np.zeros(w + 1, np.int64)
        np.add.at(delta, lo, 1)
        np.add.at(delta, hi, -1)
        cuts = np.cumsum(delta)[:w - 1]
        sizes = np.arange(1, w)
        dens = sizes * (w - sizes)
        j = int(np.argmin(cuts / dens))
        side = np.zeros(w, bool)
        side[order[:j + 1]] = True
        side, cut = _local_moves(a, side, int(cuts[j]), max_rounds=w)
        s = int(side.sum())
        if best is None or _ratio_better(cut, s * (w - s), best[1], best[2]):
            best = (side.copy(), cut, s * (w - s))
    side, cut, den = best
    if cut <= factor * den:
        return SparseCut(ids[side], ids[~side], int(cut), "sweep")
    return None


def _csr(g):
    return csr_matrix((np.ones(g.indices.size), g.indices, g.indptr), shape=(g.n, g.n))


# ---------------------------------------------------------------------------
# primary decomposition

@dataclass
class PrimaryAudit:
    n: int
    delta: float
    k: int
    negligible_edges: int
    negligible_bound: float
    bad: list
    good: list
    evil: list
    fallback_evil: list
    refinement_sets: int
    heuristic_searches: int
    block_sizes: list
    min_internal_degree: list
    block_gap: list
    conditions: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.conditions.values())


@dataclass(frozen=True)
class AuditItem:
    value: float
    threshold: float
    passed: bool
    relation: str

    def as_tuple(self):
        return (self.value, self.threshold, self.passed)


def _check(value, threshold, relation, slack=0.0):
    if relation == "<=":
        ok = value <= threshold + slack
    else:
        ok = value >= threshold - slack
    return AuditItem(float(value), float(threshold), bool(ok), relation)


def _require_min_degree(g, delta):
    if not 0 < delta <= 1:
        raise ParameterError("delta must lie in (0, 1]")
    if g.degrees.min() < delta * g.n - 1e-9:
        raise ParameterError(f"minimum degree {int(g.degrees.min())} is below delta*n = {delta * g.n:.6g}")


def _refine(g, factor):
    """Split blocks until no searched block yields a cut below ``factor`` |W1| |W2|."""
    done, work = [], [np.arange(g.n)]
    heuristic = 0
    while work:
        work.sort(key=lambda b: int(b[0]))
        blk = work.pop(0)
        cut = find_sparse_cut(g, blk, factor)
        if blk.size > EXHAUSTIVE_CUT_MAX_N:
            heuristic += 1
        if cut is None:
            done.append(blk)
        else:
            work += [np.sort(cut.side), np.sort(cut.other)]
    done.sort(key=lambda b: int(b[0]))
    return done, heuristic


def primary_decomposition(g, delta):
    """Refine, classify bad/good/evil vertices, redistribute evil ones; audit before returning.

    Raises :class:`AuditFailure` (carrying the audit) when the result misses a
    condition, which can only happen when the heuristic cut search missed a
    qualifying cut.
    """
    if not isinstance(g, Graph):
        raise GraphError("primary_decomposition expects an unweighted Graph")
    _require_min_degree(g, delta)
    n = g.n
    sets, heuristic = _refine(g, delta ** 3 / 20.0)
    label = np.empty(n, np.int64)
    for i, s in enumerate(sets):
        label[s] = i
    # edges between final sets are exactly the negligible ones
    cross = label[g.row_ids] != label[g.indices]
    negl = np.bincount(g.row_ids[cross], minlength=n)
    negligible_edges = int(cross.sum()) // 2
    bad = negl > delta * n / 2.0
    good_set = np.zeros(len(sets), bool)
    for i, s in enumerate(sets):
        good_set[i] = bool(np.any(~bad[s]))
    good_ids = np.flatnonzero(good_set)
    if good_ids.size == 0:
        raise AuditFailure("refinement left no good set")
    evil = np.flatnonzero(bad & ~good_set[label])
    new_label = np.full(n, -1, np.int64)
    for j, i in enumerate(good_ids):
        new_label[sets[i]] = j
    fallback = []
    threshold = delta ** 2 * n / 3.0
    adj = g.adjacency_bitmap
    core = [sets[i] for i in good_ids]
    for v in evil:
        counts = np.array([int(adj[v, c].sum()) for c in core])
        ok = np.flatnonzero(counts >= threshold)
        if ok.size:
            new_label[v] = int(ok[0])
        else:
            new_label[v] = int(np.argmax(counts))
            fallback.append(int(v))
    part = Partition(new_label)
    audit = verify_primary(g, part, delta)
    audit.negligible_edges = negligible_edges
    audit.bad = np.flatnonzero(bad).tolist()
    audit.good = np.flatnonzero(~bad).tolist()
    audit.evil = evil.tolist()
    audit.fallback_evil = fallback
    audit.refinement_sets = len(sets)
    audit.heuristic_searches = heuristic
    if not audit.passed:
        failed = [k for k, c in audit.conditions.items() if not c.passed]
        raise AuditFailure(f"primary decomposition failed {failed}; the cut search stalled", audit)
    return part, audit


def verify_primary(g, partition, delta):
    """Exact check of the four primary-decomposition conditions."""
    n = g.n
    gaps = block_gaps(g, partition)
    ideg = internal_degrees(g, partition)
    mins = [int(ideg[b].min()) for b in partition.blocks]
    cond = {
        "block-count": _check(partition.k, 2.0 / delta, "<="),
        "block-size": _check(int(partition.sizes.min()), delta * n / 2.0, ">="),
        "internal-degree": _check(min(mins), delta ** 4 * n / 40.0, ">="),
        "block-gap": _check(float(gaps.min()), delta ** 10 / 2 ** 22, ">="),
    }
    return PrimaryAudit(n, delta, partition.k, 0, delta ** 3 / 20.0 * n * (n - 1) / 2.0,
                        [], [], [], [], 0, 0, partition.sizes.tolist(), mins, gaps.tolist(), cond)


# ---------------------------------------------------------------------------
# coarsening

@dataclass(frozen=True)
class MergeStep:
    theta_before: float
    theta_after: float
    block: int
    boundary: int
    pair: tuple
    pair_edges: int


def coarsen(g, p_prime, eps, alpha, beta):
    """Merge blocks of ``p_prime`` until every block boundary is at most theta^2 alpha beta.

    theta starts at ``eps`` and follows theta <- (alpha / l^2) theta^2 at each
    merge, l being the number of blocks of ``p_prime``.  A violating block U
    (smallest label) absorbs the block holding W2, where (W1, W2) is the pair of
    ``p_prime`` blocks with W1 in U, W2 outside U and the most edges between
    them.  Returns ``(partition, theta, history)``.
    """
    if not (0 < eps < 1 and 0 < alpha < 1 and beta > 0):
        raise ParameterError("need eps, alpha in (0, 1) and beta > 0")
    ell = p_prime.k
    pair_cut = block_cut_matrix(g, p_prime)
    group = np.arange(ell)
    theta = float(eps)
    history = []
    while True:
        labels = np.unique(group)
        member = [np.flatnonzero(group == u) for u in labels]
        limit = theta * theta * alpha * beta
        boundary = [int(pair_cut[np.ix_(m, np.setdiff1d(np.arange(ell), m))].sum()) for m in member]
        bad = [j for j, b in enumerate(boundary) if b > limit]
        if not bad:
            break
        j = bad[0]
        inside = member[j]
        outside = np.setdiff1d(np.arange(ell), inside)
        sub = pair_cut[np.ix_(inside, outside)]
        flat = int(np.argmax(sub))  # row-major argmax = lexicographic tie-break
        w1, w2 = int(inside[flat // sub.shape[1]]), int(outside[flat % sub.shape[1]])
        new_theta = alpha / ell ** 2 * theta * theta
        history.append(MergeStep(theta, new_theta, int(labels[j]), boundary[j], (w1, w2), int(sub.max())))
        target, absorbed = sorted((int(labels[j]), int(group[w2])))
        group[group == absorbed] = target
        theta = new_theta
    _, relabel = np.unique(group, return_inverse=True)
    # blocks numbered by their smallest vertex
    part = Partition(relabel[p_prime.block_of]).relabeled()
    return part, theta, history


def coarsening_conditions(g, p_prime, partition, theta, alpha, beta):
    """Check both coarsening conditions and the theta floor eps (eps alpha / l^2)^(2^l) is left to the caller."""
    out = {}
    connected = True
    for i, ids in enumerate(partition.blocks):
        sub, _ = induced_subgraph(g, ids)
        lab = p_prime.block_of[ids]
        _, inner = np.unique(lab, return_inverse=True)
        if inner.max() > 0 and not h_graph(sub, Partition(inner), theta * beta).is_connected():
            connected = False
    out["inner-graphs-connected"] = connected
    cm = block_cut_matrix(g, partition)
    bnd = cm.sum(axis=1) - np.diag(cm)
    out["boundary"] = bool(np.all(bnd <= theta * theta * beta * alpha))
    return out


def theta_floor(eps, alpha, ell):
    """eps (eps alpha / l^2)^(2^l), the guaranteed lower bound on the coarsening theta."""
    return eps * (eps * alpha / ell ** 2) ** (2 ** ell)


# ---------------------------------------------------------------------------
# good decompositions

@dataclass
class GoodDecomposition:
    partition: Partition
    theta: float
    epsilon: float
    delta: float
    beta: float
    audit: dict
    primary: PrimaryAudit = None
    history: list = field(default_factory=list)

    @property
    def k(self):
        return self.partition.k

    @property
    def passed(self):
        return all(c.passed for c in self.audit.values())

    def report(self):
        return {
            "k": self.k,
            "theta": self.theta,
            "log_theta": math.log(self.theta) if self.theta > 0 else -math.inf,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "beta": self.beta,
            "blocks": self.partition.sizes.tolist(),
            "audit": {k: [c.value, c.threshold, c.passed] for k, c in self.audit.items()},
            "negligible_edges": None if self.primary is None else self.primary.negligible_edges,
            "evil_count": None if self.primary is None else len(self.primary.evil),
            "merges": len(self.history),
        }


def good_decomposition(g, eps, delta, beta=None):
    """Primary decomposition, then an (eps, eps^9, beta) coarsening, then a full audit."""
    if not isinstance(g, Graph):
        raise GraphError("good_decomposition expects an unweighted Graph")
    n = g.n
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    _require_min_degree(g, delta)
    if eps > 0.3:
        warnings.warn(f"eps = {eps} is outside the small-eps regime the construction assumes",
                      stacklevel=2)
    beta = n ** 1.5 if beta is None else float(beta)
    top = 240.0 * n * n / (eps * delta ** 4)
    if not 0 < beta <= top:
        raise ParameterError(f"beta must lie in (0, {top:.6g}]")
    primary, paudit = primary_decomposition(g, delta)
    part, theta, history = coarsen(g, primary, eps, eps ** 9, beta)
    gd = GoodDecomposition(part, theta, eps, delta, beta, {}, paudit, history)
    gd.audit = verify_good(g, gd)
    if not gd.passed:
        failed = [k for k, c in gd.audit.items() if not c.passed]
        raise AuditFailure(f"decomposition failed {failed}", gd)
    return gd


def verify_good(g, gd):
    """Exact evaluation of the five block conditions and the theta range (in log space)."""
    n = g.n
    part, theta, eps, delta, beta = gd.partition, gd.theta, gd.epsilon, gd.delta, gd.beta
    gaps = block_gaps(g, part)
    ideg = internal_degrees(g, part)
    cm = block_cut_matrix(g, part)
    bnd = cm.sum(axis=1) - np.diag(cm)
    log_lo = 11 * 2 ** (2.0 / delta) * math.log(eps)
    log_theta = math.log(theta) if theta > 0 else -math.inf
    return {
        "block-count": _check(part.k, 2.0 / delta, "<="),
        "block-size": _check(int(part.sizes.min()), delta * n / 2.0, ">="),
        "block-gap": _check(float(gaps.min()), delta ** 15 * theta * beta / (2 ** 31 * n * n), ">="),
        "internal-degree": _check(int(ideg.min()), delta ** 4 * n / 40.0, ">="),
        "boundary": _check(int(bnd.max()), eps ** 9 * theta * theta * beta, "<="),
        "theta-lower": _check(log_theta, log_lo, ">="),
        "theta-upper": _check(theta, eps, "<="),
    }

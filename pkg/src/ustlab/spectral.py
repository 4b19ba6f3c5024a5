"""Spectra of random-walk operators and lower bounds on the spectral gap.

Every gap here is ``1 - lambda_2`` of a reversible transition matrix, computed
from the symmetric matrix ``diag(sqrt(pi)) P diag(1/sqrt(pi))``.  A one-state
chain has no nonconstant functions; its gap is reported as 2, the largest value
any chain can have, which keeps the block-composition bounds valid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import _kernels
from .errors import HypothesisViolation, InvalidPathError, ParameterError, SizeGuardError
from .graph import Graph, as_network, induced_subgraph
from .partition import Partition, block_cut_matrix, h_graph
from .tolerances import BOUND_SLACK, DENSE_MAX_N
from .walk import stationary, transition_matrix

SINGLE_STATE_GAP = 2.0


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    gap: float
    trace_p2: float

    @property
    def lambda2(self):
        return float(self.eigenvalues[1]) if self.eigenvalues.size > 1 else None


def _symmetrized(net, mode):
    net = as_network(net)
    if net.n > DENSE_MAX_N:
        raise SizeGuardError(f"dense eigensolves are limited to n <= {DENSE_MAX_N}")
    net.require_connected()
    s = 1.0 / np.sqrt(net.strength)
    a = net.weight_matrix() * s[:, None] * s[None, :]
    if mode == "lazy":
        a = 0.5 * (a + np.eye(net.n))
    elif mode != "simple":
        raise ParameterError(f"unknown mode {mode!r}")
    return a


def spectrum(net, mode="simple"):
    """Eigenvalues of the (lazy) walk in decreasing order, gap and trace(P^2)."""
    if as_network(net).n == 1:
        return SpectralSummary(np.ones(1), SINGLE_STATE_GAP, 1.0)
    a = _symmetrized(net, mode)
    lam = eigh(a, eigvals_only=True, check_finite=False)[::-1].copy()
    lam.setflags(write=False)
    gap = SINGLE_STATE_GAP if lam.size == 1 else float(1.0 - lam[1])
    # symmetric a is similar to P, so trace(P^2) = trace(a^2) = sum of squares
    return SpectralSummary(lam, gap, float(np.sum(a * a)))


def spectral_gap(net, mode="simple"):
    return spectrum(net, mode).gap


def second_eigenvector(net):
    """Right eigenvector f of P for lambda_2 (P f = lambda_2 f), unit norm in L2(pi)."""
    net = as_network(net)
    a = _symmetrized(net, "simple")
    lam, vec = eigh(a, subset_by_index=[net.n - 2, net.n - 2], check_finite=False)
    f = vec[:, 0] / np.sqrt(net.strength / net.strength.sum())
    f /= np.sqrt(np.sum(stationary(net) * f * f))
    # fix the sign so that results are reproducible
    j = int(np.argmax(np.abs(f)))
    return (f if f[j] > 0 else -f), float(lam[0])


def chain_gap(p, pi):
    """Gap of a transition matrix reversible with respect to ``pi``."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape[0] == 1:
        return SINGLE_STATE_GAP
    r = np.sqrt(np.asarray(pi, dtype=np.float64))
    s = r[:, None] * p / r[None, :]
    s = 0.5 * (s + s.T)
    lam = eigh(s, eigvals_only=True, subset_by_index=[p.shape[0] - 2, p.shape[0] - 2], check_finite=False)
    return float(1.0 - lam[0])


def dirichlet_form(net, f, mode="simple"):
    """E(f) = 1/2 sum_{x,y} pi(x) P(x,y) (f(x) - f(y))^2; the lazy walk halves it."""
    net = as_network(net)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (net.n,):
        raise ParameterError("function dimension mismatch")
    if mode not in ("simple", "lazy"):
        raise ParameterError(f"unknown mode {mode!r}")
    total = net.strength.sum()
    diff = f[net.row_ids] - f[net.indices]
    e = 0.5 * float(np.sum(net.weights * diff * diff)) / total
    return 0.5 * e if mode == "lazy" else e


@dataclass(frozen=True)
class ProjectionChain:
    matrix: np.ndarray
    pi: np.ndarray

    @property
    def gap(self):
        return chain_gap(self.matrix, self.pi)


@dataclass(frozen=True)
class RestrictionChain:
    block: int
    vertices: np.ndarray
    matrix: np.ndarray
    pi: np.ndarray

    @property
    def gap(self):
        return chain_gap(self.matrix, self.pi)


def _as_partition(partition, n):
    if isinstance(partition, Partition):
        if partition.n != n:
            raise ParameterError("partition size does not match the network")
        return partition
    return Partition.from_blocks(partition, n)


def projection_chain(net, partition):
    """Block chain P(i, j) = (1/pi(V_i)) sum_{v in V_i, u in V_j} pi(v) P(v, u)."""
    net = as_network(net)
    part = _as_partition(partition, net.n)
    pi = stationary(net)
    b = part.block_of
    flow = np.zeros((part.k, part.k))
    total = net.strength.sum()
    np.add.at(flow, (b[net.row_ids], b[net.indices]), net.weights / total)
    flow[b, b] += net.loops / total
    pbar = np.bincount(b, weights=pi, minlength=part.k)
    return ProjectionChain(flow / pbar[:, None], pbar)


def restriction_chain(net, partition, i):
    """Walk inside block i; mass leaving the block stays put."""
    net = as_network(net)
    part = _as_partition(partition, net.n)
    if not 0 <= i < part.k:
        raise ParameterError(f"no block {i}")
    ids = part.blocks[i]
    p = transition_matrix(net)[np.ix_(ids, ids)]
    off = p.copy()
    off[np.diag_indices(ids.size)] = 0.0
    p[np.diag_indices(ids.size)] = 1.0 - off.sum(axis=1)
    pi = stationary(net)[ids]
    return RestrictionChain(i, ids, p, pi / pi.sum())


def jsvt_lower_bound(net, partition):
    """min_i gap(projection) gap(restriction_i) / 6; the plain gap when k = 1."""
    net = as_network(net)
    part = _as_partition(partition, net.n)
    if part.k == 1:
        return spectrum(net).gap
    gbar = projection_chain(net, part).gap
    return min(gbar * restriction_chain(net, part, i).gap for i in range(part.k)) / 6.0


def lazy_vector_gap_bound(gap_p, alpha):
    """(1 - alpha) gap_p: lower bound on the gap after holding at v with probability p_v < alpha."""
    if not 0 <= alpha < 1:
        raise ParameterError("alpha must lie in [0, 1)")
    return (1.0 - alpha) * gap_p


def lazy_vector_gap(net, lazy):
    """Exact gap of Q = diag(p) + diag(1 - p) P."""
    net = as_network(net)
    lazy = np.asarray(lazy, dtype=np.float64)
    if lazy.shape != (net.n,) or np.any(lazy < 0) or np.any(lazy >= 1):
        raise ParameterError("lazy vector entries must lie in [0, 1)")
    q = transition_matrix(net, "lazy-vector", lazy)
    # Q is reversible with respect to pi(v) / (1 - p_v), normalized
    mu = stationary(net) / (1 - lazy)
    return chain_gap(q, mu / mu.sum())


def check_lazy_vector(net, lazy):
    """Return ``(exact, bound)`` with alpha = max p_v."""
    exact = lazy_vector_gap(net, lazy)
    gap_p = spectrum(net).gap
    alpha = float(np.max(lazy)) if np.size(lazy) else 0.0
    return exact, lazy_vector_gap_bound(gap_p, alpha)


def path_congestion(net, paths=None):
    """The congestion B = max_e (1/Q(e)) sum_{paths through e} pi(x) pi(y) |path|.

    ``paths`` maps every ordered pair ``(x, y)``, ``x != y``, to a vertex
    sequence from x to y.  By default BFS shortest paths with smallest-id
    parents are used.
    """
    net = as_network(net)
    if net.n > DENSE_MAX_N:
        raise SizeGuardError(f"path congestion is limited to n <= {DENSE_MAX_N}")
    pi = stationary(net)
    total = net.strength.sum()
    q = net.weight_matrix() / total
    if paths is None:
        pos = net.weights > 0
        g = Graph(net.n, net.edges[net.edge_weights > 0]) if not np.all(pos) else net
        load, ok = _kernels.bfs_path_loads(g.indptr, g.indices, pi)
        if not ok:
            raise InvalidPathError("some pair of vertices is not joined by a positive-weight path")
    else:
        load = _custom_loads(net.n, q, pi, paths)
    used = load > 0
    if not used.any():
        return 0.0
    return float(np.max(load[used] / q[used]))


def _custom_loads(n, q, pi, paths):
    load = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            if (x, y) not in paths:
                raise InvalidPathError(f"no path supplied for the pair ({x}, {y})")
            seq = [int(v) for v in paths[(x, y)]]
            if len(seq) < 2 or seq[0] != x or seq[-1] != y:
                raise InvalidPathError(f"path for ({x}, {y}) must run from {x} to {y}")
            a, b = np.array(seq[:-1]), np.array(seq[1:])
            if np.any(q[a, b] <= 0):
                raise InvalidPathError(f"path for ({x}, {y}) uses an edge with Q(e) = 0")
            np.add.at(load, (a, b), pi[x] * pi[y] * (len(seq) - 1))
    return load


def path_method_bound(net, paths=None):
    """1 / B for the canonical-path congestion B."""
    b = path_congestion(net, paths)
    return np.inf if b == 0 else 1.0 / b


def block_gaps(g, partition):
    """Gap of every induced block graph; 0 for a disconnected block, 2 for a single vertex."""
    out = np.empty(partition.k)
    for i, ids in enumerate(partition.blocks):
        sub, _ = induced_subgraph(g, ids)
        if sub.n == 1:
            out[i] = SINGLE_STATE_GAP
        elif not sub.is_connected():
            out[i] = 0.0
        else:
            out[i] = spectrum(sub).gap
    return out


def internal_degrees(g, partition):
    """deg(v, V_i) for the block V_i containing v."""
    b = partition.block_of
    same = b[g.row_ids] == b[g.indices]
    return np.bincount(g.row_ids[same], minlength=g.n)


def decomposition_gap_params(g, partition):
    """Largest admissible ``(a, b, c)``: min block gap, min internal degree, and
    c just below the bottleneck edge count that keeps H(partition, c) connected."""
    a = float(block_gaps(g, partition).min())
    b = int(internal_degrees(g, partition).min())
    if partition.k == 1:
        return a, b, 0.0
    cm = block_cut_matrix(g, partition)
    for val in sorted(set(cm[np.triu_indices(partition.k, 1)].tolist()), reverse=True):
        if val > 0 and h_graph(g, partition, val - 0.5).is_connected():
            return a, b, val - 0.5
    return a, b, -1.0


def decomposition_gap_bound(g, partition, a, b, c, check=True):
    """min{a, abc / (6 k n^3)} after checking the hypotheses on ``partition``.

    Hypotheses: every block graph has gap at least ``a``, every vertex has at
    least ``b`` neighbors in its own block, and H(partition, c) is connected.
    """
    if not isinstance(g, Graph):
        raise ParameterError("decomposition_gap_bound needs an unweighted Graph")
    part = _as_partition(partition, g.n)
    if a <= 0 or b <= 0 or c < 0:
        raise ParameterError("a and b must be positive and c nonnegative")
    if check:
        gaps = block_gaps(g, part)
        if np.any(gaps < a - BOUND_SLACK):
            i = int(np.argmin(gaps))
            raise HypothesisViolation("block-gap", f"block {i} has gap {gaps[i]:.6g} < a = {a:.6g}")
        deg = internal_degrees(g, part)
        if np.any(deg < b):
            v = int(np.argmin(deg))
            raise HypothesisViolation("internal-degree", f"vertex {v} has {deg[v]} neighbors in its block < b = {b}")
        if not h_graph(g, part, c).is_connected():
            raise HypothesisViolation("block-graph-connected", f"H(partition, {c}) is disconnected")
    if part.k == 1:
        return float(a)
    return float(min(a, a * b * c / (6.0 * part.k * g.n ** 3)))

"""Bubble sums, the diameter-tail constant, and Monte Carlo probes of walk behaviour."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import _kernels
from .errors import ParameterError, SizeGuardError, TailDivergence
from .graph import as_network, edge_boundary, vertex_mask
from .rng import as_generator
from .tolerances import DENSE_MAX_N
from .walk import kernel_args, mixing_time_exact


@dataclass(frozen=True)
class BubbleSumResult:
    value: float
    t_max: int
    tail: float
    rho: float
    series: np.ndarray = None

    @property
    def interval(self):
        return (self.value, self.value + self.tail)

    @property
    def upper(self):
        return self.value + self.tail


def _killed_eigensystem(net, mask):
    keep = np.flatnonzero(~mask)
    s = 1.0 / np.sqrt(net.strength[keep])
    a = net.weight_matrix()[np.ix_(keep, keep)] * s[:, None] * s[None, :]
    lam, vec = eigh(a, check_finite=False)
    return lam, vec * vec


def bubble_sum(net, w, t_max=None, rho_cap=1.0 - 1e-9, series=False, tol=1e-9):
    """sum_{t >= 0} (t + 1) max_v P_v(X_t = v, tau_W > t), as a certified interval.

    The first ``t_max + 1`` terms are summed exactly from the eigenvectors of
    the symmetrized killed operator.  Every return probability at time t is
    at most rho^t, rho being that operator's spectral radius, which bounds the
    rest.  Without ``t_max`` the partial sum runs until the tail drops below
    ``tol``.
    """
    net = as_network(net)
    net.require_connected()
    if net.n > DENSE_MAX_N:
        raise SizeGuardError(f"bubble sums are limited to n <= {DENSE_MAX_N}")
    mask = vertex_mask(w, net.n)
    if not mask.any():
        raise ParameterError("the killing set must be nonempty")
    if mask.all():
        return BubbleSumResult(0.0, 0 if t_max is None else int(t_max), 0.0, 0.0,
                               np.zeros(1) if series else None)
    lam, sq = _killed_eigensystem(net, mask)
    rho = float(np.max(np.abs(lam)))
    if rho >= rho_cap:
        raise TailDivergence(f"killed spectral radius {rho:.12g} >= cap {rho_cap}")

    def tail(t):
        # sum_{s > t} (s + 1) rho^s
        return ((t + 2) * rho ** (t + 1) - (t + 1) * rho ** (t + 2)) / (1 - rho) ** 2

    if t_max is None:
        t_max = 0
        while tail(t_max) > tol:
            t_max = max(2 * t_max, 16)
    t_max = int(t_max)
    sups = np.empty(t_max + 1)
    powers = np.ones_like(lam)
    for t in range(t_max + 1):
        sups[t] = float(np.max(sq @ powers))
        powers = powers * lam
    value = float(np.sum((np.arange(t_max + 1) + 1) * sups))
    return BubbleSumResult(value, t_max, float(tail(t_max)), rho, sups if series else None)


def mns_c3(d_ratio, bubble):
    """138420 D^4 B^3 log(192 D B)."""
    if d_ratio < 1:
        raise ParameterError("the degree ratio D is at least 1")
    if bubble < 1:
        raise ParameterError("bubble sums below 1 are outside the formula's domain")
    if 192 * d_ratio * bubble <= 1:
        raise ParameterError("log argument 192 D B must exceed 1")
    return 138420.0 * d_ratio ** 4 * bubble ** 3 * math.log(192.0 * d_ratio * bubble)


def diameter_tail_bound(c3, w_size, ell):
    """C3 |W| / ell, the bound on Pr(diam(UST(G/W)) >= ell)."""
    if ell < 1:
        raise ParameterError("ell must be at least 1")
    return c3 * w_size / ell


def degree_ratio(g):
    deg = as_network(g).strength
    return float(deg.max() / deg.min())


@dataclass(frozen=True)
class ProbeResult:
    estimate: float
    stderr: float
    trials: int
    seed: int | None
    horizon: int


def _binomial(hits, trials):
    p = hits / trials
    return p, math.sqrt(max(p * (1 - p), 0.0) / trials)


def hit_horizon(g, eps):
    """2 (t_mix(eps/2) + floor(sqrt n)) for the lazy walk on ``g``."""
    n = as_network(g).n
    return 2 * (mixing_time_exact(g, eps / 2) + math.isqrt(n))


def probe_hit_large_set(g, u, v, horizon, trials, rng, eps=None):
    """Monte Carlo Pr_v(X[0, horizon] meets U) for the simple walk."""
    net = as_network(g)
    mask = vertex_mask(u, net.n)
    if eps is not None and mask.sum() < eps * math.sqrt(net.n):
        warnings.warn(f"|U| = {int(mask.sum())} is below eps*sqrt(n) = {eps * math.sqrt(net.n):.4g}",
                      stacklevel=2)
    gen, seed = as_generator(rng)
    hits = _kernels.hit_within(*kernel_args(net), int(v), mask, int(horizon), int(trials), gen)
    p, se = _binomial(hits, trials)
    return ProbeResult(p, se, int(trials), seed, int(horizon))


@dataclass(frozen=True)
class StayProbe:
    block: int
    vertices: np.ndarray
    escape: np.ndarray
    stay: np.ndarray
    trials: int
    horizon: int
    escape_bound: float
    stay_threshold: float
    selected: np.ndarray
    seed: int | None

    @property
    def escape_frequency(self):
        return float(self.escape.mean())

    @property
    def escape_stderr(self):
        p = self.escape_frequency
        return math.sqrt(max(p * (1 - p), 0.0) / (self.trials * self.vertices.size))


def probe_stay_in_block(g, gd, i, c, trials, rng, vertices=None):
    """Per start vertex of block ``i``: how often the walk steps out within C sqrt(n) steps.

    ``escape[v]`` estimates Pr_v(exists t in [1, C sqrt n]: X_t in V_i, X_{t+1} not in V_i)
    and ``stay[v]`` estimates Pr_v(X[0, C sqrt n] inside V_i).  ``selected``
    holds the vertices whose stay estimate reaches 1 - 80 C theta^2 eps^9 / delta^6.
    """
    net = as_network(g)
    gen, seed = as_generator(rng)
    block = gd.partition.mask(i)
    ids = gd.partition.blocks[i] if vertices is None else np.asarray(vertices, dtype=np.int64)
    horizon = int(math.floor(c * math.sqrt(net.n)))
    th, eps, dl = gd.theta, gd.epsilon, gd.delta
    esc = np.zeros(ids.size)
    stay = np.zeros(ids.size)
    if edge_boundary(g, block) == 0:
        stay[:] = 1.0
    else:
        args = kernel_args(net)
        for j, v in enumerate(ids):
            e, s = _kernels.block_exits(*args, int(v), block, horizon, int(trials), gen)
            esc[j], stay[j] = e / trials, s / trials
    thr = 1 - 80 * c * th * th * eps ** 9 / dl ** 6
    return StayProbe(i, ids, esc, stay, int(trials), horizon, c * th * th * eps ** 9 / dl ** 2,
                     thr, ids[stay >= thr], seed)


def select_path_endpoints(g, gd, i, rng, c=1.0, trials=200):
    """Two vertices of block i with the highest estimated stay-in-block probability.

    Ties go to smaller ids.  The probe is skipped when no edge leaves the block,
    every vertex then stays with probability one and the two smallest ids are used.
    """
    block = gd.partition.blocks[i]
    if block.size < 2:
        raise ParameterError("a block needs two vertices to host a path")
    if edge_boundary(g, gd.partition.mask(i)) == 0:
        return int(block[0]), int(block[1])
    probe = probe_stay_in_block(g, gd, i, c, trials, rng)
    order = np.lexsort((probe.vertices, -probe.stay))
    return int(probe.vertices[order[0]]), int(probe.vertices[order[1]])

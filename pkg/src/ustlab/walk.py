"""Random walks on networks: traces, exact distributions and mixing times.

Distributions are plain float vectors indexed by vertex.  Mixing times always
refer to the lazy walk; trajectories default to the non-lazy walk.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DisconnectedError, ParameterError, SizeGuardError
from .graph import as_network, vertex_mask
from .rng import as_generator
from .tolerances import DENSE_MAX_N, STOCHASTIC_TOL

SIMPLE, LAZY, LAZY_VECTOR = "simple", "lazy", "lazy-vector"
_MODE_CODES = {SIMPLE: 0, LAZY: 1, LAZY_VECTOR: 2}
# unit-weight networks pick neighbors uniformly and never read the running sums
_NO_WEIGHTS = np.zeros(0)


@dataclass(frozen=True)
class WalkTrace:
    vertices: np.ndarray
    stopped_by: str
    seed: int | None = None

    def __len__(self):
        return len(self.vertices)

    @property
    def steps(self):
        return len(self.vertices) - 1

    def to_json(self):
        return json.dumps({"vertices": self.vertices.tolist(), "stopped_by": self.stopped_by,
                           "seed": self.seed}, separators=(",", ":"))


def kernel_args(net):
    """Positional CSR arguments shared by the compiled samplers."""
    cumw = _NO_WEIGHTS if net.unit else net.cumulative_weights
    return (net.indptr, net.indices, cumw, net.strength, net.loops, net.unit)


def check_distribution(d, n=None):
    d = np.asarray(d, dtype=np.float64)
    if n is not None and d.shape != (n,):
        raise ParameterError(f"distribution has shape {d.shape}, expected ({n},)")
    if np.any(d < 0) or abs(d.sum() - 1.0) > 1e3 * STOCHASTIC_TOL:
        raise ParameterError("not a probability vector")
    return d


def stationary(net):
    """pi(v) = strength(v) / total strength."""
    net = as_network(net)
    if not net.is_connected():
        raise DisconnectedError("stationary distribution needs a connected network")
    return net.strength / net.strength.sum()


def _lazy_vector(net, mode, lazy_vector):
    if mode != LAZY_VECTOR:
        return np.zeros(net.n)
    p = np.asarray(lazy_vector, dtype=np.float64)
    if p.shape != (net.n,) or np.any(p < 0) or np.any(p >= 1):
        raise ParameterError("lazy vector entries must lie in [0, 1)")
    return p


def walk(net, start, rng, mode=SIMPLE, lazy_vector=None, budget=None, target=None):
    """Run one walk from ``start`` until it enters ``target`` or spends ``budget`` steps.

    A walk that runs out of budget before reaching an unreachable target is
    reported with ``stopped_by="step-budget"``.
    """
    net = as_network(net)
    if mode not in _MODE_CODES:
        raise ParameterError(f"unknown walk mode {mode!r}")
    if not 0 <= start < net.n:
        raise ParameterError("start vertex out of range")
    if budget is None and target is None:
        raise ParameterError("give a step budget, a target set, or both")
    gen, seed = as_generator(rng)
    tmask = np.zeros(net.n, np.bool_) if target is None else vertex_mask(target, net.n)
    lv = _lazy_vector(net, mode, lazy_vector)
    trace, hit = _kernels.walk(*kernel_args(net), int(start), tmask,
                               -1 if budget is None else int(budget), _MODE_CODES[mode], lv, gen)
    if hit:
        stopped = "hit-rho" if net.rho is not None and trace[-1] == net.rho else "hit-target-set"
    else:
        stopped = "step-budget"
    trace.setflags(write=False)
    return WalkTrace(trace, stopped, seed)


def tv_distance(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"dimension mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def step_distribution(net, d, mode=SIMPLE, lazy_vector=None):
    """One application of the transition operator to the row vector ``d``."""
    net = as_network(net)
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (net.n,):
        raise ParameterError("distribution dimension mismatch")
    share = d / net.strength
    moved = np.bincount(net.indices, weights=np.repeat(share, net.degrees) * net.weights, minlength=net.n)
    moved += share * net.loops
    if mode == SIMPLE:
        return moved
    if mode == LAZY:
        return 0.5 * (d + moved)
    p = _lazy_vector(net, mode, lazy_vector)
    return p * d + step_distribution(net, (1 - p) * d)


def transition_matrix(net, mode=SIMPLE, lazy_vector=None):
    net = as_network(net)
    if net.n > DENSE_MAX_N:
        raise SizeGuardError(f"dense operators are limited to n <= {DENSE_MAX_N}")
    p = net.transition_matrix()
    if mode == LAZY:
        p = 0.5 * (p + np.eye(net.n))
    elif mode == LAZY_VECTOR:
        lv = _lazy_vector(net, mode, lazy_vector)
        p = (1 - lv)[:, None] * p + np.diag(lv)
    return p


def mixing_time_exact(net, eps, max_t=1_000_000):
    """Least t with max_v TV(p^t(v, .), pi) < eps for the lazy walk (dense powering)."""
    net = as_network(net)
    if not 0 < eps < 0.5:
        raise ParameterError("eps must lie in (0, 1/2)")
    if net.n > DENSE_MAX_N:
        raise SizeGuardError(f"exact mixing times are limited to n <= {DENSE_MAX_N}")
    pi = stationary(net)
    q = transition_matrix(net, LAZY)
    m = np.eye(net.n)
    for t in range(max_t + 1):
        if 0.5 * np.abs(m - pi).sum(axis=1).max() < eps:
            return t
        m = m @ q
    raise SizeGuardError(f"lazy walk not mixed to {eps} within {max_t} steps")


def mixing_time_upper_bound(gamma, n, eps, delta):
    """ceil(log2 n) + ceil(log(sqrt(2) / (eps delta)) / gamma).

    ``gamma`` is the lazy-walk spectral gap and ``delta`` a lower bound on
    min_degree / n.
    """
    if not 0 < gamma <= 1:
        raise ParameterError("gamma must lie in (0, 1]")
    if not 0 < delta <= 1:
        raise ParameterError("delta must lie in (0, 1]")
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    return math.ceil(math.log2(n)) + math.ceil(math.log(math.sqrt(2) / (eps * delta)) / gamma)


def check_mixing_bound(g, eps):
    """Return ``(exact, bound, exact <= bound)`` using the graph's own min-degree ratio."""
    from .spectral import spectrum

    net = as_network(g)
    exact = mixing_time_exact(net, eps)
    gamma = spectrum(net, LAZY).gap
    delta = float(net.strength.min()) / net.n
    bound = mixing_time_upper_bound(gamma, net.n, eps, delta)
    return exact, bound, exact <= bound


def killed_transition(net, w):
    """Transition matrix with rows and columns of ``w`` zeroed."""
    p = transition_matrix(net)
    mask = vertex_mask(w, p.shape[0])
    p[mask, :] = 0.0
    p[:, mask] = 0.0
    return p


def killed_return_prob(net, w, v, t):
    """P_v(X_t = v, tau_W > t) by powering the killed operator."""
    net = as_network(net)
    mask = vertex_mask(w, net.n)
    if mask[v]:
        return 0.0
    p = killed_transition(net, mask)
    row = np.zeros(net.n)
    row[v] = 1.0
    for _ in range(int(t)):
        row = row @ p
    return float(row[v])

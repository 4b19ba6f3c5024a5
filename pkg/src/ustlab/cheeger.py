"""Cheeger constant: exact by subset enumeration, and a spectral sweep upper bound."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import GraphError, SizeGuardError
from .graph import Graph
from .spectral import second_eigenvector
from .tolerances import CHEEGER_MAX_N


@dataclass(frozen=True)
class CheegerResult:
    value: float
    cut: int
    volume: int
    vertices: tuple

    @property
    def exact(self):
        return Fraction(self.cut, self.volume)


def neighbor_bits(g, ids=None):
    """Neighbor bitmask per vertex (of ``g[ids]`` when ``ids`` is given; bit j = local vertex j)."""
    if ids is None:
        ids = np.arange(g.n)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size > 62:
        raise SizeGuardError("bitmask routines handle at most 62 vertices")
    sub = g.adjacency_bitmap[np.ix_(ids, ids)]
    weights = np.left_shift(np.int64(1), np.arange(ids.size, dtype=np.int64))
    return (sub * weights[None, :]).sum(axis=1).astype(np.int64)


def _unpack(mask, n):
    return tuple(v for v in range(n) if (mask >> v) & 1)


def cheeger_exact(g):
    """min over S with vol(S) <= vol(V)/2 of |boundary(S)| / vol(S), by Gray-code enumeration."""
    if not isinstance(g, Graph):
        raise GraphError("cheeger_exact expects an unweighted Graph")
    if g.n > CHEEGER_MAX_N:
        raise SizeGuardError(f"exact Cheeger constant is limited to n <= {CHEEGER_MAX_N}")
    if g.n < 2 or g.m == 0:
        raise GraphError("Cheeger constant needs at least one edge")
    cut, vol, mask = _kernels.min_conductance(neighbor_bits(g), g.degrees.astype(np.int64),
                                              _kernels._POPCOUNT16)
    return CheegerResult(cut / vol, int(cut), int(vol), _unpack(int(mask), g.n))


def cheeger_sweep(g):
    """Best conductance among prefixes of the second-eigenvector ordering (an upper bound on Phi)."""
    if not isinstance(g, Graph):
        raise GraphError("cheeger_sweep expects an unweighted Graph")
    if g.n < 2:
        raise GraphError("Cheeger constant needs at least two vertices")
    f, _ = second_eigenvector(g)
    order = np.lexsort((np.arange(g.n), f))
    pos = np.empty(g.n, np.int64)
    pos[order] = np.arange(g.n)
    deg = g.degrees
    total = int(deg.sum())
    # an edge u-v is cut by prefix j exactly when min(pos) <= j < max(pos)
    lo = np.minimum(pos[g.edges[:, 0]], pos[g.edges[:, 1]])
    hi = np.maximum(pos[g.edges[:, 0]], pos[g.edges[:, 1]])
    delta = np.zeros(g.n + 1, np.int64)
    np.add.at(delta, lo, 1)
    np.add.at(delta, hi, -1)
    cut = np.cumsum(delta)[:-1]
    vol = np.cumsum(deg[order])
    small = np.minimum(vol, total - vol)[:-1]
    cut = cut[:-1]
    best_j, best = -1, None
    for j in range(g.n - 1):
        if small[j] == 0:
            continue
        # exact comparison of cut/small against the current best
        if best is None or cut[j] * best[1] < best[0] * small[j]:
            best, best_j = (int(cut[j]), int(small[j])), j
    prefix = order[:best_j + 1]
    side = prefix if 2 * vol[best_j] <= total else order[best_j + 1:]
    return CheegerResult(best[0] / best[1], best[0], best[1], tuple(sorted(int(v) for v in side)))

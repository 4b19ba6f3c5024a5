"""Loop erasure, Wilson's algorithm and spanning-tree queries."""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import _kernels
from .errors import BudgetExceeded, GraphError, ParameterError, SizeGuardError
from .graph import as_network
from .rng import as_generator
from .tolerances import KIRCHHOFF_MAX_N
from .walk import WalkTrace, kernel_args, walk


@dataclass(frozen=True)
class LoopErasedPath:
    vertices: tuple
    seed: int | None = None

    def __len__(self):
        return len(self.vertices)

    @property
    def edge_count(self):
        return len(self.vertices) - 1


def loop_erase(trace):
    """Chronological loop erasure of a finite walk.

    LE_0 = X_0 and, with s_i the last time the walk visits LE_i, the next
    vertex is X_{s_i + 1}; stop once s_i is the final index.
    """
    seed = trace.seed if isinstance(trace, WalkTrace) else None
    xs = trace.vertices if isinstance(trace, WalkTrace) else trace
    xs = [int(x) for x in xs]
    if not xs:
        raise ParameterError("cannot loop-erase an empty walk")
    last = {x: t for t, x in enumerate(xs)}
    end = len(xs) - 1
    out = [xs[0]]
    s = last[xs[0]]
    while s < end:
        v = xs[s + 1]
        out.append(v)
        s = last[v]
    return LoopErasedPath(tuple(out), seed)


class SpanningTree:
    """Spanning tree stored as a parent array (``parent[root] == -1``)."""

    def __init__(self, parent, seed=None):
        parent = np.array(parent, dtype=np.int64)
        roots = np.flatnonzero(parent < 0)
        if roots.size != 1:
            raise GraphError("a parent array needs exactly one root")
        parent.setflags(write=False)
        self.parent = parent
        self.root = int(roots[0])
        self.n = parent.size
        self.seed = seed

    def __repr__(self):
        return f"SpanningTree(n={self.n}, root={self.root})"

    def __eq__(self, other):
        return isinstance(other, SpanningTree) and self.edge_set() == other.edge_set()

    def __hash__(self):
        return hash(self.edge_set())

    @property
    def edges(self):
        """Tree edges as sorted ``(min, max)`` rows in lexicographic order."""
        v = np.flatnonzero(self.parent >= 0)
        p = self.parent[v]
        e = np.stack([np.minimum(v, p), np.maximum(v, p)], axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def edge_set(self):
        return frozenset(map(tuple, self.edges.tolist()))

    def is_tree(self):
        return _kernels.tree_diameter(self.parent) >= 0

    def validate(self, net):
        """Raise unless this is a spanning tree of ``net`` using positive-weight edges."""
        net = as_network(net)
        if self.n != net.n:
            raise GraphError("tree and network have different vertex counts")
        if not self.is_tree():
            raise GraphError("parent array contains a cycle or is disconnected")
        for u, v in self.edges.tolist():
            if net.weight(u, v) <= 0:
                raise GraphError(f"tree edge ({u}, {v}) is not a positive-weight network edge")
        return True

    def depth(self):
        d = np.full(self.n, -1, np.int64)
        d[self.root] = 0
        for v in range(self.n):
            chain = []
            u = v
            while d[u] < 0:
                chain.append(u)
                u = self.parent[u]
            base = d[u]
            for k, x in enumerate(reversed(chain), 1):
                d[x] = base + k
        return d

    def path(self, u, v):
        """The unique tree path from ``u`` to ``v``."""
        d = self._depth
        left, right = [int(u)], [int(v)]
        a, b = int(u), int(v)
        while d[a] > d[b]:
            a = int(self.parent[a])
            left.append(a)
        while d[b] > d[a]:
            b = int(self.parent[b])
            right.append(b)
        while a != b:
            a, b = int(self.parent[a]), int(self.parent[b])
            left.append(a)
            right.append(b)
        return LoopErasedPath(tuple(left + right[-2::-1]))

    @property
    def _depth(self):
        if not hasattr(self, "_depth_cache"):
            self._depth_cache = self.depth()
        return self._depth_cache

    def diameter(self):
        return int(_kernels.tree_diameter(self.parent))

    def to_json(self):
        return json.dumps({"parent": self.parent.tolist(), "root": self.root, "seed": self.seed},
                          separators=(",", ":"))


def _check_ordering(ordering, n):
    order = np.asarray(ordering, dtype=np.int64)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise ParameterError("ordering must be a permutation of the vertices")
    return order


def wilson(net, rng, ordering=None, max_steps=0, check=True):
    """Sample a weighted uniform spanning tree; ``ordering[0]`` is the root.

    The default ordering is a random permutation drawn from ``rng``.
    ``max_steps > 0`` caps the total number of walk steps.  ``check=False``
    skips the connectivity test for callers sampling many trees of one network.
    """
    net = as_network(net)
    if check:
        net.require_connected()
    gen, seed = as_generator(rng)
    order = gen.permutation(net.n) if ordering is None else _check_ordering(ordering, net.n)
    parent, _, ok = _kernels.wilson(*kernel_args(net), order, gen, int(max_steps))
    if not ok:
        raise BudgetExceeded(f"Wilson's algorithm exceeded {max_steps} walk steps")
    return SpanningTree(parent, seed)


def sample_parents(net, count, rng):
    """``count`` independent trees as a ``(count, n)`` parent array (random ordering each)."""
    net = as_network(net)
    net.require_connected()
    gen, _ = as_generator(rng)
    return _kernels.wilson_batch(*kernel_args(net), int(count), gen)


def sample_trees(net, count, rng):
    return [SpanningTree(p) for p in sample_parents(net, count, rng)]


@dataclass(frozen=True)
class RootedRun:
    """Wilson's algorithm on an augmented network with rho as the initial tree."""
    tree: SpanningTree
    first_paths: list
    raw_lengths: list
    seed: int | None = None
    walk_lengths: np.ndarray = field(default=None, repr=False)


def wilson_rooted_at_rho(net_rho, first_vertices, rng, max_steps=0):
    """Run Wilson's algorithm with ordering ``(rho, *first_vertices, rest...)``.

    The walks from ``first_vertices`` are traced explicitly and loop-erased;
    ``first_paths[j]`` ends at a vertex of the tree built before it.  The
    remaining vertices follow in a random order.
    """
    net = as_network(net_rho)
    if net.rho is None:
        raise ParameterError("network has no rho vertex; build it with augment_rho")
    net.require_connected()
    gen, seed = as_generator(rng)
    rho = net.rho
    firsts = [int(v) for v in first_vertices]
    if len(set(firsts)) != len(firsts) or rho in firsts:
        raise ParameterError("first vertices must be distinct non-rho vertices")
    in_tree = np.zeros(net.n, np.bool_)
    in_tree[rho] = True
    nxt = np.full(net.n, -1, np.int64)
    paths, raw = [], []
    for v in firsts:
        if in_tree[v]:
            paths.append(LoopErasedPath((v,)))
            raw.append(0)
            continue
        tr = walk(net, v, gen, target=in_tree.copy(),
                  budget=max_steps if max_steps > 0 else None)
        if tr.stopped_by == "step-budget":
            raise BudgetExceeded(f"walk from {v} exceeded {max_steps} steps")
        le = loop_erase(tr)
        for a, b in zip(le.vertices, le.vertices[1:]):
            nxt[a] = b
            in_tree[a] = True
        paths.append(le)
        raw.append(tr.steps)
    rest = gen.permutation(np.flatnonzero(~in_tree))
    lens, ok = _kernels.grow_tree(*kernel_args(net), in_tree, nxt, rest, gen, int(max_steps))
    if not ok:
        raise BudgetExceeded(f"Wilson's algorithm exceeded {max_steps} walk steps")
    nxt[rho] = -1
    return RootedRun(SpanningTree(nxt, seed), paths, raw, seed, lens)


def tree_path(tree, u, v):
    return tree.path(u, v)


def tree_diameter(tree):
    parent = tree.parent if isinstance(tree, SpanningTree) else np.asarray(tree, dtype=np.int64)
    d = int(_kernels.tree_diameter(parent))
    if d < 0:
        raise GraphError("not a spanning tree")
    return d


def laplacian(net):
    net = as_network(net)
    return np.diag(net.strength - net.loops) - (net.weight_matrix() - np.diag(net.loops))


def spanning_tree_count(net):
    """Exact number of spanning trees of a unit-weight network (matrix-tree theorem)."""
    net = as_network(net)
    if net.n > KIRCHHOFF_MAX_N:
        raise SizeGuardError(f"spanning-tree counts are limited to n <= {KIRCHHOFF_MAX_N}")
    if not np.all(net.edge_weights == 1.0):
        raise ParameterError("weighted network: use log_tree_weight")
    if net.n == 1:
        return 1
    lap = np.rint(laplacian(net)).astype(np.int64)[1:, 1:]
    return int(sympy.Matrix(lap.tolist()).det(method="bareiss"))


def log_tree_weight(net):
    """log of sum over spanning trees of the product of edge weights; -inf if none."""
    net = as_network(net)
    if net.n > KIRCHHOFF_MAX_N:
        raise SizeGuardError(f"spanning-tree totals are limited to n <= {KIRCHHOFF_MAX_N}")
    if net.n == 1:
        return 0.0
    sign, logdet = np.linalg.slogdet(laplacian(net)[1:, 1:])
    return float(logdet) if sign > 0 else -math.inf


def edge_marginals(net):
    """Exact Pr(e in T) = w(e) R_eff(e) for every edge, in ``net.edges`` order."""
    net = as_network(net)
    net.require_connected()
    if net.n > KIRCHHOFF_MAX_N:
        raise SizeGuardError(f"exact marginals are limited to n <= {KIRCHHOFF_MAX_N}")
    lp = np.linalg.pinv(laplacian(net))
    u, v = net.edges[:, 0], net.edges[:, 1]
    reff = lp[u, u] + lp[v, v] - 2 * lp[u, v]
    return net.edge_weights * reff


def enumerate_spanning_trees(net):
    """All spanning trees as frozensets of ``(u, v)`` edges, by brute force (oracle for tests)."""
    net = as_network(net)
    edges = [tuple(e) for e, w in zip(net.edges.tolist(), net.edge_weights) if w > 0]
    if math.comb(len(edges), net.n - 1) > 5_000_000:
        raise SizeGuardError("too many edge subsets to enumerate")
    out = []
    for combo in itertools.combinations(edges, net.n - 1):
        root = list(range(net.n))

        def find(x):
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        for a, b in combo:
            ra, rb = find(a), find(b)
            if ra == rb:
                break
            root[ra] = rb
        else:
            out.append(frozenset(combo))
    return out


def edge_index(net):
    """``(n, n)`` matrix of edge ids in ``net.edges`` order, -1 off the edge set."""
    net = as_network(net)
    idx = np.full((net.n, net.n), -1, np.int64)
    ids = np.arange(net.m)
    idx[net.edges[:, 0], net.edges[:, 1]] = ids
    idx[net.edges[:, 1], net.edges[:, 0]] = ids
    return idx


def tree_keys(net, parents):
    """Bitmask of edge ids for each tree in a ``(count, n)`` parent array (needs m <= 62)."""
    net = as_network(net)
    if net.m > 62:
        raise SizeGuardError("tree keys need at most 62 edges")
    parents = np.atleast_2d(parents)
    idx = edge_index(net)
    child = np.broadcast_to(np.arange(net.n), parents.shape)
    has = parents >= 0
    eid = np.where(has, idx[child, np.where(has, parents, 0)], 0)
    bits = np.where(has, np.left_shift(np.int64(1), eid), 0)
    return bits.sum(axis=1)


def edge_set_key(net, edges):
    idx = edge_index(net)
    return int(sum(1 << int(idx[u, v]) for u, v in edges))


@dataclass(frozen=True)
class DominationReport:
    edges: np.ndarray
    freq_big: np.ndarray
    freq_small: np.ndarray
    stderr: np.ndarray
    samples: int
    violations: list


def domination_probe(g, h, samples, rng, z=4.0):
    """Compare Pr(e in UST(h)) with Pr(e in UST(g)) on the edges of ``g``.

    ``g`` must be a subgraph of ``h`` on the vertex ids ``0..g.n-1``.  Edges
    where the first frequency exceeds the second by more than ``z`` standard
    errors are listed in ``violations``.
    """
    gen, _ = as_generator(rng)
    gn, hn = as_network(g), as_network(h)
    if gn.n > hn.n:
        raise ParameterError("g has more vertices than h")
    for u, v in gn.edges.tolist():
        if hn.weight(u, v) <= 0:
            raise ParameterError(f"edge ({u}, {v}) of g is missing from h")
    small = _edge_frequencies(gn, gn.edges, sample_parents(gn, samples, gen))
    big = _edge_frequencies(hn, gn.edges, sample_parents(hn, samples, gen))
    se = np.sqrt((big * (1 - big) + small * (1 - small)) / samples)
    bad = [tuple(gn.edges[i].tolist()) for i in np.flatnonzero(big - small > z * se + 1e-15)]
    return DominationReport(gn.edges.copy(), big, small, se, int(samples), bad)


def _edge_frequencies(net, edges, parents):
    idx = edge_index(net)
    n = parents.shape[1]
    child = np.broadcast_to(np.arange(n), parents.shape)
    has = parents >= 0
    eid = idx[child[has], parents[has]]
    counts = np.bincount(eid, minlength=net.m)
    return counts[idx[edges[:, 0], edges[:, 1]]] / parents.shape[0]


def lift_tree(cmap, tree, rng):
    """Map a spanning tree of a contracted network back to original edges.

    Each contracted edge is replaced by one of its preimage edges, chosen with
    probability proportional to its weight.  Contracting a single edge e and
    lifting a weighted UST of G/e, then adding e, gives UST(G) conditioned on
    containing e.
    """
    gen, _ = as_generator(rng)
    out = []
    for a, b in tree.edges.tolist():
        pre = cmap.preimage_edges(a, b)
        w = np.array([x[2] for x in pre])
        k = int(np.searchsorted(np.cumsum(w), gen.random() * w.sum(), side="right"))
        u, v, _ = pre[min(k, len(pre) - 1)]
        out.append((min(u, v), max(u, v)))
    return sorted(out)

"""Graphs, weighted networks and the structural operations on them.

Vertex sets are passed around as anything :func:`vertex_mask` understands: an
iterable of vertex ids or a boolean membership mask of length ``n``.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DisconnectedError, GraphError, ParameterError, ParseError
from .tolerances import DENSE_MAX_N


def vertex_mask(s, n):
    """Boolean membership mask of length ``n`` for the vertex set ``s``."""
    if isinstance(s, np.ndarray) and s.dtype == np.bool_:
        if s.shape != (n,):
            raise GraphError(f"mask has shape {s.shape}, expected ({n},)")
        return s
    if isinstance(s, (set, frozenset)):
        s = sorted(s)
    idx = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise GraphError(f"vertex id out of range 0..{n - 1}")
    mask = np.zeros(n, dtype=np.bool_)
    mask[idx] = True
    return mask


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _csr_from_pairs(n, u, v, data=None):
    """Symmetric CSR (indptr, indices[, data]) with each row sorted by neighbor id."""
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int64)
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    if data is None:
        return indptr, indices
    return indptr, indices, np.concatenate([data, data])[order].astype(np.float64)


def _normalize_edges(n, edges):
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError("edges must be an (m, 2) array of vertex pairs")
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise GraphError(f"vertex id out of range 0..{n - 1}")
    if np.any(arr[:, 0] == arr[:, 1]):
        bad = arr[arr[:, 0] == arr[:, 1]][0]
        raise GraphError(f"self-loop at vertex {bad[0]}")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keys = lo * n + hi
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    dup = np.nonzero(sk[1:] == sk[:-1])[0]
    if dup.size:
        k = sk[dup[0]]
        raise GraphError(f"duplicate edge ({k // n}, {k % n})")
    return lo[order], hi[order], order


class Graph:
    """Simple undirected graph on ``0..n-1``.

    Stored as sorted neighbor lists in CSR form; immutable after construction.
    """

    def __init__(self, n, edges=()):
        n = int(n)
        if n < 1:
            raise GraphError("a graph needs at least one vertex")
        lo, hi, _ = _normalize_edges(n, edges)
        self.n = n
        self.m = int(lo.size)
        self.edges = np.stack([lo, hi], axis=1)
        self.indptr, self.indices = _csr_from_pairs(n, lo, hi)
        self.degrees = np.diff(self.indptr)
        _freeze(self.edges, self.indptr, self.indices, self.degrees)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def row_ids(self):
        """Source vertex of every CSR entry."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        _freeze(rows)
        return rows

    @cached_property
    def adjacency_bitmap(self):
        if self.n > DENSE_MAX_N:
            raise GraphError(f"adjacency bitmap only kept for n <= {DENSE_MAX_N}")
        a = np.zeros((self.n, self.n), dtype=np.bool_)
        a[self.row_ids, self.indices] = True
        _freeze(a)
        return a

    def has_edge(self, u, v):
        if self.n <= DENSE_MAX_N:
            return bool(self.adjacency_bitmap[u, v])
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def adjacency_matrix(self):
        return self.adjacency_bitmap.astype(np.float64)

    def is_connected(self):
        if self.n == 1:
            return True
        a = csr_matrix((np.ones(self.indices.size), self.indices, self.indptr), shape=(self.n, self.n))
        return connected_components(a, directed=False, return_labels=False) == 1

    @cached_property
    def network(self):
        """Unit-weight network view of this graph."""
        return Network(self.n, self.edges, np.ones(self.m))

    def to_network(self):
        return self.network


class Network:
    """Connected-or-not weighted undirected graph with optional self-loop weights.

    ``rho`` marks the auxiliary vertex added by :func:`augment_rho`.
    """

    def __init__(self, n, edges=(), weights=None, loops=None, rho=None):
        n = int(n)
        if n < 1:
            raise GraphError("a network needs at least one vertex")
        lo, hi, order = _normalize_edges(n, edges)
        if weights is None:
            w = np.ones(lo.size)
        else:
            w = np.asarray(weights, dtype=np.float64).ravel()
            if w.size != lo.size:
                raise GraphError("one weight per edge is required")
            w = w[order]
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise GraphError("edge weights must be finite and nonnegative")
        self.n = n
        self.m = int(lo.size)
        self.edges = np.stack([lo, hi], axis=1)
        self.edge_weights = w
        self.indptr, self.indices, self.weights = _csr_from_pairs(n, lo, hi, w)
        self.loops = np.zeros(n) if loops is None else np.asarray(loops, dtype=np.float64).copy()
        if self.loops.shape != (n,) or np.any(self.loops < 0):
            raise GraphError("loop weights must be a nonnegative vector of length n")
        rows = np.repeat(np.arange(n), np.diff(self.indptr))
        self.strength = np.bincount(rows, weights=self.weights, minlength=n) + self.loops
        self.rho = rho
        self.unit = bool(np.all(w == 1.0) and not np.any(self.loops))
        _freeze(self.edges, self.edge_weights, self.indptr, self.indices, self.weights,
                self.loops, self.strength)

    def __repr__(self):
        return f"Network(n={self.n}, m={self.m}, unit={self.unit})"

    @classmethod
    def from_graph(cls, g):
        return g.network

    @property
    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    @cached_property
    def row_ids(self):
        rows = np.repeat(np.arange(self.n), self.degrees)
        _freeze(rows)
        return rows

    @cached_property
    def cumulative_weights(self):
        """Running sum of weights inside each CSR row (used to sample a neighbor)."""
        c = np.cumsum(self.weights)
        starts = self.indptr[:-1]
        offset = np.zeros(self.n)
        nz = starts < self.indptr[1:]
        offset[nz] = c[starts[nz]] - self.weights[starts[nz]]
        c = c - np.repeat(offset, self.degrees)
        _freeze(c)
        return c

    def weight(self, u, v):
        if u == v:
            return float(self.loops[u])
        nb, w = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return float(w[i]) if i < nb.size and nb[i] == v else 0.0

    def weight_matrix(self):
        if self.n > DENSE_MAX_N:
            raise GraphError(f"dense weight matrix only for n <= {DENSE_MAX_N}")
        a = np.zeros((self.n, self.n))
        a[self.row_ids, self.indices] = self.weights
        a[np.diag_indices(self.n)] += self.loops
        return a

    def transition_matrix(self, lazy=False):
        self.require_connected()
        p = self.weight_matrix() / self.strength[:, None]
        if lazy:
            p = 0.5 * (p + np.eye(self.n))
        return p

    def is_connected(self):
        if self.n == 1:
            return True
        pos = self.weights > 0
        a = csr_matrix((np.ones(int(pos.sum())), (self.row_ids[pos], self.indices[pos])),
                       shape=(self.n, self.n))
        return connected_components(a, directed=False, return_labels=False) == 1

    def require_connected(self):
        if self.n > 1 and (not self.is_connected() or np.any(self.strength <= 0)):
            raise DisconnectedError("operation needs a connected network with positive strengths")


def as_network(g):
    return g.network if isinstance(g, Graph) else g


# ---------------------------------------------------------------------------
# loading and dumping

def _finish(n, edges, weights, weighted, require_connected):
    if weighted:
        obj = Network(n, edges, weights)
    else:
        obj = Graph(n, edges)
    if require_connected and not obj.is_connected():
        raise DisconnectedError("graph is not connected")
    return obj


def _parse_edge_list(text):
    lines = text.splitlines()
    rows = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty input", line=1)
    head_line, head = rows[0]
    if len(head) != 2:
        raise ParseError("header must be 'n m'", line=head_line)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must hold two integers", line=head_line) from None
    if n < 1 or m < 0:
        raise ParseError("header needs n >= 1 and m >= 0", line=head_line)
    body = rows[1:]
    if len(body) != m:
        line = body[-1][0] if body else head_line
        raise ParseError(f"header announces {m} edges, found {len(body)}", line=line)
    edges, weights, seen = [], [], {}
    weighted = False
    for line, tok in body:
        if len(tok) not in (2, 3):
            raise ParseError("edge line must be 'u v' or 'u v w'", line=line)
        try:
            u, v = int(tok[0]), int(tok[1])
            w = float(tok[2]) if len(tok) == 3 else 1.0
        except ValueError:
            raise ParseError("malformed number", line=line) from None
        if len(tok) == 3:
            weighted = True
        _check_edge(n, u, v, w, seen, line)
        edges.append((u, v))
        weights.append(w)
    return n, edges, weights, weighted


def _check_edge(n, u, v, w, seen, line):
    if not (0 <= u < n and 0 <= v < n):
        raise ParseError(f"vertex id out of range 0..{n - 1}", line=line)
    if u == v:
        raise ParseError(f"self-loop at vertex {u}", line=line)
    if not (w >= 0 and np.isfinite(w)):
        raise ParseError("weights must be finite and nonnegative", line=line)
    key = (min(u, v), max(u, v))
    if key in seen:
        raise ParseError(f"duplicate edge {key} (first seen on line {seen[key]})", line=line)
    seen[key] = line


def _parse_document(doc):
    try:
        n = int(doc["n"])
        raw = doc.get("edges", [])
    except (KeyError, TypeError, ValueError):
        raise ParseError("document needs integer 'n' and an 'edges' list") from None
    if n < 1:
        raise ParseError("'n' must be positive")
    edges, weights, seen = [], [], {}
    weighted = False
    for i, e in enumerate(raw):
        if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
            raise ParseError(f"edge #{i} must be [u, v] or [u, v, w]")
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) == 3 else 1.0
        weighted |= len(e) == 3
        try:
            _check_edge(n, u, v, w, seen, i)
        except ParseError as exc:
            raise ParseError(f"edge #{i}: {str(exc).split(': ', 1)[1]}") from None
        edges.append((u, v))
        weights.append(w)
    return n, edges, weights, weighted


def _parse(source):
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, dict):
        return _parse_document(source)
    if source.lstrip().startswith("{"):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
        return _parse_document(doc)
    return _parse_edge_list(source)


def load_graph(source, require_connected=False):
    """Parse an edge list (``"n m"`` header then ``u v`` lines) or a JSON document.

    Weighted input is accepted only when every weight equals 1; use
    :func:`load_network` otherwise.
    """
    n, edges, weights, _ = _parse(source)
    if any(w != 1.0 for w in weights):
        raise ParseError("weighted input: use load_network")
    return _finish(n, edges, weights, False, require_connected)


def load_network(source, require_connected=False):
    n, edges, weights, _ = _parse(source)
    return _finish(n, edges, weights, True, require_connected)


def read_graph(path, require_connected=False):
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read(), require_connected=require_connected)


def dump_edge_list(g):
    lines = [f"{g.n} {g.m}"]
    if isinstance(g, Network) and not g.unit:
        lines += [f"{u} {v} {w!r}" for (u, v), w in zip(g.edges.tolist(), g.edge_weights.tolist())]
    else:
        lines += [f"{u} {v}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def dump_json(g):
    if isinstance(g, Network) and not g.unit:
        edges = [[u, v, w] for (u, v), w in zip(g.edges.tolist(), g.edge_weights.tolist())]
    else:
        edges = g.edges.tolist()
    return json.dumps({"n": g.n, "edges": edges}, separators=(",", ":"))


# ---------------------------------------------------------------------------
# structural operations

def induced_subgraph(g, s):
    """Return ``(G[s], ids)`` where ``ids[new] = old`` and new ids follow old order."""
    mask = vertex_mask(s, g.n)
    ids = np.flatnonzero(mask)
    if ids.size == 0:
        raise GraphError("induced subgraph of an empty vertex set")
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[ids] = np.arange(ids.size)
    keep = mask[g.edges[:, 0]] & mask[g.edges[:, 1]]
    e = remap[g.edges[keep]]
    return Graph(ids.size, e), ids


@dataclass(frozen=True)
class ContractionMap:
    """Result of contracting disjoint vertex blocks of ``source``.

    ``block_of[v]`` is the contracted vertex that ``v`` maps to.
    """
    source: Network
    block_of: np.ndarray
    contracted: Network

    def preimage_edges(self, a, b):
        """Original edges ``(u, v, w)`` with ``u -> a`` and ``v -> b``."""
        src = self.source
        bu = self.block_of[src.edges[:, 0]]
        bv = self.block_of[src.edges[:, 1]]
        fwd = (bu == a) & (bv == b)
        rev = (bu == b) & (bv == a)
        out = [(int(u), int(v), float(w)) for (u, v), w in zip(src.edges[fwd], src.edge_weights[fwd])]
        out += [(int(v), int(u), float(w)) for (u, v), w in zip(src.edges[rev], src.edge_weights[rev])]
        return out


def contract(net, blocks):
    """Identify each block to a single vertex.

    Blocks take ids ``0..len(blocks)-1`` in list order; the remaining vertices
    follow in their original relative order.  Parallel edges are merged by
    summing weights and edges inside a block are dropped.
    """
    net = as_network(net)
    n = net.n
    block_of = np.full(n, -1, dtype=np.int64)
    for b, s in enumerate(blocks):
        mask = vertex_mask(s, n)
        if np.any(block_of[mask] >= 0):
            raise GraphError("contraction blocks overlap")
        block_of[mask] = b
    rest = np.flatnonzero(block_of < 0)
    block_of[rest] = len(blocks) + np.arange(rest.size)
    n_new = len(blocks) + rest.size
    bu = block_of[net.edges[:, 0]]
    bv = block_of[net.edges[:, 1]]
    keep = bu != bv
    lo = np.minimum(bu, bv)[keep]
    hi = np.maximum(bu, bv)[keep]
    keys, inv = np.unique(lo * n_new + hi, return_inverse=True)
    w = np.bincount(inv, weights=net.edge_weights[keep], minlength=keys.size)
    edges = np.stack([keys // n_new, keys % n_new], axis=1)
    loops = np.zeros(n_new)
    loops[block_of[rest]] = net.loops[rest]
    contracted = Network(n_new, edges, w, loops=loops)
    block_of.setflags(write=False)
    return ContractionMap(net, block_of, contracted)


def augment_rho(g, theta, eps):
    """Add a vertex rho (id ``n``) joined to every v with weight q deg(v) / (sqrt(n) - q), q = theta eps^4.

    From any original vertex the walk then steps to rho with probability q / sqrt(n).
    """
    n = g.n
    q = float(theta) * float(eps) ** 4
    root = np.sqrt(n)
    if not q < root:
        raise ParameterError(f"theta*eps^4 = {q} must be below sqrt(n) = {root}")
    if q < 0:
        raise ParameterError("theta and eps must be nonnegative")
    if not g.is_connected():
        raise DisconnectedError("augment_rho needs a connected graph")
    w_rho = q * g.degrees / (root - q)
    edges = np.concatenate([g.edges, np.stack([np.arange(n), np.full(n, n)], axis=1)])
    weights = np.concatenate([np.ones(g.m), w_rho])
    return Network(n + 1, edges, weights, rho=n)


# ---------------------------------------------------------------------------
# counts

def cut_count(g, s, t):
    """Number of edges with one endpoint in ``s`` and the other in ``t`` (disjoint sets)."""
    ms, mt = vertex_mask(s, g.n), vertex_mask(t, g.n)
    if np.any(ms & mt):
        raise GraphError("cut_count needs disjoint vertex sets")
    return int(np.count_nonzero(ms[g.row_ids] & mt[g.indices]))


def edge_boundary(g, s):
    ms = vertex_mask(s, g.n)
    return int(np.count_nonzero(ms[g.row_ids] & ~ms[g.indices]))


def volume(g, s):
    return int(g.degrees[vertex_mask(s, g.n)].sum())


def min_degree(g):
    return int(g.degrees.min())


def deg_into(g, v, s):
    return int(np.count_nonzero(vertex_mask(s, g.n)[g.neighbors(v)]))

"""Vertex partitions and the block-level graphs built from them."""

import numpy as np

from .errors import GraphError
from .graph import Graph, vertex_mask


class Partition:
    """Labeling of ``0..n-1`` into ``k`` nonempty blocks numbered ``0..k-1``."""

    def __init__(self, block_of):
        b = np.array(block_of, dtype=np.int64).ravel()
        if b.size == 0:
            raise GraphError("empty partition")
        k = int(b.max()) + 1
        if b.min() < 0:
            raise GraphError("block labels must be nonnegative")
        sizes = np.bincount(b, minlength=k)
        if np.any(sizes == 0):
            raise GraphError("partition has an empty block")
        b.setflags(write=False)
        self.block_of = b
        self.n = b.size
        self.k = k
        self.sizes = sizes
        order = np.argsort(b, kind="stable")
        self.blocks = [a for a in np.split(order, np.cumsum(sizes)[:-1])]
        for a in self.blocks:
            a.setflags(write=False)

    @classmethod
    def from_blocks(cls, blocks, n):
        """Build from a list of vertex sets that must be disjoint and cover ``0..n-1``."""
        lab = np.full(n, -1, np.int64)
        for i, s in enumerate(blocks):
            m = vertex_mask(s, n)
            if not m.any():
                raise GraphError(f"block {i} is empty")
            if np.any(lab[m] >= 0):
                raise GraphError("blocks overlap")
            lab[m] = i
        if np.any(lab < 0):
            raise GraphError("blocks do not cover every vertex")
        return cls(lab)

    @classmethod
    def trivial(cls, n):
        return cls(np.zeros(n, np.int64))

    def __repr__(self):
        return f"Partition(n={self.n}, k={self.k}, sizes={self.sizes.tolist()})"

    def __eq__(self, other):
        return isinstance(other, Partition) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def canonical(self):
        """Blocks as a sorted tuple of sorted vertex tuples (label-free identity)."""
        return tuple(sorted(tuple(int(v) for v in blk) for blk in self.blocks))

    def mask(self, i):
        return self.block_of == i

    def relabeled(self):
        """Same blocks, numbered by their smallest vertex."""
        first = np.array([blk[0] for blk in self.blocks])
        rank = np.empty(self.k, np.int64)
        rank[np.argsort(first)] = np.arange(self.k)
        return Partition(rank[self.block_of])

    def to_json_obj(self):
        return [blk.tolist() for blk in self.blocks]


def block_cut_matrix(g, partition):
    """``k x k`` integer matrix of edge counts between blocks (diagonal: edges inside)."""
    b = partition.block_of
    k = partition.k
    bu, bv = b[g.edges[:, 0]], b[g.edges[:, 1]]
    c = np.zeros((k, k), np.int64)
    np.add.at(c, (bu, bv), 1)
    off = c + c.T
    off[np.diag_indices(k)] = np.diag(c)
    return off


def h_graph(g, partition, c):
    """Graph on the blocks joining i and j whenever more than ``c`` edges run between them."""
    cm = block_cut_matrix(g, partition)
    iu, ju = np.triu_indices(partition.k, 1)
    keep = cm[iu, ju] > c
    return Graph(partition.k, np.stack([iu[keep], ju[keep]], axis=1))

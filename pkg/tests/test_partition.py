import numpy as np
import pytest

from ustlab.errors import GraphError
from ustlab.generators import two_cliques_bridge
from ustlab.partition import Partition, block_cut_matrix, h_graph


def test_partition_basics():
    p = Partition([1, 0, 1, 2])
    assert p.k == 3 and p.sizes.tolist() == [1, 2, 1]
    assert [b.tolist() for b in p.blocks] == [[1], [0, 2], [3]]
    assert p.relabeled().block_of.tolist() == [0, 1, 0, 2]
    assert p == Partition.from_blocks([[3], [0, 2], [1]], 4)
    with pytest.raises(GraphError):
        Partition([0, 2])
    with pytest.raises(GraphError):
        Partition.from_blocks([[0, 1], [1]], 2)
    with pytest.raises(GraphError):
        Partition.from_blocks([[0]], 2)


def test_h_graph_examples():
    g = two_cliques_bridge(10)
    p = Partition(np.repeat([0, 1], 5))
    assert h_graph(g, p, -1).m == 1
    assert h_graph(g, p, 0).m == 1
    assert h_graph(g, p, 1).m == 0
    assert h_graph(g, p, 100).m == 0
    cm = block_cut_matrix(g, p)
    assert cm.tolist() == [[10, 1], [1, 10]]
    inside = Partition(np.repeat([0, 1], 5)[::-1].copy())
    assert h_graph(g, inside, 0).m == 1
    lopsided = Partition([0, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    assert h_graph(g, lopsided, 0).m == 1 and block_cut_matrix(g, lopsided)[0, 1] == 4

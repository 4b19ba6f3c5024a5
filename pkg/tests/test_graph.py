import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ustlab.errors import DisconnectedError, GraphError, ParameterError, ParseError
from ustlab.generators import complete, path, two_cliques_bridge
from ustlab.graph import (
    Graph, Network, augment_rho, contract, cut_count, deg_into, dump_edge_list, dump_json, edge_boundary,
    induced_subgraph, load_graph, load_network, min_degree, vertex_mask, volume,
)

from conftest import random_connected


@st.composite
def small_graphs(draw, max_n=9):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, k in zip(pairs, keep) if k])


def test_load_triangle():
    g = load_graph("3 3\n0 1\n1 2\n0 2\n")
    assert (g.n, g.m) == (3, 3)
    assert g.neighbors(0).tolist() == [1, 2]


def test_load_k2_and_json_roundtrip():
    g = load_graph("2 1\n0 1\n")
    assert (g.n, g.m) == (2, 1)
    h = load_graph(dump_json(complete(5)))
    assert h.m == 10
    assert load_graph(dump_edge_list(h)).edges.tolist() == h.edges.tolist()


def test_parse_errors_carry_lines():
    with pytest.raises(ParseError, match="self-loop") as e:
        load_graph("2 1\n0 0\n")
    assert e.value.line == 2
    with pytest.raises(ParseError, match="duplicate"):
        load_graph("3 2\n0 1\n1 0\n")
    with pytest.raises(ParseError) as e:
        load_graph("3 2\n0 1\n1 x\n")
    assert e.value.line == 3
    with pytest.raises(ParseError):
        load_graph("3 1\n0 5\n")
    with pytest.raises(ParseError):
        load_graph('{"n": 3, "edges": [[0, 1], [1, 1]]}')


def test_connectivity_requested_only():
    text = "4 2\n0 1\n2 3\n"
    assert load_graph(text).m == 2
    with pytest.raises(DisconnectedError):
        load_graph(text, require_connected=True)


def test_weighted_parsing():
    net = load_network("3 2\n0 1 2.5\n1 2\n")
    assert net.weight(0, 1) == 2.5 and net.weight(1, 2) == 1.0
    assert net.strength.tolist() == [2.5, 3.5, 1.0]
    with pytest.raises(ParseError):
        load_graph("3 2\n0 1 2.5\n1 2\n")


def test_dumps_are_byte_deterministic():
    g = random_connected(9, 0.5, 3)
    assert dump_edge_list(g) == dump_edge_list(load_graph(dump_edge_list(g)))
    assert dump_json(g) == dump_json(load_graph(dump_json(g)))
    assert json.loads(dump_json(g))["n"] == 9


def test_induced_subgraph_examples():
    sub, ids = induced_subgraph(complete(4), [0, 1, 2])
    assert (sub.n, sub.m) == (3, 3) and ids.tolist() == [0, 1, 2]
    sub, _ = induced_subgraph(path(3), {0, 2})
    assert (sub.n, sub.m) == (2, 0)
    sub, ids = induced_subgraph(complete(6), [5, 1, 3, 2])
    assert (sub.n, sub.m) == (4, 6) and ids.tolist() == [1, 2, 3, 5]
    with pytest.raises(GraphError):
        induced_subgraph(complete(4), [])


def test_contract_k4_pair():
    cm = contract(complete(4), [[0, 1]])
    c = cm.contracted
    assert c.n == 3
    assert c.weight(0, 1) == 2 and c.weight(0, 2) == 2 and c.weight(1, 2) == 1
    assert cm.block_of.tolist() == [0, 0, 1, 2]
    assert sorted(cm.preimage_edges(0, 1)) == [(0, 2, 1.0), (1, 2, 1.0)]


def test_contract_degenerate_cases():
    g = complete(5)
    whole = contract(g, [range(5)]).contracted
    assert (whole.n, whole.m) == (1, 0)
    single = contract(g, [[3]]).contracted
    assert single.n == 5 and single.m == 10 and np.all(single.edge_weights == 1)
    with pytest.raises(GraphError):
        contract(g, [[0, 1], [1, 2]])


def test_contract_composes():
    rng = np.random.default_rng(11)
    for trial in range(10):
        g = random_connected(9, 0.6, trial)
        a = rng.choice(9, 2, replace=False).tolist()
        rest = [v for v in range(9) if v not in a]
        b = rng.choice(rest, 2, replace=False).tolist()
        once = contract(g, [a + b]).contracted
        first = contract(g, [a])
        # a is vertex 0 afterwards; b keeps its relative position among the others
        b_new = [int(first.block_of[v]) for v in b]
        twice = contract(first.contracted, [[0] + b_new]).contracted
        assert once.n == twice.n
        assert np.allclose(once.weight_matrix(), twice.weight_matrix())


def test_augment_rho_probabilities():
    g = random_connected(16, 0.5, 2)
    theta, eps = 0.7, 0.9
    net = augment_rho(g, theta, eps)
    q = theta * eps ** 4
    w = np.array([net.weight(v, net.rho) for v in range(g.n)])
    assert np.allclose(w / net.strength[:g.n], q / np.sqrt(g.n), atol=1e-12, rtol=0)
    assert np.isclose(w.sum(), q / (np.sqrt(g.n) - q) * 2 * g.m)


def test_augment_rho_k4_by_hand():
    net = augment_rho(complete(4), 1.0, 1.0)
    assert net.weight(0, 4) == pytest.approx(3.0)
    assert net.weight(0, 4) / net.strength[0] == pytest.approx(0.5)
    tiny = augment_rho(complete(4), 1e-12, 1.0)
    assert tiny.weight(0, 4) < 1e-11
    with pytest.raises(ParameterError):
        augment_rho(complete(4), 2.0, 1.0)


def test_counts_examples():
    k = complete(7)
    assert edge_boundary(k, [3]) == 6 and volume(k, [3]) == 6
    k4 = complete(4)
    assert edge_boundary(k4, [0, 2]) == 4 and volume(k4, [0, 2]) == 6
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert cut_count(two, [0, 1, 2], [3, 4, 5]) == 0
    assert min_degree(two_cliques_bridge(10)) == 4
    assert deg_into(k, 0, [1, 2, 0]) == 2
    with pytest.raises(GraphError):
        cut_count(k, [0, 1], [1, 2])


@given(small_graphs(), st.data())
def test_handshake_and_boundary_symmetry(g, data):
    assert g.degrees.sum() == 2 * g.m
    s = data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n))
    mask = np.array(s, dtype=bool)
    assert edge_boundary(g, mask) == cut_count(g, mask, ~mask) == edge_boundary(g, ~mask)
    assert volume(g, mask) + volume(g, ~mask) == 2 * g.m


def test_network_strength_handshake():
    rng = np.random.default_rng(4)
    g = random_connected(10, 0.5, 4)
    w = rng.random(g.m) + 0.1
    net = Network(g.n, g.edges, w)
    assert np.isclose(net.strength.sum(), 2 * w.sum())
    assert np.allclose(net.weight_matrix(), net.weight_matrix().T)


def test_graph_invariants_rejected():
    with pytest.raises(GraphError):
        Graph(3, [(0, 0)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Network(2, [(0, 1)], [-1.0])
    with pytest.raises(GraphError):
        vertex_mask([5], 3)


def test_single_vertex_network_is_connected():
    net = Graph(1).network
    net.require_connected()
    assert net.is_connected()

import dataclasses
import itertools
import math
import warnings

import numpy as np
import pytest

from ustlab.decomposition import (
    GoodDecomposition, coarsen, coarsening_conditions, find_sparse_cut, good_decomposition,
    primary_decomposition, theta_floor, verify_good, verify_primary,
)
from ustlab.errors import AuditFailure, ParameterError
from ustlab.generators import complete, dense_gnp, two_cliques_bridge
from ustlab.graph import Graph, cut_count
from ustlab.partition import Partition
from ustlab.spectral import spectrum

from conftest import random_connected


def beta_max(n, eps, delta):
    return 240.0 * n * n / (eps * delta ** 4)


def cliques(n):
    return Partition(np.repeat([0, 1], [n // 2, n - n // 2]))


# sparse cuts

def test_exhaustive_cut_is_optimal():
    g = random_connected(10, 0.5, 3)
    best = min(
        cut_count(g, list(s), [v for v in range(10) if v not in s]) / (len(s) * (10 - len(s)))
        for r in range(1, 10) for s in itertools.combinations(range(10), r)
    )
    cut = find_sparse_cut(g, np.arange(10), best)
    assert cut is not None and cut.edges / (cut.side.size * cut.other.size) == pytest.approx(best)
    assert find_sparse_cut(g, np.arange(10), best * 0.999) is None


def test_cut_search_finds_bridge():
    g = two_cliques_bridge(60)
    cut = find_sparse_cut(g, np.arange(60), 0.4 ** 3 / 20)
    assert cut.edges == 1 and cut.side.size == 30
    assert find_sparse_cut(complete(40), np.arange(40), 0.5) is None


def test_disconnected_block_splits_on_component():
    g = Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    cut = find_sparse_cut(g, np.arange(6), 0.0)
    assert cut.method == "component" and cut.edges == 0


# primary decompositions

def test_primary_complete_graph_is_trivial():
    for n in (20, 50):
        part, audit = primary_decomposition(complete(n), (n - 1) / n)
        assert part.k == 1 and audit.passed and audit.negligible_edges == 0


def test_primary_two_cliques():
    n, delta = 200, 0.4
    assert 1 <= delta ** 3 / 20 * 100 * 100
    part, audit = primary_decomposition(two_cliques_bridge(n), delta)
    assert part == cliques(n)
    assert audit.passed and audit.negligible_edges == 1
    assert audit.evil == [] and audit.fallback_evil == []


def test_primary_dense_gnp():
    g = dense_gnp(100, 0.9, 5, delta=0.5)
    part, audit = primary_decomposition(g, 0.5)
    assert part.k <= 2 and audit.passed


def test_negligible_edge_accounting():
    for seed in range(4):
        g = dense_gnp(60, 0.7, seed, delta=0.5)
        _, audit = primary_decomposition(g, 0.5)
        assert audit.negligible_edges <= audit.negligible_bound


def test_primary_rejects_low_degree():
    with pytest.raises(ParameterError):
        primary_decomposition(two_cliques_bridge(20), 0.6)


def test_verify_primary_failures():
    n, delta = 60, 0.5
    g = complete(n)
    uneven = Partition(np.r_[np.zeros(5, int), np.ones(n - 5, int)])
    audit = verify_primary(g, uneven, delta)
    assert not audit.conditions["block-size"].passed
    single = Partition(np.r_[0, np.ones(n - 1, int)])
    audit = verify_primary(g, single, delta)
    assert not audit.conditions["internal-degree"].passed
    assert verify_primary(g, Partition.trivial(n), delta).passed


# coarsening

def test_coarsen_keeps_good_partition():
    g = two_cliques_bridge(40)
    part, theta, hist = coarsen(g, cliques(40), 0.5, 0.5, 1e4)
    assert part == cliques(40) and theta == 0.5 and hist == []
    part, theta, hist = coarsen(g, Partition.trivial(40), 0.3, 0.3 ** 9, 40 ** 1.5)
    assert part.k == 1 and theta == 0.3 and hist == []


def test_coarsen_two_cliques_threshold_arithmetic():
    # at beta = n^1.5 the bridge exceeds theta^2 alpha beta, so the cliques merge
    n, eps = 400, 0.3
    alpha, beta = eps ** 9, n ** 1.5
    limit = eps ** 2 * alpha * beta
    assert limit < 1
    part, theta, hist = coarsen(two_cliques_bridge(n), cliques(n), eps, alpha, beta)
    assert part.k == 1 and len(hist) == 1
    assert theta == pytest.approx(alpha / 4 * eps ** 2)
    # with beta at the top of its range the single bridge edge is tolerated
    part, theta, hist = coarsen(two_cliques_bridge(n), cliques(n), eps, alpha, beta_max(n, eps, 0.45))
    assert part == cliques(n) and theta == eps


def test_coarsen_bounds_on_random_partitions():
    rng = np.random.default_rng(4)
    for i in range(20):
        g = random_connected(30, 0.3, 60 + i)
        ell = int(rng.integers(2, 6))
        lab = rng.integers(0, ell, 30)
        lab[:ell] = np.arange(ell)
        p = Partition(lab)
        eps, alpha, beta = 0.5, 0.5, float(rng.uniform(10, 2000))
        part, theta, hist = coarsen(g, p, eps, alpha, beta)
        assert len(hist) <= ell - 1
        assert theta >= theta_floor(eps, alpha, ell)
        cond = coarsening_conditions(g, p, part, theta, alpha, beta)
        assert cond["boundary"]


# good decompositions

def test_good_complete_graph():
    gd = good_decomposition(complete(100), 0.3, 0.9)
    assert gd.k == 1 and gd.passed and gd.theta == 0.3
    assert gd.audit["boundary"].value == 0
    assert gd.audit["block-gap"].value == pytest.approx(100 / 99)


def test_good_two_cliques_default_beta():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gd = good_decomposition(two_cliques_bridge(400), 0.3, 0.45)
    assert gd.passed
    # the merge rule fires at beta = n^1.5 (see test_coarsen_two_cliques_threshold_arithmetic)
    assert gd.k == 1 and gd.primary.k == 2


def test_good_two_cliques_large_beta_keeps_cliques():
    n, eps, delta = 400, 0.3, 0.45
    gd = good_decomposition(two_cliques_bridge(n), eps, delta, beta_max(n, eps, delta))
    assert gd.k == 2 and gd.passed and gd.partition == cliques(n)
    rep = gd.report()
    assert rep["blocks"] == [200, 200] and rep["negligible_edges"] == 1 and rep["evil_count"] == 0


def test_good_parameter_checks():
    g = complete(30)
    with pytest.raises(ParameterError):
        good_decomposition(g, 0.3, 0.9, beta=beta_max(30, 0.3, 0.9) * 1.01)
    with pytest.raises(ParameterError):
        good_decomposition(g, 0.3, 0.9, beta=0)
    with pytest.warns(UserWarning):
        good_decomposition(g, 0.5, 0.9)


def test_verify_good_detects_perturbations():
    n, eps, delta = 400, 0.3, 0.45
    g = two_cliques_bridge(n)
    gd = good_decomposition(g, eps, delta, beta_max(n, eps, delta))
    hot = dataclasses.replace(gd, theta=0.31)
    assert not verify_good(g, hot)["theta-upper"].passed
    lab = gd.partition.block_of.copy()
    lab[0] = 1 - lab[0]
    moved = dataclasses.replace(gd, partition=Partition(lab))
    audit = verify_good(g, moved)
    assert not (audit["internal-degree"].passed and audit["boundary"].passed)


def test_theta_lower_check_in_logs():
    gd = good_decomposition(complete(50), 0.2, 0.9)
    a = gd.audit["theta-lower"]
    assert a.threshold == pytest.approx(11 * 2 ** (2 / 0.9) * math.log(0.2))
    tiny = dataclasses.replace(gd, theta=1e-300)
    assert not verify_good(complete(50), tiny)["theta-lower"].passed


def test_block_gap_threshold_formula():
    n, eps, delta = 200, 0.3, 0.45
    gd = good_decomposition(two_cliques_bridge(n), eps, delta)
    want = delta ** 15 * gd.theta * gd.beta / (2 ** 31 * n * n)
    assert gd.audit["block-gap"].threshold == pytest.approx(want)
    assert gd.audit["boundary"].threshold == pytest.approx(eps ** 9 * gd.theta ** 2 * gd.beta)

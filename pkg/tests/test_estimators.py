import math
import warnings

import numpy as np
import pytest

from ustlab.decomposition import good_decomposition
from ustlab.errors import ParameterError, TailDivergence
from ustlab.estimators import (
    bubble_sum, degree_ratio, diameter_tail_bound, hit_horizon, mns_c3, probe_hit_large_set,
    probe_stay_in_block, select_path_endpoints,
)
from ustlab.generators import complete, star, two_cliques_bridge
from ustlab.graph import Graph
from ustlab.walk import killed_return_prob

from conftest import random_connected


def test_bubble_whole_set_is_zero():
    r = bubble_sum(complete(6), range(6))
    assert r.value == 0 and r.tail == 0


def test_bubble_k3_terms_match_killed_powers():
    r = bubble_sum(complete(3), [0], t_max=12, series=True)
    assert r.series[:3] == pytest.approx([1.0, 0.0, 0.25])
    for t in range(13):
        assert r.series[t] == pytest.approx(max(killed_return_prob(complete(3), [0], v, t) for v in (1, 2)))
    lo, hi = r.interval
    assert lo <= hi and r.tail >= 0


def test_bubble_sum_small_on_complete_graphs():
    for n in (50, 100):
        w = np.arange(math.ceil(math.sqrt(n)))
        r = bubble_sum(complete(n), w)
        assert math.isfinite(r.upper) and r.upper <= 10


def test_bubble_partial_sums_and_interval_shrink():
    g = random_connected(20, 0.5, 2)
    rs = [bubble_sum(g, [0, 1], t_max=t) for t in (4, 8, 16, 64, 256)]
    vals = [r.value for r in rs]
    widths = [r.tail for r in rs]
    assert vals == sorted(vals)
    assert widths == sorted(widths, reverse=True)
    assert all(rs[-1].value <= r.upper + 1e-12 for r in rs)


def test_bubble_series_decays():
    for seed in range(5):
        g = random_connected(25, 0.6, 30 + seed)
        r = bubble_sum(g, [0, 1, 2], t_max=60, series=True)
        t = np.arange(2, 61)
        slope = np.polyfit(t, np.log(r.series[2:]), 1)[0]
        assert slope < 0


def test_bubble_tail_guard():
    g = two_cliques_bridge(40)
    with pytest.raises(TailDivergence):
        bubble_sum(g, [0], rho_cap=0.5)
    with pytest.raises(ParameterError):
        bubble_sum(g, [])


def test_c3_formula():
    assert mns_c3(1, 1) == pytest.approx(138420 * math.log(192))
    assert mns_c3(1.5, 2) < mns_c3(2, 2) and mns_c3(2, 2) < mns_c3(2, 3)
    with pytest.raises(ParameterError):
        mns_c3(1, 0.5)
    with pytest.raises(ParameterError):
        mns_c3(0.5, 2)
    c3 = mns_c3(1, 2)
    assert diameter_tail_bound(c3, 3, 1e12) < diameter_tail_bound(c3, 3, 10)
    assert diameter_tail_bound(c3, 3, 1e300) < 1e-290
    with pytest.raises(ParameterError):
        diameter_tail_bound(c3, 3, 0)
    assert degree_ratio(star(5)) == 4


def test_hit_probe_examples():
    g = complete(100)
    all_hit = probe_hit_large_set(g, range(100), 7, 0, 500, 1)
    assert all_hit.estimate == 1.0 and all_hit.stderr == 0
    with pytest.warns(UserWarning):
        probe_hit_large_set(g, [99], 0, 10, 100, 2, eps=0.5)


def test_hit_probe_complete_graph_against_reference():
    g = complete(100)
    eps, delta = 0.9, 0.99
    u = np.arange(90, 100)
    horizon = hit_horizon(g, eps)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        r = probe_hit_large_set(g, u, 0, horizon, 10_000, 3, eps=eps)
    assert r.estimate + 3 * r.stderr >= eps * delta / 4
    assert r.trials == 10_000 and r.seed == 3


def test_stay_probe_zero_boundary():
    gd = good_decomposition(complete(64), 0.3, 0.9)
    sp = probe_stay_in_block(complete(64), gd, 0, 1.0, 50, 4)
    assert sp.escape_frequency == 0 and np.all(sp.stay == 1)


def test_stay_probe_two_cliques_pipeline():
    n, eps, delta = 400, 0.3, 0.45
    g = two_cliques_bridge(n)
    gd = good_decomposition(g, eps, delta)
    for i in range(gd.k):
        sp = probe_stay_in_block(g, gd, i, 1.0, 200, 5 + i)
        assert sp.escape_frequency <= sp.escape_bound + 3 * sp.escape_stderr
        assert sp.selected.size >= delta ** 4 * n / 80


def test_stay_probe_counts_escapes_on_a_real_boundary():
    # one boundary edge: escapes happen, and the bridge end leaves at once more often
    g = two_cliques_bridge(40)
    n, eps, delta = 40, 0.3, 0.45
    gd = good_decomposition(g, eps, delta, 240 * n * n / (eps * delta ** 4))
    assert gd.k == 2
    sp = probe_stay_in_block(g, gd, 0, 3.0, 2000, 6, vertices=[19, 0])
    assert sp.escape.min() > 0 and sp.stay[0] < sp.stay[1]


def test_endpoint_selector():
    gd = good_decomposition(complete(30), 0.3, 0.9)
    assert select_path_endpoints(complete(30), gd, 0, 1) == (0, 1)
    g = two_cliques_bridge(40)
    gd = good_decomposition(g, 0.3, 0.45, 240 * 1600 / (0.3 * 0.45 ** 4))
    v1, v2 = select_path_endpoints(g, gd, 0, 7, c=3.0, trials=500)
    assert {v1, v2} <= set(range(20)) and 19 not in (v1, v2)

import math
from fractions import Fraction

import numpy as np
import pytest

from ustlab.cheeger import cheeger_exact, cheeger_sweep
from ustlab.errors import SizeGuardError
from ustlab.generators import complete, two_cliques_bridge
from ustlab.graph import edge_boundary, volume
from ustlab.spectral import spectrum

from conftest import random_connected, two_triangles_bridge


def test_exact_examples():
    assert cheeger_exact(complete(4)).exact == Fraction(2, 3)
    assert cheeger_exact(complete(2)).exact == 1
    r = cheeger_exact(two_triangles_bridge())
    assert r.exact == Fraction(1, 7)
    assert set(r.vertices) in ({0, 1, 2}, {3, 4, 5})


def test_exact_minimizer_is_consistent():
    g = random_connected(14, 0.4, 5)
    r = cheeger_exact(g)
    s = list(r.vertices)
    assert edge_boundary(g, s) == r.cut and volume(g, s) == r.volume
    assert 2 * r.volume <= 2 * g.m


def test_sweep_examples():
    for n in (5, 7, 10):
        assert cheeger_sweep(complete(n)).value == pytest.approx(math.ceil(n / 2) / (n - 1))
    assert cheeger_sweep(two_triangles_bridge()).exact == Fraction(1, 7)


def test_sweep_upper_bounds_exact():
    rng = np.random.default_rng(2)
    for i in range(100):
        g = random_connected(int(rng.integers(3, 17)), float(rng.uniform(0.2, 0.9)), 40 + i)
        assert cheeger_sweep(g).exact >= cheeger_exact(g).exact


def test_cheeger_inequality_small():
    for seed in range(30):
        g = random_connected(12, 0.35, seed)
        phi = cheeger_exact(g).value
        gap = spectrum(g).gap
        assert phi * phi / 2 - 1e-9 <= gap <= 2 * phi + 1e-9


def test_two_cliques_ratio_stays_bounded():
    ratios = [spectrum(two_cliques_bridge(n)).gap / cheeger_exact(two_cliques_bridge(n)).value
              for n in range(8, 25, 4)]
    assert min(ratios) > 1.0


def test_size_guard():
    with pytest.raises(SizeGuardError):
        cheeger_exact(complete(25))

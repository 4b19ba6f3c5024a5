import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ustlab.generators import complete, dense_gnp, path, star, two_cliques_bridge
from ustlab.graph import Graph

settings.register_profile("ustlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ustlab")


def random_connected(n, p, seed, min_deg=0):
    """Connected G(n, p) drawn with a fixed seed (redrawn until it qualifies)."""
    rng = np.random.default_rng(seed)
    pairs = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64).reshape(-1, 2)
    while True:
        g = Graph(n, pairs[rng.random(len(pairs)) < p])
        if g.is_connected() and g.degrees.min() >= min_deg:
            return g


def two_triangles_bridge():
    return Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def triangles():
    return two_triangles_bridge()

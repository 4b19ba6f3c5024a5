"""Graph families used by the experiments."""

import numpy as np

from .errors import GenerationError, ParameterError
from .graph import Graph, read_graph
from .rng import as_generator

FAMILIES = ("complete", "two-cliques-bridge", "dense-gnp", "complete-bipartite", "star", "path", "file")


def complete(n):
    iu, ju = np.triu_indices(n, 1)
    return Graph(n, np.stack([iu, ju], axis=1))


def two_cliques_bridge(n):
    """Cliques on the first n//2 and the remaining vertices, joined by the edge (n//2 - 1, n//2)."""
    if n < 4:
        raise ParameterError("two-cliques-bridge needs n >= 4")
    h = n // 2
    a = np.stack(np.triu_indices(h, 1), axis=1)
    b = np.stack(np.triu_indices(n - h, 1), axis=1) + h
    return Graph(n, np.concatenate([a, b, [[h - 1, h]]]))


def complete_bipartite(a, b):
    u, v = np.meshgrid(np.arange(a), a + np.arange(b), indexing="ij")
    return Graph(a + b, np.stack([u.ravel(), v.ravel()], axis=1))


def star(n):
    return Graph(n, np.stack([np.zeros(n - 1, np.int64), np.arange(1, n)], axis=1))


def path(n):
    return Graph(n, np.stack([np.arange(n - 1), np.arange(1, n)], axis=1))


def dense_gnp(n, p, rng, delta=None, retries=100):
    """G(n, p) redrawn until connected and, when ``delta`` is given, min degree >= delta n."""
    if not 0 < p <= 1:
        raise ParameterError("p must lie in (0, 1]")
    gen, _ = as_generator(rng)
    iu, ju = np.triu_indices(n, 1)
    for _ in range(retries):
        keep = gen.random(iu.size) < p
        g = Graph(n, np.stack([iu[keep], ju[keep]], axis=1))
        if not g.is_connected():
            continue
        if delta is not None and g.degrees.min() < delta * n:
            continue
        return g
    raise GenerationError(f"no connected G({n}, {p}) with min degree >= {delta}*n in {retries} draws")


def generate(family, n, rng=None, p=0.9, a=None, b=None, delta=None, path_file=None, retries=100):
    """Build a graph of the named family; ``dense-gnp`` needs ``rng``."""
    if family == "complete":
        g = complete(n)
    elif family == "two-cliques-bridge":
        g = two_cliques_bridge(n)
    elif family == "dense-gnp":
        if rng is None:
            raise ParameterError("dense-gnp needs a seed")
        return dense_gnp(n, p, rng, delta, retries)
    elif family == "complete-bipartite":
        if a is None:
            a = n // 2
        if b is None:
            b = n - a
        g = complete_bipartite(a, b)
    elif family == "star":
        g = star(n)
    elif family == "path":
        g = path(n)
    elif family == "file":
        if path_file is None:
            raise ParameterError("family 'file' needs a path")
        g = read_graph(path_file, require_connected=True)
    else:
        raise ParameterError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if delta is not None and g.degrees.min() < delta * g.n:
        raise GenerationError(f"{family} on {g.n} vertices has min degree {int(g.degrees.min())} < {delta}*n")
    return g

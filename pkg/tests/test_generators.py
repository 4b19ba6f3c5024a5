import numpy as np
import pytest
from hypothesis import given, strategies as st

from ustlab.errors import GenerationError, ParameterError
from ustlab.generators import complete_bipartite, generate
from ustlab.graph import dump_edge_list
from ustlab.rng import derive_seed, rng_stream


def test_family_examples():
    k5 = generate("complete", 5)
    assert (k5.n, k5.m) == (5, 10)
    two = generate("two-cliques-bridge", 10)
    assert two.m == 21 and two.has_edge(4, 5) and not two.has_edge(0, 9)
    g = generate("dense-gnp", 100, rng=3, p=0.9, delta=0.7)
    assert g.degrees.min() >= 70 and g.is_connected()
    kab = complete_bipartite(3, 4)
    assert kab.m == 12 and generate("complete-bipartite", 7, a=3).m == 12
    assert generate("star", 6).m == 5 and generate("path", 6).m == 5


def test_generation_errors():
    with pytest.raises(GenerationError):
        generate("dense-gnp", 30, rng=1, p=0.3, delta=0.9, retries=3)
    with pytest.raises(GenerationError):
        generate("star", 10, delta=0.5)
    with pytest.raises(ParameterError):
        generate("dense-gnp", 10)
    with pytest.raises(ParameterError):
        generate("nope", 10)
    with pytest.raises(ParameterError):
        generate("file", 10)


def test_file_family(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(dump_edge_list(generate("complete", 4)))
    assert generate("file", 0, path_file=str(path)).m == 6


def test_gnp_is_seed_deterministic():
    a = generate("dense-gnp", 40, rng=derive_seed(1, 2), p=0.8)
    b = generate("dense-gnp", 40, rng=derive_seed(1, 2), p=0.8)
    assert dump_edge_list(a) == dump_edge_list(b)


@given(st.integers(0, 2 ** 64 - 1), st.lists(st.integers(0, 10 ** 6), max_size=4))
def test_derive_seed_is_a_function(master, idx):
    s = derive_seed(master, *idx)
    assert s == derive_seed(master, *idx) and 0 <= s < 2 ** 64
    assert rng_stream(s).random() == rng_stream(s).random()


def test_derive_seed_separates_indices():
    seeds = {derive_seed(7, t) for t in range(10_000)}
    assert len(seeds) == 10_000
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)

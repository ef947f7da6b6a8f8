import random

from hypothesis import given, strategies as st

from macell.analysis import is_ma_presented
from macell.components import decompose
from macell.generators import (
    chain_cut, eqrel, grid, matching, path_like, paths, random_bounded_structure,
    random_catalog, random_component, random_formula,
)
from macell.logic import free_vars, to_text


def test_fixture_families():
    assert [len(c) for c in decompose(paths([1, 2, 3])).components] == [1, 2, 3]
    assert len(matching(4).relations["E"]) == 4
    g = grid(3, 2)
    assert len(g) == 6 and len(g.relations["E"]) == 7 and is_ma_presented(g).passed
    e = eqrel(2, 3)
    assert len(e.relations["E"]) == 18


def test_chain_cut_removes_one_edge():
    m = chain_cut(3, 5, seed=4)
    assert len(m.relations["R1"]) - len(m.relations["R2"]) == 1
    assert chain_cut(3, 5, seed=4) == m


@given(st.integers(0, 10_000), st.integers(1, 12))
def test_random_structures_respect_bounds(seed, n):
    m = random_bounded_structure(random.Random(seed), n, (("E", 2, 2), ("R", 3, 1)))
    assert is_ma_presented(m).passed
    assert m == random_bounded_structure(random.Random(seed), n, (("E", 2, 2), ("R", 3, 1)))


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_random_components_are_connected(seed, size):
    for rels in ((("E", 2, 2),), (("R", 3, 2), ("U", 1, 1))):
        c = random_component(random.Random(seed), size, rels)
        assert len(decompose(c).components) == 1 and is_ma_presented(c).passed


def test_path_like_ternary():
    m = path_like(4, (("R", 3, 2),))
    assert len(decompose(m).components) == 1 and is_ma_presented(m).passed


@given(st.integers(0, 10_000))
def test_random_catalog_is_deterministic(seed):
    a = random_catalog(random.Random(seed), family=True)
    b = random_catalog(random.Random(seed), family=True)
    assert a.dumps() == b.dumps()


@given(st.integers(0, 10_000), st.integers(0, 3))
def test_random_formula_free_variables(seed, depth):
    rng = random.Random(seed)
    sig = random_bounded_structure(random.Random(0), 2).signature
    phi = random_formula(rng, sig, ["x", "y"], depth)
    assert free_vars(phi) <= {"x", "y"}
    again = random_formula(random.Random(seed), sig, ["x", "y"], depth)
    assert to_text(phi) == to_text(again)

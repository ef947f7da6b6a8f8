import itertools
import random

import pytest
from hypothesis import given, strategies as st

from macell.analysis import formula_degree
from macell.generators import random_bounded_structure, random_formula
from macell.logic import (
    EvaluationError, ShapeTag, count_bound, degree_bound, dnf_terms, equiv_on, evaluate,
    free_vars, is_quantifier_free, parse, shape_of, to_dnf, truth_table,
)
from macell.logic.bounds import in_estar
from macell.logic.normal import nnf

RELS = (("E", 2, 2), ("U", 1, 1))


def _structure(seed, n=5):
    return random_bounded_structure(random.Random(seed), n, RELS)


# -- semantics --------------------------------------------------------------------


def test_evaluate_on_path(path3):
    assert evaluate(path3, parse("E(x,y)"), {"x": "a", "y": "b"})
    assert not evaluate(path3, parse("E(x,y)"), {"x": "b", "y": "a"})
    assert evaluate(path3, parse("Ex.E(x,y)"), {"y": "c"})
    assert not evaluate(path3, parse("Ex.E(x,y)"), {"y": "a"})


def test_unbound_variable(path3):
    with pytest.raises(EvaluationError):
        evaluate(path3, parse("E(x,y)"), {"x": "a"})


def test_unknown_parameter(path3):
    with pytest.raises(EvaluationError, match="parameter"):
        evaluate(path3, parse("E(#zz,y)"), {"y": "a"})


def test_counting_semantics_by_direct_count(path3):
    for op, r in itertools.product(["<=", "=", "<", ">="], range(4)):
        phi = parse(f"E[{op}{r}]y.(E(x,y) | E(y,x))")
        for x in path3.universe:
            k = sum(1 for y in path3.universe
                    if (x, y) in path3.relations["E"] or (y, x) in path3.relations["E"])
            want = {"<=": k <= r, "=": k == r, "<": k < r, ">=": k >= r}[op]
            assert evaluate(path3, phi, {"x": x}) == want


@given(st.integers(0, 10_000), st.integers(0, 2), st.integers(1, 3))
def test_truth_table_matches_evaluate(seed, nfree, depth):
    rng = random.Random(seed)
    m = _structure(seed, n=4)
    free = ["x", "y"][:nfree]
    phi = random_formula(rng, m.signature, free, depth, params=["v0"])
    variables = sorted(free_vars(phi))
    table = truth_table(m, phi, variables)
    for idx in itertools.product(range(len(m)), repeat=len(variables)):
        env = {v: m.universe[i] for v, i in zip(variables, idx)}
        assert bool(table[idx]) == evaluate(m, phi, env)


def test_equiv_on_requires_same_free_variables(path3):
    with pytest.raises(EvaluationError):
        equiv_on(path3, parse("E(x,y)"), parse("Ez.E(x,z)"))
    assert equiv_on(path3, parse("E(x,y)"), parse("Ez.E(x,z)"), ["x", "y"]) is False


# -- normal forms -----------------------------------------------------------------


def test_dnf_example():
    terms = dnf_terms(parse("(E(x,y) | U(x)) & !U(y)"))
    assert len(terms) == 2
    assert all(len(t) == 2 for t in terms)


def test_dnf_treats_quantified_subformulas_as_leaves():
    leaf = parse("Ez.E(x,z)")
    terms = dnf_terms(parse("Ez.E(x,z) & (U(x) | !Ez.E(x,z))"))
    assert terms == [(leaf, parse("U(x)"))]


def _random_qf(rng, signature, free, size):
    # random boolean combination of literals over `free`
    from macell.generators import _random_literal
    from macell.logic import conj, disj
    from macell.logic.syntax import Not
    phi = _random_literal(rng, signature, free, ())
    for _ in range(size):
        other = _random_literal(rng, signature, free, ())
        phi = conj(phi, other) if rng.random() < 0.5 else disj(phi, other)
        if rng.random() < 0.3:
            phi = Not(phi)
    return phi


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_dnf_and_nnf_preserve_truth(seed, size):
    rng = random.Random(seed)
    m = _structure(seed, n=4)
    phi = _random_qf(rng, m.signature, ["x", "y"], size)
    vs = ["x", "y"]
    assert equiv_on(m, phi, to_dnf(phi), vs)
    assert equiv_on(m, phi, nnf(phi), vs)


# -- shapes and bounds ------------------------------------------------------------


SIG_BOUNDS = {"E": 2, "U": 1, "F": None}


@pytest.mark.parametrize("text,tag", [
    ("E(x,y)", ShapeTag.EMember),
    ("x=y", ShapeTag.EMember),
    ("Ez.(E(x,z) & E(z,y))", ShapeTag.EMember),
    ("E(x,y) & E(y,z)", ShapeTag.EMember),
    ("E(x,y) | U(x)", ShapeTag.QuantifierFree),
    ("Ax.E(x,y)", ShapeTag.NONE),
    ("!Ez.(E(x,z) & E(z,y)) | U(x)", ShapeTag.EStarMember),
    ("E[<=1]y.E(x,y)", ShapeTag.EMember),
])
def test_shape_examples(text, tag):
    assert shape_of(parse(text), SIG_BOUNDS) == tag


def test_unbounded_atom_is_outside_estar():
    assert not in_estar(shape_of(parse("F(x,y)"), SIG_BOUNDS))
    assert not in_estar(shape_of(parse("F(x,y) | U(x)"), SIG_BOUNDS))


def test_unlinked_conjunction_has_no_degree_bound():
    assert degree_bound(parse("E(x,y) & U(z)"), SIG_BOUNDS) is None
    assert degree_bound(parse("E(x,y) & E(y,z)"), SIG_BOUNDS) is not None


def test_count_bound_along_a_chain():
    phi = parse("E(x,y) & E(y,z)")
    # each step through an E atom multiplies by at most 2
    assert count_bound(phi, {"y", "z"}, {"x"}, SIG_BOUNDS) == 4
    assert count_bound(phi, {"y"}, set(), SIG_BOUNDS) is None


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_degree_bound_is_sound(seed, size):
    rng = random.Random(seed)
    m = random_bounded_structure(rng, 6, RELS, density=0.9)
    phi = _random_qf(rng, m.signature, ["x", "y", "z"], size)
    if not free_vars(phi) or not is_quantifier_free(phi):
        return
    b = degree_bound(phi, m.signature)
    if b is not None:
        assert formula_degree(m, phi) <= b


@given(st.integers(0, 10_000))
def test_count_bound_is_sound(seed):
    rng = random.Random(seed)
    m = random_bounded_structure(rng, 6, RELS, density=0.9)
    phi = random_formula(rng, m.signature, ["x", "y", "z"], 2, counting=False)
    fv = sorted(free_vars(phi))
    if len(fv) < 2:
        return
    known, targets = fv[:1], fv[1:]
    b = count_bound(phi, set(targets), set(known), {"E": 2, "U": 1})
    if b is None:
        return
    table = truth_table(m, phi, fv)
    for i in range(len(m)):
        assert int(table[i].sum()) <= b

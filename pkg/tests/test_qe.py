import random

import pytest

from macell.cellular import OMEGA, CatalogEntry, StructureCatalog, realize
from macell.core import RelationSymbol, Signature, Structure
from macell.generators import path, random_catalog, random_formula
from macell.logic import (
    RewriteError, free_vars, equiv_on, parse, qe_rewrite, shape_of, to_text,
)
from macell.logic.bounds import in_estar

TWO = {"E": 2, "F": 2}


def _edge_sig():
    return Signature((RelationSymbol("E", 2, 2), RelationSymbol("F", 2, 2)))


def _two_relation_catalog():
    # omega copies of a two-element component carrying E and F on one edge,
    # and of one carrying only E
    sig = _edge_sig()
    both = Structure(sig, ("v0", "v1"), {"E": [("v0", "v1")], "F": [("v0", "v1")]})
    only = Structure(sig, ("v0", "v1"), {"E": [("v0", "v1")], "F": []})
    fork = Structure(sig, ("v0", "v1", "v2"),
                     {"E": [("v0", "v1"), ("v2", "v1")], "F": [("v2", "v1")]})
    return StructureCatalog(Structure(sig, (), {}), (CatalogEntry(both, OMEGA), CatalogEntry(only, OMEGA),
                                   CatalogEntry(fork, OMEGA)))


def path_family(n=8):
    fam = tuple(path(k, "v") for k in range(2, n))
    return StructureCatalog(Structure(fam[0].signature, (), {}), (), fam, True)


def test_quantifier_free_input_is_unchanged():
    phi = parse("E(x,y) | !F(y,x)")
    psi, report = qe_rewrite(phi, None, TWO)
    assert psi == phi
    assert list(report.steps) == []


def test_negated_atom_over_path_family_is_true():
    psi, report = qe_rewrite(parse("Ex.!E(x,y)"), path_family())
    assert to_text(psi) == "true"
    assert report.threshold >= 1


def test_negated_bounded_existential_is_true():
    cat = _two_relation_catalog()
    psi, _ = qe_rewrite(parse("Ex.!Ez.(E(x,z) & F(y,z))"), cat)
    assert to_text(psi) == "true"


def test_inclusion_exclusion_form():
    psi, report = qe_rewrite(parse("Ex.(E(x,y) & !F(x,y))"), None, TWO)
    expected = parse("E[=1]x.E(x,y) & E[<1]x.(E(x,y) & F(x,y))"
                     " | E[=2]x.E(x,y) & E[<2]x.(E(x,y) & F(x,y))")
    assert psi == expected
    assert "2b" in report.steps


@pytest.mark.parametrize("size", [10, 20])
def test_inclusion_exclusion_equivalence(size):
    cat = _two_relation_catalog()
    phi = parse("Ex.(E(x,y) & !F(x,y))")
    psi, report = qe_rewrite(phi, cat)
    m = realize(cat, max(size, report.threshold))
    assert equiv_on(m, phi, psi)


def test_missing_bound_is_an_error():
    with pytest.raises(RewriteError, match="no degree bound"):
        qe_rewrite(parse("Ex.E(x,y)"), None, {"E": None})


def test_catalog_required_for_semantic_case():
    with pytest.raises(RewriteError, match="catalog"):
        qe_rewrite(parse("Ex.!E(x,y)"), None, {"E": 2})


def test_universal_is_rewritten():
    cat = _two_relation_catalog()
    phi = parse("Ax.(E(x,y) | !F(x,y))")
    psi, report = qe_rewrite(phi, cat)
    assert in_estar(shape_of(psi, cat.signature))
    assert equiv_on(realize(cat, report.threshold + 6), phi, psi)


def test_small_random_corpus():
    rels = (("E", 2, 2), ("U", 1, 1))
    for seed in range(12):
        rng = random.Random(seed)
        cat = random_catalog(rng, rels, family=seed % 3 == 0)
        for _ in range(6):
            free = ["x", "y"][:rng.randint(0, 2)]
            phi = random_formula(rng, cat.signature, free, rng.randint(1, 3))
            psi, report = qe_rewrite(phi, cat)
            assert in_estar(shape_of(psi, cat.signature)), to_text(psi)
            for extra in (0, 5):
                m = realize(cat, report.threshold + extra)
                assert equiv_on(m, phi, psi, sorted(free_vars(phi))), (to_text(phi), to_text(psi))

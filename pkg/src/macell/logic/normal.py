"""Negation normal form and disjunctive normal form."""

from __future__ import annotations

from macell.logic.syntax import (
    FALSE, TRUE, And, Const, Formula, Not, Or, conj, disj, is_quantifier_free, to_text,
)


class NotQuantifierFree(ValueError):
    pass


def nnf(phi: Formula) -> Formula:
    """Push negations down to the leaves; non-boolean nodes count as leaves."""
    if isinstance(phi, And):
        return conj(*(nnf(p) for p in phi.parts))
    if isinstance(phi, Or):
        return disj(*(nnf(p) for p in phi.parts))
    if isinstance(phi, Not):
        body = phi.body
        if isinstance(body, Not):
            return nnf(body.body)
        if isinstance(body, Const):
            return Const(not body.value)
        if isinstance(body, And):
            return disj(*(nnf(Not(p)) for p in body.parts))
        if isinstance(body, Or):
            return conj(*(nnf(Not(p)) for p in body.parts))
        return phi
    return phi


def _literal_key(lit):
    return to_text(lit)


def dnf_terms(phi: Formula) -> list[tuple[Formula, ...]]:
    """Disjuncts of an equivalent DNF, each a sorted tuple of literals.

    Leaves are any nodes other than And/Or/Not; a leaf and its negation in the
    same term make the term contradictory and it is dropped. Duplicate terms
    and terms subsumed by a shorter term are removed.
    """
    terms = _dnf(nnf(phi))
    cleaned = set()
    for term in terms:
        lits = set(term)
        if any(Not(l) in lits for l in lits if not isinstance(l, Not)):
            continue
        cleaned.add(frozenset(lits))
    minimal = [t for t in cleaned if not any(o < t for o in cleaned)]
    out = [tuple(sorted(t, key=_literal_key)) for t in minimal]
    out.sort(key=lambda t: [_literal_key(l) for l in t])
    return out


def _dnf(phi):
    if phi == TRUE:
        return [()]
    if phi == FALSE:
        return []
    if isinstance(phi, Or):
        out = []
        for p in phi.parts:
            out.extend(_dnf(p))
        return out
    if isinstance(phi, And):
        acc = [()]
        for p in phi.parts:
            sub = _dnf(p)
            acc = [a + b for a in acc for b in sub]
            if not acc:
                return []
        return acc
    return [(phi,)]


def from_terms(terms) -> Formula:
    return disj(*(conj(*t) for t in terms))


def to_dnf(phi: Formula) -> Formula:
    """Equivalent disjunction of conjunctions of literals (quantifier-free input)."""
    if not is_quantifier_free(phi):
        raise NotQuantifierFree(f"to_dnf expects a quantifier-free formula: {to_text(phi)}")
    return from_terms(dnf_terms(phi))

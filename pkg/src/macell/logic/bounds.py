"""Syntactic degree bounds and E / E* shape recognition.

Everything here is sound for every structure in which each relation R
satisfies its declared degree bound K_R (at most K_R tuples of R contain
any fixed element).

The central quantity is `count_bound(phi, targets, known)`: an upper bound
on the number of assignments to `targets` satisfying `phi` once the
variables in `known` are fixed. It is derived by the usual
mutual-algebraicity argument: starting from known elements (variables in
`known` and parameters), a relation atom containing a known element has at
most K_R satisfying tuples, each of which fixes all of its entries.
"""

from __future__ import annotations

import enum
from typing import Iterable, Mapping

from macell.logic.syntax import (
    And, Const, Count, Eq, Exists, Forall, Formula, Not, Or, Param, Rel, Var,
    free_vars, is_quantifier_free,
)


class ShapeTag(enum.Enum):
    EMember = "EMember"
    LinkedConjunction = "LinkedConjunction"
    QuantifierFree = "QuantifierFree"
    EStarMember = "EStarMember"
    NONE = "None"

    def __str__(self):
        return self.value


ESTAR_TAGS = frozenset({ShapeTag.EMember, ShapeTag.QuantifierFree, ShapeTag.EStarMember})

# counting operators whose truth forces at least one witness
_GENERATING = (">=", "=")


def bounds_of(signature) -> dict[str, int | None]:
    if signature is None:
        return {}
    if isinstance(signature, Mapping):
        return dict(signature)
    return {r.name: r.degree_bound for r in signature.relations}


def _conjuncts(phi):
    return phi.parts if isinstance(phi, And) else (phi,)


def count_bound(phi: Formula, targets: Iterable[str], known: Iterable[str],
                bounds: Mapping[str, int | None]) -> int | None:
    """Bound on satisfying assignments to `targets` given `known` (None if underivable).

    Variables of `phi` outside both sets are treated as targets as well.
    """
    known = set(known)
    todo = (set(targets) | free_vars(phi)) - known
    if phi == Const(False):
        return 0
    if isinstance(phi, Or):
        total = 0
        for part in phi.parts:
            b = count_bound(part, todo, known, bounds)
            if b is None:
                return None
            total += b
        return total
    conjuncts = list(_conjuncts(phi))
    product = 1
    while todo:
        best = None
        for c in conjuncts:
            fv = free_vars(c)
            if not (fv & todo):
                continue
            f = _generate(c, known, bounds)
            if f is not None and (best is None or f < best[0]):
                best = (f, c)
        if best is None:
            return None
        product *= best[0]
        known |= free_vars(best[1])
        todo -= free_vars(best[1])
    return product


def _anchored(args, known):
    return any(isinstance(a, Param) or a.name in known for a in args)


def _generate(c: Formula, known: set, bounds) -> int | None:
    """Number of ways to extend `known` to all free variables of conjunct `c`."""
    unknown = free_vars(c) - known
    if not unknown:
        return 1
    if isinstance(c, Rel):
        if not _anchored(c.args, known):
            return None
        return bounds.get(c.name)
    if isinstance(c, Eq):
        if _anchored((c.left, c.right), known):
            return 1
        return None
    if isinstance(c, (Exists, Count)):
        if isinstance(c, Count) and not (c.op in _GENERATING and c.bound >= 1):
            return None
        return count_bound(c.body, unknown | {c.var}, free_vars(c) & known, bounds)
    if isinstance(c, (And, Or)):
        return count_bound(c, unknown, known, bounds)
    return None


def degree_bound(phi: Formula, bounds) -> int | None:
    """Bound on the number of satisfying tuples containing any fixed element."""
    bounds = bounds_of(bounds) if not isinstance(bounds, dict) else bounds
    fv = free_vars(phi)
    if not fv:
        return None
    if len(fv) == 1:
        return 1
    if isinstance(phi, Rel) and all(isinstance(a, Var) for a in phi.args):
        return bounds.get(phi.name)
    if isinstance(phi, Eq):
        return 1
    total = 0
    for v in sorted(fv):
        b = count_bound(phi, fv - {v}, {v}, bounds)
        if b is None:
            return None
        total += b
    return total


def is_linked(conjuncts) -> bool:
    """Chain property: relation atoms only, consecutive blocks share a variable."""
    conjuncts = list(conjuncts)
    if not conjuncts or not all(isinstance(c, Rel) for c in conjuncts):
        return False
    for a, b in zip(conjuncts, conjuncts[1:]):
        if not (free_vars(a) & free_vars(b)):
            return False
    return True


def _strip_exists(phi):
    zs = []
    while isinstance(phi, Exists):
        zs.append(phi.var)
        phi = phi.body
    return zs, phi


def is_emember(phi: Formula, bounds) -> bool:
    bounds = bounds_of(bounds) if not isinstance(bounds, dict) else bounds
    if isinstance(phi, Rel):
        return bounds.get(phi.name) is not None
    if isinstance(phi, Eq):
        return True
    if isinstance(phi, Exists):
        zs, matrix = _strip_exists(phi)
        if not is_quantifier_free(matrix) or not _relations_bounded(matrix, bounds):
            return False
        return len(free_vars(matrix)) <= 1 or degree_bound(matrix, bounds) is not None
    if isinstance(phi, Count):
        if not is_estar(phi.body, bounds):
            return False
        outer = free_vars(phi)
        if not outer:
            return True
        return count_bound(phi.body, {phi.var}, outer, bounds) is not None
    if isinstance(phi, (And, Not, Or, Const)) and is_quantifier_free(phi):
        if not _relations_bounded(phi, bounds) or isinstance(phi, (Not, Or, Const)):
            return False
        return degree_bound(phi, bounds) is not None
    return False


def _relations_bounded(phi, bounds):
    from macell.logic.syntax import walk
    return all(bounds.get(n.name) is not None for n in walk(phi) if isinstance(n, Rel))


def is_estar(phi: Formula, bounds) -> bool:
    """Boolean combination of E-members (atoms included)."""
    bounds = bounds_of(bounds) if not isinstance(bounds, dict) else bounds
    if isinstance(phi, Const):
        return True
    if isinstance(phi, Rel):
        return bounds.get(phi.name) is not None
    if isinstance(phi, Eq):
        return True
    if isinstance(phi, Not):
        return is_estar(phi.body, bounds)
    if isinstance(phi, (And, Or)):
        return all(is_estar(p, bounds) for p in phi.parts)
    if isinstance(phi, Forall):
        return False
    return is_emember(phi, bounds)


def shape_of(phi: Formula, signature) -> ShapeTag:
    """Most specific shape tag of `phi` relative to the declared degree bounds."""
    bounds = bounds_of(signature)
    if is_emember(phi, bounds):
        return ShapeTag.EMember
    if is_linked(_conjuncts(phi)):
        return ShapeTag.LinkedConjunction
    if is_quantifier_free(phi) and _relations_bounded(phi, bounds):
        return ShapeTag.QuantifierFree
    if is_estar(phi, bounds):
        return ShapeTag.EStarMember
    return ShapeTag.NONE


def in_estar(tag: ShapeTag) -> bool:
    return tag in ESTAR_TAGS

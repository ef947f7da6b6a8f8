"""Canonical labeling of small relational structures.

Colour refinement over the tuples containing each element, then
individualisation of one element of the first non-singleton colour class
and recursion, keeping the lexicographically least encoding. Components at
desk scale have at most a few dozen elements, so the search is exhaustive
over the branching points without automorphism pruning.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def _incidence(m, elements):
    inside = set(elements)
    inc = {e: [] for e in elements}
    tuples = []
    for name in m.signature.relation_names:
        for t in m.relations[name]:
            if t and all(e in inside for e in t):
                tuples.append((name, t))
                for pos, e in enumerate(t):
                    inc[e].append((name, pos, t))
    consts = {e: tuple(sorted(c for c, v in m.constants.items() if v == e)) for e in elements}
    return inc, tuples, consts


def _refine(elements, colors, inc):
    """Iterate colour refinement to a fixpoint; colours are canonical integers."""
    while True:
        sigs = {}
        for e in elements:
            around = sorted(
                (name, pos, tuple(colors[x] for x in t)) for name, pos, t in inc[e]
            )
            sigs[e] = (colors[e], tuple(around))
        ranking = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
        new = {e: ranking[sigs[e]] for e in elements}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def _encode(order, tuples, consts):
    label = {e: i for i, e in enumerate(order)}
    rels = tuple(sorted((name, tuple(label[x] for x in t)) for name, t in tuples))
    cs = tuple(sorted((c, label[e]) for e in order for c in consts[e]))
    return (len(order), rels, cs)


def canonical_labeling(m, elements: Iterable[str] | None = None):
    """Return (canonical form, elements in canonical order) for the induced substructure.

    Two induced substructures are isomorphic (respecting constants inside
    them) iff their forms are equal; then zipping the two orders gives an
    isomorphism.
    """
    elements = tuple(m.universe if elements is None else elements)
    if not elements:
        return (0, (), ()), ()
    inc, tuples, consts = _incidence(m, elements)
    base = {}
    for e in elements:
        profile = sorted((name, pos) for name, pos, _ in inc[e])
        base[e] = (consts[e], tuple(profile))
    ranking = {s: i for i, s in enumerate(sorted(set(base.values())))}
    colors = _refine(elements, {e: ranking[base[e]] for e in elements}, inc)

    best = [None, None]

    def search(colors):
        cells = {}
        for e in elements:
            cells.setdefault(colors[e], []).append(e)
        if len(cells) == len(elements):
            order = sorted(elements, key=lambda e: colors[e])
            code = _encode(order, tuples, consts)
            if best[0] is None or code < best[0]:
                best[0], best[1] = code, tuple(order)
            return
        target = min(c for c, members in cells.items() if len(members) > 1)
        for e in cells[target]:
            # individualise e: it gets a colour below the rest of its cell
            split = {x: 2 * colors[x] + (0 if x == e else 1) for x in elements}
            search(_refine(elements, split, inc))

    search(colors)
    return best[0], best[1]


def canonical_form(m, elements: Sequence[str] | None = None):
    return canonical_labeling(m, elements)[0]


def isomorphism(m1, elems1, m2, elems2) -> dict | None:
    """An isomorphism between two induced substructures, or None."""
    f1, o1 = canonical_labeling(m1, elems1)
    f2, o2 = canonical_labeling(m2, elems2)
    if f1 != f2:
        return None
    return dict(zip(o1, o2))

"""Mate relation, MA-connected components and Gaifman distance.

Two elements are mates when they occur together in some relation tuple;
equality atoms never create mates and constants only name elements. The
components are the connected components of that (Gaifman) graph.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from macell.canon import canonical_labeling
from macell.logic.bounds import is_linked
from macell.logic.semantics import evaluate
from macell.logic.syntax import Rel, Var, conj


class ComponentError(ValueError):
    pass


class UnionFind:
    def __init__(self, elements):
        self.parent = {e: e for e in elements}

    def find(self, e):
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class IsoClass:
    id: int
    size: int
    count: int
    form: tuple
    representative: tuple[str, ...]


@dataclass(frozen=True)
class ComponentDecomposition:
    components: tuple[tuple[str, ...], ...]
    iso_class: tuple[int, ...]
    classes: tuple[IsoClass, ...]
    mate_edges: frozenset
    # canonical enumeration of each component (same index as `components`)
    orders: tuple[tuple[str, ...], ...] = field(repr=False, default=())

    def component_of(self, e) -> tuple[str, ...]:
        for comp in self.components:
            if e in comp:
                return comp
        raise ComponentError(f"unknown element {e!r}")

    def index(self) -> dict[str, int]:
        return {e: i for i, comp in enumerate(self.components) for e in comp}

    def to_dict(self) -> dict:
        return {
            "components": [
                {"elements": list(c), "iso_class": k}
                for c, k in zip(self.components, self.iso_class)
            ],
            "iso_classes": [
                {"id": c.id, "size": c.size, "count": c.count,
                 "representative": list(c.representative)}
                for c in self.classes
            ],
        }


def mate_edges(m) -> frozenset:
    edges = set()
    for _, t in m.tuples():
        for a, b in itertools.combinations(set(t), 2):
            edges.add(frozenset((a, b)))
    return frozenset(edges)


def decompose(m) -> ComponentDecomposition:
    uf = UnionFind(m.universe)
    for _, t in m.tuples():
        for e in t[1:]:
            uf.union(t[0], e)
    groups = {}
    for e in m.universe:
        groups.setdefault(uf.find(e), []).append(e)
    components = tuple(tuple(g) for g in groups.values())
    where = {e: i for i, c in enumerate(components) for e in c}
    for name, t in m.tuples():
        if len({where[e] for e in t}) > 1:
            raise AssertionError(f"tuple {name}{t} spans several components")

    forms, orders = [], []
    for comp in components:
        form, order = canonical_labeling(m, comp)
        forms.append(form)
        orders.append(order)
    ids, reps = {}, []
    for form, comp, order in zip(forms, components, orders):
        if form not in ids:
            ids[form] = len(ids)
            reps.append(order)
    counts = {}
    for form in forms:
        counts[form] = counts.get(form, 0) + 1
    classes = tuple(
        IsoClass(ids[f], f[0], counts[f], f, reps[ids[f]]) for f in ids
    )
    return ComponentDecomposition(
        components, tuple(ids[f] for f in forms), classes, mate_edges(m), tuple(orders)
    )


def mate_closure(m) -> list[frozenset]:
    """Transitive closure of the mate relation by naive iteration (test oracle)."""
    rel = {(a, a) for a in m.universe}
    for _, t in m.tuples():
        rel |= {(a, b) for a in t for b in t}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for c in m.universe:
                if (b, c) in rel and (a, c) not in rel:
                    rel.add((a, c))
                    changed = True
    classes = {}
    for a in m.universe:
        classes.setdefault(frozenset(b for b in m.universe if (a, b) in rel), None)
    return list(classes)


# -- distance -----------------------------------------------------------------

INF = float("inf")


def _tuple_index(m):
    tuples = list(m.tuples())
    containing = {e: [] for e in m.universe}
    for i, (_, t) in enumerate(tuples):
        for e in set(t):
            containing[e].append(i)
    return tuples, containing


def _check(m, *elements):
    for e in elements:
        if e not in m.universe:
            raise ComponentError(f"unknown element {e!r}")


def _tuple_path(m, x, y):
    """Shortest chain of tuple indices from a tuple containing x to one containing y."""
    tuples, containing = _tuple_index(m)
    start = containing[x]
    if not start:
        return tuples, None
    parent = {i: None for i in start}
    queue = deque(start)
    while queue:
        i = queue.popleft()
        if y in tuples[i][1]:
            path = []
            while i is not None:
                path.append(i)
                i = parent[i]
            return tuples, path[::-1]
        for e in set(tuples[i][1]):
            for j in containing[e]:
                if j not in parent:
                    parent[j] = i
                    queue.append(j)
    return tuples, None


def gaifman_distance(m, x, y):
    """Fewest tuples in a chain from x to y (consecutive tuples intersect); inf if none."""
    _check(m, x, y)
    _, path = _tuple_path(m, x, y)
    return INF if path is None else len(path)


def distances_from(m, x) -> dict:
    """gaifman_distance(m, x, y) for every y, by one BFS over tuples."""
    _check(m, x)
    tuples, containing = _tuple_index(m)
    dist = {e: INF for e in m.universe}
    seen = set(containing[x])
    frontier = list(seen)
    level = 1
    while frontier:
        nxt = []
        for i in frontier:
            for e in tuples[i][1]:
                if dist[e] > level:
                    dist[e] = level
                for j in containing[e]:
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
        frontier = nxt
        level += 1
    return dist


def ball(m, center, radius: int) -> set:
    """Elements within Gaifman distance `radius` of `center`; always contains center."""
    dist = distances_from(m, center)
    return {center} | {e for e, d in dist.items() if d <= radius}


def branching_constant(m) -> int:
    """Per-step neighbour bound K with |ball(r)| <= K**r for r >= 1."""
    from macell.analysis import degree_profile

    prof = degree_profile(m)
    k = sum(prof.degrees[r.name] * (r.arity - 1) for r in m.signature.relations) + 1
    return max(2, k)


# -- linked witnesses ---------------------------------------------------------


@dataclass(frozen=True)
class LinkedConjunction:
    conjuncts: tuple[Rel, ...]
    assignment: Mapping[str, str] | None = None
    first: str = "x"
    last: str = "y"

    @property
    def formula(self):
        return conj(*self.conjuncts)

    def __len__(self):
        return len(self.conjuncts)


def find_linked_witness(m, a, b) -> LinkedConjunction:
    """A linked atomic conjunction satisfied by a tuple through a and b.

    Built from a shortest chain of tuples, so its length equals
    gaifman_distance(m, a, b).
    """
    _check(m, a, b)
    tuples, path = _tuple_path(m, a, b)
    if path is None:
        raise ComponentError(f"{a!r} and {b!r} lie in different components")
    names = {a: "x"}
    if b != a:
        names[b] = "y"
    counter = itertools.count(1)
    conjuncts = []
    for i in path:
        name, t = tuples[i]
        for e in t:
            if e not in names:
                names[e] = f"u{next(counter)}"
        conjuncts.append(Rel(name, tuple(Var(names[e]) for e in t)))
    assignment = {v: e for e, v in names.items()}
    return LinkedConjunction(tuple(conjuncts), assignment, "x", names[b])


def verify_linked_witness(m, w: LinkedConjunction, a, b) -> bool:
    if not is_linked(w.conjuncts):
        return False
    env = dict(w.assignment or {})
    if env.get(w.first) != a or env.get(w.last) != b:
        return False
    return evaluate(m, w.formula, env)


# -- automorphisms and component maps -----------------------------------------


def _check_bijection(m, f: Mapping[str, str]):
    universe = set(m.universe)
    if set(f) != universe or set(f.values()) != universe:
        raise ComponentError("map is not a bijection of the universe")


def is_automorphism(m, f: Mapping[str, str]) -> bool:
    _check_bijection(m, f)
    for c, e in m.constants.items():
        if f[e] != e:
            return False
    for name, ts in m.relations.items():
        if {tuple(f[e] for e in t) for t in ts} != ts:
            return False
    return True


def first_violation(m, f: Mapping[str, str]):
    """A (relation, tuple) whose image or preimage membership disagrees, or a constant."""
    for c, e in m.constants.items():
        if f[e] != e:
            return ("constant", c, e)
    inv = {v: k for k, v in f.items()}
    for name in m.signature.relation_names:
        ts = m.relations[name]
        for t in sorted(ts):
            if tuple(f[e] for e in t) not in ts:
                return (name, t)
        for t in sorted(ts):
            if tuple(inv[e] for e in t) not in ts:
                return (name, tuple(inv[e] for e in t))
    return None


def is_component_map(m, f: Mapping[str, str], decomposition=None) -> bool:
    """Components go onto components and each restriction is an isomorphism."""
    _check_bijection(m, f)
    dec = decomposition or decompose(m)
    where = dec.index()
    for comp in dec.components:
        image = {f[e] for e in comp}
        target = dec.components[where[f[comp[0]]]]
        if image != set(target):
            return False
        inside = set(comp)
        for c, e in m.constants.items():
            if e in inside and f[e] != e:
                return False
        for name, ts in m.relations.items():
            local = {t for t in ts if t[0] in inside}
            tlocal = {t for t in ts if t[0] in image}
            if {tuple(f[e] for e in t) for t in local} != tlocal:
                return False
    return True

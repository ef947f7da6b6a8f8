"""Finite shadows of the extension construction for non-cellular structures.

The counting argument: balls of radius n have at most K**n elements, so a
component of size greater than |F| * K**n contains an element x at distance
more than n from every element of F. From such an x a linked chain of n
distinct relation tuples can be laid out that never touches F.
"""

from __future__ import annotations

from dataclasses import dataclass

from macell.cellular import CatalogEntry, StructureCatalog, catalog_is_cellular
from macell.components import INF, branching_constant, decompose, distances_from
from macell.core import Signature, Structure
from macell.logic.syntax import Rel, Var, conj


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    """A linked chain of n relation tuples avoiding the obstacle set F."""

    n: int
    r: int
    F: frozenset
    x: str | None
    tuples: tuple[tuple[str, tuple[str, ...]], ...] = ()

    @property
    def formula(self):
        """The linked atomic conjunction, one variable per distinct element."""
        names = {}
        for _, t in self.tuples:
            for e in t:
                names.setdefault(e, f"u{len(names)}")
        return conj(*(Rel(name, tuple(Var(names[e]) for e in t)) for name, t in self.tuples))

    def assignment(self):
        names = {}
        for _, t in self.tuples:
            for e in t:
                names.setdefault(e, f"u{len(names)}")
        return {v: e for e, v in names.items()}

    def to_dict(self):
        return {"witness": self.x,
                "conjuncts": [{"relation": name, "tuple": list(t)} for name, t in self.tuples],
                "avoided": sorted(self.F), "n": self.n, "r": self.r}


def _distance_to_set(m, F):
    """For every element, min Gaifman distance to F (inf when unreachable)."""
    best = {e: INF for e in m.universe}
    for f in F:
        for e, d in distances_from(m, f).items():
            if d < best[e]:
                best[e] = d
    return best


def find_witness(m: Structure, F, n: int) -> str:
    """An element x outside F with |[x]| > n*r and distance > n from every f in F."""
    F = frozenset(F)
    unknown = F - set(m.universe)
    if unknown:
        raise ExtensionError(f"obstacle set has unknown elements {sorted(unknown)}")
    r = m.signature.max_arity
    dec = decompose(m)
    dist = _distance_to_set(m, F)
    big = len(F) * branching_constant(m) ** n
    order = sorted(range(len(dec.components)),
                   key=lambda i: (len(dec.components[i]) <= big, i))
    for i in order:
        comp = dec.components[i]
        if len(comp) <= n * r:
            continue
        for x in comp:
            if x not in F and dist[x] > n:
                return x
    largest = max((len(c) for c in dec.components), default=0)
    raise ExtensionError(
        f"no witness for n={n}: needs a component larger than {n * r} with an element "
        f"farther than {n} from the obstacles; largest component has {largest} elements"
    )


def build_chain(m: Structure, F, n: int) -> ChainSpec:
    """n distinct, consecutively intersecting tuples starting at a witness, avoiding F."""
    F = frozenset(F)
    x = find_witness(m, F, n)
    r = m.signature.max_arity
    if n == 0:
        return ChainSpec(0, r, F, x, ())
    tuples = [(name, t) for name, t in m.tuples() if not (set(t) & F)]
    containing = {}
    for i, (_, t) in enumerate(tuples):
        for e in set(t):
            containing.setdefault(e, []).append(i)

    chain = []
    used = set()

    def extend():
        if len(chain) == n:
            return True
        last = tuples[chain[-1]][1]
        nexts = sorted({j for e in set(last) for j in containing.get(e, ())} - used)
        for j in nexts:
            chain.append(j)
            used.add(j)
            if extend():
                return True
            chain.pop()
            used.discard(j)
        return False

    for start in containing.get(x, ()):
        chain[:] = [start]
        used.clear()
        used.add(start)
        if extend():
            return ChainSpec(n, r, F, x, tuple(tuples[i] for i in chain))
    raise ExtensionError(f"no chain of {n} distinct linked tuples from {x!r} avoids the obstacles")


@dataclass(frozen=True)
class FragmentReport:
    failures: tuple[tuple[str, str], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.passed

    def items_failed(self):
        return sorted({item for item, _ in self.failures})

    def to_dict(self):
        return {"pass": self.passed,
                "failures": [{"item": i, "message": msg} for i, msg in self.failures]}


def stand_in_base(m: Structure, elements) -> Structure:
    """The induced substructure on `elements`, without constants."""
    keep = set(elements)
    universe = tuple(e for e in m.universe if e in keep)
    rels = {name: [t for t in ts if set(t) <= keep] for name, ts in m.relations.items()}
    return Structure(Signature(m.signature.relations), universe, rels)


def verify_fragment(m: Structure, base: Structure, spec: ChainSpec) -> FragmentReport:
    failures = []
    universe = set(m.universe)
    base_set = set(base.universe)
    # item 1, finite shadow: the atomic diagram of the base is unchanged
    if not base_set <= universe:
        failures.append(("1", f"base elements missing: {sorted(base_set - universe)}"))
    else:
        for name in base.signature.relation_names:
            inside = {t for t in m.relations.get(name, ()) if set(t) <= base_set}
            if inside != set(base.relations[name]):
                failures.append(("1", f"relation {name} differs on the base"))
        for c, e in base.constants.items():
            if m.constants.get(c) != e:
                failures.append(("1", f"constant {c} moved"))
    for i, (name, t) in enumerate(spec.tuples):
        hit = sorted(set(t) & base_set)
        if hit:
            failures.append(("2", f"tuple {i} reuses base element {hit[0]!r}"))
        if name not in m.relations or tuple(t) not in m.relations[name]:
            failures.append(("3", f"tuple {i} {list(t)} does not satisfy {name}"))
    for i in range(len(spec.tuples) - 1):
        if not set(spec.tuples[i][1]) & set(spec.tuples[i + 1][1]):
            failures.append(("4", f"tuples {i} and {i + 1} do not intersect"))
    seen = {}
    for i, (_, t) in enumerate(spec.tuples):
        if tuple(t) in seen:
            failures.append(("5", f"tuples {seen[tuple(t)]} and {i} are equal"))
        seen.setdefault(tuple(t), i)
    return FragmentReport(tuple(failures))


def synthesize_extension(cat: StructureCatalog, copies: int, new_size: int) -> StructureCatalog:
    """Add `copies` fresh components of the unbounded family's pattern at size >= new_size."""
    cellular, _ = catalog_is_cellular(cat)
    if cellular:
        raise ExtensionError("catalog is cellular; the construction needs an unbounded family")
    if copies < 0:
        raise ExtensionError("copies must be non-negative")
    if copies == 0:
        return cat
    template = next((t for t in cat.family if len(t) >= new_size), None)
    if template is None:
        largest = max(len(t) for t in cat.family)
        raise ExtensionError(f"family exhausted below size {new_size} (largest member {largest})")
    new = tuple(CatalogEntry(template, 1) for _ in range(copies))
    return StructureCatalog(cat.base, cat.entries + new, cat.family, cat.unbounded)

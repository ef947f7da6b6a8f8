"""Degree profiles, acceptable formula sets and MA-presentations."""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from macell.core import RelationSymbol, Signature, Structure, StructureError
from macell.logic.parser import parse
from macell.logic.semantics import satisfying_tuples, truth_table
from macell.logic.syntax import (
    FALSE, Eq, Formula, Not, Param, Rel, Var, conj, disj, free_vars, is_quantifier_free, params,
    substitute, to_text,
)


class AcceptabilityError(ValueError):
    pass


@dataclass(frozen=True)
class DegreeProfile:
    degrees: dict
    witnesses: dict
    bounds: dict

    @property
    def K(self) -> int:
        return max(self.degrees.values(), default=0)

    def within_bound(self, name) -> bool | None:
        bound = self.bounds.get(name)
        if bound is None:
            return None
        return self.degrees[name] <= bound

    def to_dict(self):
        return [
            {"relation": name, "degree": d, "witness": self.witnesses[name],
             "bound": self.bounds.get(name), "pass": self.within_bound(name)}
            for name, d in self.degrees.items()
        ]


def _tuple_degrees(tuples) -> Counter:
    counts = Counter()
    for t in tuples:
        for e in set(t):
            counts[e] += 1
    return counts


def degree_profile(m: Structure) -> DegreeProfile:
    degrees, witnesses = {}, {}
    order = {e: i for i, e in enumerate(m.universe)}
    for sym in m.signature.relations:
        counts = _tuple_degrees(m.relations[sym.name])
        if counts:
            best = max(counts.values())
            witness = min((e for e, c in counts.items() if c == best), key=order.get)
        else:
            best, witness = 0, None
        degrees[sym.name] = best
        witnesses[sym.name] = witness
    bounds = {r.name: r.degree_bound for r in m.signature.relations}
    return DegreeProfile(degrees, witnesses, bounds)


def formula_degree(m: Structure, theta: Formula) -> int:
    """Max over elements of the number of satisfying tuples containing it."""
    if not is_quantifier_free(theta):
        raise ValueError("formula_degree expects a quantifier-free formula")
    variables = sorted(free_vars(theta))
    if not variables:
        raise ValueError("formula_degree needs at least one free variable")
    counts = _tuple_degrees(satisfying_tuples(m, theta, variables))
    return max(counts.values(), default=0)


@dataclass(frozen=True)
class MAReport:
    rows: tuple
    passed: bool
    note: str = ""

    def to_dict(self):
        return {"pass": self.passed, "note": self.note, "relations": list(self.rows)}

    def text(self):
        lines = [
            f"{r['relation']}: degree {r['degree']} bound {r['bound']} "
            f"{'ok' if r['pass'] else 'FAIL' if r['pass'] is False else 'unbounded'}"
            for r in self.rows
        ]
        lines.append(("MA-presented" if self.passed else "not MA-presented")
                     + (f" ({self.note})" if self.note else ""))
        return "\n".join(lines)


def is_ma_presented(m: Structure) -> MAReport:
    prof = degree_profile(m)
    rows = tuple(
        {"relation": name, "degree": d, "bound": prof.bounds.get(name),
         "pass": prof.within_bound(name)}
        for name, d in prof.degrees.items()
    )
    missing = [r["relation"] for r in rows if r["bound"] is None]
    passed = all(r["pass"] is not False for r in rows)
    note = ""
    if missing:
        note = ("no declared bound for " + ", ".join(missing)
                + "; finite, hence trivially bounded")
    return MAReport(rows, passed, note)


# -- acceptable sets ----------------------------------------------------------


@dataclass(frozen=True)
class Member:
    formula: Formula
    degree_bound: int | None = None

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(free_vars(self.formula)))


@dataclass(frozen=True)
class AcceptableSet:
    members: tuple[Member, ...] = ()

    def __post_init__(self):
        for mem in self.members:
            if not is_quantifier_free(mem.formula):
                raise AcceptabilityError(f"member {to_text(mem.formula)} is not quantifier-free")

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    @property
    def parameters(self) -> tuple[str, ...]:
        out = set()
        for mem in self.members:
            out |= params(mem.formula)
        return tuple(sorted(out))


def acceptable_set(formulas, signature=None) -> AcceptableSet:
    """Build from strings/formulas or (formula, bound) pairs."""
    members = []
    for item in formulas:
        bound = None
        if isinstance(item, Member):
            members.append(item)
            continue
        if isinstance(item, tuple):
            item, bound = item
        phi = parse(item, signature) if isinstance(item, str) else item
        members.append(Member(phi, bound))
    return AcceptableSet(tuple(members))


def load_acceptable_set(data, signature=None) -> AcceptableSet:
    doc = json.loads(data)
    return acceptable_set([(d["formula"], d.get("degree_bound")) for d in doc], signature)


def _instances(member: Member, arity: int):
    """Member instantiated on each injection of its variables into x1..x{arity}."""
    vs = member.variables
    targets = [f"x{i}" for i in range(1, arity + 1)]
    if len(vs) > arity:
        return []
    out = []
    for image in itertools.permutations(targets, len(vs)):
        out.append(substitute(member.formula, {v: Var(t) for v, t in zip(vs, image)}))
    return out


@dataclass(frozen=True)
class Fingerprint:
    definable: bool
    formula: Formula | None
    instances: tuple = ()
    conflict: tuple | None = None


def definability_fingerprint(m: Structure, target: str, a: AcceptableSet,
                             over: Structure | None = None) -> Fingerprint:
    """Is `target` a boolean combination of the members of `a` on `m`?

    Every tuple gets the truth vector of all member instances; the target is
    definable iff that vector decides membership. The synthesized definition
    is the disjunction over accepting vectors. Members are evaluated in
    `over` when given (a structure on the same universe in another
    signature).
    """
    arity = m.signature.arity(target)
    targets = [f"x{i}" for i in range(1, arity + 1)]
    instances = [inst for mem in a for inst in _instances(mem, arity)]
    source = m if over is None else over
    tables = [truth_table(source, inst, targets) for inst in instances]
    member_of = m.relations[target]
    seen = {}
    conflict = None
    universe = m.universe
    for idx in itertools.product(range(len(universe)), repeat=arity):
        key = tuple(bool(t[idx]) for t in tables)
        tup = tuple(universe[i] for i in idx)
        inside = tup in member_of
        if key in seen and seen[key][0] != inside:
            conflict = (seen[key][1], tup) if inside else (tup, seen[key][1])
            break
        seen.setdefault(key, (inside, tup))
    if conflict is not None:
        return Fingerprint(False, None, tuple(instances), conflict)
    accepting = sorted(k for k, (inside, _) in seen.items() if inside)
    terms = []
    for key in accepting:
        lits = [inst if val else Not(inst) for inst, val in zip(instances, key)]
        terms.append(conj(*lits))
    formula = disj(*terms) if terms else FALSE
    return Fingerprint(True, formula, tuple(instances))


# -- MA-presentations ---------------------------------------------------------


def _constant_name(d, taken):
    name = f"c_{d}"
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def build_ma_presentation(m: Structure, a: AcceptableSet) -> Structure:
    """The structure M_A: one relation per member plus constants naming D(A)."""
    for name in m.signature.relation_names:
        fp = definability_fingerprint(m, name, a)
        if not fp.definable:
            raise AcceptabilityError(
                f"relation {name} is not a boolean combination of the acceptable set "
                f"(tuples {list(fp.conflict[0])} and {list(fp.conflict[1])} share a fingerprint)"
            )
    taken = set(m.signature.constants)
    syms, rels = [], {}
    for i, mem in enumerate(a):
        vs = mem.variables
        if not vs:
            raise AcceptabilityError(f"member {to_text(mem.formula)} has no free variables")
        tuples = satisfying_tuples(m, mem.formula, vs)
        measured = max(_tuple_degrees(tuples).values(), default=0)
        bound = mem.degree_bound if mem.degree_bound is not None else measured
        if len(vs) == 1:
            bound = min(bound, 1) if tuples else bound
        if measured > bound:
            raise AcceptabilityError(
                f"member {to_text(mem.formula)} has degree {measured} > declared bound {bound}"
            )
        name = f"R{i}"
        while name in taken:
            name += "_"
        taken.add(name)
        syms.append(RelationSymbol(name, len(vs), bound))
        rels[name] = tuples
    consts = dict(m.constants)
    for d in a.parameters:
        if d not in m.universe:
            raise AcceptabilityError(f"parameter #{d} is not an element of the structure")
        consts[_constant_name(d, taken)] = d
    sig = Signature(tuple(syms), tuple(consts))
    return Structure(sig, m.universe, rels, consts)


def atomic_members(m: Structure, parameters: Sequence[str] = ()) -> AcceptableSet:
    """All relation atoms with canonical variable patterns and the given parameters.

    Variables appear in first-occurrence order x1, x2, ...; the padding in
    definability_fingerprint places them on every position.
    """
    out = []
    pars = [Param(p) for p in parameters]
    for sym in m.signature.relations:
        for pattern in _patterns(sym.arity, len(pars)):
            if all(kind == "p" for kind, _ in pattern):
                continue  # a sentence, not a member
            args = tuple(pars[p[1]] if p[0] == "p" else Var(f"x{p[1] + 1}") for p in pattern)
            out.append(Member(Rel(sym.name, args), sym.degree_bound))
    return AcceptableSet(tuple(out))


def _patterns(arity, n_params):
    def go(prefix, next_var):
        if len(prefix) == arity:
            yield tuple(prefix)
            return
        for v in range(next_var + 1):
            yield from go(prefix + [("v", v)], max(next_var, v + 1))
        for p in range(n_params):
            yield from go(prefix + [("p", p)], next_var)

    return list(go([], 0))


def constants_as_parameters(m: Structure) -> tuple[str, ...]:
    return tuple(sorted(set(m.constants.values())))


def association_report(m1: Structure, m2: Structure) -> dict:
    """Check mutual quantifier-free interdefinability on a common universe.

    Each relation of one structure must be a boolean combination of the
    other's atoms, with every element named by a constant of either
    structure usable as a parameter.
    """
    if m1.universe != m2.universe:
        raise StructureError("associated structures must share a universe")
    out = {}
    named = sorted(set(constants_as_parameters(m1)) | set(constants_as_parameters(m2)))
    # equalities with named elements are quantifier-free formulas too
    equalities = (Member(Eq(Var("x1"), Var("x2")), 1),) + tuple(
        Member(Eq(Var("x1"), Param(d)), 1) for d in named)
    for left, right, tag in ((m1, m2, "forward"), (m2, m1, "backward")):
        members = AcceptableSet(atomic_members(right, named).members + equalities)
        for name in left.signature.relation_names:
            fp = definability_fingerprint(left, name, members, over=right)
            out[(tag, name)] = fp.definable
    return out

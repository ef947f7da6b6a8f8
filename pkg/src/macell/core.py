"""Finite relational signatures and structures.

Element identifiers are opaque strings. The universe keeps document order,
which only affects output ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence


class StructureError(ValueError):
    """Invalid signature, structure document or structure operation."""


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int
    degree_bound: int | None = None


@dataclass(frozen=True)
class Signature:
    relations: tuple[RelationSymbol, ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate relation names in {names}")
        if len(set(self.constants)) != len(self.constants):
            raise StructureError(f"duplicate constant names in {list(self.constants)}")
        clash = set(names) & set(self.constants)
        if clash:
            raise StructureError(f"names used both as relation and constant: {sorted(clash)}")
        for r in self.relations:
            if r.arity < 1:
                raise StructureError(f"relation {r.name} has non-positive arity {r.arity}")
            if r.degree_bound is not None and r.degree_bound < 0:
                raise StructureError(f"relation {r.name} has negative degree bound")

    def __contains__(self, name):
        return name in self.relation_names or name in self.constants

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def relation(self, name: str) -> RelationSymbol:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def arity(self, name: str) -> int:
        return self.relation(name).arity

    @property
    def max_arity(self) -> int:
        return max((r.arity for r in self.relations), default=0)


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite structure: universe, relation interpretations, constants."""

    signature: Signature
    universe: tuple[str, ...]
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        universe = tuple(self.universe)
        if len(set(universe)) != len(universe):
            raise StructureError("universe contains duplicate elements")
        object.__setattr__(self, "universe", universe)
        members = set(universe)
        rels = {}
        for sym in self.signature.relations:
            tuples = frozenset(tuple(t) for t in self.relations.get(sym.name, ()))
            for t in tuples:
                if len(t) != sym.arity:
                    raise StructureError(
                        f"arity mismatch: {sym.name} has arity {sym.arity}, got tuple {list(t)}"
                    )
                for e in t:
                    if e not in members:
                        raise StructureError(f"unknown element {e!r} in {sym.name}{list(t)}")
            rels[sym.name] = tuples
        extra = set(self.relations) - set(rels)
        if extra:
            raise StructureError(f"relations not in signature: {sorted(extra)}")
        consts = dict(self.constants)
        for c in self.signature.constants:
            if c not in consts:
                raise StructureError(f"constant {c} is not assigned")
            if consts[c] not in members:
                raise StructureError(f"constant {c} assigned unknown element {consts[c]!r}")
        extra = set(consts) - set(self.signature.constants)
        if extra:
            raise StructureError(f"constants not in signature: {sorted(extra)}")
        object.__setattr__(self, "relations", MappingProxyType(rels))
        object.__setattr__(self, "constants", MappingProxyType(consts))

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.universe == other.universe
            and dict(self.relations) == dict(other.relations)
            and dict(self.constants) == dict(other.constants)
        )

    def __hash__(self):
        return hash((self.signature, self.universe))

    def __len__(self):
        return len(self.universe)

    def __repr__(self):
        sizes = ", ".join(f"{k}:{len(v)}" for k, v in self.relations.items())
        return f"Structure(|M|={len(self.universe)}, {sizes})"

    def tuples(self) -> Iterable[tuple[str, tuple[str, ...]]]:
        """All (relation name, tuple) pairs, in deterministic order."""
        for name in self.signature.relation_names:
            for t in sorted(self.relations[name]):
                yield name, t

    def substructure(self, elements: Iterable[str]) -> "Structure":
        """Induced substructure on `elements` (constants must lie inside)."""
        keep = set(elements)
        universe = tuple(e for e in self.universe if e in keep)
        rels = {
            name: frozenset(t for t in ts if all(e in keep for e in t))
            for name, ts in self.relations.items()
        }
        return Structure(self.signature, universe, rels, self.constants)


def structure_from_dict(doc: Mapping) -> Structure:
    try:
        sig_doc = doc.get("signature", {}) or {}
        relations = tuple(
            RelationSymbol(r["name"], int(r["arity"]), r.get("degree_bound"))
            for r in sig_doc.get("relations", [])
        )
        signature = Signature(relations, tuple(sig_doc.get("constants", [])))
        universe = tuple(str(e) for e in doc["universe"])
        rel_doc = doc.get("relations", {}) or {}
        rels = {name: [tuple(t) for t in ts] for name, ts in rel_doc.items()}
        consts = dict(doc.get("constants", {}) or {})
    except (KeyError, TypeError, AttributeError) as exc:
        raise StructureError(f"malformed structure document: {exc}") from exc
    return Structure(signature, universe, rels, consts)


def structure_to_dict(m: Structure) -> dict:
    rels = []
    for r in m.signature.relations:
        entry = {"name": r.name, "arity": r.arity}
        if r.degree_bound is not None:
            entry["degree_bound"] = r.degree_bound
        rels.append(entry)
    return {
        "signature": {"relations": rels, "constants": list(m.signature.constants)},
        "universe": list(m.universe),
        "relations": {name: [list(t) for t in sorted(m.relations[name])]
                      for name in m.signature.relation_names},
        "constants": {c: m.constants[c] for c in m.signature.constants},
    }


def load_structure(data: bytes | str) -> Structure:
    """Parse and validate a JSON structure document."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise StructureError(f"parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructureError("parse error: structure document must be a JSON object")
    return structure_from_dict(doc)


def dump_structure(m: Structure) -> str:
    return json.dumps(structure_to_dict(m), indent=2) + "\n"


def _check_fresh(m: Structure, names: Iterable[str]):
    seen = set()
    for name in names:
        if name in m.signature or name in seen:
            raise StructureError(f"name collision: {name!r} already in use")
        seen.add(name)


@dataclass(frozen=True)
class Definition:
    name: str
    arity: int
    formula: object  # logic.Formula, quantifier-free
    degree_bound: int | None = None


DefinitionSet = Sequence[Definition]


def qf_expand(m: Structure, defs: DefinitionSet) -> Structure:
    """Expand `m` by new relations defined by quantifier-free formulas.

    Each definition's free variables must be exactly x1..x{arity}; element
    parameters appear as `#id` terms.
    """
    from macell.logic import free_vars, is_quantifier_free, satisfying_tuples

    _check_fresh(m, [d.name for d in defs])
    new_syms = []
    new_rels = dict(m.relations)
    for d in defs:
        if not is_quantifier_free(d.formula):
            raise StructureError(f"definition of {d.name} is not quantifier-free")
        variables = tuple(f"x{i}" for i in range(1, d.arity + 1))
        if not free_vars(d.formula) <= set(variables):
            raise StructureError(
                f"definition of {d.name} uses free variables outside {list(variables)}"
            )
        new_rels[d.name] = frozenset(satisfying_tuples(m, d.formula, variables))
        new_syms.append(RelationSymbol(d.name, d.arity, d.degree_bound))
    sig = Signature(m.signature.relations + tuple(new_syms), m.signature.constants)
    return Structure(sig, m.universe, new_rels, m.constants)


def reduct(m: Structure, keep: Iterable[str]) -> Structure:
    keep = set(keep)
    unknown = keep - set(m.signature.relation_names) - set(m.signature.constants)
    if unknown:
        raise StructureError(f"unknown symbols: {sorted(unknown)}")
    sig = Signature(
        tuple(r for r in m.signature.relations if r.name in keep),
        tuple(c for c in m.signature.constants if c in keep),
    )
    return Structure(
        sig,
        m.universe,
        {r.name: m.relations[r.name] for r in sig.relations},
        {c: m.constants[c] for c in sig.constants},
    )


def expand_with_unaries(m: Structure, colors: Sequence[tuple[str, Iterable[str]]]) -> Structure:
    """Add one unary relation per (name, subset) pair."""
    _check_fresh(m, [name for name, _ in colors])
    rels = dict(m.relations)
    syms = []
    for name, subset in colors:
        rels[name] = frozenset((e,) for e in subset)
        syms.append(RelationSymbol(name, 1, 1))
    sig = Signature(m.signature.relations + tuple(syms), m.signature.constants)
    return Structure(sig, m.universe, rels, m.constants)


def make_structure(
    universe: Iterable[str],
    relations: Mapping[str, Iterable[Sequence[str]]],
    arities: Mapping[str, int] | None = None,
    bounds: Mapping[str, int] | None = None,
    constants: Mapping[str, str] | None = None,
) -> Structure:
    """Convenience constructor; arities are inferred from the first tuple."""
    arities = dict(arities or {})
    bounds = bounds or {}
    rels = {k: [tuple(t) for t in v] for k, v in relations.items()}
    syms = []
    for name, ts in rels.items():
        arity = arities.get(name) or (len(ts[0]) if ts else None)
        if arity is None:
            raise StructureError(f"cannot infer arity of empty relation {name}")
        syms.append(RelationSymbol(name, arity, bounds.get(name)))
    constants = dict(constants or {})
    sig = Signature(tuple(syms), tuple(constants))
    return Structure(sig, tuple(universe), rels, constants)

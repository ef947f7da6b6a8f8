"""Cellular partitions: extraction, verification, refinement, grid expansion.

A partition is an exceptional set K plus bands; every band holds cells, all
tuples of the same length k, enumerated so that the coordinatewise map
between any two cells (identity elsewhere) is meant to be an isomorphism
over K, and every permutation of the cells of a band is meant to be induced
by an automorphism fixing everything outside the band.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from macell.canon import canonical_form
from macell.components import decompose, first_violation
from macell.core import RelationSymbol, Signature, Structure


class CellularError(ValueError):
    pass


@dataclass(frozen=True)
class Band:
    k: int
    cells: tuple[tuple[str, ...], ...]

    def to_dict(self):
        return {"k": self.k, "cells": [list(c) for c in self.cells]}


@dataclass(frozen=True)
class CellularPartition:
    K: tuple[str, ...]
    bands: tuple[Band, ...] = ()

    def to_dict(self):
        return {"K": list(self.K), "bands": [b.to_dict() for b in self.bands]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc):
        try:
            bands = tuple(
                Band(int(b["k"]), tuple(tuple(c) for c in b["cells"])) for b in doc["bands"]
            )
            return cls(tuple(doc["K"]), bands)
        except (KeyError, TypeError, ValueError) as exc:
            raise CellularError(f"malformed partition document: {exc}") from exc

    @classmethod
    def loads(cls, data):
        return cls.from_dict(json.loads(data))


@dataclass(frozen=True)
class CellularReport:
    passed: bool
    condition: str | None = None
    message: str = ""
    witness: tuple | None = None

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {"pass": self.passed, "condition": self.condition, "message": self.message,
                "witness": _jsonable(self.witness)}


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


def cellular_decompose(m: Structure, threshold: int = 3) -> CellularPartition:
    """Components of iso classes seen fewer than `threshold` times go to K."""
    if threshold < 2:
        raise CellularError("threshold must be at least 2")
    dec = decompose(m)
    counts = {c.id: c.count for c in dec.classes}
    forms = {c.id: c.form for c in dec.classes}
    exceptional = set()
    grouped = {}
    for comp, order, cls in zip(dec.components, dec.orders, dec.iso_class):
        if counts[cls] < threshold:
            exceptional.update(comp)
        else:
            grouped.setdefault(cls, []).append(order)
    bands = [
        Band(len(cells[0]), tuple(sorted(cells)))
        for cls, cells in sorted(grouped.items(), key=lambda kv: (len(kv[1][0]), forms[kv[0]]))
    ]
    K = tuple(e for e in m.universe if e in exceptional)
    return CellularPartition(K, tuple(bands))


def _swap_map(m, band: Band, j: int, jj: int):
    f = {e: e for e in m.universe}
    for a, b in zip(band.cells[j], band.cells[jj]):
        f[a], f[b] = b, a
    return f


def _check_partition(m, p) -> CellularReport | None:
    universe = set(m.universe)
    seen = {}
    for e in p.K:
        if e in seen:
            return CellularReport(False, "partition", f"{e!r} listed twice in K", (e,))
        seen[e] = "K"
    for i, band in enumerate(p.bands):
        for j, cell in enumerate(band.cells):
            for e in cell:
                if e in seen:
                    return CellularReport(False, "partition",
                                          f"{e!r} occurs more than once", (e,))
                seen[e] = (i, j)
    unknown = set(seen) - universe
    if unknown:
        e = sorted(unknown)[0]
        return CellularReport(False, "partition", f"unknown element {e!r}", (e,))
    missing = [e for e in m.universe if e not in seen]
    if missing:
        return CellularReport(False, "partition",
                              f"element {missing[0]!r} is not covered", (missing[0],))
    return None


def verify_cellular(m: Structure, p: CellularPartition) -> CellularReport:
    """Check the three cellularity conditions on a finite structure.

    Condition 3 is checked on transpositions of cells, which generate every
    permutation of a band.
    """
    bad = _check_partition(m, p)
    if bad is not None:
        return bad
    # (1) constant cell length per band
    for i, band in enumerate(p.bands):
        for j, cell in enumerate(band.cells):
            if len(cell) != band.k or band.k < 1:
                return CellularReport(False, "1", f"band {i} cell {j} has length {len(cell)} "
                                      f"instead of {band.k}", tuple(cell))
    # (2) coordinatewise maps are isomorphisms over K
    K = set(p.K)
    for i, band in enumerate(p.bands):
        if not band.cells:
            continue
        first = band.cells[0]
        for j in range(1, len(band.cells)):
            cell = band.cells[j]
            f = {**{e: e for e in K}, **dict(zip(first, cell))}
            g = {**{e: e for e in K}, **dict(zip(cell, first))}
            for src, mp in ((first, f), (cell, g)):
                dom = K | set(src)
                for name in m.signature.relation_names:
                    ts = m.relations[name]
                    for t in sorted(ts):
                        if all(e in dom for e in t) and tuple(mp[e] for e in t) not in ts:
                            return CellularReport(
                                False, "2",
                                f"band {i}: cells 0 and {j} are not isomorphic over K; "
                                f"{name}{list(t)} is not preserved",
                                (name, tuple(t)))
    # (3) transpositions of cells extend to automorphisms fixing the rest
    for c, e in m.constants.items():
        if e not in K:
            return CellularReport(False, "3", f"constant {c} names {e!r} outside K", (c, e))
    for i, band in enumerate(p.bands):
        for j, jj in itertools.combinations(range(len(band.cells)), 2):
            bad = first_violation(m, _swap_map(m, band, j, jj))
            if bad is not None:
                return CellularReport(
                    False, "3",
                    f"band {i}: swapping cells {j} and {jj} is not an automorphism; "
                    f"violated at {bad[0]}{list(bad[1])}",
                    (bad[0], tuple(bad[1])))
    return CellularReport(True)


def all_permutations_ok(m: Structure, band: Band) -> bool:
    """Every permutation of the band's cells induces an automorphism (exhaustive)."""
    from macell.components import is_automorphism

    n = len(band.cells)
    for perm in itertools.permutations(range(n)):
        f = {e: e for e in m.universe}
        for j, pj in enumerate(perm):
            for a, b in zip(band.cells[j], band.cells[pj]):
                f[a] = b
        if not is_automorphism(m, f):
            return False
    return True


def _coordinate_blocks(m, band: Band):
    """Coordinates linked by a relation tuple inside the first cell."""
    cell = band.cells[0]
    pos = {e: i for i, e in enumerate(cell)}
    parent = list(range(band.k))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for _, t in m.tuples():
        inside = [pos[e] for e in t if e in pos]
        for a in inside[1:]:
            parent[find(a)] = find(inside[0])
    blocks = {}
    for i in range(band.k):
        blocks.setdefault(find(i), []).append(i)
    return [tuple(b) for b in blocks.values()]


def _split(band: Band, left):
    right = [i for i in range(band.k) if i not in left]
    d = Band(len(left), tuple(tuple(c[i] for i in left) for c in band.cells))
    e = Band(len(right), tuple(tuple(c[i] for i in right) for c in band.cells))
    return d, e


def refine_indecomposable(m: Structure, p: CellularPartition) -> CellularPartition:
    """Split bands while the result stays cellular; stops since cell length drops."""
    report = verify_cellular(m, p)
    if not report:
        raise CellularError(f"input partition is not cellular: {report.message}")
    bands = list(p.bands)
    changed = True
    while changed:
        changed = False
        for i, band in enumerate(bands):
            for left in _candidate_splits(m, band):
                d, e = _split(band, left)
                trial = bands[:i] + [d, e] + bands[i + 1:]
                if verify_cellular(m, CellularPartition(p.K, tuple(trial))):
                    bands = trial
                    changed = True
                    break
            if changed:
                break
    return CellularPartition(p.K, tuple(bands))


def _candidate_splits(m, band: Band):
    if band.k < 2 or not band.cells:
        return []
    blocks = _coordinate_blocks(m, band)
    if len(blocks) > 1:
        out = []
        rest = blocks[1:]
        for r in range(0, len(rest)):
            for combo in itertools.combinations(rest, r):
                left = sorted(itertools.chain(blocks[0], *combo))
                out.append(left)
        return out
    # a connected cell can only be split if relations are symmetric enough;
    # try every proper subset containing coordinate 0 when the cell is small
    if band.k > 12:
        return []
    others = range(1, band.k)
    return [sorted((0,) + combo) for r in range(0, band.k - 1)
            for combo in itertools.combinations(others, r)]


def is_indecomposable(m: Structure, p: CellularPartition) -> bool:
    """No band admits any verified split (exhaustive over coordinate subsets)."""
    for i, band in enumerate(p.bands):
        if band.k < 2:
            continue
        others = range(1, band.k)
        for r in range(0, band.k - 1):
            for combo in itertools.combinations(others, r):
                d, e = _split(band, sorted((0,) + combo))
                trial = p.bands[:i] + (d, e) + p.bands[i + 1:]
                if verify_cellular(m, CellularPartition(p.K, trial)):
                    return False
    return True


def grid_expansion(m: Structure, p: CellularPartition) -> Structure:
    """The grid-like structure: constants for K, unaries per coordinate, one relation per band."""
    report = verify_cellular(m, p)
    if not report:
        raise CellularError(f"partition is not cellular: {report.message}")
    syms, rels = [], {}
    for i, band in enumerate(p.bands, start=1):
        for ell in range(1, band.k + 1):
            name = f"U{i}_{ell}"
            syms.append(RelationSymbol(name, 1, 1))
            rels[name] = [(c[ell - 1],) for c in band.cells]
        syms.append(RelationSymbol(f"R{i}", band.k, band.k))
        rels[f"R{i}"] = [tuple(c) for c in band.cells]
    taken = {s.name for s in syms}
    consts = {}
    for k in p.K:
        name = f"c_{k}"
        while name in taken:
            name += "_"
        taken.add(name)
        consts[name] = k
    return Structure(Signature(tuple(syms), tuple(consts)), m.universe, rels, consts)


def band_form(m: Structure, band: Band):
    return canonical_form(m, band.cells[0]) if band.cells else None


# -- structure catalogs -------------------------------------------------------

OMEGA = "omega"


@dataclass(frozen=True)
class CatalogEntry:
    template: Structure
    multiplicity: int | str  # a natural number or OMEGA


@dataclass(frozen=True)
class StructureCatalog:
    """A countable structure presented as a finite base plus component templates.

    Entries carry a multiplicity (finite or OMEGA); the optional family is a
    list of templates of strictly increasing size, flagged unbounded when it
    stands for components of every size.
    """

    base: Structure
    entries: tuple[CatalogEntry, ...] = ()
    family: tuple[Structure, ...] = ()
    unbounded: bool = False

    def __post_init__(self):
        sig = self.base.signature
        templates = [e.template for e in self.entries] + list(self.family)
        for i, t in enumerate(templates):
            if t.signature.relations != sig.relations:
                raise CellularError(f"template {i} has a different signature from the base")
            if t.constants:
                raise CellularError(f"template {i} names constants")
            if len(t) == 0 or len(decompose(t).components) != 1:
                raise CellularError(f"template {i} is not a single component")
        for e in self.entries:
            m = e.multiplicity
            if m != OMEGA and not (isinstance(m, int) and m >= 0):
                raise CellularError(f"bad multiplicity {m!r}")
        sizes = [len(t) for t in self.family]
        if any(a >= b for a, b in zip(sizes, sizes[1:])):
            raise CellularError("family template sizes must strictly increase")

    @property
    def signature(self):
        return self.base.signature

    def to_dict(self):
        from macell.core import structure_to_dict

        doc = {
            "base": structure_to_dict(self.base),
            "entries": [{"template": structure_to_dict(e.template),
                         "multiplicity": e.multiplicity} for e in self.entries],
        }
        if self.family:
            doc["family"] = {"templates": [structure_to_dict(t) for t in self.family],
                             "unbounded": self.unbounded}
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc):
        from macell.core import Signature, StructureError, structure_from_dict

        try:
            entries = tuple(
                CatalogEntry(structure_from_dict(e["template"]), e["multiplicity"])
                for e in doc.get("entries", [])
            )
            fam = doc.get("family") or {}
            family = tuple(structure_from_dict(t) for t in fam.get("templates", []))
            unbounded = bool(fam.get("unbounded", False))
            if doc.get("base") is not None:
                base = structure_from_dict(doc["base"])
            else:
                templates = [e.template for e in entries] + list(family)
                if not templates:
                    raise CellularError("catalog has neither a base nor templates")
                base = Structure(Signature(templates[0].signature.relations), ())
        except (KeyError, TypeError, AttributeError, StructureError) as exc:
            raise CellularError(f"malformed catalog: {exc}") from exc
        return cls(base, entries, family, unbounded)

    @classmethod
    def loads(cls, data):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise CellularError(f"malformed catalog: {exc}") from exc
        if not isinstance(doc, dict):
            raise CellularError("malformed catalog: expected a JSON object")
        return cls.from_dict(doc)


def catalog_is_cellular(cat: StructureCatalog) -> tuple[bool, str]:
    if cat.family and cat.unbounded:
        return False, "unbounded component sizes"
    if all(e.multiplicity != OMEGA for e in cat.entries):
        return True, "finite structure"
    return True, "component sizes uniformly bounded"


def _stream(cat: StructureCatalog):
    """(prefix, template) for every component after the base, in realization order.

    Finite multiplicities come first, entry by entry; then omega entries and
    family members (increasing size) are interleaved round-robin.
    """
    for i, e in enumerate(cat.entries):
        if e.multiplicity != OMEGA:
            for copy in range(e.multiplicity):
                yield f"t{i}_{copy}_", e.template
    omega = [i for i, e in enumerate(cat.entries) if e.multiplicity == OMEGA]
    copy = 0
    while True:
        progressed = False
        for i in omega:
            yield f"t{i}_{copy}_", cat.entries[i].template
            progressed = True
        if copy < len(cat.family):
            yield f"f{copy}_", cat.family[copy]
            progressed = True
        if not progressed:
            return
        copy += 1


def realize_components(cat: StructureCatalog, budget: int):
    """The list of (prefix, template) pairs realized within `budget`."""
    if budget < len(cat.base):
        raise CellularError(f"budget {budget} is smaller than the base ({len(cat.base)})")
    used = len(cat.base)
    out = []
    for prefix, template in _stream(cat):
        if used + len(template) > budget:
            break
        out.append((prefix, template))
        used += len(template)
    return out


def assemble(cat: StructureCatalog, parts) -> Structure:
    universe = list(cat.base.universe)
    rels = {name: set(ts) for name, ts in cat.base.relations.items()}
    for prefix, template in parts:
        index = {e: f"{prefix}{k}" for k, e in enumerate(template.universe)}
        universe.extend(index[e] for e in template.universe)
        for name, ts in template.relations.items():
            rels[name].update(tuple(index[e] for e in t) for t in ts)
    return Structure(cat.signature, tuple(universe), rels, cat.base.constants)


def realize(cat: StructureCatalog, budget: int) -> Structure:
    """Base plus whole template copies, stopping at the first one that does not fit."""
    return assemble(cat, realize_components(cat, budget))

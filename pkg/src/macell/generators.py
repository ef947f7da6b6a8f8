"""Deterministic fixture families and seeded random generators.

All randomness goes through `random.Random(seed)` (CPython's Mersenne
Twister, MT19937), so equal seeds give equal output across runs.
"""

from __future__ import annotations

import random
from typing import Sequence

from macell.cellular import OMEGA, CatalogEntry, StructureCatalog
from macell.core import RelationSymbol, Signature, Structure
from macell.logic.syntax import (
    Count, Eq, Exists, Forall, Formula, Not, Param, Rel, Var, conj, disj,
)


# -- fixture families ---------------------------------------------------------


def _sig(*rels, constants=()):
    return Signature(tuple(RelationSymbol(*r) for r in rels), tuple(constants))


def path(n: int, prefix: str = "", bound: int = 2, name: str = "E") -> Structure:
    """Directed path on n vertices p0 -> p1 -> ... (n = 1 is an isolated vertex)."""
    vs = [f"{prefix}{i}" for i in range(n)]
    return Structure(_sig((name, 2, bound)), tuple(vs),
                     {name: [(vs[i], vs[i + 1]) for i in range(n - 1)]})


def paths(sizes: Sequence[int], bound: int = 2) -> Structure:
    """Disjoint directed paths, the k-th with vertices p{k}_0, p{k}_1, ..."""
    universe, edges = [], []
    for k, n in enumerate(sizes):
        vs = [f"p{k}_{i}" for i in range(n)]
        universe += vs
        edges += [(vs[i], vs[i + 1]) for i in range(n - 1)]
    return Structure(_sig(("E", 2, bound)), tuple(universe), {"E": edges})


def matching(count: int) -> Structure:
    """`count` disjoint directed edges a{i} -> b{i}."""
    universe = [e for i in range(count) for e in (f"a{i}", f"b{i}")]
    return Structure(_sig(("E", 2, 1)), tuple(universe),
                     {"E": [(f"a{i}", f"b{i}") for i in range(count)]})


def grid(width: int, height: int) -> Structure:
    """Directed grid: edges to the right and downwards; every vertex meets at most 4 edges."""
    name = lambda i, j: f"g{i}_{j}"
    universe = [name(i, j) for j in range(height) for i in range(width)]
    edges = []
    for j in range(height):
        for i in range(width):
            if i + 1 < width:
                edges.append((name(i, j), name(i + 1, j)))
            if j + 1 < height:
                edges.append((name(i, j), name(i, j + 1)))
    return Structure(_sig(("E", 2, 4)), tuple(universe), {"E": edges})


def eqrel(blocks: int, size: int) -> Structure:
    """An equivalence relation E with `blocks` classes of `size` elements each.

    E is deliberately declared without a degree bound: with large blocks it
    is not mutually algebraic, but naming one element per block gives an
    acceptable set of unary formulas.
    """
    universe = [f"e{b}_{i}" for b in range(blocks) for i in range(size)]
    pairs = [(f"e{b}_{i}", f"e{b}_{j}") for b in range(blocks)
             for i in range(size) for j in range(size)]
    return Structure(_sig(("E", 2, None)), tuple(universe), {"E": pairs})


def chain_cut(chains: int, length: int, seed: int = 0) -> Structure:
    """Directed chains under R1, and R2 = R1 minus one randomly chosen edge.

    The two reducts are associated structures in which the cut edge's
    endpoints are mates under R1 but not under R2.
    """
    rng = random.Random(seed)
    universe, edges = [], []
    for k in range(chains):
        vs = [f"c{k}_{i}" for i in range(length)]
        universe += vs
        edges += [(vs[i], vs[i + 1]) for i in range(length - 1)]
    cut = edges[rng.randrange(len(edges))] if edges else None
    return Structure(_sig(("R1", 2, 1), ("R2", 2, 1)), tuple(universe),
                     {"R1": edges, "R2": [e for e in edges if e != cut]})


GENERATORS = {
    "paths": paths,
    "matching": matching,
    "grid": grid,
    "eqrel": eqrel,
    "chain-cut": chain_cut,
}


# -- random structures ----------------------------------------------------------


def random_bounded_structure(rng: random.Random, n: int, relations=(("E", 2, 2),),
                             constants=(), density: float = 0.5, tries: int = 200) -> Structure:
    """A structure on n elements whose relations respect their declared bounds.

    Tuples are proposed at random and kept when no entry exceeds its bound.
    """
    universe = [f"v{i}" for i in range(n)]
    rels = {}
    for name, arity, bound in relations:
        deg = {e: 0 for e in universe}
        chosen = set()
        target = int(density * n * (bound or 2) / max(arity, 1)) + 1
        for _ in range(tries):
            if len(chosen) >= target:
                break
            t = tuple(rng.choice(universe) for _ in range(arity))
            if t in chosen:
                continue
            if bound is not None and any(deg[e] + 1 > bound for e in set(t)):
                continue
            chosen.add(t)
            for e in set(t):
                deg[e] += 1
        rels[name] = sorted(chosen)
    consts = {c: rng.choice(universe) for c in constants}
    sig = _sig(*relations, constants=constants)
    return Structure(sig, tuple(universe), rels, consts)


def random_component(rng: random.Random, size: int, relations=(("E", 2, 2),)) -> Structure:
    """A connected bounded-degree structure: a random spanning tree plus extras."""
    for _ in range(100):
        universe = [f"v{i}" for i in range(size)]
        rels = {name: set() for name, _, _ in relations}
        deg = {name: {e: 0 for e in universe} for name, _, _ in relations}
        linking = [r for r in relations if r[1] >= 2]
        ok = True
        for i in range(1, size):
            name, arity, bound = rng.choice(linking)
            candidates = [universe[j] for j in range(i)
                          if bound is None or deg[name][universe[j]] < bound]
            if not candidates:
                ok = False
                break
            t = [rng.choice(candidates) for _ in range(arity)]
            t[rng.randrange(arity)] = universe[i]
            t = tuple(t)
            if t in rels[name] or (bound is not None and
                                   any(deg[name][e] >= bound for e in set(t))):
                ok = False
                break
            rels[name].add(t)
            for e in set(t):
                deg[name][e] += 1
        if not ok:
            continue
        for name, arity, bound in relations:
            for _ in range(size):
                t = tuple(rng.choice(universe) for _ in range(arity))
                if t in rels[name] or (bound is not None and
                                       any(deg[name][e] >= bound for e in set(t))):
                    continue
                if rng.random() < 0.3:
                    rels[name].add(t)
                    for e in set(t):
                        deg[name][e] += 1
        return Structure(_sig(*relations), tuple(universe), rels)
    raise RuntimeError("could not build a connected component")


def random_catalog(rng: random.Random, relations=(("E", 2, 2), ("U", 1, 1)),
                   base_size: int = 2, max_template: int = 4, family: bool = False) -> StructureCatalog:
    """A catalog with a small base, one or two omega entries and optionally a family."""
    base = random_bounded_structure(rng, base_size, relations, density=0.4)
    base = Structure(base.signature, tuple(f"b{i}" for i in range(base_size)),
                     {k: [tuple(f"b{e[1:]}" for e in t) for t in v]
                      for k, v in base.relations.items()})
    entries = []
    for _ in range(rng.randint(1, 2)):
        t = random_component(rng, rng.randint(1, max_template), relations)
        entries.append(CatalogEntry(t, OMEGA))
    if rng.random() < 0.5:
        entries.append(CatalogEntry(random_component(rng, rng.randint(1, max_template),
                                                     relations), rng.randint(1, 2)))
    fam = ()
    if family:
        fam = tuple(path_like(n, relations) for n in range(2, 2 + rng.randint(3, 5)))
    return StructureCatalog(base, tuple(entries), fam, bool(fam))


def path_like(n, relations):
    """Path on n vertices along the first relation of arity >= 2.

    Consecutive vertices form a tuple, padded with the later vertex for
    higher arities, so each vertex meets at most two tuples.
    """
    name, arity, _ = next(r for r in relations if r[1] >= 2)
    vs = [f"v{i}" for i in range(n)]
    rels = {r[0]: [] for r in relations}
    rels[name] = [(vs[i],) + (vs[i + 1],) * (arity - 1) for i in range(n - 1)]
    return Structure(_sig(*relations), tuple(vs), rels)


# -- random formulas ------------------------------------------------------------


def random_formula(rng: random.Random, signature: Signature, free: Sequence[str],
                   depth: int, params: Sequence[str] = (), counting: bool = True,
                   _used=None) -> Formula:
    """A random formula whose free variables lie in `free`, quantifier depth <= depth."""
    used = _used if _used is not None else [0]
    choice = rng.random()
    if depth == 0 or choice < 0.3:
        return _random_literal(rng, signature, free, params)
    if choice < 0.55:
        parts = [random_formula(rng, signature, free, depth - 1, params, counting, used)
                 for _ in range(2)]
        return conj(*parts) if rng.random() < 0.5 else disj(*parts)
    used[0] += 1
    var = f"z{used[0]}"
    body = random_formula(rng, signature, list(free) + [var], depth - 1, params, counting, used)
    if var not in _mentioned(body):
        body = conj(_random_literal(rng, signature, list(free) + [var], params, must=var), body)
    kind = rng.random()
    if counting and kind < 0.2:
        op = rng.choice(["<=", "=", "<", ">="])
        return Count(op, rng.randint(0, 2), var, body)
    if kind < 0.6:
        return Exists(var, body)
    return Forall(var, body)


def _mentioned(phi):
    from macell.logic.syntax import free_vars
    return free_vars(phi)


def _random_literal(rng, signature, free, params, must=None):
    terms = [Var(v) for v in free] + [Param(p) for p in params]
    if not terms:
        return conj()
    rels = list(signature.relations)
    if rng.random() < 0.15 or not rels:
        a = Var(must) if must else rng.choice(terms)
        lit = Eq(a, rng.choice(terms))
    else:
        sym = rng.choice(rels)
        args = [rng.choice(terms) for _ in range(sym.arity)]
        if must:
            args[rng.randrange(sym.arity)] = Var(must)
        lit = Rel(sym.name, tuple(args))
    return Not(lit) if rng.random() < 0.35 else lit

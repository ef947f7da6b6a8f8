"""First-order formula AST with counting quantifiers.

Terms are `Var` or `Param` (an element identifier written `#id`). Counting
quantifiers carry an operator from COUNT_OPS and a bound r >= 0.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Param:
    element: str

    def __str__(self):
        return "#" + self.element


Term = Union[Var, Param]


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


COUNT_OPS = ("<=", "=", "<", ">=")


@dataclass(frozen=True)
class Count(Formula):
    """Counting quantifier: the number of `var` satisfying `body` is `op` r."""

    op: str
    bound: int
    var: str
    body: Formula

    def __post_init__(self):
        if self.op not in COUNT_OPS:
            raise ValueError(f"unknown counting operator {self.op!r}")
        if self.bound < 0:
            raise ValueError("counting bound must be non-negative")

    def holds(self, count: int) -> bool:
        r = self.bound
        if self.op == "<=":
            return count <= r
        if self.op == "=":
            return count == r
        if self.op == "<":
            return count < r
        return count >= r


TRUE = Const(True)
FALSE = Const(False)


def conj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif p == TRUE:
            continue
        elif p == FALSE:
            return FALSE
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        elif p == FALSE:
            continue
        elif p == TRUE:
            return TRUE
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(phi: Formula) -> Formula:
    if isinstance(phi, Not):
        return phi.body
    if isinstance(phi, Const):
        return Const(not phi.value)
    return Not(phi)


QUANTIFIERS = (Exists, Forall, Count)


def term_vars(terms) -> set[str]:
    return {t.name for t in terms if isinstance(t, Var)}


def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, Const):
        return frozenset()
    if isinstance(phi, Rel):
        return frozenset(term_vars(phi.args))
    if isinstance(phi, Eq):
        return frozenset(term_vars((phi.left, phi.right)))
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for p in phi.parts:
            out |= free_vars(p)
        return out
    if isinstance(phi, QUANTIFIERS):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def bound_vars(phi: Formula) -> set[str]:
    out = set()
    for node in walk(phi):
        if isinstance(node, QUANTIFIERS):
            out.add(node.var)
    return out


def params(phi: Formula) -> set[str]:
    out = set()
    for node in walk(phi):
        if isinstance(node, Rel):
            out |= {t.element for t in node.args if isinstance(t, Param)}
        elif isinstance(node, Eq):
            out |= {t.element for t in (node.left, node.right) if isinstance(t, Param)}
    return out


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not):
        yield from walk(phi.body)
    elif isinstance(phi, (And, Or)):
        for p in phi.parts:
            yield from walk(p)
    elif isinstance(phi, QUANTIFIERS):
        yield from walk(phi.body)


def is_quantifier_free(phi: Formula) -> bool:
    return not any(isinstance(n, QUANTIFIERS) for n in walk(phi))


def quantifier_depth(phi: Formula) -> int:
    if isinstance(phi, Not):
        return quantifier_depth(phi.body)
    if isinstance(phi, (And, Or)):
        return max((quantifier_depth(p) for p in phi.parts), default=0)
    if isinstance(phi, QUANTIFIERS):
        return 1 + quantifier_depth(phi.body)
    return 0


def is_atom(phi: Formula) -> bool:
    return isinstance(phi, (Rel, Eq))


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free variables by terms. Assumes no capture (bound names are fresh)."""

    def sub_term(t):
        if isinstance(t, Var) and t.name in mapping:
            return mapping[t.name]
        return t

    if isinstance(phi, Const):
        return phi
    if isinstance(phi, Rel):
        return Rel(phi.name, tuple(sub_term(t) for t in phi.args))
    if isinstance(phi, Eq):
        return Eq(sub_term(phi.left), sub_term(phi.right))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, mapping))
    if isinstance(phi, And):
        return And(tuple(substitute(p, mapping) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(substitute(p, mapping) for p in phi.parts))
    if isinstance(phi, QUANTIFIERS):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        body = substitute(phi.body, inner)
        if isinstance(phi, Count):
            return Count(phi.op, phi.bound, phi.var, body)
        return type(phi)(phi.var, body)
    raise TypeError(f"not a formula: {phi!r}")


class FreshNames:
    """Generator of variable names avoiding a set of used names."""

    def __init__(self, used=()):
        self.used = set(used)

    def fresh(self, base: str) -> str:
        stem = re.sub(r"_\d+$", "", base) or "v"
        if stem not in self.used:
            self.used.add(stem)
            return stem
        for i in itertools.count(1):
            name = f"{stem}_{i}"
            if name not in self.used:
                self.used.add(name)
                return name


def rename_apart(phi: Formula, names: FreshNames | None = None) -> Formula:
    """Rename bound variables so each quantifier binds a distinct, non-free name."""
    if names is None:
        names = FreshNames(free_vars(phi))

    def go(f, env):
        if isinstance(f, (Rel, Eq, Const)):
            return substitute(f, env) if env else f
        if isinstance(f, Not):
            return Not(go(f.body, env))
        if isinstance(f, And):
            return And(tuple(go(p, env) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(go(p, env) for p in f.parts))
        new = names.fresh(f.var)
        body = go(f.body, {**env, f.var: Var(new)})
        if isinstance(f, Count):
            return Count(f.op, f.bound, new, body)
        return type(f)(new, body)

    return go(phi, {})


# -- printing -----------------------------------------------------------------

_PREC = {Or: 1, And: 2}


def to_text(phi: Formula) -> str:
    """Render in the input grammar; re-parsing yields an equal AST."""

    def wrap(child, parent_prec):
        text = go(child)
        prec = _PREC.get(type(child), 3)
        return f"({text})" if prec <= parent_prec and prec < 3 else text

    def go(f):
        if isinstance(f, Const):
            return "true" if f.value else "false"
        if isinstance(f, Rel):
            return f"{f.name}({','.join(map(str, f.args))})"
        if isinstance(f, Eq):
            return f"{f.left}={f.right}"
        if isinstance(f, Not):
            return "!" + wrap(f.body, 2)
        if isinstance(f, And):
            return " & ".join(wrap(p, 2) for p in f.parts)
        if isinstance(f, Or):
            return " | ".join(wrap(p, 1) for p in f.parts)
        if isinstance(f, Exists):
            return f"E{f.var}." + wrap(f.body, 2)
        if isinstance(f, Forall):
            return f"A{f.var}." + wrap(f.body, 2)
        if isinstance(f, Count):
            return f"E[{f.op}{f.bound}]{f.var}." + wrap(f.body, 2)
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)

"""Finite-model semantics.

`evaluate` is the plain recursive Tarskian evaluator, one assignment at a
time. `truth_table` computes the full satisfaction relation of a formula as
a boolean array with one axis per variable; `equiv_on` compares two tables.
The two routes share no code beyond the AST and are cross-checked in tests.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from macell.logic.syntax import (
    And, Const, Count, Eq, Exists, Forall, Formula, Not, Or, Param, Rel, Var, free_vars,
)


class EvaluationError(ValueError):
    pass


def _term_value(m, t, env):
    if isinstance(t, Param):
        if t.element not in m.universe:
            raise EvaluationError(f"parameter #{t.element} is not an element of the structure")
        return t.element
    try:
        return env[t.name]
    except KeyError:
        raise EvaluationError(f"unbound free variable {t.name!r}") from None


def evaluate(m, phi: Formula, env: Mapping[str, str] | None = None) -> bool:
    """Truth of `phi` in `m` under `env` (free variable -> element)."""
    env = dict(env or {})
    missing = free_vars(phi) - set(env)
    if missing:
        raise EvaluationError(f"unbound free variables {sorted(missing)}")
    return _eval(m, phi, env)


def _eval(m, phi, env):
    if isinstance(phi, Const):
        return phi.value
    if isinstance(phi, Rel):
        t = tuple(_term_value(m, a, env) for a in phi.args)
        return t in m.relations[phi.name]
    if isinstance(phi, Eq):
        return _term_value(m, phi.left, env) == _term_value(m, phi.right, env)
    if isinstance(phi, Not):
        return not _eval(m, phi.body, env)
    if isinstance(phi, And):
        return all(_eval(m, p, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_eval(m, p, env) for p in phi.parts)
    if isinstance(phi, Exists):
        return any(_eval(m, phi.body, {**env, phi.var: e}) for e in m.universe)
    if isinstance(phi, Forall):
        return all(_eval(m, phi.body, {**env, phi.var: e}) for e in m.universe)
    if isinstance(phi, Count):
        n = sum(1 for e in m.universe if _eval(m, phi.body, {**env, phi.var: e}))
        return phi.holds(n)
    raise TypeError(f"not a formula: {phi!r}")


def satisfying_tuples(m, phi: Formula, variables: Sequence[str]):
    """All tuples over `variables` satisfying `phi`, in universe order."""
    missing = free_vars(phi) - set(variables)
    if missing:
        raise EvaluationError(f"unbound free variables {sorted(missing)}")
    table = truth_table(m, phi, variables)
    universe = m.universe
    return [tuple(universe[i] for i in idx) for idx in zip(*np.nonzero(table))]


# -- truth tables ---------------------------------------------------------------


class _Table:
    """Boolean array whose axes are labelled by variable names."""

    __slots__ = ("vars", "data")

    def __init__(self, variables, data):
        self.vars = tuple(variables)
        self.data = data

    def expand(self, variables, n):
        """View over `variables` (a superset of self.vars) via broadcasting."""
        if self.vars == tuple(variables):
            return self.data
        order = [self.vars.index(v) for v in variables if v in self.vars]
        data = np.transpose(self.data, order) if order else self.data
        shape = [n if v in self.vars else 1 for v in variables]
        return data.reshape(shape)


def _merge_vars(tables):
    out = []
    for t in tables:
        for v in t.vars:
            if v not in out:
                out.append(v)
    return tuple(sorted(out))


class _Compiler:
    def __init__(self, m):
        self.m = m
        self.n = len(m.universe)
        self.index = {e: i for i, e in enumerate(m.universe)}
        self.cache = {}

    def table(self, phi) -> _Table:
        key = phi
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = self._table(phi)
        self.cache[key] = out
        return out

    def _const_index(self, t):
        if t.element not in self.index:
            raise EvaluationError(f"parameter #{t.element} is not an element of the structure")
        return self.index[t.element]

    def _table(self, phi):
        n = self.n
        if isinstance(phi, Const):
            return _Table((), np.array(phi.value))
        if isinstance(phi, Rel):
            variables = tuple(sorted({a.name for a in phi.args if isinstance(a, Var)}))
            pos = {v: k for k, v in enumerate(variables)}
            data = np.zeros((n,) * len(variables), dtype=bool)
            for t in self.m.relations[phi.name]:
                slot = [None] * len(variables)
                ok = True
                for a, e in zip(phi.args, t):
                    i = self.index[e]
                    if isinstance(a, Param):
                        if self._const_index(a) != i:
                            ok = False
                            break
                    else:
                        k = pos[a.name]
                        if slot[k] is None:
                            slot[k] = i
                        elif slot[k] != i:
                            ok = False
                            break
                if ok:
                    data[tuple(slot)] = True
            return _Table(variables, data)
        if isinstance(phi, Eq):
            left, right = phi.left, phi.right
            if isinstance(left, Param) and isinstance(right, Param):
                return _Table((), np.array(self._const_index(left) == self._const_index(right)))
            if isinstance(left, Param):
                left, right = right, left
            if isinstance(right, Param):
                data = np.zeros(n, dtype=bool)
                data[self._const_index(right)] = True
                return _Table((left.name,), data)
            if left.name == right.name:
                return _Table((left.name,), np.ones(n, dtype=bool))
            variables = tuple(sorted((left.name, right.name)))
            return _Table(variables, np.eye(n, dtype=bool))
        if isinstance(phi, Not):
            inner = self.table(phi.body)
            return _Table(inner.vars, ~inner.data)
        if isinstance(phi, (And, Or)):
            parts = [self.table(p) for p in phi.parts]
            variables = _merge_vars(parts)
            op = np.logical_and if isinstance(phi, And) else np.logical_or
            acc = None
            for p in parts:
                view = p.expand(variables, n)
                acc = view if acc is None else op(acc, view)
            shape = (n,) * len(variables)
            return _Table(variables, np.broadcast_to(acc, shape).copy())
        if isinstance(phi, (Exists, Forall, Count)):
            inner = self.table(phi.body)
            if phi.var not in inner.vars:
                # vacuous binding: the body does not depend on the variable
                if isinstance(phi, Exists):
                    data = inner.data if n else np.zeros_like(inner.data)
                elif isinstance(phi, Forall):
                    data = inner.data if n else np.ones_like(inner.data)
                else:
                    counts = np.where(inner.data, n, 0)
                    data = _count_holds(phi, counts)
                return _Table(inner.vars, data)
            axis = inner.vars.index(phi.var)
            rest = inner.vars[:axis] + inner.vars[axis + 1:]
            if isinstance(phi, Exists):
                data = inner.data.any(axis=axis)
            elif isinstance(phi, Forall):
                data = inner.data.all(axis=axis)
            else:
                data = _count_holds(phi, inner.data.sum(axis=axis))
            return _Table(rest, data)
        raise TypeError(f"not a formula: {phi!r}")


def _count_holds(phi: Count, counts):
    r = phi.bound
    if phi.op == "<=":
        return counts <= r
    if phi.op == "=":
        return counts == r
    if phi.op == "<":
        return counts < r
    return counts >= r


def truth_table(m, phi: Formula, variables: Sequence[str] | None = None) -> np.ndarray:
    """Satisfaction array of `phi` with axes ordered as `variables`."""
    fv = free_vars(phi)
    if variables is None:
        variables = sorted(fv)
    variables = tuple(variables)
    if not fv <= set(variables):
        raise EvaluationError(f"unbound free variables {sorted(fv - set(variables))}")
    table = _Compiler(m).table(phi)
    n = len(m.universe)
    view = table.expand(variables, n)
    return np.broadcast_to(view, (n,) * len(variables))


def equiv_on(m, phi: Formula, psi: Formula, variables: Sequence[str] | None = None) -> bool:
    """Exhaustive equivalence of two formulas on `m`.

    Without `variables` the free-variable sets must coincide; with it, both
    formulas are compared as relations over `variables` (a rewrite may drop
    variables it no longer depends on).
    """
    if variables is None:
        if free_vars(phi) != free_vars(psi):
            raise EvaluationError(
                f"free variables differ: {sorted(free_vars(phi))} vs {sorted(free_vars(psi))}"
            )
        variables = sorted(free_vars(phi))
    return bool(np.array_equal(truth_table(m, phi, variables), truth_table(m, psi, variables)))


def counterexample(m, phi: Formula, psi: Formula, variables: Sequence[str] | None = None):
    """First assignment where the two formulas disagree, or None."""
    if variables is None:
        variables = sorted(free_vars(phi) | free_vars(psi))
    a = truth_table(m, phi, variables)
    b = truth_table(m, psi, variables)
    diff = np.argwhere(a != b)
    if len(diff) == 0:
        return None
    return {v: m.universe[i] for v, i in zip(variables, diff[0])}


def assignments(m, variables: Sequence[str]):
    for values in itertools.product(m.universe, repeat=len(variables)):
        yield dict(zip(variables, values))

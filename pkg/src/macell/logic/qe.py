"""Rewriting first-order formulas into boolean combinations of E-members.

The recursion eliminates one quantifier at a time, innermost first. For
`Ex.phi` the (already rewritten) body is put in disjunctive normal form over
E-literals and the quantifier is distributed over the disjuncts. In each
disjunct, literals without x move outside; a positive equation x = t is
resolved by substitution; negated literals whose x-count is bounded given
the other variables become the "cofinite" conjuncts beta_j; the rest form
alpha*. Then:

* alpha* empty: true once the structure has more than sum K_j elements;
* alpha* bounds x (r* witnesses at most): exact inclusion-exclusion form
  OR_{r<=r*} (E[=r]x.alpha* & E[<r]x.(alpha* & OR_j beta_j));
* alpha* unary in x: decided on the catalog. If some omega-entry template
  (or the largest member of an unbounded family) satisfies alpha*, the set
  is treated as infinite and the disjunct is true beyond a computed budget;
  otherwise its size c is fixed and r* = c is exact.

Realizations of a catalog grow by prefix, so every size requirement is
monotone in the budget and the report gives one threshold above which the
rewrite is equivalent to its input. A requirement that no realization meets
(a finite family too short for it) raises RewriteError.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from macell.logic.bounds import bounds_of, count_bound, is_estar
from macell.logic.normal import dnf_terms, nnf
from macell.logic.syntax import (
    FALSE, TRUE, And, Count, Eq, Exists, Forall, Formula, Not, Or, Rel, Var,
    conj, disj, free_vars, is_quantifier_free, neg, rename_apart, substitute, to_text, walk,
)


class RewriteError(ValueError):
    pass


@dataclass
class ValidityReport:
    """Budget threshold above which the rewrite is equivalent on realizations."""

    threshold: int = 0
    bound_sum: int = 0
    steps: list = field(default_factory=list)

    def to_dict(self):
        return {"threshold": self.threshold, "bound_sum": self.bound_sum,
                "steps": list(self.steps)}


class _CatalogOracle:
    """Size and satisfier questions about the realizations of a catalog."""

    def __init__(self, cat):
        from macell.cellular import OMEGA, assemble

        self.cat = cat
        self.omega = [i for i, e in enumerate(cat.entries) if e.multiplicity == OMEGA]
        probe_parts = [(f"t{i}_0_", e.template) for i, e in enumerate(cat.entries)]
        probe_parts += [(f"f{k}_", t) for k, t in enumerate(cat.family)]
        self.probe = assemble(cat, probe_parts)
        self.parts = probe_parts
        self._cache = {}

    @property
    def infinite(self) -> bool:
        return bool(self.omega) or bool(self.cat.family and self.cat.unbounded)

    def total_size(self) -> int:
        from macell.cellular import OMEGA

        n = len(self.cat.base)
        n += sum(len(e.template) * e.multiplicity for e in self.cat.entries
                 if e.multiplicity != OMEGA)
        return n + sum(len(t) for t in self.cat.family)

    def _weights(self, alpha):
        """Satisfiers of alpha(x) in the base and in one copy of each template."""
        key = to_text(alpha)
        if key not in self._cache:
            from macell.logic.semantics import truth_table

            var = sorted(free_vars(alpha))
            table = truth_table(self.probe, alpha, var) if var else None
            hits = {}
            for i, e in enumerate(self.probe.universe):
                ok = bool(table[i]) if var else True
                if ok:
                    prefix = self._origin(e)
                    hits[prefix] = hits.get(prefix, 0) + 1
            self._cache[key] = hits
        return self._cache[key]

    def _origin(self, element):
        for prefix, _ in self.parts:
            if element.startswith(prefix):
                return prefix
        return None  # base

    def _template_weight(self, hits, prefix):
        if prefix.startswith("t"):
            i = int(prefix[1:].split("_")[0])
            return hits.get(f"t{i}_0_", 0)
        return hits.get(prefix, 0)

    def count_is_infinite(self, alpha) -> bool:
        hits = self._weights(alpha)
        if any(hits.get(f"t{i}_0_", 0) for i in self.omega):
            return True
        # an unbounded family stands for components of every size; its
        # largest listed member is taken as the pattern of the rest
        if self.cat.family and self.cat.unbounded:
            return bool(hits.get(f"f{len(self.cat.family) - 1}_", 0))
        return False

    def finite_count(self, alpha) -> int:
        from macell.cellular import OMEGA

        hits = self._weights(alpha)
        c = hits.get(None, 0)
        for i, e in enumerate(self.cat.entries):
            if e.multiplicity != OMEGA:
                c += e.multiplicity * hits.get(f"t{i}_0_", 0)
        for k in range(len(self.cat.family)):
            c += hits.get(f"f{k}_", 0)
        return c

    def budget_for(self, alpha, need: int) -> int | None:
        """Least budget whose realization has more than `need` satisfiers of alpha.

        alpha = None counts every element.
        """
        from macell.cellular import _stream

        hits = self._weights(alpha) if alpha is not None else None

        def weight(prefix, template):
            if hits is None:
                return len(template)
            return self._template_weight(hits, prefix)

        used = len(self.cat.base)
        total = len(self.cat.base) if hits is None else hits.get(None, 0)
        if total > need:
            return used
        for steps, (prefix, template) in enumerate(_stream(self.cat)):
            used += len(template)
            total += weight(prefix, template)
            if total > need:
                return used
            if steps > 100000:
                break
        return None


def _normalize_count(phi: Count) -> Formula:
    """Express a counting quantifier through E[>=r] only."""
    r = phi.bound

    def ge(k):
        return TRUE if k <= 0 else Count(">=", k, phi.var, phi.body)

    if phi.op == ">=":
        return ge(r)
    if phi.op == "<":
        return neg(ge(r))
    if phi.op == "<=":
        return neg(ge(r + 1))
    return conj(ge(r), neg(ge(r + 1)))


def _literal_normal(phi: Formula) -> Formula:
    """Rewrite top-level counting literals into E[>=r] form before DNF."""
    if isinstance(phi, Count):
        return _normalize_count(phi)
    if isinstance(phi, Not):
        return neg(_literal_normal(phi.body))
    if isinstance(phi, And):
        return conj(*(_literal_normal(p) for p in phi.parts))
    if isinstance(phi, Or):
        return disj(*(_literal_normal(p) for p in phi.parts))
    return phi


class _Rewriter:
    def __init__(self, cat, bounds):
        self.cat = cat
        self.bounds = bounds
        self.oracle = _CatalogOracle(cat) if cat is not None else None
        self.report = ValidityReport()
        self.requirements = []

    # -- bookkeeping -----------------------------------------------------------

    def _need_oracle(self, what):
        if self.oracle is None:
            raise RewriteError(f"a catalog is required to decide {what}")
        return self.oracle

    def _require(self, alpha, need, what):
        oracle = self._need_oracle(what)
        budget = oracle.budget_for(alpha, need)
        if budget is None:
            raise RewriteError(f"no realization satisfies the size condition for {what}")
        self.requirements.append(budget)

    # -- recursion -------------------------------------------------------------

    def rewrite(self, phi: Formula) -> Formula:
        if is_quantifier_free(phi):
            return phi
        if isinstance(phi, Not):
            return neg(self.rewrite(phi.body))
        if isinstance(phi, And):
            return conj(*(self.rewrite(p) for p in phi.parts))
        if isinstance(phi, Or):
            return disj(*(self.rewrite(p) for p in phi.parts))
        if isinstance(phi, Exists):
            return self.eliminate(phi.var, self.rewrite(phi.body))
        if isinstance(phi, Forall):
            return neg(self.eliminate(phi.var, self.rewrite(Not(phi.body))))
        if isinstance(phi, Count):
            norm = _normalize_count(phi)
            if norm != phi:
                return self.rewrite(norm)
            body = self.rewrite(phi.body)
            if phi.bound == 1:
                return self.eliminate(phi.var, body)
            return self.eliminate_count(phi.var, phi.bound, body)
        raise TypeError(f"not a formula: {phi!r}")

    def eliminate(self, x: str, psi: Formula) -> Formula:
        terms = dnf_terms(_literal_normal(psi))
        return disj(*(self.eliminate_term(x, term) for term in terms))

    def _bound(self, phi, x):
        return count_bound(phi, {x}, free_vars(phi) - {x}, self.bounds)

    def eliminate_term(self, x: str, lits) -> Formula:
        outside = [l for l in lits if x not in free_vars(l)]
        inside = [l for l in lits if x in free_vars(l)]
        for l in inside:
            if isinstance(l, Eq):
                if l.left == l.right:
                    rest = [o for o in inside if o is not l]
                    return self.eliminate_term(x, tuple(outside) + tuple(rest))
                t = l.right if l.left == Var(x) else l.left
                rest = [o for o in inside if o is not l]
                return conj(*outside, *(substitute(o, {x: t}) for o in rest))
            if isinstance(l, Not) and isinstance(l.body, Eq) and l.body.left == l.body.right:
                return FALSE
        positives = [l for l in inside if not isinstance(l, Not)]
        betas, filters = [], []
        for l in inside:
            if isinstance(l, Not):
                k = self._bound(l.body, x)
                if k is None:
                    filters.append(l)
                else:
                    betas.append((l.body, k))
        alpha = positives + filters
        out = conj(*outside)
        if not alpha:
            return conj(out, self.case_one(x, betas))
        alpha_f = conj(*alpha)
        r_star = self._bound(alpha_f, x)
        if r_star is not None:
            self.report.steps.append("2b")
            return conj(out, self.inclusion_exclusion(x, alpha_f, betas, r_star))
        if free_vars(alpha_f) == {x}:
            return conj(out, self.unary(x, alpha_f, betas))
        raise RewriteError(
            f"cannot eliminate {x} from {to_text(conj(*inside))}: "
            "the positive part neither bounds the variable nor is unary in it"
        )

    def case_one(self, x, betas):
        total = sum(k for _, k in betas)
        oracle = self._need_oracle("the size of the structure")
        self.report.steps.append("1")
        if oracle.infinite:
            self.report.bound_sum += total
            self._require(None, total, "case 1")
            return TRUE
        n = oracle.total_size()
        self.requirements.append(n)
        if not betas:
            return TRUE if n > 0 else FALSE
        return Count("<", n, x, disj(*(b for b, _ in betas)))

    def inclusion_exclusion(self, x, alpha, betas, r_star):
        if not betas:
            node = Exists(x, alpha)
            if is_quantifier_free(alpha) and is_estar(node, self.bounds):
                return node
            return Count(">=", 1, x, alpha)
        either = disj(*(b for b, _ in betas))
        return disj(*(
            conj(Count("=", r, x, alpha), Count("<", r, x, conj(alpha, either)))
            for r in range(1, r_star + 1)
        ))

    def unary(self, x, alpha, betas):
        oracle = self._need_oracle(f"whether {to_text(alpha)} has infinitely many solutions")
        if oracle.count_is_infinite(alpha):
            self.report.steps.append("2a")
            total = sum(k for _, k in betas)
            self.report.bound_sum += total
            self._require(alpha, total, "subcase 2a")
            return TRUE
        c = oracle.finite_count(alpha)
        self.report.steps.append("2b")
        if c == 0:
            return FALSE
        return self.inclusion_exclusion(x, alpha, betas, c)

    # -- counting quantifiers --------------------------------------------------

    def eliminate_count(self, x: str, r: int, psi: Formula) -> Formula:
        """E[>=r]x.psi for r >= 2 with psi already rewritten."""
        terms = dnf_terms(_literal_normal(psi))
        out_lits = sorted({_atom_of(l) for t in terms for l in t if x not in free_vars(l)},
                          key=to_text)
        if not out_lits:
            return self._count_inside(x, r, psi)
        if len(out_lits) > 6:
            raise RewriteError("too many outside literals under a counting quantifier")
        cases = []
        for values in itertools.product((True, False), repeat=len(out_lits)):
            sigma = dict(zip(out_lits, values))
            kept = []
            for t in terms:
                lits = []
                ok = True
                for l in t:
                    if x in free_vars(l):
                        lits.append(l)
                    elif sigma[_atom_of(l)] != (not isinstance(l, Not)):
                        ok = False
                        break
                if ok:
                    kept.append(conj(*lits))
            guard = conj(*(a if v else Not(a) for a, v in sigma.items()))
            cases.append(conj(guard, self._count_inside(x, r, disj(*kept))))
        return disj(*cases)

    def _count_inside(self, x, r, psi):
        if psi == FALSE:
            return FALSE
        if self._bound(psi, x) is not None or free_vars(psi) <= {x}:
            return Count(">=", r, x, psi)
        chi = nnf(Not(psi))
        k = self._bound(chi, x)
        if k is None:
            return self._count_split(x, r, psi)
        oracle = self._need_oracle("the size of the structure")
        self.report.steps.append("count-complement")
        if oracle.infinite:
            self.report.bound_sum += k + r - 1
            self._require(None, k + r - 1, "counting complement")
            return TRUE
        n = oracle.total_size()
        self.requirements.append(n)
        if n - r < 0:
            return FALSE
        return Count("<=", n - r, x, chi)


    def _count_split(self, x, r, psi):
        """Count psi as #(psi & G) + #psi0 - #(psi0 & G).

        G is the disjunction of the atoms of psi that bound x; psi0 is psi
        with those atoms set to false, which leaves a formula in x alone.
        """
        terms = dnf_terms(psi)
        atoms = sorted({_atom_of(l) for t in terms for l in t}, key=to_text)
        bounded = [a for a in atoms if self._bound(a, x) is not None]
        rest = [a for a in atoms if a not in bounded]
        if not bounded:
            # the normal form dropped every atom that mentioned other variables
            return Count(">=", r, x, disj(*(conj(*t) for t in terms)))
        if not bounded or any(not free_vars(a) <= {x} for a in rest):
            raise RewriteError(f"cannot bound E[>={r}]{x}.{to_text(psi)}")
        g = disj(*bounded)
        k_g = self._bound(g, x)
        kept = []
        for t in terms:
            if any(l in bounded for l in t):
                continue
            kept.append(conj(*(l for l in t if _atom_of(l) not in bounded)))
        psi0 = disj(*kept)
        if psi0 == FALSE:
            return Count(">=", r, x, conj(psi, g))
        oracle = self._need_oracle(f"the number of solutions of {to_text(psi0)}")
        with_g = conj(psi, g)
        k_a = self._bound(with_g, x)
        both = conj(psi0, g)
        k_c = self._bound(both, x)
        self.report.steps.append("count-split")
        if oracle.count_is_infinite(psi0):
            self.report.bound_sum += k_g
            self._require(psi0, r + k_g - 1, "counting split")
            return TRUE
        c0 = oracle.finite_count(psi0)
        out = []
        for k in range(c0 + 1):
            pairs = [conj(Count("=", a, x, with_g), Count("=", c, x, both))
                     for a in range(k_a + 1) for c in range(k_c + 1) if a + k - c >= r]
            if pairs:
                out.append(conj(Count("=", k, x, psi0), disj(*pairs)))
        return disj(*out)


def _atom_of(lit):
    return lit.body if isinstance(lit, Not) else lit


def _check_bounds(phi, bounds):
    for node in walk(phi):
        if isinstance(node, Rel):
            if node.name not in bounds:
                raise RewriteError(f"unknown relation {node.name}")
            if bounds[node.name] is None:
                raise RewriteError(f"relation {node.name} has no degree bound")


def qe_rewrite(phi: Formula, cat=None, bounds=None) -> tuple[Formula, ValidityReport]:
    """Rewrite `phi` into a boolean combination of E-members.

    `cat` is a StructureCatalog; it supplies the degree bounds and decides the
    semantic side conditions. Without a catalog only rewrites that need no
    semantic decision succeed (`bounds` must then be given).
    """
    if bounds is None:
        if cat is None:
            raise RewriteError("need a catalog or explicit degree bounds")
        bounds = bounds_of(cat.signature)
    else:
        bounds = bounds_of(bounds)
    _check_bounds(phi, bounds)
    rw = _Rewriter(cat, bounds)
    psi = rw.rewrite(rename_apart(phi))
    if not is_estar(psi, bounds):
        raise RewriteError(f"rewrite left the E* fragment: {to_text(psi)}")
    report = rw.report
    base = len(cat.base) if cat is not None else 0
    floor = report.bound_sum + 1 if "1" in report.steps or "2a" in report.steps else 0
    report.threshold = max([base, floor, *rw.requirements])
    return psi, report

"""Formula language: syntax, parsing, semantics, normal forms and rewriting."""

from macell.logic.syntax import (
    FALSE, TRUE, And, Const, Count, Eq, Exists, Forall, Formula, Not, Or, Param, Rel, Var,
    bound_vars, conj, disj, free_vars, is_quantifier_free, neg, params, quantifier_depth,
    rename_apart, substitute, to_text,
)
from macell.logic.parser import FormulaSyntaxError, parse
from macell.logic.semantics import (
    EvaluationError, counterexample, equiv_on, evaluate, satisfying_tuples, truth_table,
)
from macell.logic.normal import NotQuantifierFree, dnf_terms, nnf, to_dnf
from macell.logic.bounds import (
    ShapeTag, count_bound, degree_bound, in_estar, is_estar, is_emember, is_linked, shape_of,
)
from macell.logic.qe import RewriteError, ValidityReport, qe_rewrite

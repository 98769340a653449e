"""Type-soundness certification for small-step typed language definitions.

A language arrives as a logic program over four judgments (typeOf, step,
value, error) plus evaluation-context directives.  The checker classifies
every operator's role from its typing rule, validates the reduction rules
against those roles, derives the error-propagation discipline, and proves
per-rule type preservation symbolically.  A certified language comes with a
machine-checked guarantee that well-typed closed terms never get stuck and
never change type while they run; a rejected one comes with diagnostics that
point at the rule and the repair.
"""

from .classifier import classify
from .interp import (
    elaborate,
    evaluate,
    fuzz_soundness,
    generate_well_typed,
    typeof_closed,
)
from .ir import Diagnostic, TypedLanguage
from .parser import load_errctx, load_language, parse_expr
from .preservation import check_preservation, entails
from .progress import run_progress

__all__ = [
    "Diagnostic",
    "TypedLanguage",
    "check_preservation",
    "classify",
    "elaborate",
    "entails",
    "evaluate",
    "fuzz_soundness",
    "generate_well_typed",
    "load_errctx",
    "load_language",
    "parse_expr",
    "run_progress",
    "typeof_closed",
]

__version__ = "0.1.0"

"""Deterministic top-down tree transducers with regular look-ahead."""
from .trees import (
    Call, DtopError, EmptySet, LaLeaf, NotAPrefix, ParseError, RankedAlphabet, Tree, Var,
    decompose, lca, lcp, lcp_all, parse_term, substitute,
)
from .transducer import (
    UNDEFINED, Dtop, LaAutomaton, MissingRule, Undefined, apply, apply_state, evaluate,
    la_annotate, trim, validate,
)
from .syntax import format_dtop, load, parse_dtop

__all__ = [
    "Call", "DtopError", "EmptySet", "LaLeaf", "NotAPrefix", "ParseError", "RankedAlphabet",
    "Tree", "Var", "decompose", "lca", "lcp", "lcp_all", "parse_term", "substitute",
    "UNDEFINED", "Dtop", "LaAutomaton", "MissingRule", "Undefined", "apply", "apply_state",
    "evaluate", "la_annotate", "trim", "validate", "format_dtop", "load", "parse_dtop",
]
__version__ = "0.1.0"

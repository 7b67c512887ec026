"""Identity catalog: expression language, data model, parser, built-in corpus."""

from .expressions import (
    Bin,
    Call,
    Expr,
    IntToken,
    Neg,
    Num,
    Reduce,
    Sym,
    eval_expr,
    free_symbols,
    parse_expr,
    print_expr,
)
from .model import (
    ALTERNATING_FAMILIES,
    FAMILIES,
    FAMILY_PARITY,
    FAMILY_PERIOD,
    CatalogFile,
    ChainFactor,
    Compare,
    CyclicTerm,
    IdentitySpec,
    LinearShift,
    Pred,
    TermFactor,
    check_family_parity,
    constraints_hold,
    term_function_counts,
    term_parity,
)
from .grid import default_p_values, iter_param_assignments
from .parser import parse_catalog, parse_term_text, print_catalog, print_entry
from .corpus import builtin_corpus, corpus_sha256, corpus_text

__all__ = [
    "Bin", "Call", "Expr", "IntToken", "Neg", "Num", "Reduce", "Sym",
    "eval_expr", "free_symbols", "parse_expr", "print_expr",
    "ALTERNATING_FAMILIES", "FAMILIES", "FAMILY_PARITY", "FAMILY_PERIOD",
    "CatalogFile", "ChainFactor", "Compare", "CyclicTerm", "IdentitySpec",
    "LinearShift", "Pred", "TermFactor", "check_family_parity",
    "constraints_hold", "term_function_counts", "term_parity",
    "default_p_values", "iter_param_assignments",
    "parse_catalog", "parse_term_text", "print_catalog", "print_entry",
    "builtin_corpus", "corpus_sha256", "corpus_text",
]

"""Python access to the umlbench C++ core."""

from ._core import (
    ConfigError,
    DegenerateInput,
    DegenerateMargins,
    EmptyInputError,
    Error,
    IoError,
    ParseError,
    bootstrap_ci,
    canonicalize,
    chi2_independence,
    chi2_survival,
    cliffs_delta,
    compute_k,
    cramers_v,
    dunn_posthoc,
    holm_adjust,
    kruskal_wallis,
    levenshtein,
    levenshtein_diversity,
    method_quantity,
    normalize_name,
    parse,
    parse_with_issues,
    run_pipeline,
    validate,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Entity alignment by non-axiomatic similarity inference."""

from ._nala import (
    ConfigError,
    DomainError,
    LoadError,
    TruthValue,
    align,
    analogy,
    conditional_deduction,
    config_keys,
    deduction,
    evaluate,
    induction,
    match,
    probabilistic_revision,
    revision,
    scale_evidence,
    type1_truth,
    type3_truth,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "LoadError",
    "TruthValue",
    "align",
    "analogy",
    "conditional_deduction",
    "config_keys",
    "deduction",
    "evaluate",
    "induction",
    "match",
    "probabilistic_revision",
    "revision",
    "scale_evidence",
    "type1_truth",
    "type3_truth",
]

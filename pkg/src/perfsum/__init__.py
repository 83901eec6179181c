"""Coherent summarization of two-class performance indicators over several videos."""

from perfsum.indicators import (
    ConfusionCounts,
    Derived,
    NormalizedConfusion,
    Outcome,
    Probabilistic,
    confusion_from_roc,
    indicator_value,
    normalize,
    parse_indicator,
    unconditional_value,
)
from perfsum.spaces import PrPoint, RocPoint, min_achievable_precision, pr_to_roc, roc_to_pr
from perfsum.summarizer import (
    CategoryHierarchical,
    Explicit,
    SizeProportional,
    SourceRecord,
    SourceSet,
    Summary,
    Uniform,
    make_weights,
    rank_algorithms,
    summarize,
    summarize_conditional,
    summarize_legacy_mean,
)

__all__ = [
    "CategoryHierarchical",
    "ConfusionCounts",
    "Derived",
    "Explicit",
    "NormalizedConfusion",
    "Outcome",
    "PrPoint",
    "Probabilistic",
    "RocPoint",
    "SizeProportional",
    "SourceRecord",
    "SourceSet",
    "Summary",
    "Uniform",
    "confusion_from_roc",
    "indicator_value",
    "make_weights",
    "min_achievable_precision",
    "normalize",
    "parse_indicator",
    "pr_to_roc",
    "rank_algorithms",
    "roc_to_pr",
    "summarize",
    "summarize_conditional",
    "summarize_legacy_mean",
    "unconditional_value",
]

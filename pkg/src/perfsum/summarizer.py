"""Summarizing per-source indicators over a weighted set of sources.

A source (a video) is drawn with probability ``P(V=v)`` and a pixel is then
drawn uniformly inside it. The four outcome probabilities of that two-stage
draw are the weighted means of the per-source outcome probabilities, and every
summarized indicator is derived from them, so relationships such as
``F = 2PR / (P + R)`` keep holding after summarization.

The legacy procedure (per-indicator arithmetic mean inside each category, then
across categories) is kept for comparison.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field

from perfsum.errors import (
    AllZeroWeightsError,
    DataError,
    EmptyInputError,
    MissingCategoryError,
    MissingSizeError,
    NoDefinedValuesError,
    UndefinedIndicatorError,
    WeightMismatchError,
    WeightNormalizationWarning,
)
from perfsum.indicators import (
    OUTCOMES,
    SUM_TOLERANCE,
    IndicatorSpec,
    NormalizedConfusion,
    Probabilistic,
    indicator_value,
    unconditional_value,
)


@dataclass(frozen=True)
class SourceRecord:
    video_id: str
    confusion: NormalizedConfusion
    category: str = ""
    size: int | None = None

    def __post_init__(self):
        if self.size is not None and self.size < 1:
            raise DataError(f"video {self.video_id!r}: size must be >= 1, got {self.size}")


class SourceSet(Sequence):
    """Non-empty, ordered collection of sources with unique ids."""

    def __init__(self, records: Iterable[SourceRecord]):
        self._records = tuple(records)
        if not self._records:
            raise EmptyInputError("a source set needs at least one source")
        seen = set()
        for r in self._records:
            if r.video_id in seen:
                raise DataError(f"duplicate video id {r.video_id!r}")
            seen.add(r.video_id)

    def __getitem__(self, i):
        return self._records[i]

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[SourceRecord]:
        return iter(self._records)

    @property
    def ids(self) -> list[str]:
        return [r.video_id for r in self._records]

    def __repr__(self) -> str:
        return f"SourceSet({list(self._records)!r})"


# --------------------------------------------------------------------------
# Weight schemes


@dataclass(frozen=True)
class Uniform:
    name = "uniform"


@dataclass(frozen=True)
class SizeProportional:
    name = "size"


@dataclass(frozen=True)
class CategoryHierarchical:
    """Equal weight per category, split equally between the category's videos."""

    name = "hierarchical"


@dataclass(frozen=True)
class Explicit:
    weights: Mapping[str, float]
    name = "explicit"


WeightScheme = Uniform | SizeProportional | CategoryHierarchical | Explicit


def make_weights(sources: SourceSet, scheme: WeightScheme) -> dict[str, float]:
    """Build the source distribution ``P(V)`` as a ``video_id -> weight`` dict."""
    n = len(sources)
    if isinstance(scheme, Uniform):
        return {r.video_id: 1.0 / n for r in sources}

    if isinstance(scheme, SizeProportional):
        missing = [r.video_id for r in sources if r.size is None]
        if missing:
            raise MissingSizeError(f"size-proportional weights need a size for every video; missing: {missing}")
        total = sum(r.size for r in sources)
        return {r.video_id: r.size / total for r in sources}

    if isinstance(scheme, CategoryHierarchical):
        missing = [r.video_id for r in sources if not r.category]
        if missing:
            raise MissingCategoryError(f"hierarchical weights need a category for every video; missing: {missing}")
        per_cat: dict[str, int] = {}
        for r in sources:
            per_cat[r.category] = per_cat.get(r.category, 0) + 1
        k = len(per_cat)
        return {r.video_id: 1.0 / (k * per_cat[r.category]) for r in sources}

    if isinstance(scheme, Explicit):
        missing = [r.video_id for r in sources if r.video_id not in scheme.weights]
        if missing:
            raise WeightMismatchError(f"no explicit weight for videos {missing}")
        raw = {r.video_id: float(scheme.weights[r.video_id]) for r in sources}
        bad = {k: v for k, v in raw.items() if not (v >= 0.0 and math.isfinite(v))}
        if bad:
            raise DataError(f"weights must be finite and non-negative: {bad}")
        total = math.fsum(raw.values())
        if total <= 0.0:
            raise AllZeroWeightsError("all explicit weights are zero")
        if abs(total - 1.0) > SUM_TOLERANCE:
            warnings.warn(f"explicit weights sum to {total!r}; rescaling to 1", WeightNormalizationWarning, stacklevel=2)
        return {k: v / total for k, v in raw.items()}

    raise TypeError(f"unknown weight scheme {scheme!r}")


def check_weights(sources: SourceSet, weights: Mapping[str, float]) -> None:
    if set(weights) != set(sources.ids):
        raise WeightMismatchError("weight keys do not match the source ids")
    if any(not (0.0 <= w <= 1.0) for w in weights.values()):
        raise WeightMismatchError("weights must lie in [0, 1]")
    total = math.fsum(weights.values())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise WeightMismatchError(f"weights sum to {total!r}, not 1")


# --------------------------------------------------------------------------
# Summarization


@dataclass(frozen=True)
class Summary:
    """Summarized outcome probabilities plus the indicators derived from them."""

    confusion: NormalizedConfusion
    weights: Mapping[str, float]
    indicators: dict[IndicatorSpec, float | None] = field(default_factory=dict, compare=False)

    def value(self, spec: IndicatorSpec) -> float | None:
        if spec not in self.indicators:
            self.indicators[spec] = indicator_value(self.confusion, spec)
        return self.indicators[spec]


def _weighted_unconditional(sources: SourceSet, weights: Mapping[str, float], outcomes) -> float:
    # fsum is correctly rounded, so the result does not depend on source order
    return math.fsum(weights[r.video_id] * unconditional_value(r.confusion, outcomes) for r in sources)


def summarize(
    sources: SourceSet,
    weights: Mapping[str, float],
    indicators: Iterable[IndicatorSpec] = (),
) -> Summary:
    check_weights(sources, weights)
    probs = [math.fsum(weights[r.video_id] * r.confusion.prob(o) for r in sources) for o in OUTCOMES]
    total = math.fsum(probs)
    if abs(total - 1.0) > SUM_TOLERANCE:
        probs = [p / total for p in probs]
    probs = [min(p, 1.0) for p in probs]
    summary = Summary(NormalizedConfusion(*probs), dict(weights))
    for spec in indicators:
        summary.value(spec)
    return summary


def summarize_conditional(sources: SourceSet, weights: Mapping[str, float], spec: Probabilistic) -> float | None:
    """Summarized ``P(A | B)`` as the ratio of the summarized ``P(A and B)`` and ``P(B)``.

    Sources where ``P(B) = 0`` (and the conditional is undefined) carry no mass
    in either sum; the result is undefined only when ``P(B) = 0`` overall.
    """
    check_weights(sources, weights)
    if spec.unconditional:
        return min(_weighted_unconditional(sources, weights, spec.a), 1.0)
    den = _weighted_unconditional(sources, weights, spec.b)
    if den == 0.0:
        return None
    num = _weighted_unconditional(sources, weights, spec.a & spec.b)
    return min(num / den, 1.0)


def summarize_legacy_mean(
    sources: SourceSet,
    spec: IndicatorSpec,
    undefined_policy: str = "error",
) -> float | None:
    """Arithmetic mean of per-video values inside each category, then across categories.

    ``undefined_policy="skip"`` drops undefined per-video values, and categories
    left without any defined value; ``"error"`` raises on the first one.
    """
    if undefined_policy not in ("error", "skip"):
        raise ValueError(f"unknown undefined policy {undefined_policy!r}")
    missing = [r.video_id for r in sources if not r.category]
    if missing:
        raise MissingCategoryError(f"legacy averaging needs a category for every video; missing: {missing}")

    by_cat: dict[str, list[float]] = {}
    for r in sources:
        v = indicator_value(r.confusion, spec)
        if v is None:
            if undefined_policy == "error":
                raise UndefinedIndicatorError(f"{spec.label} is undefined for video {r.video_id!r}")
            by_cat.setdefault(r.category, [])
            continue
        by_cat.setdefault(r.category, []).append(v)

    cat_means = [math.fsum(vals) / len(vals) for vals in by_cat.values() if vals]
    if not cat_means:
        raise NoDefinedValuesError(f"{spec.label} is undefined for every video")
    return math.fsum(cat_means) / len(cat_means)


# --------------------------------------------------------------------------
# Ranking


@dataclass(frozen=True)
class RankedEntry:
    algorithm: str
    value: float | None
    rank: int

    @property
    def undefined(self) -> bool:
        return self.value is None


def rank_algorithms(per_algorithm: Mapping[str, float | None], descending: bool = True) -> list[RankedEntry]:
    """Dense ranks; ties share a rank and are listed by algorithm name.

    Undefined values come last and share the rank after the last defined one.
    """
    defined = {a: v for a, v in per_algorithm.items() if v is not None}
    if not defined:
        raise EmptyInputError("ranking needs at least one defined value")
    sign = -1.0 if descending else 1.0
    ordered = sorted(defined.items(), key=lambda kv: (sign * kv[1], kv[0]))

    out: list[RankedEntry] = []
    rank, prev = 0, None
    for alg, v in ordered:
        if v != prev:
            rank += 1
            prev = v
        out.append(RankedEntry(alg, v, rank))
    for alg in sorted(a for a, v in per_algorithm.items() if v is None):
        out.append(RankedEntry(alg, None, rank + 1))
    return out

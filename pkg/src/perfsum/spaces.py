"""Conversions between the ROC (FPR, TPR) and PR (recall, precision) spaces.

Both directions need the positive prior: the two spaces are in bijection only
for a fixed prior.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from perfsum.errors import AchievabilityError, InvalidPriorError, ZeroPrecisionError

_EPS = sys.float_info.epsilon


def _fpr_slack(prior_pos: float, recall: float, precision: float) -> float:
    # rounding of the precision is amplified by prior / ((1 - prior) * precision**2)
    return 1e-12 + 4.0 * _EPS * prior_pos * recall / ((1.0 - prior_pos) * precision * precision)


def _check_unit(name: str, v: float) -> None:
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"{name}={v!r} is outside [0, 1]")


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float

    def __post_init__(self):
        _check_unit("fpr", self.fpr)
        _check_unit("tpr", self.tpr)


@dataclass(frozen=True)
class PrPoint:
    recall: float
    precision: float

    def __post_init__(self):
        _check_unit("recall", self.recall)
        _check_unit("precision", self.precision)


def roc_to_pr(p: RocPoint, prior_pos: float) -> PrPoint | None:
    """Precision from the ROC point; ``None`` when nothing is predicted positive."""
    if not (0.0 < prior_pos <= 1.0):
        raise InvalidPriorError(f"positive prior must lie in (0, 1], got {prior_pos!r}")
    pos = prior_pos * p.tpr
    den = (1.0 - prior_pos) * p.fpr + pos
    if den == 0.0:
        return None
    return PrPoint(recall=p.tpr, precision=min(pos / den, 1.0))


def pr_to_roc(p: PrPoint, prior_pos: float) -> RocPoint:
    """Inverse of :func:`roc_to_pr`.

    Raises ``AchievabilityError`` when the implied FPR exceeds 1, i.e. the
    precision is below :func:`min_achievable_precision` for this recall.
    """
    if not (0.0 < prior_pos < 1.0):
        raise InvalidPriorError(f"positive prior must lie in (0, 1), got {prior_pos!r}")
    if p.precision <= 0.0:
        raise ZeroPrecisionError("the FPR cannot be recovered from a zero precision")
    fpr = prior_pos * p.recall * (1.0 - p.precision) / ((1.0 - prior_pos) * p.precision)
    if fpr > 1.0 + _fpr_slack(prior_pos, p.recall, p.precision):
        raise AchievabilityError(
            f"PR point (recall={p.recall!r}, precision={p.precision!r}) is unachievable at prior "
            f"{prior_pos!r}: implied FPR {fpr!r} > 1 (minimum precision "
            f"{min_achievable_precision(prior_pos, p.recall)!r})"
        )
    return RocPoint(fpr=min(fpr, 1.0), tpr=p.recall)


def min_achievable_precision(prior_pos: float, recall: float) -> float:
    """Lowest precision any classifier can reach at this prior and recall (FPR = 1)."""
    if recall == 0.0:
        return 0.0
    pos = prior_pos * recall
    return pos / (pos + (1.0 - prior_pos))

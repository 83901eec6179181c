"""Two-class confusion outcomes and the indicators derived from them.

Indicator values are ``float`` when defined and ``None`` when undefined
(e.g. a true positive rate on a video without any positive pixel). An
undefined value is a legitimate result, not an error.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

from perfsum.errors import InvalidIndicatorError, MissingIndicatorError, ZeroTotalError

SUM_TOLERANCE = 1e-12
UINT64_MAX = 2**64 - 1


class Outcome(enum.Enum):
    TN = "tn"
    FP = "fp"
    FN = "fn"
    TP = "tp"


OUTCOMES: tuple[Outcome, ...] = (Outcome.TN, Outcome.FP, Outcome.FN, Outcome.TP)
_ORDER = {o: i for i, o in enumerate(OUTCOMES)}

OutcomeSet = frozenset
UNIVERSE: frozenset[Outcome] = frozenset(OUTCOMES)
EMPTY: frozenset[Outcome] = frozenset()


def outcome_set(*names: str | Outcome) -> frozenset[Outcome]:
    """Build an outcome set from names such as ``"tp"`` or ``Outcome.TP``."""
    out = set()
    for n in names:
        if isinstance(n, Outcome):
            out.add(n)
            continue
        try:
            out.add(Outcome(n.strip().lower()))
        except ValueError:
            raise InvalidIndicatorError(f"unknown outcome {n!r}") from None
    return frozenset(out)


def format_outcome_set(s: Iterable[Outcome]) -> str:
    return "{" + ",".join(o.value for o in sorted(s, key=_ORDER.__getitem__)) + "}"


@dataclass(frozen=True)
class ConfusionCounts:
    """Raw pixel tallies for one source."""

    tn: int
    fp: int
    fn: int
    tp: int

    def __post_init__(self):
        for name in ("tn", "fp", "fn", "tp"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"{name} must be an int, got {type(v).__name__}")
            if v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")
            if v > UINT64_MAX:
                raise ValueError(f"{name} exceeds the 64-bit unsigned range")
        if self.total > UINT64_MAX:
            raise ValueError("total count exceeds the 64-bit unsigned range")

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return ConfusionCounts(self.tn + other.tn, self.fp + other.fp, self.fn + other.fn, self.tp + other.tp)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.tn, self.fp, self.fn, self.tp)


@dataclass(frozen=True)
class NormalizedConfusion:
    """Joint distribution of (ground truth, prediction) over the four outcomes."""

    p_tn: float
    p_fp: float
    p_fn: float
    p_tp: float

    def __post_init__(self):
        vals = self.as_tuple()
        for name, v in zip(("p_tn", "p_fp", "p_fn", "p_tp"), vals):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v!r} is outside [0, 1]")
        s = math.fsum(vals)
        if abs(s - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {s!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_tn, self.p_fp, self.p_fn, self.p_tp)

    def prob(self, outcome: Outcome) -> float:
        return self.as_tuple()[_ORDER[outcome]]


# --------------------------------------------------------------------------
# Indicator specifications


@dataclass(frozen=True)
class Probabilistic:
    """P(outcome in ``a`` | outcome in ``b``) with empty < a < b <= universe."""

    a: frozenset[Outcome]
    b: frozenset[Outcome] = UNIVERSE

    def __post_init__(self):
        a, b = frozenset(self.a), frozenset(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not a or not (a < b) or not (b <= UNIVERSE):
            raise InvalidIndicatorError(
                f"invalid probabilistic indicator {format_outcome_set(a)}|{format_outcome_set(b)}: "
                "requires empty < A < B <= {tn,fp,fn,tp}"
            )

    @property
    def unconditional(self) -> bool:
        return self.b == UNIVERSE

    @property
    def expression(self) -> str:
        if self.unconditional:
            return format_outcome_set(self.a)
        return f"{format_outcome_set(self.a)}|{format_outcome_set(self.b)}"

    @property
    def label(self) -> str:
        return CANONICAL_NAMES.get(self, self.expression)


DERIVED_NAMES = ("F", "BA", "A", "J")


@dataclass(frozen=True)
class Derived:
    name: str

    def __post_init__(self):
        if self.name not in DERIVED_NAMES:
            raise InvalidIndicatorError(f"unknown derived indicator {self.name!r}")

    @property
    def label(self) -> str:
        return self.name


IndicatorSpec = Union[Probabilistic, Derived]


def _p(a: str, b: str | None = None) -> Probabilistic:
    sa = outcome_set(*a.split(","))
    return Probabilistic(sa, outcome_set(*b.split(",")) if b else UNIVERSE)


PI_POS = _p("fn,tp")
PI_NEG = _p("tn,fp")
TAU_POS = _p("fp,tp")
TAU_NEG = _p("tn,fn")
ER = _p("fp,fn")
TNR = _p("tn", "tn,fp")
FPR = _p("fp", "tn,fp")
FNR = _p("fn", "fn,tp")
TPR = _p("tp", "fn,tp")
PPV = _p("tp", "fp,tp")
NPV = _p("tn", "tn,fn")
F_SCORE = Derived("F")
BALANCED_ACCURACY = Derived("BA")
ACCURACY = Derived("A")
JACCARD = Derived("J")

NAMED_PROBABILISTIC: dict[str, Probabilistic] = {
    "PI_POS": PI_POS,
    "PI_NEG": PI_NEG,
    "TAU_POS": TAU_POS,
    "TAU_NEG": TAU_NEG,
    "ER": ER,
    "TNR": TNR,
    "FPR": FPR,
    "FNR": FNR,
    "TPR": TPR,
    "PPV": PPV,
    "NPV": NPV,
}

CANONICAL_NAMES: dict[Probabilistic, str] = {v: k for k, v in NAMED_PROBABILISTIC.items()}

_ALIASES: dict[str, IndicatorSpec] = {
    **NAMED_PROBABILISTIC,
    "π⁺": PI_POS,
    "π⁻": PI_NEG,
    "τ⁺": TAU_POS,
    "τ⁻": TAU_NEG,
    "PRIOR_POS": PI_POS,
    "PRIOR_NEG": PI_NEG,
    "SPECIFICITY": TNR,
    "R": TPR,
    "RECALL": TPR,
    "SENSITIVITY": TPR,
    "P": PPV,
    "PRECISION": PPV,
    "F": F_SCORE,
    "F1": F_SCORE,
    "BA": BALANCED_ACCURACY,
    "A": ACCURACY,
    "ACCURACY": ACCURACY,
    "J": JACCARD,
    "JACCARD": JACCARD,
}

_SET_RE = re.compile(r"^\{([^{}]*)\}$")


def _parse_set(text: str) -> frozenset[Outcome]:
    m = _SET_RE.match(text.strip())
    if not m:
        raise InvalidIndicatorError(f"malformed outcome set {text!r}")
    body = m.group(1).strip()
    if not body:
        return EMPTY
    return outcome_set(*body.split(","))


def parse_indicator(text: str) -> IndicatorSpec:
    """Resolve a name (``"TPR"``, ``"F"``, ``"π⁺"``) or an expression such as
    ``"{tp}|{fn,tp}"`` / ``"{fp,fn}"`` to an indicator spec."""
    t = text.strip()
    if t.startswith("{"):
        parts = t.split("|")
        if len(parts) == 1:
            return Probabilistic(_parse_set(parts[0]))
        if len(parts) == 2:
            return Probabilistic(_parse_set(parts[0]), _parse_set(parts[1]))
        raise InvalidIndicatorError(f"malformed indicator expression {text!r}")
    spec = _ALIASES.get(t) or _ALIASES.get(t.upper())
    if spec is None:
        raise InvalidIndicatorError(f"unknown indicator {text!r}")
    return spec


def parse_indicator_list(text: str) -> list[IndicatorSpec]:
    """Split a comma-separated list, keeping commas inside braces."""
    items, depth, cur = [], 0, []
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur))
    specs = list(dict.fromkeys(parse_indicator(s) for s in items if s.strip()))
    if not specs:
        raise InvalidIndicatorError("no indicator requested")
    return specs


# --------------------------------------------------------------------------
# Evaluation


def normalize(counts: ConfusionCounts) -> NormalizedConfusion:
    total = counts.total
    if total == 0:
        raise ZeroTotalError("cannot normalize a confusion matrix with no pixel")
    return NormalizedConfusion(counts.tn / total, counts.fp / total, counts.fn / total, counts.tp / total)


def unconditional_value(nc: NormalizedConfusion, a: Iterable[Outcome]) -> float:
    """P(outcome in a); 0 for the empty set and 1 for the universe."""
    a = frozenset(a)
    if a == UNIVERSE:
        return 1.0
    return math.fsum(nc.prob(o) for o in OUTCOMES if o in a)


def _ratio(num: float, den: float) -> float | None:
    if den == 0.0:
        return None
    return min(num / den, 1.0)


def indicator_value(nc: NormalizedConfusion, spec: IndicatorSpec) -> float | None:
    if isinstance(spec, Probabilistic):
        if spec.unconditional:
            return unconditional_value(nc, spec.a)
        return _ratio(unconditional_value(nc, spec.a & spec.b), unconditional_value(nc, spec.b))
    name = spec.name
    if name == "F":
        return _ratio(2.0 * nc.p_tp, nc.p_fp + nc.p_fn + 2.0 * nc.p_tp)
    if name == "A":
        return min(nc.p_tn + nc.p_tp, 1.0)
    if name == "J":
        return _ratio(nc.p_tp, nc.p_fp + nc.p_fn + nc.p_tp)
    if name == "BA":
        tnr, tpr = indicator_value(nc, TNR), indicator_value(nc, TPR)
        if tnr is None or tpr is None:
            return None
        return (tnr + tpr) / 2.0
    raise InvalidIndicatorError(f"unknown derived indicator {name!r}")


def confusion_from_roc(prior_pos: float, fpr: float | None, tpr: float | None) -> NormalizedConfusion:
    """Rebuild the normalized confusion from the positive prior and the ROC point.

    The rate for an empty class is not needed and may be ``None``.
    """
    if not (0.0 <= prior_pos <= 1.0):
        raise ValueError(f"prior_pos={prior_pos!r} is outside [0, 1]")
    prior_neg = 1.0 - prior_pos
    if prior_pos > 0.0:
        if tpr is None:
            raise MissingIndicatorError("TPR is required when the positive prior is non-zero")
        p_tp, p_fn = prior_pos * tpr, prior_pos * (1.0 - tpr)
    else:
        p_tp = p_fn = 0.0
    if prior_pos < 1.0:
        if fpr is None:
            raise MissingIndicatorError("FPR is required when the negative prior is non-zero")
        p_fp, p_tn = prior_neg * fpr, prior_neg * (1.0 - fpr)
    else:
        p_fp = p_tn = 0.0
    return NormalizedConfusion(p_tn, p_fp, p_fn, p_tp)

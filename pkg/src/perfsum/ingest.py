"""Loading per-video evaluation data.

Three tabular inputs are supported:

* ``counts_csv``: ``algorithm,category,video,tn,fp,fn,tp[,size]``
* ``roc_csv``: ``algorithm,category,video,prior_pos,fpr,tpr[,tau_pos][,ppv][,size]``
* ``json``: a list of objects carrying the same keys as either CSV layout

In ``roc_csv``, ``NA`` or an empty cell marks an undefined rate (for instance
the TPR of a video without positive pixels). Confusion counts can also be
computed directly from pairs of ground-truth / predicted graymaps.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from perfsum.errors import (
    DataError,
    DimensionMismatchError,
    DomainError,
    ParseError,
    SchemaError,
    UnmappedLabelError,
)
from perfsum.indicators import ConfusionCounts, NormalizedConfusion, confusion_from_roc, normalize
from perfsum.pgm import read_pgm
from perfsum.summarizer import SourceRecord, SourceSet

FORMATS = ("counts_csv", "roc_csv", "json")

_KEY = ("algorithm", "category", "video")
_COUNTS = ("tn", "fp", "fn", "tp")
_ROC = ("prior_pos", "fpr", "tpr")
_ROC_OPTIONAL = ("tau_pos", "ppv")
NA = "NA"


@dataclass(frozen=True)
class RocIndicatorRow:
    prior_pos: float
    fpr: float | None
    tpr: float | None
    tau_pos: float | None = None
    ppv: float | None = None

    def __post_init__(self):
        for name in ("prior_pos", "fpr", "tpr", "tau_pos", "ppv"):
            v = getattr(self, name)
            if v is None:
                if name == "prior_pos":
                    raise DomainError("prior_pos is required")
                continue
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v!r} is outside [0, 1]")

    def confusion(self) -> NormalizedConfusion:
        return confusion_from_roc(self.prior_pos, self.fpr, self.tpr)


@dataclass(frozen=True)
class EvaluationRecord:
    algorithm: str
    category: str
    video_id: str
    payload: ConfusionCounts | RocIndicatorRow
    size: int | None = None
    line: int | None = field(default=None, compare=False)

    def confusion(self) -> NormalizedConfusion:
        if isinstance(self.payload, ConfusionCounts):
            return normalize(self.payload)
        return self.payload.confusion()


@dataclass(frozen=True)
class Violation:
    check: str
    expected: float
    observed: float

    def __str__(self) -> str:
        return f"{self.check}: expected {self.expected!r}, observed {self.observed!r}"


def check_consistency(row: RocIndicatorRow, tolerance: float = 1e-6) -> list[Violation]:
    """Check the optional redundant fields of a ROC row against the others.

    An empty list means the row is consistent.
    """
    out = []
    # an undefined rate belongs to an empty class and contributes nothing
    pos_part = row.prior_pos * row.tpr if row.tpr is not None else 0.0
    neg_part = (1.0 - row.prior_pos) * row.fpr if row.fpr is not None else 0.0
    if row.tau_pos is not None:
        expected = neg_part + pos_part
        if abs(expected - row.tau_pos) > tolerance:
            out.append(Violation("tau_pos", expected, row.tau_pos))
    if row.ppv is not None and row.tau_pos is not None and row.tau_pos > 0.0:
        expected = pos_part / row.tau_pos
        if abs(expected - row.ppv) > tolerance:
            out.append(Violation("ppv", expected, row.ppv))
    return out


# --------------------------------------------------------------------------
# Field parsing


def _parse_count(text, name: str, line: int, path) -> int:
    if isinstance(text, bool):
        raise ParseError(line, f"{name}: expected an integer, got {text!r}", path)
    if isinstance(text, int):
        v = text
    else:
        s = str(text).strip()
        try:
            v = int(s, 10)
        except ValueError:
            raise ParseError(line, f"{name}: expected a base-10 integer, got {text!r}", path) from None
    if v < 0:
        raise DomainError(f"{path or ''}:{line}: {name}={v} is negative")
    return v


def _parse_real(text, name: str, line: int, path, allow_na: bool) -> float | None:
    if text is None or (isinstance(text, str) and text.strip() in ("", NA)):
        if allow_na:
            return None
        raise ParseError(line, f"{name} is required", path)
    if isinstance(text, bool):
        raise ParseError(line, f"{name}: expected a number, got {text!r}", path)
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParseError(line, f"{name}: expected a real number, got {text!r}", path) from None
    if not (0.0 <= v <= 1.0):
        raise DomainError(f"{path or ''}:{line}: {name}={text!r} is outside [0, 1]")
    return v


def _parse_size(text, line: int, path) -> int | None:
    if text is None or (isinstance(text, str) and text.strip() in ("", NA)):
        return None
    v = _parse_count(text, "size", line, path)
    if v < 1:
        raise DomainError(f"{path or ''}:{line}: size must be >= 1")
    return v


def _record_from_fields(row: Mapping, kind: str, line: int, path) -> EvaluationRecord:
    key = [row.get(k) for k in _KEY]
    if any(not isinstance(k, str) for k in key):
        raise ParseError(line, "algorithm, category and video must be strings", path)
    algorithm, category, video = (k.strip() for k in key)
    if not algorithm or not video:
        raise ParseError(line, "empty algorithm or video", path)
    size = _parse_size(row.get("size"), line, path)
    if kind == "counts":
        counts = [_parse_count(row.get(k), k, line, path) for k in _COUNTS]
        try:
            payload = ConfusionCounts(*counts)
        except ValueError as e:
            raise DomainError(f"{path or ''}:{line}: {e}") from None
    else:
        prior = _parse_real(row.get("prior_pos"), "prior_pos", line, path, allow_na=False)
        rates = {k: _parse_real(row.get(k), k, line, path, allow_na=True) for k in ("fpr", "tpr", *_ROC_OPTIONAL)}
        payload = RocIndicatorRow(prior, **rates)
        try:
            payload.confusion()
        except DataError as e:
            raise DomainError(f"{path or ''}:{line}: {e}") from None
    return EvaluationRecord(algorithm, category, video, payload, size, line)


def _check_columns(columns: Sequence[str], kind: str, line: int, path) -> None:
    required = set(_KEY) | set(_COUNTS if kind == "counts" else _ROC)
    optional = {"size"} | (set(_ROC_OPTIONAL) if kind == "roc" else set())
    cols = set(columns)
    missing = sorted(required - cols)
    extra = sorted(cols - required - optional)
    if missing or extra or len(cols) != len(columns):
        parts = []
        if missing:
            parts.append(f"missing columns {missing}")
        if extra:
            parts.append(f"unexpected columns {extra}")
        if len(cols) != len(columns):
            parts.append("duplicate columns")
        where = f"{path}:{line}" if path else f"line {line}"
        raise SchemaError(f"{where}: " + "; ".join(parts))


def _check_unique(records: list[EvaluationRecord], path) -> None:
    seen: dict[tuple[str, str], int | None] = {}
    for r in records:
        k = (r.algorithm, r.video_id)
        if k in seen:
            raise DomainError(f"{path}:{r.line}: duplicate (algorithm, video) {k} (first at line {seen[k]})")
        seen[k] = r.line


def _check_rows(records: list[EvaluationRecord], tolerance: float, path) -> None:
    for r in records:
        if isinstance(r.payload, RocIndicatorRow):
            bad = check_consistency(r.payload, tolerance)
            if bad:
                raise DomainError(f"{path}:{r.line}: inconsistent row: " + "; ".join(map(str, bad)))


def read_records(path: str | Path, format: str, tolerance: float = 1e-6) -> list[EvaluationRecord]:
    """Load evaluation records; redundant ROC fields are checked at ``tolerance``."""
    if format not in FORMATS:
        raise SchemaError(f"unknown input format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(0, f"not UTF-8: {e}", str(path)) from None
    if format == "json":
        records = _read_json(text, str(path))
    else:
        records = _read_csv(text, "counts" if format == "counts_csv" else "roc", str(path))
    _check_unique(records, path)
    _check_rows(records, tolerance, path)
    return records


def _read_csv(text: str, kind: str, path: str) -> list[EvaluationRecord]:
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty file, a header row is required") from None
    header = [h.strip() for h in header]
    _check_columns(header, kind, 1, path)
    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(line, f"expected {len(header)} fields, got {len(row)}", path)
        records.append(_record_from_fields(dict(zip(header, row)), kind, line, path))
    return records


def _read_json(text: str, path: str) -> list[EvaluationRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg, path) from None
    if not isinstance(data, list):
        raise SchemaError(f"{path}: expected a JSON list of records")
    records = []
    for i, obj in enumerate(data, start=1):
        if not isinstance(obj, dict):
            raise SchemaError(f"{path}: record {i} is not an object")
        kind = "counts" if any(k in obj for k in _COUNTS) else "roc"
        _check_columns(list(obj), kind, i, path)
        records.append(_record_from_fields(obj, kind, i, path))
    return records


# --------------------------------------------------------------------------
# Writing


def format_real(v: float | None) -> str:
    """Shortest round-trip representation; undefined values become ``NA``."""
    return NA if v is None else repr(float(v))


def write_records(records: Iterable[EvaluationRecord], path: str | Path, format: str) -> None:
    records = list(records)
    if format == "json":
        out = []
        for r in records:
            obj = {"algorithm": r.algorithm, "category": r.category, "video": r.video_id}
            if isinstance(r.payload, ConfusionCounts):
                obj.update(zip(_COUNTS, r.payload.as_tuple()))
            else:
                obj.update({k: getattr(r.payload, k) for k in (*_ROC, *_ROC_OPTIONAL)})
            if r.size is not None:
                obj["size"] = r.size
            out.append(obj)
        Path(path).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
        return

    kind = ConfusionCounts if format == "counts_csv" else RocIndicatorRow
    if format not in ("counts_csv", "roc_csv"):
        raise SchemaError(f"unknown output format {format!r}")
    if any(not isinstance(r.payload, kind) for r in records):
        raise SchemaError(f"{format} can only hold {kind.__name__} payloads")
    with_size = any(r.size is not None for r in records)
    fields = list(_KEY) + (list(_COUNTS) if kind is ConfusionCounts else [*_ROC, *_ROC_OPTIONAL])
    if with_size:
        fields.append("size")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in records:
            row = [r.algorithm, r.category, r.video_id]
            if kind is ConfusionCounts:
                row += [str(c) for c in r.payload.as_tuple()]
            else:
                row += [format_real(getattr(r.payload, k)) for k in (*_ROC, *_ROC_OPTIONAL)]
            if with_size:
                row.append("" if r.size is None else str(r.size))
            w.writerow(row)


# --------------------------------------------------------------------------
# Grouping into source sets


def to_source_record(rec: EvaluationRecord) -> SourceRecord:
    """Counts records without an explicit size use their pixel total as size."""
    size = rec.size
    if size is None and isinstance(rec.payload, ConfusionCounts):
        size = rec.payload.total or None
    return SourceRecord(rec.video_id, rec.confusion(), rec.category, size)


def group_by_algorithm(records: Iterable[EvaluationRecord]) -> dict[str, SourceSet]:
    """Input-ordered ``algorithm -> SourceSet``."""
    groups: dict[str, list[SourceRecord]] = {}
    for r in records:
        try:
            src = to_source_record(r)
        except DataError as e:
            raise type(e)(f"algorithm {r.algorithm!r}, video {r.video_id!r}: {e}") from None
        groups.setdefault(r.algorithm, []).append(src)
    return {alg: SourceSet(recs) for alg, recs in groups.items()}


# --------------------------------------------------------------------------
# Mask counting


def _gray_set(values: Iterable[int], name: str) -> frozenset[int]:
    out = frozenset(int(v) for v in values)
    bad = [v for v in out if not (0 <= v <= 255)]
    if bad:
        raise ValueError(f"{name}: gray values must be 8-bit, got {bad}")
    return out


@dataclass(frozen=True)
class LabelMapping:
    """How ground-truth gray levels map to classes, and how predictions are binarized.

    Defaults follow the usual change-detection mask convention: 255 is
    foreground, 0 background, 50 hard shadow (counted as background), 85
    outside the region of interest and 170 unknown motion (both ignored).
    """

    positive_values: frozenset[int] = frozenset({255})
    negative_values: frozenset[int] = frozenset({0, 50})
    ignore_values: frozenset[int] = frozenset({85, 170})
    prediction_threshold: int = 128

    def __post_init__(self):
        pos = _gray_set(self.positive_values, "positive_values")
        neg = _gray_set(self.negative_values, "negative_values")
        ign = _gray_set(self.ignore_values, "ignore_values")
        object.__setattr__(self, "positive_values", pos)
        object.__setattr__(self, "negative_values", neg)
        object.__setattr__(self, "ignore_values", ign)
        if pos & neg or pos & ign or neg & ign:
            raise ValueError("positive, negative and ignore gray values must be disjoint")
        if not (0 <= self.prediction_threshold <= 255):
            raise ValueError("prediction_threshold must be an 8-bit value")

    def with_overrides(self, overrides: Mapping | None) -> LabelMapping:
        if not overrides:
            return self
        known = {"positive": "positive_values", "negative": "negative_values", "ignore": "ignore_values", "threshold": "prediction_threshold"}
        unknown = set(overrides) - set(known)
        if unknown:
            raise SchemaError(f"unknown mapping keys {sorted(unknown)}")
        kw = {known[k]: v for k, v in overrides.items()}
        fields = {
            "positive_values": self.positive_values,
            "negative_values": self.negative_values,
            "ignore_values": self.ignore_values,
            "prediction_threshold": self.prediction_threshold,
        }
        fields.update(kw)
        return LabelMapping(**fields)


def count_from_masks(gt: np.ndarray, pred: np.ndarray, mapping: LabelMapping = LabelMapping()) -> ConfusionCounts:
    """Pixel-level confusion counts of one frame; ignored pixels are not counted."""
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    if gt.shape != pred.shape:
        raise DimensionMismatchError(f"ground truth {gt.shape} and prediction {pred.shape} differ in shape")
    is_pos = np.isin(gt, list(mapping.positive_values))
    is_neg = np.isin(gt, list(mapping.negative_values))
    is_ign = np.isin(gt, list(mapping.ignore_values))
    unmapped = ~(is_pos | is_neg | is_ign)
    if unmapped.any():
        pos = tuple(int(i) for i in np.argwhere(unmapped)[0])
        raise UnmappedLabelError(int(gt[pos]), pos)
    pred_pos = pred >= mapping.prediction_threshold
    pred_neg = ~pred_pos
    return ConfusionCounts(
        tn=int(np.count_nonzero(is_neg & pred_neg)),
        fp=int(np.count_nonzero(is_neg & pred_pos)),
        fn=int(np.count_nonzero(is_pos & pred_neg)),
        tp=int(np.count_nonzero(is_pos & pred_pos)),
    )


@dataclass(frozen=True)
class MaskJob:
    algorithm: str
    video_id: str
    category: str
    gt_dir: Path
    pred_dir: Path
    mapping: LabelMapping = LabelMapping()


def load_manifest(path: str | Path) -> list[MaskJob]:
    """Read a mask manifest: a JSON list of ``{algorithm, video_id, category,
    gt_dir, pred_dir[, mapping]}``; directories are relative to the manifest."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg, str(path)) from None
    if not isinstance(data, list):
        raise SchemaError(f"{path}: expected a JSON list of entries")
    jobs = []
    required = {"algorithm", "video_id", "gt_dir", "pred_dir"}
    allowed = required | {"category", "mapping"}
    for i, e in enumerate(data, start=1):
        if not isinstance(e, dict):
            raise SchemaError(f"{path}: entry {i} is not an object")
        missing, extra = required - set(e), set(e) - allowed
        if missing or extra:
            raise SchemaError(f"{path}: entry {i}: missing {sorted(missing)}, unexpected {sorted(extra)}")
        try:
            mapping = LabelMapping().with_overrides(e.get("mapping"))
        except (TypeError, ValueError) as err:
            raise SchemaError(f"{path}: entry {i}: bad mapping: {err}") from None
        jobs.append(
            MaskJob(
                algorithm=str(e["algorithm"]),
                video_id=str(e["video_id"]),
                category=str(e.get("category", "")),
                gt_dir=path.parent / e["gt_dir"],
                pred_dir=path.parent / e["pred_dir"],
                mapping=mapping,
            )
        )
    return jobs


def _frames(d: Path) -> dict[str, Path]:
    if not d.is_dir():
        raise DataError(f"{d}: not a directory")
    return {p.stem: p for p in sorted(d.iterdir()) if p.suffix.lower() == ".pgm" and p.is_file()}


def pair_frames(gt_dir: Path, pred_dir: Path) -> list[tuple[Path, Path]]:
    """Pair ground-truth and prediction frames by file stem; every frame must pair."""
    gt, pred = _frames(gt_dir), _frames(pred_dir)
    only_gt, only_pred = sorted(set(gt) - set(pred)), sorted(set(pred) - set(gt))
    if only_gt or only_pred or not gt:
        raise DataError(
            f"frame stems do not pair up between {gt_dir} and {pred_dir}: "
            f"ground truth only {only_gt}, prediction only {only_pred}"
        )
    return [(gt[s], pred[s]) for s in sorted(gt)]


def count_video(job: MaskJob) -> ConfusionCounts:
    total = ConfusionCounts(0, 0, 0, 0)
    for gt_path, pred_path in pair_frames(job.gt_dir, job.pred_dir):
        try:
            total = total + count_from_masks(read_pgm(gt_path), read_pgm(pred_path), job.mapping)
        except DimensionMismatchError as e:
            raise DimensionMismatchError(f"{gt_path} / {pred_path}: {e}") from None
        except UnmappedLabelError as e:
            raise DataError(f"{gt_path}: {e}") from e
    return total


def ingest_masks(manifest: str | Path) -> list[EvaluationRecord]:
    """One counts record per manifest entry, sized by its non-ignored pixel total."""
    out = []
    for job in load_manifest(manifest):
        counts = count_video(job)
        if counts.total == 0:
            raise DataError(f"video {job.video_id!r} of {job.algorithm!r}: every pixel is ignored")
        out.append(EvaluationRecord(job.algorithm, job.category, job.video_id, counts, counts.total))
    _check_unique(out, manifest)
    return out

"""Comparison of the two summarization procedures, per algorithm, and its files.

Every row or object is tagged with its procedure (``ours`` or ``legacy``).
Reals are written in shortest round-trip form and undefined values as ``NA``,
so identical inputs always give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from perfsum.errors import DataError
from perfsum.indicators import ER, FNR, FPR, PPV, TPR, IndicatorSpec
from perfsum.ingest import NA, EvaluationRecord, format_real, group_by_algorithm
from perfsum.summarizer import (
    Summary,
    SourceSet,
    WeightScheme,
    make_weights,
    rank_algorithms,
    summarize,
    summarize_legacy_mean,
)

PROCEDURES = ("ours", "legacy")
OUTPUT_FORMATS = ("csv", "json", "tsv-plot")
CONFUSION_COLUMNS = ("p_tn", "p_fp", "p_fn", "p_tp")
# ranked ascending
_LOWER_IS_BETTER = frozenset({ER, FPR, FNR})


@dataclass
class AlgorithmResult:
    algorithm: str
    values: dict[str, dict[IndicatorSpec, float | None]] = field(default_factory=dict)
    summary: Summary | None = None
    ranks: dict[str, dict[IndicatorSpec, int]] = field(default_factory=dict)
    roc: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)
    pr: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)


@dataclass
class ComparisonReport:
    procedures: tuple[str, ...]
    indicators: list[IndicatorSpec]
    rank_by: list[IndicatorSpec]
    results: list[AlgorithmResult]
    metadata: dict

    def discordant(self, algorithm: str, spec: IndicatorSpec) -> bool | None:
        if len(self.procedures) < 2:
            return None
        res = next(r for r in self.results if r.algorithm == algorithm)
        ranks = [res.ranks.get(p, {}).get(spec) for p in self.procedures]
        return ranks[0] != ranks[1]


def source_digest(records: Sequence[EvaluationRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        payload = ",".join(format_real(v) if isinstance(v, float) or v is None else str(v) for v in vars(r.payload).values())
        h.update(f"{r.algorithm}\x1f{r.category}\x1f{r.video_id}\x1f{type(r.payload).__name__}\x1f{payload}\x1f{r.size}\n".encode())
    return h.hexdigest()


def _with_context(algorithm: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except DataError as e:
        raise type(e)(f"algorithm {algorithm!r}: {e}") from None


def build_report(
    records: Sequence[EvaluationRecord],
    scheme: WeightScheme,
    indicators: Sequence[IndicatorSpec],
    procedures: Sequence[str] = PROCEDURES,
    undefined_policy: str = "error",
    rank_by: Sequence[IndicatorSpec] = (),
    plot_points: bool = False,
    scheme_label: str | None = None,
) -> ComparisonReport:
    procedures = tuple(p for p in PROCEDURES if p in procedures)
    groups: dict[str, SourceSet] = group_by_algorithm(records)
    if not groups:
        raise DataError("no evaluation record to summarize")
    results = []
    for alg, sources in groups.items():
        res = AlgorithmResult(alg)
        if "ours" in procedures:
            weights = _with_context(alg, make_weights, sources, scheme)
            summary = summarize(sources, weights, [*indicators, *rank_by, FPR, TPR, PPV])
            res.summary = summary
            res.values["ours"] = {s: summary.value(s) for s in [*indicators, *rank_by]}
            if plot_points:
                res.roc["ours"] = (summary.value(FPR), summary.value(TPR))
                res.pr["ours"] = (summary.value(TPR), summary.value(PPV))
        if "legacy" in procedures:
            legacy = {}
            for s in dict.fromkeys([*indicators, *rank_by]):
                legacy[s] = _with_context(alg, summarize_legacy_mean, sources, s, undefined_policy)
            res.values["legacy"] = legacy
            if plot_points:
                fpr, tpr, ppv = (_with_context(alg, summarize_legacy_mean, sources, s, undefined_policy) for s in (FPR, TPR, PPV))
                res.roc["legacy"] = (fpr, tpr)
                res.pr["legacy"] = (tpr, ppv)
        results.append(res)

    for spec in rank_by:
        for proc in procedures:
            vals = {r.algorithm: r.values[proc][spec] for r in results}
            if all(v is None for v in vals.values()):
                continue
            for entry in rank_algorithms(vals, descending=spec not in _LOWER_IS_BETTER):
                next(r for r in results if r.algorithm == entry.algorithm).ranks.setdefault(proc, {})[spec] = entry.rank

    metadata = {
        "weights": scheme_label or getattr(scheme, "name", str(scheme)),
        "source_digest": source_digest(records),
        "undefined_policy": undefined_policy,
        "procedures": list(procedures),
    }
    return ComparisonReport(procedures, list(indicators), list(rank_by), results, metadata)


# --------------------------------------------------------------------------
# Rendering


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render_summary_csv(report: ComparisonReport) -> str:
    labels = [s.label for s in report.indicators]
    header = ["algorithm", "procedure", *CONFUSION_COLUMNS, *labels, *(f"rank_{s.label}" for s in report.rank_by)]
    rows = [header]
    for res in report.results:
        for proc in report.procedures:
            if proc == "ours":
                conf = [format_real(v) for v in res.summary.confusion.as_tuple()]
            else:
                conf = [NA] * 4
            vals = [format_real(res.values[proc][s]) for s in report.indicators]
            ranks = [str(res.ranks[proc][s]) if s in res.ranks.get(proc, {}) else NA for s in report.rank_by]
            rows.append([res.algorithm, proc, *conf, *vals, *ranks])
    return _csv_text(rows)


def render_comparison_csv(report: ComparisonReport) -> str:
    rows = [["algorithm", "indicator", "ours", "legacy", "abs_diff"]]
    for res in report.results:
        for s in dict.fromkeys([*report.indicators, *report.rank_by]):
            ours, legacy = res.values["ours"][s], res.values["legacy"][s]
            diff = abs(ours - legacy) if ours is not None and legacy is not None else None
            rows.append([res.algorithm, s.label, format_real(ours), format_real(legacy), format_real(diff)])
    return _csv_text(rows)


def render_ranks_csv(report: ComparisonReport, spec: IndicatorSpec) -> str:
    procs = report.procedures
    header = ["algorithm", "indicator"]
    for p in procs:
        header += [p, f"rank_{p}"]
    if len(procs) == 2:
        header.append("discordant")
    rows = [header]

    def order_key(res: AlgorithmResult):
        r = res.ranks.get(procs[0], {}).get(spec)
        return (r if r is not None else float("inf"), res.algorithm)

    for res in sorted(report.results, key=order_key):
        row = [res.algorithm, spec.label]
        for p in procs:
            r = res.ranks.get(p, {}).get(spec)
            row += [format_real(res.values[p][spec]), NA if r is None else str(r)]
        if len(procs) == 2:
            row.append("1" if report.discordant(res.algorithm, spec) else "0")
        rows.append(row)
    return _csv_text(rows)


def _json_real(v: float | None):
    return NA if v is None else v


def render_json(report: ComparisonReport) -> str:
    algs = []
    for res in report.results:
        entry: dict = {"algorithm": res.algorithm}
        for proc in report.procedures:
            block: dict = {"procedure": proc}
            if proc == "ours":
                block["confusion"] = dict(zip(CONFUSION_COLUMNS, res.summary.confusion.as_tuple()))
            block["indicators"] = {s.label: _json_real(res.values[proc][s]) for s in dict.fromkeys([*report.indicators, *report.rank_by])}
            block["ranks"] = {s.label: res.ranks.get(proc, {}).get(s, NA) for s in report.rank_by}
            entry[proc] = block
        if len(report.procedures) == 2:
            entry["discordant"] = {s.label: report.discordant(res.algorithm, s) for s in report.rank_by}
        algs.append(entry)
    doc = {"metadata": report.metadata, "algorithms": algs}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_plot_tsv(points: Mapping[str, tuple[float | None, float | None]]) -> str:
    lines = ["label\tx\ty"]
    for label, (x, y) in points.items():
        lines.append(f"{label}\t{format_real(x)}\t{format_real(y)}")
    return "\n".join(lines) + "\n"


PLOT_META = {
    "roc": {"x": "FPR", "y": "TPR", "x_scale_hint": "log"},
    "pr": {"x": "recall", "y": "precision", "x_scale_hint": "linear"},
}


def write_report(report: ComparisonReport, out_dir: str | Path, formats: Sequence[str]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    if "csv" in formats:
        files["summary.csv"] = render_summary_csv(report)
        if len(report.procedures) == 2:
            files["comparison.csv"] = render_comparison_csv(report)
        for s in report.rank_by:
            files[f"ranks_{_safe(s.label)}.csv"] = render_ranks_csv(report, s)
    if "json" in formats:
        files["report.json"] = render_json(report)
    if "tsv-plot" in formats:
        for proc in report.procedures:
            files[f"roc_{proc}.tsv"] = render_plot_tsv({r.algorithm: r.roc[proc] for r in report.results})
            files[f"pr_{proc}.tsv"] = render_plot_tsv({r.algorithm: r.pr[proc] for r in report.results})
        files["plot_meta.json"] = json.dumps(PLOT_META, indent=2) + "\n"
    written = []
    for name, text in files.items():
        p = out / name
        p.write_bytes(text.encode("utf-8"))
        written.append(p)
    return written


def _safe(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label)


def report_from_values(
    values: Mapping[str, Mapping[str, float | None]],
    spec: IndicatorSpec,
    procedures: Sequence[str] = PROCEDURES,
) -> ComparisonReport:
    """Rank already summarized values given as ``algorithm -> procedure -> value``."""
    procedures = tuple(p for p in PROCEDURES if p in procedures)
    results = [AlgorithmResult(alg, {p: {spec: v[p]} for p in procedures}) for alg, v in values.items()]
    for proc in procedures:
        for entry in rank_algorithms({r.algorithm: r.values[proc][spec] for r in results}, spec not in _LOWER_IS_BETTER):
            next(r for r in results if r.algorithm == entry.algorithm).ranks.setdefault(proc, {})[spec] = entry.rank
    return ComparisonReport(procedures, [spec], [spec], results, {"procedures": list(procedures)})

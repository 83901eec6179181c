"""Command-line front end.

Exit codes: 0 on success, 1 on a usage or configuration error, 2 on a data
error. Diagnostics go to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from pathlib import Path

from perfsum.errors import ConfigError, DataError, SchemaError
from perfsum.indicators import parse_indicator, parse_indicator_list
from perfsum.ingest import FORMATS, format_real, ingest_masks, read_records, write_records
from perfsum.report import (
    OUTPUT_FORMATS,
    PROCEDURES,
    build_report,
    render_ranks_csv,
    report_from_values,
    write_report,
)
from perfsum.spaces import PrPoint, RocPoint, pr_to_roc, roc_to_pr
from perfsum.summarizer import CategoryHierarchical, Explicit, SizeProportional, Uniform

log = logging.getLogger("perfsum")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str, allowed: tuple[str, ...], what: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in allowed]
    if bad or not items:
        raise ConfigError(f"invalid {what} {bad or text!r}; choose from {', '.join(allowed)}")
    return items


def load_weight_file(path: str | Path) -> dict[str, float]:
    """Read explicit weights from a ``video,weight`` CSV."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"video", "weight"}:
            raise SchemaError(f"{path}: weight file header must be 'video,weight'")
        out = {}
        for row in reader:
            try:
                out[row["video"].strip()] = float(row["weight"])
            except ValueError:
                raise DataError(f"{path}:{reader.line_num}: bad weight {row['weight']!r}") from None
    return out


def parse_weights(text: str):
    if text == "uniform":
        return Uniform()
    if text == "size":
        return SizeProportional()
    if text == "hierarchical":
        return CategoryHierarchical()
    if text.startswith("file:"):
        return Explicit(load_weight_file(text[5:]))
    raise ConfigError(f"unknown weight scheme {text!r}; use uniform, size, hierarchical or file:<path>")


def _input_format(args) -> str:
    if args.input_format:
        return args.input_format
    return "json" if str(args.input).lower().endswith(".json") else "counts_csv"


def cmd_summarize(args) -> int:
    indicators = parse_indicator_list(args.indicators)
    rank_by = parse_indicator_list(args.rank_by) if args.rank_by else []
    procedures = _csv_list(args.procedures, PROCEDURES, "procedure")
    formats = _csv_list(args.format, OUTPUT_FORMATS, "output format")
    scheme = parse_weights(args.weights)
    records = read_records(args.input, _input_format(args))
    report = build_report(
        records,
        scheme,
        indicators,
        procedures=procedures,
        undefined_policy=args.undefined_policy,
        rank_by=rank_by,
        plot_points="tsv-plot" in formats,
        scheme_label=args.weights if not args.weights.startswith("file:") else "explicit",
    )
    for p in write_report(report, args.out, formats):
        log.info("wrote %s", p)
    return EXIT_OK


def _read_values_table(path) -> dict[str, dict[str, float | None]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "algorithm" not in cols or not set(cols) - {"algorithm"} <= set(PROCEDURES):
            raise SchemaError(f"{path}: values table header must be 'algorithm' plus any of {PROCEDURES}")
        out = {}
        for row in reader:
            vals = {}
            for p in PROCEDURES:
                if p in row:
                    cell = row[p].strip()
                    try:
                        vals[p] = None if cell in ("", "NA") else float(cell)
                    except ValueError:
                        raise DataError(f"{path}:{reader.line_num}: bad value {cell!r}") from None
            out[row["algorithm"].strip()] = vals
    return out


def cmd_rank(args) -> int:
    spec = parse_indicator(args.indicator)
    procedures = _csv_list(args.procedures, PROCEDURES, "procedure")
    if args.input_format == "values_csv":
        values = _read_values_table(args.input)
        missing = [p for p in procedures if any(p not in v for v in values.values())]
        if missing:
            raise SchemaError(f"{args.input}: no column for procedures {missing}")
        report = report_from_values(values, spec, procedures)
    else:
        records = read_records(args.input, _input_format(args))
        report = build_report(
            records,
            parse_weights(args.weights),
            [spec],
            procedures=procedures,
            undefined_policy=args.undefined_policy,
            rank_by=[spec],
        )
    if len(report.results) < 2:
        raise DataError("ranking needs at least two algorithms")
    text = render_ranks_csv(report, spec)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ranks.csv").write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_convert(args) -> int:
    x, y = args.x, args.y
    try:
        if args.direction == "roc2pr":
            res = roc_to_pr(RocPoint(fpr=x, tpr=y), args.prior)
            out = (None, None) if res is None else (res.recall, res.precision)
        else:
            res = pr_to_roc(PrPoint(recall=x, precision=y), args.prior)
            out = (res.fpr, res.tpr)
    except ValueError as e:
        if isinstance(e, DataError):
            raise
        raise DataError(str(e)) from None
    print(f"{format_real(out[0])} {format_real(out[1])}")
    return EXIT_OK


def cmd_ingest_masks(args) -> int:
    records = ingest_masks(args.manifest)
    write_records(records, args.output, "counts_csv")
    log.info("wrote %d rows to %s", len(records), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perfsum", description="Summarize two-class performance indicators over many videos.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, formats=FORMATS):
        p.add_argument("input", help="per-video evaluation file")
        p.add_argument("--input-format", choices=formats, default=None, help="default: json for *.json, else counts_csv")
        p.add_argument("--weights", default="hierarchical", help="uniform | size | hierarchical | file:<path>")
        p.add_argument("--procedures", default="ours,legacy")
        p.add_argument("--undefined-policy", choices=("error", "skip"), default="error")

    p = sub.add_parser("summarize", help="summarize every algorithm with both procedures")
    add_common(p)
    p.add_argument("--indicators", default="F,PPV,TPR,FPR,ER,A", help="names or A|B expressions")
    p.add_argument("--rank-by", default="F", help="indicators to rank by (empty for none)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", default="csv,json,tsv-plot")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("rank", help="rank algorithms under each procedure")
    add_common(p, (*FORMATS, "values_csv"))
    p.add_argument("--indicator", default="F")
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("convert", help="convert a point between ROC and PR spaces")
    p.add_argument("direction", choices=("roc2pr", "pr2roc"))
    p.add_argument("x", type=float, help="FPR (roc2pr) or recall (pr2roc)")
    p.add_argument("y", type=float, help="TPR (roc2pr) or precision (pr2roc)")
    p.add_argument("--prior", type=float, required=True, help="positive class prior")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("ingest-masks", help="count confusion outcomes from graymap masks")
    p.add_argument("manifest")
    p.add_argument("--output", required=True, help="counts CSV to write")
    p.set_defaults(func=cmd_ingest_masks)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits on usage errors and --help; report the code instead
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"perfsum: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"perfsum: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(f"perfsum: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"perfsum: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

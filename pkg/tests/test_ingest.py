import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from perfsum.errors import (
    DataError,
    DimensionMismatchError,
    DomainError,
    ParseError,
    SchemaError,
    UnmappedLabelError,
)
from perfsum.indicators import ConfusionCounts
from perfsum.ingest import (
    EvaluationRecord,
    LabelMapping,
    RocIndicatorRow,
    check_consistency,
    count_from_masks,
    group_by_algorithm,
    ingest_masks,
    read_records,
    write_records,
)
from perfsum.pgm import PGMError, parse_pgm, read_pgm, write_pgm

GT_2x2 = np.array([[255, 0], [85, 255]], dtype=np.uint8)
PRED_2x2 = np.array([[200, 10], [255, 90]], dtype=np.uint8)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestReadCounts:
    def test_row(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp\nalgoX,baseline,highway,50,10,20,20\n")
        (rec,) = read_records(p, "counts_csv")
        assert rec.payload == ConfusionCounts(50, 10, 20, 20)
        assert (rec.algorithm, rec.category, rec.video_id, rec.line) == ("algoX", "baseline", "highway", 2)

    def test_negative_count(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp\na,b,c,-1,0,0,1\n")
        with pytest.raises(DomainError):
            read_records(p, "counts_csv")

    def test_non_integer(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp\na,b,c,1.5,0,0,1\n")
        with pytest.raises(ParseError) as e:
            read_records(p, "counts_csv")
        assert e.value.line == 2

    def test_ragged_row(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp\na,b,c,1,0,0\n")
        with pytest.raises(ParseError):
            read_records(p, "counts_csv")

    @pytest.mark.parametrize(
        "header",
        ["algorithm,category,video,tn,fp,fn", "algorithm,category,video,tn,fp,fn,tp,extra", "algorithm,category,video,tn,fp,fn,tp,tp"],
    )
    def test_schema(self, tmp_path, header):
        p = write(tmp_path, "c.csv", header + "\n")
        with pytest.raises(SchemaError):
            read_records(p, "counts_csv")

    def test_empty_file(self, tmp_path):
        with pytest.raises(SchemaError):
            read_records(write(tmp_path, "c.csv", ""), "counts_csv")

    def test_duplicate_key(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp\na,b,c,1,0,0,1\na,b,c,1,0,0,1\n")
        with pytest.raises(DomainError):
            read_records(p, "counts_csv")

    def test_size_column(self, tmp_path):
        p = write(tmp_path, "c.csv", "algorithm,category,video,tn,fp,fn,tp,size\na,b,c,1,0,0,1,7\na,b,d,1,0,0,1,\n")
        recs = read_records(p, "counts_csv")
        assert [r.size for r in recs] == [7, None]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(SchemaError):
            read_records(write(tmp_path, "c.csv", ""), "xlsx")


class TestReadRoc:
    HEADER = "algorithm,category,video,prior_pos,fpr,tpr,tau_pos,ppv\n"

    def test_converts_to_confusion(self, tmp_path):
        p = write(tmp_path, "r.csv", "algorithm,category,video,prior_pos,fpr,tpr\nalgoX,baseline,v1,0.4,0.1666667,0.5\n")
        (rec,) = read_records(p, "roc_csv")
        assert rec.confusion().as_tuple() == pytest.approx((0.5, 0.1, 0.2, 0.2), abs=1e-7)

    def test_undefined_rates(self, tmp_path):
        p = write(tmp_path, "r.csv", self.HEADER + "a,c,neg,0,0.25,NA,0.25,0\na,c,pos,1,,0.75,,\n")
        neg, pos = read_records(p, "roc_csv")
        assert neg.confusion().as_tuple() == (0.75, 0.25, 0.0, 0.0)
        assert pos.confusion().as_tuple() == (0.0, 0.0, 0.25, 0.75)

    def test_missing_required_rate(self, tmp_path):
        p = write(tmp_path, "r.csv", self.HEADER + "a,c,v,0.3,NA,0.5,,\n")
        with pytest.raises(DomainError):
            read_records(p, "roc_csv")

    @pytest.mark.parametrize("value", ["1.5", "-0.1", "nan"])
    def test_out_of_range(self, tmp_path, value):
        p = write(tmp_path, "r.csv", self.HEADER + f"a,c,v,0.3,{value},0.5,,\n")
        with pytest.raises(DomainError):
            read_records(p, "roc_csv")

    def test_inconsistent_row(self, tmp_path):
        p = write(tmp_path, "r.csv", self.HEADER + "a,c,v,0.4,0.16666666666666666,0.5,0.3,0.5\n")
        with pytest.raises(DomainError, match="ppv"):
            read_records(p, "roc_csv")


class TestCheckConsistency:
    def test_consistent(self):
        assert check_consistency(RocIndicatorRow(0.4, 1 / 6, 0.5, 0.3, 2 / 3), 1e-12) == []

    def test_ppv_violation(self):
        (v,) = check_consistency(RocIndicatorRow(0.4, 1 / 6, 0.5, 0.3, 0.5), 1e-12)
        assert v.check == "ppv"
        assert v.expected == pytest.approx(2 / 3, abs=1e-12)
        assert v.observed == 0.5

    def test_tau_violation(self):
        (v,) = check_consistency(RocIndicatorRow(0.4, 1 / 6, 0.5, 0.35), 1e-9)
        assert v.check == "tau_pos"
        assert v.expected == pytest.approx(0.3)

    def test_vacuous(self):
        assert check_consistency(RocIndicatorRow(0.4, 1 / 6, 0.5)) == []


class TestJson:
    def test_mixed_payloads(self, tmp_path):
        data = [
            {"algorithm": "a", "category": "c", "video": "v1", "tn": 50, "fp": 10, "fn": 20, "tp": 20, "size": 100},
            {"algorithm": "a", "category": "c", "video": "v2", "prior_pos": 0.2, "fpr": 0.125, "tpr": 0.75},
            {"algorithm": "a", "category": "c", "video": "v3", "prior_pos": 0.0, "fpr": 0.5, "tpr": None},
        ]
        p = write(tmp_path, "r.json", json.dumps(data))
        recs = read_records(p, "json")
        assert recs[0].payload == ConfusionCounts(50, 10, 20, 20)
        assert recs[1].confusion().as_tuple() == pytest.approx((0.7, 0.1, 0.05, 0.15), abs=1e-15)
        assert recs[2].payload.tpr is None

    def test_bad_json(self, tmp_path):
        with pytest.raises(ParseError):
            read_records(write(tmp_path, "r.json", "[{"), "json")
        with pytest.raises(SchemaError):
            read_records(write(tmp_path, "r.json", "{}"), "json")


counts_st = st.tuples(*[st.integers(0, 2**40)] * 4).filter(lambda c: sum(c) > 0)
unit = st.floats(0, 1)


class TestRoundTrip:
    @settings(max_examples=50)
    @given(st.lists(counts_st, min_size=1, max_size=5), st.booleans())
    def test_counts_csv(self, tmp_path_factory, counts, with_size):
        p = tmp_path_factory.mktemp("rt") / "c.csv"
        recs = [
            EvaluationRecord("alg", "cat", f"v{i}", ConfusionCounts(*c), sum(c) if with_size else None)
            for i, c in enumerate(counts)
        ]
        write_records(recs, p, "counts_csv")
        assert read_records(p, "counts_csv") == recs

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.floats(0.01, 0.99), unit, unit), min_size=1, max_size=5), st.sampled_from(["roc_csv", "json"]))
    def test_roc(self, tmp_path_factory, rows, fmt):
        p = tmp_path_factory.mktemp("rt") / "r.out"
        recs = [EvaluationRecord("alg", "cat", f"v{i}", RocIndicatorRow(*r)) for i, r in enumerate(rows)]
        write_records(recs, p, fmt)
        back = read_records(p, fmt)
        for a, b in zip(recs, back):
            for k in ("prior_pos", "fpr", "tpr"):
                assert getattr(b.payload, k) == pytest.approx(getattr(a.payload, k), abs=1e-12)

    def test_csv_rejects_wrong_payload(self, tmp_path):
        rec = EvaluationRecord("a", "c", "v", RocIndicatorRow(0.5, 0.1, 0.1))
        with pytest.raises(SchemaError):
            write_records([rec], tmp_path / "x.csv", "counts_csv")


class TestGrouping:
    def test_groups_in_input_order(self, counts_csv):
        groups = group_by_algorithm(read_records(counts_csv, "counts_csv"))
        assert list(groups) == ["algoX"]
        assert groups["algoX"].ids == ["v1", "v2"]
        assert [r.size for r in groups["algoX"]] == [100, 100]


class TestLabelMapping:
    def test_defaults(self):
        m = LabelMapping()
        assert m.positive_values == {255} and m.negative_values == {0, 50}
        assert m.ignore_values == {85, 170} and m.prediction_threshold == 128

    def test_disjoint(self):
        with pytest.raises(ValueError):
            LabelMapping(positive_values={255}, negative_values={255})

    def test_overrides(self):
        m = LabelMapping().with_overrides({"negative": [0], "ignore": [50, 85, 170], "threshold": 1})
        assert m.negative_values == {0} and 50 in m.ignore_values and m.prediction_threshold == 1
        with pytest.raises(SchemaError):
            LabelMapping().with_overrides({"colour": 3})


class TestCountFromMasks:
    def test_fixture(self):
        # (0,0) TP, (0,1) TN, (1,0) ignored, (1,1) FN
        assert count_from_masks(GT_2x2, PRED_2x2) == ConfusionCounts(1, 0, 1, 1)

    def test_perfect_prediction(self):
        rng = np.random.default_rng(3)
        gt = rng.choice(np.array([0, 255], dtype=np.uint8), size=(16, 16))
        c = count_from_masks(gt, gt)
        assert c.fp == c.fn == 0 and c.total == 256

    def test_unmapped(self):
        gt = GT_2x2.copy()
        gt[1, 1] = 99
        with pytest.raises(UnmappedLabelError) as e:
            count_from_masks(gt, PRED_2x2)
        assert e.value.value == 99 and e.value.position == (1, 1)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            count_from_masks(GT_2x2, np.zeros((2, 3), dtype=np.uint8))

    def test_shadow_is_negative(self):
        gt = np.array([[50]], dtype=np.uint8)
        assert count_from_masks(gt, np.array([[255]], dtype=np.uint8)) == ConfusionCounts(0, 1, 0, 0)


class TestPgm:
    @pytest.mark.parametrize("plain", [True, False])
    @pytest.mark.parametrize("dtype, top", [(np.uint8, 255), (np.uint16, 65535)])
    def test_round_trip(self, tmp_path, plain, dtype, top):
        img = np.random.default_rng(0).integers(0, top + 1, size=(5, 7)).astype(dtype)
        img[0, 0] = top
        write_pgm(tmp_path / "x.pgm", img, plain=plain)
        back = read_pgm(tmp_path / "x.pgm")
        assert back.dtype == dtype
        np.testing.assert_array_equal(back, img)

    def test_comments_and_whitespace(self):
        data = b"P2\n# a comment\n2 2 # trailing\n255\n255 0\n85\n255\n"
        np.testing.assert_array_equal(parse_pgm(data), GT_2x2)

    def test_raw_with_comment(self):
        data = b"P5 #c\n2 1\n255\n" + bytes([7, 200])
        np.testing.assert_array_equal(parse_pgm(data), [[7, 200]])

    @pytest.mark.parametrize(
        "data",
        [b"P6\n1 1\n255\n\x00\x00\x00", b"P5\n2 2\n255\n\x00", b"P2\n2 2\n255\n1 2 3", b"P2\n2", b"P2\n1 1\n10\n11\n"],
    )
    def test_errors(self, data):
        with pytest.raises(PGMError):
            parse_pgm(data)


def _write_video(root, name, frames):
    d = root / name
    d.mkdir(parents=True)
    for stem, img in frames.items():
        write_pgm(d / f"{stem}.pgm", img)
    return d


class TestIngestMasks:
    def test_manifest(self, tmp_path):
        _write_video(tmp_path, "gt", {"in000001": GT_2x2, "in000002": GT_2x2})
        _write_video(tmp_path, "pred", {"in000001": PRED_2x2, "in000002": PRED_2x2})
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps([{"algorithm": "A", "video_id": "v", "category": "c", "gt_dir": "gt", "pred_dir": "pred"}]))
        (rec,) = ingest_masks(manifest)
        assert rec.payload == ConfusionCounts(2, 0, 2, 2)
        assert rec.size == 6

    def test_unmatched_stems(self, tmp_path):
        _write_video(tmp_path, "gt", {"a": GT_2x2})
        _write_video(tmp_path, "pred", {"b": PRED_2x2})
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps([{"algorithm": "A", "video_id": "v", "gt_dir": "gt", "pred_dir": "pred"}]))
        with pytest.raises(DataError, match=r"\['a'\].*\['b'\]"):
            ingest_masks(manifest)

    def test_mapping_override(self, tmp_path):
        _write_video(tmp_path, "gt", {"f": GT_2x2})
        _write_video(tmp_path, "pred", {"f": PRED_2x2})
        manifest = tmp_path / "m.json"
        entry = {"algorithm": "A", "video_id": "v", "gt_dir": "gt", "pred_dir": "pred", "mapping": {"threshold": 50}}
        manifest.write_text(json.dumps([entry]))
        (rec,) = ingest_masks(manifest)
        # the prediction 90 at the FN pixel now counts as positive
        assert rec.payload == ConfusionCounts(1, 0, 0, 2)

    def test_bad_manifest(self, tmp_path):
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps([{"algorithm": "A"}]))
        with pytest.raises(SchemaError):
            ingest_masks(manifest)

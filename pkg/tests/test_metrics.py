"""Tests for Dice/IoU, evaluation records and reports."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from engine.errors import DimensionMismatchError
from engine.metrics import (
    EvalRecord,
    Report,
    ReportRow,
    aggregate,
    dice,
    evaluate_pair,
    iou,
    percent_interval,
    read_records_csv,
    write_records_csv,
)
from tests.conftest import disk
from tests.oracles import count_dice, count_iou

masks = arrays(bool, (6, 6))


def _shifted_blocks():
    a = np.zeros((4, 4), dtype=bool)
    b = np.zeros((4, 4), dtype=bool)
    a[0:2, 0:2] = True
    b[0:2, 1:3] = True
    return a, b


def test_identical_and_disjoint_masks():
    a, b = _shifted_blocks()
    assert dice(a, a) == 1.0
    assert iou(a, a) == 1.0
    c = np.zeros_like(a)
    c[3, 3] = True
    assert dice(a, c) == 0.0
    assert iou(a, c) == 0.0


def test_shifted_block_counts():
    a, b = _shifted_blocks()
    assert dice(a, b) == pytest.approx(0.5)
    assert iou(a, b) == pytest.approx(2 / 6)


def test_both_empty_scores_one():
    empty = np.zeros((3, 3), dtype=bool)
    assert dice(empty, empty) == 1.0
    assert iou(empty, empty) == 1.0


def test_shape_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        dice(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionMismatchError):
        evaluate_pair(np.zeros((2, 2)), np.zeros((3, 2)))


@given(masks, masks)
def test_dice_is_symmetric(a, b):
    assert dice(a, b) == dice(b, a)


def test_scores_match_counting_oracle(rng):
    for _ in range(500):
        density = rng.uniform(0.0, 0.6)
        a = rng.random((64, 64)) < density
        b = rng.random((64, 64)) < density
        d, j = dice(a, b), iou(a, b)
        assert abs(d - count_dice(a, b)) <= 1e-12
        assert abs(j - count_iou(a, b)) <= 1e-12
        assert abs(d - 2 * j / (1 + j)) <= 1e-12


def test_evaluate_pair_on_perfect_prediction(disk_mask):
    record = evaluate_pair(disk_mask, disk_mask, image_id="disk")
    assert (record.dice_without, record.dice_with) == (1.0, 1.0)
    assert record.image_id == "disk"


def test_evaluate_pair_fills_interior_hole():
    gt = disk(16, 6.5)
    pred = gt.copy()
    pred[6:9, 6:9] = False
    record = evaluate_pair(pred, gt)
    assert record.dice_with == 1.0
    assert record.dice_with > record.dice_without
    assert record.dice_without == pytest.approx(2 * pred.sum() / (pred.sum() + gt.sum()))


def test_evaluate_pair_with_empty_prediction():
    gt = disk(8, 3.0)
    record = evaluate_pair(np.zeros_like(gt), gt)
    assert record.dice_without == 0.0
    assert record.dice_with == 0.0


def test_aggregate_single_record():
    row = aggregate([EvalRecord("x", 0.835, 0.841, 0.7, 0.71)], "UNet", "A")
    assert row.increase == pytest.approx(0.006)
    assert row.display_values() == ["UNet", "A", "0.835", "0.841", "0.006", "0.72"]


def test_aggregate_equal_records():
    records = [EvalRecord(str(i), 0.5, 0.5, 0.3, 0.3) for i in range(4)]
    row = aggregate(records, "m")
    assert row.increase == 0.0
    assert row.increase_pct == 0.0
    assert row.split_tag == "-"
    assert row.n_images == 4


def test_aggregate_is_order_independent(rng):
    records = [EvalRecord(str(i), *rng.uniform(0, 1, size=4).tolist()) for i in range(50)]
    forward = aggregate(records, "m")
    backward = aggregate(records[::-1], "m")
    assert (forward.mean_without, forward.mean_with) == (backward.mean_without, backward.mean_with)


def test_aggregate_empty_raises():
    with pytest.raises(ValueError):
        aggregate([], "m")


def test_transunet_split_a_row():
    row = ReportRow("TransUnet", "A", 0.550, 0.581)
    assert row.increase == pytest.approx(0.031)
    assert row.increase_pct == pytest.approx(5.636, abs=1e-3)
    low, high = percent_interval(0.550, 0.581)
    assert low <= 5.74 <= high


def test_zero_baseline_percent_is_undefined():
    row = ReportRow("m", "-", 0.0, 0.2)
    assert math.isnan(row.increase_pct)
    assert row.display_values()[-1] == "n/a"


@pytest.mark.parametrize("split_tag", ["E", "a", ""])
def test_report_row_rejects_unknown_split(split_tag):
    with pytest.raises(ValueError):
        ReportRow("m", split_tag, 0.5, 0.6)


@pytest.mark.parametrize("value", [-0.1, 1.1])
def test_record_scores_must_be_probabilities(value):
    with pytest.raises(ValueError):
        EvalRecord("x", value, 0.5, 0.5, 0.5)


def test_report_csv_and_text(tmp_path):
    report = Report()
    report.add(ReportRow("UNet++", "B", 0.851, 0.859))
    report.add(ReportRow("UNet", "A", 0.835, 0.841))
    path = tmp_path / "report.csv"
    report.to_csv(path)

    lines = path.read_bytes().decode("utf-8").split("\n")
    assert lines[0] == "model,split,without,with,increase,increase_pct"
    assert lines[1] == "UNet,A,0.835,0.841,0.006,0.72"
    assert b"\r\n" not in path.read_bytes()

    back = Report.from_csv(path)
    assert [(r.model_tag, r.split_tag) for r in back.rows] == [("UNet", "A"), ("UNet++", "B")]

    text = report.to_text().splitlines()
    assert text[0].split()[:2] == ["Model", "Split"]
    assert text[2].split() == ["UNet", "A", "0.835", "0.841", "0.006", "0.72"]


def test_records_csv_round_trip(tmp_path):
    records = [EvalRecord("img_001", 0.8, 0.85, 0.66, 0.74), EvalRecord("NA", 0.1, 0.2, 0.05, 0.1)]
    path = tmp_path / "records.csv"
    write_records_csv(records, path)
    back = read_records_csv(path)
    assert [r.image_id for r in back] == ["img_001", "NA"]
    assert back[0].dice_with == pytest.approx(0.85, abs=1e-12)

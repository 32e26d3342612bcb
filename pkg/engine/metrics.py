"""
Segmentation Metrics and Reports

Dice / IoU scores, per-image evaluation with and without CovHuSeg, and the
report table (model, split, without, with, increase, increase %).

Conventions:
- Dice = 2|A ∩ B| / (|A| + |B|), IoU = |A ∩ B| / |A ∪ B|; both are 1.0 when
  both masks are empty.
- Report means are unweighted per-image (macro) averages.
- The percent column is computed from unrounded means and rounded only for
  display: scores and increase to 3 decimals, percent to 2.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from engine.mask_io import as_mask
from engine.covhuseg import PipelineConfig, covhuseg
from engine.errors import DimensionMismatchError

logger = logging.getLogger(__name__)

SPLIT_TAGS = ('A', 'B', 'C', 'D')
NO_SPLIT = '-'

REPORT_COLUMNS = ['model', 'split', 'without', 'with', 'increase', 'increase_pct']
RECORD_COLUMNS = ['image_id', 'dice_without', 'dice_with', 'iou_without', 'iou_with']

SCORE_DECIMALS = 3
PERCENT_DECIMALS = 2


@dataclass
class EvalRecord:
    """Scores of one prediction against its ground truth"""
    image_id: str
    dice_without: float
    dice_with: float
    iou_without: float
    iou_with: float

    def __post_init__(self):
        for name in RECORD_COLUMNS[1:]:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")

    @property
    def dice_gain(self) -> float:
        return self.dice_with - self.dice_without


@dataclass
class ReportRow:
    """One model x split line of the report"""
    model_tag: str
    split_tag: str
    mean_without: float
    mean_with: float
    n_images: int = 0

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS + (NO_SPLIT,):
            raise ValueError(
                f"split_tag must be one of {SPLIT_TAGS} or '{NO_SPLIT}', got {self.split_tag!r}"
            )

    @property
    def increase(self) -> float:
        return self.mean_with - self.mean_without

    @property
    def increase_pct(self) -> float:
        """Relative increase in percent; NaN when mean_without is 0"""
        if self.mean_without > 0:
            return 100.0 * self.increase / self.mean_without
        return float('nan')

    def display_values(self) -> List[str]:
        pct = self.increase_pct
        return [
            self.model_tag,
            self.split_tag,
            f"{self.mean_without:.{SCORE_DECIMALS}f}",
            f"{self.mean_with:.{SCORE_DECIMALS}f}",
            f"{self.increase:.{SCORE_DECIMALS}f}",
            f"{pct:.{PERCENT_DECIMALS}f}" if not math.isnan(pct) else 'n/a',
        ]


def _check_shapes(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a, b = as_mask(a), as_mask(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Mask shapes differ: {a.shape} vs {b.shape}")
    return a, b


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """
    Dice coefficient of two masks.

    Raises:
        DimensionMismatchError: If the masks have different shapes
    """
    a, b = _check_shapes(a, b)
    total = int(np.count_nonzero(a)) + int(np.count_nonzero(b))
    if total == 0:
        return 1.0
    return 2 * int(np.count_nonzero(a & b)) / total


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two masks (1.0 when both are empty)."""
    a, b = _check_shapes(a, b)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a & b)) / union


def evaluate_pair(
    pred: np.ndarray,
    gt: np.ndarray,
    config: Optional[PipelineConfig] = None,
    image_id: str = ''
) -> EvalRecord:
    """
    Score a prediction before and after CovHuSeg.

    Args:
        pred: Predicted mask
        gt: Ground-truth mask of the same shape
        config: Pipeline configuration used for the "with" column
        image_id: Identifier carried into the record

    Returns:
        EvalRecord with Dice and IoU without/with CovHuSeg

    Raises:
        DimensionMismatchError: If the masks have different shapes
    """
    pred, gt = _check_shapes(pred, gt)
    processed = covhuseg(pred, config)
    return EvalRecord(
        image_id=image_id,
        dice_without=dice(pred, gt),
        dice_with=dice(processed, gt),
        iou_without=iou(pred, gt),
        iou_with=iou(processed, gt),
    )


def aggregate(records: Sequence[EvalRecord], model_tag: str, split_tag: str = NO_SPLIT) -> ReportRow:
    """
    Average per-image records into a report row.

    The sums use math.fsum, so the result does not depend on record order.

    Raises:
        ValueError: If records is empty
    """
    if not records:
        raise ValueError("Cannot aggregate an empty list of records")
    n = len(records)
    return ReportRow(
        model_tag=model_tag,
        split_tag=split_tag,
        mean_without=math.fsum(r.dice_without for r in records) / n,
        mean_with=math.fsum(r.dice_with for r in records) / n,
        n_images=n,
    )


def percent_interval(without: float, with_: float, decimals: int = SCORE_DECIMALS) -> Tuple[float, float]:
    """
    Range of relative increases consistent with rounded scores.

    Given two scores printed with ``decimals`` decimals, return the smallest
    and largest ``100 * (with - without) / without`` over all underlying
    values that round to them.
    """
    half = 0.5 * 10 ** -decimals
    low_without, high_without = without - half, without + half
    low_gain = (with_ - half) - high_without
    high_gain = (with_ + half) - low_without
    lowest = 100.0 * low_gain / (high_without if low_gain >= 0 else low_without)
    highest = 100.0 * high_gain / (low_without if high_gain >= 0 else high_without)
    return lowest, highest


@dataclass
class Report:
    """Collection of report rows with CSV and plain-text rendering"""
    rows: List[ReportRow] = field(default_factory=list)

    def add(self, row: ReportRow) -> None:
        self.rows.append(row)

    def sorted_rows(self) -> List[ReportRow]:
        return sorted(self.rows, key=lambda r: (r.model_tag, r.split_tag))

    def to_frame(self) -> pd.DataFrame:
        """Display-rounded rows as a DataFrame of strings."""
        return pd.DataFrame(
            [row.display_values() for row in self.sorted_rows()],
            columns=REPORT_COLUMNS,
        )

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator='\n')
        logger.info("Wrote report with %d row(s) to %s", len(self.rows), path)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'Report':
        """Read a report CSV back (values at their displayed precision)."""
        frame = pd.read_csv(path, dtype={'model': str, 'split': str}, keep_default_na=False)
        rows = [
            ReportRow(str(r['model']), str(r['split']), float(r['without']), float(r['with']))
            for _, r in frame.iterrows()
        ]
        return cls(rows)

    def to_text(self) -> str:
        """Aligned plain-text table in the published column order."""
        header = ['Model', 'Split', 'Without CovHuSeg', 'With CovHuSeg', 'Increase', 'Increase %']
        body = [row.display_values() for row in self.sorted_rows()]
        widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]

        def fmt(line: List[str]) -> str:
            cells = [line[0].ljust(widths[0]), line[1].ljust(widths[1])]
            cells += [cell.rjust(width) for cell, width in zip(line[2:], widths[2:])]
            return "  ".join(cells)

        rule = "-" * len(fmt(header))
        return "\n".join([fmt(header), rule] + [fmt(line) for line in body])


def records_frame(records: Iterable[EvalRecord]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in records], columns=RECORD_COLUMNS)


def write_records_csv(records: Iterable[EvalRecord], path: Union[str, Path]) -> None:
    """Per-image scores, one row per image, full precision."""
    records_frame(records).to_csv(path, index=False, lineterminator='\n', float_format='%.12f')


def read_records_csv(path: Union[str, Path]) -> List[EvalRecord]:
    frame = pd.read_csv(path, dtype={'image_id': str}, keep_default_na=False)
    missing = set(RECORD_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
    return [
        EvalRecord(
            image_id=str(r['image_id']),
            dice_without=float(r['dice_without']),
            dice_with=float(r['dice_with']),
            iou_without=float(r['iou_without']),
            iou_with=float(r['iou_with']),
        )
        for _, r in frame.iterrows()
    ]

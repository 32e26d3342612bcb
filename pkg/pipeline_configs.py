"""
CovHuSeg Pipeline Configurations

Named pipeline presets plus the published reference tables: Dice of four
segmentation networks on the kidney-pathology test set, without and with
CovHuSeg, for training splits A-D, on the normal and on the Gaussian-noise
test images.
"""

from dataclasses import dataclass
from typing import Dict, List

from engine.covhuseg import PipelineConfig
from engine.hull import HullAlgorithm
from engine.labeling import Connectivity
from engine.metrics import ReportRow, percent_interval

# Pipeline presets
PIPELINE_PRESETS: Dict[str, PipelineConfig] = {
    "default": PipelineConfig(),

    "quickhull": PipelineConfig(
        hull_algorithm=HullAlgorithm.QUICKHULL,
    ),

    "four_connected": PipelineConfig(
        connectivity=Connectivity.FOUR,
    ),

    "despeckle": PipelineConfig(
        min_component_area=16,
    ),

    "fixed_point": PipelineConfig(
        iterate_to_fixed_point=True,
    ),
}


def get_pipeline_config(name: str) -> PipelineConfig:
    """
    Get a named pipeline configuration.

    Args:
        name: Preset name (e.g., "default", "quickhull", "despeckle")

    Returns:
        PipelineConfig for the preset

    Raises:
        KeyError: If the preset is not found
    """
    if name not in PIPELINE_PRESETS:
        available = ", ".join(PIPELINE_PRESETS.keys())
        raise KeyError(f"Preset '{name}' not found. Available presets: {available}")

    return PIPELINE_PRESETS[name]


def list_all_presets() -> list:
    """Get list of all available preset names."""
    return sorted(PIPELINE_PRESETS.keys())


@dataclass(frozen=True)
class PublishedRow:
    """One printed table line: scores and increase at 3 decimals, percent at 2"""
    model: str
    split: str
    without: float
    with_: float
    increase: float
    increase_pct: float

    def as_report_row(self) -> ReportRow:
        return ReportRow(self.model, self.split, self.without, self.with_)


def _rows(model: str, values: List[tuple]) -> List[PublishedRow]:
    return [PublishedRow(model, split, *numbers) for split, numbers in zip("ABCD", values)]


PUBLISHED_TABLES: Dict[str, List[PublishedRow]] = {
    "normal": (
        _rows("UNet", [(0.835, 0.841, 0.006, 0.74), (0.858, 0.863, 0.005, 0.55),
                       (0.843, 0.850, 0.007, 0.78), (0.848, 0.853, 0.005, 0.60)])
        + _rows("UNet++", [(0.837, 0.842, 0.006, 0.67), (0.851, 0.859, 0.008, 0.90),
                           (0.837, 0.844, 0.007, 0.79), (0.853, 0.858, 0.005, 0.62)])
        + _rows("UNet3+", [(0.708, 0.720, 0.012, 1.69), (0.787, 0.800, 0.013, 1.66),
                           (0.715, 0.733, 0.018, 2.49), (0.789, 0.797, 0.008, 1.05)])
        + _rows("TransUnet", [(0.550, 0.581, 0.032, 5.74), (0.687, 0.711, 0.023, 3.42),
                              (0.569, 0.595, 0.026, 4.56), (0.682, 0.702, 0.020, 2.89)])
    ),
    "noisy": (
        _rows("UNet", [(0.800, 0.809, 0.010, 1.20), (0.821, 0.828, 0.008, 0.93),
                       (0.807, 0.818, 0.011, 1.35), (0.815, 0.822, 0.008, 0.97)])
        + _rows("UNet++", [(0.797, 0.807, 0.009, 1.15), (0.812, 0.823, 0.012, 1.46),
                           (0.801, 0.812, 0.011, 1.32), (0.825, 0.834, 0.009, 1.06)])
        + _rows("UNet3+", [(0.579, 0.593, 0.014, 2.42), (0.697, 0.717, 0.020, 2.87),
                           (0.571, 0.595, 0.024, 4.29), (0.696, 0.711, 0.016, 2.23)])
        + _rows("TransUnet", [(0.260, 0.287, 0.027, 10.34), (0.481, 0.514, 0.033, 6.76),
                              (0.287, 0.317, 0.030, 10.40), (0.550, 0.581, 0.031, 5.56)])
    ),
}

# Printed values carry their own rounding on top of the rounded scores
INCREASE_TOLERANCE = 0.001 + 1e-9
PERCENT_ROUNDING = 0.005


@dataclass(frozen=True)
class PublishedCheck:
    """Consistency of a printed row with 3-decimal rounding of its scores"""
    row: PublishedRow
    recomputed_increase: float
    recomputed_pct: float
    pct_low: float
    pct_high: float

    @property
    def increase_ok(self) -> bool:
        return abs(self.row.increase - self.recomputed_increase) <= INCREASE_TOLERANCE

    @property
    def pct_ok(self) -> bool:
        return self.pct_low - PERCENT_ROUNDING <= self.row.increase_pct <= self.pct_high + PERCENT_ROUNDING

    @property
    def pct_deviation(self) -> float:
        """Printed minus recomputed percent, in percentage points"""
        return self.row.increase_pct - self.recomputed_pct

    @property
    def consistent(self) -> bool:
        return self.increase_ok and self.pct_ok


def check_published_row(row: PublishedRow) -> PublishedCheck:
    """Recompute a printed row from its printed scores."""
    recomputed = row.as_report_row()
    low, high = percent_interval(row.without, row.with_)
    return PublishedCheck(
        row=row,
        recomputed_increase=recomputed.increase,
        recomputed_pct=recomputed.increase_pct,
        pct_low=low,
        pct_high=high,
    )


def print_published_tables():
    """Print the reference tables with recomputed columns."""
    for test_set, rows in PUBLISHED_TABLES.items():
        print("\n" + "=" * 80)
        print(f"PUBLISHED DICE - {test_set.upper()} TEST SET")
        print("=" * 80)
        print(f"{'Model':<10} {'Split':<5} {'Without':>8} {'With':>8} {'Incr.':>7} "
              f"{'Incr. %':>8} {'Recomp. %':>10} {'Consistent':>11}")
        print("-" * 80)
        for row in rows:
            check = check_published_row(row)
            print(f"{row.model:<10} {row.split:<5} {row.without:>8.3f} {row.with_:>8.3f} "
                  f"{row.increase:>7.3f} {row.increase_pct:>8.2f} {check.recomputed_pct:>10.2f} "
                  f"{'yes' if check.consistent else 'NO':>11}")
    print("\n" + "=" * 80)

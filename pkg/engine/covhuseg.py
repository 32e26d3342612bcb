"""
CovHuSeg Post-Processing Pipeline

This is the main orchestrator: it takes the output mask of a segmentation
model and replaces every connected component by its filled convex hull.

The four steps per component:
1. take the model's output mask (thresholding a probability map if needed)
2. extract the component's contour (its boundary pixels)
3. build the convex hull of that contour
4. fill the hull back into a new mask
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from engine.mask_io import DEFAULT_THRESHOLD, as_mask, threshold
from engine.hull import HullAlgorithm, convex_hull
from engine.labeling import (
    Connectivity,
    boundary_mask,
    component_areas,
    component_slices,
    label,
)
from engine.raster import paint_convex

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """Free parameters of the four CovHuSeg steps"""
    connectivity: Connectivity = Connectivity.EIGHT
    hull_algorithm: HullAlgorithm = HullAlgorithm.MONOTONE_CHAIN
    min_component_area: int = 0  # 0 keeps every component
    threshold: float = DEFAULT_THRESHOLD  # only used for probability maps
    iterate_to_fixed_point: bool = False

    def __post_init__(self):
        self.connectivity = Connectivity(self.connectivity)
        self.hull_algorithm = HullAlgorithm(self.hull_algorithm)
        if self.min_component_area < 0:
            raise ValueError(
                f"min_component_area must be non-negative, got {self.min_component_area}"
            )
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be within [0, 1], got {self.threshold}")


@dataclass
class PipelineStats:
    """What one pipeline run did to a mask"""
    n_components: int
    n_dropped: int
    pixels_in: int
    pixels_out: int
    iterations: int

    @property
    def pixels_added(self) -> int:
        return self.pixels_out - self.pixels_in


class CovHuSegPipeline:
    """
    Convex-hull post-processing for binary segmentation masks.

    Each connected component is hulled independently. When the filled hulls
    of two components overlap, the output keeps their plain union; set
    ``iterate_to_fixed_point`` to re-run the steps until nothing changes.
    Components smaller than ``min_component_area`` are removed entirely.
    """

    def __init__(self, config: Optional[PipelineConfig] = None):
        """
        Initialize the pipeline.

        Args:
            config: Pipeline configuration (defaults to PipelineConfig())
        """
        self.config = config or PipelineConfig()

    def process(self, mask: np.ndarray) -> np.ndarray:
        """Run CovHuSeg on a binary mask and return the new mask."""
        return self.process_with_stats(mask)[0]

    def process_with_stats(self, mask: np.ndarray) -> Tuple[np.ndarray, PipelineStats]:
        """
        Run CovHuSeg and report what changed.

        Args:
            mask: Binary mask of any size, including 0x0

        Returns:
            Tuple of (output mask, PipelineStats)
        """
        mask = as_mask(mask)
        result, n_components, n_dropped = self._single_pass(mask)
        iterations = 1

        if self.config.iterate_to_fixed_point:
            # Each changing pass merges at least two components
            max_passes = n_components + 1
            while iterations < max_passes:
                following, _, _ = self._single_pass(result)
                iterations += 1
                if np.array_equal(following, result):
                    break
                result = following
            else:
                if n_components:
                    logger.warning("No fixed point after %d passes", iterations)

        stats = PipelineStats(
            n_components=n_components,
            n_dropped=n_dropped,
            pixels_in=int(mask.sum()),
            pixels_out=int(result.sum()),
            iterations=iterations,
        )
        logger.debug(
            "CovHuSeg: %d components (%d dropped), %+d pixels, %d pass(es)",
            stats.n_components, stats.n_dropped, stats.pixels_added, stats.iterations,
        )
        return result, stats

    def process_probmap(self, image: np.ndarray) -> np.ndarray:
        """Threshold a probability map with config.threshold, then run CovHuSeg."""
        return self.process(threshold(image, self.config.threshold))

    def _single_pass(self, mask: np.ndarray) -> Tuple[np.ndarray, int, int]:
        labeled = label(mask, self.config.connectivity)
        areas = component_areas(labeled)
        result = np.zeros_like(mask, dtype=bool)
        n_dropped = 0

        for index, (rows, cols) in enumerate(component_slices(labeled)):
            if areas[index] < self.config.min_component_area:
                n_dropped += 1
                continue

            crop = labeled.labels[rows, cols] == index + 1
            ys, xs = np.nonzero(boundary_mask(crop))
            contour = zip((xs + cols.start).tolist(), (ys + rows.start).tolist())
            hull = convex_hull(contour, self.config.hull_algorithm)

            paint_convex(result, hull)
            result[rows, cols] |= crop

        return result, labeled.n_components, n_dropped


def covhuseg(mask: np.ndarray, config: Optional[PipelineConfig] = None) -> np.ndarray:
    """
    Apply CovHuSeg to a mask.

    Args:
        mask: Binary mask
        config: Pipeline configuration

    Returns:
        Mask of the same dimensions with every retained component replaced by
        its filled convex hull
    """
    return CovHuSegPipeline(config).process(mask)


def covhuseg_with_stats(
    mask: np.ndarray,
    config: Optional[PipelineConfig] = None
) -> Tuple[np.ndarray, PipelineStats]:
    return CovHuSegPipeline(config).process_with_stats(mask)


def covhuseg_probmap(image: np.ndarray, config: Optional[PipelineConfig] = None) -> np.ndarray:
    """Equivalent to covhuseg(threshold(image, config.threshold), config)."""
    return CovHuSegPipeline(config).process_probmap(image)

"""
Connected Component Labeling

Splits a binary mask into connected components and extracts each component's
boundary pixels, the unordered "contour" the hull step consumes.

Components are numbered 1..n in raster order of their first pixel (topmost,
then leftmost), so labelings are stable across runs and platforms.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Set, Tuple

import numpy as np
from scipy import ndimage

from engine.mask_io import as_mask
from engine.errors import GeometryError

logger = logging.getLogger(__name__)

Point = Tuple[int, int]

# 4-neighbourhood used for boundary extraction regardless of labeling connectivity
FOUR_NEIGHBORHOOD = ndimage.generate_binary_structure(2, 1)
EIGHT_NEIGHBORHOOD = ndimage.generate_binary_structure(2, 2)


class Connectivity(Enum):
    """Pixel adjacency used to group foreground pixels"""
    FOUR = "four"
    EIGHT = "eight"

    @property
    def structure(self) -> np.ndarray:
        """scipy.ndimage structuring element for this adjacency"""
        return FOUR_NEIGHBORHOOD if self is Connectivity.FOUR else EIGHT_NEIGHBORHOOD


@dataclass(frozen=True)
class LabeledMask:
    """Per-pixel component ids: 0 is background, 1..n_components are components"""
    labels: np.ndarray
    n_components: int

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def component(self, component_id: int) -> np.ndarray:
        """Full-size boolean mask of one component."""
        self._check_id(component_id)
        return self.labels == component_id

    def _check_id(self, component_id: int) -> None:
        if not 1 <= component_id <= self.n_components:
            raise GeometryError(
                f"Component id must be within [1, {self.n_components}], got {component_id}"
            )


def label(mask: np.ndarray, conn: Connectivity = Connectivity.EIGHT) -> LabeledMask:
    """
    Label the connected components of a mask.

    Args:
        mask: Binary mask
        conn: Pixel adjacency (default eight)

    Returns:
        LabeledMask with components numbered in raster order of first pixel
    """
    mask = as_mask(mask)
    if mask.size == 0:
        return LabeledMask(np.zeros(mask.shape, dtype=np.int32), 0)

    labels, n_components = ndimage.label(mask, structure=conn.structure)
    labels = labels.astype(np.int32, copy=False)

    if n_components > 1:
        # Renumber by first occurrence in a row-major scan
        flat = labels.ravel()
        ids, first_index = np.unique(flat, return_index=True)
        keep = ids > 0
        order = ids[keep][np.argsort(first_index[keep], kind='stable')]
        remap = np.zeros(n_components + 1, dtype=np.int32)
        remap[order] = np.arange(1, n_components + 1, dtype=np.int32)
        labels = remap[labels]

    return LabeledMask(labels, int(n_components))


def component_slices(labeled: LabeledMask) -> List[Tuple[slice, slice]]:
    """Bounding-box slices (rows, cols) of each component, indexed by id - 1."""
    if labeled.n_components == 0:
        return []
    return list(ndimage.find_objects(labeled.labels, max_label=labeled.n_components))


def component_areas(labeled: LabeledMask) -> np.ndarray:
    """Pixel count of each component, indexed by id - 1."""
    counts = np.bincount(labeled.labels.ravel(), minlength=labeled.n_components + 1)
    return counts[1:]


def boundary_mask(component: np.ndarray) -> np.ndarray:
    """
    Boundary pixels of a single-component mask.

    A pixel is on the boundary when it touches the array border or has a
    4-neighbour outside the component. Works on bounding-box crops as well:
    a pixel on the crop edge has a 4-neighbour outside the crop, which can
    never belong to the component.
    """
    interior = ndimage.binary_erosion(component, structure=FOUR_NEIGHBORHOOD, border_value=0)
    return component & ~interior


def boundary_pixels(labeled: LabeledMask, component_id: int) -> Set[Point]:
    """
    Boundary pixels of one component as (x, y) points.

    Args:
        labeled: Labeled mask
        component_id: Component id in [1, n_components]

    Returns:
        Set of integer (x, y) points; the convex hull of this set equals the
        convex hull of all the component's pixels

    Raises:
        GeometryError: If the id is out of range
    """
    labeled._check_id(component_id)
    rows, cols = component_slices(labeled)[component_id - 1]
    crop = labeled.labels[rows, cols] == component_id
    ys, xs = np.nonzero(boundary_mask(crop))
    return set(zip((xs + cols.start).tolist(), (ys + rows.start).tolist()))

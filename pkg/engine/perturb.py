"""
Perturbation and Synthetic Data

Generates the noisy test images and the synthetic convex-anomaly masks used
to check CovHuSeg without trained models:

- add_gaussian_noise: additive N(0, std^2) noise on [0, 1] intensities, then
  clamped back to [0, 1]
- gen_convex_mask: canvases of well-separated convex "glomerulus" blobs
- degrade: subtractive damage (interior holes, boundary erosion, pixel
  dropout) plus optional additive speckle

Every random draw comes from ``numpy.random.Generator(PCG64(seed))``; normal
variates use numpy's ziggurat sampler. Outputs are pure functions of the
inputs and the seed.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np
from scipy import ndimage

from engine.mask_io import as_image, as_mask
from engine.errors import SynthesisError
from engine.hull import ConvexPolygon, monotone_chain
from engine.labeling import FOUR_NEIGHBORHOOD, Connectivity, boundary_mask, label
from engine.raster import fill_convex

logger = logging.getLogger(__name__)

DEFAULT_NOISE_STD = 0.28

BBox = Tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator shared by every routine in this module."""
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, trial: int) -> int:
    """Per-trial seed: seed XOR trial index."""
    return seed ^ trial


# --- Gaussian noise --------------------------------------------------------

def noise_field(shape: Tuple[int, ...], std: float, seed: int) -> np.ndarray:
    """Raw (pre-clamp) N(0, std^2) samples drawn for an image of this shape."""
    if std < 0:
        raise ValueError(f"Noise std must be non-negative, got {std}")
    return make_rng(seed).normal(0.0, std, size=shape)


def add_gaussian_noise(image: np.ndarray, std: float = DEFAULT_NOISE_STD, seed: int = 0) -> np.ndarray:
    """
    Add clamped Gaussian noise to a gray image.

    Args:
        image: Gray image with intensities in [0, 1]
        std: Noise standard deviation on the [0, 1] scale
        seed: Generator seed

    Returns:
        New image ``clip(image + noise, 0, 1)``; clamping biases pixels near
        0 and 1 toward the interior

    Raises:
        ValueError: If std is negative
    """
    image = as_image(image)
    if std < 0:
        raise ValueError(f"Noise std must be non-negative, got {std}")
    if std == 0:
        return image.copy()
    return np.clip(image + noise_field(image.shape, std, seed), 0.0, 1.0)


# --- Synthetic convex masks ------------------------------------------------

class SynthShape(Enum):
    """Shape family of synthetic components"""
    ELLIPSE = "ellipse"
    RANDOM_CONVEX_POLYGON = "random_convex_polygon"


@dataclass
class SynthSpec:
    """Synthetic canvas description; size_range is the (min, max) radius in pixels"""
    shape: SynthShape = SynthShape.ELLIPSE
    size_range: Tuple[int, int] = (4, 12)
    count_per_image: int = 1
    canvas: Tuple[int, int] = (64, 64)  # width, height
    seed: int = 0
    max_retries: int = 200

    def __post_init__(self):
        self.shape = SynthShape(self.shape)
        self.size_range = tuple(int(v) for v in self.size_range)
        self.canvas = tuple(int(v) for v in self.canvas)
        low, high = self.size_range
        if not 1 <= low <= high:
            raise ValueError(f"size_range must satisfy 1 <= min <= max, got {self.size_range}")
        if self.count_per_image < 1:
            raise ValueError(f"count_per_image must be >= 1, got {self.count_per_image}")
        if 2 * low + 1 > min(self.canvas):
            raise ValueError(
                f"Canvas {self.canvas[0]}x{self.canvas[1]} cannot hold a component of radius {low}"
            )
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be >= 1, got {self.max_retries}")


def _ellipse_blob(rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    low, high = spec.size_range
    width, height = spec.canvas
    rx = int(rng.integers(low, min(high, (width - 1) // 2) + 1))
    ry = int(rng.integers(low, min(high, (height - 1) // 2) + 1))
    ys, xs = np.mgrid[-ry:ry + 1, -rx:rx + 1]
    # Exact lattice test of the ellipse centred on a pixel
    return ry * ry * xs * xs + rx * rx * ys * ys <= rx * rx * ry * ry


def _polygon_blob(rng: np.random.Generator, spec: SynthSpec) -> np.ndarray:
    low, high = spec.size_range
    width, height = spec.canvas
    for _ in range(spec.max_retries):
        rx = int(rng.integers(low, min(high, (width - 1) // 2) + 1))
        ry = int(rng.integers(low, min(high, (height - 1) // 2) + 1))
        n_points = int(rng.integers(3, 9))
        points = np.column_stack([
            rng.integers(0, 2 * rx + 1, size=n_points),
            rng.integers(0, 2 * ry + 1, size=n_points),
        ]).tolist()
        hull = monotone_chain(points)
        if hull.kind != 'polygon':
            continue
        blob = fill_convex(hull, 2 * rx + 1, 2 * ry + 1)
        if label(blob, Connectivity.EIGHT).n_components != 1:
            continue
        rows = np.flatnonzero(blob.any(axis=1))
        cols = np.flatnonzero(blob.any(axis=0))
        return blob[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    raise SynthesisError(f"No connected convex polygon found in {spec.max_retries} attempts")


def _separated(a: BBox, b: BBox) -> bool:
    # At least one empty pixel between the boxes in x or in y
    return a[2] + 1 < b[0] or b[2] + 1 < a[0] or a[3] + 1 < b[1] or b[3] + 1 < a[1]


def gen_convex_mask(spec: SynthSpec) -> Tuple[np.ndarray, List[ConvexPolygon]]:
    """
    Draw a canvas of pairwise separated convex components.

    Each component is exactly the lattice points of a convex region, is
    8-connected, and its bounding box keeps at least one background pixel
    between it and every other component's box, so hulls are pairwise
    disjoint and CovHuSeg leaves the mask unchanged.

    Args:
        spec: Synthesis parameters

    Returns:
        Tuple of (mask, hull of each component in placement order)

    Raises:
        SynthesisError: If a component cannot be placed within max_retries
    """
    rng = make_rng(spec.seed)
    width, height = spec.canvas
    mask = np.zeros((height, width), dtype=bool)
    placed: List[BBox] = []
    hulls: List[ConvexPolygon] = []

    for index in range(spec.count_per_image):
        for _ in range(spec.max_retries):
            if spec.shape is SynthShape.ELLIPSE:
                blob = _ellipse_blob(rng, spec)
            else:
                blob = _polygon_blob(rng, spec)
            blob_h, blob_w = blob.shape
            x0 = int(rng.integers(0, width - blob_w + 1))
            y0 = int(rng.integers(0, height - blob_h + 1))
            box = (x0, y0, x0 + blob_w - 1, y0 + blob_h - 1)
            if all(_separated(box, other) for other in placed):
                break
        else:
            raise SynthesisError(
                f"Could not place component {index + 1} of {spec.count_per_image} "
                f"on a {width}x{height} canvas after {spec.max_retries} attempts"
            )

        mask[box[1]:box[3] + 1, box[0]:box[2] + 1] |= blob
        placed.append(box)
        ys, xs = np.nonzero(boundary_mask(blob))
        hulls.append(monotone_chain(zip((xs + x0).tolist(), (ys + y0).tolist())))

    return mask, hulls


# --- Degradation -----------------------------------------------------------

@dataclass
class DegradeSpec:
    """Damage applied to a mask; all but speckle only remove foreground"""
    hole_count: int = 0
    hole_radius_range: Tuple[int, int] = (1, 3)
    boundary_erosion_prob: float = 0.0
    pixel_dropout_prob: float = 0.0
    speckle_prob: float = 0.0  # additive; breaks the subset guarantee
    seed: int = 0

    def __post_init__(self):
        self.hole_radius_range = tuple(int(v) for v in self.hole_radius_range)
        low, high = self.hole_radius_range
        if self.hole_count < 0:
            raise ValueError(f"hole_count must be non-negative, got {self.hole_count}")
        if not 0 <= low <= high:
            raise ValueError(f"hole_radius_range must satisfy 0 <= min <= max, got {self.hole_radius_range}")
        for name in ('boundary_erosion_prob', 'pixel_dropout_prob', 'speckle_prob'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value}")

    @property
    def is_subtractive(self) -> bool:
        return self.speckle_prob == 0.0


def _punch_holes(mask: np.ndarray, spec: DegradeSpec, rng: np.random.Generator) -> np.ndarray:
    # Distance to the nearest background pixel, the image outside counting as background
    depth = ndimage.distance_transform_edt(np.pad(mask, 1))[1:-1, 1:-1]
    out = mask.copy()
    low, high = spec.hole_radius_range

    for _ in range(spec.hole_count):
        radius = int(rng.integers(low, high + 1))
        # Centres this deep keep every hole pixel off the original boundary
        centres = np.argwhere(depth > radius + 1)
        if len(centres) == 0:
            logger.debug("No interior room for a hole of radius %d", radius)
            continue
        cy, cx = centres[int(rng.integers(len(centres)))]
        y0, y1 = max(cy - radius, 0), min(cy + radius, mask.shape[0] - 1)
        x0, x1 = max(cx - radius, 0), min(cx + radius, mask.shape[1] - 1)
        ys, xs = np.mgrid[y0:y1 + 1, x0:x1 + 1]
        disk = (ys - cy) ** 2 + (xs - cx) ** 2 <= radius * radius
        out[y0:y1 + 1, x0:x1 + 1] &= ~disk
    return out


def degrade(mask: np.ndarray, spec: DegradeSpec) -> np.ndarray:
    """
    Damage a mask deterministically.

    Applied in order: interior holes, boundary erosion, pixel dropout,
    additive speckle. Holes are centred deep enough that no pixel on the
    original 4-neighbour boundary is removed, so they never change the hull.

    Args:
        mask: Binary mask
        spec: Degradation parameters (seeded)

    Returns:
        New mask; a subset of the input whenever spec.is_subtractive
    """
    mask = as_mask(mask)
    rng = make_rng(spec.seed)
    out = mask.copy()

    if spec.hole_count:
        out = _punch_holes(out, spec, rng)

    if spec.boundary_erosion_prob > 0:
        edge = out & ~ndimage.binary_erosion(out, structure=FOUR_NEIGHBORHOOD, border_value=0)
        out[edge & (rng.random(out.shape) < spec.boundary_erosion_prob)] = False

    if spec.pixel_dropout_prob > 0:
        out[out & (rng.random(out.shape) < spec.pixel_dropout_prob)] = False

    if spec.speckle_prob > 0:
        out |= rng.random(out.shape) < spec.speckle_prob

    return out

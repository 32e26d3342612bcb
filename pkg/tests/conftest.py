"""Shared fixtures for the CovHuSeg test suite."""

import numpy as np
import pytest

from engine.mask_io import save_mask


def disk(size: int, radius: float, centre=None) -> np.ndarray:
    """Lattice disk: pixels whose centre lies within radius of centre."""
    cy, cx = centre if centre is not None else ((size - 1) / 2, (size - 1) / 2)
    ys, xs = np.mgrid[0:size, 0:size]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2


def random_mask(rng: np.random.Generator, height: int = 64, width: int = 64, density: float = 0.3) -> np.ndarray:
    """Blobby random mask: sparse seeds grown by a 3x3 neighbourhood."""
    seeds = rng.random((height, width)) < density * 0.1
    padded = np.pad(seeds, 1)
    grown = np.zeros_like(seeds)
    for dy in range(3):
        for dx in range(3):
            grown |= padded[dy:dy + height, dx:dx + width]
    return grown & (rng.random((height, width)) < 0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def disk_mask():
    return disk(32, 10.0)


@pytest.fixture
def mask_dir(tmp_path):
    """Directory with three valid masks a.png, b.png, c.pgm."""
    directory = tmp_path / "masks"
    directory.mkdir()
    holed = disk(16, 6.0)
    holed[6:9, 6:9] = False
    save_mask(holed, directory / "a.png")
    save_mask(disk(16, 4.0), directory / "b.png")
    two = np.zeros((12, 12), dtype=bool)
    two[1:4, 1:4] = True
    two[7:11, 6:11] = True
    save_mask(two, directory / "c.pgm")
    return directory

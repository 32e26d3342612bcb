"""
Mask and Image I/O

This module loads and saves binary masks and grayscale images in two
bit-exact containers: 8-bit grayscale PNG and binary PGM (P5).

Conventions used across the toolkit:
- A mask is a 2-D ``bool`` numpy array of shape (height, width).
- A gray image is a 2-D ``float64`` array of intensities in [0.0, 1.0].
- Pixel (x, y) is column x, row y, origin top-left, i.e. ``mask[y, x]``.
- A stored 8-bit value is foreground iff it is >= 128.
"""

import io
import logging
import re
from pathlib import Path
from typing import List, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from engine.errors import MaskFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FOREGROUND_LEVEL = 128
DEFAULT_THRESHOLD = 0.5
MASK_EXTENSIONS = ('.png', '.pgm')

PNG_MAGIC = b'\x89PNG\r\n\x1a\n'
PGM_MAGIC = b'P5'

_PILLOW_FORMATS = {'PNG': 'PNG', 'PGM': 'PPM'}
_EMPTY_PGM = re.compile(rb'P5\s+(?P<width>\d+)\s+(?P<height>\d+)\s+255\s')

# Pillow modes that are single channel but not 8-bit
_DEPTH_MODES = {'1': '1-bit', 'I': '32-bit integer', 'F': '32-bit float',
                'I;16': '16-bit', 'I;16B': '16-bit', 'I;16L': '16-bit', 'I;16N': '16-bit'}


def as_mask(array) -> np.ndarray:
    """
    Coerce an array-like into a validated binary mask.

    Args:
        array: 2-D array of booleans or 0/1 values

    Returns:
        ``bool`` array of shape (height, width)

    Raises:
        ValueError: If the input is not two-dimensional or holds values other than 0/1
    """
    mask = np.asarray(array)
    if mask.ndim != 2:
        raise ValueError(f"Mask must be 2-D, got shape {mask.shape}")
    if mask.dtype != np.bool_:
        if mask.size and not np.isin(mask, (0, 1)).all():
            raise ValueError("Mask values must be boolean or 0/1")
        mask = mask.astype(bool)
    return mask


def as_image(array) -> np.ndarray:
    """
    Coerce an array-like into a validated gray image.

    Raises:
        ValueError: If the input is not 2-D or has intensities outside [0, 1]
    """
    image = np.asarray(array, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"Image must be 2-D, got shape {image.shape}")
    if image.size and (np.isnan(image).any() or image.min() < 0.0 or image.max() > 1.0):
        raise ValueError("Image intensities must lie in [0.0, 1.0]")
    return image


def list_mask_files(directory: PathLike) -> List[Path]:
    """Return the PNG/PGM files of a directory sorted by filename."""
    directory = Path(directory)
    return sorted(
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in MASK_EXTENSIONS
    )


def load_mask(path: PathLike) -> np.ndarray:
    """
    Load a binary mask from an 8-bit single-channel PNG or PGM file.

    Args:
        path: Mask file path

    Returns:
        ``bool`` array, True where the stored value is >= 128

    Raises:
        MaskFormatError: Missing file, unsupported depth/channels or corrupt container
    """
    return _read_raw(path) >= FOREGROUND_LEVEL


def load_image(path: PathLike) -> np.ndarray:
    """Load an 8-bit gray image as intensities ``value / 255``."""
    return _read_raw(path).astype(np.float64) / 255.0


def save_mask(mask: np.ndarray, path: PathLike) -> None:
    """
    Save a binary mask, foreground as 255 and background as 0.

    The container follows the file extension (``.png`` or ``.pgm``). A mask
    with zero width or height is always written as a PGM byte stream since
    PNG cannot represent zero dimensions; ``load_mask`` sniffs the content
    and reads it back regardless of the extension.

    Args:
        mask: Binary mask
        path: Destination file; its parent directory must exist

    Raises:
        MaskFormatError: Unwritable path or unsupported extension
    """
    raw = as_mask(mask).astype(np.uint8) * 255
    _write_raw(raw, path)


def save_image(image: np.ndarray, path: PathLike) -> None:
    """Save a gray image as 8-bit values ``round(i * 255)``."""
    raw = np.rint(as_image(image) * 255.0).astype(np.uint8)
    _write_raw(raw, path)


def threshold(image: np.ndarray, t: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """
    Convert a probability map into a mask.

    Args:
        image: Gray image with intensities in [0, 1]
        t: Threshold in [0, 1]; a pixel is foreground iff intensity >= t

    Returns:
        Binary mask with the image's dimensions

    Raises:
        ValueError: If t is outside [0, 1]
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"Threshold must be within [0, 1], got {t}")
    return as_image(image) >= t


def _read_raw(path: PathLike) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MaskFormatError(path, "file not found")
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise MaskFormatError(path, f"cannot read file ({e})") from e

    if payload.startswith(PNG_MAGIC):
        raw = _decode(payload, path, 'PNG')
    elif payload.startswith(PGM_MAGIC):
        empty = _EMPTY_PGM.fullmatch(payload)
        if empty and 0 in (int(empty['width']), int(empty['height'])):
            raw = np.zeros((int(empty['height']), int(empty['width'])), dtype=np.uint8)
        else:
            raw = _decode(payload, path, 'PGM')
    else:
        raise MaskFormatError(path, "unrecognized container (expected PNG or binary PGM)")

    logger.debug("Loaded %s (%dx%d)", path, raw.shape[1], raw.shape[0])
    return raw


def _decode(payload: bytes, path: Path, container: str) -> np.ndarray:
    # Pillow rescales PGM maxval below 255 to the full 8-bit range
    try:
        with Image.open(io.BytesIO(payload), formats=[_PILLOW_FORMATS[container]]) as img:
            img.load()
            mode = img.mode
            if mode in _DEPTH_MODES:
                raise MaskFormatError(path, f"unsupported bit depth ({_DEPTH_MODES[mode]})")
            if mode != 'L':
                raise MaskFormatError(path, f"unsupported channel count (mode {mode})")
            return np.array(img, dtype=np.uint8)
    except MaskFormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise MaskFormatError(path, f"truncated or corrupt {container} ({e})") from e


def _write_raw(raw: np.ndarray, path: PathLike) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in MASK_EXTENSIONS:
        raise MaskFormatError(path, f"unsupported extension '{path.suffix}' (use .png or .pgm)")
    if not path.parent.is_dir():
        raise MaskFormatError(path, "parent directory does not exist")

    height, width = raw.shape
    try:
        if raw.size == 0:
            # Neither Pillow writer accepts a zero-area image
            path.write_bytes(f"P5\n{width} {height}\n255\n".encode('ascii'))
        else:
            container = 'PNG' if suffix == '.png' else 'PGM'
            Image.fromarray(np.ascontiguousarray(raw)).save(path, format=_PILLOW_FORMATS[container])
    except OSError as e:
        raise MaskFormatError(path, f"cannot write file ({e})") from e

    logger.debug("Saved %s (%dx%d)", path, width, height)

"""
Dataset Manifests and Splits

This module scans a KPIs-style patch directory into a manifest of
(subject, group, patch image, ground-truth mask) entries and draws the
training splits A-D from it.

Default directory layout (configurable with ManifestLayout):

    <root>/<group>/<subject>/img/<name>_img.<ext>
    <root>/<group>/<subject>/mask/<name>_mask.<ext>

Splits sample subjects per group, then patches per retained subject, taking
ceil(fraction * count) items uniformly without replacement each time. A
manifest is interchanged as a CSV file; images are never copied.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from engine.errors import ManifestError
from engine.perturb import make_rng

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

GROUPS = ('normal', '56Nx', 'DN', 'NEP25')
MANIFEST_COLUMNS = ['subject_id', 'group', 'patch_path', 'mask_path']
SORT_KEYS = ['group', 'subject_id', 'patch_path']

# (subject fraction, patch fraction)
SPLIT_FRACTIONS: Dict[str, Tuple[float, float]] = {
    'A': (0.5, 1.0),
    'B': (1.0, 0.5),
    'C': (0.5, 0.5),
    'D': (1.0, 0.25),
}


@dataclass
class ManifestLayout:
    """Where patches and masks live under a dataset root"""
    image_dir: str = 'img'
    mask_dir: str = 'mask'
    image_suffix: str = '_img'
    mask_suffix: str = '_mask'
    extensions: Tuple[str, ...] = ('.png', '.jpg', '.jpeg', '.tif', '.tiff', '.pgm')
    groups: Tuple[str, ...] = GROUPS


@dataclass
class ScanIssue:
    """A file or directory the scan could not turn into an entry"""
    path: str
    reason: str

    def __str__(self) -> str:
        return f"{self.path}: {self.reason}"


@dataclass
class Manifest:
    """Sorted (subject_id, group, patch_path, mask_path) entries plus scan issues"""
    entries: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=MANIFEST_COLUMNS))
    issues: List[ScanIssue] = field(default_factory=list)
    groups: Tuple[str, ...] = GROUPS

    def __post_init__(self):
        frame = self.entries
        missing = set(MANIFEST_COLUMNS) - set(frame.columns)
        if missing:
            raise ManifestError(f"Manifest is missing column(s) {sorted(missing)}")

        frame = frame[MANIFEST_COLUMNS].astype(str)
        unknown = sorted(set(frame['group']) - set(self.groups))
        if unknown:
            raise ManifestError(f"Unknown group(s) {unknown}; expected one of {list(self.groups)}")
        duplicated = frame.duplicated(subset=['subject_id', 'patch_path'])
        if duplicated.any():
            first = frame[duplicated].iloc[0]
            raise ManifestError(
                f"Duplicate entry for subject {first['subject_id']}: {first['patch_path']}"
            )
        self.entries = frame.sort_values(SORT_KEYS, kind='mergesort').reset_index(drop=True)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def is_empty(self) -> bool:
        return self.entries.empty


def _pair_key(path: Path, suffix: str) -> Optional[str]:
    stem = path.stem
    if not stem.endswith(suffix) or len(stem) == len(suffix):
        return None
    return stem[:len(stem) - len(suffix)]


def _index_files(directory: Path, suffix: str, layout: ManifestLayout,
                 issues: List[ScanIssue]) -> Dict[str, Path]:
    """Map pairing key -> file for one img/ or mask/ directory."""
    found: Dict[str, Path] = {}
    if not directory.is_dir():
        return found
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() not in layout.extensions:
            continue
        key = _pair_key(path, suffix)
        if key is None:
            issues.append(ScanIssue(path.as_posix(), f"name does not end with '{suffix}'"))
            continue
        if key in found:
            raise ManifestError(
                f"Ambiguous pairing: {found[key].as_posix()} and {path.as_posix()} share key '{key}'"
            )
        found[key] = path
    return found


def scan_manifest(root: PathLike, layout: Optional[ManifestLayout] = None) -> Manifest:
    """
    Enumerate (patch, mask) pairs under a dataset root.

    Args:
        root: Dataset root directory
        layout: Directory naming convention (defaults to the KPIs layout)

    Returns:
        Sorted Manifest; images without a mask, masks without an image and
        directories outside the known groups are recorded in ``issues``

    Raises:
        ManifestError: Unreadable root, or two files mapping to the same pair
    """
    layout = layout or ManifestLayout()
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"Dataset root is not a readable directory: {root}")

    rows: List[Dict[str, str]] = []
    issues: List[ScanIssue] = []
    try:
        for group_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            if group_dir.name not in layout.groups:
                issues.append(ScanIssue(group_dir.as_posix(), "not a known group directory"))
                continue
            for subject_dir in sorted(p for p in group_dir.iterdir() if p.is_dir()):
                images = _index_files(subject_dir / layout.image_dir, layout.image_suffix, layout, issues)
                masks = _index_files(subject_dir / layout.mask_dir, layout.mask_suffix, layout, issues)

                for key, image_path in images.items():
                    if key not in masks:
                        issues.append(ScanIssue(image_path.as_posix(), "no matching mask"))
                        continue
                    rows.append({
                        'subject_id': subject_dir.name,
                        'group': group_dir.name,
                        'patch_path': image_path.as_posix(),
                        'mask_path': masks[key].as_posix(),
                    })
                for key in sorted(set(masks) - set(images)):
                    issues.append(ScanIssue(masks[key].as_posix(), "no matching image"))
    except OSError as e:
        raise ManifestError(f"Cannot scan {root}: {e}") from e

    for issue in issues:
        logger.warning("Manifest scan: %s", issue)

    manifest = Manifest(pd.DataFrame(rows, columns=MANIFEST_COLUMNS), issues, layout.groups)
    logger.info("Scanned %s: %d entries, %d issue(s)", root, len(manifest), len(issues))
    return manifest


@dataclass
class SplitSpec:
    """Split letter and seed; fractions default to the letter's (subject, patch) pair"""
    split: str
    seed: int = 0
    subject_fraction: Optional[float] = None
    patch_fraction: Optional[float] = None

    def __post_init__(self):
        if self.split not in SPLIT_FRACTIONS:
            raise ValueError(f"split must be one of {sorted(SPLIT_FRACTIONS)}, got {self.split!r}")
        default_subjects, default_patches = SPLIT_FRACTIONS[self.split]
        if self.subject_fraction is None:
            self.subject_fraction = default_subjects
        if self.patch_fraction is None:
            self.patch_fraction = default_patches
        for name in ('subject_fraction', 'patch_fraction'):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must be within (0, 1], got {value}")


def selection_count(fraction: float, n: int) -> int:
    """ceil(fraction * n): a non-empty pool never yields an empty selection."""
    # Decimal value of the fraction, so 0.1 * 30 is exactly 3
    return min(n, math.ceil(Fraction(str(fraction)) * n))


def make_split(manifest: Manifest, spec: SplitSpec) -> Manifest:
    """
    Draw a training split from a manifest.

    Groups, subjects and patches are visited in sorted order and all draws
    come from one generator seeded with spec.seed, so the same inputs always
    give the same split.

    Args:
        manifest: Non-empty source manifest
        spec: Split letter, seed and fractions

    Returns:
        Sorted sub-manifest

    Raises:
        ManifestError: If the manifest is empty
    """
    if manifest.is_empty:
        raise ManifestError("Cannot split an empty manifest")

    rng = make_rng(spec.seed)
    frame = manifest.entries
    keep: List[int] = []

    for _, group_rows in frame.groupby('group', sort=True):
        subjects = sorted(group_rows['subject_id'].unique())
        n_subjects = selection_count(spec.subject_fraction, len(subjects))
        picked = sorted(rng.choice(len(subjects), size=n_subjects, replace=False))

        for subject_index in picked:
            patches = group_rows[group_rows['subject_id'] == subjects[subject_index]]
            n_patches = selection_count(spec.patch_fraction, len(patches))
            chosen = sorted(rng.choice(len(patches), size=n_patches, replace=False))
            keep.extend(patches.index[chosen].tolist())

    split = Manifest(frame.loc[sorted(keep)].reset_index(drop=True), [], manifest.groups)
    logger.info("Split %s (seed %d): %d of %d entries", spec.split, spec.seed, len(split), len(manifest))
    return split


def write_manifest(manifest: Manifest, path: PathLike) -> None:
    """Write the manifest CSV (UTF-8, LF line endings, sorted rows)."""
    manifest.entries.to_csv(path, index=False, columns=MANIFEST_COLUMNS,
                            lineterminator='\n', encoding='utf-8')


def read_manifest(path: PathLike, groups: Tuple[str, ...] = GROUPS) -> Manifest:
    """
    Read a manifest CSV written by write_manifest.

    Raises:
        ManifestError: Missing file, wrong header or invalid entries
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ManifestError(f"Cannot read manifest {path}: {e}") from e
    if list(frame.columns) != MANIFEST_COLUMNS:
        raise ManifestError(
            f"{path}: header must be {','.join(MANIFEST_COLUMNS)}, got {','.join(frame.columns)}"
        )
    return Manifest(frame, [], groups)


def split_summary(manifest: Manifest) -> pd.DataFrame:
    """Subjects and patches per group."""
    frame = manifest.entries
    summary = frame.groupby('group', sort=True).agg(
        subjects=('subject_id', 'nunique'),
        patches=('patch_path', 'size'),
    )
    return summary.reset_index()

"""
CovHuSeg Toolkit - Data Package

Dataset manifests and training-split generation.
"""

from data.dataset import (
    Manifest,
    ManifestLayout,
    ScanIssue,
    SplitSpec,
    scan_manifest,
    make_split,
    read_manifest,
    write_manifest,
    split_summary,
)

__all__ = [
    'Manifest',
    'ManifestLayout',
    'ScanIssue',
    'SplitSpec',
    'scan_manifest',
    'make_split',
    'read_manifest',
    'write_manifest',
    'split_summary',
]

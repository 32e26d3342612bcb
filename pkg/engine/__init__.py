"""
CovHuSeg Toolkit - Engine Package

Mask I/O, component labeling, exact convex hulls, rasterization, the CovHuSeg
pipeline, segmentation metrics and the synthetic perturbation harness.
"""

from engine.errors import (
    CovHuSegError,
    MaskFormatError,
    DimensionMismatchError,
    GeometryError,
    ManifestError,
    SynthesisError,
    ImprovementViolation,
)
from engine.mask_io import load_mask, save_mask, load_image, save_image, threshold
from engine.labeling import Connectivity, LabeledMask, label, boundary_pixels
from engine.hull import HullAlgorithm, Location, ConvexPolygon, monotone_chain, quickhull, contains
from engine.raster import fill_convex, scanline_spans
from engine.covhuseg import (
    PipelineConfig,
    PipelineStats,
    CovHuSegPipeline,
    covhuseg,
    covhuseg_with_stats,
    covhuseg_probmap,
)
from engine.metrics import EvalRecord, ReportRow, Report, dice, iou, evaluate_pair, aggregate
from engine.perturb import (
    DegradeSpec,
    SynthSpec,
    SynthShape,
    add_gaussian_noise,
    gen_convex_mask,
    degrade,
)
from engine.experiment import ExperimentResult, ImprovementExperiment, improvement_experiment

__all__ = [
    'CovHuSegError',
    'MaskFormatError',
    'DimensionMismatchError',
    'GeometryError',
    'ManifestError',
    'SynthesisError',
    'ImprovementViolation',
    'load_mask',
    'save_mask',
    'load_image',
    'save_image',
    'threshold',
    'Connectivity',
    'LabeledMask',
    'label',
    'boundary_pixels',
    'HullAlgorithm',
    'Location',
    'ConvexPolygon',
    'monotone_chain',
    'quickhull',
    'contains',
    'fill_convex',
    'scanline_spans',
    'PipelineConfig',
    'PipelineStats',
    'CovHuSegPipeline',
    'covhuseg',
    'covhuseg_with_stats',
    'covhuseg_probmap',
    'EvalRecord',
    'ReportRow',
    'Report',
    'dice',
    'iou',
    'evaluate_pair',
    'aggregate',
    'DegradeSpec',
    'SynthSpec',
    'SynthShape',
    'add_gaussian_noise',
    'gen_convex_mask',
    'degrade',
    'ExperimentResult',
    'ImprovementExperiment',
    'improvement_experiment',
]

"""
Command-line entry point.

Subcommands: process, evaluate, split, noise, synth, report. Options that
configure the pipeline, the synthetic generator or the degradation carry the
same names as the dataclass fields they set, so a ``--config`` file of
``key=value`` lines can set any of them (``min_component_area=20``).

Precedence: explicit flag > config file > --preset > built-in default.
"""

import argparse
import logging
import sys
from dataclasses import fields, replace
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values

from cli.commands import (
    EXIT_USAGE,
    cmd_evaluate,
    cmd_noise,
    cmd_process,
    cmd_report,
    cmd_split,
    cmd_synth,
)
from data.dataset import ManifestLayout
from engine.covhuseg import PipelineConfig
from engine.hull import HullAlgorithm
from engine.labeling import Connectivity
from engine.metrics import NO_SPLIT, SPLIT_TAGS
from engine.perturb import DEFAULT_NOISE_STD, DegradeSpec, SynthShape, SynthSpec
from pipeline_configs import get_pipeline_config, list_all_presets

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

EXIT_CODES_HELP = """exit status:
  0  full success
  1  partial failure (some files failed or were unpaired)
  2  usage error (bad flags, bad values or config file)
  3  nothing could be done (no inputs, no pairs, empty manifest)
"""

PIPELINE_FIELDS = [f.name for f in fields(PipelineConfig)]
BOOL_KEYS = {'iterate_to_fixed_point', 'probmap', 'experiment', 'published', 'verbose', 'quiet'}
_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def int_pair(text: str) -> Tuple[int, int]:
    """Parse "a,b" or "AxB" into two integers."""
    parts = text.replace('x', ',').split(',')
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two integers like '4,12', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers like '4,12', got {text!r}")


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"expected a boolean (true/false), got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    common.add_argument('-q', '--quiet', action='store_true', help="warnings only, no progress bars")
    common.add_argument('--config', metavar='FILE', help="key=value file setting any option below")
    return common


def _pipeline_parser() -> argparse.ArgumentParser:
    pipeline = argparse.ArgumentParser(add_help=False)
    group = pipeline.add_argument_group("pipeline")
    group.add_argument('--preset', choices=list_all_presets(), help="start from a named configuration")
    group.add_argument('--connectivity', choices=[c.value for c in Connectivity])
    group.add_argument('--hull-algorithm', choices=[a.value for a in HullAlgorithm])
    group.add_argument('--min-component-area', type=int, metavar='PIXELS',
                       help="remove components smaller than this (default 0)")
    group.add_argument('--threshold', type=float, help="probability-map threshold (default 0.5)")
    group.add_argument('--iterate-to-fixed-point', action=argparse.BooleanOptionalAction, default=None,
                       help="repeat until the mask stops changing")
    return pipeline


def _jobs_parser() -> argparse.ArgumentParser:
    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument('--jobs', type=int, default=1, help="worker processes (default 1)")
    return jobs


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """Build the top-level parser; also returns the subparsers by name."""
    parser = argparse.ArgumentParser(
        prog='covhuseg',
        description="Convex-hull post-processing for binary segmentation masks",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest='command', required=True)
    common, pipeline, jobs = _common_parser(), _pipeline_parser(), _jobs_parser()
    subparsers = {}

    def add(name: str, help_text: str, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
        subparsers[name] = sub.add_parser(
            name, help=help_text, parents=parents, epilog=EXIT_CODES_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        return subparsers[name]

    p = add('process', "apply CovHuSeg to every mask in a directory", [common, pipeline, jobs])
    p.add_argument('in_dir')
    p.add_argument('out_dir')
    p.add_argument('--probmap', action=argparse.BooleanOptionalAction, default=False,
                   help="inputs are probability maps, thresholded with --threshold")

    p = add('evaluate', "Dice without/with CovHuSeg against ground truth", [common, pipeline, jobs])
    p.add_argument('pred_dir')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--gt-dir', help="ground-truth masks paired by filename")
    source.add_argument('--manifest', help="manifest CSV; predictions named after mask_path")
    p.add_argument('--report', default='report.csv', help="report CSV path (default report.csv)")
    p.add_argument('--records', help="optional per-image records CSV path")
    p.add_argument('--model', default='model', help="model column of the report row")
    p.add_argument('--split', default=NO_SPLIT, choices=list(SPLIT_TAGS) + [NO_SPLIT],
                   help="split column of the report row")

    p = add('split', "write the manifest of training split A-D", [common])
    layout = ManifestLayout()
    p.add_argument('root')
    p.add_argument('out_manifest')
    p.add_argument('--split', required=True, choices=list(SPLIT_TAGS))
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--image-dir', default=layout.image_dir)
    p.add_argument('--mask-dir', default=layout.mask_dir)
    p.add_argument('--image-suffix', default=layout.image_suffix)
    p.add_argument('--mask-suffix', default=layout.mask_suffix)

    p = add('noise', "write Gaussian-noise copies of gray images", [common, jobs])
    p.add_argument('in_dir')
    p.add_argument('out_dir')
    p.add_argument('--std', type=float, default=DEFAULT_NOISE_STD,
                   help=f"noise std on the [0, 1] scale (default {DEFAULT_NOISE_STD})")
    p.add_argument('--seed', type=int, default=0, help="base seed; file i uses seed ^ i")

    p = add('synth', "write synthetic ground truth and degraded predictions", [common, pipeline, jobs])
    p.add_argument('out_dir')
    p.add_argument('--trials', type=int, default=10)
    p.add_argument('--experiment', action=argparse.BooleanOptionalAction, default=False,
                   help="also run the improvement experiment and print its results")
    g = p.add_argument_group("synthesis")
    g.add_argument('--shape', choices=[s.value for s in SynthShape])
    g.add_argument('--size-range', type=int_pair, metavar='MIN,MAX', help="component radius range")
    g.add_argument('--count-per-image', type=int)
    g.add_argument('--canvas', type=int_pair, metavar='W,H')
    g.add_argument('--seed', type=int)
    g.add_argument('--max-retries', type=int)
    g = p.add_argument_group("degradation")
    g.add_argument('--hole-count', type=int)
    g.add_argument('--hole-radius-range', type=int_pair, metavar='MIN,MAX')
    g.add_argument('--boundary-erosion-prob', type=float)
    g.add_argument('--pixel-dropout-prob', type=float)
    g.add_argument('--speckle-prob', type=float, help="additive noise; voids the Dice guarantee")
    g.add_argument('--degrade-seed', type=int)

    p = add('report', "aggregate records CSVs or print the published tables", [common])
    p.add_argument('--row', nargs=3, action='append', metavar=('MODEL', 'SPLIT', 'RECORDS_CSV'))
    p.add_argument('--published', action=argparse.BooleanOptionalAction, default=False,
                   help="print the published reference tables with a consistency check")
    p.add_argument('--out', help="report CSV path")

    return parser, subparsers


def load_config(path: str) -> Dict[str, object]:
    """Read a key=value config file; boolean keys are converted, others stay strings."""
    values = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            raise ValueError(f"{path}: '{key}' has no value")
        key = key.strip().replace('-', '_')
        values[key] = parse_bool(value) if key in BOOL_KEYS else value
    return values


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse flags, then re-parse with the config file's values as defaults."""
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args

    try:
        values = load_config(args.config)
    except (OSError, ValueError) as e:
        parser.error(f"cannot use config file: {e}")
    unknown = sorted(set(values) - set(vars(args)) - {'command', 'config'})
    if unknown:
        parser.error(f"unknown key(s) in {args.config} for '{args.command}': {', '.join(unknown)}")
    if not values:
        return args

    subparsers[args.command].set_defaults(**values)
    return parser.parse_args(argv)


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def build_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    base = get_pipeline_config(args.preset) if args.preset else PipelineConfig()
    overrides = {name: getattr(args, name) for name in PIPELINE_FIELDS
                 if getattr(args, name, None) is not None}
    return replace(base, **overrides)


def _from_args(cls, args: argparse.Namespace, renames: Optional[Dict[str, str]] = None):
    renames = renames or {}
    kwargs = {}
    for f in fields(cls):
        value = getattr(args, renames.get(f.name, f.name), None)
        if value is not None:
            kwargs[f.name] = value
    return cls(**kwargs)


def build_synth_spec(args: argparse.Namespace) -> SynthSpec:
    return _from_args(SynthSpec, args)


def build_degrade_spec(args: argparse.Namespace) -> DegradeSpec:
    return _from_args(DegradeSpec, args, renames={'seed': 'degrade_seed'})


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Exit status (see EXIT_CODES_HELP)
    """
    args = parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    try:
        if getattr(args, 'jobs', 1) < 1:
            raise ValueError(f"--jobs must be >= 1, got {args.jobs}")
        if args.command == 'synth' and args.trials < 1:
            raise ValueError(f"--trials must be >= 1, got {args.trials}")
        if args.command == 'noise' and args.std < 0:
            raise ValueError(f"Noise std must be non-negative, got {args.std}")
        config = build_pipeline_config(args) if hasattr(args, 'preset') else None
        if args.command == 'synth':
            synth, deg = build_synth_spec(args), build_degrade_spec(args)
    except ValueError as e:
        logger.error("Invalid option: %s", e)
        return EXIT_USAGE

    logger.debug("Running %s with %s", args.command, config)
    if args.command == 'process':
        return cmd_process(args, config)
    if args.command == 'evaluate':
        return cmd_evaluate(args, config)
    if args.command == 'split':
        return cmd_split(args)
    if args.command == 'noise':
        return cmd_noise(args)
    if args.command == 'synth':
        return cmd_synth(args, config, synth, deg)
    return cmd_report(args)

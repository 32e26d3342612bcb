"""
Batch Commands

One function per subcommand. Each takes the parsed argparse namespace and
returns an exit status:

    0  every input succeeded
    1  partial failure (some files failed or were unpaired)
    2  usage error (bad flags or config file)
    3  nothing could be done

Files are always handled in filename order and per-file results are merged
in that order, so output and reports do not depend on --jobs.
"""

import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from data.dataset import (
    ManifestLayout,
    SplitSpec,
    make_split,
    read_manifest,
    scan_manifest,
    split_summary,
    write_manifest,
)
from engine.covhuseg import PipelineConfig, covhuseg_with_stats
from engine.errors import CovHuSegError, DimensionMismatchError
from engine.experiment import ImprovementExperiment, generate_trial, trial_id
from engine.mask_io import (
    list_mask_files,
    load_image,
    load_mask,
    save_image,
    save_mask,
    threshold,
)
from engine.metrics import (
    EvalRecord,
    Report,
    aggregate,
    evaluate_pair,
    read_records_csv,
    write_records_csv,
)
from engine.perturb import DegradeSpec, SynthSpec, add_gaussian_noise, derive_seed
from pipeline_configs import print_published_tables

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_NOTHING = 3


@dataclass
class FileOutcome:
    """Result of one file in a batch command"""
    name: str
    seconds: float
    error: Optional[str] = None
    detail: str = ''

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_batch(worker: Callable, jobs: Sequence[tuple], n_workers: int, desc: str, quiet: bool) -> List:
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as executor:
            results = executor.map(worker, *zip(*jobs))
            return list(tqdm(results, total=len(jobs), desc=desc, disable=quiet))
    return [worker(*job) for job in tqdm(jobs, desc=desc, disable=quiet)]


def _exit_status(outcomes: Sequence[FileOutcome], unpaired: int = 0) -> int:
    n_ok = sum(o.ok for o in outcomes)
    if outcomes and n_ok == 0:
        return EXIT_NOTHING
    if n_ok < len(outcomes) or unpaired:
        return EXIT_PARTIAL
    return EXIT_OK


def _print_failures(outcomes: Sequence[FileOutcome]) -> None:
    failed = [o for o in outcomes if not o.ok]
    if failed:
        print(f"\nFailed ({len(failed)}):")
        for outcome in failed:
            print(f"  {outcome.name}: {outcome.error}")


def _input_files(directory: Path) -> Optional[List[Path]]:
    if not directory.is_dir():
        logger.error("Input directory not found: %s", directory)
        return None
    return list_mask_files(directory)


# --- process ---------------------------------------------------------------

def _process_file(path: Path, out_path: Path, config: PipelineConfig, probmap: bool) -> FileOutcome:
    start = time.perf_counter()
    try:
        mask = threshold(load_image(path), config.threshold) if probmap else load_mask(path)
        result, stats = covhuseg_with_stats(mask, config)
        save_mask(result, out_path)
    except (CovHuSegError, OSError) as e:
        return FileOutcome(path.name, time.perf_counter() - start, error=str(e))
    detail = f"{stats.n_components} component(s), {stats.pixels_added:+d} px"
    return FileOutcome(path.name, time.perf_counter() - start, detail=detail)


def cmd_process(args, config: PipelineConfig) -> int:
    """Write covhuseg(mask) for every mask in in_dir, keeping filenames."""
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    files = _input_files(in_dir)
    if files is None:
        return EXIT_NOTHING
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(path, out_dir / path.name, config, args.probmap) for path in files]
    outcomes = _run_batch(_process_file, jobs, args.jobs, "process", args.quiet)

    print("\n" + "=" * 70)
    print("COVHUSEG PROCESS")
    print("=" * 70)
    for outcome in outcomes:
        if outcome.ok:
            print(f"  {outcome.name:<40} {outcome.seconds * 1000:8.1f} ms  {outcome.detail}")
    n_ok = sum(o.ok for o in outcomes)
    total = sum(o.seconds for o in outcomes)
    print(f"\nProcessed {n_ok} of {len(outcomes)} file(s) in {total:.2f}s")
    _print_failures(outcomes)
    print("=" * 70)
    return _exit_status(outcomes)


# --- evaluate --------------------------------------------------------------

def _evaluate_pair_files(
    pred_path: Path,
    gt_path: Path,
    config: PipelineConfig
) -> Tuple[FileOutcome, Optional[EvalRecord]]:
    start = time.perf_counter()
    try:
        record = evaluate_pair(load_mask(pred_path), load_mask(gt_path), config, image_id=pred_path.stem)
    except DimensionMismatchError as e:
        return FileOutcome(pred_path.name, time.perf_counter() - start, error=f"dimension mismatch: {e}"), None
    except (CovHuSegError, OSError) as e:
        return FileOutcome(pred_path.name, time.perf_counter() - start, error=str(e)), None
    return FileOutcome(pred_path.name, time.perf_counter() - start), record


def _pairs_by_filename(pred_dir: Path, gt_dir: Path) -> Tuple[List[Tuple[Path, Path]], List[str]]:
    preds = {p.name: p for p in list_mask_files(pred_dir)}
    gts = {p.name: p for p in list_mask_files(gt_dir)}
    pairs = [(preds[name], gts[name]) for name in sorted(preds.keys() & gts.keys())]
    unpaired = [f"{preds[n]} (no ground truth)" for n in sorted(preds.keys() - gts.keys())]
    unpaired += [f"{gts[n]} (no prediction)" for n in sorted(gts.keys() - preds.keys())]
    return pairs, unpaired


def _pairs_by_manifest(pred_dir: Path, manifest_path: Path) -> Tuple[List[Tuple[Path, Path]], List[str]]:
    manifest = read_manifest(manifest_path)
    mask_paths = list(manifest.entries['mask_path'])
    name_counts = Counter(Path(mask_path).name for mask_path in mask_paths)
    pairs, unpaired = [], []
    for mask_path in mask_paths:
        pred_path = pred_dir / Path(mask_path).name
        if name_counts[pred_path.name] > 1:
            unpaired.append(f"{pred_path} (ambiguous: {name_counts[pred_path.name]} manifest masks "
                            f"share this name, including {mask_path})")
        elif pred_path.is_file():
            pairs.append((pred_path, Path(mask_path)))
        else:
            unpaired.append(f"{pred_path} (no prediction for {mask_path})")
    return sorted(pairs), unpaired


def cmd_evaluate(args, config: PipelineConfig) -> int:
    """Score predictions against ground truth without/with CovHuSeg and write the report."""
    pred_dir = Path(args.pred_dir)
    if not pred_dir.is_dir():
        logger.error("Prediction directory not found: %s", pred_dir)
        return EXIT_NOTHING

    try:
        if args.manifest:
            pairs, unpaired = _pairs_by_manifest(pred_dir, Path(args.manifest))
        elif args.gt_dir and Path(args.gt_dir).is_dir():
            pairs, unpaired = _pairs_by_filename(pred_dir, Path(args.gt_dir))
        else:
            logger.error("Ground-truth directory not found: %s", args.gt_dir)
            return EXIT_NOTHING
    except CovHuSegError as e:
        logger.error("%s", e)
        return EXIT_NOTHING

    for line in unpaired:
        logger.warning("Unpaired: %s", line)
    if not pairs:
        logger.error("No prediction / ground-truth pairs found")
        return EXIT_NOTHING

    jobs = [(pred, gt, config) for pred, gt in pairs]
    results = _run_batch(_evaluate_pair_files, jobs, args.jobs, "evaluate", args.quiet)
    outcomes = [outcome for outcome, _ in results]
    records = [record for _, record in results if record is not None]

    print("\n" + "=" * 70)
    print("COVHUSEG EVALUATION")
    print("=" * 70)
    if records:
        report = Report([aggregate(records, args.model, args.split)])
        report.to_csv(args.report)
        if args.records:
            write_records_csv(records, args.records)
        print(report.to_text())
    print(f"\nEvaluated {len(records)} of {len(pairs)} pair(s); {len(unpaired)} unpaired file(s)")
    if unpaired:
        print(f"\nUnpaired ({len(unpaired)}):")
        for line in unpaired:
            print(f"  {line}")
    _print_failures(outcomes)
    print("=" * 70)
    return _exit_status(outcomes, len(unpaired))


# --- split -----------------------------------------------------------------

def cmd_split(args) -> int:
    """Scan a dataset root, draw a split and write its manifest."""
    layout = ManifestLayout(
        image_dir=args.image_dir,
        mask_dir=args.mask_dir,
        image_suffix=args.image_suffix,
        mask_suffix=args.mask_suffix,
    )
    try:
        manifest = scan_manifest(args.root, layout)
        split = make_split(manifest, SplitSpec(args.split, args.seed))
        write_manifest(split, args.out_manifest)
    except CovHuSegError as e:
        logger.error("%s", e)
        return EXIT_NOTHING

    print("\n" + "=" * 70)
    print(f"SPLIT {args.split} (seed {args.seed})")
    print("=" * 70)
    print(split_summary(split).to_string(index=False))
    print(f"\n{len(split)} of {len(manifest)} entries written to {args.out_manifest}")
    if manifest.issues:
        print(f"\nScan issues ({len(manifest.issues)}):")
        for issue in manifest.issues:
            print(f"  {issue}")
    print("=" * 70)
    return EXIT_PARTIAL if manifest.issues else EXIT_OK


# --- noise -----------------------------------------------------------------

def _noise_file(path: Path, out_path: Path, std: float, seed: int) -> FileOutcome:
    start = time.perf_counter()
    try:
        save_image(add_gaussian_noise(load_image(path), std, seed), out_path)
    except (CovHuSegError, OSError) as e:
        return FileOutcome(path.name, time.perf_counter() - start, error=str(e))
    return FileOutcome(path.name, time.perf_counter() - start, detail=f"seed {seed}")


def cmd_noise(args) -> int:
    """Write a Gaussian-noise copy of every image; file i uses seed ^ i in filename order."""
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    files = _input_files(in_dir)
    if files is None:
        return EXIT_NOTHING
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(path, out_dir / path.name, args.std, derive_seed(args.seed, i))
            for i, path in enumerate(files)]
    outcomes = _run_batch(_noise_file, jobs, args.jobs, "noise", args.quiet)

    n_ok = sum(o.ok for o in outcomes)
    print(f"Wrote {n_ok} of {len(outcomes)} noisy image(s) (std {args.std}) to {out_dir}")
    _print_failures(outcomes)
    return _exit_status(outcomes)


# --- synth -----------------------------------------------------------------

def _synth_file(synth: SynthSpec, deg: DegradeSpec, trial: int, gt_dir: Path, pred_dir: Path) -> FileOutcome:
    start = time.perf_counter()
    name = f"{trial_id(trial)}.png"
    try:
        gt, pred = generate_trial(synth, deg, trial)
        save_mask(gt, gt_dir / name)
        save_mask(pred, pred_dir / name)
    except (CovHuSegError, OSError) as e:
        return FileOutcome(name, time.perf_counter() - start, error=str(e))
    return FileOutcome(name, time.perf_counter() - start)


def cmd_synth(args, config: PipelineConfig, synth: SynthSpec, deg: DegradeSpec) -> int:
    """Write synthetic ground truths to out_dir/gt and degraded copies to out_dir/pred."""
    out_dir = Path(args.out_dir)
    gt_dir, pred_dir = out_dir / "gt", out_dir / "pred"
    gt_dir.mkdir(parents=True, exist_ok=True)
    pred_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(synth, deg, trial, gt_dir, pred_dir) for trial in range(args.trials)]
    outcomes = _run_batch(_synth_file, jobs, args.jobs, "synth", args.quiet)
    n_ok = sum(o.ok for o in outcomes)
    print(f"Wrote {n_ok} of {len(outcomes)} trial pair(s) to {gt_dir} and {pred_dir}")
    _print_failures(outcomes)

    if args.experiment:
        experiment = ImprovementExperiment(synth, deg, args.trials, config, args.jobs)
        experiment.run(progress=not args.quiet).print_results()
    return _exit_status(outcomes)


# --- report ----------------------------------------------------------------

def cmd_report(args) -> int:
    """Aggregate per-image records CSVs into a report and/or print the published tables."""
    if not args.row and not args.published:
        logger.error("Nothing to report: give --row MODEL SPLIT RECORDS_CSV or --published")
        return EXIT_NOTHING

    if args.published:
        print_published_tables()
    if not args.row:
        return EXIT_OK

    report = Report()
    failures = 0
    for model, split, path in args.row:
        try:
            report.add(aggregate(read_records_csv(path), model, split))
        except (ValueError, OSError) as e:
            logger.error("%s: %s", path, e)
            failures += 1

    if not report.rows:
        return EXIT_NOTHING
    print(report.to_text())
    if args.out:
        report.to_csv(args.out)
    return EXIT_PARTIAL if failures else EXIT_OK

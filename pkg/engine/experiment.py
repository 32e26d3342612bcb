"""
Improvement Experiment

Runs many synthetic trials of convex ground truth plus seeded degradation
and scores each prediction with and without CovHuSeg. When the ground truth
is convex and the prediction is a subset of it, every filled hull stays
inside the ground truth, so Dice can never drop; each trial checks that.

Trials are independent: trial t uses seeds ``synth.seed ^ t`` and
``deg.seed ^ t``, so results do not depend on the number of workers.
"""

import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from engine.covhuseg import PipelineConfig
from engine.errors import ImprovementViolation
from engine.metrics import NO_SPLIT, EvalRecord, ReportRow, aggregate, evaluate_pair
from engine.perturb import DegradeSpec, SynthSpec, degrade, derive_seed, gen_convex_mask

logger = logging.getLogger(__name__)

TrialOutcome = Tuple[EvalRecord, int]


@dataclass
class ExperimentResult:
    """Results from an improvement experiment"""
    row: ReportRow
    records: List[EvalRecord] = field(default_factory=list)
    removed_pixels: List[int] = field(default_factory=list)
    strict_improvements: int = 0

    @property
    def n_trials(self) -> int:
        return len(self.records)

    @property
    def improvement_rate(self) -> float:
        """Fraction of trials where CovHuSeg raised Dice"""
        return self.strict_improvements / self.n_trials if self.records else 0.0

    def print_results(self):
        """Print formatted results"""
        gains = np.array([r.dice_gain for r in self.records])
        pct = self.row.increase_pct

        print("\n" + "=" * 70)
        print("COVHUSEG IMPROVEMENT EXPERIMENT")
        print("=" * 70)

        print(f"\nTrials: {self.n_trials}")
        print(f"Pixels removed per trial: mean {np.mean(self.removed_pixels):.1f}, "
              f"max {max(self.removed_pixels)}")

        print("\nDice:")
        print(f"  Without CovHuSeg: {self.row.mean_without:.3f}")
        print(f"  With CovHuSeg:    {self.row.mean_with:.3f}")
        print(f"  Increase:         {self.row.increase:.3f}"
              + (f" ({pct:.2f}%)" if not np.isnan(pct) else ""))

        print("\nPer-trial gain:")
        print(f"  Min:  {gains.min():.4f}")
        print(f"  Max:  {gains.max():.4f}")
        print(f"  Strictly improved: {self.improvement_rate:.1%}")

        print("=" * 70 + "\n")


def trial_id(trial: int) -> str:
    return f"trial_{trial:05d}"


def generate_trial(synth: SynthSpec, deg: DegradeSpec, trial: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ground truth and degraded prediction of one trial.

    Args:
        synth: Generator parameters with the base seed
        deg: Degradation parameters with the base seed
        trial: Trial index

    Returns:
        Tuple of (ground-truth mask, degraded mask)
    """
    gt, _ = gen_convex_mask(replace(synth, seed=derive_seed(synth.seed, trial)))
    pred = degrade(gt, replace(deg, seed=derive_seed(deg.seed, trial)))
    return gt, pred


def _run_trial(
    synth: SynthSpec,
    deg: DegradeSpec,
    config: Optional[PipelineConfig],
    trial: int,
    check_theorem: bool
) -> TrialOutcome:
    gt, pred = generate_trial(synth, deg, trial)
    record = evaluate_pair(pred, gt, config, image_id=trial_id(trial))

    if check_theorem and record.dice_with < record.dice_without:
        raise ImprovementViolation(
            f"Trial {trial}: Dice fell from {record.dice_without:.6f} to {record.dice_with:.6f} "
            f"(synth seed {derive_seed(synth.seed, trial)}, "
            f"degrade seed {derive_seed(deg.seed, trial)})"
        )
    return record, int(gt.sum()) - int((pred & gt).sum())


def _run_trial_star(args) -> TrialOutcome:
    return _run_trial(*args)


class ImprovementExperiment:
    """
    Synthetic check that CovHuSeg never lowers Dice on convex anomalies.

    The per-trial assertion only runs when its preconditions hold: a purely
    subtractive degradation and no minimum-area filtering.
    """

    def __init__(
        self,
        synth: SynthSpec,
        deg: DegradeSpec,
        trials: int,
        config: Optional[PipelineConfig] = None,
        n_workers: int = 1
    ):
        """
        Initialize the experiment.

        Args:
            synth: Ground-truth generator parameters (base seed)
            deg: Degradation parameters (base seed)
            trials: Number of trials
            config: Pipeline configuration for the "with" column
            n_workers: Worker processes; 1 runs in-process
        """
        if trials < 1:
            raise ValueError(f"Trials must be >= 1, got {trials}")
        if n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {n_workers}")
        self.synth = synth
        self.deg = deg
        self.trials = trials
        self.config = config or PipelineConfig()
        self.n_workers = n_workers

    @property
    def checks_theorem(self) -> bool:
        return self.deg.is_subtractive and self.config.min_component_area == 0

    def run(
        self,
        model_tag: str = "synthetic",
        split_tag: str = NO_SPLIT,
        progress: bool = False
    ) -> ExperimentResult:
        """
        Run all trials and aggregate them into a report row.

        Returns:
            ExperimentResult with records in trial order

        Raises:
            ImprovementViolation: If a trial lowered Dice under the theorem's preconditions
            SynthesisError: If a ground truth could not be generated
        """
        if not self.checks_theorem:
            logger.warning("Degradation is not purely subtractive or components are filtered; "
                           "per-trial Dice check disabled")

        args = [(self.synth, self.deg, self.config, t, self.checks_theorem)
                for t in range(self.trials)]

        if self.n_workers > 1:
            outcomes = self._run_parallel(args, progress)
        else:
            outcomes = [_run_trial_star(a) for a in tqdm(args, desc="trials", disable=not progress)]

        records = [record for record, _ in outcomes]
        result = ExperimentResult(
            row=aggregate(records, model_tag, split_tag),
            records=records,
            removed_pixels=[removed for _, removed in outcomes],
            strict_improvements=sum(r.dice_with > r.dice_without for r in records),
        )
        logger.info(
            "%d trials: Dice %.4f -> %.4f, %d strictly improved",
            result.n_trials, result.row.mean_without, result.row.mean_with,
            result.strict_improvements,
        )
        return result

    def _run_parallel(self, args, progress: bool) -> List[TrialOutcome]:
        n_workers = min(self.n_workers, multiprocessing.cpu_count())
        chunksize = max(1, len(args) // (4 * n_workers))
        with ProcessPoolExecutor(max_workers=n_workers) as executor:
            # map keeps trial order regardless of completion order
            results = executor.map(_run_trial_star, args, chunksize=chunksize)
            return list(tqdm(results, total=len(args), desc="trials", disable=not progress))


def improvement_experiment(
    synth: SynthSpec,
    deg: DegradeSpec,
    trials: int,
    config: Optional[PipelineConfig] = None,
    jobs: int = 1,
    model_tag: str = "synthetic"
) -> ReportRow:
    """
    Generate (ground truth, degraded) pairs and report Dice without/with CovHuSeg.

    Args:
        synth: Ground-truth generator parameters
        deg: Degradation parameters
        trials: Number of trials (>= 1)
        config: Pipeline configuration
        jobs: Worker processes
        model_tag: Model column of the returned row

    Returns:
        Aggregated ReportRow
    """
    return ImprovementExperiment(synth, deg, trials, config, jobs).run(model_tag).row

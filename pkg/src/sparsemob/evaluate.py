"""Metrics, the resampling experiment, and consistency/sparsity diagnostics.

Scoring conventions used throughout:

* A prediction may abstain (unlabeled). Abstentions never count toward
  precision, always count against recall and accuracy.
* Precision and recall ratios with an empty denominator are reported as
  ``None`` rather than 0 or NaN; downstream formatting renders them as NA.
* The resampling experiment pools raw counts over trajectories first and
  forms ratios once at the end, so rare per-trajectory degeneracies (an
  empty subsample, say) cannot poison aggregate ratios.
"""
from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .core import (
    LABEL_STAY,
    LABEL_TRAVEL,
    LABEL_UNLABELED,
    MobilityParams,
    Trajectory,
    default_ref_lat,
    global_sparsity,
    local_coverage,
    project_to_meters,
)
from .oracle import dense_stay_windows
from .sds import sds_label, stay_flags_at, travel_flags_at
from .simulate import (
    CtrwConfig,
    continuous_labels,
    generate_ctrw,
    observe,
    synth_schedule,
)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def harmonic_mean(a: float | None, b: float | None) -> float | None:
    """Harmonic mean with None propagation; (0, 0) maps to 0."""
    if a is None or b is None:
        return None
    if a + b == 0:
        return 0.0
    return 2.0 * a * b / (a + b)


def f1_score(precision: float | None, recall: float | None) -> float | None:
    return harmonic_mean(precision, recall)


@dataclass(frozen=True)
class ConfusionCounts:
    """Record-level outcome tally for a stay/travel labeling.

    ``true_*``/``false_*`` follow the predicted class (false_stay is a stay
    prediction whose truth is travel); ``unlabeled_*`` follow the truth
    class of abstained records.
    """

    true_stay: int = 0
    false_stay: int = 0
    true_travel: int = 0
    false_travel: int = 0
    unlabeled_stay: int = 0
    unlabeled_travel: int = 0

    @property
    def total(self) -> int:
        return (
            self.true_stay
            + self.false_stay
            + self.true_travel
            + self.false_travel
            + self.unlabeled_stay
            + self.unlabeled_travel
        )

    @classmethod
    def from_labels(cls, truth: np.ndarray, predicted: np.ndarray) -> "ConfusionCounts":
        truth = np.asarray(truth)
        predicted = np.asarray(predicted)
        if truth.shape != predicted.shape:
            raise ValueError("truth and predicted must have the same length")
        truth_stay = truth == LABEL_STAY
        truth_travel = truth == LABEL_TRAVEL
        if not bool((truth_stay | truth_travel).all()):
            raise ValueError("truth labels must be stay or travel only")
        pred_stay = predicted == LABEL_STAY
        pred_travel = predicted == LABEL_TRAVEL
        pred_none = predicted == LABEL_UNLABELED
        return cls(
            true_stay=int((pred_stay & truth_stay).sum()),
            false_stay=int((pred_stay & truth_travel).sum()),
            true_travel=int((pred_travel & truth_travel).sum()),
            false_travel=int((pred_travel & truth_stay).sum()),
            unlabeled_stay=int((pred_none & truth_stay).sum()),
            unlabeled_travel=int((pred_none & truth_travel).sum()),
        )


@dataclass(frozen=True)
class MetricsReport:
    """Precision/recall per class plus accuracy, None where undefined."""

    stay_precision: float | None
    stay_recall: float | None
    travel_precision: float | None
    travel_recall: float | None
    accuracy: float | None

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "MetricsReport":
        return cls(
            stay_precision=_ratio(c.true_stay, c.true_stay + c.false_stay),
            stay_recall=_ratio(
                c.true_stay, c.true_stay + c.false_travel + c.unlabeled_stay
            ),
            travel_precision=_ratio(c.true_travel, c.true_travel + c.false_travel),
            travel_recall=_ratio(
                c.true_travel, c.true_travel + c.false_stay + c.unlabeled_travel
            ),
            accuracy=_ratio(c.true_stay + c.true_travel, c.total),
        )

    @property
    def f1_accuracy(self) -> float | None:
        """Harmonic mean of the two per-class F1 scores."""
        return harmonic_mean(
            f1_score(self.stay_precision, self.stay_recall),
            f1_score(self.travel_precision, self.travel_recall),
        )


def compute_metrics(
    predicted: np.ndarray,
    truth: np.ndarray,
    eval_mask: np.ndarray | None = None,
) -> MetricsReport:
    """Score predictions against truth, optionally over a record subset.

    ``eval_mask`` selects which records count at all; within the selection,
    abstentions still count against recall and accuracy.
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("predicted and truth must have the same length")
    if eval_mask is not None:
        eval_mask = np.asarray(eval_mask, dtype=bool)
        if eval_mask.shape != truth.shape:
            raise ValueError("eval_mask must have the same length as the labels")
        predicted = predicted[eval_mask]
        truth = truth[eval_mask]
    return MetricsReport.from_counts(ConfusionCounts.from_labels(truth, predicted))


DEFAULT_RATES = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for the synthetic resampling experiment.

    One trajectory per index: a ground-truth walk, an observation schedule
    with power-law gaps, then one labeling run per retention rate. All
    randomness derives from ``seed`` and the trajectory index, so results
    are reproducible for any worker count.
    """

    params: MobilityParams = field(default_factory=MobilityParams)
    walk: CtrwConfig = field(default_factory=CtrwConfig)
    trajectories: int = 100
    rates: tuple[float, ...] = DEFAULT_RATES
    gap_exponent: float = 1.6
    gap_min: float = 60.0
    gap_max: float = 21600.0
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trajectories < 0:
            raise ValueError("trajectories must be >= 0")
        if not self.rates:
            raise ValueError("need at least one rate")
        for r in self.rates:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"rate {r} outside [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class RateOutcome:
    """Pooled counts for one retention rate, with derived ratios.

    Precision counts range over every record of every full trajectory;
    dropped records predict nothing and so cannot enter them. Recall counts
    are taken against rate-independent recoverable pools fixed on the full
    trajectories: records certifiably in a dwell cluster for the stay side,
    truth-travel records with spatial evidence for the travel side.
    Accuracy ranges over the union of the two pools, with abstained or
    dropped records counted as wrong.
    """

    rate: float
    stay_predicted: int
    stay_correct: int
    travel_predicted: int
    travel_correct: int
    stay_recovered: int
    stay_recoverable: int
    travel_recovered: int
    travel_recoverable: int
    accurate: int
    evaluable: int
    gap_seconds: int
    gap_count: int

    @property
    def mean_gap(self) -> float | None:
        """Pooled global sparsity of the subsampled data at this rate."""
        return _ratio(self.gap_seconds, self.gap_count)

    @property
    def stay_precision(self) -> float | None:
        return _ratio(self.stay_correct, self.stay_predicted)

    @property
    def travel_precision(self) -> float | None:
        return _ratio(self.travel_correct, self.travel_predicted)

    @property
    def stay_recall(self) -> float | None:
        return _ratio(self.stay_recovered, self.stay_recoverable)

    @property
    def travel_recall(self) -> float | None:
        return _ratio(self.travel_recovered, self.travel_recoverable)

    @property
    def accuracy(self) -> float | None:
        return _ratio(self.accurate, self.evaluable)

    @property
    def f1_accuracy(self) -> float | None:
        return harmonic_mean(
            f1_score(self.stay_precision, self.stay_recall),
            f1_score(self.travel_precision, self.travel_recall),
        )


_COUNT_FIELDS = 12


def experiment_trajectory(
    config: ExperimentConfig, index: int, *, with_truth: bool = True
):
    """One synthetic trajectory of the experiment, with its path and truth.

    Single generator seeded by (seed, index) drives the walk seed, the
    schedule, and observation jitter, in that order, so trajectory ``index``
    is identical no matter which other indices are generated or in what
    order. Returns (path, trajectory, truth labels or None).
    """
    base = np.random.default_rng((config.seed, index))
    walk = replace(config.walk, seed=int(base.integers(0, 2**62)))
    path = generate_ctrw(walk)
    # enough minimum-length gaps to cover the horizon; clip the overshoot
    times = synth_schedule(
        base,
        int(math.ceil(walk.duration / config.gap_min)),
        gap_exponent=config.gap_exponent,
        gap_min=config.gap_min,
        gap_max=config.gap_max,
    )
    times = times[times <= walk.duration]
    traj = observe(
        path,
        times,
        device=f"sim{index:05d}",
        jitter_radius=walk.jitter_radius,
        rng=base,
    )
    truth = continuous_labels(path, times, config.params) if with_truth else None
    return path, traj, truth


def _trajectory_counts(config: ExperimentConfig, index: int) -> np.ndarray:
    """Per-rate raw counts for one synthetic trajectory.

    The per-rate keep masks use (seed, index, rate position) so rates stay
    independent of each other and of the trajectory draws.
    """
    path, traj, truth = experiment_trajectory(config, index)
    ref = path.origin_lat
    params = config.params
    stay_pool = stay_flags_at(traj, params, params.delta_s, ref_lat=ref)
    travel_pool = travel_flags_at(traj, params, params.delta_s / 2.0, ref_lat=ref) & (
        truth == LABEL_TRAVEL
    )
    eval_pool = stay_pool | travel_pool
    truth_stay = truth == LABEL_STAY
    truth_travel = truth == LABEL_TRAVEL

    n = len(traj)
    out = np.zeros((len(config.rates), _COUNT_FIELDS), dtype=np.int64)
    for pos, rate in enumerate(config.rates):
        keep = np.random.default_rng((config.seed, index, pos)).random(n) < rate
        sub = Trajectory(
            device=traj.device,
            times=traj.times[keep],
            lons=traj.lons[keep],
            lats=traj.lats[keep],
        )
        predicted = np.full(n, LABEL_UNLABELED, dtype=np.int8)
        predicted[keep] = sds_label(sub, params, ref_lat=ref).labels
        pred_stay = predicted == LABEL_STAY
        pred_travel = predicted == LABEL_TRAVEL
        gaps = np.diff(sub.times)
        out[pos] = (
            int(pred_stay.sum()),
            int((pred_stay & truth_stay).sum()),
            int(pred_travel.sum()),
            int((pred_travel & truth_travel).sum()),
            int((pred_stay & stay_pool).sum()),
            int(stay_pool.sum()),
            int((pred_travel & travel_pool).sum()),
            int(travel_pool.sum()),
            int(((predicted == truth) & eval_pool).sum()),
            int(eval_pool.sum()),
            int(gaps.sum()),
            int(gaps.size),
        )
    return out


def resampling_experiment(config: ExperimentConfig) -> list[RateOutcome]:
    """Run the experiment and return one pooled outcome per retention rate."""
    indices = range(config.trajectories)
    if config.workers > 1 and config.trajectories > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(config.workers) as pool:
            parts = pool.map(partial(_trajectory_counts, config), indices)
    else:
        parts = [_trajectory_counts(config, i) for i in indices]
    if parts:
        total = np.sum(parts, axis=0)
    else:
        total = np.zeros((len(config.rates), _COUNT_FIELDS), dtype=np.int64)
    return [
        RateOutcome(rate, *(int(v) for v in total[pos]))
        for pos, rate in enumerate(config.rates)
    ]


@dataclass(frozen=True)
class LocalConsistencyResult:
    """Leave-one-out bracket check tally."""

    tested: int
    violations: int

    @property
    def rate(self) -> float:
        return self.violations / self.tested if self.tested else 0.0


def local_consistency_check(
    traj: Trajectory,
    params: MobilityParams,
    *,
    ref_lat: float | None = None,
) -> LocalConsistencyResult:
    """Leave-one-out test of dwell-cluster locality.

    For each interior record: drop it, find the maximal dwell-certifying
    windows of the remainder, and call the record tested when some window
    strictly time-covers it. A tested record's immediate original neighbors
    should then both lie within the spatial threshold; count a violation
    when either does not.
    """
    if ref_lat is None:
        ref_lat = default_ref_lat(traj)
    x, y = project_to_meters(traj.lons, traj.lats, ref_lat)
    s2 = params.delta_s * params.delta_s
    tested = 0
    violations = 0
    for i in range(1, len(traj) - 1):
        rest = Trajectory(
            device=traj.device,
            times=np.delete(traj.times, i),
            lons=np.delete(traj.lons, i),
            lats=np.delete(traj.lats, i),
        )
        t_i = traj.times[i]
        covered = any(
            rest.times[p] < t_i < rest.times[q]
            for p, q in dense_stay_windows(rest, params, ref_lat=ref_lat)
        )
        if not covered:
            continue
        tested += 1
        left2 = (x[i] - x[i - 1]) ** 2 + (y[i] - y[i - 1]) ** 2
        right2 = (x[i] - x[i + 1]) ** 2 + (y[i] - y[i + 1]) ** 2
        if left2 >= s2 or right2 >= s2:
            violations += 1
    return LocalConsistencyResult(tested=tested, violations=violations)


def prop1_violation_rate(
    trajectories: list[Trajectory],
    params_grid: list[MobilityParams],
    *,
    ref_lat: float | None = None,
) -> dict[MobilityParams, LocalConsistencyResult]:
    """Pooled leave-one-out check over a dataset, per threshold pair."""
    if not trajectories:
        raise ValueError("empty dataset")
    out: dict[MobilityParams, LocalConsistencyResult] = {}
    for params in params_grid:
        tested = 0
        violations = 0
        for traj in trajectories:
            res = local_consistency_check(traj, params, ref_lat=ref_lat)
            tested += res.tested
            violations += res.violations
        out[params] = LocalConsistencyResult(tested=tested, violations=violations)
    return out


@dataclass(frozen=True)
class DeviceStats:
    """Per-device sampling summary."""

    device: str
    records: int
    span_seconds: int
    mean_gap: float | None
    coverage: float | None


def device_stats(traj: Trajectory, params: MobilityParams) -> DeviceStats:
    n = len(traj)
    span = int(traj.times[-1] - traj.times[0]) if n >= 2 else 0
    mean_gap = global_sparsity(traj) if n >= 2 else None
    coverage = local_coverage(traj, params.delta_t) if n >= 1 else None
    return DeviceStats(
        device=traj.device,
        records=n,
        span_seconds=span,
        mean_gap=mean_gap,
        coverage=coverage,
    )


GAP_BIN_EDGES = np.concatenate(([0.0], np.logspace(1.0, 6.0, 21), [np.inf]))

COVERAGE_BIN_EDGES = np.linspace(0.0, 1.0, 11)


def gap_histogram(trajectories: list[Trajectory]) -> tuple[np.ndarray, np.ndarray]:
    """Pooled histogram of inter-record gaps on fixed log-spaced bins.

    Fixed edges keep histograms comparable across datasets; the first and
    last bins absorb sub-10 s and super-11.6-day gaps.
    """
    gaps = [np.diff(t.times) for t in trajectories if len(t) >= 2]
    pooled = np.concatenate(gaps) if gaps else np.zeros(0, dtype=np.int64)
    counts, _ = np.histogram(pooled, bins=GAP_BIN_EDGES)
    return GAP_BIN_EDGES.copy(), counts


@dataclass(frozen=True, eq=False)
class SparsityReport:
    """Dataset-level sampling and label-mix distributions.

    Devices are bucketed by mean gap on the fixed log bins; per bucket the
    report carries the device count, mean trajectory length, and the pooled
    stay/travel/unlabeled record fractions under the given thresholds (NaN
    where a bucket is empty). Coverage histograms count devices by their
    non-isolated-record fraction, one histogram per slicing threshold.
    """

    xi_edges: np.ndarray
    device_counts: np.ndarray
    mean_records: np.ndarray
    stay_fraction: np.ndarray
    travel_fraction: np.ndarray
    unlabeled_fraction: np.ndarray
    coverage_edges: np.ndarray
    coverage_counts: dict[float, np.ndarray]


def sparsity_report(
    trajectories: list[Trajectory],
    params: MobilityParams,
    delta_t_list: list[float] | None = None,
    *,
    ref_lat: float | None = None,
) -> SparsityReport:
    """Build the sparsity/label-mix report; single-record devices only
    enter the coverage histograms (their mean gap is undefined)."""
    if not trajectories:
        raise ValueError("empty dataset")
    if delta_t_list is None:
        delta_t_list = [params.delta_t]
    n_bins = len(GAP_BIN_EDGES) - 1
    device_counts = np.zeros(n_bins, dtype=np.int64)
    record_sums = np.zeros(n_bins, dtype=np.int64)
    label_sums = np.zeros((n_bins, 3), dtype=np.int64)  # stay, travel, unlabeled
    coverage_values: dict[float, list[float]] = {dt: [] for dt in delta_t_list}
    for traj in trajectories:
        for dt in delta_t_list:
            if len(traj) >= 1:
                coverage_values[dt].append(local_coverage(traj, dt))
        if len(traj) < 2:
            continue
        xi = global_sparsity(traj)
        b = int(np.searchsorted(GAP_BIN_EDGES, xi, side="right") - 1)
        b = min(max(b, 0), n_bins - 1)
        device_counts[b] += 1
        record_sums[b] += len(traj)
        labels = sds_label(traj, params, ref_lat=ref_lat).labels
        label_sums[b, 0] += int((labels == LABEL_STAY).sum())
        label_sums[b, 1] += int((labels == LABEL_TRAVEL).sum())
        label_sums[b, 2] += int((labels == LABEL_UNLABELED).sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_records = record_sums / np.where(device_counts, device_counts, np.nan)
        totals = label_sums.sum(axis=1)
        fractions = label_sums / np.where(totals, totals, np.nan)[:, None]
    coverage_counts = {}
    for dt, values in coverage_values.items():
        arr = np.asarray(values, dtype=np.float64)
        counts, _ = np.histogram(arr, bins=COVERAGE_BIN_EDGES)
        # np.histogram's last bin is closed, so full coverage lands in it
        coverage_counts[dt] = counts
    return SparsityReport(
        xi_edges=GAP_BIN_EDGES.copy(),
        device_counts=device_counts,
        mean_records=mean_records,
        stay_fraction=fractions[:, 0],
        travel_fraction=fractions[:, 1],
        unlabeled_fraction=fractions[:, 2],
        coverage_edges=COVERAGE_BIN_EDGES.copy(),
        coverage_counts=coverage_counts,
    )

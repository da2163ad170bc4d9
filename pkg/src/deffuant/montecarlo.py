"""Trial ensembles: outcome classification, consensus probability, bound checks.

A trial draws initial opinions, runs the pairwise-averaging process, and
classifies the outcome with finite-horizon sound criteria:

(a) the opinion diameter is within consensus_tol: consensus reached;
(b) the diameter is within the confidence range AND the schedule is
    connected infinitely often AND inf mu > 0: with every pair in range the
    profile equals the social graph forever, and persistent connected
    averaging contracts to a point, so consensus is certain;
(c) the opinion graph splits into components whose convex hulls are
    certified more than epsilon apart: updates keep each component inside
    its own hull, so the components can never re-enter the confidence
    range and consensus is impossible.

Anything else stays Undecided: the consensus event lives at infinite
horizon and a finite run can only under-approximate it.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import BoundInapplicableError, ConfigurationError
from .geometry import Ball, OpinionSpace, diameter
from .graphs import GraphSchedule, connected_components, opinion_graph
from .invariants import StoppingTimeTracker
from .model import (
    ModelParams,
    MuSchedule,
    OpinionState,
    Trajectory,
    TrajectoryObserver,
    run_trajectory,
)

WILSON_Z95 = 1.959963984540054  # two-sided 95% normal quantile


class Verdict(str, Enum):
    CONSENSUS = "consensus"
    DISSENSUS = "dissensus"
    UNDECIDED = "undecided"


@dataclass(frozen=True, eq=False)
class TrialConfig:
    """Everything one trial needs; master_seed + trial_index fix its randomness."""

    n: int
    params: ModelParams
    space: OpinionSpace
    graph_schedule: GraphSchedule
    mu_schedule: MuSchedule
    horizon: int
    consensus_tol: float = 1e-6
    master_seed: int = 0
    trial_index: int = 0
    track_delta: Optional[float] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if not (self.consensus_tol > 0):
            raise ConfigurationError(f"consensus_tol must be > 0, got {self.consensus_tol}")
        if self.n < 1:
            raise ConfigurationError(f"need n >= 1, got {self.n}")
        if self.graph_schedule.n != self.n:
            raise ConfigurationError(
                f"schedule is over {self.graph_schedule.n} vertices, config n={self.n}")
        if self.space.dimension != self.params.dimension:
            raise ConfigurationError(
                f"space dimension {self.space.dimension} != model dimension "
                f"{self.params.dimension}")
        if self.track_delta is not None and not (self.track_delta > 0):
            raise ConfigurationError(f"track_delta must be > 0, got {self.track_delta}")


@dataclass(frozen=True)
class TrialOutcome:
    verdict: Verdict
    decided_at: Optional[int]
    final_diameter: float


@dataclass(frozen=True)
class TrialResult:
    outcome: TrialOutcome
    tau_delta: Optional[int]
    steps_run: int


# ---------------------------------------------------------------------------
# Hull separation certificates
# ---------------------------------------------------------------------------

def _euclidean_gap_lower_bound(a: np.ndarray, b: np.ndarray, iters: int = 256) -> float:
    """Certified lower bound on the euclidean distance between two convex hulls.

    Frank-Wolfe minimizes ||p - q|| over the two hulls tracking only w = p - q;
    the returned value min_a <a, u> - max_b <b, u> for the unit direction
    u = w/||w|| never exceeds the true hull distance, so a positive return
    is a certificate of separation regardless of convergence.
    """
    w = a.mean(axis=0) - b.mean(axis=0)
    for _ in range(iters):
        va = a[int(np.argmin(a @ w))]
        vb = b[int(np.argmax(b @ w))]
        dw = (va - vb) - w
        denom = float(np.dot(dw, dw))
        if denom <= 1e-30:
            break
        gamma = -float(np.dot(w, dw)) / denom
        if gamma <= 0.0:
            break
        w = w + min(1.0, gamma) * dw
    length = float(np.sqrt(np.dot(w, w)))
    if length <= 1e-15:
        return 0.0
    u = w / length
    return float(np.min(a @ u) - np.max(b @ u))


def certified_hull_gap(a: np.ndarray, b: np.ndarray, norm: str = "euclidean") -> float:
    """Lower bound on the distance between the convex hulls of two point sets.

    Exact in 1D; in higher dimension a euclidean certificate is scaled by
    the worst-case norm ratio, so the result under-approximates but never
    overstates the true gap in the requested norm.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ConfigurationError("hull gap needs point sets of equal dimension")
    d = a.shape[1]
    if d == 1:
        gap = max(b.min() - a.max(), a.min() - b.max())
        return float(max(gap, 0.0))
    g2 = _euclidean_gap_lower_bound(a, b)
    if g2 <= 0.0:
        return 0.0
    if norm == "linf":
        return g2 / float(np.sqrt(d))
    return g2  # euclidean; also valid for l1, which dominates it


# ---------------------------------------------------------------------------
# Outcome classification
# ---------------------------------------------------------------------------

def _verdict_at(
    x: np.ndarray,
    config: TrialConfig,
    conn_io: bool,
    mu_inf: bool,
) -> tuple[Optional[Verdict], float]:
    params = config.params
    diam = diameter(x, params.norm)
    if diam <= config.consensus_tol:
        return Verdict.CONSENSUS, diam
    if diam <= params.epsilon and conn_io and mu_inf:
        return Verdict.CONSENSUS, diam
    if diam > params.epsilon:
        comps = connected_components(opinion_graph(OpinionState(0, x), params), config.n)
        if len(comps) > 1:
            clusters = [x[np.asarray(c, dtype=int)] for c in comps]
            for ai in range(len(clusters)):
                for bi in range(ai + 1, len(clusters)):
                    gap = certified_hull_gap(clusters[ai], clusters[bi], params.norm)
                    if gap <= params.epsilon:
                        return None, diam
            return Verdict.DISSENSUS, diam
    return None, diam


class OutcomeClassifier(TrajectoryObserver):
    """Watches a run and records the first sound verdict.

    Classification runs at the start, every check_every steps, and at the
    end, skipping stretches where no update fired (the state is unchanged).
    Both consensus criteria are monotone in the nonincreasing diameter and
    the dissensus criterion is absorbing, so periodic checking never flips
    a verdict, it only delays decided_at.
    """

    def __init__(self, config: TrialConfig, schedule: Optional[GraphSchedule] = None,
                 check_every: int = 100):
        if check_every < 1:
            raise ConfigurationError(f"check_every must be >= 1, got {check_every}")
        self.config = config
        self.check_every = check_every
        sched = schedule if schedule is not None else config.graph_schedule
        self._conn_io = sched.connected_infinitely_often
        self._mu_inf = config.mu_schedule.inf_positive
        self.verdict: Optional[Verdict] = None
        self.decided_at: Optional[int] = None
        self.final_diameter: float = float("nan")
        self._dirty = False

    def _check(self, x: np.ndarray, t: int):
        verdict, diam = _verdict_at(x, self.config, self._conn_io, self._mu_inf)
        self.final_diameter = diam
        self._dirty = False
        if verdict is not None and self.verdict is None:
            self.verdict = verdict
            self.decided_at = t

    def at_start(self, state: OpinionState):
        self._check(state.opinions, state.time)

    def after_step(self, t, i, j, fired, mu, xi_old, xj_old, x, social_edges):
        self._dirty = self._dirty or fired
        if self.verdict is None and self._dirty and (t + 1) % self.check_every == 0:
            self._check(x, t + 1)

    def at_end(self, t, state, social_edges):
        if self._dirty or self.verdict is None:
            self._check(state.opinions, t)

    def outcome(self) -> TrialOutcome:
        return TrialOutcome(
            verdict=self.verdict if self.verdict is not None else Verdict.UNDECIDED,
            decided_at=self.decided_at,
            final_diameter=self.final_diameter,
        )


def classify_outcome(trajectory: Trajectory, config: TrialConfig) -> TrialOutcome:
    """Classify a recorded trajectory by scanning its stored states in order."""
    conn_io = config.graph_schedule.connected_infinitely_often
    mu_inf = config.mu_schedule.inf_positive
    verdict: Optional[Verdict] = None
    decided_at: Optional[int] = None
    for state in trajectory.states:
        v, _ = _verdict_at(state.opinions, config, conn_io, mu_inf)
        if v is not None:
            verdict, decided_at = v, state.time
            break
    final_diam = diameter(trajectory.final.opinions, config.params.norm)
    return TrialOutcome(
        verdict=verdict if verdict is not None else Verdict.UNDECIDED,
        decided_at=decided_at,
        final_diameter=final_diam,
    )


# ---------------------------------------------------------------------------
# Trials and ensembles
# ---------------------------------------------------------------------------

def _trial_streams(master_seed: int, trial_index: int):
    """Independent per-trial streams; the trial count never shifts them."""
    root = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    init_ss, dyn_ss, graph_ss = root.spawn(3)
    graph_seed = int(graph_ss.generate_state(1, dtype=np.uint64)[0])
    return np.random.default_rng(init_ss), np.random.default_rng(dyn_ss), graph_seed


def run_trial(config: TrialConfig, *, early_stop: bool = True,
              check_every: int = 100) -> TrialResult:
    """Run one trial: fresh initial opinions, classification, and optionally tau.

    With early_stop a trial halts once the verdict is in (and, when a delta
    is tracked, the stopping time is found); otherwise the full horizon runs.
    """
    init_rng, dyn_rng, graph_seed = _trial_streams(config.master_seed, config.trial_index)
    schedule = config.graph_schedule.reseeded(graph_seed)
    initial = OpinionState(0, config.space.sample(init_rng, config.n))
    classifier = OutcomeClassifier(config, schedule, check_every=check_every)
    observers: list[TrajectoryObserver] = [classifier]
    tracker: Optional[StoppingTimeTracker] = None
    if config.track_delta is not None:
        tracker = StoppingTimeTracker(config.track_delta, config.params)
        observers.append(tracker)

    stop_cb = None
    if early_stop:
        def stop_cb() -> bool:
            if classifier.verdict is None:
                return False
            return tracker is None or tracker.time is not None

    trajectory = run_trajectory(
        initial, schedule, config.mu_schedule, config.params, config.horizon,
        dyn_rng, observers=observers, record_stride=None, record_events=False,
        stop_condition=stop_cb,
    )
    return TrialResult(
        outcome=classifier.outcome(),
        tau_delta=tracker.time if tracker is not None else None,
        steps_run=trajectory.steps_run,
    )


@dataclass(frozen=True)
class TrialRow:
    trial_index: int
    verdict: Verdict
    decided_at: Optional[int]
    final_diameter: float
    tau_delta: Optional[int]
    steps_run: int


def _trial_row(config: TrialConfig) -> TrialRow:
    result = run_trial(config)
    return TrialRow(
        trial_index=config.trial_index,
        verdict=result.outcome.verdict,
        decided_at=result.outcome.decided_at,
        final_diameter=result.outcome.final_diameter,
        tau_delta=result.tau_delta,
        steps_run=result.steps_run,
    )


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (good coverage near 0/1)."""
    if trials < 0 or not (0 <= successes <= max(trials, 0)):
        raise ConfigurationError(f"bad counts: {successes}/{trials}")
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    lo = max(0.0, float(center - half))
    hi = min(1.0, float(center + half))
    # the exact endpoints always bracket p; keep that under rounding
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class ConsensusEstimate:
    """Consensus fraction with its Wilson 95% interval.

    Undecided trials count in the denominator but not the numerator, which
    can only understate the consensus probability; safe when the point is
    to challenge a lower bound.
    """

    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_undecided: int

    def __post_init__(self):
        if not (0.0 <= self.ci_low <= self.p_hat <= self.ci_high <= 1.0):
            raise ConfigurationError(
                f"estimate out of order: {self.ci_low}, {self.p_hat}, {self.ci_high}")

    @property
    def std_error(self) -> float:
        if self.n_trials == 0:
            return float("inf")
        return float(np.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n_trials))


@dataclass
class EnsembleResult:
    estimate: ConsensusEstimate
    counts: dict[str, int]
    rows: list[TrialRow]


def run_ensemble(
    template: TrialConfig,
    n_trials: int,
    master_seed: Optional[int] = None,
    workers: int = 1,
) -> EnsembleResult:
    """Run independent trials indexed 0..n_trials-1 and aggregate verdicts.

    Results are keyed by trial index, so the worker count changes wall time
    but never the output.
    """
    if n_trials < 1:
        raise ConfigurationError(f"need n_trials >= 1, got {n_trials}")
    if workers < 1:
        raise ConfigurationError(f"need workers >= 1, got {workers}")
    seed = template.master_seed if master_seed is None else master_seed
    configs = [dataclasses.replace(template, master_seed=seed, trial_index=k)
               for k in range(n_trials)]
    if workers > 1:
        chunk = max(1, n_trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_trial_row, configs, chunksize=chunk))
    else:
        rows = [_trial_row(c) for c in configs]
    rows.sort(key=lambda r: r.trial_index)

    counts = {v.value: 0 for v in Verdict}
    for row in rows:
        counts[row.verdict.value] += 1
    n_consensus = counts[Verdict.CONSENSUS.value]
    ci_low, ci_high = wilson_interval(n_consensus, n_trials)
    estimate = ConsensusEstimate(
        p_hat=n_consensus / n_trials,
        ci_low=ci_low,
        ci_high=ci_high,
        n_trials=n_trials,
        n_undecided=counts[Verdict.UNDECIDED.value],
    )
    return EnsembleResult(estimate=estimate, counts=counts, rows=rows)


def estimate_consensus_probability(
    config_template: TrialConfig,
    n_trials: int,
    master_seed: Optional[int] = None,
    workers: int = 1,
) -> ConsensusEstimate:
    return run_ensemble(config_template, n_trials, master_seed, workers).estimate


# ---------------------------------------------------------------------------
# The lower bound and its comparison report
# ---------------------------------------------------------------------------

def theoretical_lower_bound(epsilon: float, ball: Ball, expected_dist: float) -> float:
    """Consensus-probability lower bound max(0, 1 - E d(X, center)/(eps - radius)).

    Only meaningful when the confidence range exceeds the enclosing radius;
    otherwise the hypothesis fails and the bound is inapplicable rather
    than zero.
    """
    if not (epsilon > ball.radius):
        raise BoundInapplicableError(
            f"bound needs epsilon > enclosing radius, got epsilon={epsilon}, "
            f"radius={ball.radius}")
    if expected_dist < 0:
        raise ConfigurationError(f"expected distance must be >= 0, got {expected_dist}")
    return float(max(0.0, 1.0 - expected_dist / (epsilon - ball.radius)))


@dataclass(frozen=True)
class BoundReport:
    """Estimate vs theoretical lower bound; passed means no contradiction."""

    p_hat: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_undecided: int
    bound: Optional[float]
    margin: Optional[float]
    passed: Optional[bool]


def bound_comparison_report(estimate: ConsensusEstimate,
                            bound: Optional[float]) -> BoundReport:
    """Compare the Monte Carlo estimate with a lower bound (None = inapplicable).

    The data contradict the bound only when the entire confidence interval
    sits below it; margin is how far ci_low clears the bound.
    """
    if bound is None:
        return BoundReport(estimate.p_hat, estimate.ci_low, estimate.ci_high,
                           estimate.n_trials, estimate.n_undecided,
                           bound=None, margin=None, passed=None)
    b = float(bound)
    return BoundReport(estimate.p_hat, estimate.ci_low, estimate.ci_high,
                       estimate.n_trials, estimate.n_undecided,
                       bound=b, margin=estimate.ci_low - b,
                       passed=bool(estimate.ci_high >= b))

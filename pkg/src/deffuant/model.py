"""Core state and single-step update of the pairwise bounded-confidence model.

Agents hold opinions in R^d. At each time step one edge of the current social
graph is selected uniformly at random; if the endpoints' opinions are within
the confidence threshold ``epsilon`` they move toward each other:

    x_i' = x_i + mu(t) * (x_j - x_i)
    x_j' = x_j + mu(t) * (x_i - x_j)

with mu(t) in [0, 1/2]. Both the social graph and mu may change every step;
they are supplied as schedules so that runs replay deterministically from a
seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .norms import validate_norm, vector_norm

if TYPE_CHECKING:
    from .graphs import EdgeSet, GraphSchedule


# ---------------------------------------------------------------------------
# Parameters and schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Run-wide model parameters.

    epsilon: confidence threshold (> 0), in opinion units.
    dimension: opinion space dimension d >= 1.
    norm: which norm measures opinion distance.
    """

    epsilon: float
    dimension: int = 1
    norm: str = "euclidean"

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ConfigurationError(f"dimension must be a positive integer, got {self.dimension}")
        validate_norm(self.norm)


class MuSchedule:
    """Per-step convergence parameter mu(t) in [0, 1/2]."""

    def mu_at(self, t: int, rng: np.random.Generator) -> float:
        raise NotImplementedError

    @property
    def inf_positive(self) -> bool:
        """True when inf_t mu(t) > 0 is guaranteed by construction."""
        raise NotImplementedError


def _check_mu(value: float) -> float:
    if not (0.0 <= value <= 0.5):
        raise ConfigurationError(f"mu must lie in [0, 1/2], got {value}")
    return float(value)


@dataclass(frozen=True)
class ConstantMu(MuSchedule):
    value: float

    def __post_init__(self):
        _check_mu(self.value)

    def mu_at(self, t, rng):
        return self.value

    @property
    def inf_positive(self):
        return self.value > 0


@dataclass(frozen=True)
class SequenceMu(MuSchedule):
    """Explicit per-step values; the last value persists beyond the list."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ConfigurationError("SequenceMu needs at least one value")
        for v in self.values:
            _check_mu(v)

    def mu_at(self, t, rng):
        return self.values[t] if t < len(self.values) else self.values[-1]

    @property
    def inf_positive(self):
        return min(self.values) > 0


@dataclass(frozen=True)
class UniformMu(MuSchedule):
    """mu(t) drawn i.i.d. uniform from [low, high] each step."""

    low: float
    high: float

    def __post_init__(self):
        _check_mu(self.low)
        _check_mu(self.high)
        if self.low > self.high:
            raise ConfigurationError(f"need low <= high, got [{self.low}, {self.high}]")

    def mu_at(self, t, rng):
        return float(rng.uniform(self.low, self.high))

    @property
    def inf_positive(self):
        return self.low > 0


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

@dataclass
class OpinionState:
    """Opinions of all agents at one time step: array of shape (n, d)."""

    time: int
    opinions: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.opinions, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ConfigurationError(f"opinions must be an (n, d) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("opinions must be finite")
        self.opinions = arr

    @property
    def n(self) -> int:
        return self.opinions.shape[0]

    @property
    def dimension(self) -> int:
        return self.opinions.shape[1]

    def copy(self) -> "OpinionState":
        return OpinionState(self.time, self.opinions.copy())


@dataclass(frozen=True, slots=True)
class StepEvent:
    """Audit record of one time step."""

    time: int
    selected_edge: Optional[tuple[int, int]]
    fired: bool
    mu_used: float


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

def opinion_distance(a: np.ndarray, b: np.ndarray, norm: str = "euclidean") -> float:
    """Distance between two opinion vectors in the chosen norm."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return vector_norm(a - b, norm)


def select_pair(edges: "EdgeSet", rng: np.random.Generator) -> Optional[tuple[int, int]]:
    """Pick one edge uniformly at random; None when the edge set is empty."""
    arr = edges.array
    m = arr.shape[0]
    if m == 0:
        return None
    k = rng.integers(0, m)
    return int(arr[k, 0]), int(arr[k, 1])


def step(
    state: OpinionState,
    edge: tuple[int, int],
    mu: float,
    params: ModelParams,
) -> tuple[OpinionState, StepEvent]:
    """One update on the given pair; returns the new state and its audit event.

    The update fires iff the pair's pre-step distance is <= epsilon (exact
    comparison, no slack). Non-interacting agents are untouched.
    """
    i, j = edge
    if i == j:
        raise ConfigurationError(f"self-loop edge ({i}, {j})")
    _check_mu(mu)
    x = state.opinions
    n = x.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise ConfigurationError(f"edge ({i}, {j}) out of range for n={n}")
    if state.dimension != params.dimension:
        raise ConfigurationError(
            f"state dimension {state.dimension} != params dimension {params.dimension}"
        )
    new = x.copy()
    diff = x[j] - x[i]
    dist = vector_norm(diff, params.norm)
    fired = dist <= params.epsilon
    if fired:
        upd = mu * diff
        new[i] += upd
        new[j] -= upd
    event = StepEvent(time=state.time, selected_edge=(i, j), fired=fired, mu_used=float(mu))
    return OpinionState(state.time + 1, new), event


# ---------------------------------------------------------------------------
# Trajectory engine
# ---------------------------------------------------------------------------

class TrajectoryObserver:
    """Hook interface called by ``run_trajectory``.

    ``before_step`` sees the state and social edges *at* time t (before the
    update); ``after_step`` sees the post-update state together with the
    selected pair's pre-step rows. Arrays passed in are live views: copy
    before retaining. Observers abort the run by raising InvariantViolation.
    """

    def at_start(self, state: OpinionState) -> None:
        pass

    def before_step(self, t: int, x: np.ndarray, social_edges: "EdgeSet") -> None:
        pass

    def after_step(
        self,
        t: int,
        i: int,
        j: int,
        fired: bool,
        mu: float,
        xi_old: Optional[np.ndarray],
        xj_old: Optional[np.ndarray],
        x: np.ndarray,
        social_edges: "EdgeSet",
    ) -> None:
        pass

    def at_end(self, t: int, state: OpinionState, social_edges: "EdgeSet") -> None:
        pass


@dataclass
class Trajectory:
    """Recorded run: states at the recording stride plus every step event."""

    params: ModelParams
    initial: OpinionState
    final: OpinionState
    states: list[OpinionState]
    events: list[StepEvent] = field(default_factory=list)
    steps_run: int = 0
    stopped_early: bool = False

    @property
    def n(self) -> int:
        return self.initial.n


def run_trajectory(
    initial: OpinionState,
    graph_schedule: "GraphSchedule",
    mu_schedule: MuSchedule,
    params: ModelParams,
    horizon: int,
    rng: np.random.Generator,
    observers: Sequence[TrajectoryObserver] = (),
    record_stride: Optional[int] = 1,
    record_events: bool = True,
    stop_condition: Optional[Callable[[], bool]] = None,
) -> Trajectory:
    """Run the process for ``horizon`` steps (or until ``stop_condition``).

    Per step: evaluate E(t), select one edge uniformly from it, draw mu(t),
    apply the update if the pair is within epsilon, then notify observers.
    ``record_stride=None`` keeps only the initial and final states.
    """
    if horizon < 0:
        raise ConfigurationError(f"horizon must be >= 0, got {horizon}")
    if record_stride is not None and record_stride < 1:
        raise ConfigurationError(f"record_stride must be >= 1, got {record_stride}")
    if initial.dimension != params.dimension:
        raise ConfigurationError(
            f"initial dimension {initial.dimension} != params dimension {params.dimension}"
        )
    if graph_schedule.n != initial.n:
        raise ConfigurationError(
            f"schedule is over {graph_schedule.n} vertices but state has {initial.n} agents"
        )

    x = initial.opinions.astype(float, copy=True)
    eps = params.epsilon
    norm = params.norm
    observers = tuple(observers)

    start_state = OpinionState(0, x.copy())
    states = [start_state]
    events: list[StepEvent] = []

    for obs in observers:
        obs.at_start(start_state)

    t = 0
    stopped = False
    while t < horizon:
        if stop_condition is not None and stop_condition():
            stopped = True
            break
        edges = graph_schedule.edges_at(t)
        for obs in observers:
            obs.before_step(t, x, edges)
        pair = select_pair(edges, rng)
        mu = mu_schedule.mu_at(t, rng)
        fired = False
        i = j = -1
        xi_old = xj_old = None
        if pair is not None:
            i, j = pair
            diff = x[j] - x[i]
            dist = vector_norm(diff, norm)
            if observers:
                xi_old = x[i].copy()
                xj_old = x[j].copy()
            if dist <= eps:
                upd = mu * diff
                x[i] += upd
                x[j] -= upd
                fired = True
        if record_events:
            events.append(StepEvent(time=t, selected_edge=pair, fired=fired, mu_used=mu))
        for obs in observers:
            obs.after_step(t, i, j, fired, mu, xi_old, xj_old, x, edges)
        t += 1
        if record_stride is not None and t % record_stride == 0:
            states.append(OpinionState(t, x.copy()))

    final = OpinionState(t, x.copy())
    if states[-1].time != t:
        states.append(final.copy())
    final_edges = graph_schedule.edges_at(t)
    for obs in observers:
        obs.at_end(t, final, final_edges)

    return Trajectory(
        params=params,
        initial=start_state,
        final=final,
        states=states,
        events=events,
        steps_run=t,
        stopped_early=stopped,
    )

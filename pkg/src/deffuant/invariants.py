"""Trajectory invariants: pairwise contraction, potential decay, stopping times.

Every averaging update with rate in [0, 1/2] pulls the interacting pair
toward each other without moving their sum, so for any reference point c the
pair's total distance to c cannot grow, and the summed distance of the whole
population to c is nonincreasing.  The checkers here measure the slack of
those inequalities on live trajectories and raise InvariantViolation when a
slack dips below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InvariantViolation
from .graphs import GraphSchedule
from .model import ModelParams, OpinionState, TrajectoryObserver
from .norms import cross_distances, distances_to_point, rowwise_norm, vector_norm

SLACK_TOL = 1e-9
IDENTITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Pure single-step checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionReport:
    """Slacks of the pair contraction inequalities at one step.

    basic_slack:   (pair distance-sum to c before) - (after); >= 0.
    refined_slack: same but against the tighter budget that charges the
                   displacement and refunds twice the midpoint's distance
                   to c; >= 0.
    """

    step: int
    basic_slack: float
    refined_slack: float
    c: np.ndarray


def _pair_rows(state: OpinionState, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    i, j = pair
    n = state.n
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise ConfigurationError(f"invalid pair {pair} for n={n}")
    return state.opinions[i], state.opinions[j]


def pair_contraction_slacks(
    pre: OpinionState,
    post: OpinionState,
    pair: tuple[int, int],
    c: np.ndarray,
    norm: str = "euclidean",
) -> ContractionReport:
    """Slacks of the two pair inequalities for one interaction step."""
    c = np.asarray(c, dtype=float).ravel()
    xi0, xj0 = _pair_rows(pre, pair)
    xi1, xj1 = _pair_rows(post, pair)
    lhs = vector_norm(xi1 - c, norm) + vector_norm(xj1 - c, norm)
    rhs = vector_norm(xi0 - c, norm) + vector_norm(xj0 - c, norm)
    disp = vector_norm(xi0 - xi1, norm)
    mid = (xi0 + xj0) / 2.0
    refined_rhs = rhs - 2.0 * disp + 2.0 * vector_norm(mid - c, norm)
    return ContractionReport(
        step=pre.time,
        basic_slack=float(rhs - lhs),
        refined_slack=float(refined_rhs - lhs),
        c=c,
    )


def potential_drop_slack(
    pre: OpinionState,
    post: OpinionState,
    pair: tuple[int, int],
    c: np.ndarray,
    norm: str = "euclidean",
) -> float:
    """Slack of the per-step potential decrement bound.

    The drop of the summed distance to c must cover twice the displacement
    of one updated agent minus twice the pair midpoint's distance to c.
    """
    c = np.asarray(c, dtype=float).ravel()
    from .geometry import distance_potential

    z_pre = distance_potential(pre.opinions, c, norm)
    z_post = distance_potential(post.opinions, c, norm)
    xi0, xj0 = _pair_rows(pre, pair)
    xi1, _ = _pair_rows(post, pair)
    disp = vector_norm(xi0 - xi1, norm)
    mid = (xi0 + xj0) / 2.0
    return float((z_pre - z_post) - 2.0 * (disp - vector_norm(mid - c, norm)))


@dataclass(frozen=True)
class MonotoneResult:
    ok: bool
    step: Optional[int] = None
    c_index: Optional[int] = None
    drift: Optional[float] = None


def check_potential_monotone(
    states: Sequence[OpinionState],
    c_samples: np.ndarray,
    norm: str = "euclidean",
    tol: float = SLACK_TOL,
) -> MonotoneResult:
    """Check the summed distance to each sampled c never rises between states."""
    cs = np.atleast_2d(np.asarray(c_samples, dtype=float))
    if len(states) < 2:
        return MonotoneResult(ok=True)
    prev = cross_distances(states[0].opinions, cs, norm).sum(axis=0)
    for state in states[1:]:
        cur = cross_distances(state.opinions, cs, norm).sum(axis=0)
        drift = cur - prev
        worst = int(np.argmax(drift))
        if drift[worst] > tol:
            return MonotoneResult(ok=False, step=state.time, c_index=worst,
                                  drift=float(drift[worst]))
        prev = cur
    return MonotoneResult(ok=True)


def lattice_points(lower: np.ndarray, upper: np.ndarray, count: int) -> np.ndarray:
    """(count, d) mesh of reference points covering the box [lower, upper]."""
    lo = np.asarray(lower, dtype=float).ravel()
    hi = np.asarray(upper, dtype=float).ravel()
    if lo.shape != hi.shape or not np.all(lo <= hi):
        raise ConfigurationError("lattice needs lower <= upper of equal length")
    if count < 1:
        raise ConfigurationError(f"lattice count must be >= 1, got {count}")
    d = lo.shape[0]
    per_axis = int(np.ceil(count ** (1.0 / d)))
    axes = [np.linspace(lo[k], hi[k], per_axis) if hi[k] > lo[k] else np.array([lo[k]])
            for k in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return mesh[:count] if mesh.shape[0] >= count else mesh


# ---------------------------------------------------------------------------
# Observers
# ---------------------------------------------------------------------------

class UpdateIdentityObserver(TrajectoryObserver):
    """Checks the algebraic identities of every fired update.

    The pair sum is conserved, both agents move by the same distance, and
    the realized displacement equals the reported rate times the pre-step
    gap (the rate itself is validated to [0, 1/2] at the schedule).
    """

    def __init__(self, params: ModelParams, tol: float = IDENTITY_TOL):
        self.params = params
        self.tol = float(tol)
        self.checked = 0
        self.max_sum_error = 0.0
        self.max_displacement_gap = 0.0
        self.max_rate_residual = 0.0

    def after_step(self, t, i, j, fired, mu, xi_old, xj_old, x, social_edges):
        if not fired:
            return
        norm = self.params.norm
        xi1, xj1 = x[i], x[j]
        sum_err = float(np.max(np.abs((xi_old + xj_old) - (xi1 + xj1))))
        self.max_sum_error = max(self.max_sum_error, sum_err)
        if sum_err > self.tol:
            raise InvariantViolation("pair-sum-conservation", step=t, slack=-sum_err,
                                     detail=f"pair ({i},{j}) sum moved by {sum_err:.3e}")
        di = vector_norm(xi1 - xi_old, norm)
        dj = vector_norm(xj1 - xj_old, norm)
        gap_err = abs(di - dj)
        self.max_displacement_gap = max(self.max_displacement_gap, gap_err)
        if gap_err > self.tol:
            raise InvariantViolation("equal-displacement", step=t, slack=-gap_err,
                                     detail=f"pair ({i},{j}) moved {di:.6e} vs {dj:.6e}")
        if not (0.0 <= mu <= 0.5):
            raise InvariantViolation("rate-range", step=t, slack=min(mu, 0.5 - mu),
                                     detail=f"reported rate {mu!r}")
        resid = float(np.max(np.abs((xi1 - xi_old) - mu * (xj_old - xi_old))))
        self.max_rate_residual = max(self.max_rate_residual, resid)
        if resid > self.tol:
            raise InvariantViolation("realized-rate", step=t, slack=-resid,
                                     detail=f"pair ({i},{j}) displacement off "
                                            f"rate*gap by {resid:.3e}")
        self.checked += 1


class ContractionObserver(TrajectoryObserver):
    """Checks contraction slacks and potential decay against fixed reference points.

    Distances from every agent to each reference point are cached; a fired
    step only recomputes the two touched rows, so the per-step checks stay
    O(k d).  The midpoint of the interacting pair is also used as an extra
    per-step reference.  The summed distance only changes through the pair,
    so its per-step drift equals minus the basic slack.
    """

    def __init__(self, c_points: np.ndarray, params: ModelParams,
                 tol: float = SLACK_TOL, check_midpoint: bool = True,
                 check_basic: bool = True, check_refined: bool = True):
        cs = np.atleast_2d(np.asarray(c_points, dtype=float))
        if cs.shape[1] != params.dimension:
            raise ConfigurationError(
                f"reference points have d={cs.shape[1]}, model d={params.dimension}")
        self.c_points = cs
        self.params = params
        self.tol = float(tol)
        self.check_midpoint = check_midpoint
        self.check_basic = check_basic
        self.check_refined = check_refined
        self.fired_steps = 0
        self.min_basic_slack = np.inf
        self.min_refined_slack = np.inf
        self.max_potential_drift = -np.inf
        self._dist: Optional[np.ndarray] = None  # (n, k) agent-to-reference distances

    def at_start(self, state: OpinionState):
        self._dist = cross_distances(state.opinions, self.c_points, self.params.norm)

    def _register(self, t, basic: float, refined: float, where: str):
        self.min_basic_slack = min(self.min_basic_slack, basic)
        self.min_refined_slack = min(self.min_refined_slack, refined)
        self.max_potential_drift = max(self.max_potential_drift, -basic)
        if self.check_basic and basic < -self.tol:
            raise InvariantViolation("pair-contraction", step=t, slack=basic,
                                     detail=f"basic slack at {where}")
        if self.check_refined and refined < -self.tol:
            raise InvariantViolation("potential-drop", step=t, slack=refined,
                                     detail=f"refined slack at {where}")

    def after_step(self, t, i, j, fired, mu, xi_old, xj_old, x, social_edges):
        if not fired:
            return
        assert self._dist is not None
        norm = self.params.norm
        pre_rows = self._dist[i] + self._dist[j]  # (k,)
        mid = (xi_old + xj_old) / 2.0
        rows = cross_distances(np.stack((x[i], x[j], mid)), self.c_points, norm)
        new_i, new_j, d_mid = rows[0], rows[1], rows[2]
        post_rows = new_i + new_j
        disp = vector_norm(x[i] - xi_old, norm)

        basic = pre_rows - post_rows
        refined = basic - 2.0 * disp + 2.0 * d_mid
        worst_b = int(np.argmin(basic))
        worst_r = int(np.argmin(refined))
        self._register(t, float(basic[worst_b]), float(refined[worst_r]),
                       f"reference {worst_b}/{worst_r}, pair ({i},{j})")

        if self.check_midpoint:
            # Using the pair midpoint as reference: its distance to itself is 0.
            r = rowwise_norm(np.stack((xi_old - mid, xj_old - mid,
                                       x[i] - mid, x[j] - mid)), norm)
            b_mid = (r[0] + r[1]) - (r[2] + r[3])
            self._register(t, float(b_mid), float(b_mid - 2.0 * disp),
                           f"pair midpoint, pair ({i},{j})")

        self._dist[i] = new_i
        self._dist[j] = new_j
        self.fired_steps += 1


class DiameterMonotoneObserver(TrajectoryObserver):
    """Checks the opinion diameter never grows; caches the pairwise matrix."""

    def __init__(self, params: ModelParams, tol: float = IDENTITY_TOL):
        self.params = params
        self.tol = float(tol)
        self.max_increase = -np.inf
        self.diameter: float = 0.0
        self._mat: Optional[np.ndarray] = None

    def at_start(self, state: OpinionState):
        self._mat = cross_distances(state.opinions, state.opinions, self.params.norm)
        self.diameter = float(self._mat.max())

    def after_step(self, t, i, j, fired, mu, xi_old, xj_old, x, social_edges):
        if not fired:
            return
        assert self._mat is not None
        rows = cross_distances(x[np.array((i, j))], x, self.params.norm)
        for k, a in enumerate((i, j)):
            self._mat[a, :] = rows[k]
            self._mat[:, a] = rows[k]
        new_diam = float(self._mat.max())
        inc = new_diam - self.diameter
        self.max_increase = max(self.max_increase, inc)
        if inc > self.tol:
            raise InvariantViolation("diameter-monotone", step=t, slack=-inc,
                                     detail=f"diameter rose {self.diameter!r} -> {new_diam!r}")
        self.diameter = new_diam


class StoppingTimeTracker(TrajectoryObserver):
    """First time every social edge within the confidence range is short.

    The condition is evaluated on the pre-step state against that step's
    social edges, and once more on the final state; ``time`` stays None if
    the run ends before the condition holds.
    """

    def __init__(self, delta: float, params: ModelParams):
        if not (delta > 0):
            raise ConfigurationError(f"delta must be > 0, got {delta}")
        self.delta = float(delta)
        self.params = params
        self.time: Optional[int] = None

    def _holds(self, x: np.ndarray, social_edges) -> bool:
        arr = social_edges.array
        if arr.size == 0:
            return True
        lengths = rowwise_norm(x[arr[:, 0]] - x[arr[:, 1]], self.params.norm)
        active = lengths <= self.params.epsilon
        return not bool(np.any(lengths[active] > self.delta))

    def before_step(self, t, x, social_edges):
        if self.time is None and self._holds(x, social_edges):
            self.time = t

    def at_end(self, t, state, social_edges):
        if self.time is None and self._holds(state.opinions, social_edges):
            self.time = t


class OpinionGraphChangeCounter(TrajectoryObserver):
    """Counts steps where confidence-range edges appear or disappear.

    Purely observational: edge appearance is possible (an update can pull a
    third agent into range), so no monotonicity is asserted here.
    """

    def __init__(self, params: ModelParams):
        self.params = params
        self.gained_steps = 0
        self.lost_steps = 0
        self._adj: Optional[np.ndarray] = None

    def at_start(self, state: OpinionState):
        d = cross_distances(state.opinions, state.opinions, self.params.norm)
        self._adj = d <= self.params.epsilon

    def after_step(self, t, i, j, fired, mu, xi_old, xj_old, x, social_edges):
        if not fired:
            return
        assert self._adj is not None
        norm, eps = self.params.norm, self.params.epsilon
        gained = lost = False
        for a in (i, j):
            row = distances_to_point(x, x[a], norm) <= eps
            old = self._adj[a]
            gained = gained or bool(np.any(row & ~old))
            lost = lost or bool(np.any(old & ~row))
            self._adj[a, :] = row
            self._adj[:, a] = row
        self.gained_steps += int(gained)
        self.lost_steps += int(lost)


# ---------------------------------------------------------------------------
# Stopping times over recorded trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StoppingTimeRecord:
    """Stopping times for one threshold delta over a finite run.

    tau_delta is the first step whose pre-step profile had all edges short;
    T_delta is the first recorded step from which the profile is connected
    and stays short through the horizon.  Both are None when not reached;
    T_delta is certified only up to the horizon, so it is always flagged
    censored.
    """

    delta: float
    tau_delta: Optional[int]
    T_delta: Optional[int]
    horizon: int
    censored: bool = True

    def __post_init__(self):
        if self.tau_delta is not None and self.T_delta is not None:
            if not (self.tau_delta <= self.T_delta <= self.horizon):
                raise ConfigurationError(
                    f"stopping times out of order: tau={self.tau_delta}, "
                    f"T={self.T_delta}, horizon={self.horizon}")


def settle_time(
    states: Sequence[OpinionState],
    schedule: GraphSchedule,
    delta: float,
    params: ModelParams,
) -> Optional[int]:
    """First recorded time with a connected profile that stays short afterward.

    Scans the recorded states; each is paired with the social edges active
    at its own step.  Certification is only as strong as the horizon and the
    recording stride.
    """
    if not (delta > 0):
        raise ConfigurationError(f"delta must be > 0, got {delta}")
    if not states:
        return None
    from .graphs import is_connected, opinion_graph, profile

    n = states[0].n
    connected = np.zeros(len(states), dtype=bool)
    short = np.zeros(len(states), dtype=bool)
    for k, state in enumerate(states):
        social = schedule.edges_at(state.time)
        prof = profile(social, opinion_graph(state, params))
        arr = prof.array
        if arr.size == 0:
            short[k] = True
        else:
            lengths = rowwise_norm(state.opinions[arr[:, 0]] - state.opinions[arr[:, 1]],
                                   params.norm)
            short[k] = bool(np.all(lengths <= delta))
        connected[k] = is_connected(prof, n)
    ok_suffix = np.logical_and.accumulate(short[::-1])[::-1]
    hits = np.nonzero(connected & ok_suffix)[0]
    if hits.size == 0:
        return None
    return int(states[int(hits[0])].time)

import numpy as np
import pytest

from deffuant import (
    ConfigurationError,
    ConstantGraph,
    ConstantMu,
    ContractionObserver,
    DiameterMonotoneObserver,
    EdgeSet,
    InvariantViolation,
    ModelParams,
    OpinionGraphChangeCounter,
    OpinionState,
    StoppingTimeRecord,
    StoppingTimeTracker,
    UpdateIdentityObserver,
    check_potential_monotone,
    complete_edges,
    lattice_points,
    pair_contraction_slacks,
    potential_drop_slack,
    run_trajectory,
    settle_time,
)
from deffuant.norms import NORMS

P1 = ModelParams(epsilon=1.0)


# ---------------------------------------------------------------------------
# Pure slack functions
# ---------------------------------------------------------------------------

def test_contraction_slacks_tight_at_midpoint_merge():
    """mu = 1/2 merges the pair at its midpoint; with c at that midpoint the
    refined inequality is tight (slack exactly 0) and the basic slack equals
    the pre-step pair distance."""
    pre = OpinionState(0, np.array([0.0, 0.4]))
    post = OpinionState(1, np.array([0.2, 0.2]))
    rep = pair_contraction_slacks(pre, post, (0, 1), np.array([0.2]))
    assert rep.basic_slack == pytest.approx(0.4, abs=1e-15)
    assert rep.refined_slack == pytest.approx(0.0, abs=1e-14)
    assert potential_drop_slack(pre, post, (0, 1), np.array([0.2])) == pytest.approx(
        0.0, abs=1e-14)


def test_contraction_slacks_nonnegative_for_real_updates():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = int(rng.integers(1, 4))
        norm = NORMS[int(rng.integers(0, 3))]
        n = int(rng.integers(2, 7))
        x = rng.normal(size=(n, d))
        i, j = rng.choice(n, size=2, replace=False)
        mu = float(rng.uniform(0.0, 0.5))
        new = x.copy()
        upd = mu * (x[j] - x[i])
        new[i] += upd
        new[j] -= upd
        pre, post = OpinionState(0, x), OpinionState(1, new)
        c = rng.normal(size=d)
        rep = pair_contraction_slacks(pre, post, (int(i), int(j)), c, norm)
        assert rep.basic_slack >= -1e-12
        assert rep.refined_slack >= -1e-12
        assert potential_drop_slack(pre, post, (int(i), int(j)), c, norm) >= -1e-12


def test_contraction_slacks_flag_agents_moving_apart():
    pre = OpinionState(0, np.array([0.0, 0.4]))
    bad = OpinionState(1, np.array([-0.2, 0.6]))
    rep = pair_contraction_slacks(pre, bad, (0, 1), np.array([0.2]))
    assert rep.basic_slack == pytest.approx(-0.4)
    assert rep.refined_slack < 0
    assert potential_drop_slack(pre, bad, (0, 1), np.array([0.2])) == pytest.approx(-0.8)


def test_refined_slack_flags_overshoot_that_basic_misses():
    # effective rate 0.9: the pair crosses. Distances to c = 0 sum to 1
    # either way, so the basic inequality is blind to it; the refined one
    # charges the displacement and goes negative.
    pre = OpinionState(0, np.array([0.0, 1.0]))
    bad = OpinionState(1, np.array([0.9, 0.1]))
    rep = pair_contraction_slacks(pre, bad, (0, 1), np.array([0.0]))
    assert rep.basic_slack == pytest.approx(0.0, abs=1e-15)
    assert rep.refined_slack == pytest.approx(-0.8)


def test_pair_validation():
    pre = OpinionState(0, np.zeros(3))
    with pytest.raises(ConfigurationError):
        pair_contraction_slacks(pre, pre, (0, 0), np.zeros(1))
    with pytest.raises(ConfigurationError):
        pair_contraction_slacks(pre, pre, (0, 5), np.zeros(1))


# ---------------------------------------------------------------------------
# Potential monotonicity over recorded states
# ---------------------------------------------------------------------------

def test_potential_monotone_on_real_run():
    initial = OpinionState(0, np.linspace(0.0, 1.0, 8))
    traj = run_trajectory(initial, ConstantGraph(8, complete_edges(8)),
                          ConstantMu(0.4), ModelParams(epsilon=0.9), 1500,
                          np.random.default_rng(1), record_stride=10)
    cs = lattice_points(np.array([-0.5]), np.array([1.5]), 9)
    assert check_potential_monotone(traj.states, cs).ok


def test_potential_monotone_detects_increase():
    states = [OpinionState(0, np.array([0.0, 1.0])),
              OpinionState(1, np.array([0.0, 1.5]))]
    res = check_potential_monotone(states, np.array([[0.0]]))
    assert not res.ok
    assert res.step == 1 and res.c_index == 0
    assert res.drift == pytest.approx(0.5)


def test_lattice_points():
    pts = lattice_points(np.array([0.0, 0.0]), np.array([1.0, 1.0]), 10)
    assert pts.shape == (10, 2)
    assert np.all(pts >= 0.0) and np.all(pts <= 1.0)
    line = lattice_points(np.array([2.0]), np.array([3.0]), 5)
    assert np.allclose(line.ravel(), np.linspace(2.0, 3.0, 5))
    flat = lattice_points(np.array([0.0, 1.0]), np.array([1.0, 1.0]), 4)
    assert np.all(flat[:, 1] == 1.0)
    with pytest.raises(ConfigurationError):
        lattice_points(np.array([1.0]), np.array([0.0]), 3)
    with pytest.raises(ConfigurationError):
        lattice_points(np.array([0.0]), np.array([1.0]), 0)


# ---------------------------------------------------------------------------
# Observers: clean runs and injected faults
# ---------------------------------------------------------------------------

def _fake_after_step(obs, x_new, pre=(0.0, 1.0), mu=0.5):
    """Feed the observer one fabricated fired step on a two-agent state."""
    pre_arr = np.asarray(pre, dtype=float)[:, None]
    obs.at_start(OpinionState(0, pre_arr.copy()))
    obs.after_step(0, 0, 1, True, mu,
                   pre_arr[0].copy(), pre_arr[1].copy(),
                   np.asarray(x_new, dtype=float)[:, None], EdgeSet())


def test_identity_observer_passes_clean_run():
    initial = OpinionState(0, np.linspace(0.0, 1.0, 6))
    obs = UpdateIdentityObserver(ModelParams(epsilon=0.9))
    run_trajectory(initial, ConstantGraph(6, complete_edges(6)), ConstantMu(0.3),
                   ModelParams(epsilon=0.9), 1000, np.random.default_rng(2),
                   observers=[obs], record_stride=None)
    assert obs.checked > 0
    assert obs.max_sum_error <= 1e-12
    assert obs.max_displacement_gap <= 1e-12
    assert obs.max_rate_residual <= 1e-12


def test_identity_observer_flags_broken_sum():
    obs = UpdateIdentityObserver(P1)
    with pytest.raises(InvariantViolation, match="pair-sum-conservation"):
        _fake_after_step(obs, [0.5, 0.9])


def test_identity_observer_flags_wrong_rate():
    # sum conserved and displacements equal, but the realized rate is 0.3
    # while 0.5 was reported
    obs = UpdateIdentityObserver(P1)
    with pytest.raises(InvariantViolation, match="realized-rate"):
        _fake_after_step(obs, [0.3, 0.7], mu=0.5)


def test_identity_observer_flags_rate_out_of_range():
    obs = UpdateIdentityObserver(P1)
    with pytest.raises(InvariantViolation, match="rate-range"):
        _fake_after_step(obs, [0.7, 0.3], mu=0.7)


def test_contraction_observer_flags_separation():
    obs = ContractionObserver(np.array([[0.0]]), P1)
    with pytest.raises(InvariantViolation, match="pair-contraction"):
        _fake_after_step(obs, [-0.2, 1.2])


def test_contraction_observer_flags_overshoot():
    obs = ContractionObserver(np.array([[0.0]]), P1)
    with pytest.raises(InvariantViolation, match="potential-drop"):
        _fake_after_step(obs, [0.9, 0.1])


def test_contraction_observer_clean_run_stats():
    initial = OpinionState(0, np.linspace(0.0, 1.0, 6))
    obs = ContractionObserver(lattice_points(np.array([0.0]), np.array([1.0]), 7),
                              ModelParams(epsilon=0.9))
    run_trajectory(initial, ConstantGraph(6, complete_edges(6)), ConstantMu(0.5),
                   ModelParams(epsilon=0.9), 1000, np.random.default_rng(3),
                   observers=[obs], record_stride=None)
    assert obs.fired_steps > 0
    assert obs.min_basic_slack >= -1e-9
    assert obs.min_refined_slack >= -1e-9
    assert obs.max_potential_drift <= 1e-9


def test_contraction_observer_dimension_check():
    with pytest.raises(ConfigurationError):
        ContractionObserver(np.zeros((3, 2)), P1)


def test_diameter_observer_flags_expansion():
    obs = DiameterMonotoneObserver(P1)
    with pytest.raises(InvariantViolation, match="diameter-monotone"):
        _fake_after_step(obs, [-0.5, 1.0])


def test_diameter_observer_tracks_current_diameter():
    initial = OpinionState(0, np.linspace(0.0, 1.0, 6))
    obs = DiameterMonotoneObserver(ModelParams(epsilon=2.0))
    traj = run_trajectory(initial, ConstantGraph(6, complete_edges(6)),
                          ConstantMu(0.5), ModelParams(epsilon=2.0), 400,
                          np.random.default_rng(4), observers=[obs],
                          record_stride=None)
    x = traj.final.opinions
    assert obs.diameter == pytest.approx(float(np.ptp(x)), abs=1e-12)
    assert obs.max_increase <= 1e-12


# ---------------------------------------------------------------------------
# Stopping times
# ---------------------------------------------------------------------------

def test_tracker_vacuous_without_social_edges():
    params = ModelParams(epsilon=0.9)
    tracker = StoppingTimeTracker(0.01, params)
    initial = OpinionState(0, np.array([0.0, 1.0]))
    run_trajectory(initial, ConstantGraph(2, EdgeSet()), ConstantMu(0.5),
                   params, 3, np.random.default_rng(0), observers=[tracker])
    assert tracker.time == 0


def test_tracker_ignores_pairs_beyond_confidence():
    # the only social edge joins agents 1.0 apart with epsilon 0.5: it can
    # never fire, and pairs out of confidence range do not block tau
    params = ModelParams(epsilon=0.5)
    tracker = StoppingTimeTracker(0.01, params)
    initial = OpinionState(0, np.array([0.0, 1.0]))
    run_trajectory(initial, ConstantGraph(2, complete_edges(2)), ConstantMu(0.5),
                   params, 3, np.random.default_rng(0), observers=[tracker])
    assert tracker.time == 0


def test_tracker_detects_first_short_step():
    # one merging update: distance 0.4 at t=0, 0 from t=1 on
    params = ModelParams(epsilon=0.9)
    tracker = StoppingTimeTracker(0.01, params)
    initial = OpinionState(0, np.array([0.0, 0.4]))
    run_trajectory(initial, ConstantGraph(2, complete_edges(2)), ConstantMu(0.5),
                   params, 10, np.random.default_rng(0), observers=[tracker])
    assert tracker.time == 1


def test_tracker_checks_final_state():
    params = ModelParams(epsilon=0.9)
    tracker = StoppingTimeTracker(0.01, params)
    initial = OpinionState(0, np.array([0.0, 0.4]))
    run_trajectory(initial, ConstantGraph(2, complete_edges(2)), ConstantMu(0.5),
                   params, 1, np.random.default_rng(0), observers=[tracker])
    assert tracker.time == 1  # found by the at_end check at the horizon


def test_tracker_none_when_never_short():
    params = ModelParams(epsilon=0.9)
    tracker = StoppingTimeTracker(1e-9, params)
    initial = OpinionState(0, np.array([0.0, 0.4]))
    run_trajectory(initial, ConstantGraph(2, complete_edges(2)), ConstantMu(0.1),
                   params, 5, np.random.default_rng(0), observers=[tracker])
    assert tracker.time is None
    with pytest.raises(ConfigurationError):
        StoppingTimeTracker(0.0, params)


def test_settle_time_at_least_tau():
    params = ModelParams(epsilon=0.9)
    schedule = ConstantGraph(6, complete_edges(6))
    for seed in range(10):
        rng = np.random.default_rng(seed)
        initial = OpinionState(0, rng.random(6))
        tracker = StoppingTimeTracker(0.05, params)
        traj = run_trajectory(initial, schedule, ConstantMu(0.5), params, 4000,
                              rng, observers=[tracker], record_stride=1)
        T = settle_time(traj.states, schedule, 0.05, params)
        assert tracker.time is not None and T is not None
        assert tracker.time <= T <= traj.steps_run


def test_settle_time_requires_connected_profile():
    # two clusters beyond confidence range of each other: every profile edge
    # gets short (tau exists) but the profile never connects (no T)
    params = ModelParams(epsilon=0.5)
    schedule = ConstantGraph(4, complete_edges(4))
    initial = OpinionState(0, np.array([0.0, 0.01, 1.0, 1.01]))
    tracker = StoppingTimeTracker(0.005, params)
    traj = run_trajectory(initial, schedule, ConstantMu(0.5), params, 300,
                          np.random.default_rng(8), observers=[tracker],
                          record_stride=1)
    assert tracker.time is not None
    assert settle_time(traj.states, schedule, 0.005, params) is None


def test_stopping_record_validation():
    StoppingTimeRecord(delta=0.01, tau_delta=3, T_delta=10, horizon=100)
    StoppingTimeRecord(delta=0.01, tau_delta=None, T_delta=None, horizon=100)
    with pytest.raises(ConfigurationError):
        StoppingTimeRecord(delta=0.01, tau_delta=10, T_delta=3, horizon=100)
    with pytest.raises(ConfigurationError):
        StoppingTimeRecord(delta=0.01, tau_delta=3, T_delta=200, horizon=100)


# ---------------------------------------------------------------------------
# Opinion graph churn
# ---------------------------------------------------------------------------

def test_change_counter_sees_edge_appear():
    params = ModelParams(epsilon=0.8)
    obs = OpinionGraphChangeCounter(params)
    state = OpinionState(0, np.array([0.0, 0.5, 1.0]))
    obs.at_start(state)
    new = state.opinions.copy()
    new[1], new[2] = 0.75, 0.75  # (1, 2) fire with mu = 1/2
    obs.after_step(0, 1, 2, True, 0.5, state.opinions[1].copy(),
                   state.opinions[2].copy(), new, EdgeSet())
    assert obs.gained_steps == 1  # agent 2 came within range of agent 0
    assert obs.lost_steps == 0


def test_change_counter_sees_edge_disappear():
    params = ModelParams(epsilon=0.8)
    obs = OpinionGraphChangeCounter(params)
    state = OpinionState(0, np.array([0.0, 0.5, 1.3]))
    obs.at_start(state)
    new = state.opinions.copy()
    new[0], new[1] = 0.25, 0.25  # (0, 1) merge; agent 1 leaves agent 2's range
    obs.after_step(0, 0, 1, True, 0.5, state.opinions[0].copy(),
                   state.opinions[1].copy(), new, EdgeSet())
    assert obs.lost_steps == 1
    assert obs.gained_steps == 0

"""Command line front end: configure, run, and verify experiments.

Three subcommands: ``simulate`` runs one fully-observed trajectory and
writes CSV/JSON artifacts, ``estimate`` runs a trial ensemble and compares
the consensus fraction against the theoretical lower bound, ``verify``
runs randomized invariant suites.  Exit codes are a stable contract:
0 ok, 2 bad configuration, 3 invariant violation, 4 bound contradiction.

Human-readable text goes to stdout; machine-readable results only to files,
so pipelines never parse prose.  All file outputs are deterministic
functions of (config, seed), independent of --threads.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import BoundInapplicableError, ConfigurationError, InvariantViolation
from .geometry import (
    BallSpace,
    Box,
    Interval,
    OpinionSpace,
    PointCloud,
    chebyshev_center,
    diameter,
    expected_center_distance,
    minimum_enclosing_ball,
)
from .graphs import (
    ALL_PAIRS,
    ConstantGraph,
    CyclicGraph,
    EdgeSet,
    ErdosRenyiGraph,
    GraphSchedule,
    PiecewiseGraph,
    complete_edges,
    is_delta_trivial,
    path_edges,
)
from .invariants import (
    ContractionObserver,
    DiameterMonotoneObserver,
    StoppingTimeRecord,
    StoppingTimeTracker,
    UpdateIdentityObserver,
    check_potential_monotone,
    lattice_points,
    settle_time,
)
from .model import (
    ConstantMu,
    ModelParams,
    MuSchedule,
    OpinionState,
    SequenceMu,
    UniformMu,
    run_trajectory,
)
from .montecarlo import (
    TrialConfig,
    bound_comparison_report,
    run_ensemble,
    theoretical_lower_bound,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_BOUND = 4

OUT_DIR_ENV = "DEFFUANT_OUT_DIR"

VERIFY_SUITES = ("contraction", "potential-drop", "potential", "triviality",
                 "geometry", "all")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

_DEFAULT_CONFIG: dict[str, Any] = {
    "n": 10,
    "dimension": 1,
    "epsilon": 0.9,
    "norm": "euclidean",
    "horizon": 10_000,
    "consensus_tol": 1e-6,
    "space": {"kind": "interval", "a": 0.0, "b": 1.0},
    "graph": {"kind": "complete"},
    "mu": {"kind": "constant", "value": 0.5},
    "deltas": [0.01],
    "record_stride": None,
    "c_samples": 10,
    "check_every": 100,
    "initial": None,
}


def _reject_unknown(data: dict, allowed: set[str], where: str):
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    """One experiment, fully resolved: model, space, schedules, run options."""

    n: int
    params: ModelParams
    space: OpinionSpace
    graph: GraphSchedule
    mu: MuSchedule
    horizon: int
    consensus_tol: float
    deltas: list[float]
    record_stride: Optional[int]
    c_samples: int
    check_every: int
    initial: Optional[np.ndarray]
    raw: dict[str, Any] = field(default_factory=dict)

    def digest(self, seed: int, trials: Optional[int] = None) -> str:
        payload = dict(self.raw)
        payload["seed"] = seed
        if trials is not None:
            payload["trials"] = trials
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _build_space(data: dict, dimension: int) -> OpinionSpace:
    kind = data.get("kind")
    if kind == "interval":
        _reject_unknown(data, {"kind", "a", "b"}, "space")
        if dimension != 1:
            raise ConfigurationError("interval space needs dimension 1")
        return Interval(float(data.get("a", 0.0)), float(data.get("b", 1.0)))
    if kind == "box":
        _reject_unknown(data, {"kind", "lower", "upper"}, "space")
        space = Box(data["lower"], data["upper"])
    elif kind == "ball":
        _reject_unknown(data, {"kind", "center", "radius", "norm"}, "space")
        space = BallSpace(data["center"], float(data["radius"]),
                          data.get("norm", "euclidean"))
    elif kind == "cloud":
        _reject_unknown(data, {"kind", "points"}, "space")
        space = PointCloud(np.asarray(data["points"], dtype=float))
    else:
        raise ConfigurationError(f"unknown space kind {kind!r}")
    if space.dimension != dimension:
        raise ConfigurationError(
            f"space dimension {space.dimension} != configured dimension {dimension}")
    return space


def _edges_from_json(pairs: Any, n: int) -> EdgeSet:
    if not isinstance(pairs, list):
        raise ConfigurationError("edge list must be a JSON array of [i, j] pairs")
    return EdgeSet(tuple((int(i), int(j)) for i, j in pairs))


def _piecewise_from_mapping(mapping: dict, n: int) -> PiecewiseGraph:
    try:
        entries = sorted((int(step), pairs) for step, pairs in mapping.items())
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"piecewise steps must be integers: {exc}") from None
    return PiecewiseGraph(n, tuple((step, _edges_from_json(pairs, n))
                                   for step, pairs in entries))


def _build_graph(data: dict, n: int) -> GraphSchedule:
    kind = data.get("kind")
    if kind == "complete":
        _reject_unknown(data, {"kind"}, "graph")
        return ConstantGraph(n, complete_edges(n))
    if kind == "path":
        _reject_unknown(data, {"kind"}, "graph")
        return ConstantGraph(n, path_edges(n))
    if kind == "edges":
        _reject_unknown(data, {"kind", "pairs"}, "graph")
        return ConstantGraph(n, _edges_from_json(data["pairs"], n))
    if kind == "erdos_renyi":
        _reject_unknown(data, {"kind", "p"}, "graph")
        return ErdosRenyiGraph(n, float(data["p"]))
    if kind == "cyclic":
        _reject_unknown(data, {"kind", "members"}, "graph")
        members = tuple(_edges_from_json(pairs, n) for pairs in data["members"])
        return CyclicGraph(n, members)
    if kind == "piecewise":
        _reject_unknown(data, {"kind", "steps"}, "graph")
        return _piecewise_from_mapping(data["steps"], n)
    if kind == "from_file":
        _reject_unknown(data, {"kind", "path"}, "graph")
        with open(data["path"]) as fh:
            mapping = json.load(fh)
        if not isinstance(mapping, dict):
            raise ConfigurationError("graph file must map steps to edge lists")
        return _piecewise_from_mapping(mapping, n)
    raise ConfigurationError(f"unknown graph kind {kind!r}")


def _build_mu(data: dict) -> MuSchedule:
    kind = data.get("kind")
    if kind == "constant":
        _reject_unknown(data, {"kind", "value"}, "mu")
        return ConstantMu(float(data["value"]))
    if kind == "uniform":
        _reject_unknown(data, {"kind", "low", "high"}, "mu")
        return UniformMu(float(data["low"]), float(data["high"]))
    if kind == "sequence":
        _reject_unknown(data, {"kind", "values"}, "mu")
        return SequenceMu(tuple(float(v) for v in data["values"]))
    raise ConfigurationError(f"unknown mu kind {kind!r}")


def load_config(path: Optional[str], overrides: argparse.Namespace) -> ExperimentConfig:
    """Merge defaults, the JSON file, and CLI flags (flags win)."""
    raw = {k: (dict(v) if isinstance(v, dict) else v)
           for k, v in _DEFAULT_CONFIG.items()}
    if path is not None:
        with open(path) as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"bad JSON in {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        _reject_unknown(loaded, set(_DEFAULT_CONFIG), "config")
        raw.update(loaded)

    if getattr(overrides, "epsilon", None) is not None:
        raw["epsilon"] = overrides.epsilon
    if getattr(overrides, "mu", None) is not None:
        raw["mu"] = {"kind": "constant", "value": overrides.mu}
    if getattr(overrides, "n", None) is not None:
        raw["n"] = overrides.n
    if getattr(overrides, "horizon", None) is not None:
        raw["horizon"] = overrides.horizon

    n = int(raw["n"])
    dimension = int(raw["dimension"])
    params = ModelParams(epsilon=float(raw["epsilon"]), dimension=dimension,
                         norm=str(raw["norm"]))
    if not isinstance(raw["space"], dict):
        raise ConfigurationError("space must be a JSON object")
    if not isinstance(raw["graph"], dict):
        raise ConfigurationError("graph must be a JSON object")
    if not isinstance(raw["mu"], dict):
        raise ConfigurationError("mu must be a JSON object")
    space = _build_space(raw["space"], dimension)
    graph = _build_graph(raw["graph"], n)
    mu = _build_mu(raw["mu"])
    deltas = [float(d) for d in (raw["deltas"] or [])]
    if any(d <= 0 for d in deltas):
        raise ConfigurationError(f"deltas must be > 0, got {deltas}")
    horizon = int(raw["horizon"])
    stride = raw["record_stride"]
    if stride is None:
        stride = max(1, horizon // 1000)
    stride = int(stride)
    initial = None
    if raw["initial"] is not None:
        initial = np.asarray(raw["initial"], dtype=float)
        if initial.ndim == 1:
            initial = initial[:, None]
        if initial.shape != (n, dimension):
            raise ConfigurationError(
                f"initial opinions must be ({n}, {dimension}), got {initial.shape}")
    return ExperimentConfig(
        n=n, params=params, space=space, graph=graph, mu=mu,
        horizon=horizon, consensus_tol=float(raw["consensus_tol"]),
        deltas=deltas, record_stride=stride, c_samples=int(raw["c_samples"]),
        check_every=int(raw["check_every"]), initial=initial, raw=raw,
    )


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _resolve_out_dir(arg: Optional[str]) -> Path:
    out = arg or os.environ.get(OUT_DIR_ENV) or "deffuant-out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


def _write_violation(out_dir: Path, exc: InvariantViolation, seed: int,
                     digest: str) -> Path:
    record = exc.as_record()
    record["seed"] = seed
    record["config_digest"] = digest
    path = out_dir / "violation.json"
    _write_json(path, record)
    return path


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _simulate_streams(seed: int):
    root = np.random.SeedSequence(seed)
    init_ss, dyn_ss, graph_ss = root.spawn(3)
    graph_seed = int(graph_ss.generate_state(1, dtype=np.uint64)[0])
    return np.random.default_rng(init_ss), np.random.default_rng(dyn_ss), graph_seed


def cmd_simulate(config: ExperimentConfig, seed: int, out_dir: Path) -> int:
    """One trajectory with every checker active; CSV states/events + JSON summary."""
    digest = config.digest(seed)
    init_rng, dyn_rng, graph_seed = _simulate_streams(seed)
    schedule = config.graph.reseeded(graph_seed)
    if config.initial is not None:
        initial = OpinionState(0, config.initial)
    else:
        initial = OpinionState(0, config.space.sample(init_rng, config.n))

    lo = initial.opinions.min(axis=0)
    hi = initial.opinions.max(axis=0)
    identity = UpdateIdentityObserver(config.params)
    contraction = ContractionObserver(lattice_points(lo, hi, config.c_samples),
                                      config.params)
    diam_obs = DiameterMonotoneObserver(config.params)
    trackers = [StoppingTimeTracker(d, config.params) for d in config.deltas]
    observers = [identity, contraction, diam_obs, *trackers]

    t0 = time.perf_counter()
    try:
        trajectory = run_trajectory(
            initial, schedule, config.mu, config.params, config.horizon,
            dyn_rng, observers=observers, record_stride=config.record_stride,
        )
    except InvariantViolation as exc:
        path = _write_violation(out_dir, exc, seed, digest)
        print(f"invariant violation at step {exc.step}: {exc} "
              f"(diagnostics: {path})", file=sys.stderr)
        return EXIT_INVARIANT
    elapsed = time.perf_counter() - t0

    d = config.params.dimension
    _write_csv(
        out_dir / "states.csv",
        ["step", "agent_id"] + [f"x{k}" for k in range(d)],
        ((state.time, agent, *state.opinions[agent])
         for state in trajectory.states for agent in range(config.n)),
    )
    _write_csv(
        out_dir / "events.csv",
        ["step", "i", "j", "fired", "mu"],
        ((ev.time,
          ev.selected_edge[0] if ev.selected_edge else None,
          ev.selected_edge[1] if ev.selected_edge else None,
          ev.fired, ev.mu_used)
         for ev in trajectory.events),
    )

    stopping = []
    for delta, tracker in zip(config.deltas, trackers):
        t_delta = settle_time(trajectory.states, schedule, delta, config.params)
        record = StoppingTimeRecord(delta=delta, tau_delta=tracker.time,
                                    T_delta=t_delta, horizon=trajectory.steps_run)
        stopping.append({
            "delta": record.delta,
            "tau_delta": record.tau_delta,
            "T_delta": record.T_delta,
            "censored": record.censored,
        })

    summary = {
        "config_digest": digest,
        "seed": seed,
        "n": config.n,
        "dimension": d,
        "epsilon": config.params.epsilon,
        "norm": config.params.norm,
        "horizon": config.horizon,
        "steps_run": trajectory.steps_run,
        "final_diameter": diam_obs.diameter,
        "stopping_times": stopping,
        "checks": {
            "fired_steps": contraction.fired_steps,
            "identity_checked_steps": identity.checked,
            "min_basic_slack": _finite_or_none(contraction.min_basic_slack),
            "min_refined_slack": _finite_or_none(contraction.min_refined_slack),
            "max_potential_drift": _finite_or_none(contraction.max_potential_drift),
            "max_sum_error": identity.max_sum_error,
            "max_displacement_gap": identity.max_displacement_gap,
            "max_rate_residual": identity.max_rate_residual,
            "max_diameter_increase": _finite_or_none(diam_obs.max_increase),
        },
    }
    _write_json(out_dir / "summary.json", summary)

    print(f"simulate: {trajectory.steps_run} steps, {contraction.fired_steps} fired, "
          f"final diameter {diam_obs.diameter:.6g}")
    for entry in stopping:
        print(f"  delta={entry['delta']}: tau={entry['tau_delta']}, "
              f"T={entry['T_delta']} (censored at horizon)")
    print(f"  outputs in {out_dir} (runtime {elapsed:.2f}s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def cmd_estimate(config: ExperimentConfig, trials: int, seed: int,
                 out_dir: Path, threads: int, per_trial: bool) -> int:
    """Trial ensemble, consensus estimate, and the lower-bound comparison."""
    if trials < 1:
        raise ConfigurationError(f"need trials >= 1, got {trials}")
    digest = config.digest(seed, trials)
    template = TrialConfig(
        n=config.n, params=config.params, space=config.space,
        graph_schedule=config.graph, mu_schedule=config.mu,
        horizon=config.horizon, consensus_tol=config.consensus_tol,
        master_seed=seed, trial_index=0,
        track_delta=config.deltas[0] if config.deltas else None,
    )

    t0 = time.perf_counter()
    ensemble = run_ensemble(template, trials, master_seed=seed, workers=threads)
    elapsed = time.perf_counter() - t0
    estimate = ensemble.estimate

    ball = chebyshev_center(config.space, config.params.norm)
    dist_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, 1)))
    expected_dist, expected_se = expected_center_distance(
        config.space, ball.center, norm=config.params.norm, rng=dist_rng)
    try:
        bound = theoretical_lower_bound(config.params.epsilon, ball, expected_dist)
        bound_note = None
    except BoundInapplicableError as exc:
        bound = None
        bound_note = str(exc)
    report = bound_comparison_report(estimate, bound)

    payload = {
        "config_digest": digest,
        "master_seed": seed,
        "n_trials": trials,
        "p_hat": report.p_hat,
        "ci_low": report.ci_low,
        "ci_high": report.ci_high,
        "counts": ensemble.counts,
        "center": [float(v) for v in ball.center],
        "radius": ball.radius,
        "expected_center_distance": expected_dist,
        "expected_center_distance_se": expected_se,
        "bound": report.bound,
        "bound_applicable": bound is not None,
        "margin": report.margin,
        "passed": report.passed,
    }
    _write_json(out_dir / "ensemble.json", payload)
    if per_trial:
        _write_csv(
            out_dir / "trials.csv",
            ["trial_index", "verdict", "decided_at", "final_diameter", "tau_delta"],
            ((r.trial_index, r.verdict.value, r.decided_at, r.final_diameter,
              r.tau_delta) for r in ensemble.rows),
        )

    print(f"estimate: p_hat={estimate.p_hat:.4f} "
          f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}] over {trials} trials "
          f"({estimate.n_undecided} undecided)")
    if bound is not None:
        state = "consistent" if report.passed else "CONTRADICTED"
        print(f"  lower bound {bound:.6g}: {state} "
              f"(margin ci_low - bound = {report.margin:+.4f})")
    else:
        print(f"  lower bound inapplicable: {bound_note}")
    print(f"  outputs in {out_dir} (runtime {elapsed:.2f}s)")
    if report.passed is False:
        return EXIT_BOUND
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_runs(seed: int, observers_factory, runs: int = 12, steps: int = 2000):
    """Randomized short trajectories over mixed dimensions and schedules."""
    results = []
    for k in range(runs):
        run_ss = np.random.SeedSequence(seed, spawn_key=(k,))
        init_ss, dyn_ss, graph_ss = run_ss.spawn(3)
        d = 1 + k % 3
        n = 8
        params = ModelParams(epsilon=0.6, dimension=d, norm="euclidean")
        init_rng = np.random.default_rng(init_ss)
        x0 = init_rng.random((n, d))
        graph_seed = int(graph_ss.generate_state(1, dtype=np.uint64)[0])
        style = k % 4
        if style == 0:
            schedule: GraphSchedule = ConstantGraph(n, complete_edges(n))
        elif style == 1:
            schedule = ConstantGraph(n, path_edges(n))
        elif style == 2:
            schedule = ErdosRenyiGraph(n, 0.4, seed=graph_seed)
        else:
            schedule = CyclicGraph(n, (complete_edges(n), path_edges(n)))
        mu: MuSchedule = ConstantMu(0.5) if k % 2 == 0 else UniformMu(0.05, 0.5)
        observers = observers_factory(params, x0)
        trajectory = run_trajectory(
            OpinionState(0, x0), schedule, mu, params, steps,
            np.random.default_rng(dyn_ss), observers=observers,
            record_stride=50, record_events=False,
        )
        results.append((trajectory, observers, params))
    return results


def _suite_contraction(seed: int) -> dict:
    checked = 0
    worst = np.inf
    for trajectory, observers, _ in _verify_runs(
            seed,
            lambda params, x0: [
                ContractionObserver(
                    lattice_points(x0.min(axis=0), x0.max(axis=0), 10), params,
                    check_refined=False),
                UpdateIdentityObserver(params),
            ]):
        checked += observers[0].fired_steps
        worst = min(worst, observers[0].min_basic_slack)
    return {"fired_steps": checked, "min_basic_slack": _finite_or_none(worst)}


def _suite_potential_drop(seed: int) -> dict:
    checked = 0
    worst = np.inf
    for trajectory, observers, _ in _verify_runs(
            seed,
            lambda params, x0: [ContractionObserver(
                lattice_points(x0.min(axis=0), x0.max(axis=0), 10), params,
                check_basic=False)]):
        checked += observers[0].fired_steps
        worst = min(worst, observers[0].min_refined_slack)
    return {"fired_steps": checked, "min_refined_slack": _finite_or_none(worst)}


def _suite_potential(seed: int) -> dict:
    checked = 0
    for trajectory, _, params in _verify_runs(seed, lambda params, x0: []):
        x0 = trajectory.initial.opinions
        cs = lattice_points(x0.min(axis=0), x0.max(axis=0), 10)
        result = check_potential_monotone(trajectory.states, cs, params.norm)
        if not result.ok:
            raise InvariantViolation(
                "potential-monotone", step=result.step, slack=-result.drift,
                detail=f"summed distance rose by {result.drift:.3e} "
                       f"(reference {result.c_index})")
        checked += len(trajectory.states)
    return {"states_checked": checked}


def _suite_triviality(seed: int) -> dict:
    checked = 0
    for trajectory, observers, params in _verify_runs(
            seed, lambda params, x0: [DiameterMonotoneObserver(params)]):
        diam_obs = observers[0]
        checked += 1
        # Once the diameter is within delta, every later state stays trivial.
        delta = max(diam_obs.diameter * 2.0, 1e-9)
        hits = [s for s in trajectory.states
                if is_delta_trivial(s, ALL_PAIRS, delta, params.norm)]
        if hits:
            first = hits[0].time
            for state in trajectory.states:
                if state.time >= first and not is_delta_trivial(
                        state, ALL_PAIRS, delta, params.norm):
                    raise InvariantViolation(
                        "triviality-preservation", step=state.time, slack=0.0,
                        detail=f"trivial at {first} but not at {state.time}")
    return {"trajectories": checked}


def _suite_geometry(seed: int) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(99,)))
    ball = chebyshev_center(Interval(0.0, 1.0))
    if not (ball.center[0] == 0.5 and ball.radius == 0.5):
        raise InvariantViolation("interval-center", step=0, slack=0.0,
                                 detail=f"got ({ball.center[0]}, {ball.radius})")
    clouds = 0
    for d in (1, 2, 3):
        for _ in range(8):
            pts = rng.random((rng.integers(2, 24), d)) * rng.uniform(0.5, 3.0)
            meb = minimum_enclosing_ball(pts)
            if not meb.contains(pts):
                raise InvariantViolation("enclosing-coverage", step=0, slack=0.0,
                                         detail=f"point escapes ball in d={d}")
            diam = diameter(pts)
            if meb.radius < diam / 2.0 - 1e-9:
                raise InvariantViolation(
                    "radius-lower-bound", step=0, slack=meb.radius - diam / 2.0,
                    detail=f"radius {meb.radius} below diameter/2 {diam / 2.0}")
            if meb.radius > (np.sqrt(3.0) / 2.0) * diam + 1e-9:
                raise InvariantViolation(
                    "radius-upper-bound", step=0,
                    slack=(np.sqrt(3.0) / 2.0) * diam - meb.radius,
                    detail=f"radius {meb.radius} above sqrt(3)/2 * diameter")
            # No alternative center may enclose with a smaller radius.
            for _ in range(20):
                alt = meb.center + rng.normal(scale=0.1 * (meb.radius + 1e-6), size=d)
                alt_radius = float(np.max(np.sqrt(((pts - alt) ** 2).sum(axis=1))))
                if alt_radius < meb.radius - 1e-9:
                    raise InvariantViolation(
                        "enclosing-minimality", step=0,
                        slack=alt_radius - meb.radius,
                        detail=f"center shift shrinks radius in d={d}")
            clouds += 1
    return {"clouds": clouds}


_SUITE_RUNNERS = {
    "contraction": _suite_contraction,
    "potential-drop": _suite_potential_drop,
    "potential": _suite_potential,
    "triviality": _suite_triviality,
    "geometry": _suite_geometry,
}


def cmd_verify(suite: str, seed: int, out_dir: Path) -> int:
    """Run one named randomized suite (or all); exit 3 with diagnostics on failure."""
    names = list(_SUITE_RUNNERS) if suite == "all" else [suite]
    for name in names:
        try:
            stats = _SUITE_RUNNERS[name](seed)
        except InvariantViolation as exc:
            record = exc.as_record()
            record["suite"] = name
            record["seed"] = seed
            path = out_dir / "verify-failure.json"
            _write_json(path, record)
            print(f"suite {name}: FAIL ({exc}; diagnostics: {path})")
            return EXIT_INVARIANT
        detail = ", ".join(f"{k}={v}" for k, v in stats.items())
        print(f"suite {name}: PASS ({detail})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deffuant",
        description="Bounded-confidence opinion dynamics: simulate, estimate, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} "
                                         "or ./deffuant-out)")
        p.add_argument("--epsilon", type=float, help="override confidence range")
        p.add_argument("--mu", type=float, help="override with a constant rate")
        p.add_argument("--n", type=int, help="override agent count")
        p.add_argument("--horizon", type=int, help="override step budget")

    p_sim = sub.add_parser("simulate", help="run one fully-checked trajectory")
    common(p_sim)

    p_est = sub.add_parser("estimate", help="estimate consensus probability")
    common(p_est)
    p_est.add_argument("--trials", type=int, default=200,
                       help="number of trials (default 200)")
    p_est.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available cores)")
    p_est.add_argument("--per-trial", action="store_true",
                       help="also write per-trial rows to trials.csv")

    p_ver = sub.add_parser("verify", help="run randomized invariant suites")
    p_ver.add_argument("--suite", choices=VERIFY_SUITES, default="all")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out-dir")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out_dir = _resolve_out_dir(args.out_dir)
        if args.command == "simulate":
            config = load_config(args.config, args)
            return cmd_simulate(config, args.seed, out_dir)
        if args.command == "estimate":
            config = load_config(args.config, args)
            return cmd_estimate(config, args.trials, args.seed, out_dir,
                                threads=args.threads, per_trial=args.per_trial)
        return cmd_verify(args.suite, args.seed, out_dir)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Opinion-space geometry: enclosing balls, diameters, distance potentials.

The smallest enclosing ball of a bounded convex region gives the center and
radius that drive the consensus-probability lower bound; for point clouds
under the euclidean norm it is computed exactly with Welzl's randomized
algorithm (support sets of at most d+1 points, circumcenters solved through
the Gram system of the support).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .norms import distances_to_point, rowwise_norm, validate_norm, vector_norm

log = logging.getLogger(__name__)

# Radius/diameter comparisons; MEB containment uses a tighter relative guard.
_COVER_TOL = 1e-9
_WELZL_SHUFFLE_SEED = 0x5EB


@dataclass(eq=False)
class Ball:
    """Closed ball: center and nonnegative radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).ravel()
        self.radius = float(self.radius)
        if self.radius < 0:
            raise ConfigurationError(f"radius must be >= 0, got {self.radius}")

    def contains(self, points: np.ndarray, norm: str = "euclidean", tol: float = _COVER_TOL) -> bool:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return bool(np.all(distances_to_point(pts, self.center, norm) <= self.radius + tol))


# ---------------------------------------------------------------------------
# Opinion spaces
# ---------------------------------------------------------------------------

class OpinionSpace:
    """Bounded convex region initial opinions are drawn from."""

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, d) i.i.d. uniform draws from the region."""
        raise NotImplementedError

    def diameter(self, norm: str = "euclidean") -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Interval(OpinionSpace):
    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise ConfigurationError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def dimension(self):
        return 1

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size=(size, 1))

    def diameter(self, norm="euclidean"):
        return self.b - self.a


@dataclass(eq=False)
class Box(OpinionSpace):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        if self.lower.shape != self.upper.shape:
            raise ConfigurationError("box bounds must have equal length")
        if not np.all(self.lower < self.upper):
            raise ConfigurationError("box needs lower < upper on every axis")

    @property
    def dimension(self):
        return self.lower.shape[0]

    def sample(self, rng, size):
        return rng.uniform(self.lower, self.upper, size=(size, self.dimension))

    def diameter(self, norm="euclidean"):
        return vector_norm(self.upper - self.lower, norm)


@dataclass(eq=False)
class BallSpace(OpinionSpace):
    """Ball-shaped region in the given norm (default euclidean)."""

    center: np.ndarray
    radius: float
    norm: str = "euclidean"

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).ravel()
        self.radius = float(self.radius)
        if not (self.radius > 0):
            raise ConfigurationError(f"ball radius must be > 0, got {self.radius}")
        validate_norm(self.norm)

    @property
    def dimension(self):
        return self.center.shape[0]

    def sample(self, rng, size):
        d = self.dimension
        if self.norm == "euclidean":
            dirs = rng.normal(size=(size, d))
            dirs /= rowwise_norm(dirs, "euclidean")[:, None]
            radii = self.radius * rng.random(size) ** (1.0 / d)
            return self.center + dirs * radii[:, None]
        # l1/linf balls: rejection from the bounding box
        out = np.empty((size, d))
        filled = 0
        while filled < size:
            batch = rng.uniform(-self.radius, self.radius, size=(max(size, 64), d))
            keep = batch[rowwise_norm(batch, self.norm) <= self.radius]
            take = min(size - filled, keep.shape[0])
            out[filled : filled + take] = keep[:take]
            filled += take
        return self.center + out

    def diameter(self, norm="euclidean"):
        if norm != self.norm:
            raise ConfigurationError(
                f"ball declared in norm {self.norm!r}, queried in {norm!r}"
            )
        return 2.0 * self.radius


@dataclass(eq=False)
class PointCloud(OpinionSpace):
    """Empirical region: finite sample points, uniform over the points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ConfigurationError("point cloud needs an (n, d) array with n >= 1")
        self.points = pts

    @property
    def dimension(self):
        return self.points.shape[1]

    def sample(self, rng, size):
        idx = rng.integers(0, self.points.shape[0], size=size)
        return self.points[idx]

    def diameter(self, norm="euclidean"):
        return diameter(self.points, norm)


# ---------------------------------------------------------------------------
# Diameter and potential
# ---------------------------------------------------------------------------

def _as_points(points: np.ndarray) -> np.ndarray:
    """Coerce to (n, d); a 1-D array means n one-dimensional points."""
    pts = np.asarray(points, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


def diameter(points: np.ndarray, norm: str = "euclidean") -> float:
    """Maximum pairwise distance of a point set (0 for a single point)."""
    pts = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise ConfigurationError("diameter of an empty point set")
    if n == 1:
        return 0.0
    from .norms import cross_distances

    return float(cross_distances(pts, pts, norm).max())


def distance_potential(points: np.ndarray, c: np.ndarray, norm: str = "euclidean") -> float:
    """Sum of distances from each point to c (nonincreasing along trajectories)."""
    pts = _as_points(points)
    c = np.asarray(c, dtype=float).ravel()
    if pts.shape[1] != c.shape[0]:
        raise ConfigurationError(f"dimension mismatch: points d={pts.shape[1]}, c d={c.shape[0]}")
    return float(distances_to_point(pts, c, norm).sum())


# ---------------------------------------------------------------------------
# Minimum enclosing ball (euclidean, exact, any dimension)
# ---------------------------------------------------------------------------

def _circumball(pts: np.ndarray) -> Ball:
    """Smallest ball with all given points on its boundary (within their affine hull)."""
    k = pts.shape[0]
    if k == 1:
        return Ball(pts[0].copy(), 0.0)
    p0 = pts[0]
    v = pts[1:] - p0
    rhs = np.einsum("ij,ij->i", v, v)
    gram = 2.0 * (v @ v.T)
    try:
        w = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        w = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    offset = v.T @ w
    center = p0 + offset
    return Ball(center, float(np.sqrt(np.dot(offset, offset))))


def _in_ball(ball: Optional[Ball], p: np.ndarray) -> bool:
    if ball is None:
        return False
    diff = p - ball.center
    return float(np.sqrt(np.dot(diff, diff))) <= ball.radius * (1 + 1e-13) + 1e-13


def minimum_enclosing_ball(points: np.ndarray) -> Ball:
    """Exact euclidean minimum enclosing ball (Welzl, randomized, iterative)."""
    pts = _as_points(points)
    n, d = pts.shape
    if n == 0:
        raise ConfigurationError("minimum enclosing ball of an empty point set")
    order = np.random.default_rng(_WELZL_SHUFFLE_SEED).permutation(n)
    pts = pts[order]
    max_support = d + 1

    # Explicit stack replays the recursion
    #   welzl(i, R) = trivial(R)                      if i == n or |R| == d+1
    #               = welzl(i+1, R)                   if pts[i] inside that ball
    #               = welzl(i+1, R + [pts[i]])        otherwise
    # Phase 0 enters a call, phase 1 resumes it after the first recursion.
    result: Optional[Ball] = None
    stack: list[tuple[int, int, tuple[int, ...]]] = [(0, 0, ())]
    while stack:
        idx, phase, support = stack.pop()
        if phase == 0:
            if idx == n or len(support) == max_support:
                result = _circumball(pts[list(support)]) if support else None
            else:
                stack.append((idx, 1, support))
                stack.append((idx + 1, 0, support))
        else:
            if not _in_ball(result, pts[idx]):
                stack.append((idx + 1, 0, support + (idx,)))
    assert result is not None
    # Report the true attained radius so containment holds exactly.
    attained = float(distances_to_point(pts, result.center, "euclidean").max())
    return Ball(result.center, attained)


# ---------------------------------------------------------------------------
# Chebyshev center of a space
# ---------------------------------------------------------------------------

def chebyshev_center(space: OpinionSpace, norm: str = "euclidean") -> Ball:
    """Center and radius of the smallest enclosing ball of the region.

    interval/box/ball have closed forms; point clouds use the exact MEB for
    the euclidean norm and the bounding-box midpoint otherwise (exact for
    linf, an approximation for l1).
    """
    validate_norm(norm)
    if isinstance(space, Interval):
        ball = Ball(np.array([(space.a + space.b) / 2.0]), (space.b - space.a) / 2.0)
    elif isinstance(space, Box):
        half = (space.upper - space.lower) / 2.0
        ball = Ball((space.lower + space.upper) / 2.0, vector_norm(half, norm))
    elif isinstance(space, BallSpace):
        if norm != space.norm:
            raise ConfigurationError(
                f"ball declared in norm {space.norm!r}, queried in {norm!r}"
            )
        ball = Ball(space.center.copy(), space.radius)
    elif isinstance(space, PointCloud):
        if norm == "euclidean":
            ball = minimum_enclosing_ball(space.points)
        else:
            if norm == "l1":
                log.info("l1 chebyshev center of a point cloud uses the bounding-box "
                         "midpoint (approximate)")
            center = (space.points.min(axis=0) + space.points.max(axis=0)) / 2.0
            radius = float(distances_to_point(space.points, center, norm).max())
            ball = Ball(center, radius)
    else:
        raise ConfigurationError(f"unsupported opinion space {type(space).__name__}")

    diam = space.diameter(norm)
    if ball.radius > (np.sqrt(3.0) / 2.0) * diam + _COVER_TOL:
        log.warning(
            "enclosing radius %.6g exceeds sqrt(3)/2 * diameter (%.6g); "
            "bound violated, continuing", ball.radius, (np.sqrt(3.0) / 2.0) * diam,
        )
    return ball


# ---------------------------------------------------------------------------
# Expected distance to the center
# ---------------------------------------------------------------------------

def expected_center_distance(
    space: OpinionSpace,
    center: np.ndarray,
    norm: str = "euclidean",
    n_samples: int = 200_000,
    rng: Optional[np.random.Generator] = None,
    distribution: str = "uniform",
) -> tuple[float, float]:
    """(estimate, std_error) of the mean distance from a uniform draw to ``center``.

    Exact in closed form for intervals and 1-D balls (where the distance to
    the midpoint is itself uniform); Monte Carlo with a sample standard error
    otherwise.
    """
    if distribution != "uniform":
        raise ConfigurationError(f"unsupported distribution {distribution!r}")
    validate_norm(norm)
    c = np.asarray(center, dtype=float).ravel()
    if c.shape[0] != space.dimension:
        raise ConfigurationError(
            f"center dimension {c.shape[0]} != space dimension {space.dimension}"
        )

    interval = None
    if isinstance(space, Interval):
        interval = (space.a, space.b)
    elif isinstance(space, BallSpace) and space.dimension == 1:
        interval = (space.center[0] - space.radius, space.center[0] + space.radius)
    if interval is not None:
        a, b = interval
        c0 = c[0]
        if c0 <= a:
            mean = (a + b) / 2.0 - c0
        elif c0 >= b:
            mean = c0 - (a + b) / 2.0
        else:
            mean = ((c0 - a) ** 2 + (b - c0) ** 2) / (2.0 * (b - a))
        return float(mean), 0.0

    if n_samples < 2:
        raise ConfigurationError(f"need n_samples >= 2, got {n_samples}")
    if rng is None:
        raise ConfigurationError("Monte Carlo estimate needs an rng")
    draws = space.sample(rng, n_samples)
    dists = distances_to_point(draws, c, norm)
    est = float(dists.mean())
    se = float(dists.std(ddof=1) / np.sqrt(n_samples))
    return est, se

"""Brute-force minimum enclosing ball by exhaustive support-set enumeration.

The optimal euclidean enclosing ball of a finite point set is pinned by a
"support set" of at most d + 1 points lying on its boundary, with the center
equidistant from them inside their affine hull.  For the small instances used
in tests we can afford to try *every* subset of size 1..d+1:

  * compute the subset's equidistant point c_S in its affine hull (a small
    linear solve; least squares handles degenerate subsets harmlessly),
  * score it by the attained radius f(c_S) = max_i ||p_i - c_S||.

Every score is the radius of a ball that really encloses all points, so the
minimum score never undershoots the true radius; and the true support set is
among the subsets, where the score equals the true radius exactly.  Hence
min over subsets == minimum enclosing ball radius, up to linear-solve
rounding.  O(n^(d+1)) and proud of it.

(An earlier version of this oracle did shrinking-window grid search, but the
radius is quadratically flat around the center in directions perpendicular
to near-collinear point sets, so no affordable grid resolves it to 1e-6.)
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def _equidistant_center(subset: np.ndarray) -> np.ndarray:
    """Point in the affine hull of `subset` equidistant from all its rows.

    Writing c = a0 + sum_j lam_j (a_j - a0) and equating squared distances
    to a0 and a_j gives the linear system 2 (A A^T) lam = diag(A A^T) with
    A the matrix of rows a_j - a0.  Least squares picks a valid center even
    when the subset is affinely degenerate.
    """
    a0 = subset[0]
    rest = subset[1:] - a0
    if rest.shape[0] == 0:
        return a0.copy()
    gram = rest @ rest.T
    lam, *_ = np.linalg.lstsq(2.0 * gram, np.diag(gram), rcond=None)
    return a0 + lam @ rest


def bruteforce_enclosing_ball(points: np.ndarray) -> tuple[np.ndarray, float]:
    """(center, radius) of the exact euclidean minimum enclosing ball."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, d = pts.shape

    best_center = pts[0]
    best_radius = np.inf
    for size in range(1, min(n, d + 1) + 1):
        for idx in combinations(range(n), size):
            center = _equidistant_center(pts[list(idx)])
            radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1)).max())
            if radius < best_radius:
                best_radius = radius
                best_center = center
    return best_center, best_radius

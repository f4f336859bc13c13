"""Quadrature rules on reference cells and on the unit interval.

Reference cells: the unit segment [0,1] (measure 1) and the unit triangle
with vertices (0,0), (1,0), (0,1) (measure 1/2).  All rules are hardcoded
or generated deterministically, so points and weights are bitwise
reproducible across runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GoalFemError

__all__ = ["QuadRule", "gauss_segment", "gauss_triangle", "subdivide_rule"]


@dataclass(frozen=True)
class QuadRule:
    points: np.ndarray   # (n, dim) reference coordinates
    weights: np.ndarray  # (n,) positive, summing to the reference measure
    exact_degree: int    # highest polynomial degree integrated exactly

    @property
    def dim(self):
        return self.points.shape[1]


def gauss_segment(n_points):
    """Gauss-Legendre rule on [0,1]; exact for degree 2*n_points - 1."""
    if not 1 <= n_points <= 10:
        raise GoalFemError("gauss_segment supports 1..10 points, got %r" % n_points)
    t, w = np.polynomial.legendre.leggauss(n_points)
    points = (0.5 * (t + 1.0)).reshape(-1, 1)
    weights = 0.5 * w
    return QuadRule(points=points, weights=weights, exact_degree=2 * n_points - 1)


# Symmetric rules on the reference triangle.  Orbit parameters for the
# degree-4 rule are the standard two 3-point orbits; weights include the
# reference area factor 1/2.
_TRI_A1 = 0.44594849091596489
_TRI_A2 = 0.091576213509770743
_TRI_W1 = 0.5 * 0.22338158967801147
_TRI_W2 = 0.5 * 0.10995174365532187


def _orbit3(a):
    return [(a, a), (1.0 - 2.0 * a, a), (a, 1.0 - 2.0 * a)]


def gauss_triangle(order):
    """Symmetric rule on the reference triangle, exact to the given degree.

    Supported orders: 1 (centroid), 2 (3 interior points), 4 (6 points).
    """
    if order == 1:
        points = [(1.0 / 3.0, 1.0 / 3.0)]
        weights = [0.5]
    elif order == 2:
        points = _orbit3(1.0 / 6.0)
        weights = [0.5 / 3.0] * 3
    elif order == 4:
        points = _orbit3(_TRI_A1) + _orbit3(_TRI_A2)
        weights = [_TRI_W1] * 3 + [_TRI_W2] * 3
    else:
        raise GoalFemError("gauss_triangle supports orders 1, 2, 4; got %r" % order)
    return QuadRule(
        points=np.asarray(points, dtype=float),
        weights=np.asarray(weights, dtype=float),
        exact_degree=order,
    )


def subdivide_rule(rule, n_splits):
    """Composite refinement of a reference rule.

    Splits the reference cell ``n_splits`` times into congruent children
    (2 per split on segments, 4 on triangles) and applies ``rule`` on each
    child.  The polynomial exactness is unchanged; the composite rule is
    used where integration accuracy beyond the base degree is needed.
    """
    if n_splits == 0:
        return rule
    if n_splits < 0:
        raise GoalFemError("n_splits must be nonnegative")
    if rule.dim == 1:
        corners = np.array([[[0.0], [1.0]]])
        for _ in range(n_splits):
            a, b = corners[:, 0], corners[:, 1]
            m = 0.5 * (a + b)
            corners = np.concatenate(
                [np.stack([a, m], axis=1), np.stack([m, b], axis=1)], axis=0
            )
        frac = 0.5 ** n_splits
    else:
        corners = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
        for _ in range(n_splits):
            a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
            m01, m12, m02 = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (a + c)
            corners = np.concatenate(
                [
                    np.stack([a, m01, m02], axis=1),
                    np.stack([m01, b, m12], axis=1),
                    np.stack([m02, m12, c], axis=1),
                    np.stack([m01, m12, m02], axis=1),
                ],
                axis=0,
            )
        frac = 0.25 ** n_splits

    origin = corners[:, 0]                      # (n_sub, dim)
    span = corners[:, 1:] - origin[:, None, :]  # (n_sub, dim, dim)
    # child points: origin + span^T . ref_point, vectorized over children
    pts = origin[:, None, :] + np.einsum("sed,qe->sqd", span, rule.points)
    wts = np.tile(rule.weights, (corners.shape[0], 1)) * frac
    return QuadRule(
        points=pts.reshape(-1, rule.dim),
        weights=wts.ravel(),
        exact_degree=rule.exact_degree,
    )

"""Conjugate-gradient solver for the constrained SPD systems.

Diagonal (Jacobi) preconditioning, deterministic iteration order, and a
strict accuracy contract: the relative residual of the returned solution
is at or below the requested tolerance, or the solve aborts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .space import CoeffVec

__all__ = ["SolveReport", "solve_spd", "dense_solve"]


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool


def solve_spd(system, tol=1e-12, max_iter=None):
    """Solve the constrained system by preconditioned conjugate gradients.

    Returns (CoeffVec, SolveReport).  Raises SolverError with code
    NOT_CONVERGED when the iteration cap is hit and INDEFINITE when a
    direction of non-positive curvature is detected.
    """
    a = system.matrix
    b = system.rhs
    n = b.size
    if max_iter is None:
        max_iter = 20 * n + 200

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return CoeffVec(system.space, np.zeros(n)), SolveReport(0, 0.0, True)

    inv_diag = 1.0 / a.diagonal()
    x = np.zeros(n)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(np.dot(r, z))

    iterations = 0
    while iterations < max_iter:
        ap = a @ p
        pap = float(np.dot(p, ap))
        if pap <= 0.0:
            raise SolverError(
                "INDEFINITE", "non-positive curvature encountered in CG"
            )
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        iterations += 1
        if np.linalg.norm(r) <= tol * bnorm:
            # guard against recurrence drift before accepting
            true_res = float(np.linalg.norm(b - a @ x))
            if true_res <= tol * bnorm:
                x[system.space.dirichlet_dofs] = 0.0
                return (
                    CoeffVec(system.space, x),
                    SolveReport(iterations, true_res / bnorm, True),
                )
            # restart on the exact residual with a fresh direction
            r = b - a @ x
            z = inv_diag * r
            p = z.copy()
            rz = float(np.dot(r, z))
            continue
        z = inv_diag * r
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new

    raise SolverError(
        "NOT_CONVERGED",
        "CG did not reach tol %.3g in %d iterations (residual %.3g)"
        % (tol, max_iter, float(np.linalg.norm(b - a @ x)) / bnorm),
    )


def dense_solve(system):
    """Dense factorization cross-check (small systems only)."""
    x = np.linalg.solve(system.matrix.toarray(), system.rhs)
    x[system.space.dirichlet_dofs] = 0.0
    return CoeffVec(system.space, x)

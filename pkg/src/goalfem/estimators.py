"""Adjoint solves and the three adjoint-weighted residual error estimates.

eta2 pairs the primal residual with an exact-adjoint surrogate (analytic
coarse-space representer when one exists, otherwise a very fine reference
solve); eta3 uses the adjoint computed in the enriched space; eta1 adds
the second-order Taylor remainder to eta3 and satisfies an exact identity
with the enriched-space functional difference.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpaceError
from .functionals import taylor_remainder
from .solver import SolveReport, solve_spd
from .space import CoeffVec

__all__ = [
    "COARSE",
    "ENRICHED",
    "REFERENCE",
    "ANALYTIC_WITNESS",
    "AdjointSolution",
    "EstimateReport",
    "solve_adjoint",
    "witness_adjoint",
    "weighted_residual",
    "eta2",
    "eta3",
    "eta1",
    "z_distance_to_coarse",
]

COARSE = "coarse"
ENRICHED = "enriched"
REFERENCE = "reference"
ANALYTIC_WITNESS = "analytic-witness"


@dataclass(eq=False)
class AdjointSolution:
    z: CoeffVec
    space_role: str
    solve_report: SolveReport = None


@dataclass(eq=False)
class EstimateReport:
    """All estimator values for one scenario at one refinement level."""

    eta1: float
    eta2: float
    eta3: float
    remainder_enriched: float
    remainder_reference: float = None  # None when no reference solve was run
    true_error: float = None
    effectivity_eta1: float = None
    effectivity_eta2: float = None
    effectivity_eta3: float = None
    z_distance_to_Vh: float = 0.0
    b_h_measured: float = None


def solve_adjoint(qoi, u_h, system, role, tol=1e-12, max_iter=None):
    """Solve B(phi, z) = J'(u_h; phi) on the space of ``system``.

    ``u_h`` must already live in the target space (prolongate first); the
    symmetric form lets the primal matrix be reused.
    """
    if u_h.space is not system.space:
        raise SpaceError("linearization point must live in the target space")
    rhs = system.space.constrain(qoi.d1_vector(u_h))
    adjoint_system = type(system)(
        space=system.space, matrix=system.matrix, rhs=rhs,
        raw_matrix=system.raw_matrix, raw_rhs=rhs,
    )
    z, report = solve_spd(adjoint_system, tol=tol, max_iter=max_iter)
    return AdjointSolution(z=z, space_role=role, solve_report=report)


def witness_adjoint(qoi, u_h):
    """Exact coarse-space adjoint for functionals that admit one, else None."""
    w = qoi.witness(u_h)
    if w is None:
        return None
    return AdjointSolution(z=w, space_role=ANALYTIC_WITNESS, solve_report=None)


def weighted_residual(system, u_vals, z_vals):
    """L(z) - B(u, z) on the space of ``system`` (fields vanish on the boundary)."""
    return float(np.dot(system.rhs, z_vals) - np.dot(u_vals, system.matrix @ z_vals))


def eta2(system, u_in_space, z):
    """Adjoint-weighted residual with the exact-adjoint surrogate."""
    if z.space_role not in (REFERENCE, ANALYTIC_WITNESS):
        raise SpaceError("eta2 requires a reference or analytic-witness adjoint")
    return weighted_residual(system, u_in_space.values, z.z.values)


def eta3(system, u_in_space, z):
    """Adjoint-weighted residual with the enriched-space adjoint."""
    if z.space_role != ENRICHED:
        raise SpaceError("eta3 requires an enriched-space adjoint")
    return weighted_residual(system, u_in_space.values, z.z.values)


def eta1(qoi, u_h_in_enriched, u_plus, z_enriched, system, s_rule):
    """Remainder-corrected estimate; returns (eta1, remainder).

    eta1 is computed as eta3 + remainder on the same floating-point path,
    so the identity eta1 = eta3 + remainder holds exactly as computed.
    """
    base = eta3(system, u_h_in_enriched, z_enriched)
    e_plus = CoeffVec(u_plus.space, u_plus.values - u_h_in_enriched.values)
    rem = taylor_remainder(qoi, u_h_in_enriched, e_plus, s_rule)
    return base + rem, rem


def z_distance_to_coarse(z, prolongation, fine_system, coarse_system,
                         tol=1e-12, max_iter=None):
    """Energy-norm distance of z to the coarse space, normalized by ||z||.

    The projection is B-orthogonal and obtained by one coarse solve; a
    vanishing distance is the structural signal that the enriched adjoint
    already lies in the coarse space.
    """
    a_fine = fine_system.matrix
    znorm2 = float(np.dot(z.z.values, a_fine @ z.z.values))
    if znorm2 <= 0.0:
        return 0.0
    rhs = coarse_system.space.constrain(prolongation.matrix.T @ (a_fine @ z.z.values))
    proj_system = type(coarse_system)(
        space=coarse_system.space, matrix=coarse_system.matrix, rhs=rhs,
    )
    c, _ = solve_spd(proj_system, tol=tol, max_iter=max_iter)
    d = z.z.values - prolongation.matrix @ c.values
    dist2 = float(np.dot(d, a_fine @ d))
    return math.sqrt(max(dist2, 0.0) / znorm2)

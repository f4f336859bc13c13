"""Builtin manufactured-solution scenarios.

Every scenario has a closed-form solution vanishing on the boundary of the
unit domain and a closed-form functional value, so saturation ratios,
effectivities, and convergence rates can be measured exactly.
"""

import math

import numpy as np

from .assembly import ELASTICITY, POISSON, FormDef, LoadDef
from .harness import ExactSolution, Scenario

__all__ = ["builtin_scenarios", "scenario_registry", "get_scenario"]

PI = math.pi


# --- 1D Poisson, f = 1, u = x(1-x)/2 ---------------------------------------

def _one(pts):
    return np.ones(pts.shape[0])


def _u_parabola(pts):
    x = pts[:, 0]
    return 0.5 * x * (1.0 - x)


def _grad_parabola(pts):
    return (0.5 - pts[:, 0:1]).reshape(-1, 1)


# --- 1D Poisson, f = sin(pi x), u = sin(pi x)/pi^2 --------------------------

def _sin_pi(pts):
    return np.sin(PI * pts[:, 0])


def _u_sine1d(pts):
    return np.sin(PI * pts[:, 0]) / PI ** 2


def _grad_sine1d(pts):
    return (np.cos(PI * pts[:, 0]) / PI).reshape(-1, 1)


# --- 2D Poisson, u = sin(pi x) sin(pi y)/pi, f = 2 pi sin sin ---------------

def _u_sine2d(pts):
    return np.sin(PI * pts[:, 0]) * np.sin(PI * pts[:, 1]) / PI


def _grad_sine2d(pts):
    sx, cx = np.sin(PI * pts[:, 0]), np.cos(PI * pts[:, 0])
    sy, cy = np.sin(PI * pts[:, 1]), np.cos(PI * pts[:, 1])
    return np.column_stack([cx * sy, sx * cy])


def _f_sine2d(pts):
    return 2.0 * PI * np.sin(PI * pts[:, 0]) * np.sin(PI * pts[:, 1])


# --- 2D plane-strain elasticity, u_i = sin(pi x) sin(pi y), lam = mu = 1 ----

def _u_elastic(pts):
    w = np.sin(PI * pts[:, 0]) * np.sin(PI * pts[:, 1])
    return np.column_stack([w, w])


def _grad_elastic(pts):
    sx, cx = np.sin(PI * pts[:, 0]), np.cos(PI * pts[:, 0])
    sy, cy = np.sin(PI * pts[:, 1]), np.cos(PI * pts[:, 1])
    wx, wy = PI * cx * sy, PI * sx * cy
    g = np.empty((pts.shape[0], 2, 2))
    g[:, 0, 0] = wx
    g[:, 0, 1] = wy
    g[:, 1, 0] = wx
    g[:, 1, 1] = wy
    return g


def _f_elastic(pts):
    # -div sigma(u) with lam = mu = 1: per component
    # pi^2 [(lam + 3 mu) sin sin - (lam + mu) cos cos]
    ss = np.sin(PI * pts[:, 0]) * np.sin(PI * pts[:, 1])
    cc = np.cos(PI * pts[:, 0]) * np.cos(PI * pts[:, 1])
    comp = PI ** 2 * (4.0 * ss - 2.0 * cc)
    return np.column_stack([comp, comp])


def builtin_scenarios():
    """The scenario suite; fresh objects on every call."""
    poisson = FormDef(POISSON)
    elastic = FormDef(ELASTICITY, lam=1.0, mu=1.0)

    load_one = LoadDef(source=_one, description="f = 1", poly_degree=0)
    load_sin1d = LoadDef(source=_sin_pi, description="f = sin(pi x)")
    load_sin2d = LoadDef(source=_f_sine2d, description="f = 2 pi sin(pi x) sin(pi y)")
    load_elastic = LoadDef(source=_f_elastic, description="f = -div sigma(sin sin)")

    exact_f1 = ExactSolution(u=_u_parabola, grad=_grad_parabola, j_value=1.0 / 12.0)
    exact_sin1d = ExactSolution(
        u=_u_sine1d, grad=_grad_sine1d, j_value=1.0 / (2.0 * PI ** 2)
    )
    exact_sin2d = ExactSolution(u=_u_sine2d, grad=_grad_sine2d, j_value=0.5)
    exact_sin2d_local = ExactSolution(u=_u_sine2d, grad=_grad_sine2d, j_value=0.125)
    exact_elastic = ExactSolution(
        u=_u_elastic, grad=_grad_elastic, j_value=PI * math.sqrt(2.0)
    )
    exact_f1_sqrt = ExactSolution(
        u=_u_parabola, grad=_grad_parabola, j_value=math.sqrt(1.0 / 12.0)
    )
    exact_f1_pow2 = ExactSolution(
        u=_u_parabola, grad=_grad_parabola, j_value=(1.0 / 12.0) ** 2
    )
    exact_linear = ExactSolution(
        u=_u_sine1d, grad=_grad_sine1d, j_value=1.0 / (2.0 * PI ** 2)
    )

    return [
        Scenario(
            name="poisson1d-energy-f1", dim=1, base_n=8, form=poisson,
            load=load_one, exact=exact_f1, qoi_kind="energy", enrichment="h",
        ),
        Scenario(
            name="poisson1d-energy-f1-p", dim=1, base_n=8, form=poisson,
            load=load_one, exact=exact_f1, qoi_kind="energy", enrichment="p",
            solver_tol=1e-12,
        ),
        Scenario(
            name="poisson1d-energy-sin", dim=1, base_n=8, form=poisson,
            load=load_sin1d, exact=exact_sin1d, qoi_kind="energy", enrichment="h",
        ),
        Scenario(
            name="poisson2d-energy-sin", dim=2, base_n=4, form=poisson,
            load=load_sin2d, exact=exact_sin2d, qoi_kind="energy", enrichment="h",
            solver_tol=5e-13,
        ),
        Scenario(
            name="poisson1d-sqrt-energy", dim=1, base_n=8, form=poisson,
            load=load_one, exact=exact_f1_sqrt, qoi_kind="sqrt-energy", enrichment="h",
        ),
        Scenario(
            name="poisson1d-genergy-pow2", dim=1, base_n=8, form=poisson,
            load=load_one, exact=exact_f1_pow2, qoi_kind="g-energy",
            g_exponent=2.0, enrichment="h",
        ),
        Scenario(
            name="elasticity2d-strain-energy", dim=2, base_n=2, form=elastic,
            load=load_elastic, exact=exact_elastic, qoi_kind="sqrt-energy",
            enrichment="h", solver_tol=5e-13, s_quad_points=10,
        ),
        Scenario(
            name="poisson2d-local-energy", dim=2, base_n=2, form=poisson,
            load=load_sin2d, exact=exact_sin2d_local, qoi_kind="local-energy",
            subdomain_box=((0.0, 0.5), (0.0, 0.5)), enrichment="h",
            solver_tol=1e-12,
        ),
        Scenario(
            name="poisson1d-linear-qoi", dim=1, base_n=8, form=poisson,
            load=load_sin1d, exact=exact_linear, qoi_kind="linear",
            qoi_weight=load_sin1d, enrichment="p", solver_tol=2e-11,
        ),
    ]


def scenario_registry():
    return {s.name: s for s in builtin_scenarios()}


def get_scenario(name):
    reg = scenario_registry()
    if name not in reg:
        raise KeyError("unknown scenario %r (known: %s)" % (name, ", ".join(sorted(reg))))
    return reg[name]

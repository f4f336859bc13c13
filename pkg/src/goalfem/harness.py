"""Scenario orchestration: refinement sweeps, saturation and effectivity
measurement, reliability checks, and report emission."""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import ELASTICITY, POISSON, FormDef, LoadDef, build_system
from .errors import ConfigError, GoalFemError
from .estimators import (
    ENRICHED,
    REFERENCE,
    EstimateReport,
    eta1 as _eta1,
    eta2 as _eta2,
    eta3 as _eta3,
    solve_adjoint,
    weighted_residual,
    witness_adjoint,
    z_distance_to_coarse,
)
from .functionals import (
    EnergyQoi,
    GEnergyQoi,
    LinearQoi,
    g_power,
    sqrt_energy,
    taylor_remainder,
)
from .mesh import build_unit_interval, build_unit_square_tri, refine_uniform, tag_subdomain
from .quadrature import gauss_segment
from .solver import solve_spd
from .space import H_REFINE, P_INCREASE, CoeffVec, build_space, compose_prolongations, enrich

__all__ = [
    "ExactSolution",
    "Scenario",
    "LevelResult",
    "SweepReport",
    "make_functional",
    "validate_exact",
    "run_scenario",
    "measure_saturation",
    "csv_text",
    "emit_report",
    "report_to_dict",
    "scenario_from_config",
]

COLLAPSE_CONFIRMED = "COLLAPSE_CONFIRMED"
COLLAPSE_NOT_CONFIRMED = "COLLAPSE_NOT_CONFIRMED"
NOT_APPLICABLE = "NOT_APPLICABLE"

_TINY_ERROR = 1e-13  # division guard for saturation / effectivity ratios


@dataclass(eq=False)
class ExactSolution:
    """Closed-form solution with analytic gradient and functional value."""

    u: object          # (n, dim) -> (n,) or (n, components)
    grad: object       # (n, dim) -> (n, dim) or (n, components, dim)
    j_value: float


@dataclass(eq=False)
class Scenario:
    name: str
    dim: int
    base_n: int
    form: FormDef
    load: LoadDef
    exact: ExactSolution
    qoi_kind: str            # energy | g-energy | sqrt-energy | local-energy | linear
    enrichment: str          # "h" | "p"
    degree: int = 1
    levels: int = 4
    g_exponent: float = 2.0
    subdomain_box: tuple = None
    qoi_weight: LoadDef = None
    solver_tol: float = 5e-13
    s_quad_points: int = 5


@dataclass(eq=False)
class LevelResult:
    level: int
    h: float
    n_dofs: int
    j_uh: float
    j_uplus: float
    estimates: EstimateReport
    reliability_ok: bool = None
    galerkin_gap: float = 0.0
    galerkin_scale: float = 0.0
    adjoint_rel_residual: float = 0.0


@dataclass(eq=False)
class SweepReport:
    scenario: Scenario
    levels: list = field(default_factory=list)
    rate_true_error: float = None
    rate_eta1: float = None
    b0_observed: float = None
    verdict: str = NOT_APPLICABLE


def make_functional(scenario):
    if scenario.qoi_kind == "energy":
        return EnergyQoi(scenario.form)
    if scenario.qoi_kind == "local-energy":
        return EnergyQoi(scenario.form, subdomain=1)
    if scenario.qoi_kind == "sqrt-energy":
        return sqrt_energy(scenario.form)
    if scenario.qoi_kind == "g-energy":
        return GEnergyQoi(scenario.form, g_power(scenario.g_exponent))
    if scenario.qoi_kind == "linear":
        return LinearQoi(scenario.qoi_weight)
    raise ConfigError("unknown functional kind %r" % scenario.qoi_kind)


def _fd_divergence(flux, points, h=1e-3):
    """Fourth-order central divergence of a flux callable (n, C, dim)."""
    n = points.shape[0]
    probe = flux(points)
    ncomp = probe.shape[1]
    div = np.zeros((n, ncomp))
    for d in range(points.shape[1]):
        shift = np.zeros_like(points)
        shift[:, d] = h
        f2p = flux(points + 2 * shift)[:, :, d]
        f1p = flux(points + shift)[:, :, d]
        f1m = flux(points - shift)[:, :, d]
        f2m = flux(points - 2 * shift)[:, :, d]
        div += (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h)
    return div


def _stress_flux(exact, form):
    lam, mu = form.lam, form.mu

    def flux(pts):
        g = np.asarray(exact.grad(pts), dtype=float)  # (n, 2, 2)
        eps = 0.5 * (g + np.transpose(g, (0, 2, 1)))
        tr = eps[:, 0, 0] + eps[:, 1, 1]
        sig = 2.0 * mu * eps
        sig[:, 0, 0] += lam * tr
        sig[:, 1, 1] += lam * tr
        return sig

    return flux


def validate_exact(scenario, n_points=50, tol=1e-8):
    """Check the manufactured solution against the strong form of the PDE.

    Samples interior points and compares -div(flux) with the load; also
    checks that the solution vanishes on the boundary.
    """
    exact = scenario.exact
    if exact is None:
        return
    rng = np.random.default_rng(20240601)
    pts = rng.uniform(0.05, 0.95, size=(n_points, scenario.dim))
    if scenario.form.kind == POISSON:
        flux = lambda p: np.asarray(exact.grad(p), dtype=float).reshape(len(p), 1, -1)
    else:
        flux = _stress_flux(exact, scenario.form)
    f = np.asarray(scenario.load.source(pts), dtype=float).reshape(n_points, -1)
    residual = -_fd_divergence(flux, pts) - f
    worst = float(np.max(np.abs(residual)))
    if worst > tol:
        raise GoalFemError(
            "exact solution of %r violates the strong form: residual %.3g"
            % (scenario.name, worst)
        )

    taxis = np.linspace(0.0, 1.0, 21)
    if scenario.dim == 1:
        bpts = np.array([[0.0], [1.0]])
    else:
        zeros, ones = np.zeros_like(taxis), np.ones_like(taxis)
        bpts = np.vstack(
            [
                np.column_stack([taxis, zeros]),
                np.column_stack([taxis, ones]),
                np.column_stack([zeros, taxis]),
                np.column_stack([ones, taxis]),
            ]
        )
    bvals = np.asarray(exact.u(bpts), dtype=float)
    if float(np.max(np.abs(bvals))) > 1e-12:
        raise GoalFemError("exact solution of %r does not vanish on the boundary" % scenario.name)


def _base_mesh(scenario):
    if scenario.dim == 1:
        mesh = build_unit_interval(scenario.base_n)
    else:
        mesh = build_unit_square_tri(scenario.base_n)
    if scenario.subdomain_box is not None:
        mesh = tag_subdomain(mesh, scenario.subdomain_box)
    return mesh


def _components(scenario):
    return scenario.dim if scenario.form.kind == ELASTICITY else 1


def _load_subdivide(space, anchor_level):
    # a common physical integration partition across the nested spaces of
    # one level; only needed on triangles (segment loads use a rule that is
    # effectively exact for the smooth sources considered here)
    if space.mesh.dim == 1:
        return 0
    return max(anchor_level - space.mesh.level, 0)


def _safe_ratio(num, den):
    if den is None or abs(den) < _TINY_ERROR:
        return None
    return num / den


def run_scenario(scenario):
    """Run the full refinement sweep for one scenario."""
    validate_exact(scenario)
    qoi = make_functional(scenario)
    mode = H_REFINE if scenario.enrichment == "h" else P_INCREASE
    s_rule = gauss_segment(scenario.s_quad_points)
    comps = _components(scenario)
    j_exact = scenario.exact.j_value if scenario.exact is not None else None

    mesh = _base_mesh(scenario)
    results = []
    for level in range(scenario.levels):
        space_h = build_space(mesh, scenario.degree, comps)
        space_p, prolong = enrich(space_h, mode)

        if qoi.has_witness:
            anchor = space_p.mesh.level
        else:
            anchor = space_p.mesh.level + 2
        sys_h = build_system(
            space_h, scenario.form, scenario.load, _load_subdivide(space_h, anchor)
        )
        sys_p = build_system(
            space_p, scenario.form, scenario.load, _load_subdivide(space_p, anchor)
        )

        tol = scenario.solver_tol
        u_h, _ = solve_spd(sys_h, tol=tol)
        u_plus, _ = solve_spd(sys_p, tol=tol)
        u_h_in_p = prolong.apply(u_h)

        z_plus = solve_adjoint(qoi, u_h_in_p, sys_p, ENRICHED, tol=tol)
        eta3_val = _eta3(sys_p, u_h_in_p, z_plus)
        eta1_val, rem_enr = _eta1(qoi, u_h_in_p, u_plus, z_plus, sys_p, s_rule)

        witness = witness_adjoint(qoi, u_h)
        if witness is not None:
            eta2_val = _eta2(sys_h, u_h, witness)
            rem_ref = None
        else:
            space_r1, p1 = enrich(space_p, H_REFINE)
            space_r2, p2 = enrich(space_r1, H_REFINE)
            to_ref = compose_prolongations(p1, p2)
            sys_ref = build_system(space_r2, scenario.form, scenario.load, 0)
            u_h_in_ref = to_ref.apply(prolong.apply(u_h))
            u_ref, _ = solve_spd(sys_ref, tol=tol)
            z_ref = solve_adjoint(qoi, u_h_in_ref, sys_ref, REFERENCE, tol=tol)
            eta2_val = _eta2(sys_ref, u_h_in_ref, z_ref)
            e_ref = CoeffVec(space_r2, u_ref.values - u_h_in_ref.values)
            rem_ref = taylor_remainder(qoi, u_h_in_ref, e_ref, s_rule)

        j_uh = qoi.value(u_h)
        j_uplus = qoi.value(u_plus)
        true_error = None if j_exact is None else j_exact - j_uh
        b_h = None
        if true_error is not None and abs(true_error) >= _TINY_ERROR:
            b_h = abs(j_exact - j_uplus) / abs(true_error)

        gap_vec = prolong.matrix.T @ (sys_p.matrix @ (u_plus.values - u_h_in_p.values))
        gap = float(np.max(np.abs(gap_vec[space_h.free_mask]), initial=0.0))
        a_norm = float(np.max(np.abs(sys_p.matrix).sum(axis=1)))
        e_norm = float(np.linalg.norm(u_plus.values - u_h_in_p.values))

        estimates = EstimateReport(
            eta1=eta1_val,
            eta2=eta2_val,
            eta3=eta3_val,
            remainder_enriched=rem_enr,
            remainder_reference=rem_ref,
            true_error=true_error,
            effectivity_eta1=_safe_ratio(eta1_val, true_error),
            effectivity_eta2=_safe_ratio(eta2_val, true_error),
            effectivity_eta3=_safe_ratio(eta3_val, true_error),
            z_distance_to_Vh=z_distance_to_coarse(z_plus, prolong, sys_p, sys_h, tol=tol),
            b_h_measured=b_h,
        )

        reliability_ok = None
        if true_error is not None and b_h is not None and b_h < 1.0:
            reliability_ok = abs(true_error) <= abs(eta1_val) / (1.0 - b_h) + 1e-9

        results.append(
            LevelResult(
                level=level,
                h=1.0 / (scenario.base_n * 2 ** level),
                n_dofs=space_h.n_dofs,
                j_uh=j_uh,
                j_uplus=j_uplus,
                estimates=estimates,
                reliability_ok=reliability_ok,
                galerkin_gap=gap,
                galerkin_scale=a_norm * e_norm,
                adjoint_rel_residual=z_plus.solve_report.final_relative_residual,
            )
        )
        mesh = refine_uniform(mesh)

    report = SweepReport(scenario=scenario, levels=results)
    _finalize(report, qoi.has_witness)
    return report


def _slope(hs, values):
    vals = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals == 0.0):
        return None
    return float(np.polyfit(np.log(np.asarray(hs)), np.log(np.abs(vals)), 1)[0])


def _finalize(report, has_witness):
    levels = report.levels
    hs = [r.h for r in levels]
    trues = [r.estimates.true_error for r in levels]
    if all(t is not None for t in trues):
        report.rate_true_error = _slope(hs, trues)
    report.rate_eta1 = _slope(hs, [r.estimates.eta1 for r in levels])
    bhs = [r.estimates.b_h_measured for r in levels]
    known = [b for b in bhs if b is not None]
    report.b0_observed = max(known) if known else None

    # Non-reliability surrogate: the true-error to eta3 ratio must grow by
    # at least 10x at every refinement step across the sweep.
    if not has_witness:
        report.verdict = NOT_APPLICABLE
        return
    eps = float(np.finfo(float).eps)
    ratios = []
    for r in levels:
        t = r.estimates.true_error
        if t is None:
            report.verdict = NOT_APPLICABLE
            return
        ratios.append(abs(t) / max(abs(r.estimates.eta3), eps))
    grows = len(levels) >= 4 and all(
        ratios[i + 1] >= 10.0 * ratios[i] for i in range(len(ratios) - 1)
    )
    report.verdict = COLLAPSE_CONFIRMED if grows else COLLAPSE_NOT_CONFIRMED


def measure_saturation(report):
    """Per-level saturation ratios; None where the true error is below the guard."""
    return [r.estimates.b_h_measured for r in report.levels]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % value


_CSV_HEADER = (
    "level,h,n_dofs,J_uh,true_error,eta1,eta2,eta3,remainder,"
    "eff1,eff2,eff3,b_h,reliability_ok"
)


def csv_text(report):
    """CSV payload of a sweep, one row per level, 17 significant digits."""
    lines = [_CSV_HEADER]
    for r in report.levels:
        e = r.estimates
        row = [
            r.level, r.h, r.n_dofs, r.j_uh, e.true_error,
            e.eta1, e.eta2, e.eta3, e.remainder_enriched,
            e.effectivity_eta1, e.effectivity_eta2, e.effectivity_eta3,
            e.b_h_measured, r.reliability_ok,
        ]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_report(report, fmt, path):
    """Write a sweep report as CSV (one row per level) or structured JSON."""
    if fmt == "csv":
        try:
            with open(path, "w", newline="") as f:
                f.write(csv_text(report))
        except OSError as err:
            raise GoalFemError("cannot write CSV report to %s: %s" % (path, err))
    elif fmt == "json":
        doc = report_to_dict(report)
        try:
            with open(path, "w") as f:
                json.dump(doc, f, indent=2)
                f.write("\n")
        except OSError as err:
            raise GoalFemError("cannot write JSON report to %s: %s" % (path, err))
    else:
        raise ConfigError("unknown report format %r" % fmt)


def report_to_dict(report):
    s = report.scenario
    doc = {
        "scenario": {
            "name": s.name,
            "dim": s.dim,
            "base_n": s.base_n,
            "degree": s.degree,
            "levels": s.levels,
            "enrichment": s.enrichment,
            "functional": s.qoi_kind,
            "solver_tol": s.solver_tol,
            "s_quad_points": s.s_quad_points,
            "j_exact": None if s.exact is None else s.exact.j_value,
        },
        "levels": [],
        "rate_true_error": report.rate_true_error,
        "rate_eta1": report.rate_eta1,
        "b0_observed": report.b0_observed,
        "verdict": report.verdict,
    }
    for r in report.levels:
        e = r.estimates
        doc["levels"].append(
            {
                "level": r.level,
                "h": r.h,
                "n_dofs": r.n_dofs,
                "J_uh": r.j_uh,
                "J_uplus": r.j_uplus,
                "true_error": e.true_error,
                "eta1": e.eta1,
                "eta2": e.eta2,
                "eta3": e.eta3,
                "remainder_enriched": e.remainder_enriched,
                "remainder_reference": e.remainder_reference,
                "eff1": e.effectivity_eta1,
                "eff2": e.effectivity_eta2,
                "eff3": e.effectivity_eta3,
                "z_distance_to_Vh": e.z_distance_to_Vh,
                "b_h": e.b_h_measured,
                "reliability_ok": r.reliability_ok,
            }
        )
    return doc


_CONFIG_KEYS = {
    "scenario", "levels", "enrichment", "base_n", "solver_tol", "s_quad_points"
}


def scenario_from_config(doc, registry):
    """Build a scenario from a config mapping; unknown keys are rejected."""
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    if "scenario" not in doc:
        raise ConfigError("config must name a builtin via the 'scenario' key")
    name = doc["scenario"]
    if name not in registry:
        raise ConfigError("unknown scenario %r" % name)
    scenario = registry[name]
    overrides = {}
    if "levels" in doc:
        overrides["levels"] = int(doc["levels"])
    if "base_n" in doc:
        overrides["base_n"] = int(doc["base_n"])
    if "enrichment" in doc:
        if doc["enrichment"] not in ("h", "p"):
            raise ConfigError("enrichment must be 'h' or 'p'")
        overrides["enrichment"] = doc["enrichment"]
    if "solver_tol" in doc:
        overrides["solver_tol"] = float(doc["solver_tol"])
    if "s_quad_points" in doc:
        overrides["s_quad_points"] = int(doc["s_quad_points"])
    return replace(scenario, **overrides) if overrides else scenario

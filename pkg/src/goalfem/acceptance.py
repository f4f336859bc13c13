"""Acceptance checks: exact identities, collapse behavior, reliability,
and determinism, each with a pinned tolerance.

Each check returns a CheckResult; ``run_all`` executes the whole battery,
prints one pass/fail line per check, and is what the CLI ``verify``
command invokes.  Sweeps are cached so the battery runs every check on one
shared set of scenario results (the determinism check re-runs everything
from scratch by design).
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from .assembly import form_matrix
from .estimators import ANALYTIC_WITNESS
from .functionals import fd_oracle_d1, fd_oracle_d2, taylor_remainder
from .harness import COLLAPSE_CONFIRMED, csv_text, emit_report, run_scenario
from .mesh import build_unit_interval, build_unit_square_tri, tag_subdomain
from .quadrature import gauss_segment
from .scenarios import builtin_scenarios, get_scenario
from .space import CoeffVec, build_space, random_field

__all__ = ["CheckResult", "SweepCache", "ALL_CHECKS", "run_all"]

COLLAPSE_SCENARIOS = (
    "poisson1d-energy-f1",
    "poisson1d-energy-sin",
    "poisson2d-energy-sin",
    "poisson1d-sqrt-energy",
    "poisson1d-genergy-pow2",
    "elasticity2d-strain-energy",
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


class SweepCache:
    """Lazily computed scenario sweeps shared across checks."""

    def __init__(self):
        self._reports = {}

    def get(self, name):
        if name not in self._reports:
            self._reports[name] = run_scenario(get_scenario(name))
        return self._reports[name]

    def all_names(self):
        return [s.name for s in builtin_scenarios()]


def _scale(j_uh):
    return max(1.0, abs(j_uh))


def check_error_representation_identity(cache):
    """eta1 equals the enriched-space functional difference on every level."""
    worst = 0.0
    where = ""
    for name in cache.all_names():
        report = cache.get(name)
        for r in report.levels:
            gap = abs(r.estimates.eta1 - (r.j_uplus - r.j_uh))
            rel = gap / _scale(r.j_uh)
            if rel > worst:
                worst, where = rel, "%s level %d" % (name, r.level)
    passed = worst <= 1e-9
    return CheckResult(
        "error-representation identity (eta1 = J(u+) - J(u_h))",
        passed,
        "worst scaled gap %.3g at %s (tol 1e-9)" % (worst, where),
    )


def check_collapse(cache):
    """eta2 (witness) and eta3 vanish while the true error stays finite."""
    worst2 = worst3 = 0.0
    min_true = math.inf
    where = ""
    for name in COLLAPSE_SCENARIOS:
        report = cache.get(name)
        for r in report.levels:
            s = _scale(r.j_uh)
            rel2 = abs(r.estimates.eta2) / s
            rel3 = abs(r.estimates.eta3) / s
            if rel2 > worst2:
                worst2, where = rel2, "%s level %d" % (name, r.level)
            worst3 = max(worst3, rel3)
            min_true = min(min_true, abs(r.estimates.true_error))
    passed = worst2 <= 1e-10 and worst3 <= 1e-9 and min_true >= 1e-6
    return CheckResult(
        "estimator collapse for representer-bearing functionals",
        passed,
        "worst |eta2| %.3g (tol 1e-10, at %s), worst |eta3| %.3g (tol 1e-9), "
        "min |true error| %.3g (floor 1e-6)" % (worst2, where, worst3, min_true),
    )


def check_divergence_surrogate(cache):
    """|true|/max(|eta3|, eps) grows >= 10x per level and the verdict fires."""
    eps = float(np.finfo(float).eps)
    failures = []
    for name in COLLAPSE_SCENARIOS:
        report = cache.get(name)
        ratios = [
            abs(r.estimates.true_error) / max(abs(r.estimates.eta3), eps)
            for r in report.levels
        ]
        grows = len(ratios) >= 4 and all(
            ratios[i + 1] >= 10.0 * ratios[i] for i in range(len(ratios) - 1)
        )
        if not (grows and report.verdict == COLLAPSE_CONFIRMED):
            failures.append(
                "%s: ratios %s, verdict %s"
                % (name, ["%.3g" % v for v in ratios], report.verdict)
            )
    return CheckResult(
        "non-reliability surrogate (ratio growth 10x/level + verdict)",
        not failures,
        "all six scenarios confirm" if not failures else "; ".join(failures),
    )


def check_closed_form_true_error(cache):
    """poisson1d-energy-f1: J = 1/12 and true error h^2/12 within 1 percent."""
    report = cache.get("poisson1d-energy-f1")
    j_gap = abs(report.scenario.exact.j_value - 1.0 / 12.0)
    worst = 0.0
    for r in report.levels:
        expected = r.h ** 2 / 12.0
        worst = max(worst, abs(r.estimates.true_error - expected) / expected)
    passed = j_gap <= 1e-10 and worst <= 0.01
    return CheckResult(
        "closed-form true error h^2/12 for the 1D f=1 energy scenario",
        passed,
        "J gap %.3g (tol 1e-10), worst relative deviation %.3g (tol 0.01)"
        % (j_gap, worst),
    )


def check_reliability(cache):
    """The remainder-corrected estimate bounds the error with 1/(1-b_h)."""
    violations = []
    for name in cache.all_names():
        report = cache.get(name)
        for r in report.levels:
            if r.reliability_ok is False:
                violations.append("%s level %d" % (name, r.level))

    f1 = cache.get("poisson1d-energy-f1")
    bh_ok = all(
        r.estimates.b_h_measured is not None
        and abs(r.estimates.b_h_measured - 0.25) <= 0.02
        for r in f1.levels
    )
    eff_ok = all(
        abs(r.estimates.effectivity_eta1 - 0.75) <= 0.02 for r in f1.levels
    )
    f1p = cache.get("poisson1d-energy-f1-p")
    effp_ok = all(
        abs(r.estimates.effectivity_eta1 - 1.0) <= 1e-8 for r in f1p.levels
    )
    passed = not violations and bh_ok and eff_ok and effp_ok
    detail = []
    if violations:
        detail.append("bound violated at " + ", ".join(violations))
    detail.append(
        "f1 h-enrichment: b_h in 0.25+-0.02 %s, eta1 effectivity in 0.75+-0.02 %s"
        % (bh_ok, eff_ok)
    )
    detail.append("f1 p-enrichment: eta1 effectivity = 1 within 1e-8 %s" % effp_ok)
    return CheckResult(
        "reliability of the remainder-corrected estimate", passed, "; ".join(detail)
    )


def _derivative_fixtures():
    """(kind, qoi, space) triples reusing the builtin forms."""
    from .harness import make_functional

    fixtures = []
    for name, kind in [
        ("poisson1d-linear-qoi", "linear"),
        ("poisson1d-energy-f1", "energy"),
        ("poisson1d-genergy-pow2", "g-energy"),
        ("poisson1d-sqrt-energy", "sqrt-energy"),
    ]:
        scenario = get_scenario(name)
        space = build_space(build_unit_interval(8), 1)
        fixtures.append((kind, make_functional(scenario), space))
    local = get_scenario("poisson2d-local-energy")
    mesh = tag_subdomain(build_unit_square_tri(4), local.subdomain_box)
    fixtures.append(("local-energy", make_functional(local), build_space(mesh, 1)))
    return fixtures


def _draw_pair(qoi, space, rng):
    u = random_field(space, rng)
    e = random_field(space, rng)
    if qoi.kind in ("g-energy", "sqrt-energy"):
        # keep the perturbation small against the base field in the energy
        # norm so the composition stays well inside its domain
        a = form_matrix(space, qoi.form)
        au = float(u.values @ (a @ u.values))
        ae = float(e.values @ (a @ e.values))
        e = CoeffVec(space, e.values * (0.2 * math.sqrt(au / ae)))
    return u, e


def check_taylor_identity(cache):
    """J(u+e) - J(u) = J'(u; e) + remainder on random field pairs."""
    rule = gauss_segment(10)
    worst = 0.0
    where = ""
    for kind, qoi, space in _derivative_fixtures():
        rng = np.random.default_rng(987001)
        for k in range(20):
            u, e = _draw_pair(qoi, space, rng)
            ue = CoeffVec(space, u.values + e.values)
            lhs = qoi.value(ue) - qoi.value(u)
            rhs = qoi.d1(u, e) + taylor_remainder(qoi, u, e, rule)
            scale = max(1.0, abs(qoi.value(ue)), abs(qoi.value(u)))
            rel = abs(lhs - rhs) / scale
            if rel > worst:
                worst, where = rel, "%s draw %d" % (kind, k)
    passed = worst <= 1e-10
    return CheckResult(
        "second-order Taylor identity on random fields",
        passed,
        "worst scaled defect %.3g at %s (tol 1e-10)" % (worst, where),
    )


def check_derivative_oracles(cache):
    """Analytic directional derivatives match central finite differences."""
    worst1 = worst2 = 0.0
    where = ""
    for kind, qoi, space in _derivative_fixtures():
        rng = np.random.default_rng(987002)
        for k in range(20):
            u, v = _draw_pair(qoi, space, rng)
            w = random_field(space, rng, scale=0.5)
            an1 = qoi.d1(u, v)
            rel1 = abs(an1 - fd_oracle_d1(qoi, u, v)) / max(abs(an1), 1e-14)
            an2 = qoi.d2(u, v, w)
            fd2 = fd_oracle_d2(qoi, u, v, w)
            rel2 = abs(an2 - fd2) / max(abs(an2), 1e-14) if an2 != 0.0 else abs(fd2)
            if rel1 > worst1:
                worst1, where = rel1, "%s draw %d" % (kind, k)
            worst2 = max(worst2, rel2)
    passed = worst1 <= 1e-6 and worst2 <= 1e-5
    return CheckResult(
        "finite-difference oracles for J' and J''",
        passed,
        "worst d1 relative gap %.3g (tol 1e-6, at %s), worst d2 %.3g (tol 1e-5)"
        % (worst1, where, worst2),
    )


def check_galerkin_orthogonality(cache):
    """B(u+ - u_h, phi_h) vanishes for every coarse basis function."""
    worst = 0.0
    where = ""
    for name in cache.all_names():
        report = cache.get(name)
        for r in report.levels:
            rel = r.galerkin_gap / max(r.galerkin_scale, 1e-300)
            if rel > worst:
                worst, where = rel, "%s level %d" % (name, r.level)
    passed = worst <= 1e-9
    return CheckResult(
        "discrete Galerkin orthogonality across nested spaces",
        passed,
        "worst scaled gap %.3g at %s (tol 1e-9)" % (worst, where),
    )


def check_linear_qoi_effectivity(cache):
    """Classical weighted-residual sanity: eta3 effectivity near 1."""
    report = cache.get("poisson1d-linear-qoi")
    eff = report.levels[-1].estimates.effectivity_eta3
    passed = eff is not None and 0.9 <= abs(eff) <= 1.1
    return CheckResult(
        "linear functional eta3 effectivity at the finest level",
        passed,
        "effectivity %.6f (window [0.9, 1.1])" % (float("nan") if eff is None else eff),
    )


def check_local_energy_no_collapse(cache):
    """Subdomain energy keeps a nonzero enriched-adjoint estimate."""
    report = cache.get("poisson2d-local-energy")
    min_eta3 = min(abs(r.estimates.eta3) for r in report.levels)
    passed = min_eta3 > 1e-6
    return CheckResult(
        "no collapse for the subdomain energy functional",
        passed,
        "min |eta3| %.3g (floor 1e-6)" % min_eta3,
    )


def check_determinism(cache):
    """A second full run reproduces every CSV byte for byte."""
    mismatches = []
    for name in cache.all_names():
        first = csv_text(cache.get(name))
        second = csv_text(run_scenario(get_scenario(name)))
        if first != second:
            mismatches.append(name)
    return CheckResult(
        "byte-identical CSV output across repeated runs",
        not mismatches,
        "all scenarios identical" if not mismatches else "differs: " + ", ".join(mismatches),
    )


ALL_CHECKS = [
    ("A1", check_error_representation_identity),
    ("A2", check_collapse),
    ("A3", check_divergence_surrogate),
    ("A4", check_closed_form_true_error),
    ("A5", check_reliability),
    ("A6", check_taylor_identity),
    ("A7", check_derivative_oracles),
    ("A8", check_galerkin_orthogonality),
    ("A9", check_linear_qoi_effectivity),
    ("A10", check_local_energy_no_collapse),
    ("A11", check_determinism),
]


def run_all(out_dir=None, cache=None, echo=print):
    """Run every acceptance check; optionally emit per-scenario reports."""
    cache = cache if cache is not None else SweepCache()
    results = []
    for tag, fn in ALL_CHECKS:
        result = fn(cache)
        results.append((tag, result))
        echo("%s %s - %s: %s" % ("PASS" if result.passed else "FAIL", tag, result.name, result.detail))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for name in cache.all_names():
            report = cache.get(name)
            emit_report(report, "csv", os.path.join(out_dir, name + ".csv"))
            emit_report(report, "json", os.path.join(out_dir, name + ".json"))
    return results

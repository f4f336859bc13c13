"""Galerkin finite element testbed for adjoint-weighted residual error
estimates of nonlinear goal functionals."""

from .mesh import (
    Mesh,
    build_unit_interval,
    build_unit_square_tri,
    refine_uniform,
    tag_subdomain,
    write_vtk,
)
from .quadrature import QuadRule, gauss_segment, gauss_triangle, subdivide_rule
from .space import (
    H_REFINE,
    P_INCREASE,
    CoeffVec,
    FeSpace,
    Prolongation,
    build_space,
    compose_prolongations,
    enrich,
    evaluate,
    interpolate,
    random_field,
)
from .assembly import (
    ELASTICITY,
    POISSON,
    FormDef,
    LoadDef,
    SystemPair,
    apply_dirichlet,
    assemble_form,
    assemble_load,
    bilinear_value,
    build_system,
    form_matrix,
)
from .solver import SolveReport, dense_solve, solve_spd
from .functionals import (
    EnergyQoi,
    GEnergyQoi,
    GFunction,
    LinearQoi,
    fd_oracle_d1,
    fd_oracle_d2,
    g_power,
    sqrt_energy,
    taylor_remainder,
)
from .estimators import (
    ANALYTIC_WITNESS,
    COARSE,
    ENRICHED,
    REFERENCE,
    AdjointSolution,
    EstimateReport,
    eta1,
    eta2,
    eta3,
    solve_adjoint,
    weighted_residual,
    witness_adjoint,
    z_distance_to_coarse,
)
from .harness import (
    ExactSolution,
    LevelResult,
    Scenario,
    SweepReport,
    csv_text,
    emit_report,
    make_functional,
    measure_saturation,
    report_to_dict,
    run_scenario,
    validate_exact,
)
from .scenarios import builtin_scenarios, get_scenario, scenario_registry
from .errors import (
    AssemblyError,
    ConfigError,
    DomainError,
    GoalFemError,
    MeshError,
    SolverError,
    SpaceError,
)

__version__ = "0.1.0"

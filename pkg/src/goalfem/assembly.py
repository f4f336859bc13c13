"""Assembly of bilinear forms and load functionals into sparse operators.

Two form kinds are supported: the Poisson stiffness (scalar) and isotropic
plane-strain elasticity (vector, engineering Voigt convention).  Form
matrices are cached per space so every consumer of B(.,.) sees the exact
same floating-point operator.
"""

import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .mesh import cell_measures
from .quadrature import gauss_segment, gauss_triangle, subdivide_rule
from .space import reference_basis

__all__ = [
    "POISSON",
    "ELASTICITY",
    "FormDef",
    "LoadDef",
    "SystemPair",
    "assemble_form",
    "assemble_load",
    "apply_dirichlet",
    "build_system",
    "form_matrix",
    "bilinear_value",
]

POISSON = "poisson"
ELASTICITY = "elasticity"


@dataclass(frozen=True)
class FormDef:
    kind: str
    lam: float = 0.0  # Lame lambda (elasticity only)
    mu: float = 1.0   # shear modulus (elasticity only)

    def __post_init__(self):
        if self.kind not in (POISSON, ELASTICITY):
            raise AssemblyError("unknown form kind %r" % self.kind)
        if self.kind == ELASTICITY and (self.mu <= 0.0 or self.lam < 0.0):
            raise AssemblyError("elasticity requires mu > 0 and lam >= 0")

    def check_space(self, space):
        if self.kind == POISSON and space.components != 1:
            raise AssemblyError("the Poisson form requires a scalar space")
        if self.kind == ELASTICITY and space.components != space.mesh.dim:
            raise AssemblyError("elasticity requires components == dim")


@dataclass(eq=False)
class LoadDef:
    """Analytic source term f; ``source`` maps (n, dim) -> (n,) or (n, components)."""

    source: object
    description: str = ""
    poly_degree: int = None  # polynomial degree of f, None if transcendental


@dataclass(eq=False)
class SystemPair:
    """Constrained SPD system together with the raw (unconstrained) operators."""

    space: object
    matrix: sp.csr_matrix      # Dirichlet rows/cols eliminated symmetrically
    rhs: np.ndarray            # constrained right-hand side
    raw_matrix: sp.csr_matrix = None
    raw_rhs: np.ndarray = None


def _cell_geometry(space):
    """Per-cell |measure|, jacobian determinant, and J^{-T} (2D)."""
    mesh = space.mesh
    v = mesh.vertices[mesh.cells]
    if mesh.dim == 1:
        h = v[:, 1, 0] - v[:, 0, 0]
        return h, None
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    jinv_t = np.empty((mesh.n_cells, 2, 2))
    jinv_t[:, 0, 0] = e2[:, 1]
    jinv_t[:, 0, 1] = -e1[:, 1]
    jinv_t[:, 1, 0] = -e2[:, 0]
    jinv_t[:, 1, 1] = e1[:, 0]
    jinv_t /= det[:, None, None]
    return det, jinv_t


def _stiffness_rule(space):
    # exactness >= 2 * degree covers the (constant-coefficient) gradients
    if space.mesh.dim == 1:
        return gauss_segment(space.degree + 1)
    return gauss_triangle(2 if space.degree == 1 else 4)


def _physical_gradients(space, rule):
    """Gradients of the scalar basis at rule points: array (nc, nq, nl, dim)."""
    _, ref_grads = reference_basis(space.mesh.dim, space.degree, rule.points)
    det, jinv_t = _cell_geometry(space)
    if space.mesh.dim == 1:
        g = ref_grads[None, :, :, :] / det[:, None, None, None]
        return np.transpose(g, (0, 2, 1, 3)), np.abs(det)
    g = np.einsum("ndc,lqc->nqld", jinv_t, ref_grads)
    return g, np.abs(det)


def assemble_form(space, form, subdomain=None):
    """Galerkin matrix of the bilinear form on the nodal basis (symmetric).

    ``subdomain`` restricts the cell loop to cells with that tag, which
    realizes the subdomain-restricted form used by local functionals.
    """
    form.check_space(space)
    rule = _stiffness_rule(space)
    grads, det = _physical_gradients(space, rule)  # (nc, nq, nl, dim)
    w = rule.weights

    if subdomain is not None:
        keep = space.mesh.cell_subdomain == subdomain
        grads = grads[keep]
        det = det[keep]
        cell_dofs = space.cell_dofs[keep]
    else:
        cell_dofs = space.cell_dofs

    if form.kind == POISSON:
        ke = np.einsum("q,nqid,nqjd->nij", w, grads, grads) * det[:, None, None]
    else:
        lam, mu = form.lam, form.mu
        d_mat = np.array(
            [[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]]
        )
        nc, nq, nl, _ = grads.shape
        b_mat = np.zeros((nc, nq, 3, 2 * nl))
        b_mat[:, :, 0, 0::2] = grads[:, :, :, 0]
        b_mat[:, :, 1, 1::2] = grads[:, :, :, 1]
        b_mat[:, :, 2, 0::2] = grads[:, :, :, 1]
        b_mat[:, :, 2, 1::2] = grads[:, :, :, 0]
        ke = np.einsum("q,nqai,ab,nqbj->nij", w, b_mat, d_mat, b_mat)
        ke *= det[:, None, None]

    nl = cell_dofs.shape[1]
    rows = np.repeat(cell_dofs, nl, axis=1).ravel()
    cols = np.tile(cell_dofs, (1, nl)).ravel()
    a = sp.coo_matrix(
        (ke.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)
    ).tocsr()
    return a


_form_cache = weakref.WeakKeyDictionary()


def form_matrix(space, form, subdomain=None):
    """Cached assemble_form; all consumers share one operator per space."""
    per_space = _form_cache.setdefault(space, {})
    key = (form, subdomain)
    if key not in per_space:
        per_space[key] = assemble_form(space, form, subdomain)
    return per_space[key]


def _load_rule(space, subdivide):
    # High-order Gauss on segments; the richest triangle rule, composite
    # refined when a common integration partition across nested spaces is
    # required (the subdivide count is chosen by the caller).
    base = gauss_segment(10) if space.mesh.dim == 1 else gauss_triangle(4)
    return subdivide_rule(base, subdivide)


def assemble_load(space, load, subdivide=0):
    """Vector of integrals of f against every basis function.

    ``subdivide`` composite-refines the per-cell rule; across nested meshes
    equal physical subdivision levels make the discrete load functional
    identical on both spaces, which the exact estimator identities rely on.
    """
    rule = _load_rule(space, subdivide)
    vals, _ = reference_basis(space.mesh.dim, space.degree, rule.points)  # (nl, nq)
    mesh = space.mesh
    v = mesh.vertices[mesh.cells]
    origin = v[:, 0]
    span = v[:, 1:] - origin[:, None, :]
    pts = origin[:, None, :] + np.einsum("ned,qe->nqd", span, rule.points)
    det = np.abs(cell_measures(mesh)) * (1.0 if mesh.dim == 1 else 2.0)

    f = np.asarray(load.source(pts.reshape(-1, mesh.dim)), dtype=float)
    ncomp = space.components
    f = f.reshape(mesh.n_cells, rule.weights.size, ncomp)
    if ncomp != 1 and f.shape[-1] != ncomp:
        raise AssemblyError("source has wrong number of components")

    be = np.einsum("q,nqc,lq->nlc", rule.weights, f, vals) * det[:, None, None]
    vec = np.zeros(space.n_dofs)
    np.add.at(vec, space.cell_dofs.ravel(), be.reshape(mesh.n_cells, -1).ravel())
    return vec


def apply_dirichlet(space, matrix, rhs):
    """Symmetric elimination for homogeneous data.

    Constrained rows/columns are replaced by identity and the constrained
    rhs entries are zeroed; symmetry is preserved exactly.
    """
    free = sp.diags(space.free_mask.astype(float))
    fixed = sp.diags((~space.free_mask).astype(float))
    a_c = (free @ matrix @ free + fixed).tocsr()
    b_c = np.where(space.free_mask, rhs, 0.0)
    return a_c, b_c


def build_system(space, form, load, subdivide=0):
    """Assemble, constrain, and bundle the discrete problem."""
    a = form_matrix(space, form)
    b = assemble_load(space, load, subdivide)
    a_c, b_c = apply_dirichlet(space, a, b)
    return SystemPair(space=space, matrix=a_c, rhs=b_c, raw_matrix=a, raw_rhs=b)


def bilinear_value(matrix, a, b):
    """Scalar B(a, b) of two coefficient arrays through an assembled matrix."""
    return float(np.dot(a, matrix @ b))

"""Lagrange finite element spaces, nodal fields, and nested-space embeddings.

Degrees 1 and 2 on segment/triangle meshes, scalar or vector valued.
DOF ordering: vertex nodes in mesh index order, then edge nodes in
sorted-edge order; vector components are interleaved per node
(dof = node * components + component).  Spaces and prolongations are
immutable; evaluation is reentrant.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, SpaceError
from .mesh import refine_uniform, unique_edges

__all__ = [
    "FeSpace",
    "CoeffVec",
    "Prolongation",
    "H_REFINE",
    "P_INCREASE",
    "build_space",
    "enrich",
    "compose_prolongations",
    "evaluate",
    "interpolate",
    "reference_basis",
    "random_field",
]

H_REFINE = "h-refine"
P_INCREASE = "p-increase"


@dataclass(eq=False)
class FeSpace:
    mesh: object
    degree: int
    components: int
    n_nodes: int
    n_dofs: int
    node_coords: np.ndarray    # (n_nodes, dim)
    dof_coords: np.ndarray     # (n_dofs, dim), node coordinate repeated per component
    dirichlet_dofs: np.ndarray  # sorted constrained dof indices
    free_mask: np.ndarray      # (n_dofs,) bool, True on unconstrained dofs
    cell_nodes: np.ndarray     # (n_cells, nodes per cell) global node indices
    cell_dofs: np.ndarray      # (n_cells, local dofs) global dof indices

    @property
    def dim(self):
        return self.mesh.dim

    def constrain(self, values):
        """Zero the Dirichlet entries of a coefficient array (idempotent)."""
        out = np.asarray(values, dtype=float).copy()
        out[~self.free_mask] = 0.0
        return out


@dataclass(eq=False)
class CoeffVec:
    """Coefficient vector of a field in a specific space."""

    space: FeSpace
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.space.n_dofs,):
            raise SpaceError(
                "coefficient vector has length %d, space has %d dofs"
                % (self.values.size, self.space.n_dofs)
            )

    def copy(self):
        return CoeffVec(self.space, self.values.copy())


@dataclass(eq=False)
class Prolongation:
    """Sparse embedding of a coarse space into a nested finer space."""

    from_space: FeSpace
    to_space: FeSpace
    matrix: sp.csr_matrix  # (n_to, n_from)

    def apply(self, c):
        if c.space is not self.from_space:
            raise SpaceError("coefficient vector does not belong to the source space")
        return CoeffVec(self.to_space, self.matrix @ c.values)


def reference_basis(dim, degree, points):
    """Nodal basis values and gradients on the reference cell.

    Returns (values, grads) with shapes (n_local, n_pts) and
    (n_local, n_pts, dim).  Local node order: vertices first, then edge
    midnodes; triangle edges in local order (0,1), (1,2), (0,2).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, dim)
    nq = pts.shape[0]
    if dim == 1:
        x = pts[:, 0]
        if degree == 1:
            vals = np.stack([1.0 - x, x])
            grads = np.stack([np.full(nq, -1.0), np.full(nq, 1.0)])
        else:
            vals = np.stack(
                [(1.0 - x) * (1.0 - 2.0 * x), x * (2.0 * x - 1.0), 4.0 * x * (1.0 - x)]
            )
            grads = np.stack([4.0 * x - 3.0, 4.0 * x - 1.0, 4.0 - 8.0 * x])
        return vals, grads[:, :, None]

    x, y = pts[:, 0], pts[:, 1]
    lam = np.stack([1.0 - x - y, x, y])                       # (3, nq)
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])   # (3, dim)
    if degree == 1:
        vals = lam
        grads = np.broadcast_to(dlam[:, None, :], (3, nq, 2)).copy()
        return vals, grads
    edges = [(0, 1), (1, 2), (0, 2)]
    vals = np.empty((6, nq))
    grads = np.empty((6, nq, 2))
    for i in range(3):
        vals[i] = lam[i] * (2.0 * lam[i] - 1.0)
        grads[i] = (4.0 * lam[i] - 1.0)[:, None] * dlam[i]
    for k, (i, j) in enumerate(edges):
        vals[3 + k] = 4.0 * lam[i] * lam[j]
        grads[3 + k] = 4.0 * (lam[i][:, None] * dlam[j] + lam[j][:, None] * dlam[i])
    return vals, grads


def build_space(mesh, degree, components=1):
    """Lagrange space of the given degree on a mesh.

    Dirichlet dofs are exactly those whose node lies on the boundary of
    the unit domain (all components of a boundary node).
    """
    if degree not in (1, 2):
        raise SpaceError("degree must be 1 or 2, got %r" % degree)
    if components < 1:
        raise SpaceError("components must be positive")

    if degree == 1:
        node_coords = mesh.vertices
        cell_nodes = mesh.cells
    else:
        edges, cell_edges = unique_edges(mesh.cells, mesh.dim)
        midnodes = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
        node_coords = np.vstack([mesh.vertices, midnodes])
        cell_nodes = np.hstack([mesh.cells, mesh.n_vertices + cell_edges])

    n_nodes = node_coords.shape[0]
    n_dofs = n_nodes * components
    dof_coords = np.repeat(node_coords, components, axis=0)

    on_boundary = np.any((node_coords == 0.0) | (node_coords == 1.0), axis=1)
    bdr_nodes = np.nonzero(on_boundary)[0]
    dirichlet = (bdr_nodes[:, None] * components + np.arange(components)).ravel()
    dirichlet = np.sort(dirichlet)
    free_mask = np.ones(n_dofs, dtype=bool)
    free_mask[dirichlet] = False

    nl = cell_nodes.shape[1]
    cell_dofs = (
        cell_nodes[:, :, None] * components + np.arange(components)[None, None, :]
    ).reshape(-1, nl * components)

    return FeSpace(
        mesh=mesh,
        degree=degree,
        components=components,
        n_nodes=n_nodes,
        n_dofs=n_dofs,
        node_coords=node_coords,
        dof_coords=dof_coords,
        dirichlet_dofs=dirichlet,
        free_mask=free_mask,
        cell_nodes=cell_nodes,
        cell_dofs=cell_dofs,
    )


def _node_owner_cells(space):
    """First cell (in index order) incident to each node."""
    owner = np.full(space.n_nodes, np.iinfo(np.int64).max, dtype=np.int64)
    cells = np.repeat(
        np.arange(space.cell_nodes.shape[0]), space.cell_nodes.shape[1]
    )
    np.minimum.at(owner, space.cell_nodes.ravel(), cells)
    return owner


def _barycentric_in_cell(mesh, cell, points):
    """Reference coordinates of physical points inside a given cell."""
    v = mesh.vertices[mesh.cells[cell]]
    if mesh.dim == 1:
        return (points[:, 0:1] - v[0, 0]) / (v[1, 0] - v[0, 0])
    J = np.column_stack([v[1] - v[0], v[2] - v[0]])
    return np.linalg.solve(J, (points - v[0]).T).T


def _scalar_interp_matrix(coarse, fine_space, fine_mesh_is_refined):
    """Node-interpolation matrix N with N[k, m] = phi_m(x_k) for fine nodes x_k."""
    rows, cols, data = [], [], []

    def emit(row, col_list, val_list):
        for c, v in zip(col_list, val_list):
            if v != 0.0:
                rows.append(row)
                cols.append(int(c))
                data.append(float(v))

    if not fine_mesh_is_refined:
        # p-increase on the same mesh: fine vertices coincide with coarse
        # nodes, fine edge midnodes average the edge endpoints.
        nv = coarse.mesh.n_vertices
        for k in range(nv):
            emit(k, [k], [1.0])
        edges, _ = unique_edges(coarse.mesh.cells, coarse.mesh.dim)
        for e, (a, b) in enumerate(edges):
            emit(nv + e, [a, b], [0.5, 0.5])
    else:
        fine_mesh = fine_space.mesh
        if coarse.degree == 1:
            # Fine vertices only; provenance gives the parent vertex pair.
            for k, (a, b) in enumerate(fine_mesh.vertex_parents):
                if a == b:
                    emit(k, [a], [1.0])
                else:
                    emit(k, [a, b], [0.5, 0.5])
        else:
            # Evaluate the coarse quadratic basis inside the parent cell of
            # a deterministic owner cell of each fine node (the field is
            # continuous, so the owner choice does not matter).
            owner = _node_owner_cells(fine_space)
            parent = fine_mesh.cell_parent[owner]
            for k in range(fine_space.n_nodes):
                pc = int(parent[k])
                lam = _barycentric_in_cell(
                    coarse.mesh, pc, fine_space.node_coords[k : k + 1]
                )
                vals, _ = reference_basis(coarse.mesh.dim, coarse.degree, lam)
                emit(k, coarse.cell_nodes[pc], vals[:, 0])

    n = sp.coo_matrix(
        (data, (rows, cols)), shape=(fine_space.n_nodes, coarse.n_nodes)
    ).tocsr()
    return n


def _expand_components(node_matrix, components):
    if components == 1:
        return node_matrix.tocsr()
    return sp.kron(node_matrix, sp.eye(components, format="csr"), format="csr")


def enrich(space, mode):
    """Build the enriched space containing ``space`` and its embedding.

    H_REFINE refines the underlying mesh once and keeps the degree;
    P_INCREASE raises degree 1 to degree 2 on the same mesh.
    """
    if mode == H_REFINE:
        fine_mesh = refine_uniform(space.mesh)
        fine = build_space(fine_mesh, space.degree, space.components)
        node_matrix = _scalar_interp_matrix(space, fine, fine_mesh_is_refined=True)
    elif mode == P_INCREASE:
        if space.degree != 1:
            raise SpaceError("P_INCREASE is only supported from degree 1")
        fine = build_space(space.mesh, 2, space.components)
        node_matrix = _scalar_interp_matrix(space, fine, fine_mesh_is_refined=False)
    else:
        raise SpaceError("unknown enrichment mode %r" % (mode,))
    matrix = _expand_components(node_matrix, space.components)
    return fine, Prolongation(from_space=space, to_space=fine, matrix=matrix)


def compose_prolongations(first, second):
    """Embedding for the composition first: A->B, second: B->C."""
    if first.to_space is not second.from_space:
        raise SpaceError("prolongations are not composable")
    return Prolongation(
        from_space=first.from_space,
        to_space=second.to_space,
        matrix=(second.matrix @ first.matrix).tocsr(),
    )


def _locate_cell(mesh, point, tol=1e-12):
    # Deterministic lookup: first cell in index order containing the point.
    for cell in range(mesh.n_cells):
        lam = _barycentric_in_cell(mesh, cell, point.reshape(1, -1))[0]
        coords = np.append(lam, 1.0 - lam.sum()) if mesh.dim == 2 else np.array(
            [lam[0], 1.0 - lam[0]]
        )
        if np.all(coords >= -tol) and np.all(coords <= 1.0 + tol):
            return cell, lam
    raise DomainError("point %s lies outside the mesh" % (point,))


def evaluate(c, points):
    """Pointwise values and gradients of a nodal field.

    Returns (values, grads); for scalar spaces values has shape (n_pts,)
    and grads (n_pts, dim), for vector spaces (n_pts, components) and
    (n_pts, components, dim).
    """
    space = c.space
    mesh = space.mesh
    pts = np.asarray(points, dtype=float).reshape(-1, mesh.dim)
    ncomp = space.components
    values = np.zeros((pts.shape[0], ncomp))
    grads = np.zeros((pts.shape[0], ncomp, mesh.dim))
    coeffs = c.values.reshape(space.n_nodes, ncomp)

    for i, p in enumerate(pts):
        cell, lam = _locate_cell(mesh, p)
        vals, ref_grads = reference_basis(mesh.dim, space.degree, lam.reshape(1, -1))
        nodes = space.cell_nodes[cell]
        v = mesh.vertices[mesh.cells[cell]]
        if mesh.dim == 1:
            jinv_t = np.array([[1.0 / (v[1, 0] - v[0, 0])]])
        else:
            J = np.column_stack([v[1] - v[0], v[2] - v[0]])
            jinv_t = np.linalg.inv(J).T
        phys_grads = ref_grads[:, 0, :] @ jinv_t.T  # (n_local, dim)
        values[i] = coeffs[nodes].T @ vals[:, 0]
        grads[i] = coeffs[nodes].T @ phys_grads

    if ncomp == 1:
        return values[:, 0], grads[:, 0, :]
    return values, grads


def interpolate(space, fn):
    """Nodal interpolant of a callable; fn maps (n, dim) -> (n,) or (n, components)."""
    vals = np.asarray(fn(space.node_coords), dtype=float)
    vals = vals.reshape(space.n_nodes, space.components)
    return CoeffVec(space, vals.ravel())


def random_field(space, rng, scale=1.0):
    """Random coefficients in [-scale, scale] on free dofs, zero on Dirichlet dofs."""
    values = rng.uniform(-scale, scale, size=space.n_dofs)
    values[~space.free_mask] = 0.0
    return CoeffVec(space, values)

"""Simplicial meshes of the unit interval and unit square.

Meshes are immutable after construction.  Uniform refinement keeps parent
vertex indices unchanged (nested vertex sets) and records provenance so
nested-space prolongation can be built without geometric searches.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import MeshError

__all__ = [
    "Mesh",
    "build_unit_interval",
    "build_unit_square_tri",
    "refine_uniform",
    "tag_subdomain",
    "cell_measures",
    "unique_edges",
    "write_vtk",
]


@dataclass(eq=False)
class Mesh:
    dim: int
    vertices: np.ndarray          # (n_vertices, dim), coordinates in [0, 1]^dim
    cells: np.ndarray             # (n_cells, dim + 1) vertex indices, CCW in 2D
    boundary_vertices: frozenset  # vertex indices on the boundary of (0,1)^dim
    cell_subdomain: np.ndarray    # (n_cells,) integer tags, 0 = default
    level: int = 0                # refinement generation count
    # Refinement provenance (None on a level-0 mesh):
    vertex_parents: np.ndarray = None  # (n_vertices, 2): (i, i) for inherited vertices
    cell_parent: np.ndarray = None     # (n_cells,) index of parent cell

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    def validate(self):
        """Check the covering and boundary invariants, raise MeshError on failure."""
        measures = cell_measures(self)
        if np.any(measures <= 0.0):
            raise MeshError("mesh contains a cell with non-positive measure")
        if abs(measures.sum() - 1.0) > 1e-12:
            raise MeshError(
                "cells do not cover the unit domain: total measure %.17g" % measures.sum()
            )
        expected = _boundary_vertex_set(self.vertices)
        if expected != self.boundary_vertices:
            raise MeshError("boundary vertex classification is inconsistent")
        if self.cell_subdomain.shape != (self.n_cells,):
            raise MeshError("cell_subdomain must hold exactly one tag per cell")
        return self


def _boundary_vertex_set(vertices):
    # Coordinates on the unit domain are exact floats (0, 1 and dyadic
    # midpoints), so exact comparison is the correct test.
    on_boundary = np.any((vertices == 0.0) | (vertices == 1.0), axis=1)
    return frozenset(np.nonzero(on_boundary)[0].tolist())


def cell_measures(mesh):
    """Lengths of segments (1D) or signed areas of triangles (2D)."""
    v = mesh.vertices[mesh.cells]
    if mesh.dim == 1:
        return (v[:, 1, 0] - v[:, 0, 0]).copy()
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def build_unit_interval(n_cells):
    """Uniform mesh of (0,1) with ``n_cells`` segments."""
    if n_cells < 1:
        raise MeshError("n_cells must be at least 1")
    x = np.linspace(0.0, 1.0, n_cells + 1)
    vertices = x.reshape(-1, 1)
    idx = np.arange(n_cells)
    cells = np.column_stack([idx, idx + 1])
    mesh = Mesh(
        dim=1,
        vertices=vertices,
        cells=cells,
        boundary_vertices=_boundary_vertex_set(vertices),
        cell_subdomain=np.zeros(n_cells, dtype=np.int64),
        level=0,
    )
    return mesh.validate()


def build_unit_square_tri(n_per_side):
    """Structured triangulation of (0,1)^2.

    Each of the n x n grid squares is split along the lower-left to
    upper-right diagonal into two positively oriented triangles.
    """
    if n_per_side < 1:
        raise MeshError("n_per_side must be at least 1")
    n = n_per_side
    coords = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(ix, iy):
        return iy * (n + 1) + ix

    cells = []
    for iy in range(n):
        for ix in range(n):
            v00 = vid(ix, iy)
            v10 = vid(ix + 1, iy)
            v01 = vid(ix, iy + 1)
            v11 = vid(ix + 1, iy + 1)
            cells.append([v00, v10, v11])
            cells.append([v00, v11, v01])
    cells = np.asarray(cells, dtype=np.int64)

    mesh = Mesh(
        dim=2,
        vertices=vertices,
        cells=cells,
        boundary_vertices=_boundary_vertex_set(vertices),
        cell_subdomain=np.zeros(len(cells), dtype=np.int64),
        level=0,
    )
    return mesh.validate()


def unique_edges(cells, dim):
    """Canonical (sorted) unique edges and the cell-to-edge map.

    Edges are lexicographically sorted (min, max) vertex pairs; this fixed
    ordering also defines the numbering of degree-2 edge nodes.  In 2D the
    per-cell edge columns follow the local order (0,1), (1,2), (0,2).
    """
    if dim == 1:
        pairs = np.sort(cells, axis=1)
        local = pairs.reshape(-1, 2)
    else:
        local = cells[:, [[0, 1], [1, 2], [0, 2]]].reshape(-1, 2)
        local = np.sort(local, axis=1)
    edges, inverse = np.unique(local, axis=0, return_inverse=True)
    cell_edges = inverse.reshape(cells.shape[0], -1)
    return edges, cell_edges


def refine_uniform(mesh):
    """Bisect every segment / split every triangle into 4 congruent children.

    Parent vertices keep their indices; edge midpoints are appended in
    sorted-edge order.  Children inherit the parent's subdomain tag.
    """
    edges, cell_edges = unique_edges(mesh.cells, mesh.dim)
    midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    vertices = np.vstack([mesh.vertices, midpoints])
    mid = mesh.n_vertices + cell_edges  # global indices of the new midpoint vertices

    if mesh.dim == 1:
        a, b = mesh.cells[:, 0], mesh.cells[:, 1]
        m = mid[:, 0]
        children = np.stack(
            [np.column_stack([a, m]), np.column_stack([m, b])], axis=1
        ).reshape(-1, 2)
        n_children = 2
    else:
        a, b, c = mesh.cells[:, 0], mesh.cells[:, 1], mesh.cells[:, 2]
        m01, m12, m02 = mid[:, 0], mid[:, 1], mid[:, 2]
        children = np.stack(
            [
                np.column_stack([a, m01, m02]),
                np.column_stack([m01, b, m12]),
                np.column_stack([m02, m12, c]),
                np.column_stack([m01, m12, m02]),
            ],
            axis=1,
        ).reshape(-1, 3)
        n_children = 4

    parents_old = np.column_stack([np.arange(mesh.n_vertices)] * 2)
    vertex_parents = np.vstack([parents_old, edges])
    cell_parent = np.repeat(np.arange(mesh.n_cells), n_children)

    refined = Mesh(
        dim=mesh.dim,
        vertices=vertices,
        cells=children,
        boundary_vertices=_boundary_vertex_set(vertices),
        cell_subdomain=np.repeat(mesh.cell_subdomain, n_children),
        level=mesh.level + 1,
        vertex_parents=vertex_parents,
        cell_parent=cell_parent,
    )
    return refined.validate()


def tag_subdomain(mesh, box):
    """Return a copy of ``mesh`` with tag 1 on cells whose centroid lies in ``box``.

    ``box`` is a sequence of (lo, hi) pairs, one per dimension, contained in
    [0,1]^dim.  Degenerate (zero-volume) boxes are rejected.
    """
    box = np.asarray(box, dtype=float).reshape(mesh.dim, 2)
    if np.any(box[:, 0] >= box[:, 1]):
        raise MeshError("subdomain box must have positive volume")
    if np.any(box[:, 0] < 0.0) or np.any(box[:, 1] > 1.0):
        raise MeshError("subdomain box must lie inside the unit domain")
    centroids = mesh.vertices[mesh.cells].mean(axis=1)
    inside = np.all((centroids >= box[:, 0]) & (centroids <= box[:, 1]), axis=1)
    tags = np.where(inside, 1, 0).astype(np.int64)
    return replace(mesh, cell_subdomain=tags)


def write_vtk(mesh, path):
    """Dump the mesh in legacy VTK ASCII with subdomain tags as cell data."""
    n_pts = mesh.n_vertices
    pts = np.zeros((n_pts, 3))
    pts[:, : mesh.dim] = mesh.vertices
    cell_type = 3 if mesh.dim == 1 else 5  # VTK_LINE / VTK_TRIANGLE
    npc = mesh.cells.shape[1]
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("goalfem mesh level %d\n" % mesh.level)
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write("POINTS %d double\n" % n_pts)
        for p in pts:
            f.write("%.17g %.17g %.17g\n" % (p[0], p[1], p[2]))
        f.write("CELLS %d %d\n" % (mesh.n_cells, mesh.n_cells * (npc + 1)))
        for c in mesh.cells:
            f.write(" ".join([str(npc)] + [str(int(v)) for v in c]) + "\n")
        f.write("CELL_TYPES %d\n" % mesh.n_cells)
        for _ in range(mesh.n_cells):
            f.write("%d\n" % cell_type)
        f.write("CELL_DATA %d\n" % mesh.n_cells)
        f.write("SCALARS subdomain int 1\nLOOKUP_TABLE default\n")
        for t in mesh.cell_subdomain:
            f.write("%d\n" % int(t))

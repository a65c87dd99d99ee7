"""Triangulations of a rectangular film domain and P1/P0 fields on them.

Deformations ``y`` are piecewise linear (one R^3 value per node), directors
``b`` and temperatures are piecewise constant (one value per element).
Fields are plain numpy arrays; :class:`FilmState` bundles the (y, b) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crystallography import LaminateSpec, WellSet

__all__ = [
    "Triangulation",
    "FilmState",
    "structured_mesh",
    "gradient_p1",
    "assemble_F",
    "edge_jump",
    "apply_dirichlet",
    "boundary_matrix",
]


class Triangulation:
    """Conforming triangle mesh with precomputed element and edge data.

    Parameters
    ----------
    nodes : (n, 2) array of reference coordinates.
    triangles : (m, 3) int array of node indices, counterclockwise.

    Derived attributes: ``areas`` (m,), ``barycenters`` (m, 2), ``grads``
    (m, 3, 2) P1 basis gradients per vertex, ``edge_nodes`` (E, 2),
    ``edge_elems`` (E, 2) adjacent elements in ascending index order with
    -1 marking the missing side of a boundary edge, ``edge_lengths`` (E,),
    ``interior_edges`` / ``boundary_edges`` index arrays, ``boundary_nodes``,
    and the mesh size ``h`` (max edge length).  Instances are treated as
    immutable after construction.
    """

    def __init__(self, nodes, triangles):
        self.nodes = np.ascontiguousarray(nodes, float)
        self.triangles = np.ascontiguousarray(triangles, np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise ValueError("nodes must be (n, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be (m, 3)")
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if np.any(signed <= 0.0):
            raise ValueError("all triangles must be positively oriented with area > 0")
        self.areas = signed
        self.barycenters = p.mean(axis=1)

        # P1 basis gradients: rows of the inverse edge matrix give the
        # gradients of the two non-origin barycentric coordinates.
        inv_e = np.linalg.inv(np.stack([e1, e2], axis=-1))
        g12 = inv_e  # (m, 2, 2): row 0 -> grad lambda_1, row 1 -> grad lambda_2
        g0 = -g12[:, 0] - g12[:, 1]
        self.grads = np.stack([g0, g12[:, 0], g12[:, 1]], axis=1)

        edges: dict[tuple[int, int], list[int]] = {}
        order: list[tuple[int, int]] = []
        for k, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                if key not in edges:
                    edges[key] = []
                    order.append(key)
                edges[key].append(k)
        self.edge_nodes = np.array(order, np.int64)
        elems = np.full((len(order), 2), -1, np.int64)
        for row, key in enumerate(order):
            adj = sorted(edges[key])
            if len(adj) > 2:
                raise ValueError(f"edge {key} shared by more than two triangles")
            elems[row, : len(adj)] = adj
        self.edge_elems = elems
        vec = self.nodes[self.edge_nodes[:, 1]] - self.nodes[self.edge_nodes[:, 0]]
        self.edge_lengths = np.linalg.norm(vec, axis=1)
        self.interior_edges = np.flatnonzero(elems[:, 1] >= 0)
        self.boundary_edges = np.flatnonzero(elems[:, 1] < 0)
        self.boundary_nodes = np.unique(self.edge_nodes[self.boundary_edges])
        self.h = float(self.edge_lengths.max())

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.triangles.shape[0]

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    def midpoint_rule(self):
        """Edge-midpoint quadrature, exact for polynomials of degree 2.

        Returns ``(points, weights)``: points (m, 3, 2), weights (m, 3).
        """
        p = self.nodes[self.triangles]
        points = 0.5 * (p + np.roll(p, -1, axis=1))
        weights = np.repeat(self.areas[:, None] / 3.0, 3, axis=1)
        return points, weights


@dataclass
class FilmState:
    """P1 nodal deformation ``y`` (n, 3) with P0 director ``b`` (m, 3)."""

    y: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, float)
        self.b = np.asarray(self.b, float)
        if self.y.ndim != 2 or self.y.shape[1] != 3:
            raise ValueError("y must be (n_nodes, 3)")
        if self.b.ndim != 2 or self.b.shape[1] != 3:
            raise ValueError("b must be (n_elements, 3)")

    def check_mesh(self, mesh: Triangulation):
        if self.y.shape[0] != mesh.n_nodes or self.b.shape[0] != mesh.n_elements:
            raise ValueError("state does not match mesh")

    def copy(self) -> "FilmState":
        return FilmState(self.y.copy(), self.b.copy())


def structured_mesh(nx: int, ny: int, domain=(0.0, 1.0, 0.0, 1.0)) -> Triangulation:
    """Structured mesh of 2*nx*ny right triangles on a rectangle.

    Each grid cell is split along its lower-left to upper-right diagonal;
    node and element ordering is deterministic (row-major, lower triangle
    first).
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    x0, x1, y0, y1 = map(float, domain)
    if x1 <= x0 or y1 <= y0:
        raise ValueError("domain must be a nondegenerate rectangle")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    tris = []
    for iy in range(ny):
        for ix in range(nx):
            v00 = iy * (nx + 1) + ix
            v10 = v00 + 1
            v01 = v00 + (nx + 1)
            v11 = v01 + 1
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return Triangulation(nodes, np.array(tris))


def gradient_p1(mesh: Triangulation, y, k: int | None = None):
    """Per-element gradient of the P1 interpolant (exact for affine fields).

    With ``k=None`` returns the (m, 3, 2) stack for all elements, else the
    (3, 2) gradient on element ``k``.
    """
    y = np.asarray(y, float)
    if k is not None:
        tri = mesh.triangles[k]
        return np.einsum("vc,vd->cd", y[tri], mesh.grads[k])
    return np.einsum("kvc,kvd->kcd", y[mesh.triangles], mesh.grads)


def assemble_F(mesh: Triangulation, y, b, k: int | None = None):
    """Deformation matrix ``(grad y | b)`` per element: 3x3 with b as last column."""
    g = gradient_p1(mesh, y, k)
    b = np.asarray(b, float)
    if k is not None:
        return np.concatenate([g, b[k][:, None]], axis=1)
    return np.concatenate([g, b[:, :, None]], axis=2)


def edge_jump(mesh: Triangulation, values, e: int):
    """Jump ``value[K1] - value[K2]`` across interior edge ``e``.

    The K1/K2 order is the edge's stored ascending element order, so the
    sign is deterministic; boundary edges are rejected.
    """
    k1, k2 = mesh.edge_elems[e]
    if k2 < 0:
        raise ValueError(f"edge {e} is a boundary edge")
    values = np.asarray(values)
    return values[k1] - values[k2]


def boundary_matrix(data, wells: WellSet | None = None) -> np.ndarray:
    """Resolve Dirichlet data to the 3x3 affine matrix A of y0(x) = A (x1, x2, 0)."""
    if isinstance(data, LaminateSpec):
        if wells is None:
            raise ValueError("laminate Dirichlet data needs the well set")
        return data.average_gradient(wells)
    a = np.asarray(data, float)
    if a.shape != (3, 3):
        raise ValueError("affine Dirichlet data must be a 3x3 matrix")
    return a


def apply_dirichlet(mesh: Triangulation, y, data, wells: WellSet | None = None):
    """Impose the affine boundary values on all boundary nodes.

    ``data`` is a LaminateSpec (then ``wells`` is required) or a 3x3
    matrix.  Returns ``(y_new, boundary_nodes)``; interior values are left
    untouched and the index array identifies the constrained nodes for the
    minimizer.
    """
    a = boundary_matrix(data, wells)
    y = np.asarray(y, float).copy()
    bn = mesh.boundary_nodes
    y[bn] = mesh.nodes[bn] @ a[:, :2].T
    return y, bn

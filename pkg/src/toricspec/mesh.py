"""Graded interval partitions and conforming triangle meshes with interior quadrature.

The reduced operators carry coefficients that blow up like 1/ell toward the
facets, so quadrature points must stay strictly interior and cells shrink
toward the boundary: geometric end layers in 1d, one conforming red-green
refinement pass along the boundary in 2d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import atan2, ceil, log2

import numpy as np

from .errors import DimensionUnsupported

# 3-point Gauss on [0, 1]
_GAUSS1D_X = np.array([0.5 - np.sqrt(3.0 / 5.0) / 2.0, 0.5, 0.5 + np.sqrt(3.0 / 5.0) / 2.0])
_GAUSS1D_W = np.array([5.0, 8.0, 5.0]) / 18.0

# 6-point degree-4 rule on the reference triangle, barycentric rows
_A1 = 0.445948490915965
_A2 = 0.091576213509771
_TRI_BARY = np.array(
    [
        [1 - 2 * _A1, _A1, _A1],
        [_A1, 1 - 2 * _A1, _A1],
        [_A1, _A1, 1 - 2 * _A1],
        [1 - 2 * _A2, _A2, _A2],
        [_A2, 1 - 2 * _A2, _A2],
        [_A2, _A2, 1 - 2 * _A2],
    ]
)
_TRI_W = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)


@dataclass
class Mesh:
    """Conforming simplicial mesh of a convex region of R^n, n in {1, 2}."""

    dim: int
    nodes: np.ndarray        # (N, dim)
    cells: np.ndarray        # (M, dim + 1) node indices
    grading: float           # geometric ratio used toward the boundary
    qpoints: np.ndarray = field(default=None, repr=False)   # (M, Q, dim)
    qweights: np.ndarray = field(default=None, repr=False)  # (M, Q)

    def __post_init__(self):
        if self.qpoints is None:
            self.qpoints, self.qweights = _quadrature(self.dim, self.nodes, self.cells)

    @property
    def num_nodes(self):
        return self.nodes.shape[0]

    @property
    def num_cells(self):
        return self.cells.shape[0]

    def max_diameter(self):
        coords = self.nodes[self.cells]
        if self.dim == 1:
            return float(np.abs(coords[:, 1, 0] - coords[:, 0, 0]).max())
        d01 = np.linalg.norm(coords[:, 0] - coords[:, 1], axis=1)
        d12 = np.linalg.norm(coords[:, 1] - coords[:, 2], axis=1)
        d20 = np.linalg.norm(coords[:, 2] - coords[:, 0], axis=1)
        return float(np.maximum(d01, np.maximum(d12, d20)).max())

    def shape_regularity(self):
        """max over cells of longest edge / (2 inradius); 1d meshes return 1."""
        if self.dim == 1:
            return 1.0
        coords = self.nodes[self.cells]
        a = np.linalg.norm(coords[:, 1] - coords[:, 2], axis=1)
        b = np.linalg.norm(coords[:, 2] - coords[:, 0], axis=1)
        c = np.linalg.norm(coords[:, 0] - coords[:, 1], axis=1)
        s = 0.5 * (a + b + c)
        area = np.sqrt(np.maximum(s * (s - a) * (s - b) * (s - c), 0.0))
        inradius = area / s
        longest = np.maximum(a, np.maximum(b, c))
        return float((longest / (2.0 * inradius)).max())


def _quadrature(dim, nodes, cells):
    coords = nodes[cells]
    if dim == 1:
        x0 = coords[:, 0, 0]
        x1 = coords[:, 1, 0]
        length = x1 - x0
        qp = x0[:, None] + np.outer(length, _GAUSS1D_X)
        qw = np.outer(length, _GAUSS1D_W)
        return qp[..., None], qw
    if dim == 2:
        qp = np.einsum("qi,cid->cqd", _TRI_BARY, coords)
        v0, v1, v2 = coords[:, 0], coords[:, 1], coords[:, 2]
        area = 0.5 * np.abs(
            (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
            - (v2[:, 0] - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
        )
        qw = np.outer(area, _TRI_W)
        return qp, qw
    raise DimensionUnsupported("quadrature only for n <= 2")


# ---------------------------------------------------------------------------
# 1d graded partitions
# ---------------------------------------------------------------------------

def interval_mesh(a, b, target_h, grading_ratio=0.7, grading_depth=12):
    """Uniform core with geometric layers stacked toward both endpoints.

    With ratio 1 this is the plain uniform partition.  Otherwise the first and
    last core cell are replaced by ``grading_depth`` sub-cells whose widths
    decrease geometrically toward the endpoint.
    """
    a, b = float(a), float(b)
    n_core = max(int(ceil((b - a) / target_h)), 2)
    core = np.linspace(a, b, n_core + 1)
    if grading_ratio >= 1.0 or grading_depth <= 0:
        nodes = core
    else:
        q = grading_ratio
        widths = q ** np.arange(1, grading_depth + 1)
        frac = np.cumsum(widths[::-1]) / widths.sum()
        left = core[0] + (core[1] - core[0]) * frac[:-1]
        right = core[-1] - (core[-1] - core[-2]) * frac[:-1]
        nodes = np.unique(np.concatenate([core, left, right[::-1]]))
    cells = np.stack([np.arange(len(nodes) - 1), np.arange(1, len(nodes))], axis=1)
    return Mesh(dim=1, nodes=nodes[:, None], cells=cells, grading=grading_ratio)


# ---------------------------------------------------------------------------
# 2d polygon meshes
# ---------------------------------------------------------------------------

def order_polygon(vertices):
    """Vertices of a convex polygon in counterclockwise order."""
    pts = np.asarray(vertices, dtype=float)
    center = pts.mean(axis=0)
    angles = np.array([atan2(p[1] - center[1], p[0] - center[0]) for p in pts])
    return pts[np.argsort(angles)]


def _fan(vertices):
    pts = order_polygon(vertices)
    center = pts.mean(axis=0)
    nodes = [center] + [p for p in pts]
    cells = []
    k = len(pts)
    for i in range(k):
        cells.append([0, 1 + i, 1 + (i + 1) % k])
    return np.array(nodes), np.array(cells, dtype=int)


def _cell_edges(cells):
    """Unique sorted edges and the (M, 3) map cell -> edge ids (ij, jk, ki)."""
    e = np.concatenate([cells[:, [0, 1]], cells[:, [1, 2]], cells[:, [2, 0]]])
    e = np.sort(e, axis=1)
    edges, inverse = np.unique(e, axis=0, return_inverse=True)
    M = len(cells)
    return edges, inverse.reshape(3, M).T


def _refine_once(nodes, cells):
    edges, cell_edges = _cell_edges(cells)
    mids = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])
    mid_id = len(nodes) + np.arange(len(edges))
    nodes = np.vstack([nodes, mids])
    i, j, k = cells[:, 0], cells[:, 1], cells[:, 2]
    ij = mid_id[cell_edges[:, 0]]
    jk = mid_id[cell_edges[:, 1]]
    ki = mid_id[cell_edges[:, 2]]
    new_cells = np.concatenate(
        [
            np.stack([i, ij, ki], axis=1),
            np.stack([ij, j, jk], axis=1),
            np.stack([ki, jk, k], axis=1),
            np.stack([ij, jk, ki], axis=1),
        ]
    )
    return nodes, new_cells


def _boundary_mask(nodes, edges_normals, edges_offsets, tol):
    """For each node, the boolean row of polygon edges it lies on."""
    vals = nodes @ edges_normals.T - edges_offsets
    return np.abs(vals) <= tol


def _red_green_boundary(nodes, cells, on_edge):
    """One conforming local refinement pass of boundary-touching triangles.

    Boundary cells split red (into four); cells inheriting two or more hanging
    edges are promoted to red until stable; a single hanging edge is fixed by
    a green bisection through the opposite vertex.
    """
    edges, cell_edges = _cell_edges(cells)
    boundary_edge = np.any(on_edge[edges[:, 0]] & on_edge[edges[:, 1]], axis=1)
    red = np.any(boundary_edge[cell_edges], axis=1)
    marked = np.zeros(len(edges), dtype=bool)
    marked[cell_edges[red].ravel()] = True
    while True:
        count = marked[cell_edges].sum(axis=1)
        promote = (~red) & (count >= 2)
        if not promote.any():
            break
        red |= promote
        marked[cell_edges[promote].ravel()] = True

    mid_id = np.full(len(edges), -1, dtype=int)
    which = np.nonzero(marked)[0]
    mid_id[which] = len(nodes) + np.arange(len(which))
    nodes = np.vstack([nodes, 0.5 * (nodes[edges[which, 0]] + nodes[edges[which, 1]])])

    i, j, k = cells[:, 0], cells[:, 1], cells[:, 2]
    ij, jk, ki = (mid_id[cell_edges[:, t]] for t in range(3))
    out = []
    r = red
    out.append(np.stack([i[r], ij[r], ki[r]], axis=1))
    out.append(np.stack([ij[r], j[r], jk[r]], axis=1))
    out.append(np.stack([ki[r], jk[r], k[r]], axis=1))
    out.append(np.stack([ij[r], jk[r], ki[r]], axis=1))

    count = marked[cell_edges].sum(axis=1)
    green = (~red) & (count == 1)
    plain = (~red) & (count == 0)
    out.append(cells[plain])
    if green.any():
        gcells = cells[green]
        gedges = cell_edges[green]
        gmark = marked[gedges]
        which_edge = np.argmax(gmark, axis=1)         # 0: (i,j), 1: (j,k), 2: (k,i)
        opp = np.choose(which_edge, [gcells[:, 2], gcells[:, 0], gcells[:, 1]])
        a = np.choose(which_edge, [gcells[:, 0], gcells[:, 1], gcells[:, 2]])
        b = np.choose(which_edge, [gcells[:, 1], gcells[:, 2], gcells[:, 0]])
        mid = mid_id[np.take_along_axis(gedges, which_edge[:, None], axis=1)[:, 0]]
        out.append(np.stack([opp, a, mid], axis=1))
        out.append(np.stack([opp, mid, b], axis=1))
    return nodes, np.concatenate(out)


def polygon_mesh(vertices, target_h, grading_ratio=0.7, boundary_layer=True):
    """Fan triangulation of a convex polygon, refined to target_h.

    Uniform quadrisection until the longest edge is below target_h, then one
    conforming red-green pass along the polygon boundary when requested.
    """
    pts = order_polygon(vertices)
    nodes, cells = _fan(pts)
    edges = np.roll(pts, -1, axis=0) - pts
    normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.einsum("ij,ij->i", normals, pts)

    max_edge = 0.0
    for (i, j, k) in cells:
        for a, b in ((i, j), (j, k), (k, i)):
            max_edge = max(max_edge, float(np.linalg.norm(nodes[a] - nodes[b])))
    levels = max(0, int(ceil(log2(max_edge / target_h)))) if max_edge > target_h else 0
    for _ in range(levels):
        nodes, cells = _refine_once(nodes, cells)
    if boundary_layer and grading_ratio < 1.0:
        scale = float(np.abs(pts).max())
        on_edge = _boundary_mask(nodes, normals, offsets, tol=1e-9 * max(scale, 1.0))
        nodes, cells = _red_green_boundary(nodes, cells, on_edge)
    # enforce positive orientation
    v = nodes[cells]
    det = (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1]) - (
        v[:, 2, 0] - v[:, 0, 0]
    ) * (v[:, 1, 1] - v[:, 0, 1])
    flip = det < 0
    cells[flip] = cells[flip][:, [0, 2, 1]]
    return Mesh(dim=2, nodes=nodes, cells=cells, grading=grading_ratio)


def build_mesh(P, target_h, grading_ratio=0.7):
    """Mesh of a Delzant polytope: graded partition (n=1) or triangles (n=2)."""
    if P.dim == 1:
        lo, hi = P.bounding_box()
        return interval_mesh(float(lo[0]), float(hi[0]), target_h, grading_ratio)
    if P.dim == 2:
        verts = [[float(c) for c in v] for v in P.vertices]
        return polygon_mesh(verts, target_h, grading_ratio, boundary_layer=True)
    raise DimensionUnsupported("meshes are built for n <= 2 only")


def check_mesh(mesh: Mesh, P=None, shape_limit=10.0):
    """Raise AssertionError if the mesh violates its contract."""
    assert mesh.shape_regularity() <= shape_limit, "shape regularity exceeded"
    if P is not None:
        normals = P.normals_array()
        offsets = P.offsets_array()
        node_vals = mesh.nodes @ normals.T - offsets
        assert node_vals.min() > -1e-9, "node outside the closed polytope"
        q = mesh.qpoints.reshape(-1, mesh.dim)
        q_vals = q @ normals.T - offsets
        assert q_vals.min() > 0.0, "quadrature point not strictly interior"
    # conforming: every edge shared by at most two cells, consistent node ids
    if mesh.dim == 2:
        from collections import Counter
        count = Counter()
        for (i, j, k) in mesh.cells:
            for e in ((i, j), (j, k), (k, i)):
                count[(min(e), max(e))] += 1
        assert max(count.values()) <= 2, "non-conforming edge"

"""Torus-reduced Laplacian family, one Schrodinger operator per lattice mode.

For each mode m in Z^n the operator on L^2(P, dx) is

    L_{s,k,m} f = -div(G_s^-1 grad f) + [ (m - k x) . G_s (m - k x) + k^2 ] f

with the natural boundary condition selected by its quadratic form.  P1 finite
elements with strictly interior Gauss quadrature discretize it; eigenvalues
map to the holomorphic-sector spectrum through lambda -> (lambda - k^2 - nk)/2.
The exact bound state exp((m - kx) . grad u_s + k u_s) with eigenvalue
k^2 + nk anchors the discretization, and the count of modes with vanishing
bottom eigenvalue must reproduce the lattice point count of k P.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg

from .errors import (
    CholeskyFailure,
    CoefficientOverflow,
    ConvergenceFailure,
    NegativeEigenvalue,
    NotPositiveDefiniteMass,
)
from .mesh import _GAUSS1D_X, _TRI_BARY, Mesh, build_mesh  # noqa: F401 (build_mesh re-export)
from .potential import PotentialFamily, PotentialSpec, family_hessian_batch

DENSE_CUTOFF = 3000
V_OVERFLOW = 1e14
RESIDUAL_TOL = 1e-8


@dataclass
class ReducedOperator:
    """Assembled stiffness/mass pair of one (s, k, m) reduced operator."""

    spec: PotentialSpec
    s: float
    k: int
    mode: tuple
    K: sparse.csr_matrix
    M: sparse.csr_matrix
    n_dofs: int
    mesh: Mesh
    h: float


@dataclass
class Spectrum:
    """Ascending generalized eigenvalues with residuals and nodal vectors."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    vectors: np.ndarray      # (n_dofs, count), M-orthonormal


def reduced_coefficients(spec: PotentialSpec, s, k, m, x):
    """Diffusion matrix G_s^-1(x) and potential V(x) of the mode-m operator."""
    x = np.asarray(x, dtype=float)
    fam = PotentialFamily.of_spec(spec, s)
    G = fam.hessian(x)
    Ginv = np.linalg.inv(G)
    w = np.asarray(m, dtype=float) - k * x
    V = float(np.einsum("i,ij,j->", w, G, w)) + k * k
    return Ginv, V


def mode_set(P, k, margin=0):
    """Integer vectors of k P inflated by ``margin`` lattice units per facet.

    The inflated region is {m : nu_r . m >= k lambda_r - margin}; the modes
    with m/k in P are exactly the quantized ones, the rest probe divergence.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    from .polytope import _enumerate_vertices

    inflated = _enumerate_vertices(
        P.dim, P.normals, [k * lam - margin for lam in P.offsets]
    )
    ranges = []
    for i in range(P.dim):
        a = int(np.ceil(min(float(v[i]) for v in inflated)))
        b = int(np.floor(max(float(v[i]) for v in inflated)))
        ranges.append(range(a, b + 1))
    out = []
    for m in product(*ranges):
        ok = all(
            sum(nu_i * m_i for nu_i, m_i in zip(nu, m)) >= k * lam - margin
            for nu, lam in zip(P.normals, P.offsets)
        )
        if ok:
            out.append(tuple(m))
    return out


def p1_geometry(mesh: Mesh):
    """Constant P1 gradients, barycentric values at quadrature, scatter indices."""
    n = mesh.dim
    cells = mesh.cells
    coords = mesh.nodes[cells]
    nb = n + 1
    if n == 1:
        length = coords[:, 1, 0] - coords[:, 0, 0]
        grads = np.stack([-1.0 / length, 1.0 / length], axis=1)[:, :, None]
        bary = np.stack([1.0 - _GAUSS1D_X, _GAUSS1D_X], axis=1)  # (Q, nb)
    elif n == 2:
        v0, v1, v2 = coords[:, 0], coords[:, 1], coords[:, 2]
        area2 = (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (
            v2[:, 0] - v0[:, 0]
        ) * (v1[:, 1] - v0[:, 1])
        g0 = np.stack([v1[:, 1] - v2[:, 1], v2[:, 0] - v1[:, 0]], axis=1)
        g1 = np.stack([v2[:, 1] - v0[:, 1], v0[:, 0] - v2[:, 0]], axis=1)
        g2 = np.stack([v0[:, 1] - v1[:, 1], v1[:, 0] - v0[:, 0]], axis=1)
        grads = np.stack([g0, g1, g2], axis=1) / area2[:, None, None]
        bary = _TRI_BARY
    else:
        raise ValueError("P1 geometry only for n <= 2")
    rows = np.repeat(cells, nb, axis=1).reshape(-1)
    cols = np.tile(cells, (1, nb)).reshape(-1)
    return grads, bary, rows, cols


def _scatter_csr(local, rows, cols, shape):
    A = sparse.coo_matrix((local.reshape(-1), (rows, cols)), shape=shape).tocsr()
    return (A + A.T) * 0.5


def assemble_p1(mesh: Mesh, diffusion_q=None, potential_q=None, mass_weight_q=None):
    """Generic P1 pair: K = int w_D grad.D.grad + V phi phi, M = int w phi phi.

    diffusion_q is a scalar field (M, Q) acting as w * identity or a matrix
    field (M, Q, n, n); potential_q and mass_weight_q are scalar fields.
    """
    grads, bary, rows, cols = p1_geometry(mesh)
    qw = mesh.qweights
    shape = (mesh.num_nodes, mesh.num_nodes)
    K_local = 0.0
    if diffusion_q is not None:
        if diffusion_q.ndim == 2:
            K_local = np.einsum("cq,cq,cia,cja->cij", qw, diffusion_q, grads, grads)
        else:
            K_local = np.einsum("cq,cia,cqab,cjb->cij", qw, diffusion_q, grads, grads)
    if potential_q is not None:
        K_local = K_local + np.einsum("cq,qi,qj->cij", qw * potential_q, bary, bary)
    w_mass = qw if mass_weight_q is None else qw * mass_weight_q
    M_local = np.einsum("cq,qi,qj->cij", w_mass, bary, bary)
    K = _scatter_csr(np.asarray(K_local), rows, cols, shape)
    M = _scatter_csr(M_local, rows, cols, shape)
    return K, M


class OperatorFactory:
    """Shares mesh geometry and G_s quadrature data across modes of one (s, k)."""

    def __init__(self, spec: PotentialSpec, s, k, mesh: Mesh):
        self.spec = spec
        self.s = float(s)
        self.k = int(k)
        self.mesh = mesh
        n = mesh.dim
        qp = mesh.qpoints
        qw = mesh.qweights
        M_cells, Q = qw.shape
        grads, bary, rows, cols = p1_geometry(mesh)

        flat_q = qp.reshape(-1, n)
        G_q, Ginv_q = family_hessian_batch(spec, s, flat_q)
        self._G_q = G_q.reshape(M_cells, Q, n, n)
        Ginv_q = Ginv_q.reshape(M_cells, Q, n, n)
        self._qp = qp
        self._qw = qw
        self._bary = bary

        # mode-independent pieces
        self._K_diff_local = np.einsum("cq,cia,cqab,cjb->cij", qw, grads, Ginv_q, grads)
        self._E = np.einsum("cq,qi,qj->cqij", qw, bary, bary)   # (M, Q, nb, nb)
        self._M_local = self._E.sum(axis=1)
        self._rows, self._cols = rows, cols
        N = mesh.num_nodes
        self._shape = (N, N)
        self.M_mat = self._to_csr(self._M_local)
        if np.any(self.M_mat.diagonal() <= 0.0):
            raise NotPositiveDefiniteMass("mass matrix has a nonpositive diagonal")
        self.K_diff = self._to_csr(self._K_diff_local)
        self.h = mesh.max_diameter()

    def _to_csr(self, local):
        return _scatter_csr(local, self._rows, self._cols, self._shape)

    def potential_values(self, mode):
        w = np.asarray(mode, dtype=float)[None, None, :] - self.k * self._qp
        V = np.einsum("cqi,cqij,cqj->cq", w, self._G_q, w) + float(self.k**2)
        return V

    def operator(self, mode):
        V = self.potential_values(mode)
        if np.max(V) > V_OVERFLOW:
            raise CoefficientOverflow(
                f"potential reaches {np.max(V):.3e} at a quadrature point"
            )
        K_pot_local = np.einsum("cq,cqij->cij", V, self._E)
        K = self.K_diff + self._to_csr(K_pot_local)
        return ReducedOperator(
            spec=self.spec,
            s=self.s,
            k=self.k,
            mode=tuple(int(v) for v in mode),
            K=K,
            M=self.M_mat,
            n_dofs=self._shape[0],
            mesh=self.mesh,
            h=self.h,
        )

    def quadrature_l2(self, nodal, region_mask=None):
        """Integral of the squared P1 interpolant, optionally over masked points."""
        vals = np.einsum("qi,ci->cq", self._bary, nodal[self.mesh.cells])
        w = self._qw if region_mask is None else self._qw * region_mask
        return float(np.sum(w * vals * vals))

    def qpoints(self):
        return self._qp


def assemble(spec: PotentialSpec, s, k, mode, mesh: Mesh):
    """ReducedOperator for one mode; use OperatorFactory for mode sweeps."""
    return OperatorFactory(spec, s, k, mesh).operator(mode)


def rayleigh_quotient(op: ReducedOperator, nodal):
    """q(v)/||v||^2 for a nodal coefficient vector."""
    num = float(nodal @ (op.K @ nodal))
    den = float(nodal @ (op.M @ nodal))
    return num / den


def rayleigh_direct(spec: PotentialSpec, s, k, mode, mesh: Mesh, nodal, chunk=200000):
    """Rayleigh quotient of a nodal interpolant without assembling matrices.

    Streams over cell blocks, so it handles the finest convergence-study
    meshes in bounded memory.
    """
    grads, bary, _, _ = p1_geometry(mesh)
    mode = np.asarray(mode, dtype=float)
    num = 0.0
    den = 0.0
    M_cells = mesh.num_cells
    for start in range(0, M_cells, chunk):
        sl = slice(start, min(start + chunk, M_cells))
        cells = mesh.cells[sl]
        v = nodal[cells]                                # (m, nb)
        qp = mesh.qpoints[sl]
        qw = mesh.qweights[sl]
        flat = qp.reshape(-1, mesh.dim)
        G, Ginv = family_hessian_batch(spec, s, flat)
        G = G.reshape(qw.shape + (mesh.dim, mesh.dim))
        Ginv = Ginv.reshape(G.shape)
        grad_v = np.einsum("ci,cia->ca", v, grads[sl])  # constant per cell
        diff = np.einsum("ca,cqab,cb->cq", grad_v, Ginv, grad_v)
        w = mode[None, None, :] - k * qp
        V = np.einsum("cqi,cqij,cqj->cq", w, G, w) + float(k) ** 2
        vals = np.einsum("qi,ci->cq", bary, v)
        num += float(np.sum(qw * (diff + V * vals * vals)))
        den += float(np.sum(qw * vals * vals))
    return num / den


def ground_state_rayleigh(spec: PotentialSpec, s, k, mode, mesh: Mesh):
    """Rayleigh quotient of the interpolated exact bound state; tends to k^2 + nk."""
    from .potential import ground_state

    nodal = ground_state(spec, s, k, mode)(mesh.nodes)
    return rayleigh_direct(spec, s, k, mode, mesh, nodal)


def ground_state_rayleigh_batch(spec: PotentialSpec, s, k, modes, mesh: Mesh, chunk=200000):
    """Bound-state Rayleigh quotients for many modes, sharing the G_s sweep."""
    from .potential import ground_state

    grads, bary, _, _ = p1_geometry(mesh)
    nodal = {m: ground_state(spec, s, k, m)(mesh.nodes) for m in modes}
    num = {m: 0.0 for m in modes}
    den = {m: 0.0 for m in modes}
    M_cells = mesh.num_cells
    for start in range(0, M_cells, chunk):
        sl = slice(start, min(start + chunk, M_cells))
        cells = mesh.cells[sl]
        qp = mesh.qpoints[sl]
        qw = mesh.qweights[sl]
        G, Ginv = family_hessian_batch(spec, s, qp.reshape(-1, mesh.dim))
        G = G.reshape(qw.shape + (mesh.dim, mesh.dim))
        Ginv = Ginv.reshape(G.shape)
        for m in modes:
            v = nodal[m][cells]
            grad_v = np.einsum("ci,cia->ca", v, grads[sl])
            diff = np.einsum("ca,cqab,cb->cq", grad_v, Ginv, grad_v)
            w = np.asarray(m, dtype=float)[None, None, :] - k * qp
            V = np.einsum("cqi,cqij,cqj->cq", w, G, w) + float(k) ** 2
            vals = np.einsum("qi,ci->cq", bary, v)
            num[m] += float(np.sum(qw * (diff + V * vals * vals)))
            den[m] += float(np.sum(qw * vals * vals))
    return {m: num[m] / den[m] for m in modes}


def solve_pencil(K, M, count, sigma):
    """Lowest ``count`` pairs of K v = lambda M v, residuals checked.

    Dense symmetric reduction below DENSE_CUTOFF dofs, ARPACK shift-invert
    above it with the given shift (which must sit below the lowest eigenvalue).
    """
    N = K.shape[0]
    if count > N:
        raise ValueError("count exceeds the number of dofs")
    if N <= DENSE_CUTOFF:
        try:
            vals, vecs = scipy.linalg.eigh(
                K.toarray(), M.toarray(), subset_by_index=(0, count - 1)
            )
        except scipy.linalg.LinAlgError as exc:
            raise CholeskyFailure(str(exc)) from exc
    else:
        try:
            vals, vecs = splinalg.eigsh(K, k=count, M=M, sigma=sigma, which="LM")
        except splinalg.ArpackNoConvergence as exc:
            raise ConvergenceFailure(str(exc)) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    residuals = np.empty(count)
    for i in range(count):
        v = vecs[:, i]
        r = K @ v - vals[i] * (M @ v)
        residuals[i] = np.linalg.norm(r) / np.linalg.norm(M @ v)
    if np.any(residuals > RESIDUAL_TOL * np.maximum(1.0, np.abs(vals))):
        raise ConvergenceFailure(
            f"residuals {residuals} exceed {RESIDUAL_TOL} x max(1, |lambda|)"
        )
    return Spectrum(eigenvalues=vals, residuals=residuals, vectors=vecs)


def solve_eigs(op: ReducedOperator, count, sigma=None):
    """Lowest ``count`` eigenpairs of a reduced operator."""
    if sigma is None:
        sigma = op.k**2 - 1.0
    return solve_pencil(op.K, op.M, count, sigma)


def dbar_spectrum(spec: PotentialSpec, s, k, mode, mesh: Mesh, count, factory=None):
    """Holomorphic-sector eigenvalues (lambda - k^2 - nk)/2 of one mode."""
    fac = factory if factory is not None else OperatorFactory(spec, s, k, mesh)
    op = fac.operator(mode)
    spec_out = solve_eigs(op, count)
    return map_dbar(spec_out, k, spec.polytope.dim), op, spec_out


def map_dbar(spectrum: Spectrum, k, n):
    shifted = (spectrum.eigenvalues - k * k - k * n) / 2.0
    if np.any(shifted < -1e-6):
        raise NegativeEigenvalue(
            f"holomorphic-sector eigenvalue {shifted.min():.3e} below -1e-6"
        )
    return np.maximum(shifted, 0.0)


def spectrum_record(spec: PotentialSpec, s, k, mode, mesh, dbar_vals, spectrum: Spectrum):
    """JSON-ready record of one mode solve."""
    return {
        "s": float(s),
        "k": int(k),
        "mode": [int(v) for v in mode],
        "dbar_eigenvalues": [float(v) for v in dbar_vals],
        "residuals": [float(r) for r in spectrum.residuals],
        "dofs": int(mesh.num_nodes),
        "h": float(mesh.max_diameter()),
    }

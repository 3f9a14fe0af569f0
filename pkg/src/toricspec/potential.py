"""Symplectic-potential family u_s = v_P + phi + psi/s and its derivative tensors.

The boundary part v_P(x) = sum_r ell_r(x) log ell_r(x) has closed-form
derivatives of every order; phi and psi are polynomials, so the whole family
is evaluated exactly up to floating point.  Curvature formulas downstream need
fourth derivatives, so tensors are provided through that order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .errors import (
    BoundaryPoint,
    ChartMismatch,
    ModeOutsidePolytope,
    NotPositiveDefinite,
)
from .polytope import DelzantPolytope, LocalChart, vertices_and_faces

INTERIOR_TOL = 1e-14
PD_RATIO_TOL = 1e-10


# ---------------------------------------------------------------------------
# polynomials with explicit coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolynomialFn:
    """Polynomial sum_t c_t * x^alpha_t given by (multi-index, coefficient) terms."""

    dim: int
    terms: tuple    # tuple of (alpha tuple, float coefficient)

    @staticmethod
    def zero(dim):
        return PolynomialFn(dim=dim, terms=())

    @staticmethod
    def half_norm_sq(dim):
        """Default curvature regulator psi = ||x||^2 / 2."""
        terms = []
        for i in range(dim):
            alpha = tuple(2 if j == i else 0 for j in range(dim))
            terms.append((alpha, 0.5))
        return PolynomialFn(dim=dim, terms=tuple(terms))

    @staticmethod
    def quadratic_form(A):
        """psi = x^T A x / 2 for a symmetric matrix A."""
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        terms = []
        for i in range(n):
            for j in range(i, n):
                coeff = A[i, i] / 2.0 if i == j else A[i, j]
                if coeff != 0.0:
                    alpha = [0] * n
                    alpha[i] += 1
                    alpha[j] += 1
                    terms.append((tuple(alpha), coeff))
        return PolynomialFn(dim=n, terms=tuple(terms))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for alpha, c in self.terms:
            mono = np.ones(x.shape[:-1])
            for i, a in enumerate(alpha):
                if a:
                    mono = mono * x[..., i] ** a
            out = out + c * mono
        return out

    def derivative(self, i):
        new_terms = []
        for alpha, c in self.terms:
            if alpha[i] == 0:
                continue
            new_alpha = list(alpha)
            new_alpha[i] -= 1
            new_terms.append((tuple(new_alpha), c * alpha[i]))
        return PolynomialFn(dim=self.dim, terms=tuple(new_terms))

    def gradient(self, x):
        return np.stack([self.derivative(i)(x) for i in range(self.dim)], axis=-1)

    def hessian(self, x):
        n = self.dim
        x = np.asarray(x, dtype=float)
        H = np.zeros(x.shape[:-1] + (n, n))
        for i in range(n):
            di = self.derivative(i)
            for j in range(i, n):
                val = di.derivative(j)(x)
                H[..., i, j] = val
                H[..., j, i] = val
        return H

    def tensor(self, x, order):
        """Symmetric derivative tensor of the given order at x."""
        n = self.dim
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (n,) * order)
        for idx in combinations_with_replacement(range(n), order):
            p = self
            for i in idx:
                p = p.derivative(i)
            val = p(x)
            for perm in set(_permutations(idx)):
                out[(...,) + perm] = val
        return out

    def affine_pullback(self, B, d):
        """Polynomial q(y) = p(B y + d), expanded in y."""
        B = [[float(v) for v in row] for row in B]
        d = [float(v) for v in d]
        n = self.dim
        acc = {}
        for alpha, c in self.terms:
            poly = {tuple([0] * n): c}
            for i, a in enumerate(alpha):
                lin = {tuple([0] * n): d[i]}
                for j in range(n):
                    if B[i][j] != 0.0:
                        key = tuple(1 if t == j else 0 for t in range(n))
                        lin[key] = lin.get(key, 0.0) + B[i][j]
                for _ in range(a):
                    poly = _poly_mul(poly, lin)
            for key, val in poly.items():
                acc[key] = acc.get(key, 0.0) + val
        terms = tuple((k, v) for k, v in sorted(acc.items()) if v != 0.0)
        return PolynomialFn(dim=n, terms=terms)


def _permutations(idx):
    from itertools import permutations
    return permutations(idx)


def _poly_mul(p, q):
    out = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


# ---------------------------------------------------------------------------
# Guillemin boundary potential
# ---------------------------------------------------------------------------

class GuilleminPotential:
    """v(x) = sum_r w_r * ell_r(x) log ell_r(x) over a facet list.

    The package's boundary potential of a Delzant polytope carries w_r = 1 on
    every facet.  With unit weight the exact bound states scale like integer
    powers of the facet functions, which keeps the P1 interpolation of the
    bound-state oracle at clean second order; the corner models (weight 1/2)
    are driven through the same closed forms with explicit weights.
    """

    DELZANT_WEIGHT = 1.0

    def __init__(self, normals, offsets, weights=None):
        self.normals = np.asarray(normals, dtype=float)
        self.offsets = np.asarray(offsets, dtype=float)
        d = len(self.offsets)
        self.weights = np.ones(d) if weights is None else np.broadcast_to(
            np.asarray(weights, dtype=float), (d,)
        ).copy()
        self.dim = self.normals.shape[1]

    @staticmethod
    def of_polytope(P: DelzantPolytope, weights=None):
        if weights is None:
            weights = GuilleminPotential.DELZANT_WEIGHT
        return GuilleminPotential(P.normals, P.offsets, weights=weights)

    def facet_values(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.normals.T - self.offsets

    def _ell_checked(self, x):
        ell = self.facet_values(x)
        if np.any(ell <= INTERIOR_TOL):
            raise BoundaryPoint(f"point {x} is within {INTERIOR_TOL} of a facet")
        return ell

    def __call__(self, x):
        ell = self._ell_checked(x)
        return np.sum(self.weights * ell * np.log(ell), axis=-1)

    def gradient(self, x):
        ell = self._ell_checked(x)
        return ((self.weights * (1.0 + np.log(ell)))[..., None] * self.normals).sum(-2)

    def hessian(self, x):
        ell = self._ell_checked(x)
        return np.einsum("...r,ri,rj->...ij", self.weights / ell, self.normals, self.normals)

    def tensor(self, x, order):
        """Derivative tensor of the given order (2, 3 or 4)."""
        ell = self._ell_checked(x)
        if order == 2:
            return self.hessian(x)
        if order == 3:
            coef = -self.weights / ell**2
            return np.einsum("...r,ri,rj,rk->...ijk", coef, self.normals, self.normals, self.normals)
        if order == 4:
            coef = 2.0 * self.weights / ell**3
            return np.einsum(
                "...r,ri,rj,rk,rl->...ijkl", coef, self.normals, self.normals, self.normals, self.normals
            )
        raise ValueError("order must be 2, 3 or 4")


def guillemin_derivatives(P: DelzantPolytope, x, order=3):
    """Value, gradient and derivative tensors of v_P at an interior point x.

    Returns the tuple (value, gradient, hessian, ...) through the requested
    order (up to 4).  Raises BoundaryPoint when some ell_r(x) <= 1e-14.
    """
    v = GuilleminPotential.of_polytope(P)
    x = np.asarray(x, dtype=float)
    out = [v(x), v.gradient(x)]
    for k in range(2, order + 1):
        out.append(v.tensor(x, k))
    return tuple(out)


# ---------------------------------------------------------------------------
# the potential family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSpec:
    """The data (P, phi, psi) generating the family u_s = v_P + phi + psi/s."""

    polytope: DelzantPolytope
    phi: PolynomialFn
    psi: PolynomialFn
    boundary: GuilleminPotential = field(compare=False, default=None)

    def u_parts(self):
        return self.boundary, self.phi, self.psi


@dataclass(frozen=True)
class HessianData:
    """G_s and friends at one interior point."""

    point: np.ndarray
    s: float
    G: np.ndarray
    G_inv: np.ndarray
    det_G: float
    dG: np.ndarray          # dG[k, i, j] = d_k G_ij, totally symmetric

    @property
    def log_det_G_inv(self):
        return -float(np.log(self.det_G))


def _admissibility_sample(P: DelzantPolytope):
    """Interior grid plus graded near-boundary points for spot checks."""
    pts = []
    interior = np.array([float(c) for c in P.interior_point()])
    verts = np.array([[float(c) for c in v] for v in P.vertices])
    for t in np.linspace(0.15, 0.95, 5):
        for v in verts:
            pts.append(interior + t * (v - interior) * 0.999)
    for face in vertices_and_faces(P):
        if face.codim == 0:
            continue
        rep = np.array([float(c) for c in face.rep_point])
        for eps in (1e-2, 1e-4, 1e-6):
            pts.append(rep + eps * (interior - rep))
    pts.append(interior)
    return np.array(pts)


def make_potential_spec(P: DelzantPolytope, phi=None, psi=None, validate=True):
    """Assemble a PotentialSpec, spot-checking admissibility on a sample of P.

    phi must keep Hess(v_P + phi) positive definite inside P with the boundary
    determinant product positive, and psi must have positive definite Hessian
    on all of P; both are checked by sampling, not proved.
    """
    phi = phi if phi is not None else PolynomialFn.zero(P.dim)
    psi = psi if psi is not None else PolynomialFn.half_norm_sq(P.dim)
    boundary = GuilleminPotential.of_polytope(P)
    spec = PotentialSpec(polytope=P, phi=phi, psi=psi, boundary=boundary)
    if validate:
        sample = _admissibility_sample(P)
        hess_psi = psi.hessian(sample)
        for q, H in zip(sample, hess_psi):
            if np.linalg.eigvalsh(H)[0] <= 0:
                raise NotPositiveDefinite(f"Hess(psi) fails at {q}")
        ell = boundary.facet_values(sample)
        hess_v = boundary.hessian(sample) + phi.hessian(sample)
        for q, H, lrow in zip(sample, hess_v, ell):
            w = np.linalg.eigvalsh(H)
            if w[0] <= 0:
                raise NotPositiveDefinite(f"Hess(v_P + phi) fails at {q}")
            if np.linalg.det(H) * np.prod(lrow) <= 0:
                raise NotPositiveDefinite(f"boundary determinant product fails at {q}")
    return spec


def potential_spec_from_json(P: DelzantPolytope, text):
    """PotentialSpec from {"phi": [{"alpha": [...], "c": ...}], "psi": [...]}."""
    data = json.loads(text) if isinstance(text, str) else dict(text)

    def parse(key, default):
        if key not in data or data[key] is None:
            return default
        terms = tuple((tuple(int(a) for a in t["alpha"]), float(t["c"])) for t in data[key])
        return PolynomialFn(dim=P.dim, terms=terms)

    phi = parse("phi", PolynomialFn.zero(P.dim))
    psi = parse("psi", PolynomialFn.half_norm_sq(P.dim))
    return make_potential_spec(P, phi=phi, psi=psi)


def potential_spec_to_json(spec: PotentialSpec):
    return json.dumps(
        {
            "phi": [{"alpha": list(a), "c": c} for a, c in spec.phi.terms],
            "psi": [{"alpha": list(a), "c": c} for a, c in spec.psi.terms],
        },
        sort_keys=True,
    )


class PotentialFamily:
    """u_s = v_P + phi + psi/s at fixed s, with derivative tensors through order 4."""

    def __init__(self, boundary: GuilleminPotential, phi: PolynomialFn, psi: PolynomialFn, s: float):
        if s <= 0:
            raise ValueError("s must be positive")
        self.boundary = boundary
        self.phi = phi
        self.psi = psi
        self.s = float(s)
        self.dim = boundary.dim

    @staticmethod
    def of_spec(spec: PotentialSpec, s):
        return PotentialFamily(spec.boundary, spec.phi, spec.psi, s)

    def value(self, x):
        return self.boundary(x) + self.phi(x) + self.psi(x) / self.s

    def gradient(self, x):
        return self.boundary.gradient(x) + self.phi.gradient(x) + self.psi.gradient(x) / self.s

    def hessian(self, x):
        return self.boundary.hessian(x) + self.phi.hessian(x) + self.psi.hessian(x) / self.s

    def tensor(self, x, order):
        if order == 2:
            return self.hessian(x)
        return (
            self.boundary.tensor(x, order)
            + self.phi.tensor(x, order)
            + self.psi.tensor(x, order) / self.s
        )


def family_hessian(spec: PotentialSpec, s, x):
    """HessianData of G_s = Hess(v_P + phi + psi/s) at an interior point."""
    fam = PotentialFamily.of_spec(spec, s)
    x = np.asarray(x, dtype=float)
    G = fam.hessian(x)
    w = np.linalg.eigvalsh(G)
    if w[0] <= PD_RATIO_TOL * w[-1]:
        raise NotPositiveDefinite(f"G_s at {x} has eigenvalue ratio below {PD_RATIO_TOL}")
    G_inv = np.linalg.inv(G)
    dG = fam.tensor(x, 3)
    return HessianData(point=x, s=float(s), G=G, G_inv=G_inv, det_G=float(np.linalg.det(G)), dG=dG)


def family_hessian_batch(spec: PotentialSpec, s, X):
    """G_s and G_s^-1 at a batch of interior points, shape (Q, n, n)."""
    fam = PotentialFamily.of_spec(spec, s)
    X = np.asarray(X, dtype=float)
    G = fam.hessian(X)
    return G, np.linalg.inv(G)


# ---------------------------------------------------------------------------
# boundary splitting of G_s in a chart
# ---------------------------------------------------------------------------

def _pullback_data(spec: PotentialSpec, chart: LocalChart):
    """Facet data and polynomial parts of the potential in chart coordinates."""
    P = spec.polytope
    A = np.array(chart.lattice_map, dtype=float)
    A_inv = np.linalg.inv(A)
    c = np.array([float(v) for v in chart.shift])
    # ell_r(x) = nu_r . x - lam_r = nu'_r . x' - lam'_r with nu' = A^-T nu
    normals_new = (A_inv.T @ np.array(P.normals, dtype=float).T).T
    offsets_new = np.array(P.offsets, dtype=float) + normals_new @ c
    d_shift = -A_inv @ c
    phi_new = spec.phi.affine_pullback(A_inv, d_shift)
    psi_new = spec.psi.affine_pullback(A_inv, d_shift)
    return normals_new, offsets_new, phi_new, psi_new


def boundary_decomposition(spec: PotentialSpec, s, chart: LocalChart, x):
    """Split G_s (chart coordinates) as X_sing + A/s + B with B bounded.

    x is given in chart coordinates with x_i > 0 for i <= local_codim.
    X_sing = diag(w_1/x_1, .., w_m/x_m, 0, ..) carries the active-facet
    singular part of Hess(v_P), A = Hess(psi), and B collects the inactive
    facets plus Hess(phi); B extends continuously to the face.  The three
    matrices sum to G_s exactly.
    """
    m = chart.local_codim
    x = np.asarray(x, dtype=float)
    n = spec.polytope.dim
    if x.shape != (n,):
        raise ChartMismatch("point dimension does not match the chart")
    if np.any(x[:m] <= 0):
        raise ChartMismatch("chart coordinates must have x_i > 0 for active facets")
    normals_new, offsets_new, phi_new, psi_new = _pullback_data(spec, chart)
    active = [i for i in range(len(offsets_new)) if _is_active_row(normals_new[i], offsets_new[i], m)]
    if len(active) != m:
        raise ChartMismatch("chart does not normalize the active facets")

    X_sing = np.zeros((n, n))
    for i, r in enumerate(active):
        X_sing[i, i] = spec.boundary.weights[r] / x[i]
    A_mat = psi_new.hessian(x)
    inactive = [r for r in range(len(offsets_new)) if r not in active]
    v_rest = GuilleminPotential(
        normals_new[inactive], offsets_new[inactive], weights=spec.boundary.weights[inactive]
    )
    B_mat = v_rest.hessian(x) + phi_new.hessian(x)
    return X_sing, A_mat, B_mat


def _is_active_row(nu, lam, m):
    if abs(lam) > 1e-12:
        return False
    idx = np.nonzero(np.abs(nu) > 1e-12)[0]
    return len(idx) == 1 and idx[0] < m and abs(nu[idx[0]] - 1.0) < 1e-12


def chart_hessian(spec: PotentialSpec, s, chart: LocalChart, x):
    """G_s in chart coordinates, evaluated from the pulled-back potential."""
    normals_new, offsets_new, phi_new, psi_new = _pullback_data(spec, chart)
    v_new = GuilleminPotential(normals_new, offsets_new, weights=spec.boundary.weights)
    return v_new.hessian(np.asarray(x, dtype=float)) + phi_new.hessian(x) + psi_new.hessian(x) / s


# ---------------------------------------------------------------------------
# exact bound states
# ---------------------------------------------------------------------------

def ground_state(spec: PotentialSpec, s, k, mode):
    """Closed-form bottom eigenfunction of the reduced mode-m operator.

    phi_m(x) = exp((m - k x) . grad u_s(x) + k u_s(x)) satisfies
    L_{s,k,m} phi_m = (k^2 + k n) phi_m for every admissible potential.
    The boundary-facet log terms are resummed into the equivalent product

        phi_m = prod_r ell_r^{w_r e_r} * exp(sum_r w_r (e_r - k ell_r) + polynomial),

    with integer counts e_r = nu_r . m - k lambda_r >= 0 and the facet weights
    w_r of v_P, so the returned callable extends continuously to the closed
    polytope.
    """
    mode = np.asarray(mode, dtype=float)
    b = tuple(Fraction(int(mi), int(k)) for mi in np.rint(mode).astype(int))
    if not spec.polytope.contains(b):
        raise ModeOutsidePolytope(f"mode {mode} has m/k outside the polytope")
    P = spec.polytope
    normals = np.array(P.normals, dtype=float)
    offsets = np.array(P.offsets, dtype=float)
    weights = spec.boundary.weights
    exponents = weights * (normals @ mode - k * offsets)

    def state(x):
        x = np.asarray(x, dtype=float)
        ell = np.maximum(x @ normals.T - offsets, 0.0)
        smooth = np.einsum(
            "...i,...i->...",
            mode - k * x,
            spec.phi.gradient(x) + spec.psi.gradient(x) / s,
        ) + k * (spec.phi(x) + spec.psi(x) / s)
        expo = smooth + np.sum(exponents - weights * k * ell, axis=-1)
        log_ell = np.log(np.where(ell > 0.0, ell, 1.0))
        powers = np.where((exponents > 0.0) & (ell <= 0.0), -np.inf, exponents * log_ell)
        return np.exp(expo + powers.sum(axis=-1))

    return state

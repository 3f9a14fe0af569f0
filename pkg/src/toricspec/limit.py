"""Limit operators at quantized points: Gaussian oscillators on cones.

At a quantized point b the polytope is normalized by a unimodular chart and
rescaled by xi = s^(-1/2) A0^(1/2) x with A0 the Hessian of the regulator psi
at b.  The limit operator sum_i(-d^2/dxi_i^2 + 2 k xi_i d/dxi_i) acts on
L^2(cone, e^{-k ||xi||^2} dxi) with the Neumann condition on the cone faces;
its spectrum is combinatorial for right-angled cones and is computed by a
weighted finite element solve otherwise.  Reported eigenvalues carry the
factor 1/2 used in the degeneration dictionary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartFailure,
    DimensionUnsupported,
    NotSeparable,
    TruncationTooSmall,
)
from .mesh import interval_mesh, polygon_mesh
from .operator import assemble_p1, solve_pencil
from .polytope import BSPoint, bs_points, local_chart
from .potential import PotentialSpec

SEPARABLE_TOL = 1e-12
GAP_FRACTION = 0.1


@dataclass(frozen=True)
class ConeModel:
    """Local cone A0^(1/2) (R_{>=0}^m x R^(n-m)) with its Gaussian weight level."""

    bs_point: BSPoint
    codim: int               # number of cone faces m
    A0: np.ndarray           # Hess(psi) at the base point, chart coordinates
    level: int               # weight exponent k
    chart: object = None

    @property
    def dim(self):
        return self.A0.shape[0]

    def sqrt_A0(self):
        w, U = np.linalg.eigh(self.A0)
        return (U * np.sqrt(w)) @ U.T

    def inv_sqrt_A0(self):
        w, U = np.linalg.eigh(self.A0)
        return (U / np.sqrt(w)) @ U.T

    def facet_normals(self):
        """Unit inward normals of the cone faces, rows A0^(-1/2) e_i normalized."""
        S = self.inv_sqrt_A0()
        rows = S[: self.codim]
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        return rows / norms


@dataclass(frozen=True)
class LimitSpectrum:
    """Ascending eigenvalues of half the cone operator, with multiplicities."""

    values: tuple            # distinct eigenvalues, ascending
    multiplicities: tuple
    exact: bool
    truncation_radius: float = float("nan")
    raw: tuple = None        # unclustered solver output (numeric case)

    def flat(self, count=None):
        if self.raw is not None:
            out = list(self.raw)
        else:
            out = []
            for v, m in zip(self.values, self.multiplicities):
                out.extend([v] * m)
        return np.array(out if count is None else out[:count])


def cone_at(spec: PotentialSpec, b: BSPoint):
    """Chart-normalized cone at a quantized point, A0 = Hess(psi) in the chart."""
    chart = local_chart(spec.polytope, b.point)
    if chart.local_codim != b.face_codim:
        raise ChartFailure("chart codimension disagrees with the point")
    A = chart.matrix()
    A_inv = np.linalg.inv(A)
    x0 = np.array([float(c) for c in b.point])
    A0 = A_inv.T @ spec.psi.hessian(x0) @ A_inv
    return ConeModel(bs_point=b, codim=b.face_codim, A0=A0, level=b.level, chart=chart)


def is_separable(cone: ConeModel):
    """True when the cone is congruent to a right-angled model.

    The facet normals A0^(-1/2) e_i must be pairwise orthogonal, equivalently
    (A0^-1)_{ij} = 0 for i != j <= m; any cone with m <= 1 is a rotated
    half-space or all of R^n, hence always separable.
    """
    if cone.codim <= 1:
        return True
    A0_inv = np.linalg.inv(cone.A0)
    block = A0_inv[: cone.codim, : cone.codim]
    off = block - np.diag(np.diag(block))
    return bool(np.max(np.abs(off)) <= SEPARABLE_TOL * np.max(np.abs(np.diag(block))))


def exact_cone_spectrum(cone: ConeModel, k, n_max=12):
    """Combinatorial spectrum of a right-angled cone: value k N with
    multiplicity #{kappa in Z_{>=0}^n : 2 sum_{i<=m} kappa_i + sum_{i>m} kappa_i = N}."""
    if not is_separable(cone):
        raise NotSeparable("no closed form for a skew cone")
    n, m = cone.dim, cone.codim
    values, mults = [], []
    for N in range(n_max + 1):
        count = _weighted_compositions(N, m, n - m)
        if count > 0:
            values.append(float(k * N))
            mults.append(int(count))
    return LimitSpectrum(values=tuple(values), multiplicities=tuple(mults), exact=True)


def _weighted_compositions(N, m, rest):
    """#{kappa : 2(kappa_1 + .. + kappa_m) + kappa_{m+1} + .. + kappa_{m+rest} = N}."""
    total = 0
    for even_part in range(0, N // 2 + 1):
        ways_even = _compositions(even_part, m)
        ways_rest = _compositions(N - 2 * even_part, rest)
        total += ways_even * ways_rest
    return total


def _compositions(N, slots):
    if slots == 0:
        return 1 if N == 0 else 0
    from math import comb

    return comb(N + slots - 1, slots - 1)


def default_truncation_radius(k, target_norm=0.0):
    return float(np.sqrt(30.0 / k) + target_norm)


def _clip_polygon(poly, normal, offset):
    """Sutherland-Hodgman clip of a convex polygon against normal . x >= offset."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dp = normal @ p - offset
        dq = normal @ q - offset
        if dp >= 0:
            out.append(p)
        if (dp > 0) != (dq > 0) and abs(dp - dq) > 0:
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    dedup = []
    for p in out:
        if not dedup or np.linalg.norm(p - dedup[-1]) > 1e-12:
            dedup.append(p)
    if len(dedup) > 1 and np.linalg.norm(dedup[0] - dedup[-1]) <= 1e-12:
        dedup.pop()
    return dedup


def truncated_cone_mesh(cone: ConeModel, R, target_h):
    """Mesh of the cone intersected with the centered box of half-width R."""
    n, m = cone.dim, cone.codim
    if n == 1:
        lo = 0.0 if m >= 1 else -R
        return interval_mesh(lo, R, target_h, grading_ratio=1.0)
    if n == 2:
        box = [
            np.array([-R, -R]),
            np.array([R, -R]),
            np.array([R, R]),
            np.array([-R, R]),
        ]
        poly = box
        S = cone.inv_sqrt_A0()
        for i in range(m):
            poly = _clip_polygon(poly, S[i], 0.0)
            if len(poly) < 3:
                raise ChartFailure("cone truncation degenerated")
        return polygon_mesh(np.array(poly), target_h, boundary_layer=False)
    raise DimensionUnsupported("numeric cone spectra for n <= 2 only")


def numeric_cone_spectrum(cone: ConeModel, k, count, R=None, target_h=None):
    """Weighted P1 solve of the cone operator; returns half its eigenvalues.

    Stiffness and mass both carry the Gaussian weight e^{-k ||xi||^2}; the
    natural boundary condition realizes Neumann on the cone faces, and the
    truncation at radius R contributes only exponentially small error.
    """
    if R is None:
        R = default_truncation_radius(k)
    if target_h is None:
        target_h = R / 400.0 if cone.dim == 1 else R / 56.0
    mesh = truncated_cone_mesh(cone, R, target_h)
    q = mesh.qpoints.reshape(-1, mesh.dim)
    weight = np.exp(-k * np.sum(q * q, axis=1)).reshape(mesh.qweights.shape)
    K, M = assemble_p1(mesh, diffusion_q=weight, potential_q=None, mass_weight_q=weight)
    spectrum = solve_pencil(K, M, count, sigma=-1.0)
    vals = spectrum.eigenvalues
    if abs(vals[0]) > 1e-6:
        raise TruncationTooSmall(f"bottom eigenvalue {vals[0]:.3e} off zero")
    half = 0.5 * vals
    values, mults = _cluster(half, tol=max(1e-6, 0.02 * k))
    return LimitSpectrum(
        values=tuple(values),
        multiplicities=tuple(mults),
        exact=False,
        truncation_radius=float(R),
        raw=tuple(float(v) for v in half),
    ), spectrum, mesh


def _cluster(vals, tol):
    values, mults = [], []
    for v in vals:
        if values and abs(v - values[-1]) <= tol * (1.0 + abs(v)):
            mults[-1] += 1
        else:
            values.append(float(v))
            mults.append(1)
    return values, mults


def rescale_to_limit(chart, A0, s, x):
    """xi = s^(-1/2) A0^(1/2) x for x in chart coordinates."""
    A0 = np.asarray(A0, dtype=float)
    w, U = np.linalg.eigh(A0)
    sqrt_A0 = (U * np.sqrt(w)) @ U.T
    x = np.asarray(x, dtype=float)
    return (x @ sqrt_A0.T) / np.sqrt(s)


def rescale_from_limit(chart, A0, s, xi):
    A0 = np.asarray(A0, dtype=float)
    w, U = np.linalg.eigh(A0)
    inv_sqrt = (U / np.sqrt(w)) @ U.T
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(s) * (xi @ inv_sqrt.T)


def predicted_limit(spec: PotentialSpec, k, count=8):
    """Per quantized point, the limit spectrum: exact when separable, numeric else."""
    out = {}
    for b in bs_points(spec.polytope, k):
        cone = cone_at(spec, b)
        if is_separable(cone):
            n_max = count + 2 * cone.dim + 4
            out[b] = exact_cone_spectrum(cone, k, n_max=n_max)
        else:
            out[b], _, _ = numeric_cone_spectrum(cone, k, count)
    return out


def limit_spectrum_record(b: BSPoint, k, spectrum: LimitSpectrum):
    return {
        "b": [str(c) for c in b.point],
        "k": int(k),
        "exact": bool(spectrum.exact),
        "eigenvalues": [float(v) for v in spectrum.values],
        "multiplicities": [int(m) for m in spectrum.multiplicities],
    }


def limit_spectrum_json(b, k, spectrum):
    return json.dumps(limit_spectrum_record(b, k, spectrum), sort_keys=True)

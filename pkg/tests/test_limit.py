"""Limit oscillators on cones: exact combinatorics vs weighted FEM."""

from itertools import product

import numpy as np
import pytest

from toricspec import errors
from toricspec.limit import (
    ConeModel,
    cone_at,
    exact_cone_spectrum,
    is_separable,
    limit_spectrum_record,
    numeric_cone_spectrum,
    predicted_limit,
    rescale_from_limit,
    rescale_to_limit,
)
from toricspec.polytope import bs_points, segment, simplex2
from toricspec.potential import PolynomialFn, make_potential_spec


def synthetic_cone(n, m, A0=None, k=1):
    A0 = np.eye(n) if A0 is None else np.asarray(A0, dtype=float)
    return ConeModel(bs_point=None, codim=m, A0=A0, level=k)


def brute_multiplicity(N, m, n, cap=40):
    count = 0
    for kappa in product(range(cap), repeat=n):
        if 2 * sum(kappa[:m]) + sum(kappa[m:]) == N:
            count += 1
    return count


class TestCones:
    def test_interval_vertex(self):
        spec = make_potential_spec(segment())
        b = bs_points(segment(), 1)[0]
        cone = cone_at(spec, b)
        assert cone.codim == 1 and np.allclose(cone.A0, 1.0)

    def test_interval_midpoint(self):
        spec = make_potential_spec(segment())
        b = [p for p in bs_points(segment(), 2) if p.face_codim == 0][0]
        cone = cone_at(spec, b)
        assert cone.codim == 0

    def test_simplex_corner_right_angle(self):
        spec = make_potential_spec(simplex2())
        b = [p for p in bs_points(simplex2(), 1) if p.face_codim == 2][0]
        cone = cone_at(spec, b)
        assert cone.codim == 2
        assert np.allclose(cone.facet_normals() @ cone.facet_normals().T, np.eye(2))


class TestSeparability:
    def test_low_codim_always(self):
        assert is_separable(synthetic_cone(2, 0))
        assert is_separable(synthetic_cone(2, 1, A0=[[2, 1], [1, 2]]))

    def test_identity_always(self):
        assert is_separable(synthetic_cone(2, 2))

    def test_skew_not(self):
        assert not is_separable(synthetic_cone(2, 2, A0=[[2, 1], [1, 2]]))


class TestExactSpectra:
    def test_half_line(self):
        ls = exact_cone_spectrum(synthetic_cone(1, 1), 1, n_max=8)
        assert ls.values == (0.0, 2.0, 4.0, 6.0, 8.0)
        assert all(m == 1 for m in ls.multiplicities)

    def test_line(self):
        ls = exact_cone_spectrum(synthetic_cone(1, 0), 1, n_max=4)
        assert ls.values == (0.0, 1.0, 2.0, 3.0, 4.0)

    def test_wedge_multiplicity(self):
        ls = exact_cone_spectrum(synthetic_cone(2, 1), 1, n_max=4)
        by_value = dict(zip(ls.values, ls.multiplicities))
        assert by_value[2.0] == brute_multiplicity(2, 1, 2)
        assert by_value[2.0] == 2

    def test_brute_force_multiplicities(self):
        for n, m in ((1, 0), (1, 1), (2, 0), (2, 1), (2, 2)):
            ls = exact_cone_spectrum(synthetic_cone(n, m), 1, n_max=6)
            for v, mult in zip(ls.values, ls.multiplicities):
                assert mult == brute_multiplicity(int(round(v)), m, n)

    def test_multiplicity_sum_rule(self):
        n, m, n_max = 2, 1, 6
        ls = exact_cone_spectrum(synthetic_cone(n, m), 1, n_max=n_max)
        total = sum(ls.multiplicities)
        brute = sum(
            1
            for kappa in product(range(n_max + 1), repeat=n)
            if 2 * sum(kappa[:m]) + sum(kappa[m:]) <= n_max
        )
        assert total == brute

    def test_skew_raises(self):
        with pytest.raises(errors.NotSeparable):
            exact_cone_spectrum(synthetic_cone(2, 2, A0=[[2, 1], [1, 2]]), 1)


class TestNumericSpectra:
    def test_half_line_within_percent(self):
        cone = synthetic_cone(1, 1)
        ls, _, _ = numeric_cone_spectrum(cone, 1, 6)
        exact = exact_cone_spectrum(cone, 1, n_max=12).flat(6)
        num = ls.flat(6)
        assert abs(num[0]) < 1e-6
        assert np.all(np.abs(num[1:] - exact[1:]) <= 0.01 * exact[1:])

    def test_plane_k1_multiplicities(self):
        cone = synthetic_cone(2, 0)
        ls, _, _ = numeric_cone_spectrum(cone, 1, 6)
        exact = exact_cone_spectrum(cone, 1, n_max=8).flat(6)
        num = ls.flat(6)
        assert np.all(np.abs(num[1:] - exact[1:]) <= 0.02 * exact[1:])

    def test_skew_wedge_golden_and_self_convergence(self):
        # A0 = [[2,1],[1,2]] opens a 60-degree wedge; the Neumann oscillator
        # there keeps the dihedral-invariant plane modes (angular index in
        # 3Z), so half its spectrum is {0, 2, 3, 4, 5, 6, 6, ...}
        cone = synthetic_cone(2, 2, A0=[[2.0, 1.0], [1.0, 2.0]])
        ls, _, _ = numeric_cone_spectrum(cone, 1, 6)
        coarse = ls.flat(6)
        R = ls.truncation_radius
        fine, _, _ = numeric_cone_spectrum(cone, 1, 6, R=R, target_h=R / 112.0)
        fine = fine.flat(6)
        assert abs(coarse[0]) < 1e-6
        assert np.all(np.abs(coarse[1:] - fine[1:]) <= 0.01 * fine[1:])
        golden = np.array([0.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert np.all(np.abs(fine - golden) <= 0.01 * np.maximum(golden, 1.0))

    def test_bottom_gap_contract(self):
        for n, m, k in ((1, 1, 1), (1, 0, 2), (2, 2, 1)):
            ls, _, _ = numeric_cone_spectrum(synthetic_cone(n, m, k=k), k, 4)
            flat = ls.flat(4)
            assert abs(flat[0]) < 1e-6
            assert flat[1] - flat[0] > 0.1 * k

    def test_chart_independence_via_orthogonal_map(self):
        # two normalizations of the same corner give congruent cones; solving
        # on the orthogonally mapped mesh reproduces the spectrum exactly
        cone1 = synthetic_cone(2, 2, A0=np.eye(2))
        theta = 0.3
        O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        ls1, spectrum1, mesh1 = numeric_cone_spectrum(cone1, 1, 5)
        from toricspec.mesh import Mesh
        from toricspec.operator import assemble_p1, solve_pencil

        nodes2 = mesh1.nodes @ O.T
        mesh2 = Mesh(dim=2, nodes=nodes2, cells=mesh1.cells.copy(), grading=mesh1.grading)
        q = mesh2.qpoints.reshape(-1, 2)
        weight = np.exp(-np.sum(q * q, axis=1)).reshape(mesh2.qweights.shape)
        K, M = assemble_p1(mesh2, diffusion_q=weight, mass_weight_q=weight)
        sp2 = solve_pencil(K, M, 5, sigma=-1.0)
        assert np.max(np.abs(0.5 * sp2.eigenvalues - ls1.flat(5))) < 1e-6


class TestRescaling:
    def test_origin_fixed(self):
        assert np.allclose(rescale_to_limit(None, np.eye(2), 0.01, np.zeros(2)), 0.0)

    def test_reference_point(self):
        xi = rescale_to_limit(None, np.eye(2), 0.01, np.array([0.1, 0.0]))
        assert np.allclose(xi, [1.0, 0.0])

    def test_roundtrip(self, rng):
        A0 = np.array([[2.0, 0.3], [0.3, 1.0]])
        for _ in range(5):
            x = rng.normal(size=2)
            xi = rescale_to_limit(None, A0, 0.05, x)
            back = rescale_from_limit(None, A0, 0.05, xi)
            assert np.allclose(back, x, atol=1e-12)


class TestPredictions:
    def test_interval_k1(self):
        spec = make_potential_spec(segment())
        pred = predicted_limit(spec, 1, count=4)
        assert len(pred) == 2
        for ls in pred.values():
            assert ls.exact and ls.values[:3] == (0.0, 2.0, 4.0)

    def test_interval_k2(self):
        spec = make_potential_spec(segment())
        pred = predicted_limit(spec, 2, count=4)
        for b, ls in pred.items():
            if b.face_codim == 1:
                assert ls.values[:3] == (0.0, 4.0, 8.0)
            else:
                assert ls.values[:3] == (0.0, 2.0, 4.0)

    def test_simplex_k1_corner_pattern(self):
        # with psi = ||x||^2/2 only the origin corner is right-angled; the
        # two slanted corners carry 45-degree wedges (angular index in 4Z)
        # whose half spectrum is {0, 2, 4, 4, 6, 6, ...}
        spec = make_potential_spec(simplex2())
        pred = predicted_limit(spec, 1, count=6)
        assert len(pred) == 3
        for b, ls in pred.items():
            if all(c == 0 for c in b.point):
                assert ls.exact
                assert ls.values[:3] == (0.0, 2.0, 4.0)
                assert ls.multiplicities[:3] == (1, 2, 3)
            else:
                assert not ls.exact
                wedge = np.array([0.0, 2.0, 4.0, 4.0])
                assert np.all(np.abs(ls.flat(4) - wedge) <= 0.02 * np.maximum(wedge, 1))

    def test_nonseparable_prediction_is_numeric(self):
        psi = PolynomialFn(
            dim=2, terms=(((2, 0), 1.0), ((1, 1), 1.0), ((0, 2), 1.0))
        )   # Hess = [[2, 1], [1, 2]]
        spec = make_potential_spec(simplex2(), psi=psi)
        pred = predicted_limit(spec, 1, count=4)
        kinds = {b.face_codim: ls.exact for b, ls in pred.items()}
        assert kinds[2] is False

    def test_record_schema(self):
        spec = make_potential_spec(segment())
        b = bs_points(segment(), 1)[0]
        ls = predicted_limit(spec, 1, count=3)[b]
        rec = limit_spectrum_record(b, 1, ls)
        assert set(rec) == {"b", "k", "exact", "eigenvalues", "multiplicities"}

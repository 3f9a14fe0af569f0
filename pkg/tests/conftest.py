"""Shared helpers: random Delzant polytopes and brute-force lattice oracles."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from toricspec.polytope import DelzantPolytope, validate_delzant


def random_unimodular(rng, n):
    """Product of random elementary integer row operations, det = +-1."""
    A = np.eye(n, dtype=int)
    for _ in range(rng.integers(2, 6)):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        A[i] += int(rng.integers(-2, 3)) * A[j]
    if rng.random() < 0.5 and n > 1:
        A[[0, 1]] = A[[1, 0]]
    if rng.random() < 0.5:
        A[0] = -A[0]
    return A


def transform_polytope(P: DelzantPolytope, A, c):
    """Image polytope under x -> A x + c with A in GL_n(Z), c integer."""
    A = np.asarray(A, dtype=int)
    c = np.asarray(c, dtype=int)
    A_inv_T = np.round(np.linalg.inv(A.T)).astype(int)
    raw = []
    for nu, lam in zip(P.normals, P.offsets):
        nu_new = A_inv_T @ np.array(nu, dtype=int)
        lam_new = lam + int(nu_new @ c)
        raw.append((tuple(int(v) for v in nu_new), lam_new))
    return validate_delzant(raw, dim=P.dim)


def random_delzant(rng, n):
    """Random GL_n(Z)-image of a stock polytope, optionally dilated."""
    scale = int(rng.integers(1, 4))
    if n == 1:
        base = validate_delzant([((1,), 0), ((-1,), -scale)])
    else:
        kind = rng.integers(0, 3)
        if kind == 0:
            base = validate_delzant(
                [((1, 0), 0), ((0, 1), 0), ((-1, -1), -scale)]
            )
        elif kind == 1:
            base = validate_delzant(
                [((1, 0), 0), ((0, 1), 0), ((-1, 0), -scale), ((0, -1), -scale)]
            )
        else:
            base = validate_delzant(
                [((1, 0), 0), ((0, 1), 0), ((0, -1), -1), ((-1, -1), -scale - 1)]
            )
    A = random_unimodular(rng, n)
    c = rng.integers(-3, 4, size=n)
    return transform_polytope(base, A, c)


def brute_force_bs_count(P: DelzantPolytope, k):
    """Exhaustive scan of the integer bounding box of k P."""
    lo, hi = P.bounding_box()
    ranges = [
        range(int(np.floor(float(a) * k)) - 1, int(np.ceil(float(b) * k)) + 2)
        for a, b in zip(lo, hi)
    ]
    count = 0
    for m in product(*ranges):
        if P.contains(tuple(Fraction(v, k) for v in m)):
            count += 1
    return count


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

"""Cyclic banded solver against the dense oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersive_compact.banded import (
    CyclicBandedSolver,
    SingularOperatorError,
    check_invertible,
    dense_oracle_solve,
)

RNG = np.random.default_rng(1234)


def test_small_tridiagonal_matches_dense():
    solver = CyclicBandedSolver(7, 0.25)
    rhs = RNG.normal(size=7)
    x = solver.solve(rhs)
    ref = dense_oracle_solve(solver.dense(), rhs)
    assert np.max(np.abs(x - ref)) < 1e-13


@pytest.mark.parametrize(
    "alpha,beta",
    [
        (205 / 472, 0.0),     # node third derivative, tridiagonal
        (-1261 / 3530, 0.0),  # dual third derivative
        (3 / 8, 0.0),         # node first derivative
        (799 / 2739, -557 / 5478),  # pentadiagonal
        (10 / 21, 5 / 126),   # interpolation, pentadiagonal
        (0.4, 0.0),           # filter LHS
    ],
)
def test_catalogued_bands_match_oracle(alpha, beta):
    for n in (8, 13, 64):
        solver = CyclicBandedSolver(n, alpha, beta)
        rhs = RNG.normal(size=n)
        x = solver.solve(rhs)
        ref = dense_oracle_solve(solver.dense(), rhs)
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(x - ref)) / scale < 1e-11


def test_hundred_random_systems_match_oracle():
    for _ in range(100):
        n = int(RNG.integers(8, 65))
        alpha = float(RNG.uniform(-0.3, 0.3))
        beta = float(RNG.uniform(-0.05, 0.05)) if RNG.random() < 0.5 else 0.0
        solver = CyclicBandedSolver(n, alpha, beta)
        rhs = RNG.normal(size=n)
        x = solver.solve(rhs)
        ref = dense_oracle_solve(solver.dense(), rhs)
        scale = max(np.max(np.abs(ref)), 1.0)
        assert np.max(np.abs(x - ref)) / scale < 1e-11


def test_identity_when_alpha_beta_zero():
    solver = CyclicBandedSolver(16, 0.0, 0.0)
    rhs = RNG.normal(size=16)
    assert np.array_equal(solver.solve(rhs), rhs)


def test_multiple_right_hand_sides():
    solver = CyclicBandedSolver(12, 0.3)
    rhs = RNG.normal(size=(12, 5))
    x = solver.solve(rhs)
    assert x.shape == (12, 5)
    for j in range(5):
        assert np.allclose(x[:, j], solver.solve(rhs[:, j]))


def test_singular_band_detected():
    # 1 + 2*(1/2)*cos(w) vanishes at w = pi
    with pytest.raises(SingularOperatorError):
        check_invertible(0.5, 0.0)
    with pytest.raises(SingularOperatorError):
        CyclicBandedSolver(16, 0.5)


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=8, max_value=48),
    alpha=st.floats(min_value=-0.35, max_value=0.35),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_solve_then_multiply_recovers_rhs(n, alpha, seed):
    solver = CyclicBandedSolver(n, alpha)
    rhs = np.random.default_rng(seed).normal(size=n)
    x = solver.solve(rhs)
    back = solver.dense() @ x
    assert np.max(np.abs(back - rhs)) < 1e-10 * max(1.0, np.max(np.abs(rhs)))

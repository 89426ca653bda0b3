"""Periodic operator application: derivatives, interpolation, filters."""

import numpy as np
import pytest

from dispersive_compact import exact
from dispersive_compact.operators import (
    CompactOperator,
    DualGridFunction,
    FilterOperator,
    GridFunction,
    build_operator,
    derive_filter,
    filter_by_name,
    interpolate_to_centers,
)


def _sin_grid(n, k=1):
    h = 2 * np.pi / n
    x = h * np.arange(n)
    return GridFunction(np.sin(k * x), h), x


def test_node_third_derivative_of_sin():
    f, x = _sin_grid(64, k=3)
    op = build_operator("TDCNCS-T8", 64, f.h)
    out = op.apply(f)
    exact_vals = -27.0 * np.cos(3 * x)
    assert np.max(np.abs(out.values - exact_vals)) < 1e-7


def test_dual_third_derivative_of_sin():
    n = 64
    h = 2 * np.pi / n
    fine = 0.5 * h * np.arange(2 * n)
    f = DualGridFunction.from_fine(np.sin(2 * fine), h)
    op = build_operator("TDCCS-T8", n, h)
    out = op.apply(f)
    assert np.max(np.abs(out.node_values - (-8.0 * np.cos(2 * fine[0::2])))) < 1e-9
    assert np.max(np.abs(out.center_values - (-8.0 * np.cos(2 * fine[1::2])))) < 1e-9


def test_first_derivative_companions():
    f, x = _sin_grid(48, k=2)
    op = build_operator("CNCS-T8", 48, f.h)
    out = op.apply(f)
    assert np.max(np.abs(out.values - 2.0 * np.cos(2 * x))) < 1e-8


def test_interpolation_hits_midpoints():
    f, x = _sin_grid(32)
    ci = build_operator("CI-P10", 32, f.h)
    mid = interpolate_to_centers(ci, f)
    assert np.max(np.abs(mid.values - np.sin(x + f.h / 2))) < 1e-12


def test_constants_are_annihilated():
    n, h = 24, 0.3
    const = GridFunction(np.full(n, 5.0), h)
    for scheme_id in ("TDCNCS-T8", "CNCS-T8", "TDCNCS-P10"):
        out = build_operator(scheme_id, n, h).apply(const)
        assert np.max(np.abs(out.values)) < 1e-12


def test_formal_order_observed_on_grid_refinement():
    errs = []
    for n in (16, 32):
        f, x = _sin_grid(n)
        op = build_operator("TDCNCS-T8", n, f.h)
        errs.append(np.max(np.abs(op.apply(f).values + np.cos(x))))
    rate = np.log2(errs[0] / errs[1])
    assert 7.5 < rate < 8.5


def test_dense_matrix_equals_apply():
    n = 32
    h = 2 * np.pi / n
    op = build_operator("TDCNCS-T8", n, h)
    rng = np.random.default_rng(7)
    v = rng.normal(size=n)
    assert np.allclose(op.dense_matrix() @ v, op.apply_array(v), atol=1e-11)


def test_operator_rejects_wrong_container():
    op = build_operator("TDCCS-T8", 16, 0.1)
    with pytest.raises(TypeError):
        op.apply(GridFunction(np.zeros(16), 0.1))


def test_grid_too_small_rejected():
    with pytest.raises(ValueError):
        CompactOperator("TDCNCS-T8", 2, 0.1)


# -- filters ---------------------------------------------------------------

def test_filter_moment_conditions_exact():
    from fractions import Fraction
    spec = derive_filter(6, 0.4)
    a = spec.a_exact
    af = Fraction(2, 5)
    assert sum(a) == 1 + 2 * af                      # T(0) = 1
    assert sum((-1) ** n * an for n, an in enumerate(a)) == 0  # T(pi) = 0
    for q in range(1, 6):
        assert sum(Fraction(n) ** (2 * q) * an for n, an in enumerate(a)) == 2 * af


def test_filter_orders():
    assert filter_by_name("F8", 0.4).order == 8
    assert filter_by_name("F10", 0.4).order == 10
    assert filter_by_name("F12", 0.4).order == 12


def test_filter_kills_nyquist_mode():
    n = 40
    spec = filter_by_name("F12", 0.4)
    filt = FilterOperator(spec, n)
    nyquist = np.cos(np.pi * np.arange(n))
    assert np.max(np.abs(filt.apply_array(nyquist))) < 1e-12


def test_filter_preserves_constants_and_means():
    n = 40
    filt = FilterOperator(filter_by_name("F10", 0.2), n)
    const = np.full(n, 3.0)
    assert np.max(np.abs(filt.apply_array(const) - 3.0)) < 1e-12
    rng = np.random.default_rng(3)
    v = rng.normal(size=n)
    assert abs(np.sum(filt.apply_array(v)) - np.sum(v)) < 1e-10


def test_filter_never_amplifies_any_mode():
    n = 64
    for name in ("F8", "F10", "F12"):
        for af in (0.0, 0.2, -0.2, 0.4, -0.4):
            filt = FilterOperator(filter_by_name(name, af), n)
            gain = np.abs(np.fft.fft(filt.apply_array(np.eye(n)[:, 0])))
            assert np.max(gain) <= 1.0 + 1e-12


def test_filter_alpha_range_enforced():
    with pytest.raises(ValueError):
        derive_filter(4, 0.5)


def test_unknown_filter_name():
    with pytest.raises(exact.UnknownSchemeError):
        filter_by_name("F99", 0.4)


def test_dual_filter_applies_per_sequence():
    n = 32
    filt = FilterOperator(filter_by_name("F12", 0.4), n)
    rng = np.random.default_rng(11)
    f = DualGridFunction(rng.normal(size=n), rng.normal(size=n), 0.1)
    out = filt.apply_dual(f)
    assert np.allclose(out.node_values, filt.apply_array(f.node_values))
    assert np.allclose(out.center_values, filt.apply_array(f.center_values))

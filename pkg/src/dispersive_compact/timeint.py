"""Three-stage TVD Runge-Kutta stepping and its linear stability region."""

from __future__ import annotations

import numpy as np

from .operators import DualGridFunction, GridFunction


class DivergenceError(FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


def _values(state):
    if isinstance(state, GridFunction):
        return (state.values,)
    if isinstance(state, DualGridFunction):
        return (state.node_values, state.center_values)
    return (np.asarray(state),)


def _rebuild(state, arrays):
    if isinstance(state, GridFunction):
        return GridFunction(arrays[0], state.h, state.domain_start)
    if isinstance(state, DualGridFunction):
        return DualGridFunction(arrays[0], arrays[1], state.h, state.domain_start)
    return arrays[0]


def _combine(*weighted):
    """Linear combination of states: (w0, s0), (w1, s1), ..."""
    parts = [_values(s) for _, s in weighted]
    arrays = []
    for i in range(len(parts[0])):
        acc = sum(w * p[i] for (w, _), p in zip(weighted, parts))
        arrays.append(acc)
    return _rebuild(weighted[0][1], arrays)


def _check_finite(state, stage, step=None, time=None):
    for arr in _values(state):
        if not np.all(np.isfinite(arr)):
            raise DivergenceError(
                f"non-finite values in RK stage {stage}"
                + (f" at step {step}" if step is not None else ""),
                step=step,
                time=time,
            )


def tvdrk3_step(state, rhs_fn, dt, step_index=None, time=None):
    """One TVD-RK3 step: u1 = u + dt S(u); u2 = 3/4 u + 1/4 (u1 + dt S(u1));
    u_next = 1/3 u + 2/3 (u2 + dt S(u2))."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    u1 = _combine((1.0, state), (dt, rhs_fn(state)))
    _check_finite(u1, 1, step_index, time)
    u2 = _combine((0.75, state), (0.25, u1), (0.25 * dt, rhs_fn(u1)))
    _check_finite(u2, 2, step_index, time)
    out = _combine(
        (1.0 / 3.0, state), (2.0 / 3.0, u2), (2.0 / 3.0 * dt, rhs_fn(u2))
    )
    _check_finite(out, 3, step_index, time)
    return out


def rk3_amplification(z):
    """Linear amplification factor of the scheme: 1 + z + z^2/2 + z^3/6."""
    z = np.asarray(z, dtype=complex)
    return 1.0 + z + z * z / 2.0 + z * z * z / 6.0


def rk3_stability_contains(z) -> bool:
    """Whether z lies in the stability region |1 + z + z^2/2 + z^3/6| <= 1."""
    return bool(np.abs(rk3_amplification(z)) <= 1.0)

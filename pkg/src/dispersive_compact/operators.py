"""Application of compact derivative, interpolation and filter operators.

All data is periodic.  Node-only operators act on length-N arrays; dual
operators act on the interleaved fine grid of 2N points (nodes at even fine
indices, cell centers at odd fine indices) so that the half-shifted center
update is the same stencil applied one fine point over.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .banded import CyclicBandedSolver, SingularOperatorError  # noqa: F401


@dataclass(frozen=True)
class GridFunction:
    """Periodic samples on N nodes with spacing h."""

    values: np.ndarray
    h: float
    domain_start: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.h <= 0:
            raise ValueError("h must be positive")

    @property
    def n(self) -> int:
        return len(self.values)

    def nodes(self) -> np.ndarray:
        return self.domain_start + self.h * np.arange(self.n)


@dataclass(frozen=True)
class DualGridFunction:
    """Co-evolved node and center samples (centers at x_j + h/2)."""

    node_values: np.ndarray
    center_values: np.ndarray
    h: float
    domain_start: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "node_values", np.asarray(self.node_values, dtype=float))
        object.__setattr__(self, "center_values", np.asarray(self.center_values, dtype=float))
        if len(self.node_values) != len(self.center_values):
            raise ValueError("node/center length mismatch")

    @property
    def n(self) -> int:
        return len(self.node_values)

    def fine(self) -> np.ndarray:
        out = np.empty(2 * self.n)
        out[0::2] = self.node_values
        out[1::2] = self.center_values
        return out

    @classmethod
    def from_fine(cls, fine: np.ndarray, h: float, domain_start: float = 0.0):
        return cls(fine[0::2], fine[1::2], h, domain_start)

    def fine_points(self) -> np.ndarray:
        return self.domain_start + 0.5 * self.h * np.arange(2 * self.n)


def _tap_list(coeffs: exact.SchemeCoefficients, template: exact.SchemeTemplate):
    """Flattened (offset, weight) taps with the group coefficients applied."""
    slot_vals = coeffs.as_dict()
    taps: dict[int, float] = {}
    for group in template.rhs_groups:
        cv = float(slot_vals[group.slot])
        if cv == 0.0:
            continue
        for off, w in group.taps:
            taps[off] = taps.get(off, 0.0) + cv * float(w)
    return sorted(taps.items())


class CompactOperator:
    """A periodic compact operator lowered to double precision.

    ``apply`` accepts a GridFunction (node_only/center_only kinds) or a
    DualGridFunction (dual kind) and returns the same container type.
    """

    def __init__(self, scheme_id_or_pair, n: int, h: float):
        if isinstance(scheme_id_or_pair, str):
            template, coeffs = exact.builtin_scheme(scheme_id_or_pair)
        else:
            template, coeffs = scheme_id_or_pair
        template.validate()
        self.template = template
        self.coeffs = coeffs
        self.n = int(n)
        self.h = float(h)
        self.derivative_order = template.derivative_order
        self.grid_kind = template.grid_kind
        self.scheme_id = coeffs.family
        if n < template.max_offset:
            raise ValueError(
                f"N={n} too small for stencil half-width {template.max_offset} (h/2 units)"
            )
        self.taps = _tap_list(coeffs, template)
        self.solver = CyclicBandedSolver(
            self.n, float(coeffs.alpha), float(coeffs.beta)
        )
        self._scale = self.h ** (-self.derivative_order)
        self._dense: np.ndarray | None = None

    # -- raw array paths ----------------------------------------------------

    def _rhs_node(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros_like(values)
        for off, w in self.taps:
            out += w * np.roll(values, -(off // 2))
        return out * self._scale

    def _rhs_cross(self, values: np.ndarray, to_center: bool) -> np.ndarray:
        # taps at odd offsets read the opposite-parity sequence; the integer
        # shift depends on whether the output sits at nodes or centers
        out = np.zeros(len(values))
        for off, w in self.taps:
            shift = (off + 1) // 2 if to_center else (off - 1) // 2
            out += w * np.roll(values, -shift)
        return out * self._scale

    def _rhs_fine(self, fine: np.ndarray) -> np.ndarray:
        out = np.zeros_like(fine)
        for off, w in self.taps:
            out += w * np.roll(fine, -off)
        return out * self._scale

    def apply_array(self, values: np.ndarray) -> np.ndarray:
        """Operator action on a raw array (fine-grid array for dual kind)."""
        if self.grid_kind == "dual":
            if len(values) != 2 * self.n:
                raise ValueError("dual operator expects a fine array of length 2N")
            rhs = self._rhs_fine(values)
            out = np.empty_like(rhs)
            out[0::2] = self.solver.solve(rhs[0::2])
            out[1::2] = self.solver.solve(rhs[1::2])
            return out
        if len(values) != self.n:
            raise ValueError(f"expected {self.n} values, got {len(values)}")
        if self.grid_kind == "node_only":
            rhs = self._rhs_node(values)
        elif self.grid_kind == "center_only":
            to_center = self.derivative_order == 0
            rhs = self._rhs_cross(values, to_center=to_center)
        else:
            raise ValueError(f"unknown grid kind {self.grid_kind!r}")
        return self.solver.solve(rhs)

    # -- typed wrappers -----------------------------------------------------

    def apply(self, f):
        if self.grid_kind == "dual":
            if not isinstance(f, DualGridFunction):
                raise TypeError("dual operator needs a DualGridFunction")
            out = self.apply_array(f.fine())
            return DualGridFunction.from_fine(out, f.h, f.domain_start)
        if not isinstance(f, GridFunction):
            raise TypeError("node operator needs a GridFunction")
        return GridFunction(self.apply_array(f.values), f.h, f.domain_start)

    def dense_matrix(self) -> np.ndarray:
        """The full circulant A^{-1} B action, cached (also the fast path)."""
        if self._dense is None:
            size = 2 * self.n if self.grid_kind == "dual" else self.n
            eye = np.eye(size)
            cols = [self.apply_array(eye[:, j]) for j in range(size)]
            self._dense = np.column_stack(cols)
        return self._dense


def build_operator(scheme_id_or_pair, n: int, h: float) -> CompactOperator:
    return CompactOperator(scheme_id_or_pair, n, h)


def apply_third_derivative(op: CompactOperator, f: GridFunction) -> GridFunction:
    if op.derivative_order != 3:
        raise ValueError("operator is not a third derivative")
    return op.apply(f)


def apply_third_derivative_dual(op: CompactOperator, f: DualGridFunction) -> DualGridFunction:
    if op.derivative_order != 3 or op.grid_kind != "dual":
        raise ValueError("operator is not a dual third derivative")
    return op.apply(f)


def apply_first_derivative(op: CompactOperator, f):
    if op.derivative_order != 1:
        raise ValueError("operator is not a first derivative")
    return op.apply(f)


def interpolate_to_centers(ci_op: CompactOperator, f: GridFunction) -> GridFunction:
    """Midpoint values from node values via a catalogued CI scheme."""
    if ci_op.derivative_order != 0:
        raise ValueError("operator is not an interpolation")
    return ci_op.apply(f)


# ---------------------------------------------------------------------------
# low-pass spatial filter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterSpec:
    """Tridiagonal low-pass filter: transfer T(0)=1 and T(pi)=0 by construction."""

    alpha_f: float
    a_coeffs: tuple[float, ...]  # a_0 ... a_N
    order: int
    a_exact: tuple[Fraction, ...] = field(default=(), compare=False)

    @property
    def half_width(self) -> int:
        return len(self.a_coeffs) - 1

    def transfer(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        num = sum(
            a * np.cos(n * omega) for n, a in enumerate(self.a_coeffs)
        )
        return num / (1.0 + 2.0 * self.alpha_f * np.cos(omega))


def derive_filter(n_half_width: int, alpha_f: float) -> FilterSpec:
    """Filter coefficients of order 2*N on a 2N+1 point stencil.

    Taylor matching of degrees 0, 2, ..., 2N-2 plus annihilation of the
    Nyquist mode; solved exactly (alpha_f is taken as an exact rational).
    """
    if abs(alpha_f) >= 0.5:
        raise ValueError("|alpha_f| must be < 0.5")
    if n_half_width < 1:
        raise ValueError("half width must be >= 1")
    nh = n_half_width
    af = Fraction(alpha_f).limit_denominator(10**12)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    # moment conditions: sum a_n n^(2q) == LHS moment
    for q in range(nh):
        rows.append([Fraction(n) ** (2 * q) for n in range(nh + 1)])
        rhs.append(Fraction(1) + 2 * af if q == 0 else 2 * af)
    rows.append([Fraction(-1) ** n for n in range(nh + 1)])
    rhs.append(Fraction(0))
    a_exact = exact._solve_exact(rows, rhs)
    return FilterSpec(
        alpha_f=float(alpha_f),
        a_coeffs=tuple(float(a) for a in a_exact),
        order=2 * nh,
        a_exact=tuple(a_exact),
    )


FILTER_ORDERS = {"F8": 4, "F10": 5, "F12": 6}


def filter_by_name(name: str, alpha_f: float) -> FilterSpec:
    try:
        return derive_filter(FILTER_ORDERS[name], alpha_f)
    except KeyError:
        raise exact.UnknownSchemeError(name) from None


class FilterOperator:
    """Periodic application of a FilterSpec, with a cached cyclic solve."""

    def __init__(self, spec: FilterSpec, n: int):
        if n < 2 * spec.half_width + 1:
            raise ValueError(f"N={n} too small for filter width {spec.half_width}")
        self.spec = spec
        self.n = int(n)
        self.solver = CyclicBandedSolver(self.n, spec.alpha_f, 0.0)

    def apply_array(self, values: np.ndarray) -> np.ndarray:
        rhs = self.spec.a_coeffs[0] * values
        for k in range(1, len(self.spec.a_coeffs)):
            ak = self.spec.a_coeffs[k]
            rhs = rhs + 0.5 * ak * (np.roll(values, -k) + np.roll(values, k))
        return self.solver.solve(rhs)

    def apply(self, f: GridFunction) -> GridFunction:
        return GridFunction(self.apply_array(f.values), f.h, f.domain_start)

    def apply_dual(self, f: DualGridFunction) -> DualGridFunction:
        # node and center sequences are filtered independently, each being a
        # periodic sequence of spacing h
        return DualGridFunction(
            self.apply_array(f.node_values),
            self.apply_array(f.center_values),
            f.h,
            f.domain_start,
        )

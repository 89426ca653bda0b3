"""Fourier analysis of the compact schemes.

Modified wavenumbers, interpolation/filter transfer functions, bandwidth
resolving efficiency, least-squares coefficient optimization, circulant
eigenvalues and CFL bounds.

Conventions: for a derivative operator of odd order d acting on e^{ikx} the
per-mode factor is (i)^d psi(w) / h^d with w = kh, so a third derivative gives
-i*psi/h^3 and a first derivative +i*psi/h, with psi(w) = w^d + O(w^{d+p}).
Dual (node+center) schemes are analyzed on the fine grid of spacing h/2; node
modes correspond to w in [0, pi], the full fine spectrum extends the same trig
formulas beyond pi.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .banded import SingularOperatorError


def _flatten_taps(template: exact.SchemeTemplate,
                  coeffs: exact.SchemeCoefficients) -> dict[int, Fraction]:
    """Taps (fine h/2 offsets) with group coefficients multiplied in, exact."""
    vals = coeffs.as_dict()
    taps: dict[int, Fraction] = {}
    for group in template.rhs_groups:
        cv = vals[group.slot]
        if cv == 0:
            continue
        for off, w in group.taps:
            taps[off] = taps.get(off, Fraction(0)) + cv * w
    return taps


@dataclass(frozen=True)
class SchemeSymbol:
    """Evaluable Fourier symbol of one scheme (optionally CI-composed)."""

    scheme_id: str
    derivative_order: int
    grid_kind: str
    taps: tuple[tuple[int, Fraction], ...]
    alpha: Fraction
    beta: Fraction
    formal_order: int
    transfer: "SchemeSymbol | None" = None  # interpolation factor (CI variants)

    def denominator(self, omega):
        omega = np.asarray(omega, dtype=float)
        return (1.0 + 2.0 * float(self.alpha) * np.cos(omega)
                + 2.0 * float(self.beta) * np.cos(2.0 * omega))

    def _num_parts(self, omega):
        omega = np.asarray(omega, dtype=float)
        even = np.zeros_like(omega)
        odd = np.zeros_like(omega)
        for m, w in self.taps:
            if m <= 0:
                continue
            term = 2.0 * float(w) * np.sin(0.5 * m * omega)
            if m % 2 == 0:
                even = even + term
            else:
                odd = odd + term
        return even, odd

    def psi(self, omega):
        """Scaled modified wavenumber psi(w); w may exceed pi for fine modes."""
        if self.derivative_order % 2 == 0:
            raise ValueError("psi is defined for odd derivative orders")
        omega = np.asarray(omega, dtype=float)
        den = self.denominator(omega)
        if den.size and np.min(np.abs(den)) < 1e-14:
            raise SingularOperatorError(
                f"denominator of {self.scheme_id} vanishes in the requested range"
            )
        even, odd = self._num_parts(omega)
        sign = -1.0 if self.derivative_order % 4 == 3 else 1.0
        out = sign * (even + odd) / den
        if self.transfer is not None:
            out = out * self.transfer.transfer_function(omega)
        return out

    def transfer_function(self, omega):
        """Real per-mode amplitude T(w) of an interpolation (d = 0) scheme."""
        if self.derivative_order != 0:
            raise ValueError("transfer function requires derivative order 0")
        omega = np.asarray(omega, dtype=float)
        num = np.zeros_like(omega)
        for m, w in self.taps:
            if m == 0:
                num = num + float(w)
            elif m > 0:
                num = num + 2.0 * float(w) * np.cos(0.5 * m * omega)
        return num / self.denominator(omega)

    def psi_mp(self, omega):
        """Arbitrary-precision psi for tiny-w truncation studies."""
        import mpmath as mp

        w = mp.mpf(omega)
        den = (1 + 2 * mp.mpf(self.alpha.numerator) / self.alpha.denominator
               * mp.cos(w)
               + 2 * mp.mpf(self.beta.numerator) / self.beta.denominator
               * mp.cos(2 * w))
        even = mp.mpf(0)
        odd = mp.mpf(0)
        for m, c in self.taps:
            if m <= 0:
                continue
            term = 2 * mp.mpf(c.numerator) / c.denominator * mp.sin(m * w / 2)
            if m % 2 == 0:
                even += term
            else:
                odd += term
        sign = -1 if self.derivative_order % 4 == 3 else 1
        out = sign * (even + odd) / den
        if self.transfer is not None:
            tnum = mp.mpf(0)
            tsym = self.transfer
            for m, c in tsym.taps:
                if m == 0:
                    tnum += mp.mpf(c.numerator) / c.denominator
                elif m > 0:
                    tnum += 2 * mp.mpf(c.numerator) / c.denominator * mp.cos(m * w / 2)
            tden = (1 + 2 * mp.mpf(tsym.alpha.numerator) / tsym.alpha.denominator
                    * mp.cos(w)
                    + 2 * mp.mpf(tsym.beta.numerator) / tsym.beta.denominator
                    * mp.cos(2 * w))
            out *= tnum / tden
        return out


def _symbol_from_parts(scheme_id, template, coeffs, transfer=None) -> SchemeSymbol:
    taps = tuple(sorted(_flatten_taps(template, coeffs).items()))
    return SchemeSymbol(
        scheme_id=scheme_id,
        derivative_order=template.derivative_order,
        grid_kind=template.grid_kind,
        taps=taps,
        alpha=coeffs.alpha,
        beta=coeffs.beta,
        formal_order=coeffs.formal_order,
        transfer=transfer,
    )


_CI_FAMILIES = {
    # CI-composed analysis variants: centers supplied by the P10 compact
    # interpolation instead of independent evolution
    "TDCCCS-CI": "TDCCCS",
    "TDCCS-CI": "TDCCS",
    "TDCCS-CI-1": "TDCCS-1",
    "TDCCS-CI-2": "TDCCS-2",
    "TDCCS-CI-3": "TDCCS-3",
}

_LS_FAMILIES = {
    "TDCCS-LS": "TDCCS",
    "TDCCS-LS-1": "TDCCS-1",
    "TDCCS-LS-2": "TDCCS-2",
    "TDCCS-LS-3": "TDCCS-3",
}

_symbol_cache: dict[str, SchemeSymbol] = {}


def _ci_transfer_symbol() -> SchemeSymbol:
    template, coeffs = exact.builtin_scheme("CI-P10")
    return _symbol_from_parts("CI-P10", template, coeffs)


def scheme_symbol(scheme_id: str) -> SchemeSymbol:
    """Resolve any catalogued / derived / CI / LS scheme id to its symbol."""
    if scheme_id in _symbol_cache:
        return _symbol_cache[scheme_id]
    family, variant = exact.split_scheme_id(scheme_id)
    if family in _CI_FAMILIES:
        base_id = f"{_CI_FAMILIES[family]}-{variant}"
        template, coeffs = exact.builtin_scheme(base_id)
        sym = _symbol_from_parts(
            scheme_id, template, coeffs, transfer=_ci_transfer_symbol()
        )
    elif family in _LS_FAMILIES:
        coeffs = ls_optimize(_LS_FAMILIES[family], variant)
        template = exact.family_template(_LS_FAMILIES[family])
        sym = _symbol_from_parts(scheme_id, template, coeffs)
    else:
        template, coeffs = exact.builtin_scheme(scheme_id)
        sym = _symbol_from_parts(scheme_id, template, coeffs)
    _symbol_cache[scheme_id] = sym
    return sym


def analysis_scheme_ids() -> list[str]:
    """All scheme ids accepted by the spectral-analysis entry points."""
    ids = set(exact.catalogued_scheme_ids())
    for fam, base in {**_CI_FAMILIES, **_LS_FAMILIES}.items():
        for bid in exact.catalogued_scheme_ids():
            b_fam, variant = exact.split_scheme_id(bid)
            if b_fam == base:
                ids.add(f"{fam}-{variant}")
    return sorted(ids)


def modified_wavenumber(scheme_id: str, omega):
    """psi(w) for w in [0, pi] (fine-grid extension accepted beyond pi)."""
    return scheme_symbol(scheme_id).psi(omega)


def relative_factor(scheme_id: str, omega):
    """R(w) = psi(w)/w^3, extended by continuity to R(0) = 1."""
    sym = scheme_symbol(scheme_id)
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    out = np.ones_like(omega)
    nz = omega != 0.0
    out[nz] = sym.psi(omega[nz]) / omega[nz] ** sym.derivative_order
    return out[0] if scalar else out


@dataclass(frozen=True)
class EfficiencyResult:
    """Shortest well-resolved wavenumber and the efficiency e = w_f/pi."""

    omega_f: float
    e: float
    eps_t: float


def resolving_efficiency(scheme_id: str, eps_t: float, samples: int = 20000,
                         mode: str = "band_edge") -> EfficiencyResult:
    """Shortest well-resolved wavenumber w_f with |psi-w^3|/w^3 <= eps_t.

    ``band_edge`` (default) takes the largest w in tolerance: for optimized
    coefficients the error re-enters the tolerance band where psi - w^3
    changes sign, and the reported w_f sits at the upper band edge.
    ``strict`` instead demands the tolerance on all of (0, w*], i.e. stops at
    the first exceedance; the two agree whenever the error grows monotonely.
    Dense scan over (0, pi) followed by bisection to |dw| <= 1e-5.
    """
    if eps_t <= 0:
        raise ValueError("eps_t must be positive")
    if mode not in ("band_edge", "strict"):
        raise ValueError(f"unknown mode {mode!r}")
    sym = scheme_symbol(scheme_id)
    d = sym.derivative_order

    def err_precise(w):
        # the T6 schemes (alpha = -1/2) lose all float digits near w = 0, so
        # borderline points are confirmed in extended precision
        import mpmath as mp

        with mp.workdps(40):
            wv = mp.mpf(w)
            return float(abs(sym.psi_mp(wv) - wv ** d) / wv ** d)

    def refine(lo, hi):
        # invariant: lo in tolerance, hi out of tolerance
        while hi - lo > 1e-5:
            mid = 0.5 * (lo + hi)
            if err_precise(mid) > eps_t:
                hi = mid
            else:
                lo = mid
        return lo

    # midpoint grid: avoids w = pi exactly, where T4-type denominators vanish
    omega = (np.arange(1, samples + 1) - 0.5) * np.pi / samples
    err = np.abs(sym.psi(omega) - omega ** d) / omega ** d
    wf = float(omega[0])
    if mode == "strict":
        wf = np.pi
        for k in np.nonzero(err > eps_t)[0]:
            if omega[k] > 0.5 or err_precise(omega[k]) > eps_t:
                lo = float(omega[k - 1]) if k > 0 else float(omega[0])
                wf = refine(lo, float(omega[k]))
                break
    else:
        for k in np.nonzero(err <= eps_t)[0][::-1]:
            if omega[k] > 0.5 or err_precise(omega[k]) <= eps_t:
                if k == samples - 1:
                    wf = np.pi
                else:
                    wf = refine(float(omega[k]), float(omega[k + 1]))
                break
    return EfficiencyResult(omega_f=wf, e=wf / np.pi, eps_t=eps_t)


# ---------------------------------------------------------------------------
# least-squares coefficient optimization
# ---------------------------------------------------------------------------

_ls_cache: dict[tuple, exact.SchemeCoefficients] = {}


def _slot_numerator_bases(template: exact.SchemeTemplate, omega: np.ndarray):
    """Per-slot numerator basis N_s(w) = sum over group taps of 2 w sin(m w/2)."""
    bases = {}
    for group in template.rhs_groups:
        acc = np.zeros_like(omega)
        for m, w in group.taps:
            if m > 0:
                acc += 2.0 * float(w) * np.sin(0.5 * m * omega)
        bases[group.slot] = acc
    return bases


def ls_optimize(family: str = "TDCCS", variant: str = "T8", r: float = 1.0,
                quad_points: int = 400) -> exact.SchemeCoefficients:
    """Least-squares coefficients minimizing E = int (psi - w^3)^2 D^2 dw.

    The weighting D^2 cancels the denominator, so the integrand is a
    quadratic form in the coefficients.  The stationarity system sets the
    partial derivatives with respect to the stencil coefficients (a, b, c as
    retained by the variant) to zero, with the implicit coefficients (alpha,
    and beta for the pentadiagonal variant) tied to them by the retained
    low-order accuracy conditions.
    """
    if not (0.0 < r <= 1.0):
        raise ValueError("r must be in (0, 1]")
    key = (family, variant, r, quad_points)
    if key in _ls_cache:
        return _ls_cache[key]
    template = exact.family_template(family)
    if template.derivative_order != 3:
        raise ValueError("LS optimization targets third-derivative schemes")
    try:
        zero, _order = exact.VARIANT_CONSTRAINTS[variant]
    except KeyError:
        raise exact.UnknownSchemeError(f"{family}-{variant}") from None
    lhs_free = [u for u in ("alpha", "beta") if u not in zero]
    rhs_free = [u for u in ("a", "b", "c") if u not in zero]
    if not lhs_free:
        raise ValueError("LS variants must retain an implicit coefficient")
    conditions = exact.order_conditions(template, 2 * len(lhs_free))
    conditions = conditions[: len(lhs_free)]

    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    upper = r * np.pi
    omega = 0.5 * upper * (nodes + 1.0)
    wq = 0.5 * upper * weights
    d = template.derivative_order
    sign = -1.0 if d % 4 == 3 else 1.0
    nbases = _slot_numerator_bases(template, omega)
    lbases = {"alpha": 2.0 * np.cos(omega), "beta": 2.0 * np.cos(2.0 * omega)}
    target = omega ** d

    # residual (psi - w^d) * D = base + sum_u x_u * phi_u over all frees
    frees = rhs_free + lhs_free
    base = -target
    phi = {s: sign * nbases[s] for s in rhs_free}
    phi.update({lv: -target * lbases[lv] for lv in lhs_free})

    n = len(frees)
    mat = np.zeros((n, n))
    rvec = np.zeros(n)
    for i, s in enumerate(rhs_free):  # dE/dx_s = 0
        for j, u in enumerate(frees):
            mat[i, j] = np.sum(wq * phi[s] * phi[u])
        rvec[i] = -np.sum(wq * phi[s] * base)
    for i, eq in enumerate(conditions, start=len(rhs_free)):
        for j, u in enumerate(frees):
            mat[i, j] = float(eq[u])
        rvec[i] = -float(eq["const"])
    try:
        x = np.linalg.solve(mat, rvec)
    except np.linalg.LinAlgError as err:
        raise exact.DerivationError(f"singular LS stationarity system: {err}")

    vals = {u: Fraction(0) for u in exact.ALL_UNKNOWNS}
    for u, xv in zip(frees, x):
        vals[u] = Fraction(float(xv))
    order = 2 * len(lhs_free)  # only the eliminated conditions hold exactly
    ls_family = {v: k for k, v in _LS_FAMILIES.items()}[family]
    coeffs = exact.SchemeCoefficients(
        family=f"{ls_family}-{variant}", formal_order=order, **vals
    )
    _ls_cache[key] = coeffs
    return coeffs


def ls_misfit(family: str, coeffs: exact.SchemeCoefficients, r: float = 1.0,
              quad_points: int = 400) -> float:
    """E of Eq-form int_0^{r pi} (psi - w^3)^2 D^2 dw for given coefficients."""
    template = exact.family_template(family)
    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    upper = r * np.pi
    omega = 0.5 * upper * (nodes + 1.0)
    wq = 0.5 * upper * weights
    sym = _symbol_from_parts("tmp", template, coeffs)
    d = template.derivative_order
    resid = (sym.psi(omega) - omega ** d) * sym.denominator(omega)
    return float(np.sum(wq * resid * resid))


# ---------------------------------------------------------------------------
# circulant spectra and CFL bounds
# ---------------------------------------------------------------------------

def circulant_eigenvalues(scheme_id: str, n: int) -> np.ndarray:
    """Eigenvalues of the scaled operator h^d A^{-1} B via DFT of its rows.

    Dual schemes are analyzed as the combined fine-grid circulant of size 2N.
    """
    sym = scheme_symbol(scheme_id)
    if sym.transfer is not None:
        raise ValueError("CI-composed symbols have no standalone circulant")
    family, variant = exact.split_scheme_id(scheme_id)
    if family in _LS_FAMILIES:
        template = exact.family_template(_LS_FAMILIES[family])
        coeffs = ls_optimize(_LS_FAMILIES[family], variant)
    else:
        template, coeffs = exact.builtin_scheme(scheme_id)
    if template.max_offset > (2 * n if sym.grid_kind == "dual" else n):
        raise ValueError(f"N={n} below the stencil span")
    size = 2 * n if sym.grid_kind == "dual" else n
    row_b = np.zeros(size)
    row_a = np.zeros(size)
    divisor = 1 if sym.grid_kind == "dual" else 2
    for m, w in sym.taps:
        if sym.grid_kind != "dual" and m % 2 != 0:
            # cross-parity taps: the center sequence occupies the same index
            # range; offsets round toward the output parity
            shift = (m + 1) // 2 if template.derivative_order == 0 else (m - 1) // 2
            row_b[shift % size] += float(w)
            continue
        row_b[(m // divisor) % size] += float(w)
    for off, slot in template.lhs_offsets:
        val = {"one": 1.0, "alpha": float(coeffs.alpha), "beta": float(coeffs.beta)}[slot]
        row_a[(off // divisor) % size] += val
    fa = np.fft.fft(row_a)
    if np.min(np.abs(fa)) < 1e-12:
        raise SingularOperatorError(
            f"implicit circulant of {scheme_id} is singular at N={size}"
        )
    return np.fft.fft(row_b) / fa


IMAG_AXIS_LIMIT_TVDRK3 = 1.732


def max_stable_timestep(scheme_id: str, integrator: str = "TVDRK3",
                        n: int = 1024) -> float:
    """Bound on dt/dx^d from the integrator's imaginary-axis extent."""
    if integrator != "TVDRK3":
        raise ValueError(f"unknown integrator {integrator!r}")
    lam = circulant_eigenvalues(scheme_id, n)
    return IMAG_AXIS_LIMIT_TVDRK3 / float(np.max(np.abs(lam)))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

SPECTRUM_HEADER = ["omega", "psi", "omega_cubed", "R"]


def write_spectrum_csv(path, scheme_id: str, samples: int = 400) -> None:
    """Symbol curve w, psi(w), w^3, R(w) over (0, pi]."""
    omega = np.linspace(np.pi / samples, np.pi, samples)
    psi = modified_wavenumber(scheme_id, omega)
    rel = relative_factor(scheme_id, omega)
    d = scheme_symbol(scheme_id).derivative_order
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRUM_HEADER)
        for row in zip(omega, psi, omega ** d, rel):
            writer.writerow([f"{v:.12g}" for v in row])

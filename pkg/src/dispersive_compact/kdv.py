"""Periodic KdV-type problems  u_t + g(u)_x + eps*u_xxx = 0  and their
semidiscrete / fully discrete solution, error norms and convergence studies.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import exact, spectral
from .operators import (
    CompactOperator,
    DualGridFunction,
    FilterOperator,
    GridFunction,
    filter_by_name,
)
from .timeint import DivergenceError, tvdrk3_step

THREADS_ENV = "DISPERSIVE_COMPACT_THREADS"


def _sech(x):
    # np.cosh overflows harmlessly for large |x|; 1/cosh underflows to 0
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x)


@dataclass(frozen=True)
class KdvProblem:
    """One periodic initial-value problem with optional exact solution."""

    name: str
    x_lo: float
    x_hi: float
    g_flux: object  # u -> g(u), vectorized
    g_prime: object  # u -> g'(u), for the convective time-step guard
    g_tag: str  # "zero", "-3u^2", "u^2/2"
    epsilon: float
    initial: object  # x -> u0(x)
    exact: object | None  # (x, t) -> u, or None
    t_final: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x_hi <= self.x_lo:
            raise ValueError("x_hi must exceed x_lo")

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo


def _linear(c=1.0):
    c = float(c)
    return KdvProblem(
        name="linear",
        x_lo=0.0, x_hi=2.0 * np.pi,
        g_flux=lambda u: np.zeros_like(u),
        g_prime=lambda u: np.zeros_like(u),
        g_tag="zero",
        epsilon=c ** -2,
        initial=lambda x: np.sin(c * x),
        exact=lambda x, t: np.sin(c * (x + t)),
        t_final=1.0,
        params={"c": c},
    )


def _soliton():
    return KdvProblem(
        name="soliton",
        x_lo=-10.0, x_hi=12.0,
        g_flux=lambda u: -3.0 * u * u,
        g_prime=lambda u: -6.0 * u,
        g_tag="-3u^2",
        epsilon=1.0,
        initial=lambda x: -2.0 * _sech(x) ** 2,
        exact=lambda x, t: -2.0 * _sech(x - 4.0 * t) ** 2,
        t_final=0.5,
    )


def _burgers_flux():
    return (lambda u: 0.5 * u * u), (lambda u: u), "u^2/2"


def _single_soliton(c=0.3, eps=5e-4, x0=0.5):
    c, eps, x0 = float(c), float(eps), float(x0)
    k = 0.5 * math.sqrt(c / eps)
    g, gp, tag = _burgers_flux()
    return KdvProblem(
        name="single_soliton",
        x_lo=0.0, x_hi=2.0,
        g_flux=g, g_prime=gp, g_tag=tag,
        epsilon=eps,
        initial=lambda x: 3.0 * c * _sech(k * (x - x0)) ** 2,
        exact=lambda x, t: 3.0 * c * _sech(k * (x - x0 - c * t)) ** 2,
        t_final=3.0,
        params={"c": c, "eps": eps, "x0": x0, "k": k},
    )


def _double_soliton(c1=0.3, c2=0.1, x1=0.4, x2=0.8, eps=4.84e-4):
    c1, c2, x1, x2, eps = map(float, (c1, c2, x1, x2, eps))
    k1 = 0.5 * math.sqrt(c1 / eps)
    k2 = 0.5 * math.sqrt(c2 / eps)
    g, gp, tag = _burgers_flux()
    return KdvProblem(
        name="double_soliton",
        x_lo=0.0, x_hi=2.0,
        g_flux=g, g_prime=gp, g_tag=tag,
        epsilon=eps,
        initial=lambda x: (3.0 * c1 * _sech(k1 * (x - x1)) ** 2
                           + 3.0 * c2 * _sech(k2 * (x - x2)) ** 2),
        exact=None,
        t_final=4.0,
        params={"c1": c1, "c2": c2, "x1": x1, "x2": x2, "eps": eps},
    )


def _triple_soliton(eps=1e-4):
    eps = float(eps)
    g, gp, tag = _burgers_flux()
    return KdvProblem(
        name="triple_soliton",
        x_lo=0.0, x_hi=3.0,
        g_flux=g, g_prime=gp, g_tag=tag,
        epsilon=eps,
        initial=lambda x: (2.0 / 3.0) * _sech((x - 1.0) / math.sqrt(108.0 * eps)) ** 2,
        exact=None,
        t_final=4.0,
        params={"eps": eps},
    )


def _dispersion_limit(eps=1e-4):
    eps = float(eps)
    g, gp, tag = _burgers_flux()
    return KdvProblem(
        name="dispersion_limit",
        x_lo=0.0, x_hi=1.0,
        g_flux=g, g_prime=gp, g_tag=tag,
        epsilon=eps,
        initial=lambda x: 2.0 + 0.5 * np.sin(2.0 * np.pi * x),
        exact=None,
        t_final=0.5,
        params={"eps": eps},
    )


def _tophat(eps=1e-4):
    eps = float(eps)
    g, gp, tag = _burgers_flux()
    return KdvProblem(
        name="tophat",
        x_lo=0.0, x_hi=5.0,
        g_flux=g, g_prime=gp, g_tag=tag,
        epsilon=eps,
        initial=lambda x: np.where((x > 0.25) & (x < 4.0), 1.0, 0.0),
        exact=None,
        t_final=0.05,
        params={"eps": eps},
    )


_PRESETS = {
    "linear": _linear,
    "soliton": _soliton,
    "single_soliton": _single_soliton,
    "double_soliton": _double_soliton,
    "triple_soliton": _triple_soliton,
    "dispersion_limit": _dispersion_limit,
    "tophat": _tophat,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def make_problem(preset: str, **params) -> KdvProblem:
    try:
        factory = _PRESETS[preset]
    except KeyError:
        raise KeyError(
            f"unknown preset {preset!r}; valid: {', '.join(preset_names())}"
        ) from None
    return factory(**params)


# ---------------------------------------------------------------------------
# spatial discretization
# ---------------------------------------------------------------------------

_FAMILY_OPS = {
    # family -> (third-derivative scheme, first-derivative scheme)
    "TDCNCS": ("TDCNCS-T8", "CNCS-T8"),
    "TDCCS": ("TDCCS-T8", "CCS-T8"),
}

DENSE_LIMIT = 4096  # circulant sizes up to this use a cached dense matrix


class Discretization:
    """Operators of one scheme family on a fixed periodic grid.

    The TDCNCS family holds node values only; TDCCS co-evolves node and
    center values on the interleaved fine grid.
    """

    def __init__(self, family: str, n: int, length: float, x_lo: float = 0.0,
                 third_scheme: str | None = None, first_scheme: str | None = None):
        if family not in _FAMILY_OPS:
            raise KeyError(f"unknown family {family!r}; valid: TDCNCS, TDCCS")
        self.family = family
        self.n = int(n)
        self.h = length / n
        self.x_lo = float(x_lo)
        d3_id, d1_id = _FAMILY_OPS[family]
        self.third_scheme = third_scheme or d3_id
        self.first_scheme = first_scheme or d1_id
        self.d3_op = CompactOperator(self.third_scheme, n, self.h)
        self.d1_op = CompactOperator(self.first_scheme, n, self.h)
        if self.d3_op.grid_kind != self.d1_op.grid_kind:
            raise ValueError("first/third derivative grid kinds disagree")
        self.dual = self.d3_op.grid_kind == "dual"
        size = 2 * n if self.dual else n
        if size <= DENSE_LIMIT:
            self._d3 = self.d3_op.dense_matrix()
            self._d1 = self.d1_op.dense_matrix()
        else:
            self._d3 = self._d1 = None

    def nodes(self) -> np.ndarray:
        return self.x_lo + self.h * np.arange(self.n)

    def fine_points(self) -> np.ndarray:
        return self.x_lo + 0.5 * self.h * np.arange(2 * self.n)

    def third(self, values: np.ndarray) -> np.ndarray:
        if self._d3 is not None:
            return self._d3 @ values
        return self.d3_op.apply_array(values)

    def first(self, values: np.ndarray) -> np.ndarray:
        if self._d1 is not None:
            return self._d1 @ values
        return self.d1_op.apply_array(values)

    def initial_state(self, problem: KdvProblem):
        """Sample u0 directly (centers sampled, never interpolated)."""
        if self.dual:
            return problem.initial(self.fine_points())
        return problem.initial(self.nodes())

    def wrap(self, values: np.ndarray):
        if self.dual:
            return DualGridFunction.from_fine(values, self.h, self.x_lo)
        return GridFunction(values, self.h, self.x_lo)

    def node_values(self, values: np.ndarray) -> np.ndarray:
        return values[0::2] if self.dual else values


def semidiscrete_rhs(problem: KdvProblem, disc: Discretization,
                     values: np.ndarray) -> np.ndarray:
    """Rate  -(g(u))_x - eps * u_xxx  on the discretization's value layout."""
    rate = -problem.epsilon * disc.third(values)
    if problem.g_tag != "zero":
        flux = problem.g_flux(values)
        if not np.all(np.isfinite(flux)):
            raise DivergenceError("non-finite flux values")
        rate -= disc.first(flux)
    return rate


# ---------------------------------------------------------------------------
# run configuration and integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterConfig:
    name: str = "F12"  # F8 / F10 / F12
    alpha_f: float = 0.4
    every: int = 20

    def __post_init__(self):
        if self.every < 1:
            raise ValueError("filter cadence must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    dt_rule: str = "cfl_h3"  # cfl_h3 | half_h2 | h2 | fixed
    cfl: float = 0.01
    dt: float | None = None  # for dt_rule == "fixed"
    filter: FilterConfig | None = None
    record_every: int = 0  # 0: no history
    t_final: float | None = None  # None: problem default

    def timestep(self, h: float) -> float:
        if self.dt_rule == "cfl_h3":
            return self.cfl * h ** 3
        if self.dt_rule == "half_h2":
            return 0.5 * h * h
        if self.dt_rule == "h2":
            return h * h
        if self.dt_rule == "fixed":
            if self.dt is None or self.dt <= 0:
                raise ValueError("dt_rule 'fixed' needs a positive dt")
            return self.dt
        raise ValueError(f"unknown dt rule {self.dt_rule!r}")


@dataclass
class RunResult:
    problem: KdvProblem
    disc: Discretization
    state: object  # GridFunction or DualGridFunction
    t_final: float
    n_steps: int
    dt: float
    norms: tuple[float, float, float] | None  # (Linf, L1, L2) vs exact
    mass_initial: float
    mass_final: float
    mass_scale: float  # h * sum |u0|, the natural size of the mass
    history: list  # [(t, node_values array), ...] if recorded

    @property
    def mass_drift(self) -> float:
        scale = max(abs(self.mass_initial), self.mass_scale, 1e-30)
        return abs(self.mass_final - self.mass_initial) / scale


def _spectral_radius(scheme_id: str) -> float:
    return float(np.max(np.abs(spectral.circulant_eigenvalues(scheme_id, 256))))


def check_timestep(problem: KdvProblem, disc: Discretization, dt: float) -> None:
    """Warn when dt exceeds the dispersive or convective stability guard."""
    lam = _spectral_radius(disc.third_scheme)
    if problem.epsilon != 0.0:
        bound = spectral.IMAG_AXIS_LIMIT_TVDRK3 * disc.h ** 3 / (
            abs(problem.epsilon) * lam)
        if dt > bound * (1.0 + 1e-12):
            warnings.warn(
                f"dt={dt:.3e} exceeds the dispersive stability bound "
                f"{bound:.3e} for {disc.third_scheme}",
                stacklevel=2,
            )
    if problem.g_tag != "zero":
        u0 = disc.initial_state(problem)
        speed = float(np.max(np.abs(problem.g_prime(u0))))
        if speed > 0 and dt > 0.5 * disc.h / speed:
            warnings.warn(
                f"dt={dt:.3e} exceeds the convective guard "
                f"{0.5 * disc.h / speed:.3e}",
                stacklevel=2,
            )


def integrate(problem: KdvProblem, disc: Discretization,
              config: RunConfig) -> RunResult:
    t_final = problem.t_final if config.t_final is None else float(config.t_final)
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    values = np.asarray(disc.initial_state(problem), dtype=float)
    mass0 = disc.h * float(np.sum(disc.node_values(values)))
    mass_scale = disc.h * float(np.sum(np.abs(disc.node_values(values))))

    if t_final == 0.0:
        state = disc.wrap(values)
        norms = _norms_vs_exact(problem, disc, values, 0.0)
        return RunResult(problem, disc, state, 0.0, 0, 0.0, norms,
                         mass0, mass0, mass_scale, [])

    dt_nominal = config.timestep(disc.h)
    n_steps = max(1, round(t_final / dt_nominal))
    dt = t_final / n_steps
    check_timestep(problem, disc, dt)

    filt = None
    if config.filter is not None:
        spec = filter_by_name(config.filter.name, config.filter.alpha_f)
        filt = FilterOperator(spec, disc.n)

    def rhs(v):
        return semidiscrete_rhs(problem, disc, v)

    history = []
    if config.record_every:
        history.append((0.0, disc.node_values(values).copy()))
    t = 0.0
    try:
        for step in range(1, n_steps + 1):
            values = tvdrk3_step(values, rhs, dt, step_index=step, time=t)
            t = step * dt
            if filt is not None and step % config.filter.every == 0:
                if disc.dual:
                    values[0::2] = filt.apply_array(values[0::2])
                    values[1::2] = filt.apply_array(values[1::2])
                else:
                    values = filt.apply_array(values)
            if config.record_every and step % config.record_every == 0:
                history.append((t, disc.node_values(values).copy()))
    except DivergenceError as err:
        raise DivergenceError(
            f"{problem.name}: diverged at t={t:.6g} (step {err.step})",
            step=err.step, time=t,
        ) from None

    mass1 = disc.h * float(np.sum(disc.node_values(values)))
    norms = _norms_vs_exact(problem, disc, values, t_final)
    return RunResult(problem, disc, disc.wrap(values), t_final, n_steps, dt,
                     norms, mass0, mass1, mass_scale, history)


def _norms_vs_exact(problem, disc, values, t):
    if problem.exact is None:
        return None
    exact_vals = problem.exact(disc.nodes(), t)
    return error_norms(
        GridFunction(disc.node_values(values), disc.h, disc.x_lo),
        GridFunction(exact_vals, disc.h, disc.x_lo),
    )


def error_norms(numeric: GridFunction, exact_samples: GridFunction):
    """(Linf, L1, L2) with the wrapped-endpoint 1/(N+1) averaging."""
    if numeric.n != exact_samples.n:
        raise ValueError("length mismatch")
    diff = np.abs(numeric.values - exact_samples.values)
    # periodic tables count both x_0 and x_N = x_0 + L
    diff = np.concatenate([diff, diff[:1]])
    linf = float(np.max(diff))
    l1 = float(np.mean(diff))
    l2 = float(np.sqrt(np.mean(diff * diff)))
    return (linf, l1, l2)


def conserved_mass(state):
    """h * sum of values; dual states report node and center masses."""
    if isinstance(state, DualGridFunction):
        return (state.h * float(np.sum(state.node_values)),
                state.h * float(np.sum(state.center_values)))
    return state.h * float(np.sum(state.values))


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    problem_id: str
    scheme_id: str
    ns: list[int]
    errors: list[tuple[float, float, float]]  # (Linf, L1, L2) per N

    def rates(self):
        out = [(None, None, None)]
        for i in range(1, len(self.ns)):
            ratio = math.log(self.ns[i] / self.ns[i - 1])
            row = []
            for j in range(3):
                prev, cur = self.errors[i - 1][j], self.errors[i][j]
                row.append(math.log(prev / cur) / ratio if prev > 0 and cur > 0
                           else None)
            out.append(tuple(row))
        return out

    CSV_HEADER = ["N", "Linf", "L1", "L2", "rate_inf", "rate_1", "rate_2"]

    def rows(self):
        for n, errs, rates in zip(self.ns, self.errors, self.rates()):
            yield [n, *errs, *rates]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for row in self.rows():
                writer.writerow(
                    ["" if v is None else (v if isinstance(v, int) else f"{v:.6e}")
                     for v in row]
                )

    def to_json_dict(self) -> dict:
        return {
            "problem": self.problem_id,
            "scheme": self.scheme_id,
            "rows": [
                dict(zip(self.CSV_HEADER, row)) for row in self.rows()
            ],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")


def _study_worker(args):
    preset, params, family, n, config = args
    problem = make_problem(preset, **params)
    disc = Discretization(family, n, problem.length, problem.x_lo)
    result = integrate(problem, disc, config)
    if result.norms is None:
        raise ValueError(f"preset {preset!r} has no exact solution")
    return result.norms


def max_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def convergence_study(preset: str, family: str, ns: list[int],
                      config: RunConfig, params: dict | None = None,
                      parallel: bool = True) -> ConvergenceReport:
    if list(ns) != sorted(set(ns)):
        raise ValueError("Ns must be strictly increasing")
    params = dict(params or {})
    jobs = [(preset, params, family, n, config) for n in ns]
    workers = min(max_workers(), len(jobs))
    if parallel and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(_study_worker, jobs))
    else:
        errors = [_study_worker(job) for job in jobs]
    return ConvergenceReport(
        problem_id=preset, scheme_id=_FAMILY_OPS[family][0],
        ns=list(ns), errors=errors,
    )


# ---------------------------------------------------------------------------
# snapshot serialization
# ---------------------------------------------------------------------------

SNAPSHOT_HEADER = ["x", "u_numeric", "u_exact", "abs_error"]


def snapshot_to_csv(path, result: RunResult) -> None:
    disc, problem = result.disc, result.problem
    x = disc.nodes()
    u = disc.node_values(
        result.state.fine() if isinstance(result.state, DualGridFunction)
        else result.state.values
    )
    ue = problem.exact(x, result.t_final) if problem.exact is not None else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SNAPSHOT_HEADER)
        for i in range(len(x)):
            if ue is None:
                writer.writerow([f"{x[i]:.12g}", f"{u[i]:.12g}", "", ""])
            else:
                writer.writerow([
                    f"{x[i]:.12g}", f"{u[i]:.12g}", f"{ue[i]:.12g}",
                    f"{abs(u[i] - ue[i]):.12g}",
                ])

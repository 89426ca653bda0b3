"""Command-line front end: coefficient tables, spectra, resolving efficiency,
stability bounds, filter analysis, least-squares optimization, and the
experiment / convergence-study harness.  Emits CSV and JSON only.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import exact, kdv, spectral
from .banded import SingularOperatorError
from .operators import FILTER_ORDERS, filter_by_name
from .timeint import DivergenceError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exception (exit code 1)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# Per-command defaults.  argparse flags all default to None so that an
# explicitly passed flag can be told apart from an omitted one; the effective
# configuration is defaults <- config file <- explicit flags.
_DEFAULTS = {
    "coeffs": {"scheme": "TDCCS-T8", "format": "text", "out": None},
    "spectrum": {"scheme": "TDCCS-T8", "samples": 400, "out": None},
    "efficiency": {
        "schemes": "all", "eps": 1e-3, "mode": "band_edge", "out": None,
    },
    "stability": {
        "scheme": "TDCCS-T8", "n": 1024, "integrator": "TVDRK3", "out": None,
    },
    "filter-analyze": {
        "name": "F12", "alpha_f": 0.4, "samples": 400, "out": None,
    },
    "ls-optimize": {
        "family": "TDCCS", "variant": "T8", "r": 1.0, "format": "text",
        "out": None,
    },
    "run": {
        "example": "linear", "c": None, "eps": None, "x0": None,
        "scheme": "TDCNCS", "order": 8, "n": 100, "t_final": None,
        "dt_rule": "cfl_h3", "cfl": 0.01, "dt": None, "filter": None,
        "snapshot": None, "out": None, "seed": None,
    },
    "converge": {
        "example": "linear", "c": None, "eps": None, "x0": None,
        "scheme": "TDCNCS", "order": 8, "ns": "10,20,30,40",
        "dt_rule": "cfl_h3", "cfl": 0.01, "dt": None, "filter": None,
        "t_final": None, "out": None, "json": None, "serial": None,
        "seed": None,
    },
}


def build_parser() -> _Parser:
    parser = _Parser(prog="dispersive-compact", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def cmd(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--dump-config", metavar="PATH",
                       help="write the effective config as JSON and exit")
        return p

    p = cmd("coeffs", "print exact scheme coefficients")
    p.add_argument("--scheme")
    p.add_argument("--format", choices=["text", "json"])
    p.add_argument("--out", help="output file (default stdout)")

    p = cmd("spectrum", "modified-wavenumber table as CSV")
    p.add_argument("--scheme")
    p.add_argument("--samples", type=int)
    p.add_argument("--out")

    p = cmd("efficiency", "resolving-efficiency table as CSV")
    p.add_argument("--schemes", help="comma list of scheme ids, or 'all'")
    p.add_argument("--eps", type=float, help="tolerance eps_t")
    p.add_argument("--mode", choices=["band_edge", "strict"])
    p.add_argument("--out")

    p = cmd("stability", "spectral radius and CFL bound")
    p.add_argument("--scheme")
    p.add_argument("--n", type=int)
    p.add_argument("--integrator", choices=["TVDRK3"])
    p.add_argument("--out")

    p = cmd("filter-analyze", "filter transfer function as CSV")
    p.add_argument("--name", choices=sorted(FILTER_ORDERS))
    p.add_argument("--alpha-f", dest="alpha_f", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--out")

    p = cmd("ls-optimize", "least-squares optimized coefficients")
    p.add_argument("--family")
    p.add_argument("--variant")
    p.add_argument("--r", type=float, help="integration range as fraction of pi")
    p.add_argument("--format", choices=["text", "json"])
    p.add_argument("--out")

    def experiment_flags(p):
        p.add_argument("--example", help="problem preset")
        p.add_argument("--c", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--x0", type=float)
        p.add_argument("--scheme", help="family: tdcncs or tdccs")
        p.add_argument("--order", type=int)
        p.add_argument("--dt-rule", dest="dt_rule",
                       choices=["cfl_h3", "half_h2", "h2", "fixed"])
        p.add_argument("--cfl", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--filter", help="NAME:ALPHA_F:EVERY, e.g. F12:0.4:20")
        p.add_argument("--t-final", dest="t_final", type=float)
        p.add_argument("--seed", type=int)

    p = cmd("run", "integrate one experiment")
    experiment_flags(p)
    p.add_argument("--N", dest="n", type=int)
    p.add_argument("--snapshot", help="final-state CSV path")
    p.add_argument("--out", help="summary JSON path (default stdout)")

    p = cmd("converge", "convergence study over a list of N")
    experiment_flags(p)
    p.add_argument("--Ns", dest="ns", help="comma list, e.g. 10,20,30,40")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--json", help="also write the report as JSON here")
    p.add_argument("--serial", action="store_const", const=True,
                   help="disable per-N parallelism")

    return parser


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise UsageError(
            f"{path}: JSON parse error at line {err.lineno} column {err.colno}"
        ) from None
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    return doc


def effective_config(command: str, args: argparse.Namespace) -> dict:
    defaults = _DEFAULTS[command]
    cfg = dict(defaults)
    if args.config:
        file_cfg = load_config(args.config)
        unknown = sorted(set(file_cfg) - set(defaults))
        if unknown:
            raise UsageError(
                f"unknown config key(s) {', '.join(unknown)}; "
                f"valid: {', '.join(sorted(defaults))}"
            )
        cfg.update(file_cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def dump_config(cfg: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_rows(path, header, rows):
    fh, close = _open_out(path)
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if close:
            fh.close()


def _coeff_doc(coeffs: exact.SchemeCoefficients) -> dict:
    return coeffs.to_json_dict()


def _emit_coeffs(cfg, coeffs):
    if cfg["format"] == "json":
        fh, close = _open_out(cfg["out"])
        try:
            json.dump(_coeff_doc(coeffs), fh, indent=2)
            fh.write("\n")
        finally:
            if close:
                fh.close()
        return
    fh, close = _open_out(cfg["out"])
    try:
        fh.write(f"{coeffs.family} (formal order {coeffs.formal_order})\n")
        for name, val in coeffs.as_dict().items():
            fh.write(f"  {name} = {val} = {float(val):+.12e}\n")
    finally:
        if close:
            fh.close()


def _known_schemes_note() -> str:
    ids = exact.catalogued_scheme_ids()
    return "valid schemes: " + ", ".join(sorted(ids))


def _cmd_coeffs(cfg) -> int:
    _, coeffs = exact.builtin_scheme(cfg["scheme"])
    _emit_coeffs(cfg, coeffs)
    return EXIT_OK


def _cmd_spectrum(cfg) -> int:
    symbol = spectral.scheme_symbol(cfg["scheme"])
    omega = np.linspace(0.0, np.pi, int(cfg["samples"]), endpoint=False)
    omega = omega[1:] if omega[0] == 0.0 else omega
    psi = symbol.psi(omega)
    factor = spectral.relative_factor(cfg["scheme"], omega)
    rows = [
        [f"{w:.10g}", f"{p:.12e}", f"{w ** 3:.12e}", f"{r:.12e}"]
        for w, p, r in zip(omega, psi, factor)
    ]
    _write_rows(cfg["out"], spectral.SPECTRUM_HEADER, rows)
    return EXIT_OK


def _cmd_efficiency(cfg) -> int:
    ids = (sorted(spectral.analysis_scheme_ids()) if cfg["schemes"] == "all"
           else [s.strip() for s in str(cfg["schemes"]).split(",") if s.strip()])
    rows = []
    for sid in ids:
        res = spectral.resolving_efficiency(
            sid, eps_t=float(cfg["eps"]), mode=cfg["mode"]
        )
        rows.append([sid, f"{res.omega_f:.4f}", f"{res.e:.4f}"])
    _write_rows(cfg["out"], ["scheme", "omega_f", "e"], rows)
    return EXIT_OK


def _cmd_stability(cfg) -> int:
    lam = spectral.circulant_eigenvalues(cfg["scheme"], int(cfg["n"]))
    radius = float(np.max(np.abs(lam)))
    doc = {
        "scheme": cfg["scheme"],
        "n": int(cfg["n"]),
        "integrator": cfg["integrator"],
        "max_eigenvalue_modulus": radius,
        "imag_axis_limit": spectral.IMAG_AXIS_LIMIT_TVDRK3,
        "cfl_bound": spectral.IMAG_AXIS_LIMIT_TVDRK3 / radius,
    }
    fh, close = _open_out(cfg["out"])
    try:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_filter_analyze(cfg) -> int:
    spec = filter_by_name(cfg["name"], float(cfg["alpha_f"]))
    omega = np.linspace(0.0, np.pi, int(cfg["samples"]))
    transfer = spec.transfer(omega)
    rows = [[f"{w:.10g}", f"{t:.12e}"] for w, t in zip(omega, transfer)]
    _write_rows(cfg["out"], ["omega", "T"], rows)
    return EXIT_OK


def _cmd_ls_optimize(cfg) -> int:
    coeffs = spectral.ls_optimize(
        family=cfg["family"], variant=cfg["variant"], r=float(cfg["r"])
    )
    _emit_coeffs(cfg, coeffs)
    return EXIT_OK


def parse_filter_flag(text: str) -> kdv.FilterConfig:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(
            f"bad --filter value {text!r}; expected NAME:ALPHA_F:EVERY"
        )
    name, alpha_f, every = parts
    if name not in FILTER_ORDERS:
        raise UsageError(
            f"unknown filter {name!r}; valid: {', '.join(sorted(FILTER_ORDERS))}"
        )
    try:
        return kdv.FilterConfig(name, float(alpha_f), int(every))
    except ValueError as err:
        raise UsageError(f"bad --filter value {text!r}: {err}") from None


def _family_from_cfg(cfg) -> str:
    fam = str(cfg["scheme"]).upper()
    if fam not in ("TDCNCS", "TDCCS"):
        raise UsageError(
            f"unknown experiment scheme {cfg['scheme']!r}; valid: tdcncs, tdccs"
        )
    if int(cfg["order"]) != 8:
        raise UsageError("only --order 8 experiment schemes are available")
    return fam


def _problem_params(cfg) -> dict:
    params = {}
    if cfg["c"] is not None:
        params["c"] = cfg["c"]
    if cfg["eps"] is not None:
        params["eps"] = cfg["eps"]
    if cfg["x0"] is not None:
        params["x0"] = cfg["x0"]
    return params


def _run_config(cfg, record_every=0) -> kdv.RunConfig:
    filt = parse_filter_flag(cfg["filter"]) if cfg["filter"] else None
    return kdv.RunConfig(
        dt_rule=cfg["dt_rule"], cfl=float(cfg["cfl"]),
        dt=None if cfg["dt"] is None else float(cfg["dt"]),
        filter=filt, record_every=record_every,
        t_final=None if cfg["t_final"] is None else float(cfg["t_final"]),
    )


def _cmd_run(cfg) -> int:
    family = _family_from_cfg(cfg)
    try:
        problem = kdv.make_problem(cfg["example"], **_problem_params(cfg))
    except KeyError as err:
        raise UsageError(str(err.args[0])) from None
    except TypeError as err:
        raise UsageError(f"bad parameters for preset {cfg['example']!r}: {err}") from None
    disc = kdv.Discretization(family, int(cfg["n"]), problem.length, problem.x_lo)
    result = kdv.integrate(problem, disc, _run_config(cfg))
    if cfg["snapshot"]:
        kdv.snapshot_to_csv(cfg["snapshot"], result)
    summary = {
        "example": problem.name,
        "scheme": disc.third_scheme,
        "N": disc.n,
        "t_final": result.t_final,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "mass_initial": result.mass_initial,
        "mass_final": result.mass_final,
        "mass_drift": result.mass_drift,
    }
    if result.norms is not None:
        summary["Linf"], summary["L1"], summary["L2"] = result.norms
    fh, close = _open_out(cfg["out"])
    try:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_converge(cfg) -> int:
    family = _family_from_cfg(cfg)
    try:
        ns = [int(s) for s in str(cfg["ns"]).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --Ns value {cfg['ns']!r}") from None
    try:
        report = kdv.convergence_study(
            cfg["example"], family, ns, _run_config(cfg),
            params=_problem_params(cfg), parallel=not cfg["serial"],
        )
    except KeyError as err:
        raise UsageError(str(err.args[0])) from None
    if cfg["out"]:
        report.to_csv(cfg["out"])
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(report.CSV_HEADER)
        for row in report.rows():
            writer.writerow(
                ["" if v is None else (v if isinstance(v, int) else f"{v:.6e}")
                 for v in row]
            )
    if cfg["json"]:
        report.to_json(cfg["json"])
    return EXIT_OK


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "spectrum": _cmd_spectrum,
    "efficiency": _cmd_efficiency,
    "stability": _cmd_stability,
    "filter-analyze": _cmd_filter_analyze,
    "ls-optimize": _cmd_ls_optimize,
    "run": _cmd_run,
    "converge": _cmd_converge,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        cfg = effective_config(args.command, args)
        if args.dump_config:
            dump_config(cfg, args.dump_config)
            return EXIT_OK
        return _HANDLERS[args.command](cfg)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except exact.UnknownSchemeError as err:
        print(f"error: unknown scheme {err.args[0]!r}; {_known_schemes_note()}",
              file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, SingularOperatorError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

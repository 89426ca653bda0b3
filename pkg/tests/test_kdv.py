"""Problem presets, semidiscrete rates, integration, norms, studies."""

import math

import numpy as np
import pytest

from dispersive_compact import kdv
from dispersive_compact.operators import DualGridFunction, GridFunction


def test_preset_fields():
    p = kdv.make_problem("linear", c=8.0)
    assert p.epsilon == pytest.approx(1.0 / 64.0)
    assert p.x_hi == pytest.approx(2 * math.pi)
    x = np.array([0.1, 0.7])
    assert np.allclose(p.initial(x), np.sin(8 * x))
    assert np.allclose(p.exact(x, 0.25), np.sin(8 * (x + 0.25)))

    p = kdv.make_problem("soliton")
    assert (p.x_lo, p.x_hi) == (-10.0, 12.0)
    assert np.allclose(p.exact(np.array([0.0]), 0.0), [-2.0])

    p = kdv.make_problem("single_soliton")
    k = 0.5 * math.sqrt(0.3 / 5e-4)
    assert p.params["k"] == pytest.approx(k)
    assert p.initial(np.array([0.5]))[0] == pytest.approx(0.9)


def test_unknown_preset():
    with pytest.raises(KeyError):
        kdv.make_problem("nosuch")


def test_error_norm_examples():
    h = 1.0
    num = GridFunction(np.array([3.0, 4.0]), h)
    ref = GridFunction(np.array([0.0, 0.0]), h)
    # wrapped-endpoint convention over N+1 = 3 samples: diff = (3, 4, 3)
    linf, l1, l2 = kdv.error_norms(num, ref)
    assert linf == 4.0
    assert l1 == pytest.approx(10.0 / 3.0)
    assert l2 == pytest.approx(math.sqrt(34.0 / 3.0))
    same = kdv.error_norms(num, num)
    assert same == (0.0, 0.0, 0.0)
    shifted = kdv.error_norms(
        GridFunction(np.array([1.5, 1.5]), h), GridFunction(np.zeros(2), h)
    )
    assert shifted == (1.5, 1.5, 1.5)


def test_error_norms_length_mismatch():
    with pytest.raises(ValueError):
        kdv.error_norms(
            GridFunction(np.zeros(4), 1.0), GridFunction(np.zeros(5), 1.0)
        )


def test_semidiscrete_rhs_constant_is_zero():
    p = kdv.make_problem("soliton")
    d = kdv.Discretization("TDCNCS", 32, p.length, p.x_lo)
    rate = kdv.semidiscrete_rhs(p, d, np.full(32, 0.7))
    assert np.max(np.abs(rate)) < 1e-11


def test_semidiscrete_rhs_linear_case_analytic():
    c = 2.0
    p = kdv.make_problem("linear", c=c)
    d = kdv.Discretization("TDCNCS", 64, p.length, p.x_lo)
    x = d.nodes()
    rate = kdv.semidiscrete_rhs(p, d, np.sin(c * x))
    assert np.max(np.abs(rate - c * np.cos(c * x))) < 1e-8


def test_semidiscrete_rhs_conservative():
    p = kdv.make_problem("soliton")
    d = kdv.Discretization("TDCNCS", 48, p.length, p.x_lo)
    u = p.initial(d.nodes())
    rate = kdv.semidiscrete_rhs(p, d, u)
    assert abs(np.sum(rate)) < 48 * 1e-12 * np.max(np.abs(rate))


def test_zero_t_final_returns_sampled_ic():
    p = kdv.make_problem("soliton")
    d = kdv.Discretization("TDCCS", 32, p.length, p.x_lo)
    r = kdv.integrate(p, d, kdv.RunConfig(t_final=0.0))
    assert isinstance(r.state, DualGridFunction)
    assert np.array_equal(r.state.node_values, p.initial(d.nodes()))
    # fine-grid points may differ from nodes + h/2 by one ulp
    assert np.allclose(
        r.state.center_values, p.initial(d.nodes() + d.h / 2), rtol=1e-13
    )


def test_dual_centers_sampled_not_interpolated():
    p = kdv.make_problem("single_soliton")
    d = kdv.Discretization("TDCCS", 40, p.length, p.x_lo)
    values = d.initial_state(p)
    assert np.allclose(values[1::2], p.initial(d.nodes() + d.h / 2), rtol=1e-13)


def test_dt_rules():
    assert kdv.RunConfig(dt_rule="cfl_h3", cfl=0.01).timestep(0.1) == pytest.approx(1e-5)
    assert kdv.RunConfig(dt_rule="half_h2").timestep(0.2) == pytest.approx(0.02)
    assert kdv.RunConfig(dt_rule="h2").timestep(0.2) == pytest.approx(0.04)
    assert kdv.RunConfig(dt_rule="fixed", dt=3e-4).timestep(0.2) == 3e-4
    with pytest.raises(ValueError):
        kdv.RunConfig(dt_rule="fixed").timestep(0.1)
    with pytest.raises(ValueError):
        kdv.RunConfig(dt_rule="h4").timestep(0.1)


def test_timestep_guard_warns():
    p = kdv.make_problem("soliton")
    d = kdv.Discretization("TDCNCS", 40, p.length, p.x_lo)
    with pytest.warns(UserWarning):
        kdv.check_timestep(p, d, dt=1.0)


def test_linear_example_matches_table_row():
    p = kdv.make_problem("linear", c=1.0)
    d = kdv.Discretization("TDCNCS", 20, p.length, p.x_lo)
    r = kdv.integrate(p, d, kdv.RunConfig())
    assert r.norms[0] == pytest.approx(1.6089e-9, rel=0.1)


def test_filter_cadence_applied():
    p = kdv.make_problem("triple_soliton")
    d = kdv.Discretization("TDCNCS", 64, p.length, p.x_lo)
    cfg = kdv.RunConfig(
        dt_rule="half_h2", t_final=0.05,
        filter=kdv.FilterConfig("F12", 0.4, 5),
    )
    r = kdv.integrate(p, d, cfg)
    assert np.all(np.isfinite(r.state.values))


def test_filter_cadence_validated():
    with pytest.raises(ValueError):
        kdv.FilterConfig("F12", 0.4, 0)


def test_conserved_mass_examples():
    zero = GridFunction(np.zeros(10), 0.1)
    assert kdv.conserved_mass(zero) == 0.0
    const = GridFunction(np.full(10, 3.0), 0.1)  # field 3 on [0,1]
    assert kdv.conserved_mass(const) == pytest.approx(3.0)
    dual = DualGridFunction(np.ones(4), np.full(4, 2.0), 0.25)
    assert kdv.conserved_mass(dual) == (pytest.approx(1.0), pytest.approx(2.0))


def test_history_recording():
    p = kdv.make_problem("linear", c=1.0)
    d = kdv.Discretization("TDCNCS", 16, p.length, p.x_lo)
    r = kdv.integrate(p, d, kdv.RunConfig(t_final=0.05, record_every=10))
    assert len(r.history) >= 2
    assert r.history[0][0] == 0.0


def test_convergence_report_rates_and_serialization(tmp_path):
    report = kdv.ConvergenceReport(
        problem_id="linear", scheme_id="TDCNCS-T8",
        ns=[10, 20], errors=[(2.56e-3, 1e-3, 1e-3), (1e-5, 1e-5, 1e-5)],
    )
    rates = report.rates()
    assert rates[0] == (None, None, None)
    assert rates[1][0] == pytest.approx(math.log(256.0) / math.log(2.0))
    csv_path = tmp_path / "r.csv"
    report.to_csv(csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "N,Linf,L1,L2,rate_inf,rate_1,rate_2"
    assert lines[1].endswith(",,,")  # first row has empty rate cells
    json_path = tmp_path / "r.json"
    report.to_json(json_path)
    import json
    doc = json.loads(json_path.read_text())
    assert doc["scheme"] == "TDCNCS-T8"
    assert len(doc["rows"]) == 2


def test_convergence_study_serial_parallel_agree(monkeypatch):
    monkeypatch.setenv(kdv.THREADS_ENV, "2")
    cfg = kdv.RunConfig()
    serial = kdv.convergence_study(
        "linear", "TDCNCS", [10, 20], cfg, params={"c": 1.0}, parallel=False
    )
    parallel = kdv.convergence_study(
        "linear", "TDCNCS", [10, 20], cfg, params={"c": 1.0}, parallel=True
    )
    assert serial.errors == parallel.errors


def test_convergence_study_requires_increasing_ns():
    with pytest.raises(ValueError):
        kdv.convergence_study("linear", "TDCNCS", [20, 10], kdv.RunConfig())


def test_snapshot_csv(tmp_path):
    p = kdv.make_problem("linear", c=1.0)
    d = kdv.Discretization("TDCNCS", 16, p.length, p.x_lo)
    r = kdv.integrate(p, d, kdv.RunConfig(t_final=0.01))
    path = tmp_path / "snap.csv"
    kdv.snapshot_to_csv(path, r)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,u_numeric,u_exact,abs_error"
    assert len(lines) == 17


def test_unknown_family():
    with pytest.raises(KeyError):
        kdv.Discretization("TDXXX", 20, 1.0)

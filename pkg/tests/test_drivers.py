import math

import numpy as np
import pytest

from fracplaque.drivers import (
    CSV_HEADER,
    RunReport,
    SimConfig,
    compare_runs,
    exact_ode_report,
    run_direct,
    run_multiscale,
)
from fracplaque.errors import ConfigError, DomainError, NonConvergenceError
from fracplaque.frac_core import ode_exact_solution
from fracplaque.micro import OdeMicroModel

ODE = SimConfig(alpha=0.8, epsilon=5e-4, u0=1.0, dt=0.01, dT=1000.0, T=14000.0, trial=0.5)


# --- configuration -------------------------------------------------------------------


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError, match="dt must divide the unit period") as info:
        ODE.replace(dt=0.3)
    assert info.value.field == "dt"
    for field, value in [("alpha", 1.0), ("alpha", 0.0), ("dT", 2.5), ("T", 14500.0), ("tau", 0.0), ("epsilon", -1.0)]:
        with pytest.raises(ConfigError) as info:
            ODE.replace(**{field: value})
        assert info.value.field == field


def test_config_plaque_must_not_close_channel():
    with pytest.raises(ConfigError, match="u0"):
        SimConfig(model="ns", u0=2.0, b=2.0, T=80.0, dT=80.0, dt=0.05)


def test_direct_horizon_only_needs_dt():
    cfg = ODE.replace(method="direct", T=10.5, dT=1000.0)
    assert cfg.T == 10.5


def test_bound():
    assert ODE.bound() == pytest.approx(1.0 + 5e-4 * 14000**0.8 / math.gamma(1.8))


# --- multiscale --------------------------------------------------------------------


def test_multiscale_reference_row():
    rep = run_multiscale(ODE)
    exact = ode_exact_solution(14000.0, 0.8, 5e-4)[1]
    assert len(rep) == 15
    assert rep.t[-1] == 14000.0
    assert abs(rep.terminal - exact) == pytest.approx(3.941e-2, rel=0.15)
    assert np.all(np.diff(rep.slow) > 0)
    # the orbit of the ODE test averages to 2 for every slow value, up to O(dt)
    assert np.allclose(rep.reaction_avg[1:], 2.0, atol=1e-3)


def test_multiscale_zero_epsilon_keeps_u0():
    # from a fixed trial every macro step repeats the same periodic solve
    rep = run_multiscale(ODE.replace(epsilon=0.0, T=5000.0, warm_start=False))
    assert np.all(rep.slow == 1.0)
    assert np.all(rep.reaction_avg[1:] == rep.reaction_avg[1])
    assert np.all(rep.cycles[1:] == rep.cycles[1])


def test_multiscale_deterministic():
    cfg = ODE.replace(T=4000.0)
    a, b = run_multiscale(cfg), run_multiscale(cfg)
    assert np.array_equal(a.slow, b.slow)
    assert np.array_equal(a.cycles, b.cycles)


def test_multiscale_warm_start_saves_cycles():
    cfg = ODE.replace(T=5000.0)
    warm = run_multiscale(cfg)
    cold = run_multiscale(cfg.replace(warm_start=False))
    assert warm.cycles[1:].sum() < cold.cycles[1:].sum()


def test_multiscale_nonconvergence_has_macro_index():
    with pytest.raises(NonConvergenceError) as info:
        run_multiscale(ODE.replace(max_cycles=2, tau=1e-14))
    assert info.value.macro_index == 1
    assert len(info.value.residuals) == 2


def test_multiscale_residual_csvs(tmp_path):
    rep = run_multiscale(ODE.replace(T=3000.0), residual_dir=tmp_path)
    files = sorted(tmp_path.glob("residuals_*.csv"))
    assert len(files) == 3
    assert len(files[0].read_text().splitlines()) == rep.cycles[1] + 1


# --- direct ------------------------------------------------------------------------


def test_direct_zero_reaction_keeps_u0():
    model = OdeMicroModel(reaction_fn=lambda v, u: 0.0)
    rep = run_direct(ODE.replace(method="direct", T=3.0), model=model)
    assert np.all(rep.slow == 1.0)
    assert len(rep) == 301


def test_direct_ode_first_order():
    cfg = ODE.replace(method="direct", T=10.0, tau=1e-14)
    exact = ode_exact_solution(10.0, 0.8, 5e-4)[1]
    errs = [abs(run_direct(cfg.replace(dt=dt)).terminal - exact) for dt in (0.01, 0.005, 0.0025)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 1.0) <= 0.15)


def test_direct_record_every():
    rep = run_direct(ODE.replace(method="direct", T=2.0, record_every=30))
    assert list(rep.t) == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.0])


@pytest.mark.slow
def test_direct_ns_short_horizon_bound():
    cfg = SimConfig(
        model="ns", method="direct", alpha=0.6, epsilon=8e-4, u0=0.2, T=40.0, dt=0.05, dT=40.0, record_every=20
    )
    rep = run_direct(cfg)
    assert np.all(np.diff(rep.slow) > 0)
    assert rep.terminal <= cfg.bound()


# --- reports and comparison --------------------------------------------------------------


def test_report_csv_round_trip(tmp_path):
    rep = run_multiscale(ODE.replace(T=3000.0))
    path = rep.write_csv(tmp_path / "r.csv")
    assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    back = RunReport.read_csv(path)
    assert np.array_equal(back.t, rep.t)
    assert np.array_equal(back.slow, rep.slow)
    assert np.array_equal(back.reaction_avg, rep.reaction_avg, equal_nan=True)
    assert np.array_equal(back.cycles, rep.cycles)


def test_report_rejects_bad_csv(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DomainError):
        RunReport.read_csv(path)


def test_report_interpolates():
    rep = RunReport("x", [0.0, 10.0], [1.0, 3.0], [np.nan, 1.0], [0, 1], [0.0, 1.0])
    assert rep.at([5.0]) == pytest.approx([2.0])
    with pytest.raises(DomainError):
        rep.at([11.0])


def test_compare_identical():
    rep = run_multiscale(ODE.replace(T=3000.0))
    c = compare_runs(rep, rep)
    assert np.all(c.errors == 0.0)
    assert c.speedup == 1.0


def test_compare_disjoint():
    a = RunReport("a", [0.0, 1.0], [1.0, 1.0], [0.0, 0.0], [0, 0], [0.0, 0.0], 1.0)
    b = RunReport("b", [2.0, 3.0], [1.0, 1.0], [0.0, 0.0], [0, 0], [0.0, 0.0], 1.0)
    with pytest.raises(DomainError):
        compare_runs(a, b)


def test_compare_against_exact(tmp_path):
    rep = run_multiscale(ODE)
    exact = exact_ode_report(0.8, 5e-4, rep.t)
    c = compare_runs(exact, rep)
    assert c.terminal_error == pytest.approx(abs(rep.terminal - exact.terminal))
    assert c.errors[0] == 0.0
    lines = c.write_csv(tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "t,reference,candidate,abs_error"
    assert len(lines) == len(rep) + 1

"""End-to-end acceptance checks, one test per criterion.

Criteria 6 and 8 run the plaque model for minutes; deselect them with
``-m "not slow"``.  Criterion 7 reuses the plaque runs of 6 and 8.
"""

import math

import numpy as np
import pytest

from fracplaque.config import get_preset
from fracplaque.drivers import build_model, compare_runs, run_direct, run_multiscale
from fracplaque.fem import FlowField, FluidParams, ns_time_step, space_for
from fracplaque.frac_core import FracHistory, caputo_l1_eval, l1_weights
from fracplaque.geometry import build_channel_mesh
from fracplaque.micro import OdeMicroModel
from fracplaque.periodic import find_periodic_orbit
from fracplaque.study import alpha_sweep, convergence_study, mlf_identities, poiseuille_check

PUBLISHED_ERRORS = [7.320e-2, 3.941e-2, 2.041e-2, 1.004e-2]


def test_criterion_1_ode_error_table(verdict):
    cfg = get_preset("ode-table1").config
    table = convergence_study(cfg, "dT", 4, "exact", start=2000.0)
    rel = np.abs(table.errors / PUBLISHED_ERRORS - 1.0)
    orders = table.orders[1:]
    ok = bool(np.all(rel <= 0.15) and np.all((orders >= 0.75) & (orders <= 1.17)))
    detail = "errors " + ", ".join(f"{e:.3e}" for e in table.errors)
    detail += " | rel dev " + ", ".join(f"{r:.1%}" for r in rel)
    detail += " | orders " + ", ".join(f"{o:.2f}" for o in orders)
    verdict(1, "ODE multiscale errors within 15% of published, orders in [0.75, 1.17]", ok, detail)
    assert ok


def test_criterion_2_mittag_leffler(verdict):
    worst = mlf_identities(samples=100, zmax=50.0, seed=12345)
    ok = max(worst.values()) <= 1e-10
    verdict(2, "Mittag-Leffler identities rel err <= 1e-10", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_3_l1_operator(verdict):
    rng = np.random.default_rng(2024)
    affine = 0.0
    for _ in range(200):
        alpha = rng.uniform(0.05, 0.95)
        c0, c1 = rng.uniform(-5, 5, 2)
        n = int(rng.integers(1, 200))
        dt = 0.1
        hist = FracHistory(alpha, dt, [c0 + c1 * k * dt for k in range(n + 1)])
        exact = c1 * (n * dt) ** (1 - alpha) / math.gamma(2 - alpha)
        affine = max(affine, abs(caputo_l1_eval(hist, n) - exact) / max(1.0, abs(exact)))
    alpha = 0.5
    exact = 2.0 / math.gamma(3 - alpha)
    errs = []
    for n in (20, 40, 80, 160, 320):
        dt = 1.0 / n
        errs.append(abs(caputo_l1_eval(FracHistory(alpha, dt, [(k * dt) ** 2 for k in range(n + 1)]), n) - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    tele = max(
        abs(math.fsum(l1_weights(a, n).coeffs) / n ** (1 - a) - 1.0) for a in (0.1, 0.5, 0.8, 0.95) for n in (1, 10, 1000, 5000)
    )
    ok = affine <= 1e-12 and bool(np.all(orders >= 2 - alpha - 0.1)) and tele <= 1e-12
    detail = f"affine {affine:.1e}, orders on t^2 " + ", ".join(f"{o:.3f}" for o in orders) + f", telescoping {tele:.1e}"
    verdict(3, "L1 exact on affine, order >= 2-alpha-0.1, weights telescope", ok, detail)
    assert ok


def test_criterion_4_poiseuille(verdict):
    cfg = get_preset("poiseuille-check").config
    out = poiseuille_check(cfg)
    # repeated stepping from rest with the steady parabolic inflow
    params = FluidParams(rho=cfg.rho, nu=cfg.nu, sigma0=cfg.sigma0, inflow_amplitude=cfg.inflow_amplitude, pulsatile=False)
    space = space_for(build_channel_mesh(cfg.shape(), 0.0, cfg.target_elements, cfg.level))
    exact = FlowField.interpolate(space, lambda x, y: (params.inflow(y, 0.0, cfg.b), 0.0 * y))
    f = FlowField.zeros(space)
    for k in range(1, 200):
        f = ns_time_step(f, 0.5 * k, 0.5, params)
    stepped = float(np.abs(f.velocity - exact.velocity).max())
    vel = max(out["stokes_velocity_error"], out["ns_velocity_error"], stepped)
    div = max(out["divergence"], f.divergence_residual())
    wss_rel = abs(out["wss_x"] / -0.4 - 1.0)
    ok = vel <= 1e-8 and div <= 1e-8 and wss_rel <= 1e-6
    detail = f"{space.mesh.num_triangles} elements, velocity err {vel:.1e}, divergence {div:.1e}, wss_x {out['wss_x']:.12f}"
    verdict(4, "Poiseuille velocity/divergence <= 1e-8, wss_x = -0.4", ok, detail)
    assert ok


def test_criterion_5_periodic_finder(verdict):
    cfg = get_preset("ns-52-multiscale").config
    model = build_model(cfg)
    rep = find_periodic_orbit(model, model.initial_trial(cfg.u0), cfg.u0, cfg.dt, 1e-6, 50)
    r = np.array(rep.residuals)
    ns_ok = rep.converged and rep.cycles <= 50 and bool(np.all(np.diff(r[1:]) < 0))

    ode = OdeMicroModel()
    dt = 0.01
    # the period map is affine, so every ratio attains the bound up to rounding; stop well
    # above the level where squared differences of O(1) states lose their digits
    res = np.array(find_periodic_orbit(ode, 0.0, 1.0, dt, tau=1e-12, max_cycles=200).residuals)
    bound = ode.contraction_factor(1.0, dt)
    ratio = float((res[1:] / res[:-1]).max())
    ok = ns_ok and ratio <= bound * (1 + 1e-9)
    detail = f"NS: {rep.cycles} cycles to {r[-1]:.2e}, ratios after cycle 2 <= {(r[2:] / r[1:-1]).max():.3f}; ODE: worst ratio {ratio:.6e} vs bound {bound:.6e}"
    verdict(5, "periodic finder reaches 1e-6 in <= 50 cycles, contraction bound", ok, detail)
    assert ok


# --- plaque runs -------------------------------------------------------------------

_RUNS = {}


def _plaque(key, make):
    if key not in _RUNS:
        _RUNS[key] = make()
    return _RUNS[key]


def _direct52():
    return _plaque("direct52", lambda: run_direct(get_preset("ns-52-direct").config))


def _multi52():
    return _plaque("multi52", lambda: run_multiscale(get_preset("ns-52-multiscale").config))


def _convergence52():
    cfg = get_preset("ns-52-convergence").config
    return _plaque("conv52", lambda: convergence_study(cfg, "dT", 3, "direct-run"))


def _sweep53():
    preset = get_preset("ns-53-sweep")
    return _plaque("sweep53", lambda: alpha_sweep(preset.config, preset.options["alphas"]))


@pytest.mark.slow
def test_criterion_6_ns_multiscale_vs_direct(verdict):
    direct, multi = _direct52(), _multi52()
    cmp = compare_runs(direct, multi, grid=multi.t)
    table = _convergence52()
    slope = table.slope()
    ok = cmp.terminal_error <= 5e-3 and cmp.speedup >= 10 and 0.8 <= slope <= 1.2
    detail = (
        f"terminal |u_direct - U| {cmp.terminal_error:.2e}, speedup {cmp.speedup:.1f}x "
        f"({direct.total_wall:.0f} s vs {multi.total_wall:.1f} s), "
        f"dT 80/40/20 errors " + ", ".join(f"{e:.2e}" for e in table.errors) + f", slope {slope:.3f}"
    )
    verdict(6, "NS multiscale vs direct: error <= 5e-3, speedup >= 10, slope in [0.8, 1.2]", ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_7_monotone_and_bound(verdict):
    reports = [_direct52(), _multi52()] + list(_convergence52().reports) + list(_sweep53().reports.values())
    worst_drop, worst_margin = 0.0, -math.inf
    for r in reports:
        cfg = r.meta["config"]
        worst_drop = min(worst_drop, float(np.diff(r.slow).min()))
        worst_margin = max(worst_margin, r.terminal - cfg.bound())
    ok = worst_drop >= 0.0 and worst_margin <= 0.0
    detail = f"{len(reports)} plaque runs, smallest increment {worst_drop:.2e}, max(terminal - bound) {worst_margin:.3e}"
    verdict(7, "slow variable nondecreasing and below u0 + eps T^a / Gamma(a+1)", ok, detail)
    assert ok


@pytest.mark.slow
def test_criterion_8_alpha_ordering(verdict):
    res = _sweep53()
    u = {a: r.terminal for a, r in res.reports.items()}
    ok = not res.failures and 0.95 in u and 0.85 in u and u[0.95] > u[0.85]
    detail = ", ".join(f"U(T; alpha={a:g}) = {v:.6g}" for a, v in sorted(u.items()))
    detail += "".join(f", alpha={a:g} failed: {e}" for a, e in res.failures.items())
    verdict(8, "terminal U at alpha=0.95 exceeds alpha=0.85 (T=2e5 s)", ok, detail)
    assert ok

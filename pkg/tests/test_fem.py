import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracplaque.errors import DomainError
from fracplaque.fem import (
    _N,
    FlowField,
    FluidParams,
    WSSValue,
    dump_field,
    load_field,
    ns_time_step,
    plaque_reaction,
    space_for,
    stokes_solve,
    wall_shear_stress,
)
from fracplaque.geometry import ChannelShape, build_channel_mesh
from fracplaque.kernels import backends

SHAPE = ChannelShape(5.0, 2.0)
STEADY = FluidParams(pulsatile=False)


@pytest.fixture(scope="module")
def space0():
    return space_for(build_channel_mesh(SHAPE, 0.0))


@pytest.fixture(scope="module")
def space02():
    return space_for(build_channel_mesh(SHAPE, 0.2))


def poiseuille(x, y):
    return 30.0 * (1 - y**2 / 4.0), 0.0 * x


def test_zero_inflow_zero_field(space02):
    params = FluidParams(inflow_amplitude=0.0)
    out = ns_time_step(FlowField.zeros(space02), 0.05, 0.05, params)
    assert np.abs(out.velocity).max() == 0.0
    assert np.abs(out.pressure).max() == 0.0


def test_space_is_cached_per_mesh(space0):
    assert space_for(space0.mesh) is space0


def test_poiseuille_is_fixed_point(space0):
    exact = FlowField.interpolate(space0, poiseuille)
    f = FlowField.zeros(space0)
    for k in range(1, 200):
        f = ns_time_step(f, 0.5 * k, 0.5, STEADY)
    assert np.abs(f.velocity - exact.velocity).max() <= 1e-8
    assert f.divergence_residual() <= 1e-8


def test_poiseuille_pressure_gradient(space0):
    f = stokes_solve(space0, 0.0, STEADY)
    x, y = space0.mesh.nodes.T
    slope, _ = np.polyfit(x, f.pressure, 1)
    assert slope == pytest.approx(-2 * 1.0 * 0.04 * 30.0 / 4.0, rel=1e-10)
    # pressure is linear in x alone
    resid = f.pressure - np.polyval(np.polyfit(x, f.pressure, 1), x)
    assert np.abs(resid).max() < 1e-9


def test_stokes_divergence_free(space02):
    f = stokes_solve(space02, 0.5, FluidParams())
    assert f.divergence_residual() <= 1e-8


def test_mismatched_coefficients_rejected(space0):
    with pytest.raises(DomainError):
        FlowField(space0, np.zeros((2, 3)), np.zeros(space0.nv))


def test_step_rejects_bad_dt(space0):
    with pytest.raises(DomainError):
        ns_time_step(FlowField.zeros(space0), 0.0, 0.0, STEADY)


def test_energy_decays_without_inflow(space02):
    # start from a genuine pulsatile state, then switch the inflow off
    f = stokes_solve(space02, 0.5, FluidParams())
    quiet = FluidParams(inflow_amplitude=0.0)
    norms = [f.l2_norm()]
    for k in range(1, 30):
        f = ns_time_step(f, 0.5 + 0.05 * k, 0.05, quiet, skew=True)
        norms.append(f.l2_norm())
    assert np.all(np.diff(norms) <= 1e-12 * norms[0])
    assert norms[-1] < 0.5 * norms[0]


def test_body_force_drives_flow(space0):
    params = FluidParams(inflow_amplitude=0.0, body_force=lambda t, x, y: (1.0, 0.0))
    f = ns_time_step(FlowField.zeros(space0), 0.05, 0.05, params)
    assert f.velocity[0].max() > 0


# --- wall shear stress ----------------------------------------------------------


def test_wss_zero_field(space02):
    w = wall_shear_stress(FlowField.zeros(space02), FluidParams())
    assert np.array_equal(w.vector, [0.0, 0.0])


def test_wss_poiseuille(space0):
    f = FlowField.interpolate(space0, poiseuille)
    w = wall_shear_stress(f, FluidParams())
    assert w.vector[0] == pytest.approx(-0.4, rel=1e-12)
    assert abs(w.vector[1]) < 1e-12


def test_wss_linear_in_field(space02):
    params = FluidParams()
    f = stokes_solve(space02, 0.5, params)
    g = FlowField(space02, 2.5 * f.velocity, f.pressure)
    assert wall_shear_stress(g, params).vector == pytest.approx(2.5 * wall_shear_stress(f, params).vector, rel=1e-13)


def test_wss_mirror_symmetry(space02):
    # reflecting x -> -x keeps the Gaussian wall and flips the x traction
    params = FluidParams()
    fa = FlowField.interpolate(space02, lambda x, y: (np.cos(x) * (2 - y), x * y))
    fb = FlowField.interpolate(space02, lambda x, y: (-np.cos(-x) * (2 - y), (-x) * y))
    wa = wall_shear_stress(fa, params).vector
    wb = wall_shear_stress(fb, params).vector
    assert abs(wa[0]) > 1e-3
    assert wb[0] == pytest.approx(-wa[0], rel=1e-10)
    assert wb[1] == pytest.approx(wa[1], rel=1e-10, abs=1e-12)


# --- reaction -------------------------------------------------------------------


def test_reaction_examples():
    assert plaque_reaction(0.0, WSSValue(np.zeros(2))) == 1.0
    assert plaque_reaction(1.0, WSSValue(np.array([0.6, 0.8]))) == pytest.approx(0.25, rel=1e-15)
    assert plaque_reaction(1.0, 1.0) == 0.25
    with pytest.raises(DomainError):
        plaque_reaction(-1.0, 0.0)


@given(st.floats(0, 10), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_reaction_bounds(u, wx, wy):
    r = plaque_reaction(u, WSSValue(np.array([wx, wy])))
    assert 0 < r <= 1


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 100))
def test_reaction_decreasing(u, du, w):
    assert plaque_reaction(u + du, w) <= plaque_reaction(u, w)
    assert plaque_reaction(u, w + du) <= plaque_reaction(u, w)


# --- io and kernels ---------------------------------------------------------------


def test_field_dump_round_trip(tmp_path, space02):
    f = stokes_solve(space02, 0.5, FluidParams())
    path = tmp_path / "f.txt"
    dump_field(f, path, "mesh-0.2")
    g, ref = load_field(path, space02)
    assert ref == "mesh-0.2"
    assert np.array_equal(g.velocity, f.velocity)
    assert np.array_equal(g.pressure, f.pressure)


def test_field_load_rejects_garbage(tmp_path, space0):
    path = tmp_path / "bad.txt"
    path.write_text("mesh v1\n")
    with pytest.raises(DomainError):
        load_field(path, space0)


def test_convection_backends_agree(space02):
    rng = np.random.default_rng(7)
    vel = rng.normal(size=(2, space02.n2))
    vx, vy = vel[0][space02.dofs], vel[1][space02.dofs]
    out = {name: mod.convection_local(_N, space02.grads, space02.qweights, vx, vy) for name, mod in backends().items()}
    for v in out.values():
        assert np.allclose(v, out["python"], rtol=1e-13, atol=1e-13)


@settings(max_examples=20)
@given(st.lists(st.tuples(st.floats(-6, 6), st.floats(-2.5, 2.5)), min_size=1, max_size=20))
def test_locate_backends_agree(points):
    mesh = build_channel_mesh(SHAPE, 0.2)
    pts = np.array(points)
    hint = np.full(len(pts), -1, dtype=np.int64)
    out = {name: mod.locate_points(mesh.nodes, mesh.triangles, pts, hint, 1e-12) for name, mod in backends().items()}
    owner, bary = out["python"]
    for o, b in out.values():
        found = owner >= 0
        assert np.array_equal(o >= 0, found)
        # points on shared edges may land in either neighbour; coordinates must agree
        rebuilt = np.einsum("ma,mak->mk", b[found], mesh.nodes[mesh.triangles[o[found]]])
        assert np.allclose(rebuilt, pts[found], atol=1e-12)

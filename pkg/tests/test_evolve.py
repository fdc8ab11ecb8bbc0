import numpy as np
import pytest

from barostab import evolve as ev
from barostab import steady as st
from barostab.errors import ConfigError


def _const_sides(geometry, rho, u):
    return ev.Sides(ev.K.INFLOW, rho, u, ev.K.OUTFLOW, rho, u)


# -- grid ------------------------------------------------------------------------

@pytest.mark.parametrize("geometry", [st.Geometry.strip(), st.Geometry.annulus(1.0, 2.0),
                                      st.Geometry.exterior(1.0, 50.0)])
def test_grid_volumes(geometry):
    g = ev.Grid.build(geometry, 64)
    lo, hi = geometry.bounds
    assert g.faces[0] == lo and g.faces[-1] == pytest.approx(hi)
    exact = (hi ** (g.alpha + 1) - lo ** (g.alpha + 1)) / (g.alpha + 1)
    assert np.sum(g.vol * g.h) == pytest.approx(exact, rel=1e-13)
    assert np.allclose(g.ihv, 1.0 / (g.h * g.vol))


# -- constant states -------------------------------------------------------------

@pytest.mark.parametrize("order", [1, 2])
def test_constant_state_preserved_on_strip(iso, order):
    s = ev.constant_state(st.Geometry.strip(), 64, 1.3, 0.2, nu=0.05)
    sides = _const_sides(s.geometry, 1.3, 0.2)
    out = s
    for _ in range(50):
        out = ev.step(out, iso, sides, ev.cfl_dt(out, iso, 0.45), order)
    assert np.max(np.abs(out.rho - 1.3)) <= 1e-14
    assert np.max(np.abs(out.m - 1.3 * 0.2)) <= 1e-14


@pytest.mark.parametrize("order", [1, 2])
def test_rest_state_preserved_with_curvature(hard, order):
    # uniform pressure and zero velocity is an exact discrete equilibrium in any geometry
    for geometry in (st.Geometry.annulus(1.0, 3.0), st.Geometry.exterior(1.0, 50.0)):
        s = ev.constant_state(geometry, 48, 1.0, 0.0, nu=0.1)
        sides = ev.Sides(ev.K.OUTFLOW, 1.0, 0.0, ev.K.INFLOW, 1.0, 0.0)
        drho, dm, _, _ = ev.semi_discrete_rhs(s, hard, sides, order)
        assert np.max(np.abs(drho)) <= 1e-14 and np.max(np.abs(dm)) <= 1e-12


# -- conservation ----------------------------------------------------------------

@pytest.mark.parametrize("geometry", [st.Geometry.strip(), st.Geometry.annulus(2.0, 3.0)])
@pytest.mark.parametrize("order", [1, 2])
def test_mass_telescoping(iso, geometry, order):
    s = ev.constant_state(geometry, 128, 1.0, 0.1, nu=0.01)
    r = s.grid.centers
    lo, hi = geometry.bounds
    s.rho = 1.0 + 0.1 * np.sin(2 * np.pi * (r - lo) / (hi - lo))
    s.m = s.rho * (0.1 + 0.02 * (r - lo))
    bd = st.BoundaryData(rho_B=1.0, u_B_minus=0.1, u_B_plus=0.12, mu=0.01)
    for _ in range(20):
        mass0 = s.mass()
        s = ev.step(s, iso, bd, ev.cfl_dt(s, iso, 0.45), order)
        assert s.clamp_events == 0
        assert abs(s.mass() - mass0 - s.last_mass_change) <= 1e-13


# -- time step ---------------------------------------------------------------------

def test_cfl_dt_examples(iso):
    # rho = 1/2 gives c = 1 for a = 1, gamma = 2; u = 1 makes lambda = 2
    s = ev.constant_state(st.Geometry.strip(), 100, 0.5, 1.0)
    assert s.h == pytest.approx(0.01)
    assert ev.cfl_dt(s, iso, 0.5) == pytest.approx(0.0025, rel=1e-14)
    fine = ev.constant_state(st.Geometry.strip(), 200, 0.5, 1.0)
    assert ev.cfl_dt(fine, iso, 0.5) == pytest.approx(0.00125, rel=1e-14)
    # viscous bound h^2 rho / (2 nu): quartered when h halves
    v1 = ev.constant_state(st.Geometry.strip(), 100, 0.5, 1.0, nu=10.0)
    v2 = ev.constant_state(st.Geometry.strip(), 200, 0.5, 1.0, nu=10.0)
    d1, d2 = ev.cfl_dt(v1, iso, 0.5), ev.cfl_dt(v2, iso, 0.5)
    assert d1 == pytest.approx(0.5 * 1e-4 * 0.5 / 20.0, rel=1e-14)
    assert d2 == pytest.approx(d1 / 4, rel=1e-14)


# -- manufactured solutions --------------------------------------------------------

@pytest.mark.parametrize("order", [1, 2])
def test_mms_constant_fields_exact(iso, order):
    res = ev.mms_study(iso, st.Geometry.strip(), order, levels=(16, 32), t_end=0.1,
                       fields=lambda x, t: (1 + 0 * x, 0.3 + 0 * x))
    assert max(res.errors) <= 1e-13


def test_mms_short_ladder(iso):
    res = ev.mms_convergence(iso, st.Geometry.annulus(1.0, 2.0), orders=(1, 2),
                             levels=(32, 64), t_end=0.1)
    assert 0.8 <= res[1].observed_order <= 1.4
    assert res[2].observed_order >= 1.7


def test_mms_rejects_exterior(hard):
    with pytest.raises(ConfigError):
        ev.mms_study(hard, st.Geometry.exterior(), 1)


# -- perturbations and configs -----------------------------------------------------

def test_perturbation_support_and_seed():
    g = st.Geometry.exterior(1.0, 50.0)
    r = np.linspace(1.0, 50.0, 400)
    init = {"kind": "perturbed", "amplitude": 0.02, "mode": 1, "support": [1.0, 5.0]}
    a = ev.perturbation_factor(r, g, init, seed=7)
    b = ev.perturbation_factor(r, g, init, seed=7)
    c = ev.perturbation_factor(r, g, init, seed=8)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all(a[r > 5.0] == 1.0) and np.max(np.abs(a - 1)) <= 0.02
    plain = ev.perturbation_factor(r, g, init)
    x = (r[r <= 5.0] - 1.0) / 4.0
    assert np.allclose(plain[r <= 5.0], 1 + 0.02 * np.sin(2 * np.pi * x))


def test_run_config_validation(iso):
    base = dict(eos=iso, geometry=st.Geometry.strip(), boundary=st.BoundaryData())
    for bad in ({"cfl": 0.0}, {"cfl": 1.5}, {"n_cells": 2}, {"order": 3}, {"t_end": -1.0},
                {"far_field": "wall"}, {"initial": {"kind": "random"}},
                {"initial": {"kind": "perturbed", "amplitude": -0.1}}):
        with pytest.raises(ConfigError):
            ev.RunConfig(**base, **bad)
    cfg = ev.RunConfig(**base, n_cells=64, order=2)
    assert ev.RunConfig.from_dict(cfg.to_dict()) == cfg


def test_flow_through_times(iso, hard):
    bd = st.BoundaryData(u_B_minus=0.1, u_B_plus=0.12)
    assert ev.flow_through_time(st.Geometry.strip(), bd, iso) == pytest.approx(10.0)
    ext = st.BoundaryData(u_B=0.01, rho_inf=1.0)
    c = float(np.sqrt(ev.eosmod.pressure_derivative(hard, 1.0)))
    assert ev.flow_through_time(st.Geometry.exterior(1.0, 50.0), ext, hard) == \
        pytest.approx(49.0 / c)


# -- runs near the steady state ------------------------------------------------------

@pytest.fixture(scope="module")
def short_cfg(iso):
    return ev.RunConfig(eos=iso, geometry=st.Geometry.strip(),
                        boundary=st.BoundaryData(rho_B=1.0, u_B_minus=0.1, u_B_plus=0.12,
                                                 mu=3.0),
                        n_cells=64, t_end=0.2, sample_dt=0.05, order=2)


def test_run_samples_and_determinism(short_cfg):
    a = ev.run(short_cfg)
    b = ev.run(short_cfg)
    assert [s["t"] for s in a.samples] == pytest.approx([0, 0.05, 0.1, 0.15, 0.2])
    assert np.array_equal(a.state.rho, b.state.rho) and a.steps == b.steps


def test_run_stop_rule(short_cfg):
    res = ev.run(short_cfg, stop=lambda samples: len(samples) >= 3)
    assert len(res.samples) == 3


def test_discrete_steady_state_is_a_fixed_point(short_cfg):
    s = ev.discrete_steady_state(short_cfg)
    sides = ev.run_sides(short_cfg, None)
    drho, dm, _, _ = ev.semi_discrete_rhs(s, short_cfg.eos, sides, short_cfg.order)
    assert np.max(np.abs(drho)) <= 1e-10 and np.max(np.abs(dm)) <= 1e-10
    cont, mom = ev.reduced_equations_residual(s, short_cfg.eos)
    assert cont < 1e-2 and mom < 1e-1


def test_reduced_residual_small_on_resampled_profile(short_cfg, strip_profile):
    # centred differences of a smooth profile: second order in h
    moms = [ev.reduced_equations_residual(ev.state_from_profile(strip_profile, n),
                                          short_cfg.eos)[1] for n in (128, 256)]
    assert 3.5 <= moms[0] / moms[1] <= 4.5
    s = ev.state_from_profile(strip_profile, 256)
    c, m = ev.reduced_equations_residual(s, short_cfg.eos, pointwise=True)
    assert c.shape == (254,) and m.shape == (254,)


def test_custom_initial_state(tmp_path, short_cfg):
    path = tmp_path / "init.csv"
    r = np.linspace(0, 1, 11)
    np.savetxt(path, np.column_stack([r, 1 + 0 * r, 0.1 + 0.02 * r]), delimiter=",",
               header="r,rho,u", comments="")
    cfg = ev.RunConfig(**{**short_cfg.__dict__, "initial": {"kind": "custom", "path": str(path)}})
    s = ev.initial_state(cfg)
    assert np.allclose(s.rho, 1.0) and np.allclose(s.u, 0.1 + 0.02 * s.r)

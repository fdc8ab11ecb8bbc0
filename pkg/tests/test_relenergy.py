import math

import numpy as np
import pytest

from barostab import evolve as ev
from barostab import relenergy as re
from barostab import steady as st
from barostab.errors import ConfigError, InsufficientSamples


def _with_velocity(geometry, n, rho, u):
    s = ev.constant_state(geometry, n, 1.0, 0.0)
    s.rho = np.broadcast_to(rho, s.rho.shape).astype(float).copy()
    s.m = s.rho * u
    return s


# -- relative energy ---------------------------------------------------------------

def test_energy_of_steady_profile_is_zero(iso, strip_profile):
    s = ev.state_from_profile(strip_profile, 256)
    # u = m / rho differs from the profile velocity by rounding only
    assert 0.0 <= re.relative_energy(s, strip_profile, iso) <= 1e-28
    assert re.relative_energy(s, s, iso) == 0.0


def test_energy_nonnegative_and_quadratic(iso, strip_profile):
    base = ev.state_from_profile(strip_profile, 512)
    r = base.r
    amps = np.array([1e-3, 2e-3, 4e-3, 8e-3])
    E = []
    for a in amps:
        s = base.copy()
        s.rho = base.rho * (1 + a * np.sin(2 * np.pi * r))
        s.m = s.rho * (base.u + a * np.cos(np.pi * r))
        E.append(re.relative_energy(s, strip_profile, iso))
    assert min(E) > 0
    slope = np.polyfit(np.log(amps), np.log(E), 1)[0]
    assert 1.9 <= slope <= 2.1


def test_energy_requires_shared_grid(iso, strip_profile):
    a = ev.state_from_profile(strip_profile, 64)
    b = ev.state_from_profile(strip_profile, 128)
    with pytest.raises(ConfigError):
        re.relative_energy(a, b, iso)


# -- dissipation -------------------------------------------------------------------

def test_dissipation_zero_for_equal_fields(iso, strip_profile):
    s = ev.state_from_profile(strip_profile, 128)
    assert re.dissipation(s, strip_profile, 1.0, 0.0) <= 1e-26
    assert re.dissipation(s, s, 1.0, 0.0, iso) == 0.0


def test_dissipation_flat_sine(iso):
    n = 2000
    zero = _with_velocity(st.Geometry.strip(), n, 1.0, 0.0)
    s = _with_velocity(st.Geometry.strip(), n, 1.0, np.sin(np.pi * zero.r))
    D = re.dissipation(s, zero, 1.0, 0.0, iso)
    assert D == pytest.approx(4.0 / 3.0 * np.pi ** 2 / 2, rel=1e-5)


@pytest.mark.parametrize("lam", [2.0 / 3.0, 1.0, 2.0, 5.0])
def test_radial_dominates_flat(iso, lam):
    mu = 1.0
    g = st.Geometry.annulus(1.0, 2.0)
    zero = _with_velocity(g, 400, 1.0, 0.0)
    s = _with_velocity(g, 400, 1.0, np.sin(np.pi * (zero.r - 1.0)) * (1 + zero.r))
    radial = re.dissipation(s, zero, mu, lam, iso)
    ref = re._reference(s, zero, iso)
    r, vf, dv, qw = re._face_difference(s, ref)
    flat = float(np.sum(qw * (4 * mu / 3 + lam) * dv ** 2 * r ** 2))
    assert radial >= flat > 0


# -- ledger ------------------------------------------------------------------------

def test_ledger_vanishes_at_steady_state(iso, strip_data, strip_profile):
    s = ev.state_from_profile(strip_profile, 256)
    rec = re.inequality_ledger(s, strip_profile, iso, strip_data)
    for key in ("E", "D", "B_out", "B_in", "T_grad", "T_press", "T_rem", "lhs_minus_rhs"):
        assert abs(getattr(rec, key)) <= 1e-26, key
    assert math.isnan(rec.W_dens7)


def test_ledger_signs(iso, strip_data, strip_profile):
    s = ev.state_from_profile(strip_profile, 256)
    s.rho = s.rho * (1 + 0.05 * np.sin(2 * np.pi * s.r))
    s.m = s.rho * (s.u + 0.01)
    rec = re.inequality_ledger(s, strip_profile, iso, strip_data)
    assert rec.E > 0 and rec.D > 0 and rec.B_out >= 0 and rec.B_in >= 0


def test_ledger_exterior_weighted_terms(hard, exterior_profile):
    bd = exterior_profile.bdata
    s = ev.state_from_profile(exterior_profile, 512)
    s.rho = s.rho * (1 + 0.02 * np.exp(-(s.r - 2) ** 2))
    rec = re.inequality_ledger(s, exterior_profile, hard, bd)
    assert rec.W_dens7 > 0 and rec.W_press7 > 0


def test_ledger_predicts_energy_rate(iso, strip_data, strip_profile):
    cfg = ev.RunConfig(eos=iso, geometry=st.Geometry.strip(), boundary=strip_data,
                       n_cells=256, t_end=0.02, sample_dt=0.001, order=2,
                       initial={"kind": "perturbed", "amplitude": 0.02})
    ref = ev.discrete_steady_state(cfg, strip_profile)
    rec = re.LedgerRecorder(ref, iso, strip_data)
    ev.run(cfg, rec, profile=strip_profile)
    t = np.array([s.t for s in rec.samples])
    E = np.array([s.E for s in rec.samples])
    slack = np.array([s.lhs_minus_rhs for s in rec.samples])
    dEdt = np.gradient(E, t)
    assert np.all(E > 0) and np.all(np.diff(E) < 0)
    assert np.allclose(-dEdt[2:-2], slack[2:-2], rtol=0.1)


def test_ledger_refinement_is_second_order(iso, strip_data, strip_profile):
    vals = []
    for n in (128, 256, 512):
        s = ev.state_from_profile(strip_profile, n)
        s.rho = s.rho * (1 + 0.02 * np.sin(2 * np.pi * s.r))
        s.m = s.rho * (s.u + 0.01 * np.sin(np.pi * s.r))
        vals.append(re.inequality_ledger(s, strip_profile, iso, strip_data))
    for key in ("E", "D", "T_grad", "T_press"):
        a, b, c = (getattr(v, key) for v in vals)
        assert abs(a - b) / abs(b - c) >= 3.0, key


# -- decay report ------------------------------------------------------------------

def _samples(E, dt=1.0):
    return [{"t": k * dt, "E": e, "D": 0.0} for k, e in enumerate(E)]


def test_decay_report_needs_ten_samples():
    with pytest.raises(InsufficientSamples):
        re.decay_report(_samples([1.0] * 9))


def test_decay_report_zero_energy_passes():
    rep = re.decay_report(_samples([0.0] * 12))
    assert rep["verdict"] == "PASS" and math.isnan(rep["final_over_initial"])


def test_decay_report_exponential():
    E = np.exp(-0.5 * np.arange(20))
    rep = re.decay_report(_samples(E), transient=2.0)
    assert rep["verdict"] == "PASS" and rep["decay_rate"] == pytest.approx(0.5)
    assert rep["post_transient_E"] == pytest.approx(E[2])
    assert rep["decay_target_met"]


def test_decay_report_uptick_fails():
    E = list(np.exp(-0.1 * np.arange(15)))
    E[10] = E[9] * 1.01
    assert re.decay_report(_samples(E))["verdict"] == "FAIL"
    # upticks inside the transient are ignored
    assert re.decay_report(_samples(E), transient=11.0)["verdict"] == "PASS"


def test_cumulative():
    samples = [re.RelEnergySample(t, 0, 2.0, 0, 0, 0, 0, 0, 0) for t in (0.0, 1.0, 3.0)]
    assert np.allclose(re.cumulative(samples, "D"), [0.0, 2.0, 6.0])

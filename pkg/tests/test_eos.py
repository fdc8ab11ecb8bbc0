import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from barostab import eos as E
from barostab.errors import ConfigError, DensityOutOfRange

HARD = E.EosSpec("hard_sphere", a=1.0, beta=3.0, rho_bar=2.0)


def test_pressure_examples(iso):
    assert E.pressure(iso, 3.0) == 9.0
    assert E.pressure(iso, 0.0) == 0.0
    hs1 = E.EosSpec("hard_sphere", a=1.0, beta=1.0, rho_bar=1.0)
    assert E.pressure(hs1, 0.5) == pytest.approx(1.0, rel=1e-14)
    assert E.pressure(hs1, 0.0) == 0.0


def test_derivative_and_sound_speed_examples(iso):
    assert E.pressure_derivative(iso, 2.0) == 4.0
    hs1 = E.EosSpec("hard_sphere", a=1.0, beta=1.0, rho_bar=1.0)
    assert E.pressure_derivative(hs1, 0.5) == pytest.approx(4.0, rel=1e-14)
    assert E.sound_speed(iso, 2.0) == 2.0
    assert E.sound_speed(iso, 1.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_potential_examples(iso, hard):
    assert E.pressure_potential(iso, 3.0) == pytest.approx(9.0, rel=1e-15)
    ref = hard.rho_ref
    assert E.pressure_potential(hard, ref) == pytest.approx(hard.table.anchor_value, rel=1e-14)
    assert E.relative_potential(iso, 2.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert E.relative_pressure(iso, 2.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert E.relative_potential(hard, 0.7, 0.7) == 0.0
    assert E.relative_pressure(hard, 1.3, 1.3) == 0.0


def test_out_of_range(hard, iso):
    with pytest.raises(DensityOutOfRange):
        E.pressure(hard, 2.0)
    with pytest.raises(DensityOutOfRange):
        E.pressure(iso, -1e-3)
    with pytest.raises(DensityOutOfRange):
        E.pressure_derivative(iso, 0.0)


def test_invalid_specs():
    with pytest.raises(ConfigError):
        E.EosSpec("isentropic", gamma=1.0)
    with pytest.raises(ConfigError):
        E.EosSpec("hard_sphere", beta=-1.0, rho_bar=1.0)
    with pytest.raises(ConfigError):
        E.EosSpec("hard_sphere", rho_bar=math.inf)
    with pytest.raises(ConfigError):
        E.EosSpec("van_der_waals")


def test_dict_round_trip(iso, hard):
    for e in (iso, hard):
        assert E.EosSpec.from_dict(e.to_dict()) == e


@pytest.mark.parametrize("which", ["iso", "hard"])
def test_monotone_convex_sampled(which, request):
    e = request.getfixturevalue(which)
    top = e.rho_bar * (1 - 1e-6) if e.is_hard_sphere else 1e4
    rho = np.geomspace(1e-6, top, 2001)
    assert np.all(np.diff(E.pressure(e, rho)) > 0)
    assert np.all(E.pressure_second_derivative(e, rho) > 0)
    assert np.all(np.diff(E.sound_speed(e, rho)) > 0)


def test_hard_sphere_blow_up(hard):
    gaps = np.geomspace(1e-2, 1e-10, 9)
    p = E.pressure(hard, hard.rho_bar - gaps)
    assert np.all(np.diff(p) > 0) and p[-1] > 1e25


def test_potential_table_convex_and_consistent(hard):
    tab = hard.table
    rho = tab.densities
    P = rho * tab.values
    # second divided differences on a clustered grid
    d1 = np.diff(P) / np.diff(rho)
    d2 = np.diff(d1) / (rho[2:] - rho[:-2])
    assert np.all(d2 > 0)
    lhs = E.potential_derivative(hard, rho[1:-1]) * rho[1:-1] - E.pressure_potential(hard, rho[1:-1])
    p = E.pressure(hard, rho[1:-1])
    assert np.max(np.abs(lhs - p) / (1 + p)) <= 1e-8


@pytest.mark.parametrize("which", ["iso", "hard"])
def test_potential_identity_by_differences(which, request):
    """``P'(rho) rho - P(rho) = p(rho)`` with ``P'`` from a five-point stencil of ``P``."""
    e = request.getfixturevalue(which)
    rng = np.random.default_rng(3)
    if e.is_hard_sphere:
        rho = e.rho_bar * rng.uniform(0.02, 0.98, 100)
        h = 1e-3 * np.minimum(rho, e.rho_bar - rho)
    else:
        rho = rng.uniform(0.05, 5.0, 100)
        h = 1e-3 * rho
    P = lambda x: E.pressure_potential(e, x)  # noqa: E731
    dP = (P(rho - 2 * h) - 8 * P(rho - h) + 8 * P(rho + h) - P(rho + 2 * h)) / (12 * h)
    p = E.pressure(e, rho)
    assert np.max(np.abs(dP * rho - P(rho) - p) / np.abs(p)) <= 1e-8


@pytest.mark.parametrize("which", ["iso", "hard"])
def test_derivative_matches_differences(which, request):
    e = request.getfixturevalue(which)
    rng = np.random.default_rng(5)
    top = 0.999 * e.rho_bar if e.is_hard_sphere else 10.0
    rho = rng.uniform(1e-3, top, 100)
    h = 1e-6 * np.minimum(rho, (e.rho_bar - rho) if e.is_hard_sphere else rho)
    fd = (E.pressure(e, rho + h) - E.pressure(e, rho - h)) / (2 * h)
    assert np.max(np.abs(fd / E.pressure_derivative(e, rho) - 1)) <= 1e-6


def test_bregman_lower_bound(hard):
    rng = np.random.default_rng(7)
    rho = rng.uniform(0.05, 1.95, 200)
    R = rng.uniform(0.05, 1.95, 200)
    val = E.relative_potential(hard, rho, R)
    lo = np.minimum(rho, R)
    hi = np.maximum(rho, R)
    for k in range(rho.size):
        s = np.linspace(lo[k], hi[k], 201)
        bound = 0.5 * np.min(E.pressure_derivative(hard, s) / s) * (rho[k] - R[k]) ** 2
        assert val[k] >= bound * (1 - 1e-10)


def test_growth_and_comparability(hard, iso):
    assert E.growth_ratio(hard) > 0
    C = E.pressure_comparability(iso, 1.0, 0.5, 2.0)
    assert math.isfinite(C) and C > 0


def test_clamp_density(hard):
    rho, n = E.clamp_density(hard, np.array([-1.0, 0.5, 2.5]))
    assert n == 2
    assert rho[0] == hard.density_floor and rho[2] == hard.rho_bar - hard.density_floor


@settings(max_examples=200, deadline=None)
@given(hs.floats(1e-4, 1.9999), hs.floats(1e-4, 1.9999))
def test_bregman_nonnegative_hypothesis(rho, R):
    v = E.relative_potential(HARD, rho, R)
    q = E.relative_pressure(HARD, rho, R)
    assert v >= 0 and q >= 0
    if rho != R:
        assert v > 0 and q > 0


@settings(max_examples=200, deadline=None)
@given(hs.floats(1e-3, 1e3), hs.floats(1e-3, 1e3), hs.floats(1.05, 4.0))
def test_isentropic_bregman_closed_form(rho, R, g):
    e = E.EosSpec("isentropic", a=1.0, gamma=g)
    P = lambda x: x ** g / (g - 1)  # noqa: E731
    exact = P(rho) - g / (g - 1) * R ** (g - 1) * (rho - R) - P(R)
    v = E.relative_potential(e, rho, R)
    assert v >= 0
    assert v == pytest.approx(max(exact, 0.0), rel=1e-7, abs=1e-12 * (P(rho) + P(R)))

"""Barotropic equations of state, pressure potential and Bregman quantities.

Two pressure laws are supported:

* isentropic ``p = a rho**gamma`` (``rho_bar = inf``);
* hard sphere ``p = a * ((rho_bar / (rho_bar - rho))**beta - 1)``, which
  vanishes at zero density and blows up like ``(rho_bar - rho)**(-beta)``.

The pressure potential ``P`` solves ``P'(rho) rho - P(rho) = p(rho)``.  For
the isentropic law the closed form ``a rho**gamma / (gamma - 1)`` is used.
For the hard-sphere law ``P(rho) = rho * I(rho)`` where
``I(rho) = int_{eps}^{rho} p(s) / s**2 ds`` is tabulated once with adaptive
Gauss-Kronrod quadrature and completed between nodes by a local
Gauss-Legendre rule.

All functions accept scalars or arrays and broadcast like numpy ufuncs.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigError, DensityOutOfRange, QuadratureFailure

ISENTROPIC = "isentropic"
HARD_SPHERE = "hard_sphere"

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_GL01_X = 0.5 * (_GL_X + 1.0)
_GL01_W = 0.5 * _GL_W

# near pairs are integrated, far pairs use the direct difference formula
_NEAR_FRACTION = 0.5


def _result(value, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


@dataclass(frozen=True)
class EosSpec:
    """Description of a barotropic pressure law.

    Parameters
    ----------
    kind : {"isentropic", "hard_sphere"}
    a : float
        Pressure scale, positive.
    gamma : float
        Adiabatic exponent of the isentropic law, ``gamma > 1``.
    beta : float
        Blow-up exponent of the hard-sphere law, ``beta > 0``.
    rho_bar : float
        Maximal density; ``inf`` for the isentropic law.
    rho_ref : float, optional
        Reference density at which the potential table is anchored.
        Defaults to ``rho_bar / 2`` (hard sphere) or 1 (isentropic).
    """

    kind: str = ISENTROPIC
    a: float = 1.0
    gamma: float = 2.0
    beta: float = 3.0
    rho_bar: float = math.inf
    rho_ref: float | None = field(default=None)

    def __post_init__(self):
        if self.kind not in (ISENTROPIC, HARD_SPHERE):
            raise ConfigError(f"unknown EOS kind {self.kind!r}")
        if not self.a > 0:
            raise ConfigError("EOS coefficient a must be positive")
        if self.kind == ISENTROPIC:
            if not self.gamma > 1:
                raise ConfigError("isentropic EOS requires gamma > 1")
            object.__setattr__(self, "rho_bar", math.inf)
            ref = 1.0 if self.rho_ref is None else self.rho_ref
        else:
            if not self.beta > 0:
                raise ConfigError("hard-sphere EOS requires beta > 0")
            if not (self.rho_bar > 0 and math.isfinite(self.rho_bar)):
                raise ConfigError("hard-sphere EOS requires finite rho_bar > 0")
            ref = 0.5 * self.rho_bar if self.rho_ref is None else self.rho_ref
        if not 0 < ref < self.rho_bar:
            raise ConfigError("rho_ref must lie in (0, rho_bar)")
        object.__setattr__(self, "rho_ref", float(ref))

    @property
    def is_hard_sphere(self) -> bool:
        return self.kind == HARD_SPHERE

    @property
    def density_floor(self) -> float:
        """Clamp margin used by the time integrator."""
        return 1e-12 * self.rho_bar if self.is_hard_sphere else 1e-12

    @functools.cached_property
    def table(self) -> "PotentialTable | None":
        if self.is_hard_sphere:
            return PotentialTable.build(self)
        return None

    @classmethod
    def from_dict(cls, d: dict) -> "EosSpec":
        kind = d.get("kind", ISENTROPIC)
        kw = {"kind": kind, "a": float(d.get("a", 1.0))}
        if kind == ISENTROPIC:
            kw["gamma"] = float(d.get("gamma", 2.0))
        else:
            kw["beta"] = float(d.get("beta", 3.0))
            kw["rho_bar"] = float(d["rho_bar"]) if "rho_bar" in d else math.nan
        if d.get("rho_ref") is not None:
            kw["rho_ref"] = float(d["rho_ref"])
        return cls(**kw)

    def to_dict(self) -> dict:
        if self.kind == ISENTROPIC:
            return {"kind": self.kind, "a": self.a, "gamma": self.gamma}
        return {"kind": self.kind, "a": self.a, "beta": self.beta,
                "rho_bar": self.rho_bar}


def _check(eos: EosSpec, rho, allow_zero=False):
    rho = np.asarray(rho, dtype=float)
    lo_bad = rho < 0 if allow_zero else rho <= 0
    if np.any(lo_bad) or np.any(rho >= eos.rho_bar) or np.any(np.isnan(rho)):
        raise DensityOutOfRange(
            f"density outside (0, {eos.rho_bar}): "
            f"min={np.nanmin(rho) if rho.size else rho}, max={np.nanmax(rho) if rho.size else rho}")
    return rho


# -- raw laws (no range checks) ------------------------------------------------

def _p(eos, rho):
    if eos.kind == ISENTROPIC:
        return eos.a * rho ** eos.gamma
    rb = eos.rho_bar
    # expm1/log1p keeps p accurate for rho << rho_bar, the gap form near rho_bar
    small = eos.a * np.expm1(-eos.beta * np.log1p(-rho / rb))
    gap = eos.a * ((rb / (rb - rho)) ** eos.beta - 1.0)
    return np.where(rho < 0.5 * rb, small, gap)


def _p_gap(eos, d):
    """Hard-sphere pressure as a function of ``rho_bar - rho`` (``d <= rho_bar/2``)."""
    return eos.a * ((eos.rho_bar / d) ** eos.beta - 1.0)


def _dp(eos, rho):
    if eos.kind == ISENTROPIC:
        return eos.a * eos.gamma * rho ** (eos.gamma - 1.0)
    rb, b = eos.rho_bar, eos.beta
    return eos.a * b * rb ** b * (rb - rho) ** (-b - 1.0)


def _ddp(eos, rho):
    if eos.kind == ISENTROPIC:
        g = eos.gamma
        return eos.a * g * (g - 1.0) * rho ** (g - 2.0)
    rb, b = eos.rho_bar, eos.beta
    return eos.a * b * (b + 1.0) * rb ** b * (rb - rho) ** (-b - 2.0)


def _P(eos, rho):
    if eos.kind == ISENTROPIC:
        return eos.a * rho ** eos.gamma / (eos.gamma - 1.0)
    return rho * eos.table.integral(rho)


def _dP(eos, rho):
    if eos.kind == ISENTROPIC:
        g = eos.gamma
        return eos.a * g * rho ** (g - 1.0) / (g - 1.0)
    return eos.table.integral(rho) + _p(eos, rho) / rho


def _ddP(eos, rho):
    return _dp(eos, rho) / rho


# -- public operations ---------------------------------------------------------

def pressure(eos: EosSpec, rho):
    """Pressure ``p(rho)``; ``p(0) = 0``."""
    r = _check(eos, rho, allow_zero=True)
    return _result(_p(eos, r), rho)


def pressure_derivative(eos: EosSpec, rho):
    r = _check(eos, rho)
    return _result(_dp(eos, r), rho)


def pressure_second_derivative(eos: EosSpec, rho):
    r = _check(eos, rho)
    return _result(_ddp(eos, r), rho)


def sound_speed(eos: EosSpec, rho):
    """``sqrt(p'(rho))``."""
    r = _check(eos, rho)
    return _result(np.sqrt(_dp(eos, r)), rho)


def pressure_potential(eos: EosSpec, rho):
    """Pressure potential ``P`` with ``P'(rho) rho - P(rho) = p(rho)``."""
    r = _check(eos, rho)
    return _result(_P(eos, r), rho)


def potential_derivative(eos: EosSpec, rho):
    """``P'(rho)``, the specific enthalpy up to the gauge constant."""
    r = _check(eos, rho)
    return _result(_dP(eos, r), rho)


def _bregman(eos, rho, R, f, df, ddf):
    rho, R = np.broadcast_arrays(np.asarray(rho, float), np.asarray(R, float))
    d = rho - R
    direct = f(eos, rho) - df(eos, R) * d - f(eos, R)
    margin = np.minimum(np.minimum(rho, R), eos.rho_bar - np.maximum(rho, R))
    near = np.abs(d) <= _NEAR_FRACTION * margin
    if np.any(near):
        # (rho - R)**2 * int_0^1 (1 - x) f''(R + x (rho - R)) dx
        Rn, dn = R[near], d[near]
        s = Rn[:, None] + dn[:, None] * _GL01_X[None, :]
        integral = (ddf(eos, s) * (1.0 - _GL01_X) * _GL01_W).sum(axis=1)
        direct = np.array(direct, dtype=float, copy=True)
        direct[near] = dn * dn * integral
    return direct


def relative_potential(eos: EosSpec, rho, R):
    """Bregman divergence ``P(rho) - P'(R)(rho - R) - P(R)`` (>= 0)."""
    _check(eos, rho)
    _check(eos, R)
    return _result(_bregman(eos, rho, R, _P, _dP, _ddP), rho, R)


def relative_pressure(eos: EosSpec, rho, R):
    """Bregman divergence of the pressure, ``p(rho) - p'(R)(rho - R) - p(R)``."""
    _check(eos, rho)
    _check(eos, R)
    return _result(_bregman(eos, rho, R, _p, _dp, _ddp), rho, R)


def clamp_density(eos: EosSpec, rho):
    """Clamp into ``[eps, rho_bar - eps]``; return the clamped array and count."""
    eps = eos.density_floor
    hi = eos.rho_bar - eps if eos.is_hard_sphere else np.inf
    rho = np.asarray(rho, dtype=float)
    bad = (rho < eps) | (rho > hi)
    n = int(np.count_nonzero(bad))
    if n:
        rho = np.clip(rho, eps, hi)
    return rho, n


def growth_ratio(eos: EosSpec, gamma: float = 2.0, n: int = 2001) -> float:
    """Sampled proxy for ``liminf p / (P + rho**gamma)`` near the maximal density.

    For the hard-sphere law the minimum is taken over
    ``[0.9 rho_bar, 0.999 rho_bar]``; for the isentropic law over
    ``[1e3, 1e6]`` (log spaced).
    """
    if eos.is_hard_sphere:
        rho = np.linspace(0.9, 0.999, n) * eos.rho_bar
    else:
        rho = np.geomspace(1e3, 1e6, n)
    return float(np.min(_p(eos, rho) / (_P(eos, rho) + rho ** gamma)))


def pressure_comparability(eos: EosSpec, R: float, lo: float, hi: float,
                           n: int = 4001) -> float:
    """Smallest ``C`` with ``(rho/R - 1)**2 <= C * relative_pressure(rho, R)``
    for sampled ``rho`` in ``[lo, hi]``."""
    rho = np.linspace(lo, hi, n)
    rho = rho[np.abs(rho - R) > 1e-9 * R]
    ratio = (rho / R - 1.0) ** 2 / relative_pressure(eos, rho, R)
    limit = 2.0 / (R * R * _ddp(eos, R))
    return float(max(np.max(ratio), limit))


# -- potential table -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PotentialTable:
    """Tabulated ``I(rho) = int_{anchor}^{rho} p(s)/s**2 ds`` for the hard-sphere law.

    Nodes are log spaced in ``rho`` on ``[1e-8 rho_bar, rho_bar/2]`` and log
    spaced in ``rho_bar - rho`` on ``[rho_bar/2, rho_bar (1 - 1e-13)]``.
    """

    eos: EosSpec
    densities: np.ndarray
    values: np.ndarray
    anchor: float
    n_lower: int

    @classmethod
    def build(cls, eos: EosSpec, n_nodes: int = 4096) -> "PotentialTable":
        rb = eos.rho_bar
        half = n_nodes // 2
        lower = np.geomspace(1e-8 * rb, 0.5 * rb, half)
        gaps = np.geomspace(0.5 * rb, 1e-13 * rb, n_nodes - half + 1)[1:]
        nodes = np.concatenate([lower, rb - gaps])
        anchor = 1e-3 * rb

        def f(s):
            return float(_p(eos, s)) / (s * s)

        def g(tau):
            # integrand in tau = log(rho_bar - s)
            d = math.exp(tau)
            s = rb - d
            return float(_p_gap(eos, d)) / (s * s) * d

        seg = np.empty(n_nodes - 1)
        for k in range(n_nodes - 1):
            if k < half - 1:
                args = (f, nodes[k], nodes[k + 1])
            else:
                args = (g, math.log(rb - nodes[k + 1]), math.log(rb - nodes[k]))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(*args, epsabs=1e-12, epsrel=1e-12, limit=200)
            if not np.isfinite(val) or (err > 1e-12 and err > 1e-10 * abs(val)):
                raise QuadratureFailure(
                    f"segment [{nodes[k]}, {nodes[k + 1]}] did not converge (err={err})")
            seg[k] = val
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        table = cls(eos, nodes, cum, anchor, half)
        shift = table._integral_raw(np.array([anchor]))[0]
        object.__setattr__(table, "values", cum - shift)
        return table

    def _integral_raw(self, rho):
        eos, nodes, vals = self.eos, self.densities, self.values
        rb = eos.rho_bar
        k = np.clip(np.searchsorted(nodes, rho, side="right") - 1, 0, len(nodes) - 1)
        out = np.empty_like(rho)

        # below the first node: integrate in log(s)
        below = rho < nodes[0]
        if np.any(below):
            lo, hi = np.log(rho[below]), np.log(nodes[0])
            t = lo[:, None] + (hi - lo)[:, None] * _GL01_X[None, :]
            s = np.exp(t)
            integ = (_p(eos, s) / s * _GL01_W).sum(axis=1) * (hi - lo)
            out[below] = vals[0] - integ

        # lower region: linear variable between node k and rho
        low = ~below & (k < self.n_lower)
        if np.any(low):
            a, b = nodes[k[low]], rho[low]
            s = a[:, None] + (b - a)[:, None] * _GL01_X[None, :]
            integ = (_p(eos, s) / (s * s) * _GL01_W).sum(axis=1) * (b - a)
            out[low] = vals[k[low]] + integ

        # upper region: integrate in tau = log(rb - s)
        up = ~below & ~low
        if np.any(up):
            ta, tb = np.log(rb - nodes[k[up]]), np.log(rb - rho[up])
            t = ta[:, None] + (tb - ta)[:, None] * _GL01_X[None, :]
            g = np.exp(t)
            s = rb - g
            integ = -(_p_gap(eos, g) / (s * s) * g * _GL01_W).sum(axis=1) * (tb - ta)
            out[up] = vals[k[up]] + integ
        return out

    def integral(self, rho):
        rho = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(rho).ravel()
        return self._integral_raw(flat).reshape(rho.shape)

    @property
    def anchor_value(self) -> float:
        """``P(rho_ref)``."""
        ref = self.eos.rho_ref
        return float(ref * self.integral(ref))

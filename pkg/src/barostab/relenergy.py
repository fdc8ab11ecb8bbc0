"""Relative energy with respect to a steady state, and the terms of its balance.

For a steady pair ``(R, U)`` and ``v = u - U`` the reduced balance reads::

    dE/dt = -D - B_out + B_in + T_grad + T_press + T_rem

where ``D`` is the viscous dissipation of ``v``, ``B_out``/``B_in`` are the
Bregman fluxes through the outflow/inflow faces, and

    T_grad  = -int rho v^2 U_r w
    T_press = -int p(rho | R) div U w
    T_rem   =  int (rho / R - 1) (U - u) (R U U_r + p(R)_r) w .

``lhs_minus_rhs = D + B_out - B_in - T_grad - T_press - T_rem`` is the
amount by which the sign-definite terms dominate the indefinite ones; it
predicts ``-dE/dt`` up to discretisation error.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import eos as eosmod
from .eos import EosSpec
from .errors import ConfigError, InsufficientSamples
from .steady import EXTERIOR, BoundaryData, SteadyProfile


@dataclass(frozen=True)
class RelEnergySample:
    t: float
    E: float
    D: float
    B_out: float
    B_in: float
    T_grad: float
    T_press: float
    T_rem: float
    lhs_minus_rhs: float
    monotone_flag: bool = True
    W_press7: float = math.nan
    W_dens7: float = math.nan

    def as_dict(self) -> dict:
        return asdict(self)


CSV_COLUMNS = ("t", "E", "D", "B_in", "B_out", "T_grad", "T_press", "T_rem",
               "lhs_minus_rhs", "monotone_flag")


@dataclass(frozen=True, eq=False)
class Reference:
    """Steady fields sampled at the cell centres of a state."""

    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    du: np.ndarray
    defect: np.ndarray   # R U U_r + p(R)_r
    alpha: int

    @classmethod
    def from_arrays(cls, r, rho, u, alpha, eos: EosSpec) -> "Reference":
        """Derivatives by second-order differences (one-sided at the ends)."""
        du = np.gradient(u, r, edge_order=2)
        dp = np.gradient(eosmod.pressure(eos, rho), r, edge_order=2)
        return cls(r, rho, u, du, rho * u * du + dp, alpha)

    @classmethod
    def from_state(cls, state, eos: EosSpec) -> "Reference":
        return cls.from_arrays(state.r, state.rho.copy(), state.u.copy(),
                               state.geometry.alpha, eos)

    @classmethod
    def from_profile(cls, profile: SteadyProfile, r) -> "Reference":
        """Cubic resampling; derivatives from the solver's own fields."""
        r = np.asarray(r, float)
        rho, u, du = profile.resample(r)
        div = du + profile.geometry.alpha * u / r
        drho = -rho * div / u
        dp = eosmod.pressure_derivative(profile.eos, rho) * drho
        return cls(r, rho, u, du, rho * u * du + dp, profile.geometry.alpha)

    @property
    def div(self) -> np.ndarray:
        return self.du + self.alpha * self.u / self.r


def _reference(state, profile, eos) -> Reference:
    if isinstance(profile, Reference):
        ref = profile
    elif isinstance(profile, SteadyProfile):
        ref = Reference.from_profile(profile, state.r)
    else:
        ref = Reference.from_state(profile, eos)
    if ref.r.shape != state.r.shape or not np.allclose(ref.r, state.r, rtol=0, atol=1e-12):
        raise ConfigError("state and reference must share the grid")
    return ref


def relative_energy(state, profile, eos: EosSpec) -> float:
    """Midpoint quadrature of ``rho |u - U|^2 / 2 + P(rho | R)`` with weight ``w``.

    ``profile`` may be a :class:`SteadyProfile` (resampled at the cell
    centres), a :class:`Reference`, or another state on the same grid.
    """
    ref = _reference(state, profile, eos)
    w = state.r ** ref.alpha
    rho, u = state.rho, state.u
    dens = 0.5 * rho * (u - ref.u) ** 2 + eosmod.relative_potential(eos, rho, ref.rho)
    return float(state.h * np.sum(w * dens))


def _face_difference(state, ref: Reference):
    """``v`` and ``v_r`` at all faces; ``v = 0`` on the boundary faces."""
    h = state.h
    v = state.u - ref.u
    faces = state.grid.faces
    vf = np.empty(faces.size)
    dv = np.empty(faces.size)
    vf[1:-1] = 0.5 * (v[1:] + v[:-1])
    dv[1:-1] = (v[1:] - v[:-1]) / h
    vf[0] = vf[-1] = 0.0
    dv[0] = v[0] / (0.5 * h)
    dv[-1] = -v[-1] / (0.5 * h)
    qw = np.full(faces.size, h)
    qw[0] = qw[-1] = 0.5 * h
    return faces, vf, dv, qw


def dissipation(state, profile, mu: float, lam: float, eos: EosSpec | None = None) -> float:
    """Viscous dissipation of ``v = u - U`` for the symmetric reduction.

    Radial: ``int [2 mu (v_r^2 + 2 (v/r)^2) + (lam - 2 mu / 3)(v_r + 2 v / r)^2] r^2 dr``;
    flat: ``int nu v_r^2 dr``.  Quadrature on the faces, where ``v_r`` is a
    centred difference and ``v`` vanishes on the boundary.
    """
    ref = _reference(state, profile, eos)
    r, vf, dv, qw = _face_difference(state, ref)
    if ref.alpha == 0:
        return float(np.sum(qw * (4.0 / 3.0 * mu + lam) * dv ** 2))
    vr = vf / r
    dens = 2 * mu * (dv ** 2 + 2 * vr ** 2) + (lam - 2 * mu / 3) * (dv + 2 * vr) ** 2
    return float(np.sum(qw * dens * r ** 2))


def _trace(x, side):
    """Linear extrapolation of cell values to the boundary face."""
    if side == 0:
        return 1.5 * x[0] - 0.5 * x[1]
    return 1.5 * x[-1] - 0.5 * x[-2]


def inequality_ledger(state, profile, eos: EosSpec, boundary: BoundaryData,
                      previous: RelEnergySample | None = None) -> RelEnergySample:
    """All terms of the relative energy balance at one instant."""
    ref = _reference(state, profile, eos)
    h = state.h
    r = state.r
    w = r ** ref.alpha
    rho, u = state.rho, state.u
    v = u - ref.u
    E = relative_energy(state, ref, eos)
    D = dissipation(state, ref, boundary.mu, boundary.lam)
    T_grad = -float(h * np.sum(w * rho * v ** 2 * ref.du))
    prel = eosmod.relative_pressure(eos, rho, ref.rho)
    T_press = -float(h * np.sum(w * prel * ref.div))
    T_rem = float(h * np.sum(w * (rho / ref.rho - 1.0) * (-v) * ref.defect))

    # boundary Bregman fluxes from extrapolated traces
    faces = state.grid.faces
    fluxes = []
    for side in (0, 1):
        rf = faces[0] if side == 0 else faces[-1]
        wf = rf ** ref.alpha
        br = float(eosmod.relative_potential(
            eos, max(_trace(rho, side), 1e-300), max(_trace(ref.rho, side), 1e-300)))
        un = _trace(ref.u, side) * (-1.0 if side == 0 else 1.0)
        fluxes.append((br * abs(un) * wf, un > 0))
    B_out = sum(f for f, out in fluxes if out)
    B_in = sum(f for f, out in fluxes if not out)
    lhs = D + B_out - B_in - T_grad - T_press - T_rem
    W_p7 = W_d7 = math.nan
    if state.geometry.kind == EXTERIOR:
        W_p7 = float(h * np.sum(w * prel * r ** -7.0))
        W_d7 = float(h * np.sum(w * (rho - ref.rho) ** 2 * r ** -7.0))
    mono = True if previous is None else E <= previous.E
    return RelEnergySample(float(state.t), E, D, B_out, B_in, T_grad, T_press, T_rem, lhs,
                           mono, W_p7, W_d7)


class LedgerRecorder:
    """Callback for :func:`barostab.evolve.run` collecting ledger samples."""

    def __init__(self, reference, eos: EosSpec, boundary: BoundaryData):
        self.reference = reference
        self.eos = eos
        self.boundary = boundary
        self.samples: list[RelEnergySample] = []
        self._ref = None

    def __call__(self, state) -> RelEnergySample:
        if self._ref is None:
            self._ref = _reference(state, self.reference, self.eos)
        prev = self.samples[-1] if self.samples else None
        s = inequality_ledger(state, self._ref, self.eos, self.boundary, prev)
        self.samples.append(s)
        return s


def _trapezoid(y, t):
    y = np.asarray(y, float)
    t = np.asarray(t, float)
    if y.size < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def decay_report(samples, transient: float = 0.0, uptick_tol: float = 1e-12,
                 decay_target: float = 1e-3) -> dict:
    """Summary of a relative energy history.

    ``samples`` are :class:`RelEnergySample` objects or mappings with at
    least ``t``, ``E`` and ``D``.  An uptick after ``transient`` larger
    than ``uptick_tol * max(E)`` fails the monotone-decay verdict.
    """
    if len(samples) < 10:
        raise InsufficientSamples(f"need at least 10 samples, got {len(samples)}")
    get = (lambda s, k: s[k]) if isinstance(samples[0], dict) else getattr
    t = np.array([float(get(s, "t")) for s in samples])
    E = np.array([float(get(s, "E")) for s in samples])
    D = np.array([float(get(s, "D")) for s in samples])
    Emax = float(np.max(E))
    out = {"n_samples": len(samples), "t_final": float(t[-1]), "transient": transient,
           "E_initial": float(E[0]), "E_final": float(E[-1]), "E_max": Emax}
    if Emax == 0.0:
        out.update(final_over_initial=math.nan, post_transient_E=0.0,
                   final_over_post_transient=math.nan, max_uptick=0.0,
                   decay_rate=math.nan, dissipation_integral=0.0,
                   dissipation_final_half_share=0.0, monotone=True, decay_target_met=True,
                   verdict="PASS")
        return out
    after = t >= transient - 1e-12 * max(1.0, abs(transient))
    k0 = int(np.argmax(after)) if after.any() else len(t) - 1
    Ea = E[k0:]
    ups = np.diff(Ea)
    max_up = float(np.max(ups)) if ups.size else 0.0
    monotone = max_up <= uptick_tol * Emax
    half = t >= 0.5 * (t[0] + t[-1])
    pos = half & (E > 0)
    rate = math.nan
    if pos.sum() >= 2:
        rate = float(-np.polyfit(t[pos], np.log(E[pos]), 1)[0])
    total = _trapezoid(D, t)
    kh = int(np.argmax(half))
    late = _trapezoid(D[kh:], t[kh:])
    post = float(E[k0])
    ratio = float(E[-1] / post) if post > 0 else math.nan
    out.update(final_over_initial=float(E[-1] / E[0]) if E[0] > 0 else math.nan,
               post_transient_E=post, final_over_post_transient=ratio,
               max_uptick=max(max_up, 0.0), decay_rate=rate, dissipation_integral=total,
               dissipation_final_half_share=float(late / total) if total > 0 else 0.0,
               monotone=bool(monotone),
               decay_target_met=bool(post > 0 and ratio <= decay_target),
               verdict="PASS" if monotone else "FAIL")
    return out


def cumulative(samples, key: str) -> np.ndarray:
    """Running trapezoidal time integral of one ledger column."""
    t = np.array([s.t for s in samples])
    y = np.array([getattr(s, key) for s in samples])
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out

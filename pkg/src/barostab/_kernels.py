"""Compiled finite-volume kernels.

Everything here works on plain arrays and scalars so that numba can
compile it; the public wrappers live in :mod:`barostab.evolve`.

EOS codes: 0 isentropic ``p = a rho**g``; 1 hard sphere
``p = a ((rb / (rb - rho))**g - 1)`` with ``g`` the exponent beta.
Boundary codes: 0 inflow (density and velocity imposed), 1 outflow
(velocity imposed, density extrapolated).
"""

import math

import numpy as np
from numba import njit

INFLOW = 0
OUTFLOW = 1


@njit(cache=True, nogil=True)
def _ipow(x, g):
    # integer exponents are common (gamma = 2, beta = 3) and much cheaper
    if g == 2.0:
        return x * x
    if g == 3.0:
        return x * x * x
    if g == 1.0:
        return x
    return x ** g


@njit(cache=True, nogil=True)
def pressure(kind, a, g, rb, rho):
    if kind == 0:
        return a * _ipow(rho, g)
    return a * (_ipow(rb / (rb - rho), g) - 1.0)


@njit(cache=True, nogil=True)
def sound_speed2(kind, a, g, rb, rho):
    if kind == 0:
        return a * g * _ipow(rho, g) / rho
    return a * g * _ipow(rb / (rb - rho), g) / (rb - rho)


@njit(cache=True, nogil=True)
def p_c(kind, a, g, rb, rho):
    """Pressure and sound speed from a single power evaluation."""
    if kind == 0:
        q = _ipow(rho, g)
        return a * q, math.sqrt(a * g * q / rho)
    q = _ipow(rb / (rb - rho), g)
    return a * (q - 1.0), math.sqrt(a * g * q / (rb - rho))


@njit(cache=True, nogil=True)
def minmod(x, y):
    if x * y <= 0.0:
        return 0.0
    if abs(x) < abs(y):
        return x
    return y


@njit(cache=True, nogil=True)
def _ghosts(side, n, order, side_type, b_rho, b_u, rho_ext, u_ext, rb):
    """Fill the two ghost cells on one side (0 left, 1 right).

    Extended layout is ``[g2, g1, c0, ..., c_{n-1}, g1, g2]``.  First order
    copies the boundary values; second order mirrors linearly through them
    so that the reconstructed face state matches the data.
    """
    if side == 0:
        i1, i2, c1, c2 = 1, 0, 2, 3
    else:
        i1, i2, c1, c2 = n + 2, n + 3, n + 1, n
    # velocity is imposed on both inflow and outflow faces
    if order == 1:
        u_ext[i1] = b_u
        u_ext[i2] = b_u
    else:
        u_ext[i1] = 2.0 * b_u - u_ext[c1]
        u_ext[i2] = 2.0 * b_u - u_ext[c2]
    if side_type == 0:
        if order == 1:
            rho_ext[i1] = b_rho
            rho_ext[i2] = b_rho
        else:
            rho_ext[i1] = 2.0 * b_rho - rho_ext[c1]
            rho_ext[i2] = 2.0 * b_rho - rho_ext[c2]
    else:
        g1 = 2.0 * rho_ext[c1] - rho_ext[c2]
        g2 = 3.0 * rho_ext[c1] - 2.0 * rho_ext[c2]
        if g1 <= 0.0 or g1 >= rb or g2 <= 0.0 or g2 >= rb:
            g1 = rho_ext[c1]
            g2 = rho_ext[c1]
        rho_ext[i1] = g1
        rho_ext[i2] = g2
    for i in (i1, i2):
        if not (rho_ext[i] > 0.0 and rho_ext[i] < rb):
            rho_ext[i] = b_rho if side_type == 0 else rho_ext[c1]


@njit(cache=True, nogil=True)
def rhs(rho, m, wf, wc, ihv, ihwf, h, nu, kind, a, g, rb, order,
        lt, l_rho, l_u, rt, r_rho, r_u, drho, dm, work):
    """Semi-discrete right side; returns the weighted mass fluxes at both ends.

    ``wf``: weights at the ``n + 1`` faces; ``wc``: weights at the ``n + 2``
    centres including one ghost centre on each side; ``ihv``: ``1 / (h V_i)``
    with ``V_i = int w dr / h``; ``ihwf``: ``1 / (h wf)``.  ``work`` is a
    scratch array of shape ``(7, n + 4)``.
    """
    n = rho.size
    rho_e = work[0]
    u_e = work[1]
    fr = work[2]
    fm = work[3]
    pe = work[4]
    ce = work[5]
    phi = work[6]
    for i in range(n):
        rho_e[i + 2] = rho[i]
        u_e[i + 2] = m[i] / rho[i]
    _ghosts(0, n, order, lt, l_rho, l_u, rho_e, u_e, rb)
    _ghosts(1, n, order, rt, r_rho, r_u, rho_e, u_e, rb)
    if kind == 0:
        for i in range(1, n + 3):
            q = a * _ipow(rho_e[i], g)
            pe[i] = q
            ce[i] = math.sqrt(g * q / rho_e[i])
    else:
        for i in range(1, n + 3):
            pe[i], ce[i] = p_c(kind, a, g, rb, rho_e[i])

    # viscous velocities: quadratic extrapolation hitting the face value
    ug_l = (8.0 * l_u - 6.0 * u_e[2] + u_e[3]) / 3.0
    ug_r = (8.0 * r_u - 6.0 * u_e[n + 1] + u_e[n]) / 3.0

    if order == 1:
        # branch-free face loop; the viscous fluxes at the two ends are fixed below
        for f in range(n + 1):
            rl = rho_e[f + 1]
            ul = u_e[f + 1]
            rr = rho_e[f + 2]
            ur = u_e[f + 2]
            s = max(abs(ul) + ce[f + 1], abs(ur) + ce[f + 2])
            ml = rl * ul
            mr = rr * ur
            fr[f] = wf[f] * (0.5 * (ml + mr) - 0.5 * s * (rr - rl))
            fm[f] = wf[f] * (0.5 * (ml * ul + pe[f + 1] + mr * ur + pe[f + 2])
                             - 0.5 * s * (mr - ml))
            phi[f] = (wc[f + 1] * ur - wc[f] * ul) * ihwf[f]
        phi[0] = (wc[1] * u_e[2] - wc[0] * ug_l) * ihwf[0]
        phi[n] = (wc[n + 1] * ug_r - wc[n] * u_e[n + 1]) * ihwf[n]
        nuh = nu / h
        for i in range(n):
            drho[i] = -(fr[i + 1] - fr[i]) * ihv[i]
            dm[i] = (-(fm[i + 1] - fm[i]) + pe[i + 2] * (wf[i + 1] - wf[i])) * ihv[i] \
                + nuh * (phi[i + 1] - phi[i])
        return fr[0], fr[n]

    for f in range(n + 1):
        # face f sits between extended cells f + 1 and f + 2
        il = f + 1
        ir = f + 2
        rl = rho_e[il]
        ul = u_e[il]
        rr = rho_e[ir]
        ur = u_e[ir]
        if order == 2:
            rl += 0.5 * minmod(rho_e[il] - rho_e[il - 1], rho_e[ir] - rho_e[il])
            ul += 0.5 * minmod(u_e[il] - u_e[il - 1], u_e[ir] - u_e[il])
            rr -= 0.5 * minmod(rho_e[ir] - rho_e[il], rho_e[ir + 1] - rho_e[ir])
            ur -= 0.5 * minmod(u_e[ir] - u_e[il], u_e[ir + 1] - u_e[ir])
            if f == 0:
                if lt == 0:
                    rl = l_rho
                ul = l_u
            if f == n:
                if rt == 0:
                    rr = r_rho
                ur = r_u
            pl, cl = p_c(kind, a, g, rb, rl)
            pr, cr = p_c(kind, a, g, rb, rr)
        else:
            pl = pe[il]
            cl = ce[il]
            pr = pe[ir]
            cr = ce[ir]
        sl = abs(ul) + cl
        sr = abs(ur) + cr
        s = sl if sl > sr else sr
        ml = rl * ul
        mr = rr * ur
        fr[f] = wf[f] * (0.5 * (ml + mr) - 0.5 * s * (rr - rl))
        fm[f] = wf[f] * (0.5 * (ml * ul + pl + mr * ur + pr) - 0.5 * s * (mr - ml))
        ua = ug_l if f == 0 else u_e[f + 1]
        ub = ug_r if f == n else u_e[f + 2]
        phi[f] = (wc[f + 1] * ub - wc[f] * ua) * ihwf[f]

    nuh = nu / h
    for i in range(n):
        drho[i] = -(fr[i + 1] - fr[i]) * ihv[i]
        dm[i] = (-(fm[i + 1] - fm[i]) + pe[i + 2] * (wf[i + 1] - wf[i])) * ihv[i] \
            + nuh * (phi[i + 1] - phi[i])
    return fr[0], fr[n]


@njit(cache=True, nogil=True)
def max_speed(rho, m, kind, a, g, rb):
    lam = 0.0
    rmin = np.inf
    for i in range(rho.size):
        s = abs(m[i] / rho[i]) + p_c(kind, a, g, rb, rho[i])[1]
        if s > lam:
            lam = s
        if rho[i] < rmin:
            rmin = rho[i]
    return lam, rmin


@njit(cache=True, nogil=True)
def stable_dt(rho, m, h, nu, cfl, kind, a, g, rb):
    lam, rmin = max_speed(rho, m, kind, a, g, rb)
    dt = h / lam
    if nu > 0.0:
        dv = h * h * rmin / (2.0 * nu)
        if dv < dt:
            dt = dv
    return cfl * dt


@njit(cache=True, nogil=True)
def _clamp(rho, lo, hi):
    count = 0
    for i in range(rho.size):
        if rho[i] < lo:
            rho[i] = lo
            count += 1
        elif rho[i] > hi:
            rho[i] = hi
            count += 1
    return count


@njit(cache=True, nogil=True)
def ssp_rk2(rho, m, dt, wf, wc, ihv, ihwf, h, nu, kind, a, g, rb, order, lt, rt, bc,
            lo, hi, src_rho, src_m, work):
    """One SSP-RK2 step in place; returns ``(clamps, expected_mass_change)``.

    ``bc`` has shape ``(2, 4)``: per stage ``(l_rho, l_u, r_rho, r_u)``.
    ``src_rho`` and ``src_m`` are per-stage additive sources of shape
    ``(2, n)``, or ``(0, 0)`` when absent.  The expected mass change is the
    weighted boundary flux integrated by the same stages, so
    ``sum(V h rho)`` changes by exactly this amount (sources aside).
    ``work`` has shape ``(13, n + 4)``.
    """
    n = rho.size
    k1r = work[7]
    k1m = work[8]
    k2r = work[9]
    k2m = work[10]
    r1 = work[11]
    m1 = work[12]
    has_src = src_rho.shape[0] == 2
    fl1, fr1 = rhs(rho, m, wf, wc, ihv, ihwf, h, nu, kind, a, g, rb, order,
                   lt, bc[0, 0], bc[0, 1], rt, bc[0, 2], bc[0, 3], k1r, k1m, work)
    for i in range(n):
        r1[i] = rho[i] + dt * k1r[i]
        m1[i] = m[i] + dt * k1m[i]
        if has_src:
            r1[i] += dt * src_rho[0, i]
            m1[i] += dt * src_m[0, i]
    clamps = _clamp(r1[:n], lo, hi)
    fl2, fr2 = rhs(r1[:n], m1[:n], wf, wc, ihv, ihwf, h, nu, kind, a, g, rb, order,
                   lt, bc[1, 0], bc[1, 1], rt, bc[1, 2], bc[1, 3], k2r, k2m, work)
    for i in range(n):
        sr = k2r[i]
        sm = k2m[i]
        if has_src:
            sr += src_rho[1, i]
            sm += src_m[1, i]
        rho[i] = 0.5 * rho[i] + 0.5 * (r1[i] + dt * sr)
        m[i] = 0.5 * m[i] + 0.5 * (m1[i] + dt * sm)
    clamps += _clamp(rho, lo, hi)
    return clamps, 0.5 * dt * ((fl1 - fr1) + (fl2 - fr2))


@njit(cache=True, nogil=True)
def advance(rho, m, t, t_target, max_steps, cfl, wf, wc, ihv, ihwf, h, nu, kind, a, g, rb,
            order, lt, rt, bc, lo, hi):
    """Step from ``t`` to exactly ``t_target`` with constant boundary data.

    Returns ``(t, steps, clamps, status)``; status 0 ok, 1 non-finite state,
    2 step limit reached.
    """
    n = rho.size
    work = np.empty((13, n + 4))
    none = np.zeros((0, 0))
    steps = 0
    clamps = 0
    while t < t_target:
        if steps >= max_steps:
            return t, steps, clamps, 2
        dt = stable_dt(rho, m, h, nu, cfl, kind, a, g, rb)
        if not math.isfinite(dt) or dt <= 0.0:
            return t, steps, clamps, 1
        last = False
        if t + dt >= t_target:
            dt = t_target - t
            last = True
        c, _ = ssp_rk2(rho, m, dt, wf, wc, ihv, ihwf, h, nu, kind, a, g, rb, order,
                       lt, rt, bc, lo, hi, none, none, work)
        clamps += c
        steps += 1
        t = t_target if last else t + dt
    for i in range(n):
        if not (math.isfinite(rho[i]) and math.isfinite(m[i])):
            return t, steps, clamps, 1
    return t, steps, clamps, 0

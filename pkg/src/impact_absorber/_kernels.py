"""Compiled fixed-step Bogacki-Shampine (RK3, FSAL) kernels.

State layout: ``y = [q_1..q_n, dq_1..dq_n, q_a, dq_a]`` with modal coordinates
of a mass-normalized host. The host feels ``-phic * f_c``, the absorber ``+f_c``.
"""

import numpy as np
from numba import njit

_B1, _B2, _B3 = 2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0


@njit(cache=True, nogil=True)
def _rhs(y, out, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g, fcos):
    delta = -y[2 * n]
    for k in range(n):
        delta += phic[k] * y[k]
    pen = abs(delta) - g
    fc = 0.0
    if pen > 0.0:
        fc = kH * pen * np.sqrt(pen)
        if delta < 0.0:
            fc = -fc
    hf = coupling * fc
    for k in range(n):
        out[k] = y[n + k]
        out[n + k] = (-2.0 * zeta[k] * omega[k] * y[n + k] - omega[k] * omega[k] * y[k]
                      - phic[k] * hf + fvec[k] * fcos)
    out[2 * n] = y[2 * n + 1]
    out[2 * n + 1] = fc * inv_ma
    return fc


@njit(cache=True, nogil=True)
def bs3_step(y, h, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g, c0, c1, c2):
    """One BS3 step from ``y`` (in place). ``c0..c2`` are the forcing cosines at the
    stage times t, t+h/2, t+3h/4. Returns the weighted contact force of the step,
    i.e. the impulse divided by ``h``."""
    m = y.size
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    tmp = np.empty(m)
    f1 = _rhs(y, k1, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g, c0)
    for i in range(m):
        tmp[i] = y[i] + 0.5 * h * k1[i]
    f2 = _rhs(tmp, k2, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g, c1)
    for i in range(m):
        tmp[i] = y[i] + 0.75 * h * k2[i]
    f3 = _rhs(tmp, k3, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g, c2)
    for i in range(m):
        y[i] += h * (_B1 * k1[i] + _B2 * k2[i] + _B3 * k3[i])
    return _B1 * f1 + _B2 * f2 + _B3 * f3


@njit(cache=True, nogil=True)
def _delta(y, n, phic):
    d = -y[2 * n]
    for k in range(n):
        d += phic[k] * y[k]
    return d


@njit(cache=True, nogil=True)
def _ddelta(y, n, phic):
    d = -y[2 * n + 1]
    for k in range(n):
        d += phic[k] * y[n + k]
    return d


@njit(cache=True, nogil=True)
def run_periods(y, n, omega, zeta, phic, fvec, inv_ma, kH, g, cos_tab, sin_tab, dt,
                n_periods, state_limit, max_impacts, rec_every, rec, carry):
    """Integrate ``n_periods`` forcing periods of ``len(cos_tab[0])`` steps each.

    ``cos_tab[s, j]`` holds cos(Omega (j + c_s) dt) for the stage offsets
    c = (0, 1/2, 3/4, 1); ``sin_tab[j]`` holds sin(Omega j dt). Returns the
    per-period fundamental Fourier coefficient of q_1 (real, imag), an impact
    table with columns (onset time, release time, v_c, modal CoR, sign) and the
    number of impacts; ``n_impacts < 0`` marks divergence. When ``rec_every > 0``
    every rec_every-th state (with time) is written to ``rec``. ``carry`` holds
    (in-contact flag, onset v_c) across calls so impacts may straddle batches.
    """
    m = y.size
    npp = cos_tab.shape[1]
    coef_re = np.zeros(n_periods)
    coef_im = np.zeros(n_periods)
    imp = np.zeros((max_impacts, 5))
    n_imp = 0
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    tmp = np.empty(m)
    f1 = _rhs(y, k1, n, omega, zeta, phic, fvec, 1.0, inv_ma, kH, g, cos_tab[0, 0])
    d_prev = _delta(y, n, phic)
    dd_prev = _ddelta(y, n, phic)
    in_contact = carry[0] != 0.0
    v_on = carry[1]
    if in_contact:
        imp[0, 0] = np.nan
        imp[0, 2] = v_on
    n_rec = 0
    step = 0
    for p in range(n_periods):
        sre = 0.0
        sim = 0.0
        t0 = p * npp * dt
        for j in range(npp):
            sre += y[0] * cos_tab[0, j]
            sim -= y[0] * sin_tab[j]
            if rec_every > 0 and step % rec_every == 0 and n_rec < rec.shape[0]:
                rec[n_rec, 0] = t0 + j * dt
                for i in range(m):
                    rec[n_rec, 1 + i] = y[i]
                n_rec += 1
            for i in range(m):
                tmp[i] = y[i] + 0.5 * dt * k1[i]
            _rhs(tmp, k2, n, omega, zeta, phic, fvec, 1.0, inv_ma, kH, g, cos_tab[1, j])
            for i in range(m):
                tmp[i] = y[i] + 0.75 * dt * k2[i]
            _rhs(tmp, k3, n, omega, zeta, phic, fvec, 1.0, inv_ma, kH, g, cos_tab[2, j])
            for i in range(m):
                y[i] += dt * (_B1 * k1[i] + _B2 * k2[i] + _B3 * k3[i])
            f1 = _rhs(y, k1, n, omega, zeta, phic, fvec, 1.0, inv_ma, kH, g, cos_tab[3, j])
            step += 1
            d_new = _delta(y, n, phic)
            dd_new = _ddelta(y, n, phic)
            now_contact = f1 != 0.0
            if now_contact and not in_contact:
                # linear interpolation of the gap crossing inside the step
                a_prev = abs(d_prev) - g
                a_new = abs(d_new) - g
                s = -a_prev / (a_new - a_prev) if a_new != a_prev else 1.0
                v_on = abs(dd_prev + s * (dd_new - dd_prev))
                if n_imp < max_impacts:
                    imp[n_imp, 0] = t0 + (j + s) * dt
                    imp[n_imp, 2] = v_on
                    imp[n_imp, 4] = 1.0 if d_new > 0.0 else -1.0
            elif in_contact and not now_contact:
                if n_imp < max_impacts:
                    imp[n_imp, 1] = t0 + (j + 1) * dt
                    rel = y[2 * n + 1] - phic[0] * y[n]
                    imp[n_imp, 3] = abs(rel) / v_on if v_on > 0.0 else np.nan
                n_imp += 1
            in_contact = now_contact
            d_prev = d_new
            dd_prev = dd_new
        coef_re[p] = 2.0 * sre / npp
        coef_im[p] = 2.0 * sim / npp
        big = abs(y[2 * n])
        for i in range(n):
            big = max(big, abs(y[i]))
        if not big <= state_limit:
            return coef_re[:p + 1], coef_im[:p + 1], imp, -1 - n_imp, n_rec
    carry[0] = 1.0 if in_contact else 0.0
    carry[1] = v_on
    return coef_re, coef_im, imp, n_imp, n_rec

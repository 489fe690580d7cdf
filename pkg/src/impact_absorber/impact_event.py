"""Single representative impact event and extraction of pulse parameters.

The host starts undeformed and at rest, the absorber touches the wall with
velocity ``v_c``. From the simulated pulse we extract the modal coefficient of
restitution and the correction factors of the Hunter-Reed pulse.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .beam import ForcingLayout, ModalModel, resonant_amplitude_no_absorber, with_damping
from .contact import (HUNTER_REED_CONSTANT, ContactSetup, hunter_reed, max_compression)
from .semianalytic import optimum_design, pre_impact_velocity, pulse_gamma

logger = logging.getLogger(__name__)

POINTS_PER_MODE_PERIOD = 15
POINTS_PER_PULSE = 50
TIME_CAP_FACTOR = 100.0


class ImpactDivergenceError(RuntimeError):
    """The contact did not open within the time cap."""


@dataclass
class ImpactRecord:
    t: np.ndarray
    delta: np.ndarray
    force: np.ndarray
    absorber_velocity: np.ndarray
    modal_velocities: np.ndarray   # (n_samples, n_modes)
    contact_duration: float
    peak_force: float
    post_impact_absorber_velocity: float
    post_impact_modal_velocity: float  # mode 1
    impulse: float
    v_c: float
    final_state: np.ndarray
    dt: float

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.t, self.force]), delimiter=",",
                   header="t [s],f_c [N]", comments="")


@dataclass(frozen=True)
class PulseParams:
    cor: float
    alpha_tilde: float
    tc_tilde: float

    @property
    def gamma(self) -> float:
        return pulse_gamma(self.alpha_tilde, self.tc_tilde)

    @property
    def nonphysical(self) -> bool:
        return not 0.0 <= self.cor < 1.0

    def as_dict(self) -> dict:
        return {"cor": self.cor, "alpha_tilde": self.alpha_tilde, "tc_tilde": self.tc_tilde,
                "gamma": self.gamma}


def impact_time_step(model: ModalModel, contact: ContactSetup, v_c: float) -> float:
    t_mode = 2.0 * np.pi / model.natural_frequencies[-1] / POINTS_PER_MODE_PERIOD
    t_pulse = hunter_reed(contact.absorber_mass, contact.hertz_constant, v_c).contact_duration
    return min(t_mode, t_pulse / POINTS_PER_PULSE)


def simulate_single_impact(model: ModalModel, contact: ContactSetup, v_c: float, *,
                           contact_location: float | None = None, rigid_host: bool = False,
                           dt: float | None = None) -> ImpactRecord:
    """Integrate one impact until the contact opens with the absorber rebounding.

    ``rigid_host`` clamps all host coordinates (infinitely stiff and heavy host),
    which reduces the problem to a mass on a Hertz spring.
    """
    if not v_c > 0:
        raise ValueError("v_c must be > 0")
    n = model.mode_count
    x_c = model.beam.length if contact_location is None else contact_location
    phic = model.shapes(x_c)[:, 0].copy()
    omega = model.natural_frequencies.astype(float)
    zeta = model.damping_ratios.astype(float)
    fvec = np.zeros(n)
    coupling = 0.0 if rigid_host else 1.0
    kH, g, m_a = contact.hertz_constant, contact.clearance, contact.absorber_mass
    inv_ma = 1.0 / m_a
    tc_est = hunter_reed(m_a, kH, v_c).contact_duration
    h = impact_time_step(model, contact, v_c) if dt is None else dt
    t_cap = TIME_CAP_FACTOR * tc_est

    def advance(state, step):
        s = state.copy()
        w = _kernels.bs3_step(s, step, n, omega, zeta, phic, fvec, coupling, inv_ma, kH, g,
                              0.0, 0.0, 0.0)
        return s, w * step

    def gap(state):
        return abs(float(phic @ state[:n]) - state[2 * n]) - g

    y = np.zeros(2 * n + 2)
    y[2 * n] = g
    y[2 * n + 1] = v_c
    ts, ds, fs, vas, vms = [0.0], [-g], [0.0], [v_c], [y[n:2 * n].copy()]
    t, impulse, opened = 0.0, 0.0, False
    while t < t_cap:
        y_new, dJ = advance(y, h)
        if gap(y_new) <= 0.0 and y_new[2 * n + 1] <= 0.0:
            # refine the release instant on the gap crossing
            lo, hi = 0.0, 1.0
            while (hi - lo) * h > 1e-12 * tc_est:
                mid = 0.5 * (lo + hi)
                if gap(advance(y, mid * h)[0]) > 0.0:
                    lo = mid
                else:
                    hi = mid
            y_new, dJ = advance(y, hi * h)
            t += hi * h
            impulse += dJ
            y = y_new
            opened = True
        else:
            y = y_new
            t += h
            impulse += dJ
        d = float(phic @ y[:n]) - y[2 * n]
        ts.append(t)
        ds.append(d)
        fs.append(float(np.sign(d) * kH * max(abs(d) - g, 0.0) ** 1.5))
        vas.append(y[2 * n + 1])
        vms.append(y[n:2 * n].copy())
        if opened:
            break
    if not opened:
        raise ImpactDivergenceError(f"contact still closed after {t_cap:.3g} s "
                                    f"(100x the Hunter-Reed duration)")
    fs_arr = np.array(fs)
    return ImpactRecord(
        t=np.array(ts), delta=np.array(ds), force=fs_arr, absorber_velocity=np.array(vas),
        modal_velocities=np.array(vms), contact_duration=t,
        peak_force=float(np.max(np.abs(fs_arr))),
        post_impact_absorber_velocity=float(y[2 * n + 1]),
        post_impact_modal_velocity=float(y[n]), impulse=impulse, v_c=v_c,
        final_state=y, dt=h,
    )


def extract_pulse_params(record: ImpactRecord, contact: ContactSetup,
                         v_c: float | None = None) -> PulseParams:
    """Solve the corrected Hunter-Reed relations for the correction factors and
    evaluate the modal coefficient of restitution from the mode-1 velocity."""
    v_c = record.v_c if v_c is None else v_c
    kH, m_a = contact.hertz_constant, contact.absorber_mass
    a0 = max_compression(m_a, kH, v_c)
    alpha_t = (record.peak_force / kH) ** (2.0 / 3.0) / a0
    tc_t = record.contact_duration * v_c / (HUNTER_REED_CONSTANT * a0 * alpha_t)
    rel = record.post_impact_absorber_velocity - (contact.contact_shape_value
                                                  * record.post_impact_modal_velocity)
    params = PulseParams(cor=abs(rel) / v_c, alpha_tilde=alpha_t, tc_tilde=tc_t)
    if params.nonphysical:
        logger.warning("modal coefficient of restitution %.6f outside [0, 1); check modal "
                       "truncation and time step", params.cor)
    return params


def roundtrip_pulse(params: PulseParams, contact: ContactSetup, v_c: float):
    return hunter_reed(contact.absorber_mass, contact.hertz_constant, v_c,
                       params.alpha_tilde, params.tc_tilde)


@dataclass
class CalibrationResult:
    initial: PulseParams       # step (i), before the re-iteration
    final: PulseParams         # step (iii)
    v_c_initial: float
    v_c_final: float
    optimum_clearance: float   # normalized, from the step-(i) parameters
    optimum_amplitude: float

    @property
    def relative_change(self) -> dict:
        a, b = self.initial, self.final
        return {k: abs(getattr(b, k) - getattr(a, k)) / abs(getattr(a, k))
                for k in ("cor", "alpha_tilde", "tc_tilde")}


def calibrate(model: ModalModel, contact: ContactSetup, layout: ForcingLayout,
              D: float) -> CalibrationResult:
    """Two-step pulse calibration with a single re-iteration at the predicted optimum.

    The first pre-impact velocity needs r before it is known: it is seeded with
    r = 0 and recomputed once with the extracted r.
    """
    model = with_damping(model, D)
    w1 = model.natural_frequencies[0]
    phic = contact.contact_shape_value
    a_no = resonant_amplitude_no_absorber(model, layout)
    x_c = layout.contact_location

    def run(v):
        rec = simulate_single_impact(model, contact, v, contact_location=x_c)
        return extract_pulse_params(rec, contact, v)

    v0 = float(pre_impact_velocity(w1, phic * a_no, 0.0, np.pi / 4))
    seed = run(v0)
    v1 = float(pre_impact_velocity(w1, phic * a_no, min(seed.cor, 0.999), np.pi / 4))
    first = run(v1)

    mu = contact.absorber_mass * phic**2
    opt = optimum_design(D, mu * first.gamma, min(first.cor, 0.999))
    a_opt = opt.amplitude * a_no
    v2 = float(pre_impact_velocity(opt.eta * w1, phic * a_opt, first.cor, opt.psi))
    final = run(v2)
    logger.info("calibration: v_c %.4g -> %.4g m/s, r %.4f -> %.4f", v1, v2, first.cor, final.cor)
    return CalibrationResult(first, final, v1, v2, opt.clearance, opt.amplitude)

"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal.

Run with ``pytest tests/test_acceptance.py -v``. The reference scan behind
criteria 7 and 8 takes a few minutes on one core.
"""

import time

import numpy as np
import pytest

from impact_absorber.beam import ForcingLayout, resonant_amplitude_no_absorber, with_damping
from impact_absorber.config import load_config
from impact_absorber.contact import hunter_reed
from impact_absorber.impact_event import (calibrate, extract_pulse_params,
                                          simulate_single_impact)
from impact_absorber.reference import (ForcedSystem, SimConfig, detect_impacts, efficacy_scan,
                                       integrate, stepped_sine_sweep)
from impact_absorber.semianalytic import (DimensionlessDesign, clearance_ratio, critical_eta,
                                          double_root_constant, efficacy_curve,
                                          frequency_response, optimum_design,
                                          phase_from_clearance_ratio, poly_derivative,
                                          poly_value, positive_real_roots, psi_bounds,
                                          quartic_coefficients)

D_REF = 0.0204


@pytest.fixture
def report(pytestconfig):
    """Print the criterion line past output capture, then assert."""
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")

    def _report(n, ok, detail):
        with capman.global_and_fixture_disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return _report


@pytest.fixture(scope="module")
def calibration(model, contact, layout):
    return calibrate(model, contact, layout, D_REF)


@pytest.fixture(scope="module")
def design(calibration, contact):
    p = calibration.final
    mu = contact.absorber_mass * contact.contact_shape_value**2
    return mu * p.gamma, p.cor


@pytest.fixture(scope="module")
def scan(model, contact, layout):
    cfg = load_config(None)
    t0 = time.perf_counter()
    s = efficacy_scan(model, contact, layout, cfg.clearance_list(), cfg.sim_config())
    return s, time.perf_counter() - t0


def test_criterion_1_rigid_host(model, contact, report):
    v = 3.0
    simulate_single_impact(model, contact, 1.0, rigid_host=True)  # JIT warm-up
    t0 = time.perf_counter()
    rec = simulate_single_impact(model, contact, v, rigid_host=True)
    elapsed = time.perf_counter() - t0
    hr = hunter_reed(contact.absorber_mass, contact.hertz_constant, v)
    p = extract_pulse_params(rec, contact)
    errs = {"T_c": rec.contact_duration / hr.contact_duration - 1,
            "f_c": rec.peak_force / hr.peak_force - 1,
            "alpha": p.alpha_tilde - 1, "Tc~": p.tc_tilde - 1, "r": p.cor - 1}
    ok = all(abs(e) < 0.01 for e in errs.values()) and elapsed < 1.0
    detail = ", ".join(f"{k} {e:+.2e}" for k, e in errs.items())
    report(1, ok, f"{detail}; runtime {elapsed:.3f} s")


def test_criterion_2_quartic(report):
    rng = np.random.default_rng(20240601)
    n = 10_000
    t0 = time.perf_counter()
    worst_p = worst_dp = worst_root = 0.0
    for _ in range(n):
        r = rng.uniform(0.0, 0.95)
        lo, hi = psi_bounds(r)
        d = DimensionlessDesign(rng.uniform(0.001, 0.2), rng.uniform(0.0, 0.2), r)
        A, B, C, _ = quartic_coefficients(rng.uniform(lo, hi), d)
        E = double_root_constant(A, B, C)
        e1 = critical_eta(A, B, C)
        worst_p = max(worst_p, abs(poly_value(e1, A, B, C, E)))
        worst_dp = max(worst_dp, abs(poly_derivative(e1, A, B, C)))
        ours = positive_real_roots(A, B, C, E)
        # a double root splits by ~sqrt(eps) in the companion matrix; the mean
        # of the split pair is accurate to rounding
        z = np.roots([A, B, C, 0.0, E])
        pair = z[np.argsort(np.abs(z - e1))[:2]]
        oracle = pair.mean().real
        worst_root = max(worst_root, max(abs(x - oracle) for x in ours))
    elapsed = time.perf_counter() - t0
    ok = worst_p < 1e-8 and worst_dp < 1e-8 and worst_root < 1e-8 and elapsed < 10
    report(2, ok, f"max |P(eta1)| {worst_p:.1e}, max |P'(eta1)| {worst_dp:.1e}, "
                  f"max root error {worst_root:.1e} over {n} samples; runtime {elapsed:.2f} s")


def test_criterion_3_phase_algebra(report):
    monotone = []
    for r in (0.0, 0.3, 0.5, 0.71, 0.9):
        lo, hi = psi_bounds(r)
        h = clearance_ratio(np.linspace(lo, hi, 100_001), r)
        monotone.append(bool(np.all(np.diff(h) > 0)))
    ratio = psi_bounds(0.5)[1] / (np.pi / 2)
    ok = all(monotone) and abs(ratio - 1.027) <= 0.005
    report(3, ok, f"strictly monotone for r in (0, 0.3, 0.5, 0.71, 0.9): {monotone}; "
                  f"psi_max/(pi/2) at r = 0.5: {ratio:.4f}")


def test_criterion_4_closed_form_limit(report):
    worst = 0.0
    for D in (0.01, 0.05):
        c = efficacy_curve(D, 1e-6, 0.6)
        worst = max(worst, np.max(np.abs(c.amplitude - 1)))
    report(4, worst < 0.01, f"max |a_res/a_no - 1| = {worst:.2e} at mu*Gamma = 1e-6")


def test_criterion_5_isola_case(report):
    case = dict(D=0.05, mu_gamma=0.043, r=0.71)
    t0 = time.perf_counter()
    opt = optimum_design(**case)
    iso_26 = any(b.is_isola for b in frequency_response(clearance=2.6, **case))
    iso_20 = any(b.is_isola for b in frequency_response(clearance=2.0, **case))
    elapsed = time.perf_counter() - t0
    in_range = 2.0 < opt.clearance < 2.6
    ok = in_range and iso_26 and not iso_20 and elapsed < 5
    report(5, ok, f"turning point at normalized clearance {opt.clearance:.5f} "
                  f"(required in (2.0, 2.6)); isola at 2.6: {iso_26}; isola at 2.0: {iso_20}; "
                  f"runtime {elapsed:.2f} s")


def test_criterion_6_energy(model, contact, layout, beam, report):
    # undamped, unforced chattering run; the step is refined because the
    # protocol step damps the stiffest modes numerically
    m0 = with_damping(model, 0.0)
    a_no = resonant_amplitude_no_absorber(model, layout)
    c = contact.with_clearance(0.5 * contact.contact_shape_value * a_no)
    lay = ForcingLayout(beam.length / 3, 0.0, beam.length)
    sysm = ForcedSystem(m0, c, lay)
    y0 = sysm.zero_state()
    y0[0] = a_no
    tr = integrate(m0, c, lay, m0.natural_frequencies[0], y0, n_periods=1,
                   points_per_mode_period=480, record_every=32)
    impacts = detect_impacts(tr)
    upto = np.searchsorted(tr.t, impacts[min(99, len(impacts) - 1)].end) + 1
    e = sysm.energy(tr.y[:upto])
    drift = np.max(np.abs(e / e[0] - 1))

    # linear sweep on a fine grid around the damped peak
    w, D = model.natural_frequencies[0], model.damping_ratios[0]
    f = model.shape_at(layout.force_location, 0) * layout.force_amplitude
    peak = f / (w**2 * 2 * D * np.sqrt(1 - D * D))
    cfg = SimConfig(etas=tuple(np.linspace(0.998, 1.001, 7)), max_periods=600)
    s = stepped_sine_sweep(model, contact, layout, cfg, contact_enabled=False)
    frf_err = s.resonant.mean_amplitude / peak - 1
    ok = len(impacts) >= 100 and drift < 1e-4 and abs(frf_err) < 0.005
    report(6, ok, f"energy drift {drift:.2e} over {min(100, len(impacts))} impacts; "
                  f"linear FRF peak error {frf_err:+.2e}")


def _predicted(design, clearance):
    mg, r = design
    curve = efficacy_curve(D_REF, mg, r)
    sel = curve.is_max_branch
    return np.interp(clearance, curve.clearance[sel], curve.amplitude[sel], right=np.nan)


@pytest.mark.slow
def test_criterion_7_validation(scan, design, report):
    s, elapsed = scan
    mg, r = design
    opt = optimum_design(D_REF, mg, r)
    k = s.optimum_index
    dev = abs(s.clearance[k] - opt.clearance) / opt.clearance
    pred = _predicted(design, s.clearance)
    periodic = (s.clearance >= 0.3) & ~s.strongly_modulated & np.isfinite(pred)
    curve_err = np.abs(s.mean_amplitude[periodic] / pred[periodic] - 1)
    amp_ratio = s.mean_amplitude[k] / opt.amplitude
    ok = dev < 0.10 and np.all(curve_err < 0.15) and 0.5 < amp_ratio < 2.0
    report(7, ok, f"optimum predicted {opt.clearance:.4f} vs reference {s.clearance[k]:.2f} "
                  f"({dev:.1%}); max curve deviation {curve_err.max():.1%} over "
                  f"{periodic.sum()} almost-periodic points; optimum amplitude ratio "
                  f"{amp_ratio:.3f}; reference scan {elapsed:.0f} s")


@pytest.mark.slow
def test_criterion_8_regimes(scan, design, report):
    s, _ = scan
    mg, r = design
    opt = optimum_design(D_REF, mg, r)
    smr = s.strongly_modulated
    low = s.clearance <= 0.5 * opt.clearance
    smr_ok = bool(np.all(s.impacts_per_period[smr] < 2))
    low_ok = bool(np.all(s.impacts_per_period[low] > 2))
    k = int(np.argmin(np.abs(s.clearance - opt.clearance)))

    def eq_phase(i):
        cor = s.mean_cor[i] if np.isfinite(s.mean_cor[i]) else r
        return phase_from_clearance_ratio(s.clearance[i] / s.mean_amplitude[i], cor)
    psi_eq = eq_phase(k)
    phase_err = abs(s.contact_phase[k] / psi_eq - 1)
    # diagnostic only: the almost-periodic point nearest the optimum
    per = np.flatnonzero(~smr & np.isfinite(s.contact_phase))
    j = per[np.argmin(np.abs(s.clearance[per] - opt.clearance))]
    diag = abs(s.contact_phase[j] / eq_phase(j) - 1)
    ok = smr_ok and low_ok and smr.any() and low.any() and phase_err < 0.10
    report(8, ok, f"impacts/period in SMR points {np.round(s.impacts_per_period[smr], 2)} "
                  f"(< 2: {smr_ok}); at clearance <= 0.5 x optimum "
                  f"{np.round(s.impacts_per_period[low], 2)} (> 2: {low_ok}); "
                  f"at clearance {s.clearance[k]:.2f} (SMR: {bool(smr[k])}) measured psi "
                  f"{s.contact_phase[k]:.3f} vs clearance-ratio relation {psi_eq:.3f} "
                  f"({phase_err:.1%}); [nearest almost-periodic point {s.clearance[j]:.2f}: "
                  f"{diag:.1%}]")


def test_criterion_9_calibration(model, contact, calibration, report):
    v = calibration.v_c_final
    ps = [extract_pulse_params(simulate_single_impact(with_damping(model, D), contact, v),
                               contact) for D in (0.001, 0.01, 0.05)]
    spread = {}
    for key in ("cor", "alpha_tilde", "tc_tilde"):
        vals = np.array([getattr(p, key) for p in ps])
        spread[key] = np.ptp(vals) / vals.mean()
    change = calibration.relative_change
    ok = all(x < 0.05 for x in spread.values()) and all(x < 0.25 for x in change.values())
    report(9, ok, "spread over D in (0.1%, 1%, 5%): "
                  + ", ".join(f"{k} {x:.2%}" for k, x in spread.items())
                  + "; re-iteration change: "
                  + ", ".join(f"{k} {x:.1%}" for k, x in change.items()))

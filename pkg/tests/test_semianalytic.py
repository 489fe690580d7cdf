import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from impact_absorber.contact import pulse_shape_integral
from impact_absorber.impact_event import PulseParams
from impact_absorber.semianalytic import (
    DimensionlessDesign, clearance_ratio, closed_form_point, critical_eta, default_psi_grid,
    dimensionless_from_physical, double_root_constant, efficacy_curve, excitation_phase,
    frequency_response, optimum_design, phase_from_clearance_ratio, poly_derivative, poly_value,
    positive_real_roots, pre_impact_velocity, psi_bounds, pulse_gamma, quartic_coefficients,
    response_residual, rho, sim_residual)

ISOLA_CASE = dict(D=0.05, mu_gamma=0.043, r=0.71)


def companion_roots(A, B, C, E):
    z = np.roots([A, B, C, 0.0, E])
    real = z[np.abs(z.imag) <= 1e-7 * np.maximum(1.0, np.abs(z))].real
    return np.sort(real[real > 0])


def legacy_double_root_constant(A, B, C):
    Q = 1.0 - 32.0 * A * C / (9.0 * B * B)
    return -27.0 * B**4 / (512.0 * A**3) * (Q**1.5 - 1.5 * Q - 0.375 * (Q - 1.0) ** 2 + 0.5)


class TestPhaseAlgebra:
    def test_rho(self):
        assert rho(0.0) == pytest.approx(2 / np.pi)
        assert rho(0.5) == pytest.approx(0.21221, abs=1e-5)
        assert rho(1 - 1e-12) < 1e-11

    def test_bounds(self):
        assert psi_bounds(0.0)[0] == pytest.approx(np.arctan(2 / np.pi), rel=1e-15)
        assert psi_bounds(0.0)[0] == pytest.approx(0.566911, abs=1e-6)
        assert psi_bounds(0.5)[1] == pytest.approx(1.613901, abs=1e-6)
        assert psi_bounds(0.5)[1] / (np.pi / 2) == pytest.approx(1.027, abs=0.005)
        assert psi_bounds(1 - 1e-9)[1] == pytest.approx(np.pi / 2, abs=1e-8)

    @pytest.mark.parametrize("r", [0.0, 0.3, 0.5, 0.71, 0.9])
    def test_bounds_straddle_right_angle(self, r):
        lo, hi = psi_bounds(r)
        assert lo < np.pi / 2 < hi

    @pytest.mark.parametrize("r", [0.0, 0.3, 0.5, 0.71, 0.9])
    def test_clearance_ratio(self, r):
        lo, hi = psi_bounds(r)
        assert abs(clearance_ratio(lo, r)) < 1e-14
        assert clearance_ratio(np.pi / 2, r) == pytest.approx(np.pi / 2 * (1 + r) / (1 - r))
        h = clearance_ratio(np.linspace(lo, hi, 5001), r)
        assert np.all(np.diff(h) > 0)

    @given(r=st.floats(0.0, 0.95), t=st.floats(0.0, 1.0))
    def test_sim_consistency(self, r, t):
        lo, hi = psi_bounds(r)
        psi = lo + t * (hi - lo)
        phic_a = 1.3e-3
        g = phic_a * clearance_ratio(psi, r)
        qa = phic_a * np.sin(psi) / rho(r)
        assert abs(sim_residual(rho(r), qa, g, phic_a)) < 1e-12 * phic_a**2 * 100

    def test_sim_elastic_degenerate(self):
        assert sim_residual(0.0, 3.0, 1.0, 2.0) == 0.0

    @given(r=st.floats(0.0, 0.95), t=st.floats(0.0, 1.0))
    def test_phase_inverse(self, r, t):
        lo, hi = psi_bounds(r)
        psi = lo + t * (hi - lo)
        assert phase_from_clearance_ratio(clearance_ratio(psi, r), r) == pytest.approx(
            psi, abs=1e-9)

    def test_phase_inverse_out_of_range(self):
        assert np.isnan(phase_from_clearance_ratio(1e3, 0.5))


class TestPreImpactVelocity:
    def test_right_angle(self):
        assert pre_impact_velocity(10.0, 1e-3, 0.0, np.pi / 2) == pytest.approx(2 * 10 * 1e-3)

    @pytest.mark.parametrize("r, t", [(0.2, 0.3), (0.6, 0.9), (0.71, 0.5)])
    def test_unreduced_form(self, r, t):
        lo, hi = psi_bounds(r)
        psi = lo + t * (hi - lo)
        W, pa = 1200.0, 2e-3
        g = pa * clearance_ratio(psi, r)
        full = W * pa * (np.sin(psi) + 2 / np.pi * (np.cos(psi) + g / pa))
        assert pre_impact_velocity(W, pa, r, psi) == pytest.approx(full, rel=1e-12)

    def test_linear_scaling(self):
        v = pre_impact_velocity(1.0, 1.0, 0.3, 1.0)
        assert pre_impact_velocity(2.0, 3.0, 0.3, 1.0) == pytest.approx(6 * v)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            pre_impact_velocity(-1.0, 1.0, 0.3, 1.0)


def test_gamma_unit_factors():
    expected = 2 / np.pi * 2.94 * 1.25 * pulse_shape_integral()
    assert pulse_gamma(1.0, 1.0) == pytest.approx(expected, rel=1e-14)
    assert pulse_gamma(1.0, 1.0) == pytest.approx(1.301783, abs=1e-6)
    assert PulseParams(0.5, 0.9, 1.1).gamma == pytest.approx(pulse_gamma(0.9, 1.1), rel=1e-12)


class TestQuartic:
    def test_isola_case_coefficients(self):
        d = DimensionlessDesign(0.05, 0.043, 0.71)
        A, B, C, E = quartic_coefficients(np.pi / 2, d)
        assert A == pytest.approx(1.08794, abs=1e-5)
        assert B == pytest.approx(0.059310, abs=1e-6)
        assert C == pytest.approx(-1.99, abs=1e-12)
        assert E == 1.0

    def test_no_absorber(self):
        A, B, C, _ = quartic_coefficients(0.9, DimensionlessDesign(0.03, 0.0, 0.5))
        assert (A, B) == (1.0, 0.0)
        assert C == pytest.approx(-2 + 4 * 0.03**2)

    @settings(max_examples=200)
    @given(D=st.floats(0.001, 0.3), mg=st.floats(1e-4, 0.5), r=st.floats(0.0, 0.95),
           t=st.floats(0.0, 1.0))
    def test_double_root(self, D, mg, r, t):
        lo, hi = psi_bounds(r)
        psi = lo + t * (hi - lo)
        A, B, C, _ = quartic_coefficients(psi, DimensionlessDesign(D, mg, r))
        assert A > 0 and B >= 0 and C < 0
        e1 = critical_eta(A, B, C)
        E = double_root_constant(A, B, C)
        assert abs(poly_value(e1, A, B, C, E)) < 1e-8
        assert abs(poly_derivative(e1, A, B, C)) < 1e-8

    def test_textbook_eta1(self):
        A, B, C = 1.1, 0.05, -1.9
        Q = 1 - 32 * A * C / (9 * B * B)
        assert Q > 1
        assert critical_eta(A, B, C) == pytest.approx(3 * B / (8 * A) * (-1 + np.sqrt(Q)),
                                                     rel=1e-10)

    @pytest.mark.parametrize("B", [1e-2, 1e-1, 0.5, 2.0])
    def test_u_form_matches_textbook(self, B):
        A, C = 1.05, -1.97
        assert double_root_constant(A, B, C) == pytest.approx(
            legacy_double_root_constant(A, B, C), rel=1e-10)

    def test_small_B_limit(self):
        A, C = 1.0, -2.0 + 4e-4
        # B = 0: minimum of A x^2 + C x + E at x = -C/2A vanishes for E = C^2/4A
        assert double_root_constant(A, 1e-14, C) == pytest.approx(C * C / (4 * A), rel=1e-9)
        assert double_root_constant(A, 0.0, C) == pytest.approx(C * C / (4 * A), rel=1e-15)

    @settings(max_examples=200)
    @given(A=st.floats(0.5, 2.0), B=st.floats(1e-3, 1.0), C=st.floats(-3.0, -0.5),
           E=st.floats(-2.0, 2.0))
    def test_roots_against_companion(self, A, B, C, E):
        e1 = critical_eta(A, B, C)
        # keep clear of the tangency where root counting is ill-conditioned
        assume(abs(poly_value(e1, A, B, C, E)) > 1e-6)
        # a root near 0 (E -> 0+) is below what the companion matrix resolves
        assume(abs(E) > 1e-6)
        ours = np.array(positive_real_roots(A, B, C, E))
        ref = companion_roots(A, B, C, E)
        assert ours.size == ref.size
        np.testing.assert_allclose(ours, ref, atol=1e-8)
        for x in ours:
            assert abs(poly_value(x, A, B, C, E)) < 1e-9 * max(A, abs(E))

    def test_root_count_cases(self):
        A, B, C = 1.0, 0.1, -2.0
        Estar = double_root_constant(A, B, C)
        assert positive_real_roots(A, B, C, Estar + 0.1) == []
        assert len(positive_real_roots(A, B, C, Estar - 0.1)) == 2
        assert len(positive_real_roots(A, B, C, -0.5)) == 1
        assert positive_real_roots(A, B, C, Estar) == pytest.approx([critical_eta(A, B, C)])


class TestEfficacyCurve:
    def test_shared_denominator(self):
        psi = default_psi_grid(0.71, 50)
        gn, amp, _ = closed_form_point(psi, **ISOLA_CASE)
        np.testing.assert_allclose(gn, amp * clearance_ratio(psi, 0.71), rtol=1e-13)

    @pytest.mark.parametrize("D", [0.01, 0.05])
    def test_no_absorber_limit(self, D):
        c = efficacy_curve(D, 1e-6, 0.6)
        np.testing.assert_allclose(c.amplitude, 1 / np.sqrt(1 - D * D), rtol=1e-3)
        assert np.all(np.abs(c.amplitude - 1) < 0.01)

    def test_isola_case_turning_point(self):
        opt = optimum_design(**ISOLA_CASE)
        assert not opt.at_boundary
        assert opt.clearance == pytest.approx(2.68290, abs=1e-5)
        assert opt.amplitude == pytest.approx(0.40853, abs=1e-5)
        assert opt.psi == pytest.approx(0.88987, abs=1e-5)
        lo, hi = psi_bounds(0.71)
        assert lo < opt.psi < hi

    def test_max_branch_monotone(self):
        c = efficacy_curve(**ISOLA_CASE)
        g, a = c.max_branch
        order = np.argsort(g)
        assert np.all(np.diff(a[order]) <= 1e-12)
        assert c.clearance[c.turning_index] == pytest.approx(c.clearance.max())

    def test_vertical_tangent(self):
        opt = optimum_design(**ISOLA_CASE)
        slopes = []
        for dp in (1e-2, 1e-3, 1e-4):
            g0, a0, _ = closed_form_point(opt.psi - dp, **ISOLA_CASE)
            g1, a1, _ = closed_form_point(opt.psi - 2 * dp, **ISOLA_CASE)
            slopes.append(abs((a0 - a1) / (g0 - g1)))
        assert slopes[0] < slopes[1] < slopes[2]
        assert slopes[2] > 100

    def test_boundary_flag(self):
        assert optimum_design(0.05, 1e-6, 0.6).at_boundary

    def test_grid_outside_bounds(self):
        with pytest.raises(ValueError):
            efficacy_curve(0.05, 0.04, 0.6, psi_grid=[0.0, 1.0])


class TestFrequencyResponse:
    def test_isola_at_26(self):
        br = frequency_response(clearance=2.6, **ISOLA_CASE)
        assert any(b.is_isola for b in br)

    @pytest.mark.parametrize("gn", [2.0, 2.46])
    def test_single_peak_below(self, gn):
        br = frequency_response(clearance=gn, **ISOLA_CASE)
        assert len(br) == 1 and not br[0].is_isola

    def test_no_periodic_response_beyond_optimum(self):
        assert frequency_response(clearance=2.7, **ISOLA_CASE) == []

    def test_branch_solves_response_equation(self):
        d = DimensionlessDesign(0.05, 0.043, 0.71, forcing_ratio=2 * 0.05 / 2.0)
        for b in frequency_response(clearance=2.0, **ISOLA_CASE):
            for p in b.points():
                res = response_residual(p.eta, p.psi, p.excitation_phase, d)
                assert abs(res) < 1e-9
                assert p.normalized_amplitude == pytest.approx(1 / clearance_ratio(p.psi, 0.71))

    def test_isola_closed(self):
        iso = [b for b in frequency_response(clearance=2.6, **ISOLA_CASE) if b.is_isola][0]
        assert iso.eta[0] == pytest.approx(iso.eta[-1], abs=1e-6)

    def test_peak_tracks_efficacy_curve(self):
        # below the min-branch start the peak of the response equals the closed form
        gn = 1.5
        peak = max(b.peak_amplitude for b in frequency_response(clearance=gn, **ISOLA_CASE))
        c = efficacy_curve(**ISOLA_CASE)
        g, a = c.max_branch
        assert peak == pytest.approx(np.interp(gn, g, a), rel=2e-3)

    def test_no_absorber_peak(self):
        br = frequency_response(0.05, 1e-6, 0.6, clearance=1.0)
        assert max(b.peak_amplitude for b in br) == pytest.approx(1.0, abs=0.01)

    def test_excitation_phase_quadrature_at_resonance(self):
        d = DimensionlessDesign(0.05, 0.0, 0.5)
        assert excitation_phase(1.0, 1.0, d) == pytest.approx(-np.pi / 2)

    def test_rejects_nonpositive_clearance(self):
        with pytest.raises(ValueError):
            frequency_response(clearance=0.0, **ISOLA_CASE)


def test_dimensionless_from_physical(model, layout, contact):
    from impact_absorber.beam import resonant_amplitude_no_absorber
    a_no = resonant_amplitude_no_absorber(model, layout)
    gn = 0.8
    c = contact.with_clearance(gn * contact.contact_shape_value * a_no)
    d = dimensionless_from_physical(model, c, PulseParams(0.6, 0.9, 1.1), 0.0204, layout)
    assert d.forcing_ratio == pytest.approx(2 * 0.0204 / gn, rel=1e-12)
    assert d.mu_gamma == pytest.approx(0.04 * pulse_gamma(0.9, 1.1), rel=1e-9)


@pytest.mark.parametrize("kw", [dict(damping=0.0, mu_gamma=0.01, cor=0.5),
                                dict(damping=0.05, mu_gamma=0.01, cor=1.0),
                                dict(damping=0.05, mu_gamma=-0.01, cor=0.5)])
def test_design_validation(kw):
    with pytest.raises(ValueError):
        DimensionlessDesign(**kw)

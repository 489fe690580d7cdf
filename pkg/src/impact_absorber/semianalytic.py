"""Closed-form resonant response of a host mode with an impact absorber.

Everything here is parameterized by the contact phase ``psi`` (phase lag of the
absorber sawtooth behind the host motion) on the two-impacts-per-period branch.
Amplitudes are normalized by the resonant amplitude without absorber, clearances
by the corresponding contact-point displacement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .contact import HUNTER_REED_CONSTANT, pulse_shape_integral

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DimensionlessDesign:
    damping: float
    mu_gamma: float
    cor: float
    forcing_ratio: float = 0.0

    def __post_init__(self):
        if not 0 < self.damping < 1 / np.sqrt(2):
            raise ValueError("damping ratio must lie in (0, 1/sqrt(2))")
        if not 0 <= self.cor < 1:
            raise ValueError("modal coefficient of restitution must lie in [0, 1)")
        if self.mu_gamma < 0:
            raise ValueError("mu*Gamma must be >= 0")


def rho(r):
    return 2.0 / np.pi * (1.0 - r) / (1.0 + r)


def psi_bounds(r: float) -> tuple[float, float]:
    """Range of contact phase on which the symmetric two-impact branch exists."""
    p = rho(r)
    return float(np.arctan(p)), float(np.arccos(-p * p / (1.0 + p * p)))


def clearance_ratio(psi, r):
    """g / (phic a) on the slow invariant manifold; increasing in psi."""
    return np.sin(psi) / rho(r) - np.cos(psi)


def sim_residual(rho_, qa_hat, g, phic_a):
    return (rho_ * qa_hat) ** 2 + (qa_hat - g) ** 2 - phic_a**2


def pre_impact_velocity(Omega, phic_a, r, psi):
    """Relative velocity just before impact for the sawtooth motion."""
    v = Omega * phic_a * 2.0 / (1.0 - r) * np.sin(psi)
    if np.any(np.asarray(v) <= 0):
        raise ValueError("pre-impact velocity must be positive (check Omega, amplitude, psi)")
    return v


def pulse_gamma(alpha_tilde: float, tc_tilde: float) -> float:
    """Shape factor of the corrected contact pulse in the averaged force."""
    return (2.0 / np.pi * HUNTER_REED_CONSTANT * 1.25 * tc_tilde * alpha_tilde**2.5
            * pulse_shape_integral())


def quartic_coefficients(psi, design: DimensionlessDesign):
    """Coefficients (A, B, C, E) of P(eta) = A eta^4 + B eta^3 + C eta^2 + E."""
    s, c = np.sin(psi), np.cos(psi)
    K = 2.0 * design.mu_gamma / (1.0 - design.cor)
    D = design.damping
    inertia = 1.0 + K * s * c
    A = inertia**2 + (K * s * s) ** 2
    B = 2.0 * K * 2.0 * D * s * s
    C = -2.0 * inertia + 4.0 * D * D
    E = 1.0 - (design.forcing_ratio * clearance_ratio(psi, design.cor)) ** 2
    return A, B, C, E


def critical_eta(A, B, C):
    """Positive stationary point of P, i.e. (3B/8A)(-1 + sqrt(Q)) in cancellation-free form."""
    return -4.0 * C / (3.0 * B + np.sqrt(9.0 * B * B - 32.0 * A * C))


def _h_of_u(u):
    su = np.sqrt(u)
    return su * (1.0 + u) ** 1.5 - 1.5 * u * (1.0 + u) - 0.375 + 0.5 * u * u


def double_root_constant(A, B, C):
    """Value of E for which eta_1 is a double root of P.

    Uses u = 9B^2/(32 A |C|) = 1/(Q-1); the u-form stays finite as B -> 0, where
    the textbook form is 0 * inf.
    """
    A, B, C = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (A, B, C)))
    u = 9.0 * B * B / (32.0 * A * np.abs(C))
    small = u <= 1.0
    out = np.empty(A.shape)
    us = u[small]
    out[small] = -(2.0 * C[small] ** 2 / (3.0 * A[small])) * _h_of_u(us)
    big = ~small
    if np.any(big):
        Ab, Bb, Cb = A[big], B[big], C[big]
        Q = 1.0 - 32.0 * Ab * Cb / (9.0 * Bb * Bb)
        G = Q**1.5 - 1.5 * Q - 0.375 * (Q - 1.0) ** 2 + 0.5
        out[big] = -27.0 * Bb**4 / (512.0 * Ab**3) * G
    return out if out.ndim else float(out)


def poly_value(eta, A, B, C, E):
    return ((A * eta + B) * eta + C) * eta * eta + E


def poly_derivative(eta, A, B, C):
    return ((4.0 * A * eta + 3.0 * B) * eta + 2.0 * C) * eta


def positive_real_roots(A: float, B: float, C: float, E: float) -> list[float]:
    """Positive real roots of A eta^4 + B eta^3 + C eta^2 + E (A > 0, B >= 0, C < 0).

    P falls from P(0) = E to its only positive minimum at ``critical_eta`` and
    then rises, so each root is bracketed.
    """
    e1 = float(critical_eta(A, B, C))
    pmin = poly_value(e1, A, B, C, E)
    # rounding level of P near e1: largest individual term
    scale = max(abs(A) * e1**4, abs(B) * e1**3, abs(C) * e1**2, abs(E))
    if abs(pmin) <= 1e-15 * scale:
        return [e1]
    if pmin > 0:
        return []
    f = lambda x: poly_value(x, A, B, C, E)  # noqa: E731
    hi = e1 + 1.0
    while f(hi) < 0:
        hi = e1 + 2.0 * (hi - e1)
    roots = []
    if E > 0:
        roots.append(brentq(f, 0.0, e1, xtol=1e-15, rtol=1e-15, maxiter=200))
    roots.append(brentq(f, e1, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
    return roots


def default_psi_grid(r: float, n: int = 1000) -> np.ndarray:
    """Grid on [psi_min, psi_max], geometrically dense near psi_min."""
    lo, hi = psi_bounds(r)
    t = np.geomspace(1e-6, 1.0, n)
    return lo + (hi - lo) * t


def _resonance_denominator(psi, design: DimensionlessDesign):
    A, B, C, _ = quartic_coefficients(psi, design)
    s2 = 1.0 - double_root_constant(A, B, C)
    return np.sqrt(np.maximum(s2, 0.0)), s2 > 0


@dataclass
class DesignCurve:
    """Normalized resonant amplitude vs. normalized clearance along psi."""

    psi: np.ndarray
    clearance: np.ndarray
    amplitude: np.ndarray
    eta: np.ndarray
    is_max_branch: np.ndarray
    turning_index: int

    @property
    def max_branch(self):
        sel = self.is_max_branch
        return self.clearance[sel], self.amplitude[sel]


def closed_form_point(psi, D: float, mu_gamma: float, r: float):
    """(normalized clearance, normalized amplitude, eta) of the amplitude extremum."""
    design = DimensionlessDesign(D, mu_gamma, r)
    S, _ = _resonance_denominator(psi, design)
    A, B, C, _ = quartic_coefficients(psi, design)
    h = clearance_ratio(psi, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 2.0 * D * h / S, 2.0 * D / S, critical_eta(A, B, C)


def efficacy_curve(D: float, mu_gamma: float, r: float, psi_grid=None) -> DesignCurve:
    psi = default_psi_grid(r) if psi_grid is None else np.asarray(psi_grid, dtype=float)
    lo, hi = psi_bounds(r)
    if np.any(psi < lo - 1e-12) or np.any(psi > hi + 1e-12):
        raise ValueError("psi grid leaves [psi_min, psi_max]")
    gn, amp, eta = closed_form_point(psi, D, mu_gamma, r)
    k = int(np.nanargmax(gn))
    return DesignCurve(psi=psi, clearance=gn, amplitude=amp, eta=eta,
                       is_max_branch=np.arange(psi.size) <= k, turning_index=k)


@dataclass(frozen=True)
class OptimumDesign:
    clearance: float
    amplitude: float
    psi: float
    eta: float
    at_boundary: bool = False


def _golden_max(f, a: float, b: float, tol: float = 1e-10):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimum_design(D: float, mu_gamma: float, r: float, n_scan: int = 400) -> OptimumDesign:
    """Turning point of the efficacy curve (largest clearance with a periodic response)."""
    DimensionlessDesign(D, mu_gamma, r)
    lo, hi = psi_bounds(r)
    psi = np.linspace(lo, hi, max(n_scan, 400))
    gn = closed_form_point(psi, D, mu_gamma, r)[0]
    k = int(np.nanargmax(gn))
    if k == psi.size - 1 or k == 0:
        p = psi[k]
        boundary = True
    else:
        p = _golden_max(lambda x: float(closed_form_point(x, D, mu_gamma, r)[0]),
                        psi[k - 1], psi[k + 1])
        boundary = False
    g_opt, a_opt, e_opt = closed_form_point(p, D, mu_gamma, r)
    return OptimumDesign(float(g_opt), float(a_opt), float(p), float(e_opt), boundary)


@dataclass(frozen=True)
class PsiPoint:
    psi: float
    normalized_amplitude: float
    absorber_amplitude_ratio: float
    eta: float
    excitation_phase: float


@dataclass
class ResponseBranch:
    """One connected piece of the amplitude-frequency curve, ordered along the curve."""

    psi: np.ndarray
    eta: np.ndarray
    amplitude: np.ndarray          # a / a_res,no-abs
    excitation_phase: np.ndarray
    is_isola: bool
    r: float = field(repr=False, default=0.0)

    def points(self):
        p = rho(self.r)
        for ps, e, ph in zip(self.psi, self.eta, self.excitation_phase):
            yield PsiPoint(float(ps), float(1.0 / clearance_ratio(ps, self.r)),
                           float(np.sin(ps) / p), float(e), float(ph))

    @property
    def peak_amplitude(self) -> float:
        return float(np.max(self.amplitude))


def excitation_phase(eta, psi, design: DimensionlessDesign):
    K = 2.0 * design.mu_gamma / (1.0 - design.cor)
    lhs = (1.0 - eta**2 * (1.0 + K * np.sin(psi) * np.exp(-1j * psi))
           + 2j * design.damping * eta)
    return -np.angle(lhs)


def response_residual(eta, psi, psi_e, design: DimensionlessDesign):
    """Complex residual of the averaged frequency-response equation."""
    K = 2.0 * design.mu_gamma / (1.0 - design.cor)
    lhs = (1.0 - eta**2 * (1.0 + K * np.sin(psi) * np.exp(-1j * psi))
           + 2j * design.damping * eta)
    rhs = design.forcing_ratio * clearance_ratio(psi, design.cor) * np.exp(-1j * psi_e)
    return lhs - rhs


def frequency_response(D: float, mu_gamma: float, r: float, clearance: float,
                       psi_grid=None) -> list[ResponseBranch]:
    """Amplitude-frequency branches at normalized clearance g/(phic a_res,no-abs).

    The forcing ratio follows from the normalization, 2D / clearance. Ends of
    root-bearing psi intervals are refined to the exact double root.
    """
    if not clearance > 0:
        raise ValueError("clearance must be > 0")
    design = DimensionlessDesign(D, mu_gamma, r, forcing_ratio=2.0 * D / clearance)
    lo, hi = psi_bounds(r)
    psi = default_psi_grid(r, 2000) if psi_grid is None else np.asarray(psi_grid, dtype=float)

    def margin(p):
        # > 0 where P has positive roots (P(eta_1) < 0)
        A, B, C, E = quartic_coefficients(p, design)
        return double_root_constant(A, B, C) - E

    m = margin(psi)
    has = m >= 0
    branches = []
    i = 0
    while i < psi.size:
        if not has[i]:
            i += 1
            continue
        j = i
        while j + 1 < psi.size and has[j + 1]:
            j += 1
        seg = list(psi[i:j + 1])
        closed_lo = i > 0
        closed_hi = j < psi.size - 1
        if closed_lo:
            seg.insert(0, brentq(margin, psi[i - 1], psi[i], xtol=1e-14, rtol=1e-15))
        if closed_hi:
            seg.append(brentq(margin, psi[j], psi[j + 1], xtol=1e-14, rtol=1e-15))
        branches.append(_build_branch(np.array(seg), design, closed_lo, closed_hi, clearance))
        i = j + 1
    return branches


def _build_branch(psis, design, closed_lo, closed_hi, clearance):
    lower, upper = [], []
    for idx, p in enumerate(psis):
        A, B, C, E = quartic_coefficients(p, design)
        end = (idx == 0 and closed_lo) or (idx == psis.size - 1 and closed_hi)
        roots = [float(critical_eta(A, B, C))] if end else positive_real_roots(A, B, C, E)
        if len(roots) == 2:
            lower.append((p, roots[0]))
            upper.append((p, roots[1]))
        elif len(roots) == 1:
            if E > 0 or end:
                lower.append((p, roots[0]))
            upper.append((p, roots[0]))
    path = lower + upper[::-1]
    # drop the duplicated double-root point at a closed end
    dedup = [path[0]]
    for q in path[1:]:
        if q != dedup[-1]:
            dedup.append(q)
    ps = np.array([q[0] for q in dedup])
    et = np.array([q[1] for q in dedup])
    amp = clearance / clearance_ratio(ps, design.cor)
    phase = excitation_phase(et, ps, design)
    e_pos = bool(np.all(quartic_coefficients(psis, design)[3] > 0))
    return ResponseBranch(psi=ps, eta=et, amplitude=amp, excitation_phase=phase,
                          is_isola=bool(closed_lo and closed_hi and e_pos), r=design.cor)


def dimensionless_from_physical(model, contact, pulse, D: float, layout) -> DimensionlessDesign:
    """Map the physical design onto (D, mu*Gamma, r, forcing ratio)."""
    phic = contact.contact_shape_value
    mu = contact.absorber_mass * phic**2
    f_ex = model.shape_at(layout.force_location, 0) * layout.force_amplitude
    w = model.natural_frequencies[0]
    return DimensionlessDesign(damping=D, mu_gamma=mu * pulse.gamma, cor=pulse.cor,
                               forcing_ratio=f_ex * phic / (w**2 * contact.clearance))


def phase_from_clearance_ratio(h, r: float) -> float:
    """Invert ``clearance_ratio``: the contact phase for g/(phic a) = h, or nan
    when h lies outside the admissible range."""
    lo, hi = psi_bounds(r)
    h_lo, h_hi = clearance_ratio(lo, r), clearance_ratio(hi, r)
    if not h_lo <= h <= h_hi:
        return float("nan")
    return float(brentq(lambda p: clearance_ratio(p, r) - h, lo, hi, xtol=1e-14, rtol=1e-15))

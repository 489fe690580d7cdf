"""Hertzian unilateral contact and the corrected Hunter-Reed force pulse."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

# Printed Hunter-Reed constant; kept at 2.94 (not 2.9432) so Gamma stays consistent.
HUNTER_REED_CONSTANT = 2.94


@dataclass(frozen=True)
class ContactSetup:
    absorber_radius: float
    absorber_mass: float
    hertz_constant: float
    clearance: float
    contact_shape_value: float
    mass_ratio: float = float("nan")

    def __post_init__(self):
        for name in ("absorber_radius", "absorber_mass", "hertz_constant", "clearance",
                     "contact_shape_value"):
            if not getattr(self, name) > 0:
                raise ValueError(f"ContactSetup.{name} must be > 0, got {getattr(self, name)!r}")

    def with_clearance(self, clearance: float) -> "ContactSetup":
        return ContactSetup(self.absorber_radius, self.absorber_mass, self.hertz_constant,
                            clearance, self.contact_shape_value, self.mass_ratio)


@dataclass(frozen=True)
class PulsePrediction:
    contact_duration: float
    peak_force: float
    max_compression_scale: float


def hertz_constant(R_a: float, E_a: float, nu_a: float, E_s: float, nu_s: float) -> float:
    """Sphere-on-plane Hertz constant k_H in N/m^1.5. ``E_s=np.inf`` gives a rigid host."""
    compliance = (1.0 - nu_a**2) / E_a + (1.0 - nu_s**2) / E_s
    return 4.0 / 3.0 * np.sqrt(R_a) / compliance


def contact_force(delta, clearance: float, k_H: float):
    """Hertz force for relative displacement ``delta`` = host - absorber.

    Zero inside the gap, +k_H (delta-g)^1.5 beyond +g and odd-symmetric below -g.
    """
    d = np.asarray(delta, dtype=float)
    pen = np.maximum(np.abs(d) - clearance, 0.0)
    f = k_H * np.sign(d) * pen**1.5
    return f if f.ndim else float(f)


def contact_potential(delta, clearance: float, k_H: float):
    pen = np.maximum(np.abs(np.asarray(delta, dtype=float)) - clearance, 0.0)
    return 0.4 * k_H * pen**2.5


@lru_cache(maxsize=None)
def pulse_shape_integral(exponent: float = 1.5) -> float:
    """Integral of sin(pi t)^exponent over [0, 1]."""
    val, _ = quad(lambda t: np.sin(np.pi * t) ** exponent, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return val


def max_compression(m_a: float, k_H: float, v_c: float) -> float:
    """Hunter-Reed maximum compression alpha_0 = (5/4 m_a v_c^2 / k_H)^(2/5)."""
    return (1.25 * m_a / k_H * v_c**2) ** 0.4


def hunter_reed(m_a: float, k_H: float, v_c: float, alpha_tilde: float = 1.0,
                tc_tilde: float = 1.0) -> PulsePrediction:
    if not v_c > 0:
        raise ValueError(f"Hunter-Reed pulse requires v_c > 0, got {v_c!r}")
    a0 = max_compression(m_a, k_H, v_c)
    tc = HUNTER_REED_CONSTANT * a0 * alpha_tilde * tc_tilde / v_c
    fc = k_H * (a0 * alpha_tilde) ** 1.5
    return PulsePrediction(contact_duration=tc, peak_force=fc, max_compression_scale=a0)


def sphere_from_mass_ratio(beam_mass: float, mass_ratio: float, density: float):
    """Solid sphere with mass ``mass_ratio * beam_mass``; returns (radius, mass)."""
    if not mass_ratio > 0:
        raise ValueError("mass ratio must be > 0")
    m_a = mass_ratio * beam_mass
    R_a = (3.0 * m_a / (4.0 * np.pi * density)) ** (1.0 / 3.0)
    return R_a, m_a

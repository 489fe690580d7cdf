"""Modally truncated Euler-Bernoulli cantilever.

Mode shapes are evaluated in closed form. The hyperbolic terms are rewritten
with decaying exponentials so that high modes (beta*l > 20) do not overflow.
All shapes are mass-normalized and signed so that the free-end value is
positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

QUADRATURE_POINTS = 2000
STRESS_GRID_POINTS = 2001


@dataclass(frozen=True)
class BeamSpec:
    """Uniform rectangular cantilever (SI units)."""

    length: float
    height: float
    width: float
    density: float
    youngs_modulus: float
    poisson: float
    fatigue_bending_strength: float

    def __post_init__(self):
        for name in ("length", "height", "width", "density", "youngs_modulus",
                     "fatigue_bending_strength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"BeamSpec.{name} must be > 0, got {getattr(self, name)!r}")
        if not 0 < self.poisson < 0.5:
            raise ValueError(f"BeamSpec.poisson must lie in (0, 0.5), got {self.poisson!r}")

    @property
    def area(self) -> float:
        return self.height * self.width

    @property
    def second_moment(self) -> float:
        return self.width * self.height**3 / 12.0

    @property
    def mass(self) -> float:
        return self.density * self.area * self.length


TABLE1_BEAM = BeamSpec(
    length=0.21,
    height=0.01,
    width=0.015,
    density=7800.0,
    youngs_modulus=210e9,
    poisson=0.3,
    fatigue_bending_strength=255e6,
)


@dataclass(frozen=True)
class ForcingLayout:
    force_location: float
    force_amplitude: float
    contact_location: float

    def validate(self, beam: BeamSpec) -> None:
        if not 0 < self.force_location <= beam.length:
            raise ValueError("force_location must lie in (0, length]")
        if not 0 < self.contact_location <= beam.length:
            raise ValueError("contact_location must lie in (0, length]")


def _characteristic(x: float) -> float:
    # cos(x)*cosh(x) + 1 divided by cosh(x); same roots, bounded for large x
    return np.cos(x) + 1.0 / np.cosh(x)


def solve_mode_wavenumbers(n: int) -> np.ndarray:
    """First ``n`` roots of ``cos(x) cosh(x) = -1`` (dimensionless beta_k * l).

    Root ``k`` (1-based) is bracketed by ``[(k-1) pi, k pi]``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    roots = np.empty(n)
    for k in range(1, n + 1):
        lo, hi = (k - 1) * np.pi, k * np.pi
        if np.sign(_characteristic(lo)) == np.sign(_characteristic(hi)):
            raise RuntimeError(f"root bracketing failed for mode {k}")
        roots[k - 1] = brentq(_characteristic, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                              maxiter=200)
    return roots


def _shape_terms(L: float, y: np.ndarray):
    """Return unnormalized (phi, phi'/beta, phi''/beta^2) at y = beta*x."""
    eL = np.exp(-L)
    den = 1.0 - eL * eL + 2.0 * np.sin(L) * eL
    sigma = (1.0 + eL * eL + 2.0 * np.cos(L) * eL) / den
    # (1 - sigma) * e^y / 2 and (1 + sigma) * e^-y / 2, both bounded on [0, L]
    grow = (np.sin(L) - np.cos(L) - eL) * np.exp(y - L) / den
    decay = 0.5 * (1.0 + sigma) * np.exp(-y)
    ch_m_sh = grow + decay          # cosh y - sigma sinh y
    sh_m_ch = grow - decay          # sinh y - sigma cosh y
    s, c = np.sin(y), np.cos(y)
    phi = ch_m_sh - c + sigma * s
    dphi = sh_m_ch + s + sigma * c
    ddphi = ch_m_sh + c - sigma * s
    return phi, dphi, ddphi


@dataclass(frozen=True)
class ModalModel:
    """Mass-normalized cantilever modes. Mode indices are 0-based."""

    beam: BeamSpec
    wavenumbers: np.ndarray          # beta_k * l
    natural_frequencies: np.ndarray  # rad/s
    damping_ratios: np.ndarray
    _scale: np.ndarray = field(repr=False)  # normalization * sign per mode

    @property
    def mode_count(self) -> int:
        return len(self.natural_frequencies)

    @property
    def beam_mass(self) -> float:
        return self.beam.mass

    def _eval(self, x, which: int) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.mode_count, x.size))
        ell = self.beam.length
        for k, L in enumerate(self.wavenumbers):
            beta = L / ell
            terms = _shape_terms(L, beta * x)
            out[k] = self._scale[k] * terms[which] * beta**which
        return out

    def shapes(self, x) -> np.ndarray:
        """Mode shapes, array (n_modes, len(x)), units 1/sqrt(kg)."""
        return self._eval(x, 0)

    def slopes(self, x) -> np.ndarray:
        return self._eval(x, 1)

    def curvatures(self, x) -> np.ndarray:
        """Second spatial derivative of the mode shapes, 1/(m^2 sqrt(kg))."""
        return self._eval(x, 2)

    def shape_at(self, x: float, k: int) -> float:
        return float(self._eval(x, 0)[k, 0])

    def curvature_at(self, x: float, k: int) -> float:
        return float(self._eval(x, 2)[k, 0])

    @cached_property
    def tip_values(self) -> np.ndarray:
        return self.shapes(self.beam.length)[:, 0]


def gauss_nodes(length: float, npts: int = QUADRATURE_POINTS):
    xg, wg = np.polynomial.legendre.leggauss(npts)
    return 0.5 * length * (xg + 1.0), 0.5 * length * wg


def assemble_modal_model(beam: BeamSpec, n: int = 12, damping: float = 0.02) -> ModalModel:
    """Build the first ``n`` bending modes with equal modal damping ratios."""
    if n < 1:
        raise ValueError("mode count must be >= 1")
    if not 0 < damping < 1 / np.sqrt(2):
        raise ValueError("damping ratio must lie in (0, 1/sqrt(2))")
    betas = solve_mode_wavenumbers(n)
    ell = beam.length
    rho_a = beam.density * beam.area
    omegas = betas**2 * np.sqrt(beam.youngs_modulus * beam.second_moment / rho_a) / ell**2

    xq, wq = gauss_nodes(ell)
    scale = np.empty(n)
    for k, L in enumerate(betas):
        phi = _shape_terms(L, L * xq / ell)[0]
        norm = 1.0 / np.sqrt(rho_a * np.dot(wq, phi * phi))
        tip = _shape_terms(L, np.array([L]))[0][0]
        scale[k] = norm * np.sign(tip)
    return ModalModel(
        beam=beam,
        wavenumbers=betas,
        natural_frequencies=omegas,
        damping_ratios=np.full(n, float(damping)),
        _scale=scale,
    )


def with_damping(model: ModalModel, damping: float) -> ModalModel:
    if not 0 <= damping < 1 / np.sqrt(2):
        raise ValueError("damping ratio must lie in [0, 1/sqrt(2))")
    return ModalModel(model.beam, model.wavenumbers, model.natural_frequencies,
                      np.full(model.mode_count, float(damping)), model._scale)


def resonant_amplitude_no_absorber(model: ModalModel, layout: ForcingLayout) -> float:
    """Mode-1 modal amplitude at resonance without absorber, F*phi(x_f)/(2 D w^2)."""
    phi_f = model.shape_at(layout.force_location, 0)
    w1, d1 = model.natural_frequencies[0], model.damping_ratios[0]
    return phi_f * layout.force_amplitude / (2.0 * d1 * w1**2)


def excitation_amplitude_from_fatigue(model: ModalModel, beam: BeamSpec,
                                      layout: ForcingLayout) -> float:
    """Force amplitude for which the resonant bending stress (no absorber) hits the
    fatigue strength. The stress maximum is searched on a uniform grid."""
    phi_f = model.shape_at(layout.force_location, 0)
    if phi_f == 0.0:
        raise ValueError("forcing location is a node of mode 1")
    w1, d1 = model.natural_frequencies[0], model.damping_ratios[0]
    if not d1 > 0:
        raise ValueError("mode-1 damping must be > 0")
    x = np.linspace(0.0, beam.length, STRESS_GRID_POINTS)
    kappa_max = np.max(np.abs(model.curvatures(x)[0]))
    # sigma = E h/2 kappa_max a_no,  a_no = phi_f F / (2 D w^2)
    a_no = beam.fatigue_bending_strength / (beam.youngs_modulus * 0.5 * beam.height * kappa_max)
    return a_no * 2.0 * d1 * w1**2 / abs(phi_f)

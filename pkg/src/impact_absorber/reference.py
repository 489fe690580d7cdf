"""Direct time integration of the beam-absorber system and the stepped-sine protocol."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .beam import ForcingLayout, ModalModel, resonant_amplitude_no_absorber
from .contact import ContactSetup, contact_force, contact_potential

logger = logging.getLogger(__name__)

SMR_VARIATION = 0.10
DIVERGENCE_FACTOR = 1e6


class SimulationDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    etas: tuple = tuple(np.linspace(0.9, 1.07, 20))
    periods_per_batch: int = 100
    tolerance: float = 0.01
    points_per_mode_period: int = 15
    max_periods: int = 1000
    discard_batches: int = 1
    eval_batches: int = 2

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if any(e <= 0 for e in self.etas):
            raise ValueError("frequency ratios must be > 0")
        if list(self.etas) != sorted(self.etas):
            raise ValueError("frequency ratios must be ascending")


@dataclass
class ForcedSystem:
    """Arrays consumed by the integration kernel."""

    model: ModalModel
    contact: ContactSetup
    layout: ForcingLayout
    contact_enabled: bool = True
    phic: np.ndarray = field(init=False)
    fvec: np.ndarray = field(init=False)

    def __post_init__(self):
        self.phic = self.model.shapes(self.layout.contact_location)[:, 0].copy()
        self.fvec = (self.model.shapes(self.layout.force_location)[:, 0]
                     * self.layout.force_amplitude).copy()

    @property
    def n(self) -> int:
        return self.model.mode_count

    @property
    def gap(self) -> float:
        return self.contact.clearance if self.contact_enabled else np.inf

    @property
    def state_limit(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            a_no = abs(resonant_amplitude_no_absorber(self.model, self.layout))
        if not np.isfinite(a_no):
            a_no = 0.0  # undamped or unforced: fall back to the clearance scale
        scale = max(a_no, a_no * abs(self.phic[0]), self.contact.clearance)
        return DIVERGENCE_FACTOR * scale

    def zero_state(self) -> np.ndarray:
        return np.zeros(2 * self.n + 2)

    def wall_state(self) -> np.ndarray:
        """Host at rest, absorber at rest touching the cavity wall.

        From the centered rest state a free absorber is never engaged when the
        clearance exceeds the linear host amplitude, so the impacting branch
        would be missed.
        """
        y = self.zero_state()
        if self.contact_enabled:
            y[2 * self.n] = self.contact.clearance
        return y

    def energy(self, y) -> np.ndarray:
        """Total mechanical energy of state(s) ``y`` (modal + absorber + Hertz)."""
        y = np.atleast_2d(y)
        n, w = self.n, self.model.natural_frequencies
        q, qd = y[:, :n], y[:, n:2 * n]
        e = 0.5 * np.sum(qd**2 + (w * q) ** 2, axis=1)
        e += 0.5 * self.contact.absorber_mass * y[:, 2 * n + 1] ** 2
        delta = q @ self.phic - y[:, 2 * n]
        e += contact_potential(delta, self.gap, self.contact.hertz_constant)
        return e


def time_grid(model: ModalModel, Omega: float, points_per_mode_period: int = 15):
    """Steps per forcing period and the step size; the period is an integer number
    of steps no coarser than the highest-mode rule."""
    T = 2.0 * np.pi / Omega
    dt_max = 2.0 * np.pi / model.natural_frequencies[-1] / points_per_mode_period
    n = int(np.ceil(T / dt_max - 1e-9))
    return n, T / n


def _tables(Omega, n_steps, dt):
    j = np.arange(n_steps)
    cos_tab = np.array([np.cos(Omega * (j + c) * dt) for c in (0.0, 0.5, 0.75, 1.0)])
    return cos_tab, np.sin(Omega * j * dt)


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    Omega: float
    dt: float
    system: ForcedSystem = field(repr=False)

    @property
    def delta(self) -> np.ndarray:
        n = self.system.n
        return self.y[:, :n] @ self.system.phic - self.y[:, 2 * n]

    @property
    def force(self) -> np.ndarray:
        return contact_force(self.delta, self.system.gap, self.system.contact.hertz_constant)


@dataclass
class PeriodBatch:
    coefficients: np.ndarray   # complex fundamental coefficient of q_1 per period
    impacts: np.ndarray        # (onset, release, v_c, cor, sign) rows, times relative to batch
    n_impacts: int


def _run(system: ForcedSystem, Omega: float, y: np.ndarray, n_periods: int, carry,
         points_per_mode_period: int = 15, rec_every: int = 0):
    n_steps, dt = time_grid(system.model, Omega, points_per_mode_period)
    cos_tab, sin_tab = _tables(Omega, n_steps, dt)
    n_rec = (n_periods * n_steps) // rec_every + 1 if rec_every > 0 else 0
    rec = np.zeros((n_rec, 2 * system.n + 3))
    max_imp = max(64, 64 * n_periods)
    re, im, imp, n_imp, got = _kernels.run_periods(
        y, system.n, system.model.natural_frequencies, system.model.damping_ratios,
        system.phic, system.fvec, 1.0 / system.contact.absorber_mass,
        system.contact.hertz_constant, system.gap, cos_tab, sin_tab, dt, n_periods,
        system.state_limit, max_imp, rec_every, rec, carry)
    if n_imp < 0:
        raise SimulationDivergenceError(
            f"state exceeded {system.state_limit:.3g} at Omega={Omega:.6g} rad/s")
    kept = min(n_imp, max_imp)
    batch = PeriodBatch(re + 1j * im, imp[:kept].copy(), n_imp)
    return batch, rec[:got], dt


def integrate(model: ModalModel, contact: ContactSetup, layout: ForcingLayout, Omega: float,
              y0=None, n_periods: int = 1, *, contact_enabled: bool = True,
              points_per_mode_period: int = 15, record_every: int = 1) -> Trajectory:
    """Fixed-step BS3 integration over whole forcing periods, recording states."""
    if not Omega > 0:
        raise ValueError("Omega must be > 0")
    system = ForcedSystem(model, contact, layout, contact_enabled)
    y = system.zero_state() if y0 is None else np.array(y0, dtype=float)
    carry = np.zeros(2)
    _, rec, dt = _run(system, Omega, y, n_periods, carry, points_per_mode_period,
                      rec_every=max(1, record_every))
    # append the final state
    t_end = n_periods * 2.0 * np.pi / Omega
    rec = np.vstack([rec, np.concatenate([[t_end], y])])
    return Trajectory(t=rec[:, 0], y=rec[:, 1:], Omega=Omega, dt=dt * max(1, record_every),
                      system=system)


@dataclass(frozen=True)
class Impact:
    start: float
    end: float
    v_c: float
    cor: float


def detect_impacts(traj: Trajectory, contact: ContactSetup | None = None) -> list[Impact]:
    """Maximal runs of samples with nonzero contact force.

    Onset velocity is |d(delta)/dt| interpolated at the gap crossing; the modal CoR
    uses only the mode-1 host velocity at release.
    """
    system = traj.system
    g = system.gap if contact is None else contact.clearance
    if not np.isfinite(g):
        return []
    n = system.n
    delta = traj.delta
    ddelta = traj.y[:, n:2 * n] @ system.phic - traj.y[:, 2 * n + 1]
    on = np.abs(delta) > g
    edges = np.diff(on.astype(int))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1) + 1)
    if on[0]:
        starts.insert(0, 0)
    out = []
    for s in starts:
        e_candidates = [e for e in ends if e > s]
        if not e_candidates:
            break
        e = e_candidates[0]
        if s > 0:
            a0, a1 = abs(delta[s - 1]) - g, abs(delta[s]) - g
            frac = -a0 / (a1 - a0)
            v = abs(ddelta[s - 1] + frac * (ddelta[s] - ddelta[s - 1]))
            t_on = traj.t[s - 1] + frac * (traj.t[s] - traj.t[s - 1])
        else:
            v, t_on = abs(ddelta[0]), traj.t[0]
        rel = traj.y[e, 2 * n + 1] - system.phic[0] * traj.y[e, n]
        cor = abs(rel) / v if v > 0 else np.nan
        out.append(Impact(float(t_on), float(traj.t[e]), float(v), float(cor)))
    return out


@dataclass
class SteadyStateMetrics:
    mean_amplitude: float
    max_amplitude: float
    impacts_per_period: float
    mean_contact_phase: float
    mean_cor: float
    is_strongly_modulated: bool
    converged: bool = True
    periods: int = 0


def steady_state_metrics(coefficients, impacts, Omega: float, n_impacts: int | None = None,
                         period_offset: int = 0) -> SteadyStateMetrics:
    """Metrics from per-period mode-1 Fourier coefficients and an impact table.

    ``impacts`` rows are (onset, release, v_c, cor, sign) with onset times measured
    from the start of the coefficient window minus ``period_offset`` periods.
    """
    coefficients = np.asarray(coefficients)
    amps = np.abs(coefficients)
    n_per = amps.size
    T = 2.0 * np.pi / Omega
    n_imp = len(impacts) if n_impacts is None else n_impacts
    phases = []
    cors = []
    for row in impacts:
        cor = row[3]
        if np.isfinite(cor):
            cors.append(cor)
        t_on = row[0]
        if not np.isfinite(t_on):
            continue
        p = int(np.floor(t_on / T)) - period_offset
        if 0 <= p < n_per:
            phases.append((Omega * t_on + np.angle(coefficients[p])) % np.pi)
    if phases:
        z = np.mean(np.exp(2j * np.array(phases)))
        psi_bar = float((np.angle(z) / 2.0) % np.pi)
    else:
        psi_bar = float("nan")
    mean_amp = float(np.mean(amps))
    cov = float(np.std(amps) / mean_amp) if mean_amp > 0 else 0.0
    return SteadyStateMetrics(
        mean_amplitude=mean_amp,
        max_amplitude=float(np.max(amps)),
        impacts_per_period=n_imp / n_per,
        mean_contact_phase=psi_bar,
        mean_cor=float(np.mean(cors)) if cors else float("nan"),
        is_strongly_modulated=cov > SMR_VARIATION,
        periods=n_per,
    )


@dataclass
class SweepResult:
    etas: np.ndarray
    metrics: list
    final_state: np.ndarray

    @property
    def mean_amplitudes(self) -> np.ndarray:
        return np.array([m.mean_amplitude for m in self.metrics])

    @property
    def resonant_index(self) -> int:
        return int(np.argmax(self.mean_amplitudes))

    @property
    def resonant(self) -> SteadyStateMetrics:
        return self.metrics[self.resonant_index]


def _level(system: ForcedSystem, Omega: float, y: np.ndarray, carry, config: SimConfig):
    """Batches at one frequency until consecutive batch means agree."""
    batches = []
    means = []
    done = 0
    converged = False
    while done < config.max_periods:
        b, _, _ = _run(system, Omega, y, config.periods_per_batch, carry,
                       config.points_per_mode_period)
        done += config.periods_per_batch
        batches.append(b)
        means.append(np.mean(np.abs(b.coefficients)))
        if len(batches) >= config.discard_batches + config.eval_batches:
            if abs(means[-1] - means[-2]) <= config.tolerance * means[-2]:
                converged = True
                break
    keep = batches[-config.eval_batches:]
    # stitch batches: impact onsets shifted into the window time frame
    coefs = np.concatenate([b.coefficients for b in keep])
    T = 2.0 * np.pi / Omega
    rows = []
    n_imp = 0
    for i, b in enumerate(keep):
        r = b.impacts.copy()
        r[:, 0] += i * config.periods_per_batch * T
        r[:, 1] += i * config.periods_per_batch * T
        rows.append(r)
        n_imp += b.n_impacts
    imp = np.vstack(rows) if rows else np.zeros((0, 5))
    m = steady_state_metrics(coefs, imp, Omega, n_impacts=n_imp)
    m.converged = converged
    m.periods = done
    return m


def stepped_sine_sweep(model: ModalModel, contact: ContactSetup, layout: ForcingLayout,
                       config: SimConfig, *, contact_enabled: bool = True,
                       y0=None) -> SweepResult:
    """Ascending stepped sine; each level starts from the previous final state."""
    system = ForcedSystem(model, contact, layout, contact_enabled)
    y = system.zero_state() if y0 is None else np.array(y0, dtype=float)
    carry = np.zeros(2)
    w1 = model.natural_frequencies[0]
    metrics = []
    for eta in config.etas:
        m = _level(system, eta * w1, y, carry, config)
        if not m.converged:
            logger.info("eta=%.4f not stabilized after %d periods", eta, m.periods)
        metrics.append(m)
    return SweepResult(np.asarray(config.etas, dtype=float), metrics, y.copy())


@dataclass
class EfficacyScan:
    clearance: np.ndarray          # g / (phic a_no)
    mean_amplitude: np.ndarray     # resonant mean amplitude / a_no
    max_amplitude: np.ndarray
    resonant_eta: np.ndarray
    impacts_per_period: np.ndarray
    contact_phase: np.ndarray
    mean_cor: np.ndarray
    strongly_modulated: np.ndarray
    converged: np.ndarray
    sweeps: list = field(repr=False, default_factory=list)

    @property
    def optimum_index(self) -> int:
        return int(np.argmin(self.mean_amplitude))


def efficacy_scan(model: ModalModel, contact: ContactSetup, layout: ForcingLayout,
                  clearances, config: SimConfig, threads: int = 1) -> EfficacyScan:
    """Resonant response for each normalized clearance g/(phic a_no).

    Every sweep starts with the absorber resting against the wall (see
    ``ForcedSystem.wall_state``).
    """
    clearances = np.asarray(clearances, dtype=float)
    if np.any(np.diff(clearances) <= 0):
        raise ValueError("clearances must be ascending")
    a_no = resonant_amplitude_no_absorber(model, layout)
    phic = contact.contact_shape_value

    def one(gn):
        c = contact.with_clearance(gn * phic * a_no)
        y0 = ForcedSystem(model, c, layout).wall_state()
        return stepped_sine_sweep(model, c, layout, config, y0=y0)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            sweeps = list(ex.map(one, clearances))
    else:
        sweeps = [one(gn) for gn in clearances]
    res = [s.resonant for s in sweeps]
    return EfficacyScan(
        clearance=clearances,
        mean_amplitude=np.array([m.mean_amplitude for m in res]) / a_no,
        max_amplitude=np.array([m.max_amplitude for m in res]) / a_no,
        resonant_eta=np.array([s.etas[s.resonant_index] for s in sweeps]),
        impacts_per_period=np.array([m.impacts_per_period for m in res]),
        contact_phase=np.array([m.mean_contact_phase for m in res]),
        mean_cor=np.array([m.mean_cor for m in res]),
        strongly_modulated=np.array([m.is_strongly_modulated for m in res]),
        converged=np.array([m.converged for m in res]),
        sweeps=sweeps,
    )

"""Run configuration: INI-style ``key = value`` sections with a shipped table1 profile."""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .beam import TABLE1_BEAM, BeamSpec, ForcingLayout, ModalModel, assemble_modal_model, \
    excitation_amplitude_from_fatigue
from .contact import ContactSetup, hertz_constant, sphere_from_mass_ratio
from .reference import SimConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    beam: BeamSpec = TABLE1_BEAM
    mass_ratio: float | None = 0.01
    absorber_radius: float | None = None
    absorber_density: float | None = None
    absorber_youngs_modulus: float | None = None
    absorber_poisson: float | None = None
    damping: float = 0.0204
    modes: int = 12
    force_location_fraction: float = 1.0 / 3.0
    contact_location_fraction: float = 1.0
    fatigue_forcing: bool = True
    force_amplitude: float | None = None
    clearances: list | None = None        # normalized g/(phic a_no); None = auto range
    clearance_min: float = 0.3
    clearance_max: float = 1.5
    clearance_step: float = 0.05
    eta_min: float = 0.9
    eta_max: float = 1.07
    eta_steps: int = 20
    periods_per_batch: int = 100
    tolerance: float = 0.01
    points_per_mode_period: int = 15
    max_periods: int = 1000
    output_dir: str = "out"
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self) -> None:
        errs = []
        if (self.mass_ratio is None) == (self.absorber_radius is None):
            errs.append("absorber: give exactly one of mass_ratio / radius")
        if self.mass_ratio is not None and not self.mass_ratio > 0:
            errs.append("absorber.mass_ratio: must be > 0")
        if self.absorber_radius is not None and not self.absorber_radius > 0:
            errs.append("absorber.radius: must be > 0")
        if self.modes < 1:
            errs.append("model.modes: must be >= 1")
        if not 0 < self.damping < 1 / np.sqrt(2):
            errs.append("model.damping: must lie in (0, 0.707)")
        if not 0 < self.force_location_fraction <= 1:
            errs.append("forcing.location_fraction: must lie in (0, 1]")
        if not 0 < self.contact_location_fraction <= 1:
            errs.append("forcing.contact_location_fraction: must lie in (0, 1]")
        if not self.fatigue_forcing and not (self.force_amplitude or 0) > 0:
            errs.append("forcing.amplitude: required (> 0) when fatigue = false")
        if self.clearances is not None and any(c <= 0 for c in self.clearances):
            errs.append("design.clearances: values must be > 0")
        if self.clearances is None and not 0 < self.clearance_min < self.clearance_max:
            errs.append("design.clearance_min/max: need 0 < min < max")
        if not 0 < self.eta_min < self.eta_max or self.eta_steps < 1:
            errs.append("sweep.eta_*: need 0 < eta_min < eta_max and eta_steps >= 1")
        if not self.tolerance > 0:
            errs.append("sweep.tolerance: must be > 0")
        if errs:
            raise ConfigError("; ".join(errs))

    # -- derived objects -------------------------------------------------
    @property
    def absorber_material(self):
        b = self.beam
        return (self.absorber_density or b.density,
                self.absorber_youngs_modulus or b.youngs_modulus,
                self.absorber_poisson or b.poisson)

    def modal_model(self) -> ModalModel:
        return assemble_modal_model(self.beam, self.modes, self.damping)

    def layout(self, model: ModalModel) -> ForcingLayout:
        ell = self.beam.length
        x_f = self.force_location_fraction * ell
        x_c = self.contact_location_fraction * ell
        if self.fatigue_forcing:
            F = excitation_amplitude_from_fatigue(model, self.beam, ForcingLayout(x_f, 1.0, x_c))
        else:
            F = float(self.force_amplitude)
        return ForcingLayout(x_f, F, x_c)

    def contact(self, model: ModalModel, clearance: float = 1.0) -> ContactSetup:
        rho_a, E_a, nu_a = self.absorber_material
        if self.mass_ratio is not None:
            R, m_a = sphere_from_mass_ratio(self.beam.mass, self.mass_ratio, rho_a)
        else:
            R = self.absorber_radius
            m_a = rho_a * 4.0 / 3.0 * np.pi * R**3
        kH = hertz_constant(R, E_a, nu_a, self.beam.youngs_modulus, self.beam.poisson)
        phic = model.shape_at(self.contact_location_fraction * self.beam.length, 0)
        return ContactSetup(R, m_a, kH, clearance, phic, m_a / self.beam.mass)

    def clearance_list(self) -> np.ndarray:
        if self.clearances is not None:
            return np.array(sorted(self.clearances), dtype=float)
        n = int(round((self.clearance_max - self.clearance_min) / self.clearance_step))
        return np.round(self.clearance_min + self.clearance_step * np.arange(n + 1), 10)

    def sim_config(self) -> SimConfig:
        return SimConfig(etas=tuple(np.linspace(self.eta_min, self.eta_max, self.eta_steps)),
                         periods_per_batch=self.periods_per_batch, tolerance=self.tolerance,
                         points_per_mode_period=self.points_per_mode_period,
                         max_periods=self.max_periods)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        return d


def _float(sec, key, default=None):
    if key not in sec:
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: not a number: {sec[key]!r}") from None


def _int(sec, key, default):
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: not an integer: {sec[key]!r}") from None


def profile_text(name: str) -> str:
    try:
        return resources.files("impact_absorber.profiles").joinpath(f"{name}.ini").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown profile {name!r}") from None


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    for s in ("beam", "absorber", "model", "forcing", "design", "sweep", "output"):
        if not cp.has_section(s):
            cp.add_section(s)
    cfg = RunConfig()
    b = cp["beam"]
    profile = b.get("profile")
    base = parse_config(profile_text(profile)).beam if profile else TABLE1_BEAM
    try:
        cfg.beam = BeamSpec(
            length=_float(b, "length", base.length),
            height=_float(b, "height", base.height),
            width=_float(b, "width", base.width),
            density=_float(b, "density", base.density),
            youngs_modulus=_float(b, "youngs_modulus", base.youngs_modulus),
            poisson=_float(b, "poisson", base.poisson),
            fatigue_bending_strength=_float(b, "fatigue_bending_strength",
                                            base.fatigue_bending_strength),
        )
    except ValueError as exc:
        raise ConfigError(f"beam: {exc}") from None
    a = cp["absorber"]
    cfg.mass_ratio = _float(a, "mass_ratio")
    cfg.absorber_radius = _float(a, "radius")
    if cfg.mass_ratio is None and cfg.absorber_radius is None:
        cfg.mass_ratio = 0.01
    cfg.absorber_density = _float(a, "density")
    cfg.absorber_youngs_modulus = _float(a, "youngs_modulus")
    cfg.absorber_poisson = _float(a, "poisson")
    m = cp["model"]
    cfg.modes = _int(m, "modes", cfg.modes)
    cfg.damping = _float(m, "damping", cfg.damping)
    f = cp["forcing"]
    cfg.force_location_fraction = _float(f, "location_fraction", cfg.force_location_fraction)
    cfg.contact_location_fraction = _float(f, "contact_location_fraction",
                                           cfg.contact_location_fraction)
    try:
        cfg.fatigue_forcing = f.getboolean("fatigue", cfg.fatigue_forcing)
    except ValueError:
        raise ConfigError("forcing.fatigue: expected true/false") from None
    cfg.force_amplitude = _float(f, "amplitude")
    d = cp["design"]
    raw = d.get("clearances", "auto").strip()
    if raw and raw != "auto":
        try:
            cfg.clearances = [float(v) for v in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"design.clearances: expected 'auto' or numbers, got {raw!r}") \
                from None
    cfg.clearance_min = _float(d, "clearance_min", cfg.clearance_min)
    cfg.clearance_max = _float(d, "clearance_max", cfg.clearance_max)
    cfg.clearance_step = _float(d, "clearance_step", cfg.clearance_step)
    s = cp["sweep"]
    cfg.eta_min = _float(s, "eta_min", cfg.eta_min)
    cfg.eta_max = _float(s, "eta_max", cfg.eta_max)
    cfg.eta_steps = _int(s, "eta_steps", cfg.eta_steps)
    cfg.periods_per_batch = _int(s, "periods_per_batch", cfg.periods_per_batch)
    cfg.tolerance = _float(s, "tolerance", cfg.tolerance)
    cfg.points_per_mode_period = _int(s, "points_per_mode_period", cfg.points_per_mode_period)
    cfg.max_periods = _int(s, "max_periods", cfg.max_periods)
    cfg.output_dir = cp["output"].get("dir", cfg.output_dir)
    cfg.validate()
    return cfg


def load_config(path: str | None) -> RunConfig:
    """Load an INI file, a named profile (``table1``) or a run manifest (JSON)."""
    if path is None:
        return parse_config(profile_text("table1"))
    p = Path(path)
    if not p.exists():
        if "/" not in path and not path.endswith((".ini", ".json")):
            return parse_config(profile_text(path))
        raise ConfigError(f"config file not found: {path}")
    if p.suffix == ".json":
        try:
            manifest = json.loads(p.read_text())
            return parse_config(manifest["config_text"])
        except (KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"not a run manifest: {exc}") from None
    return parse_config(p.read_text())


def config_text(cfg: RunConfig) -> str:
    """Fully resolved INI text; parsing it reproduces ``cfg``."""
    b = cfg.beam
    lines = ["[beam]"]
    for k in ("length", "height", "width", "density", "youngs_modulus", "poisson",
              "fatigue_bending_strength"):
        lines.append(f"{k} = {getattr(b, k)!r}")
    lines.append("[absorber]")
    if cfg.mass_ratio is not None:
        lines.append(f"mass_ratio = {cfg.mass_ratio!r}")
    else:
        lines.append(f"radius = {cfg.absorber_radius!r}")
    for k, v in (("density", cfg.absorber_density), ("youngs_modulus", cfg.absorber_youngs_modulus),
                 ("poisson", cfg.absorber_poisson)):
        if v is not None:
            lines.append(f"{k} = {v!r}")
    lines += ["[model]", f"modes = {cfg.modes}", f"damping = {cfg.damping!r}", "[forcing]",
              f"location_fraction = {cfg.force_location_fraction!r}",
              f"contact_location_fraction = {cfg.contact_location_fraction!r}",
              f"fatigue = {str(cfg.fatigue_forcing).lower()}"]
    if cfg.force_amplitude is not None:
        lines.append(f"amplitude = {cfg.force_amplitude!r}")
    clist = "auto" if cfg.clearances is None else " ".join(repr(c) for c in cfg.clearances)
    lines += ["[design]", f"clearances = {clist}", f"clearance_min = {cfg.clearance_min!r}",
              f"clearance_max = {cfg.clearance_max!r}", f"clearance_step = {cfg.clearance_step!r}",
              "[sweep]", f"eta_min = {cfg.eta_min!r}", f"eta_max = {cfg.eta_max!r}",
              f"eta_steps = {cfg.eta_steps}", f"periods_per_batch = {cfg.periods_per_batch}",
              f"tolerance = {cfg.tolerance!r}",
              f"points_per_mode_period = {cfg.points_per_mode_period}",
              f"max_periods = {cfg.max_periods}", "[output]", f"dir = {cfg.output_dir}"]
    return "\n".join(lines) + "\n"

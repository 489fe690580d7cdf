"""Command line front end: modes | calibrate | design | sweep | validate.

Every run writes CSV tables (header row with units), PNG figures and a
``manifest.json`` holding the resolved configuration, so that
``--config out/manifest.json`` reruns the same computation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .beam import resonant_amplitude_no_absorber
from .config import ConfigError, RunConfig, config_text, load_config
from .contact import hunter_reed
from .impact_event import (ImpactDivergenceError, calibrate, roundtrip_pulse,
                           simulate_single_impact)
from .reference import SimulationDivergenceError, efficacy_scan
from .semianalytic import (efficacy_curve, frequency_response, optimum_design,
                           phase_from_clearance_ratio)

logger = logging.getLogger("impact_absorber")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o))


class Run:
    """Shared state of one invocation: config, derived model and output files."""

    def __init__(self, cfg: RunConfig, out: Path, threads: int):
        self.cfg, self.out, self.threads = cfg, out, threads
        out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.summary: dict = {}
        self.model = cfg.modal_model()
        self.layout = cfg.layout(self.model)
        self.a_no = resonant_amplitude_no_absorber(self.model, self.layout)
        self.contact = cfg.contact(self.model)
        self._cal = None

    def path(self, name):
        p = self.out / name
        self.files.append(name)
        return p

    @property
    def calibration(self):
        if self._cal is None:
            self._cal = calibrate(self.model, self.contact, self.layout, self.cfg.damping)
        return self._cal

    @property
    def design_parameters(self):
        p = self.calibration.final
        mu = self.contact.absorber_mass * self.contact.contact_shape_value**2
        return mu, mu * p.gamma, p.cor

    def optimum(self):
        _, mg, r = self.design_parameters
        return optimum_design(self.cfg.damping, mg, r)


def cmd_modes(run: Run):
    """Mode table (frequencies, shape values at contact and forcing points)."""
    m, cfg = run.model, run.cfg
    x_f, x_c = run.layout.force_location, run.layout.contact_location
    rows = []
    for k in range(m.mode_count):
        rows.append((k + 1, m.wavenumbers[k], m.natural_frequencies[k],
                     m.natural_frequencies[k] / (2 * np.pi), m.damping_ratios[k],
                     m.shape_at(x_c, k), m.shape_at(x_f, k)))
    write_csv(run.path("modes.csv"),
              ["mode", "beta_l [-]", "omega [rad/s]", "f [Hz]", "damping [-]",
               "phi_c [1/sqrt(kg)]", "phi_xf [1/sqrt(kg)]"], rows)
    plotting.plot_modes(m, run.path("modes.png"))
    run.summary.update(beam_mass_kg=cfg.beam.mass, force_amplitude_N=run.layout.force_amplitude,
                       a_res_no_absorber=run.a_no, f1_Hz=m.natural_frequencies[0] / (2 * np.pi))


def cmd_calibrate(run: Run):
    """Two-step pulse calibration from single impact events."""
    cal, c = run.calibration, run.contact
    rec = simulate_single_impact(run.model, c, cal.v_c_final,
                                 contact_location=run.layout.contact_location)
    rec.to_csv(run.path("pulse.csv"))
    plotting.plot_pulse(rec, roundtrip_pulse(cal.final, c, cal.v_c_final), run.path("pulse.png"))
    hr = hunter_reed(c.absorber_mass, c.hertz_constant, cal.v_c_final)
    write_csv(run.path("calibration.csv"),
              ["stage", "v_c [m/s]", "r [-]", "alpha_tilde [-]", "tc_tilde [-]", "gamma [-]"],
              [("initial", cal.v_c_initial, cal.initial.cor, cal.initial.alpha_tilde,
                cal.initial.tc_tilde, cal.initial.gamma),
               ("final", cal.v_c_final, cal.final.cor, cal.final.alpha_tilde,
                cal.final.tc_tilde, cal.final.gamma)])
    run.summary.update(
        absorber_mass_kg=c.absorber_mass, absorber_radius_m=c.absorber_radius,
        hertz_constant=c.hertz_constant, phi_c=c.contact_shape_value,
        pulse_initial=cal.initial.as_dict(), pulse_final=cal.final.as_dict(),
        relative_change=cal.relative_change, hunter_reed_duration_s=hr.contact_duration)


def _design_rows(curve):
    for i in range(curve.psi.size):
        yield (curve.psi[i], curve.eta[i], curve.clearance[i], curve.amplitude[i],
               0 if curve.is_max_branch[i] else 1, False)


def cmd_design(run: Run):
    """Semi-analytical efficacy curve, optimum and frequency responses."""
    D = run.cfg.damping
    mu, mg, r = run.design_parameters
    p = run.calibration.final
    curve = efficacy_curve(D, mg, r)
    opt = run.optimum()
    header = ["psi [rad]", "eta [-]", "norm_clearance [-]", "norm_amplitude [-]",
              "branch_id", "is_isola"]
    write_csv(run.path("design_curve.csv"), header, _design_rows(curve))
    frf = {}
    rows = []
    for gn in (0.5 * opt.clearance, 0.9 * opt.clearance, opt.clearance):
        frf[gn] = frequency_response(D, mg, r, gn)
        for j, b in enumerate(frf[gn]):
            for ps, e, a in zip(b.psi, b.eta, b.amplitude):
                rows.append((gn, ps, e, gn, a, j, b.is_isola))
    write_csv(run.path("frequency_response.csv"), ["clearance [-]"] + header, rows)
    plotting.plot_efficacy(curve, opt, run.path("efficacy.png"))
    plotting.plot_frequency_response(frf, run.path("frequency_response.png"))
    phic = run.contact.contact_shape_value
    run.summary.update(
        mu=mu, mu_gamma=mg, cor=r, damping=D,
        forcing_ratio_at_optimum=2 * D / opt.clearance,
        optimum_norm_clearance=opt.clearance,
        optimum_clearance_m=opt.clearance * phic * run.a_no,
        optimum_norm_amplitude=opt.amplitude, optimum_psi=opt.psi, optimum_eta=opt.eta,
        optimum_at_boundary=opt.at_boundary,
        gamma_over_1_plus_r=p.gamma / (1 + p.cor), two_over_pi=2 / np.pi)


def _sweep_rows(gn, s, a_no):
    for eta, m in zip(s.etas, s.metrics):
        yield (gn, eta, m.mean_amplitude / a_no, m.max_amplitude / a_no, m.impacts_per_period,
               m.mean_contact_phase, m.mean_cor, m.is_strongly_modulated, m.converged, m.periods)


SWEEP_HEADER = ["clearance [-]", "eta [-]", "mean_amplitude [-]", "max_amplitude [-]",
                "impacts_per_period [-]", "contact_phase [rad]", "cor [-]", "smr", "converged",
                "periods"]


def cmd_sweep(run: Run):
    """Reference stepped-sine sweeps at the configured clearances."""
    cfg = run.cfg
    scan = efficacy_scan(run.model, run.contact, run.layout, cfg.clearance_list(),
                         cfg.sim_config(), threads=run.threads)
    rows = [r for gn, s in zip(scan.clearance, scan.sweeps) for r in _sweep_rows(gn, s, run.a_no)]
    write_csv(run.path("sweep.csv"), SWEEP_HEADER, rows)
    plotting.plot_sweeps(dict(zip(scan.clearance, scan.sweeps)), run.a_no, run.path("sweep.png"))
    return scan


def cmd_validate(run: Run):
    """Semi-analytical prediction against the reference efficacy scan."""
    D = run.cfg.damping
    _, mg, r = run.design_parameters
    opt = run.optimum()
    curve = efficacy_curve(D, mg, r)
    t0 = time.perf_counter()
    scan = cmd_sweep(run)
    elapsed = time.perf_counter() - t0
    pred = np.interp(scan.clearance, curve.clearance[curve.is_max_branch],
                     curve.amplitude[curve.is_max_branch], right=np.nan)
    phase_pred = np.array([phase_from_clearance_ratio(g / a, c if np.isfinite(c) else r)
                           for g, a, c in zip(scan.clearance, scan.mean_amplitude, scan.mean_cor)])
    write_csv(run.path("validation.csv"),
              ["clearance [-]", "predicted_amplitude [-]", "reference_mean_amplitude [-]",
               "reference_max_amplitude [-]", "resonant_eta [-]", "impacts_per_period [-]",
               "contact_phase [rad]", "contact_phase_eq [rad]", "cor [-]", "smr", "converged"],
              zip(scan.clearance, pred, scan.mean_amplitude, scan.max_amplitude,
                  scan.resonant_eta, scan.impacts_per_period, scan.contact_phase, phase_pred,
                  scan.mean_cor, scan.strongly_modulated, scan.converged))
    plotting.plot_efficacy(curve, opt, run.path("validation_efficacy.png"), reference=scan)
    plotting.plot_regimes(scan, phase_pred, run.path("validation_regimes.png"))
    k = scan.optimum_index
    run.summary.update(
        predicted_optimum_clearance=opt.clearance, predicted_optimum_amplitude=opt.amplitude,
        reference_optimum_clearance=scan.clearance[k],
        reference_optimum_amplitude=scan.mean_amplitude[k],
        optimum_relative_deviation=abs(scan.clearance[k] - opt.clearance) / opt.clearance,
        reference_seconds=elapsed)


COMMANDS = {
    "modes": cmd_modes,
    "calibrate": cmd_calibrate,
    "design": cmd_design,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="impact-absorber", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        s = sub.add_parser(name, help=(fn.__doc__ or name).splitlines()[0])
        s.add_argument("--config", metavar="PATH",
                       help="INI file, profile name or manifest.json (default: table1)")
        s.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
        s.add_argument("--threads", type=int, default=1, metavar="N",
                       help="parallel clearance sweeps")
        s.add_argument("--seedless", action="store_true",
                       help="no random numbers are used; runs are deterministic by construction")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output_dir)
    try:
        run = Run(cfg, out, args.threads)
        COMMANDS[args.command](run)
    except (ImpactDivergenceError, SimulationDivergenceError, FloatingPointError,
            ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {"toolkit": "impact_absorber", "version": __version__, "command": args.command,
                "config_text": config_text(cfg), "outputs": run.files, "summary": run.summary}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default))
    for f in run.files:
        print(out / f)
    print(out / "manifest.json")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

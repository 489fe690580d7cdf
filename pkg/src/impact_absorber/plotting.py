"""Report figures. Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_modes(model, path, n_show: int = 4):
    x = np.linspace(0.0, model.beam.length, 400)
    phi = model.shapes(x)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        for k in range(min(n_show, model.mode_count)):
            f = model.natural_frequencies[k] / (2 * np.pi)
            ax.plot(x * 1e3, phi[k], label=f"mode {k + 1}, {f:.1f} Hz")
        ax.set_xlabel("x [mm]")
        ax.set_ylabel(r"$\varphi_k$ [1/$\sqrt{\mathrm{kg}}$]")
        ax.legend()
        return _save(fig, path)


def plot_pulse(record, prediction, path):
    """Simulated contact force against the (corrected) Hunter-Reed pulse."""
    t = record.t
    tau = np.clip(t / prediction.contact_duration, 0.0, 1.0)
    hr = prediction.peak_force * np.sin(np.pi * tau) ** 1.5
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(t * 1e6, np.abs(record.force), label="simulated")
        ax.plot(t * 1e6, hr, "--", label="corrected Hunter-Reed")
        ax.set_xlabel(r"t [$\mu$s]")
        ax.set_ylabel("contact force [N]")
        ax.legend()
        return _save(fig, path)


def plot_efficacy(curve, optimum, path, reference=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        mx = curve.is_max_branch
        ax.plot(curve.clearance[mx], curve.amplitude[mx], "k-", label="semi-analytical (max)")
        ax.plot(curve.clearance[~mx], curve.amplitude[~mx], "k:", label="semi-analytical (min)")
        ax.plot([optimum.clearance], [optimum.amplitude], "rs", label="predicted optimum")
        if reference is not None:
            smr = reference.strongly_modulated
            ax.plot(reference.clearance[~smr], reference.mean_amplitude[~smr], "b.",
                    label="reference, periodic")
            ax.plot(reference.clearance[smr], reference.mean_amplitude[smr], "bo", mfc="none",
                    label="reference, SMR")
        ax.set_xlabel(r"$g/(\varphi_c a_{\mathrm{res,no}})$")
        ax.set_ylabel(r"$a_{\mathrm{res}}/a_{\mathrm{res,no}}$")
        ax.set_ylim(bottom=0)
        ax.legend()
        return _save(fig, path)


def plot_frequency_response(branches_by_clearance, path, sweeps=None):
    """``branches_by_clearance``: {clearance: [ResponseBranch, ...]};
    ``sweeps``: optional {clearance: SweepResult} with amplitudes normalized."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for i, (gn, branches) in enumerate(branches_by_clearance.items()):
            c = colors[i % len(colors)]
            for j, b in enumerate(branches):
                ax.plot(b.eta, b.amplitude, "--" if b.is_isola else "-", color=c,
                        label=f"g = {gn:.3g}" if j == 0 else None)
            if sweeps and gn in sweeps:
                etas, amps = sweeps[gn]
                ax.plot(etas, amps, "o", color=c, ms=3)
        ax.set_xlabel(r"$\eta = \Omega/\omega_1$")
        ax.set_ylabel(r"$a/a_{\mathrm{res,no}}$")
        ax.legend()
        return _save(fig, path)


def plot_sweeps(sweeps, a_no, path):
    """Reference mean and max amplitude vs eta for each clearance."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for gn, s in sweeps.items():
            line, = ax.plot(s.etas, s.mean_amplitudes / a_no, "-o", ms=3, label=f"g = {gn:.3g}")
            mx = np.array([m.max_amplitude for m in s.metrics]) / a_no
            ax.plot(s.etas, mx, ":", color=line.get_color())
        ax.set_xlabel(r"$\eta$")
        ax.set_ylabel(r"$a/a_{\mathrm{res,no}}$ (mean solid, max dotted)")
        ax.legend()
        return _save(fig, path)


def plot_regimes(scan, predicted_phase, path):
    """Impacts per period, contact phase and restitution along the clearance scan."""
    with plt.rc_context(STYLE):
        fig, axs = plt.subplots(3, 1, figsize=(5, 6), sharex=True)
        smr = scan.strongly_modulated
        for ax, y, lab in zip(axs, (scan.impacts_per_period, scan.contact_phase, scan.mean_cor),
                              ("impacts / period", r"$\bar\psi$ [rad]", r"$\bar r$")):
            ax.plot(scan.clearance[~smr], y[~smr], "b.-")
            ax.plot(scan.clearance[smr], y[smr], "bo", mfc="none")
            ax.set_ylabel(lab)
        axs[0].axhline(2.0, color="k", lw=0.8)
        axs[1].plot(scan.clearance, predicted_phase, "k--", lw=0.8)
        axs[-1].set_xlabel(r"$g/(\varphi_c a_{\mathrm{res,no}})$")
        return _save(fig, path)

"""Matplotlib figure rendering for CLI runs.

Figures are written to files next to the delimited output; nothing here
opens a window (the Agg backend is forced on import).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .solver import SimulationResult


def render_field_map(result: SimulationResult, path, display_span: float | None = None):
    """Amplitude maps |A_s|, |A_r| versus local time and distance."""
    sc = result.scenario
    t = sc.grid.time.times()
    z = result.z_slices
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0), sharey=True)
    for ax, field, label in ((axes[0], result.s_map, "|A_s|"),
                             (axes[1], result.r_map, "|A_r|")):
        pcm = ax.pcolormesh(t, z, np.abs(field), shading="nearest", cmap="magma")
        ax.set_xlabel("local time t")
        ax.set_title(label)
        fig.colorbar(pcm, ax=ax)
        if display_span:
            ax.set_xlim(-display_span / 2, display_span / 2)
    axes[0].set_ylabel("distance z")
    axes[0].invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_reversal(result: SimulationResult, path, display_span: float | None = None):
    """Input versus outputs, plus the converted pulse flipped back onto the input."""
    sc = result.scenario
    t = sc.grid.time.times()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)

    ax1.plot(t, np.abs(sc.s_in.samples), label="|A_s| in (z=0)", color="tab:red")
    ax1.plot(t, np.abs(result.s_out.samples), label="|A_s| out (z=L)",
             color="tab:red", ls="--")
    ax1.plot(t, np.abs(result.r_out.samples), label="|A_r| out (z=L)",
             color="tab:blue")
    ax1.set_ylabel("amplitude")
    ax1.legend(loc="upper right", fontsize=8)

    # flip the converted output about the collision axis, undo magnification
    # and walk-off, and overlay on the input for a visual reversal check
    flipped = _flip_converted(result)
    bright = np.abs(sc.s_in.samples) > 0.1 * np.abs(sc.s_in.samples).max()
    ax2.plot(t, np.abs(sc.s_in.samples), color="tab:red", label="|input|")
    ax2.plot(t, np.abs(flipped), color="tab:blue", ls="--", label="|converted, flipped back|")
    if np.any(np.abs(np.angle(sc.s_in.samples[bright])) > 1e-6):
        axp = ax2.twinx()
        axp.plot(t[bright], np.angle(sc.s_in.samples[bright]) / np.pi, ".",
                 ms=2, color="tab:red", alpha=0.4)
        axp.plot(t[bright], np.angle(flipped[bright] * np.exp(-0.5j * np.pi)) / np.pi,
                 ".", ms=2, color="tab:blue", alpha=0.4)
        axp.set_ylabel("phase / pi")
    ax2.set_xlabel("local time t")
    ax2.set_ylabel("amplitude")
    ax2.legend(loc="upper right", fontsize=8)
    if display_span:
        center = float(t[np.argmax(np.abs(sc.s_in.samples))])
        ax2.set_xlim(center - display_span / 2, center + display_span / 2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _flip_converted(result: SimulationResult) -> np.ndarray:
    from .analytic import conversion_coeffs, pump_area
    from .envelope import resample

    sc = result.scenario
    coeffs = conversion_coeffs(sc.params, abs(pump_area(sc.pump)))
    delay = result.metrics.get("collision_delay", 0.0)
    a = sc.pump.center
    t = sc.grid.time.times()
    # r_out(u) ~ s-shape(a + (a - (u - delay) - t_r)/M); evaluate at the
    # forward image of each input time to flip the replica back
    fetch = a + delay - coeffs.t_r + coeffs.magnification * (a - t)
    vals = resample(result.r_out, fetch)
    return vals * np.sqrt(coeffs.magnification)


def render_parity(pulse_t, input_mag, red_mag, blue_mag, red_prob, blue_prob, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(pulse_t, input_mag, color="k", label="|input|")
    ax.plot(pulse_t, red_mag, color="tab:red",
            label=f"|red out| (p = {red_prob:.4f})")
    ax.plot(pulse_t, blue_mag, color="tab:blue",
            label=f"|blue out| (p = {blue_prob:.4f})")
    ax.set_xlabel("local time t")
    ax.set_ylabel("amplitude")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_spectra(nu_in, mag_in, nu_out, mag_out, nu_mirror, mag_mirror, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(nu_in, mag_in, color="tab:red", label="|input spectrum|")
    ax.plot(nu_out, mag_out, color="tab:blue", label="|converted spectrum|")
    ax.plot(nu_mirror, mag_mirror, color="k", ls=":", label="|mirrored input|")
    ax.set_xlabel("baseband angular frequency")
    ax.set_ylabel("spectral amplitude")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_design_sweep(points, path):
    """Poling period and walk-off limits over the pump sweep."""
    lp = [p.lambda_p_nm for p in points]
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6))
    if any(p.poling_period_um is not None for p in points):
        axes[0].plot(lp, [p.poling_period_um for p in points], "o-", ms=3)
        axes[0].set_ylabel("poling period (um)")
    axr = axes[0].twinx()
    axr.plot(lp, [p.lambda_r_nm for p in points], "s--", ms=3, color="tab:green")
    axr.set_ylabel("idler wavelength (nm)", color="tab:green")
    axes[1].plot(lp, [p.t_max_s_ps for p in points], label="T_max signal")
    axes[1].plot(lp, [p.t_max_r_ps for p in points], label="T_max idler")
    axes[1].set_ylabel("max reversible duration (ps)")
    axes[1].legend(fontsize=8)
    axes[2].plot(lp, [p.magnification for p in points])
    axes[2].set_ylabel("temporal magnification M")
    for ax in axes:
        ax.set_xlabel("pump wavelength (nm)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

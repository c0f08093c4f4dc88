"""First-order (low-conversion) spectral theory of the conversion process.

In the long-medium limit the phase-matching ridge acts like a delta
function pinning the output detuning to m times the input detuning, with
m = sigma_s / sigma_r the spectral magnification.  Negative m mirrors the
spectrum; the pump spectrum multiplies in as a filter evaluated at
(m - 1) times the input detuning.  Everything here treats the pump as a
c-number spectrum (its coherent amplitude); it never appears as an
operator, so conversion probabilities factor out into one lumped
coupling constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import ConditionEntry, ConditionReport
from .envelope import SpectralAmplitude, resample_spectrum

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TransferSetup:
    """Slowness offsets, medium length, pump spectrum, lumped coupling."""

    sigma_s: float
    sigma_r: float
    length: float
    pump_spectrum: SpectralAmplitude
    coupling: float = 1.0

    def __post_init__(self):
        if self.sigma_r == 0.0:
            raise ValueError("sigma_r must be nonzero")
        if self.length <= 0:
            raise ValueError("length must be positive")
        norm = self.pump_spectrum.norm_sq()
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(
                f"pump spectrum must be square-normalized to 1, got {norm:.6g}")

    @property
    def m(self) -> float:
        return self.sigma_s / self.sigma_r


def phase_mismatch(nu, nu_prime, setup: TransferSetup):
    """Residual wavenumber mismatch sigma_s*nu - sigma_r*nu_prime.

    Vanishes along the ridge nu_prime = m*nu, where conversion is
    phase matched for an arbitrarily long medium.
    """
    return setup.sigma_s * np.asarray(nu) - setup.sigma_r * np.asarray(nu_prime)


def phase_matching_function(nu, nu_prime, setup: TransferSetup):
    """Closed form L*sinc(mismatch*L/2) of the finite-length overlap integral."""
    x = phase_mismatch(nu, nu_prime, setup) * setup.length / 2.0
    return setup.length * np.sinc(x / np.pi)


def first_order_output(signal_spectrum: SpectralAmplitude,
                       setup: TransferSetup) -> SpectralAmplitude:
    """Normalized converted spectral amplitude in the delta-matched limit.

    The output at detuning mu (from the converted band center) is
    proportional to pump((m-1)/m * mu) * signal(mu/m), sampled on the
    |m|-scaled image of the signal grid and square-normalized to one.
    Raises if the pump grid cannot cover the (m-1)-scaled signal support.
    """
    m = setup.m
    sig = signal_spectrum
    nu = sig.frequencies()
    if m < 0:
        mu = (m * nu)[::-1]
        sig_vals = sig.samples[::-1]
    else:
        mu = m * nu
        sig_vals = sig.samples
    pump_detuning = (m - 1.0) / m * mu

    _check_pump_coverage(sig_vals, pump_detuning, setup.pump_spectrum)
    pump_vals = resample_spectrum(setup.pump_spectrum, pump_detuning)
    out = SpectralAmplitude(nu_start=float(mu[0]), d_nu=float(mu[1] - mu[0]),
                            samples=pump_vals * sig_vals)
    return out.normalized()


def _check_pump_coverage(sig_vals: np.ndarray, pump_detuning: np.ndarray,
                         pump: SpectralAmplitude, tol: float = 1e-6):
    mag = np.abs(sig_vals)
    peak = mag.max()
    if peak == 0.0:
        raise ValueError("signal spectrum is identically zero")
    needed = pump_detuning[mag > tol * peak]
    if needed.min() < pump.nu_start or needed.max() > pump.nu_end:
        raise ValueError(
            f"pump grid [{pump.nu_start:.4g}, {pump.nu_end:.4g}] too narrow to "
            f"cover the scaled signal band [{needed.min():.4g}, {needed.max():.4g}]")


def mirror_overlap(output: SpectralAmplitude,
                   signal_spectrum: SpectralAmplitude) -> float:
    """Normalized overlap magnitude of the output with the exact mirror.

    The mirrored input spectrum is evaluated on the output grid by trig
    interpolation, so the two spectra need not share grid points.
    """
    mirror = resample_spectrum(signal_spectrum, -output.frequencies())
    norm_out = output.norm_sq()
    norm_mirror = output.d_nu / _TWO_PI * np.sum(np.abs(mirror) ** 2)
    if norm_out == 0.0 or norm_mirror == 0.0:
        return 0.0
    inner = output.d_nu / _TWO_PI * np.sum(np.conj(output.samples) * mirror)
    return float(abs(inner) / np.sqrt(norm_out * norm_mirror))


def delta_limit_check(setup: TransferSetup, bandwidths: dict,
                      beta_p_prime: float = 1.0,
                      factor: float = 10.0) -> ConditionReport:
    """How well the finite-length ridge approximates a delta function.

    Compares each band's spectral 1/e half-width against the ridge width
    2*pi/(|sigma| L); ratios at or above `factor` pass.
    """
    B_p, B_s, B_r = bandwidths["B_p"], bandwidths["B_s"], bandwidths["B_r"]
    L = setup.length
    entries = [
        ConditionEntry("delta_s", "2*pi/(|sigma_s| L) << B_s",
                       B_s * abs(setup.sigma_s) * L / _TWO_PI,
                       B_s * abs(setup.sigma_s) * L / _TWO_PI >= factor),
        ConditionEntry("delta_r", "2*pi/(|sigma_r| L) << B_r",
                       B_r * abs(setup.sigma_r) * L / _TWO_PI,
                       B_r * abs(setup.sigma_r) * L / _TWO_PI >= factor),
        ConditionEntry("delta_p", "2*pi/(beta_p' L) << B_p",
                       B_p * beta_p_prime * L / _TWO_PI,
                       B_p * beta_p_prime * L / _TWO_PI >= factor),
    ]
    return ConditionReport(entries=tuple(entries), factor=factor)

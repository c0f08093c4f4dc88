"""Canonical test pulse shapes.

Widths follow the package convention (1/e amplitude half-width).  A chirp
rate b adds the phase factor exp(i b (t - center)^2).
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import hermite
from scipy.special import log_expit

from .envelope import ComplexEnvelope, TimeGrid


def gaussian(grid: TimeGrid, center: float = 0.0, width: float = 1.0,
             amplitude: float = 1.0, chirp_rate: float = 0.0) -> ComplexEnvelope:
    """amplitude * exp(-((t-c)/w)^2) with optional quadratic phase."""
    x = grid.times() - center
    samples = amplitude * np.exp(-((x / width) ** 2)).astype(np.complex128)
    if chirp_rate != 0.0:
        samples = samples * np.exp(1j * chirp_rate * x ** 2)
    return ComplexEnvelope(grid, samples)


def hermite_gauss(grid: TimeGrid, order: int, center: float = 0.0,
                  width: float = 1.0) -> ComplexEnvelope:
    """Orthonormal Hermite-Gauss mode; order 0 is the unit-norm gaussian."""
    x = (grid.times() - center) * np.sqrt(2.0) / width
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    vals = hermite.hermval(x, coef) * np.exp(-0.5 * x ** 2)
    norm = np.sqrt(2.0 ** order * math.factorial(order)
                   * width * np.sqrt(np.pi / 2.0))
    return ComplexEnvelope(grid, vals / norm)


def asymmetric_zero_crossing(grid: TimeGrid, center: float = 0.0,
                             zero_offset: float = 0.5, width: float = 1.0,
                             chirp_rate: float = 0.0) -> ComplexEnvelope:
    """Asymmetric nongaussian pulse (t - t0) exp(-((t-t1)/w)^2), unit norm.

    The amplitude touches zero and changes sign at t = center + zero_offset.
    """
    t = grid.times()
    samples = ((t - center - zero_offset)
               * np.exp(-(((t - center) / width) ** 2))).astype(np.complex128)
    if chirp_rate != 0.0:
        samples = samples * np.exp(1j * chirp_rate * (t - center) ** 2)
    return ComplexEnvelope(grid, samples).normalized()


def smoothed_exponential(grid: TimeGrid, start: float = 0.0, decay: float = 1.0,
                         rise_fraction: float = 0.05) -> ComplexEnvelope:
    """Decaying exponential with a logistic turn-on, unit norm.

    f(t) = exp(-(t-start)/decay) * logistic((t-start)/(decay*rise_fraction));
    the default rise time is decay/20.
    """
    if not 0 < rise_fraction < 1:
        raise ValueError("rise_fraction must lie in (0, 1)")
    x = grid.times() - start
    logf = -x / decay + log_expit(x / (decay * rise_fraction))
    return ComplexEnvelope(grid, np.exp(logf).astype(np.complex128)).normalized()

"""Quantum layer over one matched temporal-mode pair.

A full collision couples each input mode pair (original envelope in the s
band, its reversed and rescaled partner in the r band) through a beam
splitter with constant coefficients tau, rho, identical for every pair.
This module transforms joint states of one such pair (Fock coefficients
up to a cutoff, or a coherent-amplitude pair), predicts the two-color
Hong-Ou-Mandel coincidence, and models the two-stage parity sorter.

The conversion phase convention is +i on the converted amplitude; with a
zero interstage phase the sorter sends even-parity envelopes to the
converted ("blue") band and odd-parity envelopes to the original ("red")
band.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .envelope import ComplexEnvelope, parity_decompose

_COEFF_TOL = 1e-12


class CutoffOverflowError(ValueError):
    """State support requires Fock indices beyond the stored cutoff."""


def _check_splitter(tau: float, rho: float):
    if abs(tau ** 2 + rho ** 2 - 1.0) > _COEFF_TOL:
        raise ValueError(f"tau^2 + rho^2 = {tau**2 + rho**2!r} is not 1")


@dataclass(frozen=True)
class TwoModeState:
    """Joint state of one matched mode pair.

    Fock representation: coeffs[n, k] multiplies |n>_s |k>_r, with n, k up
    to the cutoff; coherent representation: a pair of complex amplitudes.
    """

    representation: str
    coeffs: np.ndarray | None = None
    alpha: complex = 0.0
    beta: complex = 0.0

    def __post_init__(self):
        if self.representation not in ("fock", "coherent"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.representation == "fock":
            arr = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError("Fock coefficients must form a square matrix")
            norm = np.sum(np.abs(arr) ** 2)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"Fock state norm {norm!r} differs from 1")
            arr.setflags(write=False)
            object.__setattr__(self, "coeffs", arr)

    @classmethod
    def fock(cls, n: int, k: int, cutoff: int = 4) -> "TwoModeState":
        """Number state |n>_s |k>_r."""
        if max(n, k) > cutoff:
            raise CutoffOverflowError(f"|{n},{k}> exceeds cutoff {cutoff}")
        coeffs = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
        coeffs[n, k] = 1.0
        return cls(representation="fock", coeffs=coeffs)

    @classmethod
    def coherent(cls, alpha: complex, beta: complex) -> "TwoModeState":
        return cls(representation="coherent", coeffs=None,
                   alpha=complex(alpha), beta=complex(beta))

    @property
    def cutoff(self) -> int:
        if self.representation != "fock":
            raise ValueError("cutoff only defined for the Fock representation")
        return self.coeffs.shape[0] - 1

    def photon_number(self) -> float:
        """Total photon number expectation."""
        if self.representation == "coherent":
            return abs(self.alpha) ** 2 + abs(self.beta) ** 2
        n = np.arange(self.coeffs.shape[0])
        w = np.abs(self.coeffs) ** 2
        return float((w * (n[:, None] + n[None, :])).sum())

    def to_json(self) -> str:
        if self.representation == "coherent":
            payload = {"representation": "coherent",
                       "alpha": [self.alpha.real, self.alpha.imag],
                       "beta": [self.beta.real, self.beta.imag]}
        else:
            entries = [
                {"n": int(n), "k": int(k),
                 "re": self.coeffs[n, k].real, "im": self.coeffs[n, k].imag}
                for n, k in zip(*np.nonzero(np.abs(self.coeffs) > 0))
            ]
            payload = {"representation": "fock", "cutoff": self.cutoff,
                       "modes": ["s: original envelope",
                                 "r: reversed/rescaled partner"],
                       "coefficients": entries}
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TwoModeState":
        payload = json.loads(text)
        if payload["representation"] == "coherent":
            return cls.coherent(complex(*payload["alpha"]), complex(*payload["beta"]))
        cutoff = payload["cutoff"]
        coeffs = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
        for entry in payload["coefficients"]:
            coeffs[entry["n"], entry["k"]] = entry["re"] + 1j * entry["im"]
        return cls(representation="fock", coeffs=coeffs)


def beam_splitter_fock(state: TwoModeState, tau: float, rho: float) -> TwoModeState:
    """Two-mode unitary induced by the mode map (creation operators):

        a_s+ -> tau a_s+ + i rho a_r+,   a_r+ -> tau a_r+ + i rho a_s+

    Total photon number is conserved block by block; each block of total
    number T rotates under the exact exponential exp(i theta K) with
    K = a_s+ a_r + a_r+ a_s and theta = atan2(rho, tau).
    """
    if state.representation != "fock":
        raise ValueError("beam_splitter_fock needs the Fock representation")
    _check_splitter(tau, rho)
    cutoff = state.cutoff
    occupied = np.abs(state.coeffs) > 0.0
    totals = sorted({int(n + k) for n, k in zip(*np.nonzero(occupied))})
    if totals and totals[-1] > cutoff:
        raise CutoffOverflowError(
            f"state occupies total photon number {totals[-1]} > cutoff {cutoff}; "
            "the rotated block would leave the stored coefficients")
    theta = math.atan2(rho, tau)
    out = np.array(state.coeffs, dtype=np.complex128)
    for total in totals:
        idx_n = np.arange(total + 1)
        block = state.coeffs[idx_n, total - idx_n]
        rotated = _block_unitary(total, theta) @ block
        out[idx_n, total - idx_n] = rotated
    return TwoModeState(representation="fock", coeffs=out)


def _block_unitary(total: int, theta: float) -> np.ndarray:
    """exp(i theta K) restricted to the total-photon-number block."""
    dim = total + 1
    k_mat = np.zeros((dim, dim))
    for n in range(dim - 1):
        # <n+1, T-n-1| K |n, T-n> = sqrt((n+1)(T-n))
        k_mat[n + 1, n] = k_mat[n, n + 1] = math.sqrt((n + 1) * (total - n))
    return expm(1j * theta * k_mat)


def beam_splitter_coherent(alpha: complex, beta: complex,
                           tau: float, rho: float) -> tuple:
    """Coherent amplitudes map directly: (tau a + i rho b, tau b + i rho a)."""
    _check_splitter(tau, rho)
    return (tau * alpha + 1j * rho * beta, tau * beta + 1j * rho * alpha)


def hom_coincidence(tau: float, rho: float) -> float:
    """Probability both outputs hold one photon for a |1,1> input.

    The two single-photon amplitudes interfere; the coincidence amplitude
    is tau^2 - rho^2, vanishing at the balanced point.
    """
    _check_splitter(tau, rho)
    return (tau ** 2 - rho ** 2) ** 2


# ---------------------------------------------------------------------------
# Two-stage parity sorter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SorterOutput:
    red_envelope: ComplexEnvelope
    blue_envelope: ComplexEnvelope
    red_prob: float
    blue_prob: float


def sorter_matrix(tau: float, rho: float, interstage_phase: float = 0.0) -> np.ndarray:
    """Composite two-stage map in the (even, odd) input basis.

    Rows are (red, blue) output amplitudes.  A parity-p component picks up
    the factor p exactly once on the converted path, giving

        red_p  = tau^2 - rho^2 p e^{i phi}
        blue_p = i tau rho (1 + p e^{i phi})

    which is an isometry for every phi: |red_p|^2 + |blue_p|^2 = 1.
    """
    ph = np.exp(1j * interstage_phase)
    return np.array([
        [tau ** 2 - rho ** 2 * ph, tau ** 2 + rho ** 2 * ph],
        [1j * tau * rho * (1.0 + ph), 1j * tau * rho * (1.0 - ph)],
    ])


def parity_sorter(pulse: ComplexEnvelope, tau: float, rho: float,
                  interstage_phase: float = 0.0, axis: float = 0.0) -> SorterOutput:
    """Route a pulse through the two-stage sorter.

    At the balanced point (tau = rho = 1/sqrt(2)) and zero interstage
    phase, the even part of the input about the collision axis exits
    entirely in the converted (blue) band and the odd part entirely in
    the original (red) band.
    """
    _check_splitter(tau, rho)
    even, odd = parity_decompose(pulse, axis)
    mat = sorter_matrix(tau, rho, interstage_phase)
    red = pulse.with_samples(mat[0, 0] * even.samples + mat[0, 1] * odd.samples)
    blue = pulse.with_samples(mat[1, 0] * even.samples + mat[1, 1] * odd.samples)
    total = pulse.norm_sq()
    if total == 0.0:
        raise ValueError("cannot sort the zero envelope")
    return SorterOutput(red_envelope=red, blue_envelope=blue,
                        red_prob=red.norm_sq() / total,
                        blue_prob=blue.norm_sq() / total)

"""Complex pulse envelopes sampled on uniform time grids.

Conventions used throughout the package:

* Time is dimensionless (an arbitrary unit tau0). Grids are uniform with
  samples t_j = t_start + j*dt, j = 0..n-1.
* "Width" or "duration" of a pulse always means the 1/e amplitude
  half-width unless a function name says otherwise (duration_rms).
* The spectral transform pair is

      Phi(nu) = integral dt  exp(+i nu t)   phi(t)
      phi(t)  = integral dnu exp(-i nu t)   Phi(nu) / (2 pi)

  so a time shift by D multiplies the spectrum by exp(+i nu D), and
  Parseval reads  integral |phi|^2 dt = integral |Phi|^2 dnu / (2 pi).
* Spectral (trigonometric) interpolation treats the field as periodic on
  the grid span; pulses are expected to decay below ~1e-6 of their peak
  at the grid edges.  check_edge_decay() warns when that fails.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to use from multiple threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

EDGE_DECAY = 1e-6
_SUPPORT_TOL = 1e-6


class GridMismatchError(ValueError):
    """Two envelopes were combined that do not share a grid."""


class SupportOverflowError(ValueError):
    """An operation would move significant amplitude off the grid."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform local-time axis: n samples starting at t_start, step dt."""

    t_start: float
    dt: float
    n: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n < 2:
            raise ValueError(f"need at least 2 samples, got {self.n}")

    @classmethod
    def centered(cls, span: float, n: int) -> "TimeGrid":
        """Grid covering [-span/2, span/2) with n samples."""
        return cls(t_start=-span / 2.0, dt=span / n, n=n)

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @property
    def span(self) -> float:
        """Periodic cell length n*dt (one step past the last sample)."""
        return self.n * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n - 1) * self.dt

    def angular_frequencies(self) -> np.ndarray:
        """Baseband angular frequencies in FFT (unshifted) order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dt)

    def contains(self, t) -> np.ndarray:
        t = np.asarray(t)
        return (t >= self.t_start) & (t < self.t_start + self.span)


@dataclass(frozen=True)
class ComplexEnvelope:
    """Complex field samples (units of square-root photon flux) on a grid."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if arr.shape != (self.grid.n,):
            raise ValueError(
                f"sample count {arr.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("envelope samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def with_samples(self, samples) -> "ComplexEnvelope":
        return ComplexEnvelope(self.grid, samples)

    def norm_sq(self) -> float:
        """Squared L2 norm, rectangle quadrature dt * sum |f|^2."""
        return float(self.grid.dt * np.sum(np.abs(self.samples) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def normalized(self) -> "ComplexEnvelope":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero envelope")
        return self.with_samples(self.samples / nrm)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "ComplexEnvelope":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128))


@dataclass(frozen=True)
class SpectralAmplitude:
    """Baseband spectral amplitude on a uniform angular-frequency grid."""

    nu_start: float
    d_nu: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def frequencies(self) -> np.ndarray:
        return self.nu_start + self.d_nu * np.arange(self.n)

    @property
    def nu_end(self) -> float:
        return self.nu_start + (self.n - 1) * self.d_nu

    def norm_sq(self) -> float:
        """Squared norm with the dnu/(2 pi) measure (Parseval partner)."""
        return float(self.d_nu / (2.0 * np.pi) * np.sum(np.abs(self.samples) ** 2))

    def normalized(self) -> "SpectralAmplitude":
        nrm = np.sqrt(self.norm_sq())
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero spectrum")
        return SpectralAmplitude(self.nu_start, self.d_nu, self.samples / nrm)


# ---------------------------------------------------------------------------
# Spectral transform pair
# ---------------------------------------------------------------------------

def spectral_transform(e: ComplexEnvelope) -> SpectralAmplitude:
    """Unitary (Parseval-exact) transform of an envelope to its spectrum."""
    g = e.grid
    nu_unshifted = g.angular_frequencies()
    # dt * sum_j f_j exp(+i nu_k t_j) = n*dt*ifft(f) up to the t_start phase
    raw = g.n * g.dt * np.fft.ifft(e.samples)
    raw = raw * np.exp(1j * nu_unshifted * g.t_start)
    samples = np.fft.fftshift(raw)
    nu = np.fft.fftshift(nu_unshifted)
    return SpectralAmplitude(nu_start=float(nu[0]), d_nu=float(nu[1] - nu[0]),
                             samples=samples)


def inverse_spectral_transform(sa: SpectralAmplitude, grid: TimeGrid) -> ComplexEnvelope:
    """Inverse transform onto a compatible time grid (dt = 2 pi / (n dnu))."""
    n = sa.n
    if grid.n != n:
        raise GridMismatchError(f"grid n={grid.n} does not match spectrum n={n}")
    dt_expected = 2.0 * np.pi / (n * sa.d_nu)
    if not np.isclose(grid.dt, dt_expected, rtol=1e-12, atol=0.0):
        raise GridMismatchError(
            f"grid dt={grid.dt} inconsistent with spectral step (expected {dt_expected})"
        )
    nu = sa.frequencies()
    g = np.fft.ifftshift(sa.samples * np.exp(-1j * nu * grid.t_start))
    samples = sa.d_nu / (2.0 * np.pi) * np.fft.fft(g)
    return ComplexEnvelope(grid, samples)


# ---------------------------------------------------------------------------
# Band-limited resampling
# ---------------------------------------------------------------------------

def _trig_resample(samples: np.ndarray, x_start: float, dx: float,
                   x_new: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at x_new.

    Exact for band-limited data; the interpolant is periodic with period
    n*dx, so callers must mask points outside the cell themselves.
    """
    n = samples.shape[0]
    coef = np.fft.fft(samples) / n
    k = np.fft.fftfreq(n) * n  # signed integer harmonics, Nyquist at -n/2
    out = np.empty(x_new.shape[0], dtype=np.complex128)
    frac = (np.asarray(x_new, dtype=float) - x_start) / dx
    for lo in range(0, x_new.shape[0], chunk):
        hi = min(lo + chunk, x_new.shape[0])
        phase = np.exp(2j * np.pi / n * np.outer(frac[lo:hi], k))
        out[lo:hi] = phase @ coef
    return out


def resample(e: ComplexEnvelope, times: np.ndarray, interp: str = "spectral") -> np.ndarray:
    """Sample the envelope at arbitrary times.

    interp='spectral' uses exact trigonometric interpolation (cost n*m,
    with an exact index-gather fast path when the requested times all sit
    on grid points), interp='linear' uses piecewise-linear interpolation.
    Points outside the grid cell evaluate to zero.
    """
    times = np.asarray(times, dtype=float)
    gathered = _gather_if_aligned(e, times)
    if gathered is not None:
        return gathered
    inside = e.grid.contains(times)
    out = np.zeros(times.shape[0], dtype=np.complex128)
    if not np.any(inside):
        return out
    if interp == "spectral":
        out[inside] = _trig_resample(e.samples, e.grid.t_start, e.grid.dt, times[inside])
    elif interp == "linear":
        t = e.grid.times()
        out[inside] = (np.interp(times[inside], t, e.samples.real)
                       + 1j * np.interp(times[inside], t, e.samples.imag))
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    return out


def resample_spectrum(sa: SpectralAmplitude, nus: np.ndarray) -> np.ndarray:
    """Trig interpolation of a spectrum at arbitrary baseband frequencies.

    Valid because the DFT spectrum of a grid-sampled envelope is periodic
    with period n*dnu; points outside the spectral cell evaluate to zero.
    """
    nus = np.asarray(nus, dtype=float)
    out = np.zeros(nus.shape[0], dtype=np.complex128)
    inside = (nus >= sa.nu_start) & (nus < sa.nu_start + sa.n * sa.d_nu)
    if np.any(inside):
        out[inside] = _trig_resample(sa.samples, sa.nu_start, sa.d_nu, nus[inside])
    return out


def _gather_if_aligned(e: ComplexEnvelope, times: np.ndarray, tol: float = 1e-9):
    """Exact sample gather when every requested time is a grid point."""
    g = e.grid
    frac = (times - g.t_start) / g.dt
    idx = np.round(frac)
    if not np.all(np.abs(frac - idx) < tol):
        return None
    idx = idx.astype(np.int64)
    out = np.zeros(times.shape[0], dtype=np.complex128)
    valid = (idx >= 0) & (idx < g.n)
    out[valid] = e.samples[idx[valid]]
    return out


def _support_interval(e: ComplexEnvelope, tol: float = _SUPPORT_TOL):
    """(t_lo, t_hi) bracketing samples above tol * peak, or None if empty."""
    mag = np.abs(e.samples)
    peak = mag.max()
    if peak == 0.0:
        return None
    idx = np.nonzero(mag > tol * peak)[0]
    t = e.grid.times()
    return float(t[idx[0]]), float(t[idx[-1]])


def _check_image_inside(e: ComplexEnvelope, image, what: str):
    if image is None:
        return
    lo, hi = image
    g = e.grid
    if lo < g.t_start - 0.5 * g.dt or hi > g.t_end + 0.5 * g.dt:
        raise SupportOverflowError(
            f"{what} spans [{lo:.6g}, {hi:.6g}] which exceeds the grid "
            f"[{g.t_start:.6g}, {g.t_end:.6g}]"
        )


# ---------------------------------------------------------------------------
# Envelope operations
# ---------------------------------------------------------------------------

def envelope_reverse(e: ComplexEnvelope, axis: float,
                     interp: str = "spectral") -> ComplexEnvelope:
    """Reverse the envelope about a time axis: output(t) = input(2*axis - t).

    The reversal is the linear, unitary map on the slowly varying envelope;
    it does not conjugate anything.  When the reflected axis is grid aligned
    (2*(axis - t_start)/dt is an integer) the result is an exact index
    permutation; otherwise band-limited interpolation is used.
    """
    g = e.grid
    if not (g.t_start <= axis <= g.t_end):
        raise ValueError(f"axis {axis} lies outside the grid span")
    supp = _support_interval(e)
    if supp is not None:
        lo, hi = supp
        _check_image_inside(e, (2 * axis - hi, 2 * axis - lo), "reflected support")

    m2 = 2.0 * (axis - g.t_start) / g.dt
    m2_int = round(m2)
    if abs(m2 - m2_int) < 1e-9:
        j = np.arange(g.n)
        out = e.samples[(m2_int - j) % g.n]
        return e.with_samples(out)

    if interp == "spectral":
        # g(nu) = exp(2 i a nu) f(-nu), on the unshifted FFT grid
        nu = g.angular_frequencies()
        spec = g.n * g.dt * np.fft.ifft(e.samples) * np.exp(1j * nu * g.t_start)
        k = np.arange(g.n)
        flipped = spec[(-k) % g.n] * np.exp(2j * axis * nu)
        samples = np.fft.fft(flipped * np.exp(-1j * nu * g.t_start)) / (g.n * g.dt)
        return e.with_samples(samples)
    out = resample(e, 2.0 * axis - g.times(), interp=interp)
    return e.with_samples(out)


def rescale_time(e: ComplexEnvelope, magnification: float, axis: float,
                 interp: str = "spectral") -> ComplexEnvelope:
    """Stretch (M>1) or compress (M<1) about an axis, preserving the norm.

    output(t) = M**-0.5 * input(axis + (t - axis)/M)
    """
    if magnification <= 0:
        raise ValueError(f"magnification must be positive, got {magnification}")
    g = e.grid
    supp = _support_interval(e)
    if supp is not None:
        lo, hi = supp
        _check_image_inside(
            e,
            (axis + magnification * (lo - axis), axis + magnification * (hi - axis)),
            "rescaled support",
        )
    if magnification == 1.0:
        return e
    fetch = axis + (g.times() - axis) / magnification
    out = resample(e, fetch, interp=interp) / np.sqrt(magnification)
    return e.with_samples(out)


def overlap(a: ComplexEnvelope, b: ComplexEnvelope) -> complex:
    """Inner product integral conj(a(t)) b(t) dt on a shared grid."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    return complex(a.grid.dt * np.sum(np.conj(a.samples) * b.samples))


def fidelity(a: ComplexEnvelope, b: ComplexEnvelope) -> float:
    """Normalized overlap |<a, b>|^2 / (|a|^2 |b|^2), in [0, 1]."""
    denom = a.norm_sq() * b.norm_sq()
    if denom == 0.0:
        return 0.0
    return abs(overlap(a, b)) ** 2 / denom


def parity_decompose(e: ComplexEnvelope, axis: float):
    """Split into even and odd parts about an axis; even + odd == e exactly."""
    rev = envelope_reverse(e, axis)
    even = e.with_samples(0.5 * (e.samples + rev.samples))
    odd = e.with_samples(0.5 * (e.samples - rev.samples))
    return even, odd


def shift_time(e: ComplexEnvelope, delay: float) -> ComplexEnvelope:
    """Delay by `delay` (exact spectral shift, periodic on the grid cell)."""
    g = e.grid
    steps = delay / g.dt
    if abs(steps - round(steps)) < 1e-9:
        return e.with_samples(np.roll(e.samples, round(steps)))
    nu = g.angular_frequencies()
    spec = np.fft.fft(e.samples) * np.exp(-1j * nu * delay)
    return e.with_samples(np.fft.ifft(spec))


def delay_align(a: ComplexEnvelope, b: ComplexEnvelope) -> float:
    """Delay that best matches b onto a: argmax over d of |<a, shift(b, d)>|.

    Found from the circular cross-correlation peak with parabolic
    sub-sample refinement; used to split a pure arrival-time offset from
    genuine shape mismatch when comparing pulses.
    """
    if a.grid != b.grid:
        raise GridMismatchError("delay_align requires a shared grid")
    n = a.grid.n
    c = np.abs(np.fft.ifft(np.fft.fft(b.samples) * np.conj(np.fft.fft(a.samples))))
    j = int(np.argmax(c))
    cm, c0, cp = c[(j - 1) % n], c[j], c[(j + 1) % n]
    denom = cm - 2.0 * c0 + cp
    frac = 0.5 * (cm - cp) / denom if denom != 0.0 else 0.0
    signed = j - n if j > n // 2 else j
    return -(signed + frac) * a.grid.dt


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def centroid(e: ComplexEnvelope) -> float:
    w = np.abs(e.samples) ** 2
    tot = w.sum()
    if tot == 0.0:
        raise ValueError("centroid of the zero envelope is undefined")
    return float((e.grid.times() * w).sum() / tot)


def duration_rms(e: ComplexEnvelope) -> float:
    """Root-mean-square duration of |f|^2 about its centroid."""
    w = np.abs(e.samples) ** 2
    tot = w.sum()
    if tot == 0.0:
        raise ValueError("duration of the zero envelope is undefined")
    t = e.grid.times()
    mean = (t * w).sum() / tot
    return float(np.sqrt(((t - mean) ** 2 * w).sum() / tot))


def width_1e(e: ComplexEnvelope) -> float:
    """1/e amplitude half-width from the outermost threshold crossings."""
    mag = np.abs(e.samples)
    return 0.5 * _threshold_full_width(e.grid.times(), mag, mag.max() / np.e)


def spectral_width_1e(sa: SpectralAmplitude) -> float:
    """1/e amplitude half-width of a spectral magnitude."""
    mag = np.abs(sa.samples)
    return 0.5 * _threshold_full_width(sa.frequencies(), mag, mag.max() / np.e)


def _threshold_full_width(x: np.ndarray, mag: np.ndarray, level: float) -> float:
    above = np.nonzero(mag >= level)[0]
    if above.size == 0:
        raise ValueError("signal never reaches the threshold level")
    i0, i1 = above[0], above[-1]
    lo = x[i0]
    if i0 > 0:  # linear sub-sample crossing
        f = (level - mag[i0 - 1]) / (mag[i0] - mag[i0 - 1])
        lo = x[i0 - 1] + f * (x[i0] - x[i0 - 1])
    hi = x[i1]
    if i1 < len(x) - 1:
        f = (level - mag[i1 + 1]) / (mag[i1] - mag[i1 + 1])
        hi = x[i1 + 1] - f * (x[i1 + 1] - x[i1])
    return float(hi - lo)


def check_edge_decay(e: ComplexEnvelope, tol: float = EDGE_DECAY,
                     context: str = "envelope") -> bool:
    """Warn (and return False) if the edge samples exceed tol * peak."""
    peak = e.peak()
    if peak == 0.0:
        return True
    edge = max(abs(e.samples[0]), abs(e.samples[-1]))
    if edge > tol * peak:
        warnings.warn(
            f"{context}: edge amplitude {edge:.3g} exceeds {tol:g} of peak "
            f"{peak:.3g}; periodic spectral operations may wrap",
            stacklevel=2,
        )
        return False
    return True


# ---------------------------------------------------------------------------
# CSV serialization (columns t, re, im; header row carries grid parameters)
# ---------------------------------------------------------------------------

def envelope_to_csv(e: ComplexEnvelope, path) -> None:
    g = e.grid
    t = g.times()
    with open(path, "w", newline="") as fh:
        fh.write(f"# t_start={g.t_start!r} dt={g.dt!r} n={g.n}\n")
        fh.write("t,re,im\n")
        for j in range(g.n):
            fh.write(f"{t[j]!r},{e.samples[j].real!r},{e.samples[j].imag!r}\n")


def envelope_from_csv(path) -> ComplexEnvelope:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing grid header row")
        fields = dict(part.split("=") for part in header[1:].split())
        grid = TimeGrid(float(fields["t_start"]), float(fields["dt"]), int(fields["n"]))
        fh.readline()  # column names
        data = np.loadtxt(fh, delimiter=",")
    if data.shape[0] != grid.n:
        raise ValueError(f"{path}: {data.shape[0]} rows but header says n={grid.n}")
    return ComplexEnvelope(grid, data[:, 1] + 1j * data[:, 2])

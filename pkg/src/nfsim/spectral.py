"""Normalized output spectra, peak metrology and spectrogram assembly.

The spectrum is S(w) = |int Omega_out e^{iwt} dt|^2 / max_w |int Omega_in
e^{iwt} dt|^2, evaluated by direct trapezoidal DTFT on an arbitrary
frequency grid.  The record is 1500 ns long so native FFT bins would be
~0.6 gamma wide, far too coarse for sub-gamma line metrology; direct
evaluation has no gridding constraint.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import TruncationWarning


class PeakWindowError(ValueError):
    """No usable peak or half-height crossing inside the window."""


@dataclass(frozen=True)
class SpectrumRecord:
    """S(w) on a frequency grid in units of gamma."""

    omega_over_gamma: np.ndarray
    s_values: np.ndarray
    normalization: float

    def __post_init__(self):
        w = np.asarray(self.omega_over_gamma, dtype=float)
        s = np.asarray(self.s_values, dtype=float)
        if w.shape != s.shape:
            raise ValueError("grid and values must have equal length")
        if not (np.all(np.isfinite(s)) and np.all(s >= 0)):
            raise ValueError("s_values must be finite and >= 0")
        if np.any(np.diff(w) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        w.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "omega_over_gamma", w)
        object.__setattr__(self, "s_values", s)

    def value_at(self, omega_over_gamma):
        idx = int(np.argmin(np.abs(self.omega_over_gamma - omega_over_gamma)))
        return float(self.s_values[idx])


@dataclass(frozen=True)
class PeakReport:
    """Center (w/gamma), height (S) and FWHM (gamma units) of one line."""

    center: float
    height: float
    fwhm: float

    def __post_init__(self):
        if self.height <= 0 or self.fwhm <= 0:
            raise ValueError("height and fwhm must be positive")


@dataclass(frozen=True)
class SpectrogramRecord:
    """S(param, w) matrix with sorted parameter axis."""

    param_values: np.ndarray
    omega_over_gamma: np.ndarray
    matrix: np.ndarray


@njit(cache=True, parallel=True)
def _dtft_kernel(re, im, dt, t_start, omegas):
    n = re.size
    out = np.empty(omegas.size, np.complex128)
    for j in prange(omegas.size):
        w = omegas[j]
        rot = np.exp(1j * w * dt)
        acc = 0.0 + 0.0j
        ph = np.exp(1j * w * t_start)
        for i in range(n):
            if i % 4096 == 0:
                # resync the phase recurrence to keep rounding in check
                ph = np.exp(1j * w * (t_start + i * dt))
            wgt = 0.5 if (i == 0 or i == n - 1) else 1.0
            acc += wgt * (re[i] + 1j * im[i]) * ph
            ph *= rot
        out[j] = acc * dt
    return out


def dtft(field, omega_grid):
    """Trapezoidal quadrature of int Omega(t) e^{iwt} dt at each w (rad/ns)."""
    samples = np.asarray(field.samples)
    peak = np.abs(samples).max()
    if peak > 0 and abs(samples[-1]) > 1e-2 * peak:
        warnings.warn(
            "field has not decayed at the end of the record",
            TruncationWarning,
            stacklevel=2,
        )
    omega_grid = np.ascontiguousarray(omega_grid, dtype=float)
    return _dtft_kernel(
        np.ascontiguousarray(samples.real),
        np.ascontiguousarray(samples.imag),
        field.dt,
        field.t_start,
        omega_grid,
    )


def dtft_via_fft(field, pad_factor=4):
    """FFT-based transform on its native uniform grid, with the same
    trapezoidal end-point weighting.  Returns (omega rad/ns, values);
    used as an algorithmic cross-check of the direct evaluation."""
    samples = np.asarray(field.samples).copy()
    samples[0] *= 0.5
    samples[-1] *= 0.5
    n = samples.size
    n_pad = pad_factor * n
    spec = np.fft.ifft(samples, n=n_pad) * n_pad * field.dt
    omega = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=field.dt)
    if field.t_start != 0.0:
        spec = spec * np.exp(1j * omega * field.t_start)
    order = np.argsort(omega)
    return omega[order], spec[order]


def normalized_spectrum(input_field, output_field, omega_over_gamma, gamma=1.0 / 141.0):
    """S(w) on the requested grid (units of gamma).

    The denominator is the maximum of the input's |transform|^2 over a dense
    scan; for the Gaussian pulse that maximum sits at w = 0 and equals
    pi tau^2, but the scan keeps the definition input-shape agnostic.
    """
    omega_over_gamma = np.asarray(omega_over_gamma, dtype=float)
    num = np.abs(dtft(output_field, omega_over_gamma * gamma)) ** 2
    scan = np.linspace(-50.0, 50.0, 401) * gamma
    den = float(np.max(np.abs(dtft(input_field, scan)) ** 2))
    if den <= 0:
        raise ValueError("input spectrum vanished; cannot normalize")
    return SpectrumRecord(omega_over_gamma, num / den, den)


def peak_metrics(spectrum, window):
    """Measure the dominant peak inside window = (lo, hi) in units of gamma.

    Center via parabolic interpolation through the three samples around the
    discrete maximum, FWHM via linear interpolation of the two half-height
    crossings nearest the peak.
    """
    lo, hi = window
    w = spectrum.omega_over_gamma
    s = spectrum.s_values
    mask = (w >= lo) & (w <= hi)
    if mask.sum() < 3:
        raise PeakWindowError("window contains fewer than three samples")
    wm = w[mask]
    sm = s[mask]
    i = int(np.argmax(sm))
    if i == 0 or i == sm.size - 1:
        raise PeakWindowError("maximum sits on the window edge")
    d2 = sm[i - 1] - 2.0 * sm[i] + sm[i + 1]
    off = 0.5 * (sm[i - 1] - sm[i + 1]) / d2 if d2 < 0 else 0.0
    # d2 is negative around a maximum; guard the degenerate flat case
    center = wm[i] + off * (wm[1] - wm[0])
    height = sm[i] - 0.25 * (sm[i - 1] - sm[i + 1]) * off if d2 < 0 else sm[i]
    half = height / 2.0
    iL = i
    while iL > 0 and sm[iL] > half:
        iL -= 1
    if sm[iL] > half:
        raise PeakWindowError("left half-height crossing outside window")
    iR = i
    while iR < sm.size - 1 and sm[iR] > half:
        iR += 1
    if sm[iR] > half:
        raise PeakWindowError("right half-height crossing outside window")
    wl = np.interp(half, [sm[iL], sm[iL + 1]], [wm[iL], wm[iL + 1]])
    wr = np.interp(half, [sm[iR], sm[iR - 1]], [wm[iR], wm[iR - 1]])
    return PeakReport(center=float(center), height=float(height), fwhm=float(wr - wl))


def assemble_spectrogram(rows):
    """Stack (param, SpectrumRecord) rows into a sorted matrix record."""
    if not rows:
        raise ValueError("no rows")
    rows = sorted(rows, key=lambda pr: pr[0])
    grid = rows[0][1].omega_over_gamma
    for _, rec in rows[1:]:
        if rec.omega_over_gamma.shape != grid.shape or not np.array_equal(
            rec.omega_over_gamma, grid
        ):
            raise ValueError("spectrogram rows must share the omega grid")
    params = np.array([p for p, _ in rows], dtype=float)
    matrix = np.vstack([rec.s_values for _, rec in rows])
    return SpectrogramRecord(params, grid.copy(), matrix)

import math

import numpy as np
import pytest

from nfsim import (
    FieldRecord,
    GridConfig,
    PeakReport,
    PeakWindowError,
    PulseConfig,
    SpectrumRecord,
    TruncationWarning,
    assemble_spectrogram,
    dtft,
    dtft_via_fft,
    gaussian_input,
    normalized_spectrum,
    peak_metrics,
)

GAMMA = 1.0 / 141.0


def _decaying_line(rate, omega0, t_end=4000.0, dt=0.01):
    t = np.arange(0.0, t_end + dt / 2, dt)
    return FieldRecord(0.0, dt, np.exp(-(rate / 2) * t) * np.exp(-1j * omega0 * t))


def test_lorentzian_fwhm():
    # |transform|^2 of e^{-gamma t/2} is a Lorentzian with FWHM gamma
    rec = _decaying_line(GAMMA, 0.0)
    w = np.linspace(-4.0, 4.0, 1601)
    s = np.abs(dtft(rec, w * GAMMA)) ** 2
    spectrum = SpectrumRecord(w, s, 1.0)
    report = peak_metrics(spectrum, (-4.0, 4.0))
    assert report.fwhm == pytest.approx(1.0, rel=0.01)
    assert report.center == pytest.approx(0.0, abs=0.01)


def test_shifted_line_center():
    rec = _decaying_line(GAMMA, 80.0 * GAMMA)
    # e^{-i w0 t} shows up at +w0 under the e^{+iwt} transform convention
    w = np.linspace(70.0, 90.0, 801)
    s = np.abs(dtft(rec, w * GAMMA)) ** 2
    report = peak_metrics(SpectrumRecord(w, s, 1.0), (70.0, 90.0))
    assert report.center == pytest.approx(80.0, abs=0.02)


def test_gaussian_transform_value():
    grid = GridConfig(dt=0.005, t_end=10.0, n_slabs=8)
    rec = gaussian_input(PulseConfig(), grid)
    val = dtft(rec, np.array([0.0]))[0]
    # integral of the Gaussian envelope, sqrt(pi) tau
    assert abs(val) == pytest.approx(math.sqrt(math.pi) * 0.1, abs=1e-6)


def test_parseval():
    rec = _decaying_line(GAMMA, 0.0, t_end=6000.0, dt=0.02)
    time_energy = np.trapezoid(np.abs(rec.samples) ** 2, dx=rec.dt)
    w = np.linspace(-60.0, 60.0, 12001) * GAMMA
    spec = np.abs(dtft(rec, w)) ** 2
    freq_energy = np.trapezoid(spec, dx=w[1] - w[0]) / (2 * math.pi)
    assert freq_energy == pytest.approx(time_energy, rel=0.01)


def test_dtft_matches_fft():
    grid = GridConfig(dt=0.005, t_end=50.0, n_slabs=8)
    rec = gaussian_input(PulseConfig(), grid)
    omega, spec_fft = dtft_via_fft(rec, pad_factor=4)
    pick = slice(0, omega.size, 97)
    direct = dtft(rec, omega[pick])
    ref = np.max(np.abs(spec_fft))
    assert np.max(np.abs(direct - spec_fft[pick])) < 1e-8 * ref


def test_dtft_nonzero_t_start():
    dt = 0.01
    t = np.arange(0.0, 1500.0, dt)
    samples = np.exp(-GAMMA * t / 2)
    a = FieldRecord(0.0, dt, samples)
    b = FieldRecord(5.0, dt, samples)
    w = np.array([0.3 * GAMMA])
    va = dtft(a, w)[0]
    vb = dtft(b, w)[0]
    assert vb == pytest.approx(va * np.exp(1j * w[0] * 5.0), rel=1e-9)


def test_truncated_record_warns():
    dt = 0.01
    t = np.arange(0.0, 50.0, dt)
    rec = FieldRecord(0.0, dt, np.exp(-GAMMA * t / 2))
    with pytest.warns(TruncationWarning):
        dtft(rec, np.array([0.0]))


def test_spectrum_no_target_is_unity():
    grid = GridConfig(dt=0.005, t_end=10.0, n_slabs=8)
    rec = gaussian_input(PulseConfig(), grid)
    spectrum = normalized_spectrum(rec, rec, np.linspace(-5, 5, 11))
    assert spectrum.value_at(0.0) == pytest.approx(1.0, rel=1e-6)
    assert spectrum.normalization == pytest.approx(math.pi * 0.1**2, rel=1e-6)


def test_spectrum_rescale_invariance():
    grid = GridConfig(dt=0.005, t_end=10.0, n_slabs=8)
    rec = gaussian_input(PulseConfig(), grid)
    out = FieldRecord(0.0, rec.dt, rec.samples * (0.3 - 0.1j))
    w = np.linspace(-5, 5, 21)
    s1 = normalized_spectrum(rec, out, w)
    big_in = FieldRecord(0.0, rec.dt, rec.samples * 1e3)
    big_out = FieldRecord(0.0, rec.dt, out.samples * 1e3)
    s2 = normalized_spectrum(big_in, big_out, w)
    assert np.max(np.abs(s2.s_values - s1.s_values)) < 1e-12 * np.max(s1.s_values)


def test_peak_metrics_exact_parabola():
    w = np.linspace(-1.0, 1.0, 41)
    s = 5.0 - 3.0 * (w - 0.013) ** 2
    report = peak_metrics(SpectrumRecord(w, s, 1.0), (-1.0, 1.0))
    assert report.center == pytest.approx(0.013, abs=1e-10)
    assert report.height == pytest.approx(5.0 + 3.0 * 0.013**2 - 3.0 * 0.013**2, rel=1e-6)


def test_peak_metrics_errors():
    w = np.linspace(0.0, 10.0, 101)
    rising = SpectrumRecord(w, w + 1.0, 1.0)
    with pytest.raises(PeakWindowError):
        peak_metrics(rising, (0.0, 10.0))  # max on the edge
    lorentz = SpectrumRecord(w, 1.0 / (1.0 + (w - 5.0) ** 2), 1.0)
    with pytest.raises(PeakWindowError):
        peak_metrics(lorentz, (4.9, 5.1))  # no half-height crossing inside
    with pytest.raises(PeakWindowError):
        peak_metrics(lorentz, (4.95, 5.05))


def test_peak_report_validation():
    with pytest.raises(ValueError):
        PeakReport(0.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        PeakReport(0.0, 1.0, 0.0)


def test_spectrum_record_validation():
    w = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        SpectrumRecord(w, np.ones(4), 1.0)
    with pytest.raises(ValueError):
        SpectrumRecord(w, -np.ones(5), 1.0)
    with pytest.raises(ValueError):
        SpectrumRecord(w[::-1].copy(), np.ones(5), 1.0)


def test_spectrogram_assembly():
    w = np.linspace(-1, 1, 5)
    rows = [
        (2.0, SpectrumRecord(w, np.full(5, 2.0), 1.0)),
        (1.0, SpectrumRecord(w, np.full(5, 1.0), 1.0)),
    ]
    gram = assemble_spectrogram(rows)
    assert np.array_equal(gram.param_values, [1.0, 2.0])
    assert gram.matrix[0, 0] == 1.0 and gram.matrix[1, 0] == 2.0
    with pytest.raises(ValueError):
        assemble_spectrogram([])
    other = SpectrumRecord(np.linspace(-2, 2, 5), np.ones(5), 1.0)
    with pytest.raises(ValueError):
        assemble_spectrogram([rows[0], (3.0, other)])

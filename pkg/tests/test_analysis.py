import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heliodrop import analysis as an
from heliodrop.dynamics import WaveField, initialize
from heliodrop.errors import GridMismatch, PhaseGap, ZeroNorm
from heliodrop.grid import DEFAULT_GRID, Grid
from heliodrop.units import wavenumber

G = Grid(-50.0, 50.0, 1001)


def field(values, grid=G, time=0.0):
    return WaveField(grid, np.asarray(values, dtype=complex), time)


def gaussian(x, c, w=2.0, h=1.0):
    return h * np.exp(-((x - c) ** 2) / (2 * w**2))


def test_norm(large_profile):
    psi = initialize(large_profile, 0.0, 110.0)
    assert an.norm(psi) == pytest.approx(1.288, rel=0.1)
    assert an.norm(psi) == pytest.approx(large_profile.n_per_area, rel=1e-3)
    assert an.norm(field(np.zeros(G.n))) == 0.0
    scaled = psi.with_values(3.0 * psi.values)
    assert an.norm(scaled) == pytest.approx(9.0 * an.norm(psi), rel=1e-14)


def test_center_of_mass(small_profile):
    psi = initialize(small_profile, 65.78, 110.0)
    assert an.center_of_mass(psi) == pytest.approx(110.0, abs=1e-9)
    with pytest.raises(ZeroNorm):
        an.center_of_mass(field(np.zeros(G.n)))


def test_mean_velocity_units():
    x = G.x
    a = field(gaussian(x, 0.0), time=0.0)
    # shift by 1 Å over one internal time unit = 1e-10 m / 7.638e-12 s
    b = field(gaussian(x, 1.0), time=1.0)
    assert an.mean_velocity(a, b) == pytest.approx(1e-10 / 7.638232577577646e-12, rel=1e-6)
    assert an.mean_velocity(a, a) == 0.0


def test_mean_wavenumber():
    x = G.x
    psi = field(gaussian(x, 0.0, 5.0) * np.exp(0.3j * x))
    assert an.mean_wavenumber(psi) == pytest.approx(0.3, rel=1e-3)


def test_phase_field_real_positive():
    ph = an.phase_field(field(gaussian(G.x, 0.0, 5.0)))
    defined = np.isfinite(ph)
    assert np.all(ph[defined] == 0.0)
    assert not defined[0]


def test_phase_field_plane_wave():
    k = 0.4146
    psi = field(np.exp(1j * k * G.x))
    kk = an.local_wavenumber(an.phase_field(psi), G.dx)
    assert np.allclose(kk, k, atol=1e-6)


@given(st.floats(min_value=-10.0, max_value=10.0))
def test_phase_field_global_rotation(theta):
    x = G.x
    psi = field(gaussian(x, 3.0, 6.0) * np.exp(1j * 0.2 * x))
    rot = psi.with_values(psi.values * np.exp(1j * theta))
    a, b = an.phase_field(psi), an.phase_field(rot)
    ok = np.isfinite(a)
    diff = np.angle(np.exp(1j * (b[ok] - a[ok] - theta)))
    assert np.max(np.abs(diff)) < 1e-9


def test_local_wavenumber_phase_gap():
    values = gaussian(G.x, 0.0, 1.0).astype(complex)
    ph = an.phase_field(field(values))
    with pytest.raises(PhaseGap):
        an.local_wavenumber(ph, G.dx)
    runs = an.defined_runs(ph)
    assert len(runs) == 1
    lo, hi = runs[0]
    assert np.all(an.local_wavenumber(ph, G.dx, slice(lo, hi)) == 0.0)


def test_local_wavenumber_of_initialized_drop(large_profile):
    psi = initialize(large_profile, 65.78, 110.0)
    bulk = np.abs(psi.x - 110.0) < 25.0
    idx = np.flatnonzero(bulk)
    k = an.local_wavenumber(an.phase_field(psi), psi.grid.dx, slice(idx[0], idx[-1] + 1))
    assert np.max(np.abs(k - wavenumber(65.78))) < 1e-3


def test_stationary_drop_has_zero_wavenumber(small_profile):
    psi = initialize(small_profile, 0.0, 110.0)
    ph = an.phase_field(psi)
    lo, hi = max(an.defined_runs(ph), key=lambda r: r[1] - r[0])
    assert np.all(an.local_wavenumber(ph, psi.grid.dx, slice(lo, hi)) == 0.0)


def test_detect_single_peak():
    rep = an.detect_peaks(gaussian(G.x, 7.0), G.x)
    assert rep.peak_count == 1
    assert rep.peak_positions[0] == pytest.approx(7.0)
    assert rep.mean_spacing == 0.0


def test_detect_three_peaks():
    centres = [-20.0, 0.0, 15.0]
    y = sum(gaussian(G.x, c) for c in centres)
    rep = an.detect_peaks(y, G.x)
    assert rep.peak_positions == pytest.approx(centres)
    assert rep.peak_count == 3
    assert rep.mean_spacing == pytest.approx(17.5)
    assert all(np.diff(rep.peak_positions) > 0)


def test_plateau_reports_leftmost():
    y = np.zeros(G.n)
    y[400:405] = 1.0
    rep = an.detect_peaks(y, G.x)
    assert rep.peak_positions == [pytest.approx(G.x[400])]


def test_empty_report():
    rep = an.detect_peaks(np.zeros(G.n), G.x)
    assert rep.peak_count == 0 and rep.min_prominence == 0.0


@settings(max_examples=20)
@given(st.floats(min_value=1e-6, max_value=1e6))
def test_detect_peaks_scale_invariant(s):
    x = G.x
    y = gaussian(x, -10.0) + 0.3 * gaussian(x, 5.0) + 0.06 * gaussian(x, 20.0, 1.0)
    a = an.detect_peaks(y, x)
    b = an.detect_peaks(s * y, x)
    assert a.peak_positions == b.peak_positions


def test_profile_distance():
    y = gaussian(G.x, 0.0, 4.0)
    assert an.profile_distance(y, y) == (0.0, 0)
    shifted = np.roll(y, 5)
    d, s = an.profile_distance(shifted, y, align=True, max_shift=20)
    assert d < 1e-14 and s == 5
    with pytest.raises(GridMismatch):
        an.profile_distance(y, y[:-1])


def test_signal_span_and_roughness():
    x = G.x
    smooth = field(gaussian(x, 0.0, 8.0) * np.exp(0.4j * x))
    span = an.signal_span(smooth)
    assert x[span.start] < -20 and x[span.stop - 1] > 20
    assert an.phase_roughness(smooth.values[span]) < 1e-10
    rng = np.random.default_rng(0)
    noisy = smooth.values * np.exp(1j * rng.uniform(-1, 1, x.size))
    assert an.phase_roughness(noisy[span]) > 0.3


def test_phase_coherence_plane_wave_drop(large_profile):
    psi = initialize(large_profile, 65.78, 110.0)
    pc = an.phase_coherence(psi, large_profile.x_eff)
    # the analytic tail underflows far from the drop, so the phase is not defined everywhere
    assert pc.smooth and not pc.defined
    assert pc.median_k_bulk == pytest.approx(wavenumber(65.78), rel=1e-4)


def _train_field(spacing, n_peaks, phase_noise=0.0, seed=1):
    x = DEFAULT_GRID.x
    drop = gaussian(x, 100.0, 20.0, 0.15)
    tail = sum(gaussian(x, 40.0 - spacing * i, 1.0, 0.01) for i in range(n_peaks))
    phase = 0.5 * x
    if phase_noise:
        phase = phase + np.random.default_rng(seed).uniform(-phase_noise, phase_noise, x.size)
    return WaveField(DEFAULT_GRID, (drop + tail) * np.exp(1j * phase))


def test_coherent_train_regular():
    psi = _train_field(6.5, 5)
    rep = an.tail_report(psi, 30.0)
    assert rep.peak_count == 5
    assert len(an.coherent_train(rep, psi)) == 5


def test_coherent_train_rejects_noisy_phase():
    psi = _train_field(6.5, 5, phase_noise=1.0)
    rep = an.tail_report(psi, 30.0)
    assert rep.peak_count == 5
    assert an.coherent_train(rep, psi) == []


def test_coherent_train_rejects_grid_scale_peaks():
    x = DEFAULT_GRID.x
    y = gaussian(x, 100.0, 20.0, 0.15) + 0.01 * (x < 50) * (1 + np.cos(2 * math.pi * x / 0.4))
    psi = WaveField(DEFAULT_GRID, y.astype(complex))
    rep = an.tail_report(psi, 30.0)
    assert rep.peak_count > 10
    assert an.coherent_train(rep, psi) == []


def test_recession_flag():
    x = DEFAULT_GRID.x
    drop_a, drop_b = gaussian(x, 110.0, 20.0), gaussian(x, 105.0, 20.0)
    tail_a = sum(gaussian(x, c, 1.0, 0.05) for c in (40.0, 47.0, 54.0))
    tail_b = sum(gaussian(x, c - 10.0, 1.0, 0.05) for c in (40.0, 47.0, 54.0))
    a = WaveField(DEFAULT_GRID, (drop_a + tail_a).astype(complex), 0.0)
    b = WaveField(DEFAULT_GRID, (drop_b + tail_b).astype(complex), 200.0)
    rep = an.tail_report(b, 30.0, earlier=a)
    assert rep.recession_flag is True
    assert rep.peak_velocity < rep.com_velocity < 0
    same = an.tail_report(a, 30.0, earlier=a)
    assert same.recession_flag is False and same.peak_velocity == 0.0

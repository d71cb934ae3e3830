"""Observables computed from wave-field snapshots."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import GridMismatch, PhaseGap, ZeroNorm
from .units import velocity_from_internal

PHASE_THRESHOLD = 1e-12  # |psi| below this has no meaningful phase
DEFAULT_PROMINENCE = 0.05
MIN_RECESSION_INTERVAL = 1e-12  # s
SIGNAL_FRACTION = 1e-3  # of max |psi|; weaker amplitudes are treated as background
ROUGHNESS_LIMIT = 1e-2  # rad, rms second difference of the phase per node
MIN_TRAIN_SPACING = 1.0  # Å, peaks closer than this are grid-scale noise
SPACING_SPREAD = 1.5  # allowed ratio between a spacing and the train median


@dataclass
class TailReport:
    region: tuple  # (x_lo, x_hi) in Å
    peak_positions: list
    peak_heights: list
    prominences: list  # relative to the largest |psi| in the region
    recession_flag: bool = None
    peak_velocity: float = None  # m/s, mean peak position
    com_velocity: float = None  # m/s
    extra: dict = field(default_factory=dict)

    @property
    def peak_count(self):
        return len(self.peak_positions)

    @property
    def mean_spacing(self):
        if self.peak_count < 2:
            return 0.0
        return float(np.mean(np.diff(self.peak_positions)))

    @property
    def min_prominence(self):
        return min(self.prominences) if self.prominences else 0.0

    def as_dict(self):
        return {
            "region": list(self.region),
            "peak_count": self.peak_count,
            "peak_positions": list(self.peak_positions),
            "peak_heights": list(self.peak_heights),
            "prominences": list(self.prominences),
            "mean_spacing": self.mean_spacing,
            "min_prominence": self.min_prominence,
            "recession_flag": self.recession_flag,
            "peak_velocity_mps": self.peak_velocity,
            "com_velocity_mps": self.com_velocity,
            **self.extra,
        }


def norm(psi):
    """Particles per unit area, trapezoid integral of |psi|^2 (Å^-2)."""
    return float(np.trapezoid(psi.density, dx=psi.grid.dx))


def center_of_mass(psi):
    n = norm(psi)
    if n <= 0.0:
        raise ZeroNorm("center of mass of an empty field")
    return float(np.trapezoid(psi.x * psi.density, dx=psi.grid.dx) / n)


def mean_velocity(first, second):
    """Center-of-mass velocity in m/s between two snapshots."""
    dt = second.time - first.time
    if dt == 0:
        return 0.0
    return velocity_from_internal((center_of_mass(second) - center_of_mass(first)) / dt)


def mean_wavenumber(psi):
    """Density-weighted phase gradient Im(psi* psi') / rho averaged over the drop (Å^-1)."""
    v = psi.values
    grad = np.gradient(v, psi.grid.dx)
    current = np.imag(np.conj(v) * grad)
    return float(np.trapezoid(current, dx=psi.grid.dx) / norm(psi))


def phase_field(psi):
    """Raw atan2 phase in (-pi, pi]; NaN where |psi| < 1e-12."""
    values = psi.values if hasattr(psi, "values") else np.asarray(psi)
    phase = np.angle(values)
    phase[np.abs(values) < PHASE_THRESHOLD] = np.nan
    return phase


def defined_runs(phase):
    """(start, stop) index pairs of contiguous runs where the phase is defined."""
    ok = np.isfinite(phase).astype(np.int8)
    edges = np.diff(np.concatenate([[0], ok, [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def local_wavenumber(phase, dx, region=None):
    """Central-difference derivative of the unwrapped phase on a defined run.

    ``region`` is an index slice; every point in it must carry a defined
    phase, otherwise :class:`PhaseGap` is raised.
    """
    phase = np.asarray(phase, dtype=float)
    if region is not None:
        phase = phase[region]
    if phase.size < 2:
        raise PhaseGap("region too short")
    if not np.all(np.isfinite(phase)):
        bad = np.flatnonzero(~np.isfinite(phase))
        raise PhaseGap(f"{bad.size} undefined phase points, first at offset {bad[0]}")
    return np.gradient(np.unwrap(phase), dx)


def tail_region(psi, x_eff):
    """From the left edge to one effective length behind the center of mass."""
    return (float(psi.grid.x_min), center_of_mass(psi) - x_eff)


def detect_peaks(abs_psi, x, region=None, min_prominence=DEFAULT_PROMINENCE):
    """Local maxima of |psi| whose prominence is at least ``min_prominence``
    times the largest |psi| inside ``region``. Plateaus report their leftmost node.
    """
    abs_psi = np.asarray(abs_psi, dtype=float)
    x = np.asarray(x, dtype=float)
    if region is None:
        region = (x[0], x[-1])
    lo, hi = region
    mask = (x >= lo) & (x <= hi)
    xs, ys = x[mask], abs_psi[mask]
    if ys.size < 3 or ys.max() <= 0.0:
        return TailReport(tuple(region), [], [], [])
    scale = ys.max()
    idx, props = find_peaks(ys, prominence=min_prominence * scale, plateau_size=1)
    left = props["left_edges"]
    return TailReport(
        region=(float(lo), float(hi)),
        peak_positions=[float(v) for v in xs[left]],
        peak_heights=[float(v) for v in ys[left]],
        prominences=[float(v) for v in props["prominences"] / scale],
    )


def tail_report(psi, x_eff, min_prominence=DEFAULT_PROMINENCE, earlier=None):
    """Peaks in the tail behind the drop.

    With an ``earlier`` snapshot at least 1 ps before, the recession flag
    says whether the mean peak position moves away from the center of mass,
    i.e. whether the train recedes faster than the drop.
    """
    report = detect_peaks(psi.magnitude, psi.x, tail_region(psi, x_eff), min_prominence)
    if earlier is None:
        return report
    before = detect_peaks(earlier.magnitude, earlier.x, tail_region(earlier, x_eff), min_prominence)
    return with_recession(report, before, earlier, psi)


def with_recession(report, before, earlier, later):
    dt = later.time - earlier.time
    com_v = mean_velocity(earlier, later)
    report.com_velocity = com_v
    if dt == 0:
        report.peak_velocity = 0.0
        report.recession_flag = False
        return report
    if later.time_seconds - earlier.time_seconds < MIN_RECESSION_INTERVAL:
        report.extra["recession_note"] = "snapshots closer than 1 ps"
    if not (report.peak_count and before.peak_count):
        report.recession_flag = False
        return report
    shift = np.mean(report.peak_positions) - np.mean(before.peak_positions)
    report.peak_velocity = velocity_from_internal(shift / dt)
    gap_before = abs(np.mean(before.peak_positions) - center_of_mass(earlier))
    gap_after = abs(np.mean(report.peak_positions) - center_of_mass(later))
    report.recession_flag = bool(gap_after > gap_before)
    return report


def signal_span(psi, fraction=SIGNAL_FRACTION):
    """Index slice of the contiguous run around the center of mass where
    |psi| stays above ``fraction`` of its maximum."""
    a = psi.magnitude
    ok = a >= fraction * a.max()
    centre = int(np.clip(np.searchsorted(psi.x, center_of_mass(psi)), 0, a.size - 1))
    if not ok[centre]:
        centre = int(np.argmax(a))
    lo = centre
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = centre
    while hi < a.size - 1 and ok[hi + 1]:
        hi += 1
    return slice(lo, hi + 1)


def phase_roughness(values, mask=None):
    """Density-weighted rms of the second difference of the unwrapped phase (rad).

    A phase that varies smoothly on the grid gives values of order
    (k dx)^2; grid-scale phase noise pushes it towards O(1). Large jumps
    next to near-nodes carry little weight because of the |psi|^2 factor.
    """
    values = np.asarray(values)
    d2 = np.diff(np.unwrap(np.angle(values)), 2)
    w = np.abs(values[1:-1]) ** 2
    if mask is not None:
        d2, w = d2[mask], w[mask]
    if w.sum() == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(w * d2**2) / np.sum(w)))


@dataclass
class PhaseCoherence:
    signal_region: tuple  # (x_lo, x_hi) Å
    defined: bool  # phase defined at every interior node, left edge to wall
    roughness_bulk: float  # rad
    roughness_outside: float  # rad, signal region outside the bulk
    median_k_bulk: float  # Å^-1
    median_k_tail: float  # Å^-1, nan when the signal does not reach the tail
    limit: float = ROUGHNESS_LIMIT

    @property
    def smooth(self):
        return self.roughness_outside < self.limit

    def as_dict(self):
        return {
            "signal_region": list(self.signal_region),
            "defined": self.defined,
            "roughness_bulk": self.roughness_bulk,
            "roughness_outside": self.roughness_outside,
            "median_k_bulk": self.median_k_bulk,
            "median_k_tail": self.median_k_tail,
            "smooth": self.smooth,
        }


def phase_coherence(psi, x_eff, limit=ROUGHNESS_LIMIT):
    """Smoothness of the phase in and around the drop.

    The bulk is |x - <x>| < x_eff / 2 and the tail is x < <x> - x_eff, both
    restricted to the signal region so that the round-off background far
    from the drop does not enter.
    """
    com = center_of_mass(psi)
    span = signal_span(psi)
    x = psi.x[span]
    values = psi.values[span]
    phase = phase_field(psi)
    try:
        local_wavenumber(phase, psi.grid.dx, slice(1, phase.size - 1))
        defined = True
    except PhaseGap:
        defined = False
    k = np.abs(np.gradient(np.unwrap(np.angle(values)), psi.grid.dx))
    bulk = np.abs(x - com) < 0.5 * x_eff
    tail = x < com - x_eff
    inner = bulk[1:-1]
    return PhaseCoherence(
        signal_region=(float(x[0]), float(x[-1])),
        defined=defined,
        roughness_bulk=phase_roughness(values, inner),
        roughness_outside=phase_roughness(values, ~inner),
        median_k_bulk=float(np.median(k[bulk])) if bulk.any() else float("nan"),
        median_k_tail=float(np.median(k[tail])) if tail.any() else float("nan"),
        limit=limit,
    )


def coherent_train(report, psi, limit=ROUGHNESS_LIMIT):
    """Peaks of ``report`` that form the longest coherent wave train.

    Consecutive peaks belong to one train when they are at least 1 Å
    apart, their spacings stay within a factor 1.5 of the train median and
    the phase between them is smooth. Returns the positions, or an empty
    list when no two peaks qualify.
    """
    pos = np.asarray(report.peak_positions)
    if pos.size < 2:
        return []
    idx = np.searchsorted(psi.x, pos)

    def linked(i):
        if pos[i + 1] - pos[i] < MIN_TRAIN_SPACING:
            return False
        return phase_roughness(psi.values[idx[i] : idx[i + 1] + 1]) < limit

    best, run = [], [0]
    for i in range(pos.size - 1):
        if linked(i):
            run.append(i + 1)
            continue
        best = max(best, run, key=len)
        run = [i + 1]
    best = max(best, run, key=len)
    if len(best) < 2:
        return []
    train = pos[best]
    gaps = np.diff(train)
    med = np.median(gaps)
    if np.any(gaps > SPACING_SPREAD * med) or np.any(gaps < med / SPACING_SPREAD):
        # irregular: keep the longest regular stretch
        keep, cur = [train[0]], [train[0]]
        for a, b in zip(train[:-1], train[1:]):
            g = b - a
            if med / SPACING_SPREAD <= g <= SPACING_SPREAD * med:
                cur.append(b)
            else:
                keep = max(keep, cur, key=len)
                cur = [b]
        train = np.asarray(max(keep, cur, key=len))
    return [float(v) for v in train] if train.size >= 2 else []


def profile_distance(a, b, align=False, max_shift=None):
    """Relative L2 distance ||a - b|| / ||b|| of two magnitude fields.

    With ``align`` the best integer shift s (a[i + s] compared to b[i]) is
    searched within ``max_shift`` nodes. Returns (distance, shift).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise GridMismatch(f"fields have shapes {a.shape} and {b.shape}")
    ref = np.linalg.norm(b)
    if ref == 0.0:
        raise ZeroNorm("reference field is zero")
    if not align:
        return float(np.linalg.norm(a - b) / ref), 0
    n = a.size
    max_shift = n - 1 if max_shift is None else min(int(max_shift), n - 1)
    best, best_shift = np.inf, 0
    for s in range(-max_shift, max_shift + 1):
        shifted = _shift(a, s)
        dist = np.linalg.norm(shifted - b)
        # ties go to the smallest |shift|
        if dist < best - 1e-15 * ref or (abs(dist - best) <= 1e-15 * ref and abs(s) < abs(best_shift)):
            best, best_shift = dist, s
    return float(best / ref), best_shift


def _shift(a, s):
    """out[i] = a[i + s], zero-filled."""
    out = np.zeros_like(a)
    if s >= 0:
        out[: a.size - s] = a[s:]
    else:
        out[-s:] = a[: a.size + s]
    return out


def mirrored(abs_psi):
    return np.asarray(abs_psi)[::-1].copy()

"""Trajectory recovery and jump statistics.

The filter turns noisy quadrature samples into a binary state estimate with
hysteresis thresholds placed half a standard deviation from each jump
destination.  Dwell statistics use sample-weighted logarithmic histograms:
every sample inside a dwell adds one count to the bin of that dwell's
duration, so the histogram estimates tau*p(tau) and a constant-rate process
is predicted analytically from the measured mean dwell alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jumpsim import IQRecord, STATE_EXCITED, STATE_GROUND

LN10 = math.log(10.0)


@dataclass(frozen=True)
class StateEstimate:
    """Binary state trajectory estimated from a measurement record."""

    t_meas: float
    states: np.ndarray  # uint8, STATE_GROUND / STATE_EXCITED
    threshold_to_excited: float
    threshold_to_ground: float

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class DwellSet:
    """Interior dwell durations per state, in seconds."""

    ground: np.ndarray
    excited: np.ndarray

    def for_state(self, state: int) -> np.ndarray:
        return self.ground if state == STATE_GROUND else self.excited


@dataclass(frozen=True)
class DwellHistogram:
    """Sample-weighted dwell histogram on a uniform log-time grid.

    counts[i] is the number of samples whose dwell duration falls in
    [edges[i], edges[i+1]); log_width is the constant bin width in log10
    units; tau_mean is the plain per-dwell mean duration.
    """

    state: int
    edges: np.ndarray
    log_width: float
    counts: np.ndarray
    total: float
    tau_mean: float

    def centers(self) -> np.ndarray:
        return np.sqrt(self.edges[:-1] * self.edges[1:])


@dataclass(frozen=True)
class FidelityReport:
    """Overlap of a measured histogram with its constant-rate prediction."""

    fidelity: float
    predicted: np.ndarray

    @property
    def one_minus(self) -> float:
        return 1.0 - self.fidelity


def two_point_filter(iq: IQRecord, separation: float) -> StateEstimate:
    """Hysteresis state estimate from the I quadrature.

    A jump to the excited state is declared when I drops below
    -separation + 1/2, a jump back when I rises above separation - 1/2
    (thresholds half a sigma from the jump destination); otherwise the
    previous state is kept.  The initial state is the sign of the first
    sample.
    """
    if separation <= 1.0:
        raise ValueError("separation must exceed 1 for distinct thresholds")
    to_excited = -separation + 0.5
    to_ground = separation - 0.5
    i = np.asarray(iq.i, dtype=float)
    if len(i) == 0:
        raise ValueError("empty record")

    decided_e = i < to_excited
    decided_g = i > to_ground
    decided = decided_e | decided_g
    idx = np.where(decided, np.arange(len(i)), -1)
    last = np.maximum.accumulate(idx)
    initial = STATE_GROUND if i[0] >= 0 else STATE_EXCITED
    states = np.where(
        last < 0,
        initial,
        np.where(decided_e[np.clip(last, 0, None)], STATE_EXCITED, STATE_GROUND),
    ).astype(np.uint8)
    return StateEstimate(
        t_meas=iq.t_meas,
        states=states,
        threshold_to_excited=to_excited,
        threshold_to_ground=to_ground,
    )


def _runs(states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(run lengths, run states) for a 1-d state array."""
    flips = np.flatnonzero(np.diff(states.astype(np.int8)) != 0)
    starts = np.concatenate(([0], flips + 1))
    ends = np.concatenate((flips + 1, [len(states)]))
    return ends - starts, states[starts]


def extract_dwells(est: StateEstimate) -> DwellSet:
    """Interior dwell durations: maximal runs bounded by a jump on each side.

    The first and last runs touch the record edges and are discarded to
    avoid censoring bias; fewer than three runs therefore give no dwells.
    """
    lengths, run_states = _runs(np.asarray(est.states))
    if len(lengths) < 3:
        empty = np.empty(0)
        return DwellSet(ground=empty, excited=empty)
    lengths = lengths[1:-1]
    run_states = run_states[1:-1]
    durations = lengths.astype(float) * est.t_meas
    return DwellSet(
        ground=durations[run_states == STATE_GROUND],
        excited=durations[run_states == STATE_EXCITED],
    )


def log_histogram(
    dwells,
    t_meas: float,
    bins_per_decade: int = 10,
    state: int = STATE_GROUND,
) -> DwellHistogram:
    """Sample-weighted histogram of dwell durations on a log grid.

    A dwell of k samples (k = duration / t_meas, rounded) contributes k
    counts to the bin containing k * t_meas.  Bins start at t_meas, the
    shortest resolvable dwell.
    """
    dwells = np.asarray(dwells, dtype=float)
    if len(dwells) == 0:
        raise ValueError("no dwells to histogram")
    if bins_per_decade < 1:
        raise ValueError("bins_per_decade must be at least 1")
    k = np.rint(dwells / t_meas).astype(np.int64)
    k = k[k >= 1]
    if len(k) == 0:
        raise ValueError("all dwells shorter than half a sample")
    tau = k.astype(float) * t_meas

    log_width = 1.0 / bins_per_decade
    # uniform grid in log10(tau / t_meas); epsilon guards exact-edge values
    pos = np.log10(tau / t_meas) * bins_per_decade + 1e-9
    idx = np.floor(pos).astype(np.int64)
    n_bins = int(idx.max()) + 1
    counts = np.bincount(idx, weights=k.astype(float), minlength=n_bins)
    edges = t_meas * 10.0 ** (log_width * np.arange(n_bins + 1))
    return DwellHistogram(
        state=state,
        edges=edges,
        log_width=log_width,
        counts=counts,
        total=float(counts.sum()),
        tau_mean=float(tau.mean()),
    )


def poisson_prediction(hist: DwellHistogram) -> np.ndarray:
    """Expected sample-weighted counts per bin for a constant-rate process.

    Evaluated at the geometric bin centers; normalized so the predicted
    total matches the measured total up to log-grid discretization.
    """
    if hist.total <= 0 or hist.tau_mean <= 0:
        raise ValueError("histogram must contain counts and a positive mean dwell")
    tau = hist.centers()
    tbar = hist.tau_mean
    return (
        hist.total * hist.log_width / tbar * LN10 * tau * (tau / tbar) * np.exp(-tau / tbar)
    )


def fidelity(measured, predicted) -> FidelityReport:
    """Bhattacharyya overlap sum(sqrt(M*P)) / sum(M) of two histograms."""
    m = np.asarray(measured, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if m.shape != p.shape:
        raise ValueError("histograms must have matching shapes")
    if np.any(p < 0) or np.any(m < 0):
        raise ValueError("histogram values must be non-negative")
    total = m.sum()
    if total <= 0:
        raise ValueError("fidelity undefined for an all-zero measured histogram")
    return FidelityReport(
        fidelity=float(np.sqrt(m * p).sum() / total),
        predicted=p,
    )


def polarization(est: StateEstimate) -> tuple[float, float]:
    """(excited-state fraction, mean polarization p_g - p_e)."""
    states = np.asarray(est.states)
    if len(states) == 0:
        raise ValueError("empty estimate")
    p_e = float(np.mean(states == STATE_EXCITED))
    return p_e, 1.0 - 2.0 * p_e


def cross_correlation(a, b) -> float:
    """Normalized cross-correlation of two equal-length series, in [-1, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be 1-d with equal lengths")
    if len(a) < 2:
        raise ValueError("need at least two points")
    sa = a.std()
    sb = b.std()
    if sa == 0 or sb == 0:
        raise ValueError("cross-correlation undefined for a constant series")
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


@dataclass(frozen=True)
class WindowedReport:
    """Per-window dwell statistics over non-overlapping windows.

    Entries are NaN where a window had no interior dwells of the needed
    state, or too few ground dwells for a meaningful fidelity.
    """

    window: float
    t_start: np.ndarray
    tau_ground: np.ndarray
    tau_excited: np.ndarray
    fidelity_ground: np.ndarray
    sigma_z: np.ndarray

    @property
    def one_minus_fidelity(self) -> np.ndarray:
        return 1.0 - self.fidelity_ground

    def __len__(self) -> int:
        return len(self.t_start)


def windowed_report(
    est: StateEstimate,
    window: float,
    bins_per_decade: int = 10,
    min_dwells: int = 20,
) -> WindowedReport:
    """Dwell means, ground-state Poisson fidelity and polarization per window.

    Windows shorter than 100 samples are refused; windows with fewer than
    min_dwells interior ground dwells get a NaN fidelity (the overlap of a
    near-empty histogram is noise).
    """
    if window < 100 * est.t_meas:
        raise ValueError("window must cover at least 100 samples")
    samples_per_window = int(round(window / est.t_meas))
    states = np.asarray(est.states)
    n_windows = len(states) // samples_per_window
    if n_windows == 0:
        raise ValueError("record shorter than one window")

    t0 = np.arange(n_windows) * (samples_per_window * est.t_meas)
    tau_g = np.full(n_windows, np.nan)
    tau_e = np.full(n_windows, np.nan)
    fid = np.full(n_windows, np.nan)
    sig = np.empty(n_windows)
    for w in range(n_windows):
        chunk = states[w * samples_per_window:(w + 1) * samples_per_window]
        sub = StateEstimate(
            t_meas=est.t_meas,
            states=chunk,
            threshold_to_excited=est.threshold_to_excited,
            threshold_to_ground=est.threshold_to_ground,
        )
        p_e, sig[w] = polarization(sub)
        dwells = extract_dwells(sub)
        if len(dwells.ground) > 0:
            tau_g[w] = dwells.ground.mean()
        if len(dwells.excited) > 0:
            tau_e[w] = dwells.excited.mean()
        if len(dwells.ground) >= min_dwells:
            hist = log_histogram(dwells.ground, est.t_meas, bins_per_decade)
            fid[w] = fidelity(hist.counts, poisson_prediction(hist)).fidelity
    return WindowedReport(
        window=samples_per_window * est.t_meas,
        t_start=t0,
        tau_ground=tau_g,
        tau_excited=tau_e,
        fidelity_ground=fid,
        sigma_z=sig,
    )

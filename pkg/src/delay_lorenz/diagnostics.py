"""Classify simulated trajectories so they can be compared with the linear
prediction: decay to the origin, sustained oscillation, or departure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .dde import OVERFLOW_LIMIT, HistoryLike, IntegrationError, Trajectory, integrate
from .model import DelayVariant, SystemParams

MIN_PEAKS = 5


class Behavior(str, Enum):
    CONVERGING = "Converging"
    OSCILLATING = "Oscillating"
    DIVERGING = "Diverging"
    INDETERMINATE = "Indeterminate"  # includes bounded irregular (chaotic) motion


@dataclass(frozen=True)
class BehaviorReport:
    verdict: Behavior
    growth_rate: float  # per unit time; nan when no envelope could be fitted
    period: Optional[float]
    early_amplitude: float
    late_amplitude: float
    n_peaks: int = 0
    abort_time: Optional[float] = None
    note: str = ""


def find_peaks(t: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Strict 3-point local maxima, refined by a parabola through the stencil."""
    if len(v) < 3:
        return np.empty(0), np.empty(0)
    left, mid, right = v[:-2], v[1:-1], v[2:]
    idx = np.nonzero((mid > left) & (mid > right))[0] + 1
    if idx.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = v[idx - 1], v[idx], v[idx + 1]
    curvature = ym - 2.0 * y0 + yp
    delta = 0.5 * (ym - yp) / curvature
    h = t[1] - t[0]
    return t[idx] + delta * h, y0 - 0.25 * (ym - yp) * delta


def _analysis_slice(traj: Trajectory, settle_fraction: float) -> slice:
    if not 0.0 < settle_fraction < 1.0:
        raise ValueError("settle_fraction must lie in (0, 1)")
    return slice(int(math.floor(settle_fraction * len(traj))), None)


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v))) if v.size else 0.0


def estimate_period(
    traj: Trajectory, component: str = "x", settle_fraction: float = 0.3
) -> Optional[float]:
    """Median spacing of the component's maxima after the settle window."""
    window = _analysis_slice(traj, settle_fraction)
    times, _ = find_peaks(traj.times[window], traj.component(component)[window])
    if times.size < MIN_PEAKS:
        return None
    return float(np.median(np.diff(times)))


def _consistent_period(times: np.ndarray) -> Optional[float]:
    intervals = np.diff(times)
    if intervals.size < MIN_PEAKS:
        return None
    if np.std(intervals) >= 0.1 * np.mean(intervals):
        return None
    return float(np.median(intervals))


def classify_trajectory(
    traj: Trajectory,
    settle_fraction: float = 0.3,
    *,
    component: str = "x",
    tol_rate: float = 0.01,
    departure_ratio: float = 3.0,
    window_fraction: float = 0.2,
    onset_fraction: float = 0.01,
) -> BehaviorReport:
    """Decide whether a trajectory converges, oscillates or diverges.

    The envelope of |component| (its local maxima after discarding the first
    ``settle_fraction`` of the record) is fitted in log space; the slope is the
    growth rate.  A trajectory whose RMS over the last ``window_fraction`` of
    the record exceeds ``departure_ratio`` times its peak magnitude over the
    first ``onset_fraction`` has left the origin even if it has since
    saturated on a distant attractor, and is reported as diverging with the
    secant rate between the two.
    """
    n = len(traj)
    v = traj.component(component)
    w = max(1, int(round(window_fraction * n)))
    early, late = _rms(v[:w]), _rms(v[-w:])
    m = max(1, int(round(onset_fraction * n)))
    onset = float(np.max(np.abs(v[:m])))
    span = traj.times[-1] - traj.times[0]
    secant = (
        math.log(late / onset) / ((1.0 - 0.5 * window_fraction) * span)
        if onset > 0 and late > 0 and span > 0
        else math.nan
    )

    window = _analysis_slice(traj, settle_fraction)
    t_win, v_win = traj.times[window], v[window]
    peak_t, peak_v = find_peaks(t_win, np.abs(v_win))
    keep = peak_v > 0
    peak_t, peak_v = peak_t[keep], peak_v[keep]
    rate = (
        float(np.polyfit(peak_t, np.log(peak_v), 1)[0]) if peak_t.size >= 3 else math.nan
    )

    def report(verdict, growth_rate, period=None, note=""):
        return BehaviorReport(
            verdict=verdict,
            growth_rate=growth_rate,
            period=period,
            early_amplitude=early,
            late_amplitude=late,
            n_peaks=int(peak_t.size),
            abort_time=traj.abort_time,
            note=note,
        )

    if traj.aborted:
        if not rate > 0:
            rate = math.log(OVERFLOW_LIMIT / max(onset, 1e-300)) / traj.abort_time
        return report(Behavior.DIVERGING, rate, note=f"overflow at t={traj.abort_time:.6g}")

    if len(t_win) < 100:
        raise ValueError(f"need at least 100 samples after the settle window, got {len(t_win)}")

    if rate > tol_rate:
        return report(Behavior.DIVERGING, rate)
    if onset > 0 and late > departure_ratio * onset:
        return report(
            Behavior.DIVERGING,
            secant,
            note=f"left the origin: late RMS is {late / onset:.3g} times the initial peak",
        )
    if peak_t.size < MIN_PEAKS:
        return report(Behavior.INDETERMINATE, rate, note="too few peaks")
    if rate < -tol_rate:
        return report(Behavior.CONVERGING, rate)

    maxima_t, _ = find_peaks(t_win, v_win)
    period = _consistent_period(maxima_t)
    if period is not None:
        return report(Behavior.OSCILLATING, rate, period)
    return report(Behavior.INDETERMINATE, rate, note="neutral envelope without a steady period")


@dataclass(frozen=True)
class SweepPoint:
    tau: float
    amplitude: float
    verdict: Optional[Behavior]
    growth_rate: float
    error: Optional[str] = None


def sweep_amplitude(
    variant: DelayVariant | str,
    params: SystemParams,
    tau_grid: Sequence[float],
    history: HistoryLike,
    t_end: float,
    dt: Optional[float] = None,
    *,
    settle_fraction: float = 0.3,
    component: str = "x",
) -> list[SweepPoint]:
    """One simulation and classification per delay; failures stay in place."""
    taus = [float(t) for t in tau_grid]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau_grid must be strictly increasing")
    points = []
    for tau in taus:
        try:
            traj = integrate(variant, params, tau, history, t_end, dt)
            rep = classify_trajectory(traj, settle_fraction, component=component)
        except (IntegrationError, ValueError) as exc:
            points.append(SweepPoint(tau, math.nan, None, math.nan, str(exc)))
            continue
        points.append(SweepPoint(tau, rep.late_amplitude, rep.verdict, rep.growth_rate))
    return points

"""Method-of-steps integration of the delayed systems.

Classical RK4 on a uniform grid.  The delayed coordinate at a stage time
t - tau is read from the constant history when t - tau <= 0, and otherwise
from a cubic Hermite interpolant built on the stored states and derivatives
of the already computed solution.  Requiring dt <= tau keeps every lookup,
including the one at t - tau + dt, inside completed steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numba import njit

from .model import DelayVariant, State, SystemParams

OVERFLOW_LIMIT = 1e6
MAX_STEPS = 50_000_000  # two (n, 3) float arrays; about 2.4 GB at the limit

# index of the coordinate read with a lag, per variant code 0/1/2 = A/B/C
_LAG_INDEX = {DelayVariant.A: 1, DelayVariant.B: 0, DelayVariant.C: 2}
_CODE = {DelayVariant.A: 0, DelayVariant.B: 1, DelayVariant.C: 2}


@dataclass(frozen=True)
class HistorySpec:
    """Constant initial function on [-tau, 0]."""

    values: State
    kind: str = "constant"

    def __post_init__(self):
        if self.kind != "constant":
            raise ValueError(f"only constant histories are supported, got {self.kind!r}")
        values = State(*(float(v) for v in self.values))
        if not all(math.isfinite(v) for v in values):
            raise ValueError("history values must be finite")
        object.__setattr__(self, "values", values)


HistoryLike = Union[HistorySpec, Sequence[float]]


def _as_history(history: HistoryLike) -> HistorySpec:
    if isinstance(history, HistorySpec):
        return history
    if len(history) != 3:
        raise ValueError("history needs exactly three values (x, y, z)")
    return HistorySpec(State(*history))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 3)
    derivatives: np.ndarray  # shape (n, 3), right-hand side at each grid point
    tau: float
    dt: float
    history: State
    aborted: bool = False
    abort_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.times)

    def component(self, name: str) -> np.ndarray:
        return self.states[:, "xyz".index(name)]

    def window(self, t_start: float, t_stop: float) -> np.ndarray:
        mask = (self.times >= t_start) & (self.times <= t_stop)
        return self.states[mask]


class IntegrationError(ValueError):
    pass


def default_dt(tau: float, t_end: float) -> float:
    """Largest step <= min(tau / 50, 1e-3) that divides t_end exactly."""
    target = min(tau / 50.0, 1e-3) if tau > 0 else 1e-3
    n = math.ceil(t_end / target - 1e-9)
    return t_end / n


def _steps(t_end: float, dt: float) -> int:
    if not (t_end > 0 and math.isfinite(t_end)):
        raise IntegrationError(f"t_end must be positive and finite, got {t_end}")
    if not (dt > 0 and math.isfinite(dt)):
        raise IntegrationError(f"dt must be positive, got {dt}")
    n = round(t_end / dt)
    if n < 1 or abs(n * dt - t_end) > 1e-9 * t_end:
        raise IntegrationError(f"dt={dt} does not divide t_end={t_end}")
    if n > MAX_STEPS:
        raise IntegrationError(f"{n} steps requested, limit is {MAX_STEPS}; pass a larger dt")
    return n


@njit(cache=True)
def _field(code, a, b, c, d, x, y, z, lag):
    dy = b * x + d * y - x * z
    if code == 0:
        return a * (lag - x), dy, -c * z + x * y
    if code == 1:
        return a * (y - lag), dy, -c * z + x * y
    return a * (y - x), dy, -c * lag + x * y


@njit(cache=True)
def hermite(y0, f0, y1, f1, h, theta):
    """Cubic Hermite interpolant on [t0, t0 + h] at t0 + theta*h."""
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + theta) * h * f0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * f1
    )


@njit(cache=True)
def _lagged(X, F, k, hist, s, jmax, dt):
    # s is the lookup time in units of dt; jmax the last usable left node
    if s <= 0.0 or jmax < 0:
        return hist
    j = int(math.floor(s))
    if j > jmax:
        j = jmax
    theta = s - j
    return hermite(X[j, k], F[j, k], X[j + 1, k], F[j + 1, k], dt, theta)


@njit(cache=True)
def _dde_kernel(code, k, a, b, c, d, tau, h0, h1, h2, n, dt, limit):
    X = np.empty((n + 1, 3))
    F = np.empty((n + 1, 3))
    X[0, 0] = h0
    X[0, 1] = h1
    X[0, 2] = h2
    hist = X[0, k]
    delayed = tau > 0.0
    m = tau / dt
    half = 0.5 * dt

    lag = _lagged(X, F, k, hist, -m, 0, dt) if delayed else X[0, k]
    F[0, 0], F[0, 1], F[0, 2] = _field(code, a, b, c, d, h0, h1, h2, lag)

    for i in range(n):
        x = X[i, 0]
        y = X[i, 1]
        z = X[i, 2]
        k1x = F[i, 0]
        k1y = F[i, 1]
        k1z = F[i, 2]

        x2 = x + half * k1x
        y2 = y + half * k1y
        z2 = z + half * k1z
        if delayed:
            lag = _lagged(X, F, k, hist, i + 0.5 - m, i - 1, dt)
        else:
            lag = (x2, y2, z2)[k]
        k2x, k2y, k2z = _field(code, a, b, c, d, x2, y2, z2, lag)

        x3 = x + half * k2x
        y3 = y + half * k2y
        z3 = z + half * k2z
        if not delayed:
            lag = (x3, y3, z3)[k]
        k3x, k3y, k3z = _field(code, a, b, c, d, x3, y3, z3, lag)

        x4 = x + dt * k3x
        y4 = y + dt * k3y
        z4 = z + dt * k3z
        if delayed:
            lag = _lagged(X, F, k, hist, i + 1.0 - m, i - 1, dt)
        else:
            lag = (x4, y4, z4)[k]
        k4x, k4y, k4z = _field(code, a, b, c, d, x4, y4, z4, lag)

        xn = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yn = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        zn = z + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (abs(xn) <= limit and abs(yn) <= limit and abs(zn) <= limit):
            return X[: i + 1], F[: i + 1], i + 1
        X[i + 1, 0] = xn
        X[i + 1, 1] = yn
        X[i + 1, 2] = zn

        lag = _lagged(X, F, k, hist, i + 1.0 - m, i, dt) if delayed else X[i + 1, k]
        F[i + 1, 0], F[i + 1, 1], F[i + 1, 2] = _field(code, a, b, c, d, xn, yn, zn, lag)
    return X, F, -1


@njit(cache=True)
def _ode_kernel(a, b, c, d, h0, h1, h2, n, dt, limit):
    X = np.empty((n + 1, 3))
    F = np.empty((n + 1, 3))
    X[0, 0] = h0
    X[0, 1] = h1
    X[0, 2] = h2
    half = 0.5 * dt
    for i in range(n + 1):
        x = X[i, 0]
        y = X[i, 1]
        z = X[i, 2]
        k1x, k1y, k1z = _field(2, a, b, c, d, x, y, z, z)
        F[i, 0] = k1x
        F[i, 1] = k1y
        F[i, 2] = k1z
        if i == n:
            break
        x2 = x + half * k1x
        y2 = y + half * k1y
        z2 = z + half * k1z
        k2x, k2y, k2z = _field(2, a, b, c, d, x2, y2, z2, z2)
        x3 = x + half * k2x
        y3 = y + half * k2y
        z3 = z + half * k2z
        k3x, k3y, k3z = _field(2, a, b, c, d, x3, y3, z3, z3)
        x4 = x + dt * k3x
        y4 = y + dt * k3y
        z4 = z + dt * k3z
        k4x, k4y, k4z = _field(2, a, b, c, d, x4, y4, z4, z4)
        xn = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        yn = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        zn = z + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (abs(xn) <= limit and abs(yn) <= limit and abs(zn) <= limit):
            return X[: i + 1], F[: i + 1], i + 1
        X[i + 1, 0] = xn
        X[i + 1, 1] = yn
        X[i + 1, 2] = zn
    return X, F, -1


def _wrap(X, F, abort_index, tau, dt, history) -> Trajectory:
    for arr in (X, F):
        arr.flags.writeable = False
    times = np.arange(len(X)) * dt
    times.flags.writeable = False
    aborted = abort_index >= 0
    return Trajectory(
        times=times,
        states=X,
        derivatives=F,
        tau=float(tau),
        dt=float(dt),
        history=history.values,
        aborted=aborted,
        abort_time=abort_index * dt if aborted else None,
    )


def integrate(
    variant: DelayVariant | str,
    params: SystemParams,
    tau: float,
    history: HistoryLike,
    t_end: float,
    dt: Optional[float] = None,
) -> Trajectory:
    """Integrate one delayed variant from a constant history.

    Components exceeding 1e6 in magnitude stop the run; the returned record
    then ends at the last admissible state and ``aborted`` is set.
    """
    variant = DelayVariant.parse(variant)
    history = _as_history(history)
    tau = float(tau)
    if not (tau >= 0 and math.isfinite(tau)):
        raise IntegrationError(f"tau must be non-negative, got {tau}")
    if dt is None:
        dt = default_dt(tau, t_end)
    n = _steps(t_end, dt)
    if tau > 0 and dt > tau * (1 + 1e-12):
        raise IntegrationError(f"dt={dt} exceeds tau={tau}; lookups would leave the history")
    h = history.values
    X, F, abort_index = _dde_kernel(
        _CODE[variant], _LAG_INDEX[variant], *params.as_tuple(), tau,
        h.x, h.y, h.z, n, float(dt), OVERFLOW_LIMIT,
    )
    return _wrap(X, F, abort_index, tau, dt, history)


def integrate_ode(
    params: SystemParams, initial: HistoryLike, t_end: float, dt: float = 1e-3
) -> Trajectory:
    """Undelayed general Lorenz system, same RK4 scheme."""
    initial = _as_history(initial)
    n = _steps(t_end, dt)
    h = initial.values
    X, F, abort_index = _ode_kernel(*params.as_tuple(), h.x, h.y, h.z, n, float(dt), OVERFLOW_LIMIT)
    return _wrap(X, F, abort_index, 0.0, dt, initial)


def dense_state(traj: Trajectory, t: float) -> State:
    """Evaluate the solution at any t in [-tau, t_last] from the stored record."""
    if t <= 0.0:
        return traj.history if t < 0.0 else State(*traj.states[0])
    s = t / traj.dt
    last = len(traj) - 1
    if s > last * (1 + 1e-12):
        raise ValueError(f"t={t} lies beyond the integrated range")
    j = min(int(math.floor(s)), last - 1)
    theta = s - j
    X, F = traj.states, traj.derivatives
    return State(
        *(hermite(X[j, k], F[j, k], X[j + 1, k], F[j + 1, k], traj.dt, theta) for k in range(3))
    )

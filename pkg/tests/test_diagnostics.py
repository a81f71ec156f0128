import math

import numpy as np
import pytest

from delay_lorenz import (
    Behavior,
    Stability,
    SystemParams,
    classify_delay,
    classify_trajectory,
    estimate_period,
    hopf_report,
    integrate,
    integrate_ode,
    sweep_amplitude,
)
from delay_lorenz.dde import Trajectory
from delay_lorenz.diagnostics import find_peaks

from conftest import HISTORY

A_PARAMS = SystemParams(10.0, -4.0, 2.5, 2.0)
B_PARAMS = SystemParams(10.0, 2.0, 2.5, -4.0)


def synthetic(x, t_end=50.0, dt=1e-3, aborted=False):
    t = np.arange(0.0, t_end + dt / 2, dt)
    v = x(t)
    states = np.column_stack([v, np.zeros_like(v), v])
    return Trajectory(t, states, np.zeros_like(states), 0.0, dt, (0, 0, 0),
                      aborted, t[-1] + dt if aborted else None)


class TestSynthetic:
    def test_damped(self):
        rep = classify_trajectory(synthetic(lambda t: np.exp(-0.5 * t) * np.sin(5 * t), 20.0))
        assert rep.verdict is Behavior.CONVERGING
        assert rep.growth_rate == pytest.approx(-0.5, abs=0.02)

    def test_sustained(self):
        rep = classify_trajectory(synthetic(lambda t: np.sin(3.2376 * t)))
        assert rep.verdict is Behavior.OSCILLATING
        assert rep.period == pytest.approx(2 * math.pi / 3.2376, rel=0.01)
        assert abs(rep.growth_rate) < 0.01

    def test_growing(self):
        rep = classify_trajectory(synthetic(lambda t: np.exp(0.2 * t) * np.sin(4 * t), 30.0))
        assert rep.verdict is Behavior.DIVERGING
        assert rep.growth_rate == pytest.approx(0.2, abs=0.02)

    def test_aborted(self):
        rep = classify_trajectory(synthetic(lambda t: np.exp(0.5 * t), 20.0, aborted=True))
        assert rep.verdict is Behavior.DIVERGING
        assert rep.growth_rate > 0
        assert rep.abort_time == pytest.approx(20.001)

    def test_saturated_departure(self):
        # leaves a tiny start and settles on a large steady oscillation
        x = lambda t: np.minimum(1e-4 * np.exp(0.5 * t), 10.0) * np.sin(6 * t)
        rep = classify_trajectory(synthetic(x, 50.0))
        assert rep.verdict is Behavior.DIVERGING
        assert rep.growth_rate > 0

    def test_chaos_is_indeterminate(self):
        tr = integrate_ode(SystemParams(10, 28, 8 / 3, -1), (1, 1, 1), 100.0)
        rep = classify_trajectory(tr)
        assert rep.verdict is Behavior.INDETERMINATE
        assert rep.period is None

    def test_constant_has_no_period(self):
        tr = synthetic(lambda t: np.full_like(t, 2.0))
        assert estimate_period(tr) is None
        assert classify_trajectory(tr).verdict is Behavior.INDETERMINATE

    def test_period_of_fast_sine(self):
        tr = synthetic(lambda t: np.sin(7.9396 * t), 20.0)
        assert estimate_period(tr, "z") == pytest.approx(0.7914, rel=0.005)

    def test_short_record_rejected(self):
        with pytest.raises(ValueError):
            classify_trajectory(synthetic(lambda t: np.sin(t), 0.1))
        with pytest.raises(ValueError):
            classify_trajectory(synthetic(lambda t: np.sin(t)), settle_fraction=1.0)

    def test_peak_refinement(self):
        t = np.arange(0, 10, 0.05)
        pt, pv = find_peaks(t, np.cos(2 * t - 0.3))
        assert pt[0] == pytest.approx(0.15, abs=1e-3)
        assert pv == pytest.approx(np.ones_like(pv), abs=1e-4)


class TestSimulated:
    def test_a_at_critical_delay(self):
        rep = hopf_report("A", A_PARAMS)
        tr = integrate("A", A_PARAMS, rep.tau0, HISTORY, 100.0, 1e-3)
        out = classify_trajectory(tr)
        assert out.verdict is Behavior.OSCILLATING
        assert out.period == pytest.approx(2 * math.pi / rep.crossings[0].omega0, rel=0.05)

    def test_b_at_critical_delay(self):
        rep = hopf_report("B", B_PARAMS)
        tr = integrate("B", B_PARAMS, rep.tau0, HISTORY, 100.0, 1e-3)
        assert estimate_period(tr) == pytest.approx(2 * math.pi / rep.crossings[0].omega0, rel=0.05)

    @pytest.mark.parametrize(
        "variant, params, component",
        [("A", A_PARAMS, "x"), ("B", B_PARAMS, "x"), ("C", A_PARAMS, "z")],
    )
    @pytest.mark.parametrize("factor", [0.8, 1.1])
    def test_spectral_and_temporal_verdicts_agree(self, variant, params, component, factor):
        rep = hopf_report(variant, params)
        tau = factor * rep.tau0
        predicted = classify_delay(rep, tau).kind
        observed = classify_trajectory(
            integrate(variant, params, tau, HISTORY, 100.0, 1e-3), component=component
        ).verdict
        expected = {
            Stability.ASYMPTOTICALLY_STABLE: {Behavior.CONVERGING},
            Stability.UNSTABLE: {Behavior.DIVERGING},
        }[predicted]
        assert observed in expected


class TestSweep:
    def test_a_sequence(self):
        pts = sweep_amplitude("A", A_PARAMS, [0.17, 0.2173, 0.25], HISTORY, 100.0, 1e-3)
        assert [p.verdict for p in pts] == [
            Behavior.CONVERGING, Behavior.OSCILLATING, Behavior.DIVERGING
        ]
        assert [p.tau for p in pts] == [0.17, 0.2173, 0.25]

    def test_b_sequence(self):
        pts = sweep_amplitude("B", B_PARAMS, [0.16, 0.18505, 0.19], HISTORY, 100.0, 1e-3)
        assert [p.verdict for p in pts] == [
            Behavior.CONVERGING, Behavior.OSCILLATING, Behavior.DIVERGING
        ]

    def test_empty(self):
        assert sweep_amplitude("A", A_PARAMS, [], HISTORY, 100.0) == []

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            sweep_amplitude("A", A_PARAMS, [0.2, 0.1], HISTORY, 10.0)

    def test_failures_stay_inline(self):
        # dt = 0.01 exceeds the first delay only
        pts = sweep_amplitude("A", A_PARAMS, [0.005, 0.17], HISTORY, 20.0, 0.01)
        assert pts[0].verdict is None and "exceeds" in pts[0].error
        assert math.isnan(pts[0].amplitude)
        assert pts[1].verdict is Behavior.CONVERGING

    def test_amplitude_grows_through_critical_delay(self):
        tau0 = hopf_report("A", A_PARAMS).tau0
        grid = np.linspace(0.8 * tau0, 1.2 * tau0, 10)
        amps = [p.amplitude for p in sweep_amplitude("A", A_PARAMS, grid, HISTORY, 100.0, 1e-3)]
        for lo, hi in zip(amps, amps[1:]):
            assert hi >= 0.95 * lo

    def test_reports_are_plain_floats(self):
        (p,) = sweep_amplitude("A", A_PARAMS, [0.17], HISTORY, 20.0)
        assert type(p.growth_rate) is float and type(p.amplitude) is float

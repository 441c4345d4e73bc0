import math

import numpy as np
import pytest

from analysis import (
    CRITICAL_PULSED,
    MARKOVIAN,
    NON_MARKOVIAN,
    ExponentTable,
    analysis_window,
    bracket_critical_lambda,
    classify_regime,
    critical_lambda_scan,
    eternal_nm_check,
    find_critical_lambda,
    g_function,
    intensity_epsilon,
    leading_order_gamma3,
    local_exponent,
    peak_intensity,
    reabsorption_scan,
    relaxation_time,
    simulate,
    trace_extrema,
)
from analytic import single_extrema, single_trace
from model import BracketError, ExponentDataError, IncompleteTraceError, UndefinedRateError

GAMMA0 = 1e-3


class TestRegimes:
    def test_broad_line_is_markovian(self, make_params):
        report = classify_regime(simulate(make_params(1, 5.0)))
        assert report.regime == MARKOVIAN
        assert report.zero_touch_times == ()
        assert report.min_intensity >= -intensity_epsilon(make_params(1, 5.0))

    def test_narrow_line_reabsorbs(self, make_params):
        p = make_params(1, 0.5)
        report = classify_regime(simulate(p))
        assert report.regime == NON_MARKOVIAN
        exact = single_extrema(p)
        assert report.t_max == pytest.approx(exact.max[0], rel=1e-4)
        assert report.max_intensity == pytest.approx(exact.max[1], rel=1e-6)
        assert report.min_intensity == pytest.approx(exact.min[1], rel=1e-5)

    @pytest.mark.parametrize("ratio", [0.5, 5.0])
    def test_halving_epsilon_keeps_regime(self, make_params, ratio):
        p = make_params(1, ratio)
        trace = simulate(p)
        assert classify_regime(trace, intensity_epsilon(p) / 2).regime == classify_regime(trace).regime

    def test_incomplete_trace(self, make_params):
        p = make_params(1, 0.5)
        t_max = single_extrema(p).max[0]
        trace = single_trace(p, np.linspace(0.0, 0.5 * t_max, 101))
        with pytest.raises(IncompleteTraceError, match="before its intensity maximum"):
            classify_regime(trace)

    def test_report_serialises_with_units(self, make_params):
        payload = classify_regime(simulate(make_params(1, 0.5))).to_dict()
        assert payload["regime"] == NON_MARKOVIAN
        assert {"min_intensity_omega0", "t_max_over_omega0_inv", "epsilon_intensity_omega0"} <= set(payload)

    def test_window(self, make_params):
        broad, narrow = make_params(4, 10.0), make_params(4, 0.5)
        assert analysis_window(broad) == pytest.approx(50 / (GAMMA0 / 10))
        assert analysis_window(narrow) == pytest.approx(5 * 2 * math.pi * math.sqrt(2) / (2 * GAMMA0))

    def test_unknown_solver(self, make_params):
        with pytest.raises(ValueError, match="unknown solver"):
            simulate(make_params(3, 1.0), "euler")


class TestCriticalLambda:
    def test_single_emitter(self, make_params):
        lam = find_critical_lambda(make_params(1))
        assert lam / GAMMA0 == pytest.approx(math.sqrt(2.0), rel=1e-3)

    def test_two_emitters(self, make_params):
        lam = find_critical_lambda(make_params(2))
        assert lam / GAMMA0 == pytest.approx(0.9024, rel=1e-2)

    def test_pulsed_emission_at_threshold(self, make_params):
        p = make_params(2)
        lo, hi = bracket_critical_lambda(p, rel_width=1e-9, solver="analytic")
        assert hi > lo
        report = classify_regime(simulate(p.with_lambda(hi), "analytic"))
        assert report.regime == CRITICAL_PULSED
        assert len(report.zero_touch_times) >= 1
        assert classify_regime(simulate(p.with_lambda(lo), "analytic")).regime == NON_MARKOVIAN

    @pytest.mark.parametrize("ratio, regime", [
        (0.85, NON_MARKOVIAN),
        (0.9024, CRITICAL_PULSED),
        (0.95, MARKOVIAN),
    ])
    def test_regimes_around_quoted_two_emitter_width(self, make_params, ratio, regime):
        p = make_params(2, ratio)
        report = classify_regime(simulate(p))
        assert report.regime == regime
        if regime == CRITICAL_PULSED:
            assert len(report.zero_touch_times) >= 1
            assert abs(report.min_intensity) <= intensity_epsilon(p)

    def test_reproducible_across_tolerances(self, make_params):
        values = [find_critical_lambda(make_params(3, abs_tol=tol, rel_tol=tol), rel_width=1e-2, solver="pseudomode")
                  for tol in (1e-7, 1e-9)]
        assert values[0] == pytest.approx(values[1], rel=1e-2)

    @pytest.mark.parametrize("bracket, message", [
        ((3.0, 4.0), "lower end"),
        ((0.2, 0.5), "upper end"),
        ((2.0, 1.0), "0 < lo < hi"),
    ])
    def test_bad_brackets(self, make_params, bracket, message):
        with pytest.raises(BracketError, match=message):
            find_critical_lambda(make_params(1), bracket=(bracket[0] * GAMMA0, bracket[1] * GAMMA0))

    def test_scan_keeps_input_order(self, make_params):
        values = critical_lambda_scan(make_params(1), [2, 1], rel_width=1e-2)
        assert values.shape == (2,)
        assert values[1] / GAMMA0 == pytest.approx(math.sqrt(2.0), rel=1e-2)
        assert values[0] / GAMMA0 == pytest.approx(0.9024, rel=2e-2)

    @pytest.mark.slow
    def test_increases_with_atom_number(self, make_params):
        n_list = [2, 3, 5, 8, 12, 20, 30, 50]
        values = critical_lambda_scan(make_params(1), n_list, threads=4)
        assert np.all(np.diff(values) > 0)


class TestExponent:
    def test_table(self):
        table = ExponentTable.from_maxima([10, 20, 40], [1.0, 4.0, 12.0])
        np.testing.assert_allclose(table.nu, [2.0, math.log(3) / math.log(2)])
        rows = table.rows()
        assert [(row.n_atoms, row.n_next) for row in rows] == [(10, 20), (20, 40)]
        assert rows[0].max_intensity == 1.0

    @pytest.mark.parametrize("n_values, maxima, message", [
        ([10], [1.0], "at least two"),
        ([10, 10], [1.0, 2.0], "equal consecutive"),
        ([20, 10], [1.0, 2.0], "increasing"),
        ([10, 20], [1.0, 0.0], "positive"),
        ([10, 20], [1.0, float("nan")], "positive"),
    ])
    def test_table_rejects_bad_data(self, n_values, maxima, message):
        with pytest.raises(ExponentDataError, match=message):
            ExponentTable.from_maxima(n_values, maxima)

    def test_single_emitter_peak_falls_with_width(self, make_params):
        peaks = [single_extrema(make_params(1, r)).max[1] for r in np.linspace(0.05, 20.0, 200)]
        assert np.all(np.diff(peaks) < 0)

    def test_two_emitter_peak_falls_with_width(self, make_params):
        ratios = [0.3, 0.6, 0.9024, 1.5, 3.0, 6.0]
        peaks = [peak_intensity(make_params(2, r), "analytic")[1] for r in ratios]
        assert np.all(np.diff(peaks) < 0)

    def test_duplicate_atom_numbers(self, make_params):
        with pytest.raises(ExponentDataError, match="equal entries"):
            local_exponent(make_params(1, 1.0), [4, 8, 4])

    def test_markovian_cascade_limit(self, make_params):
        n_list = [25, 45, 65, 85, 105]
        p = make_params(1, 100.0 * math.sqrt(105))
        table = local_exponent(p, n_list, solver="cascade")
        np.testing.assert_allclose(table.nu, 2.0, atol=0.1)

    @pytest.mark.slow
    def test_tavis_cummings_limit(self, make_params):
        table = local_exponent(make_params(1, 0.0), [100, 200, 400], solver="pseudomode")
        np.testing.assert_allclose(table.nu, 1.5, atol=0.1)


class TestReabsorption:
    def test_depth_shrinks_with_width(self, make_params):
        ratios = [0.3, 0.5, 0.8, 1.0]
        table = reabsorption_scan(make_params(1), [1], [r * GAMMA0 for r in ratios])
        depth = table.depth[0]
        assert np.all(depth > 0)
        assert np.all(np.diff(depth) < 0)
        exact = [-single_extrema(make_params(1, r)).min[1] for r in ratios]
        np.testing.assert_allclose(depth, exact, rtol=1e-5)

    def test_no_depth_beyond_critical_width(self, make_params):
        table = reabsorption_scan(make_params(1), [1, 2], [0.5 * GAMMA0, 1.0 * GAMMA0, 1.6 * GAMMA0])
        assert table.depth.shape == (2, 3)
        assert table.depth[0, 2] == 0.0
        assert table.depth[1, 1] == 0.0 and table.depth[1, 2] == 0.0
        assert table.depth[1, 0] > 0
        assert table.slopes.shape == (1, 3)
        assert np.isfinite(table.slopes[0, 0]) and np.isnan(table.slopes[0, 2])

    @pytest.mark.slow
    def test_superabsorption_is_superlinear(self, make_params):
        table = reabsorption_scan(make_params(1), [50, 100, 200], [0.2 * GAMMA0], threads=3)
        assert np.all(table.depth > 0)
        assert np.all(table.slopes > 1.0)


class TestRelaxationTime:
    def test_estimate(self, make_params):
        estimate = relaxation_time(make_params(100, 10.0))
        assert estimate.tau_r == pytest.approx(200.0)
        assert estimate.indicator == pytest.approx(1.0)

    def test_lossless(self, make_params):
        with pytest.raises(UndefinedRateError):
            relaxation_time(make_params(100, 0.0))


class TestEternalNonMarkovianity:
    def test_g_function_limits(self):
        assert g_function(0.0) == 0.0
        assert g_function(1e3) == -1.0
        assert isinstance(g_function(1.0), float)

    def test_g_function_negative(self):
        tau = np.linspace(0.0, 20.0, 1001)[1:]
        assert np.all(g_function(tau) < 0)

    def test_small_tau_expansion(self):
        tau = np.array([1e-3, 1e-2, 5e-2])
        series = -tau ** 5 / 18 + 41 * tau ** 6 / 540 - tau ** 7 / 18
        np.testing.assert_allclose(g_function(tau), series, rtol=1e-3)

    def test_leading_order_scale(self):
        assert leading_order_gamma3(1e-3, 1e-2, 1e2) == pytest.approx(3e-18 / 1e-10 * g_function(1.0))

    @pytest.mark.parametrize("ratio", [10.0, 100.0])
    def test_exact_rate_negative(self, ratio):
        lam = ratio * GAMMA0
        report = eternal_nm_check(GAMMA0, lam, np.linspace(0.0, 20.0 / lam, 41))
        assert report.g_at_zero == 0.0 and report.g_limit == -1.0
        assert report.g_negative
        assert report.gamma3_negative

    def test_residual_shrinks_with_width(self):
        residuals = []
        for ratio in (10.0, 100.0):
            lam = ratio * GAMMA0
            report = eternal_nm_check(GAMMA0, lam, np.array([0.5, 1.0, 2.0]) / lam)
            residuals.append(report.relative_residual[1])
        assert 100 / 3 <= residuals[0] / residuals[1] <= 300
        assert residuals[1] < 1e-2


def test_trace_extrema_refines_between_samples(make_params):
    p = make_params(1, 0.5)
    exact = single_extrema(p)
    trace = single_trace(p, np.linspace(0.0, 1.5 * exact.min[0], 301))
    (t_max, i_max), (t_min, i_min) = trace_extrema(trace)
    spacing = trace.times[1] - trace.times[0]
    assert abs(t_max - exact.max[0]) < 0.1 * spacing
    assert i_max == pytest.approx(exact.max[1], rel=1e-4)
    assert i_min == pytest.approx(exact.min[1], rel=1e-4)

# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

import numpy as np
import pytest

from phillips_lf.exceptions import InsufficientDataError, SeriesError, UnsupportedTestError
from phillips_lf.series_core import AnnualSeries
from phillips_lf.stattests import (
    CADF_CRITICAL_1PCT,
    DeterministicSpec,
    adf_test,
    engle_granger_cadf,
    johansen_trace,
    monte_carlo_rejection_rate,
    newey_west_bandwidth,
    pp_test,
    random_walk,
    run_test,
    white_noise,
)


def cointegrated_pair(rng, n=100, sd=0.01):
    y1 = random_walk(rng, n, label="y1")
    y2 = AnnualSeries.from_array(y1.start_year, y1.array + sd * rng.standard_normal(n), label="y2")
    return y1, y2


def dense_johansen_eigenvalues(levels, k_ar_diff):
    """Eigenvalues of S11^-1 S10 S00^-1 S01 from residuals of dy(t) and y(t-1) on k lagged differences."""
    dy = np.diff(levels, axis=0)
    dep = dy[k_ar_diff:]
    lagged = levels[k_ar_diff:-1]
    Z = np.hstack([dy[k_ar_diff - j : dy.shape[0] - j] for j in range(1, k_ar_diff + 1)])
    r0 = dep - Z @ np.linalg.lstsq(Z, dep, rcond=None)[0]
    r1 = lagged - Z @ np.linalg.lstsq(Z, lagged, rcond=None)[0]
    n = dep.shape[0]
    s00, s11, s01 = r0.T @ r0 / n, r1.T @ r1 / n, r0.T @ r1 / n
    eig = np.linalg.eigvals(np.linalg.solve(s11, s01.T @ np.linalg.solve(s00, s01))).real
    return np.sort(eig)[::-1], n


class TestAdf:
    def test_ramp_is_degenerate(self):
        report = adf_test(AnnualSeries.from_array(1970, np.arange(30.0)))
        assert report.degenerate
        assert report.statistics == {}
        assert not report.rejects("5%")

    def test_constant_is_degenerate(self):
        report = adf_test(AnnualSeries.from_array(1970, [0.3] * 30))
        assert report.degenerate
        assert report.reason == "series is constant"

    def test_white_noise_rejects(self, rng):
        report = adf_test(white_noise(rng, 200))
        assert report.status == "ok"
        assert report.rejects("5%")
        assert 0 <= report.settings["lags"] <= 4
        assert set(report.critical_values["adf"]) == {"1%", "5%", "10%"}

    def test_scale_invariance(self, rng):
        x = random_walk(rng, 120)
        scaled = AnnualSeries.from_array(x.start_year, 2.5 * x.array)
        assert adf_test(scaled).statistics["adf"] == pytest.approx(adf_test(x).statistics["adf"], rel=1e-10)

    def test_translation_invariance_with_constant(self, rng):
        x = random_walk(rng, 120)
        moved = AnnualSeries.from_array(x.start_year, x.array + 40.0)
        assert adf_test(moved).statistics["adf"] == pytest.approx(adf_test(x).statistics["adf"], rel=1e-9)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            adf_test(AnnualSeries.from_array(1970, np.arange(7.0) ** 2), max_lag=4)

    def test_record(self, rng):
        record = adf_test(white_noise(rng, 60, label="wn")).to_record()
        assert record["test"] == "adf"
        assert record["series"] == "wn"
        assert "stat.adf" in record
        assert "cv.adf.5%" in record


class TestPhillipsPerron:
    def test_bandwidth_rule(self):
        assert newey_west_bandwidth(100) == 4
        assert newey_west_bandwidth(43) == 3

    def test_zero_bandwidth_matches_dickey_fuller(self, rng):
        x = random_walk(rng, 80)
        pp = pp_test(x, bandwidth=0)
        df = adf_test(x, max_lag=0)
        assert pp.statistics["z_t"] == pytest.approx(df.statistics["adf"], rel=1e-6)

    def test_statistics(self, rng):
        report = pp_test(white_noise(rng, 100))
        assert set(report.statistics) == {"z_rho", "z_t"}
        assert report.settings["bandwidth"] == 4
        assert report.rejects("5%", "z_t")

    def test_scale_invariance(self, rng):
        x = random_walk(rng, 120)
        base = pp_test(x)
        scaled = pp_test(AnnualSeries.from_array(x.start_year, 0.01 * x.array))
        for name, value in base.statistics.items():
            assert scaled.statistics[name] == pytest.approx(value, rel=1e-10)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            pp_test(AnnualSeries.from_array(1970, np.arange(9.0) ** 2))


class TestCadf:
    def test_identical_curves_are_degenerate(self, rng):
        x = random_walk(rng, 43)
        report = engle_granger_cadf(x, x)
        assert report.degenerate
        assert "identically zero" in report.reason

    def test_critical_values(self, rng):
        measured, predicted = cointegrated_pair(rng)
        report = engle_granger_cadf(predicted, measured)
        assert report.critical_values["adf"]["1%"] == CADF_CRITICAL_1PCT
        assert report.critical_values["z_t"]["1%"] == CADF_CRITICAL_1PCT
        assert report.critical_values["adf"]["5%"] < -3.0
        assert set(report.statistics) == {"adf", "z_t", "z_rho"}
        assert report.rejects("5%", "adf")

    def test_misaligned(self, rng):
        x = random_walk(rng, 40)
        with pytest.raises(SeriesError):
            engle_granger_cadf(x, x.window(1801, 1839))

    def test_too_short(self, rng):
        x = random_walk(rng, 14)
        with pytest.raises(InsufficientDataError):
            engle_granger_cadf(x, x)


class TestJohansen:
    def test_identical_series_are_degenerate(self, rng):
        x = random_walk(rng, 60)
        report = johansen_trace(x, x)
        assert report.degenerate
        assert report.rank is None

    def test_cointegrated_pair(self, rng):
        y1, y2 = cointegrated_pair(rng)
        report = johansen_trace(y1, y2)
        assert report.rejects("5%", "trace_r0")
        assert report.rank >= 1
        assert report.settings["k_ar_diff"] == 3
        assert report.extra["max_eigenvalue"] == max(report.extra["eigenvalues"])

    def test_matches_the_dense_eigenproblem(self, rng):
        y1, y2 = cointegrated_pair(rng)
        report = johansen_trace(y1, y2, max_lag=4)
        eig, n = dense_johansen_eigenvalues(np.column_stack([y1.array, y2.array]), k_ar_diff=3)
        np.testing.assert_allclose(report.extra["eigenvalues"], eig, rtol=1e-7)
        assert report.statistics["trace_r0"] == pytest.approx(-n * np.log1p(-eig).sum(), rel=1e-7)
        assert report.statistics["trace_r1"] == pytest.approx(-n * np.log1p(-eig[1]), rel=1e-7)

    def test_scale_invariance(self, rng):
        y1, y2 = cointegrated_pair(rng)
        base = johansen_trace(y1, y2)
        scaled = johansen_trace(
            AnnualSeries.from_array(y1.start_year, 7.0 * y1.array), AnnualSeries.from_array(y2.start_year, 7.0 * y2.array)
        )
        for name, value in base.statistics.items():
            assert scaled.statistics[name] == pytest.approx(value, rel=1e-10, abs=1e-10)

    def test_symmetric_in_ordering(self, rng):
        y1, y2 = cointegrated_pair(rng)
        forward = johansen_trace(y1, y2)
        backward = johansen_trace(y2, y1)
        for name in ("trace_r0", "trace_r1"):
            assert backward.statistics[name] == pytest.approx(forward.statistics[name], rel=1e-8)
        assert backward.rank == forward.rank

    def test_too_short(self, rng):
        y1, y2 = cointegrated_pair(rng, n=13)
        with pytest.raises(InsufficientDataError):
            johansen_trace(y1, y2, max_lag=4)


def test_unsupported_test_is_usage_error(rng):
    with pytest.raises(UnsupportedTestError) as excinfo:
        run_test("kpss", white_noise(rng))
    assert excinfo.value.error_code == "E_USAGE"


def test_run_test_dispatch(rng):
    report = run_test("pp", white_noise(rng, 50), det=DeterministicSpec.NONE)
    assert report.test == "pp"
    assert report.settings["det"] == "none"


class TestMonteCarlo:
    def test_same_seed_same_rate(self):
        first = monte_carlo_rejection_rate(lambda g: random_walk(g, 60), adf_test, replications=20, seed=7)
        second = monte_carlo_rejection_rate(lambda g: random_walk(g, 60), adf_test, replications=20, seed=7)
        assert first == second

    def test_needs_replications(self):
        with pytest.raises(InsufficientDataError):
            monte_carlo_rejection_rate(white_noise, adf_test, replications=0, seed=0)

    @pytest.mark.slow
    @pytest.mark.parametrize(("test", "statistic"), [(adf_test, "adf"), (pp_test, "z_t")], ids=["adf", "pp"])
    def test_power_on_white_noise(self, test, statistic):
        rate = monte_carlo_rejection_rate(white_noise, test, replications=1000, seed=12, level="1%", statistic=statistic)
        assert rate >= 0.99

    @pytest.mark.slow
    def test_cadf_power_on_cointegrated_pairs(self):
        rate = monte_carlo_rejection_rate(
            lambda g: cointegrated_pair(g, n=200), engle_granger_cadf, replications=100, seed=13, statistic="adf"
        )
        assert rate >= 0.9

    @pytest.mark.slow
    def test_johansen_detects_rank_on_cointegrated_pairs(self):
        rate = monte_carlo_rejection_rate(
            cointegrated_pair, johansen_trace, replications=200, seed=14, level="1%", statistic="trace_r0"
        )
        assert rate >= 0.99

    @pytest.mark.slow
    @pytest.mark.parametrize(("test", "statistic"), [(adf_test, "adf"), (pp_test, "z_t")], ids=["adf", "pp"])
    def test_size_on_random_walks(self, test, statistic):
        rate = monte_carlo_rejection_rate(random_walk, test, replications=2000, seed=21, statistic=statistic)
        assert 0.03 <= rate <= 0.07

    @pytest.mark.slow
    def test_johansen_false_rank_on_independent_walks(self):
        def independent(g):
            return random_walk(g, 200, label="y1"), random_walk(g, 200, label="y2")

        rate = monte_carlo_rejection_rate(independent, johansen_trace, replications=500, seed=22, statistic="trace_r0")
        assert rate <= 0.10

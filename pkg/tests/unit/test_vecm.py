# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

import numpy as np
import pytest

from phillips_lf.exceptions import HorizonError, InsufficientDataError, SeriesError
from phillips_lf.series_core import AnnualSeries, SeriesUnit, YearWindow
from phillips_lf.synthetic import simulate_ecm
from phillips_lf.vecm import fit_vecm, forecast_vecm, minimum_training, rolling_rmsfe


@pytest.fixture
def ecm_pair(rng):
    return simulate_ecm(rng, gamma2=0.5, n=500)


class TestFitVecm:
    def test_recovers_adjustment_speed(self, ecm_pair):
        P, X = ecm_pair
        model = fit_vecm(P, X)
        assert model.status == "ok"
        assert model.gamma2 == pytest.approx(0.5, abs=0.1)
        assert model.stable
        assert model.gamma1 == 1.0
        assert 1 <= model.spec.selected_lag <= 4
        assert len(model.short_run) == model.spec.selected_lag - 1

    def test_correction_term_reduces_ssr(self, ecm_pair):
        model = fit_vecm(*ecm_pair)
        assert model.ssr <= model.ssr_no_correction

    def test_free_long_run_coefficient(self, ecm_pair):
        model = fit_vecm(*ecm_pair, free_gamma1=True)
        assert model.gamma1_free
        assert model.gamma1 == pytest.approx(1.0, abs=0.01)

    def test_identical_curves_are_degenerate(self, rng):
        P = AnnualSeries.from_array(1970, np.cumsum(0.02 + 0.01 * rng.standard_normal(43)), SeriesUnit.CUMULATIVE)
        model = fit_vecm(P, P)
        assert model.status == "degenerate"
        assert model.gamma2 == 0.0

    def test_warning_without_cointegration(self, ecm_pair):
        model = fit_vecm(*ecm_pair, cointegrated=False)
        assert any("cointegration" in w for w in model.warnings)

    def test_too_short(self, rng):
        P, X = simulate_ecm(rng, gamma2=0.5, n=13)
        with pytest.raises(InsufficientDataError):
            fit_vecm(P, X, max_lag=4)

    @pytest.mark.parametrize("max_lag", [0, 5])
    def test_lag_bounds(self, ecm_pair, max_lag):
        with pytest.raises(InsufficientDataError):
            fit_vecm(*ecm_pair, max_lag=max_lag)

    def test_misaligned(self, ecm_pair):
        P, X = ecm_pair
        with pytest.raises(SeriesError):
            fit_vecm(P, X.window(1501, X.end_year))

    @pytest.mark.slow
    @pytest.mark.parametrize("gamma2", [0.2, 0.5, 0.8])
    def test_adjustment_speed_coverage(self, gamma2):
        streams = np.random.SeedSequence(int(gamma2 * 100)).spawn(200)
        close = sum(
            abs(fit_vecm(*simulate_ecm(np.random.default_rng(child), gamma2=gamma2, n=500)).gamma2 - gamma2) <= 0.1
            for child in streams
        )
        assert close >= 190


class TestForecastVecm:
    def test_zero_horizon_is_empty(self, ecm_pair):
        P, X = ecm_pair
        path = forecast_vecm(fit_vecm(P, X), P, X, 0)
        assert len(path) == 0
        assert path.to_rows() == []

    def test_degenerate_model_follows_prediction(self, rng):
        X = AnnualSeries.from_array(1970, np.cumsum(0.02 + 0.01 * rng.standard_normal(48)), SeriesUnit.CUMULATIVE)
        history = X.window(1970, 2012)
        model = fit_vecm(history, history)
        path = forecast_vecm(model, history, X, 5)
        assert path.years == (2013, 2014, 2015, 2016, 2017)
        np.testing.assert_allclose(path.annual, np.diff(X.array)[-5:], atol=1e-12)
        np.testing.assert_allclose(path.cumulative, X.array[-5:], atol=1e-12)

    def test_horizon_beyond_prediction(self, ecm_pair):
        P, X = ecm_pair
        history = P.window(1500, 1980)
        model = fit_vecm(history, X.window(1500, 1980))
        with pytest.raises(HorizonError) as excinfo:
            forecast_vecm(model, history, X.window(1500, 1985), 10)
        assert excinfo.value.details["last_forecastable_year"] == 1985

    def test_path_is_cumulative_of_annual(self, ecm_pair):
        P, X = ecm_pair
        history = P.window(1500, 1900)
        path = forecast_vecm(fit_vecm(history, X.window(1500, 1900)), history, X, 4)
        np.testing.assert_allclose(np.diff([history.values[-1], *path.cumulative]), path.annual, atol=1e-12)


class TestRollingRmsfe:
    def test_minimum_training(self):
        assert minimum_training(4) == 15
        assert minimum_training(1) == 15

    def test_deterministic(self, rng):
        P, X = simulate_ecm(rng, gamma2=0.4, n=43)
        first = rolling_rmsfe(P, X, h=2)
        second = rolling_rmsfe(P, X, h=2)
        assert first.rmsfe == second.rmsfe
        assert first.n == 43 - 15 - 2 + 1
        assert first.errors.start_year == P.start_year + 15 - 1 + 2
        assert first.rmsfe == pytest.approx(float(np.sqrt(np.mean(first.errors.array**2))))

    def test_period_restricts_targets(self, rng):
        P, X = simulate_ecm(rng, gamma2=0.4, n=43)
        result = rolling_rmsfe(P, X, h=1, period=YearWindow(first_year=1530, last_year=1535))
        assert result.n == 6
        assert result.errors.start_year == 1530

    def test_no_origin(self, rng):
        P, X = simulate_ecm(rng, gamma2=0.4, n=16)
        with pytest.raises(InsufficientDataError):
            rolling_rmsfe(P, X, h=2)

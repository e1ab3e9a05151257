# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

import numpy as np
import pytest

from phillips_lf.commands.common import fit_model
from phillips_lf.ingest import load_config, load_dataset
from phillips_lf.synthetic import (
    DEFAULT_WINDOW,
    SPIKE_YEARS,
    TRUE_BREAK,
    TRUE_LAG,
    TRUTH,
    BreakParams,
    simulate_break_instance,
    simulate_ecm,
)


def test_break_instance_supports(rng):
    inst = simulate_break_instance(rng, lag=3, break_year=1990, params=TRUTH["cpi"])
    assert (inst.pi.start_year, inst.pi.end_year) == (1970, 2012)
    assert (inst.l.start_year, inst.l.end_year) == (1956, 2017)
    assert inst.u is None
    expected = -0.05 + 16.0 * inst.l.value_at(1987)
    assert inst.pi.value_at(1990) == pytest.approx(expected)
    assert inst.pi.value_at(1991) == pytest.approx(0.01 + 1.0 * inst.l.value_at(1988))


def test_break_instance_with_unemployment(rng):
    params = BreakParams(slope1=10.0, intercept1=-0.03, slope2=2.0, intercept2=0.0, gamma=-1.0)
    inst = simulate_break_instance(rng, lag=2, break_year=1995, params=params)
    assert inst.u is not None
    expected = -0.03 + 10.0 * inst.l.value_at(1978) - inst.u.value_at(1978)
    assert inst.pi.value_at(1980) == pytest.approx(expected)


def test_ecm_pair_is_seeded():
    first = simulate_ecm(np.random.default_rng(1), gamma2=0.3, n=50)
    second = simulate_ecm(np.random.default_rng(1), gamma2=0.3, n=50)
    assert first[0] == second[0]
    assert first[1].start_year == 1500
    assert len(first[1]) == 50


def test_dataset_config(synthetic):
    config, registry = synthetic
    assert set(registry) == {"l", "l_bls", "cpi", "cpi_bls", "dgdp", "u"}
    assert config.model_window == DEFAULT_WINDOW
    assert config.targets["table3.cpi_l.w1.lag"] == TRUE_LAG["cpi"]
    assert registry["cpi"].prepared.start_year == 1970
    assert 0.0 < registry["u"].prepared.value_at(1990) < 1.0


def test_spike_repair_restores_the_clean_neighbourhood(synthetic):
    _, registry = synthetic
    l = registry["l"].prepared  # noqa: E741
    for year in SPIKE_YEARS:
        neighbours = 0.5 * (l.value_at(year - 1) + l.value_at(year + 1))
        assert l.value_at(year) == pytest.approx(neighbours)


@pytest.mark.parametrize("key", ["cpi", "dgdp", "u"])
def test_noise_free_dataset_recovers_the_lag(noise_free_config, key):
    config = load_config(noise_free_config)
    registry = load_dataset(config)
    name = f"{key}_l"
    model = fit_model(config, registry, name, config.model(name), config.search_spec())
    assert model.lag == TRUE_LAG[key]
    assert abs(model.break_year - TRUE_BREAK[key]) <= 1
    assert np.sign(model.segment1.slope) == np.sign(TRUTH[key].slope1)

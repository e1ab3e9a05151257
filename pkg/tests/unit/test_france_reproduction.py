# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from pathlib import Path

import pandas as pd
import pytest

from phillips_lf.cli import main

DATA = Path(__file__).resolve().parents[2] / "phillips_lf" / "data"
CONFIG = DATA / "configs" / "france.yaml"

pytestmark = [
    pytest.mark.france,
    pytest.mark.slow,
    pytest.mark.skipif(not any((DATA / "france").glob("*.csv")), reason="France snapshot not installed"),
]


@pytest.fixture(scope="module")
def reproduction(tmp_path_factory):
    out = tmp_path_factory.mktemp("france")
    assert main(["report", str(CONFIG), "--out", str(out), "--no-figures"]) == 0
    return pd.read_csv(out / "reproduction.csv")


def test_every_target_is_reproduced(reproduction):
    assert reproduction["reproduced"].notna().all()


@pytest.mark.parametrize("field", ["lag", "forecast_horizon", "break_year"])
def test_search_outcomes_match(reproduction, field):
    rows = reproduction[reproduction["key"].str.endswith(f".{field}")]
    assert not rows.empty
    assert rows["within_tolerance"].all(), rows.to_string()


def test_descriptive_statistics_match(reproduction):
    rows = reproduction[reproduction["key"].str.startswith("table2.")]
    assert rows["within_tolerance"].all(), rows.to_string()

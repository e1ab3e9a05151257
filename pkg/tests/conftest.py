# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from pathlib import Path

import numpy as np
import pytest

from phillips_lf.ingest import load_config, load_dataset
from phillips_lf.synthetic import simulate_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20130101)


@pytest.fixture(scope="session")
def synthetic_config(tmp_path_factory) -> Path:
    """Seeded synthetic dataset shared by the whole session (read-only)."""
    return simulate_dataset(tmp_path_factory.mktemp("synthetic"), seed=0)


@pytest.fixture(scope="session")
def synthetic(synthetic_config):
    config = load_config(synthetic_config)
    return config, load_dataset(config)


@pytest.fixture(scope="session")
def noise_free_config(tmp_path_factory) -> Path:
    return simulate_dataset(tmp_path_factory.mktemp("noise_free"), seed=3, noise=0.0)


@pytest.fixture
def write_csv(tmp_path):
    """Write ``text`` to a CSV file under tmp_path and return its path."""

    def _write(text: str, name: str = "series.csv") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


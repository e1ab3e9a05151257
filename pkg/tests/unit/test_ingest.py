# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

import numpy as np
import pytest
import yaml
from pydantic import ValidationError

from phillips_lf.exceptions import ConfigError, CsvFormatError, IngestError
from phillips_lf.ingest import SeriesEntry, TransformStep, load_config, load_dataset, read_csv_series
from phillips_lf.series_core import SeriesUnit


def write_config(tmp_path, data, name="dataset.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path


class TestReadCsvSeries:
    def test_without_header(self, write_csv):
        series = read_csv_series(write_csv("1970,0.052\n1971,0.055\n"), unit=SeriesUnit.RATE)
        assert series.start_year == 1970
        assert series.values == (0.052, 0.055)
        assert series.unit is SeriesUnit.RATE

    def test_header_with_named_columns(self, write_csv):
        path = write_csv("annee,source,level\n1990,OECD,100\n1991,OECD,101.5\n")
        series = read_csv_series(path, year_column="annee", value_column="level")
        assert series.start_year == 1990
        assert series.values == (100.0, 101.5)

    def test_missing_column(self, write_csv):
        with pytest.raises(IngestError, match="not in header"):
            read_csv_series(write_csv("year,level\n1990,1\n"))

    def test_gap_reports_row(self, write_csv):
        with pytest.raises(CsvFormatError) as excinfo:
            read_csv_series(write_csv("1970,1\n1972,2\n"))
        assert excinfo.value.details["row"] == 2

    def test_non_numeric_value(self, write_csv):
        with pytest.raises(CsvFormatError) as excinfo:
            read_csv_series(write_csv("1970,abc\n"))
        assert excinfo.value.details["row"] == 1

    def test_duplicate_year(self, write_csv):
        with pytest.raises(CsvFormatError, match="duplicate"):
            read_csv_series(write_csv("year,value\n1970,1\n1971,2\n1971,3\n"))

    def test_decreasing_year(self, write_csv):
        with pytest.raises(CsvFormatError, match="not increasing"):
            read_csv_series(write_csv("1971,1\n1970,2\n"))

    def test_empty_file(self, write_csv):
        with pytest.raises(CsvFormatError):
            read_csv_series(write_csv(""))

    def test_latin1_file_is_a_format_error(self, tmp_path):
        path = tmp_path / "cpi_latin1.csv"
        path.write_bytes("année,value\n1970,1\n".encode("latin-1"))
        with pytest.raises(CsvFormatError, match="not UTF-8") as excinfo:
            read_csv_series(path, year_column="année")
        assert excinfo.value.error_code == "E_CSV"
        assert excinfo.value.details["path"] == str(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="not found"):
            read_csv_series(tmp_path / "absent.csv")


class TestTransformStep:
    def test_bare_name(self):
        assert TransformStep.model_validate("log_change_rate").name == "log_change_rate"

    def test_single_key_mapping(self):
        step = TransformStep.model_validate({"centered_ma": {"window": 3}})
        assert step.params == {"window": 3}
        assert step.describe() == "centered_ma(window=3)"

    def test_missing_parameter(self):
        with pytest.raises(ValidationError):
            TransformStep.model_validate({"shift": {}})

    def test_unknown_transform(self):
        with pytest.raises(ValidationError):
            TransformStep.model_validate("hp_filter")

    def test_log_change_rate_on_rates_rejected(self):
        with pytest.raises(ValidationError, match="level series"):
            SeriesEntry(path="x.csv", unit=SeriesUnit.RATE, transforms=("log_change_rate",))


class TestLoadConfig:
    def test_empty_config(self, tmp_path):
        config = load_config(write_config(tmp_path, {}))
        assert config.series == {}
        assert dict(load_dataset(config)) == {}

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="frequency"):
            load_config(write_config(tmp_path, {"frequency": "quarterly"}))

    def test_missing_file_is_usage_error(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            load_config(tmp_path / "nope.yaml")
        assert excinfo.value.error_code == "E_USAGE"

    def test_model_with_unknown_series(self, tmp_path):
        data = {"models": {"m": {"dependent": "cpi", "kind": "inflation_labour_force", "predictors": [{"series": "l"}]}}}
        with pytest.raises(ConfigError, match="unknown series"):
            load_config(write_config(tmp_path, data))

    def test_break_window_outside_model_window(self, tmp_path):
        data = {"break_window": {"first_year": 1960, "last_year": 1990}}
        with pytest.raises(ConfigError, match="break window"):
            load_config(write_config(tmp_path, data))

    def test_unknown_model_lookup(self, tmp_path):
        config = load_config(write_config(tmp_path, {}))
        with pytest.raises(ConfigError) as excinfo:
            config.model("cpi_l")
        assert excinfo.value.error_code == "E_USAGE"


class TestLoadDataset:
    def test_support_shrinks_with_transforms(self, tmp_path):
        levels = 100.0 * np.exp(0.01 * np.arange(57))
        text = "year,value\n" + "".join(f"{1956 + i},{v!r}\n" for i, v in enumerate(levels))
        (tmp_path / "cpi.csv").write_text(text, encoding="utf-8")
        data = {"series": {"cpi": {"path": "cpi.csv", "transforms": ["log_change_rate", {"centered_ma": {"window": 3}}]}}}
        registry = load_dataset(load_config(write_config(tmp_path, data)))
        prepared = registry["cpi"].prepared
        assert (prepared.start_year, prepared.end_year) == (1958, 2011)
        np.testing.assert_allclose(prepared.array, 0.01, rtol=1e-9)

    def test_replay_matches_prepared(self, synthetic):
        _, registry = synthetic
        for record in registry.values():
            assert record.replay() == record.prepared

    def test_registry_is_read_only(self, synthetic):
        _, registry = synthetic
        with pytest.raises(TypeError):
            registry["cpi"] = registry["dgdp"]

    def test_spikes_repaired(self, synthetic):
        _, registry = synthetic
        raw_rates = np.diff(np.log(registry["l"].raw.array))
        prepared = registry["l"].prepared
        assert prepared.value_at(1968) < raw_rates[1968 - registry["l"].raw.start_year - 1]

    def test_errors_name_the_series(self, tmp_path):
        (tmp_path / "bad.csv").write_text("1970,1\n1972,2\n", encoding="utf-8")
        config = load_config(write_config(tmp_path, {"series": {"cpi": {"path": "bad.csv"}}}))
        with pytest.raises(CsvFormatError, match="series cpi") as excinfo:
            load_dataset(config)
        assert excinfo.value.details["series"] == "cpi"
        assert excinfo.value.details["row"] == 2

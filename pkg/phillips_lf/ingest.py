# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Local CSV ingestion, dataset configuration and the named series registry."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path
from types import MappingProxyType
from typing import Any, Literal

import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

from phillips_lf.bem import ModelForm, SearchSpec
from phillips_lf.exceptions import ConfigError, CsvFormatError, IngestError, PhillipsLfError
from phillips_lf.series_core import (
    AnnualSeries,
    SeriesUnit,
    SpikeRepairSpec,
    YearWindow,
    centered_ma,
    log_change_rate,
    repair_spikes,
    scale,
    shift,
)

logger = logging.getLogger(__name__)

TRANSFORM_NAMES = ("log_change_rate", "centered_ma", "repair_spikes", "shift", "scale")


class ColumnSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    year: str = "year"
    value: str = "value"


class TransformStep(BaseModel):
    """One pipeline step: ``log_change_rate`` or a single-key mapping such as ``{centered_ma: {window: 3}}``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: Literal["log_change_rate", "centered_ma", "repair_spikes", "shift", "scale"]
    params: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _from_yaml(cls, value: Any) -> Any:
        if isinstance(value, str):
            return {"name": value}
        if isinstance(value, dict) and "name" not in value:
            if len(value) != 1:
                raise ValueError(f"a transform is a name or a single-key mapping, got keys {sorted(value)}")
            ((name, params),) = value.items()
            return {"name": name, "params": params or {}}
        return value

    @model_validator(mode="after")
    def _check_params(self) -> TransformStep:
        required = {"centered_ma": {"window"}, "shift": {"lag"}, "scale": {"factor"}}.get(self.name, set())
        allowed = {"repair_spikes": {"mode", "years", "k"}}.get(self.name, required)
        missing = required - set(self.params)
        unknown = set(self.params) - allowed
        if missing or unknown:
            raise ValueError(f"{self.name}: missing {sorted(missing)}, unknown {sorted(unknown)}")
        if self.name == "repair_spikes":
            SpikeRepairSpec.model_validate(self.params)
        return self

    def apply(self, series: AnnualSeries) -> AnnualSeries:
        if self.name == "log_change_rate":
            return log_change_rate(series)
        if self.name == "centered_ma":
            return centered_ma(series, int(self.params["window"]))
        if self.name == "repair_spikes":
            return repair_spikes(series, SpikeRepairSpec.model_validate(self.params))
        if self.name == "shift":
            return shift(series, int(self.params["lag"]))
        return scale(series, float(self.params["factor"]))

    def describe(self) -> str:
        if not self.params:
            return self.name
        args = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({args})"


class SeriesEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    path: str
    source: str = ""
    label: str = ""
    unit: SeriesUnit = SeriesUnit.LEVEL
    columns: ColumnSpec = ColumnSpec()
    transforms: tuple[TransformStep, ...] = ()
    substitution: str | None = None

    @model_validator(mode="after")
    def _type_check_chain(self) -> SeriesEntry:
        unit = self.unit
        for step in self.transforms:
            if step.name == "log_change_rate":
                if unit is not SeriesUnit.LEVEL:
                    raise ValueError(f"log_change_rate needs a level series, chain has {unit.value} at that point")
                unit = SeriesUnit.RATE
        return self


class ReportOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    adf_max_lag: int = Field(default=4, ge=0)
    johansen_max_lag: int = Field(default=4, ge=1, le=4)
    vecm_max_lag: int = Field(default=4, ge=1, le=4)
    horizons: tuple[int, ...] = (1, 2, 3, 4, 5)
    calibration_replications: int = Field(default=200, ge=0)
    calibration_length: int = Field(default=200, ge=20)
    descriptive_series: tuple[str, ...] = ()
    unit_root_series: tuple[str, ...] = ()
    figures: bool = True

    @field_validator("horizons")
    @classmethod
    def _horizon_range(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(h < 1 or h > 5 for h in value):
            raise ValueError(f"horizons must lie in 1..5, got {value}")
        return value


class DatasetConfig(BaseModel):
    """Validated dataset configuration; see ``phillips_lf/data/configs/france.yaml``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "dataset"
    description: str = ""
    model_window: YearWindow = YearWindow(first_year=1970, last_year=2012)
    break_window: YearWindow = YearWindow(first_year=1986, last_year=2003)
    split_year: int = 1994
    series: dict[str, SeriesEntry] = Field(default_factory=dict)
    models: dict[str, ModelForm] = Field(default_factory=dict)
    search: SearchSpec | None = None
    report: ReportOptions = ReportOptions()
    targets: dict[str, float] = Field(default_factory=dict)

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @model_validator(mode="after")
    def _check_windows(self) -> DatasetConfig:
        mw, bw = self.model_window, self.break_window
        if bw.first_year < mw.first_year or bw.last_year > mw.last_year:
            raise ValueError(
                f"break window {bw.first_year}-{bw.last_year} not inside model window {mw.first_year}-{mw.last_year}"
            )
        for model_name, form in self.models.items():
            names = [form.dependent, *(t.series for t in form.predictors)]
            unknown = [n for n in names if n not in self.series]
            if unknown:
                raise ValueError(f"model {model_name} references unknown series {unknown}")
        return self

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def resolve_path(self, entry: SeriesEntry) -> Path:
        path = Path(entry.path)
        return path if path.is_absolute() else self._base_dir / path

    def search_spec(self) -> SearchSpec:
        """Search grids, with the break grid defaulting to the configured break window."""
        if self.search is not None:
            return self.search
        return SearchSpec(break_grid=tuple(range(self.break_window.first_year, self.break_window.last_year + 1)))

    def model(self, name: str) -> ModelForm:
        if name not in self.models:
            raise ConfigError(
                f"unknown model {name!r}; configured models: {', '.join(sorted(self.models)) or 'none'}",
                error_code="E_USAGE",
                details={"model": name},
            )
        return self.models[name]

    def model_window_for(self, form: ModelForm) -> YearWindow:
        return form.window or self.model_window


class SeriesRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    source: str
    raw: AnnualSeries
    prepared: AnnualSeries
    transforms: tuple[TransformStep, ...] = ()
    substitution: str | None = None

    def replay(self) -> AnnualSeries:
        """Re-run the transform chain on ``raw``."""
        series = self.raw
        for step in self.transforms:
            series = step.apply(series)
        return series


def _cell_int(cell: str, row: int, column: str) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise CsvFormatError(f"row {row}: year {cell!r} in column {column!r} is not an integer", details={"row": row}) from None


def _cell_float(cell: str, row: int, column: str) -> float:
    try:
        return float(cell.strip())
    except ValueError:
        raise CsvFormatError(f"row {row}: value {cell!r} in column {column!r} is not numeric", details={"row": row}) from None


def read_csv_series(
    path: str | Path,
    year_column: str = "year",
    value_column: str = "value",
    unit: SeriesUnit = SeriesUnit.LEVEL,
    label: str = "",
) -> AnnualSeries:
    """Read one annual series from a CSV file.

    A header row is detected when its first cell is not an integer year; columns are then taken
    by name. Without a header the first two columns are (year, value). Rows are numbered from 1
    starting at the first data row.

    Raises:
        CsvFormatError: Non-numeric cell, duplicate or decreasing year, gap, empty or non-UTF-8 file.
        IngestError: Unreadable file or missing column.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True, encoding="utf-8")
    except FileNotFoundError:
        raise IngestError(f"file not found: {path}", details={"path": str(path)}) from None
    except pd.errors.EmptyDataError:
        raise CsvFormatError(f"{path} is empty", details={"path": str(path)}) from None
    except UnicodeDecodeError as exc:
        raise CsvFormatError(
            f"{path} is not UTF-8 text (byte offset {exc.start})", details={"path": str(path), "byte": exc.start}
        ) from None
    except (OSError, pd.errors.ParserError) as exc:
        raise IngestError(f"cannot read {path}: {exc}", details={"path": str(path)}) from exc

    first = str(frame.iat[0, 0]).strip()
    has_header = not first.lstrip("-").isdigit()
    if has_header:
        header = [str(c).strip() for c in frame.iloc[0]]
        missing = [c for c in (year_column, value_column) if c not in header]
        if missing:
            raise IngestError(f"{path}: columns {missing} not in header {header}", details={"path": str(path)})
        years_raw = frame.iloc[1:, header.index(year_column)].tolist()
        values_raw = frame.iloc[1:, header.index(value_column)].tolist()
    else:
        if frame.shape[1] < 2:
            raise CsvFormatError(f"{path}: expected two columns (year, value)", details={"row": 1})
        years_raw = frame.iloc[:, 0].tolist()
        values_raw = frame.iloc[:, 1].tolist()
    if not years_raw:
        raise CsvFormatError(f"{path} has no data rows", details={"path": str(path)})

    years: list[int] = []
    values: list[float] = []
    for row, (year_cell, value_cell) in enumerate(zip(years_raw, values_raw, strict=True), start=1):
        year = _cell_int(year_cell, row, year_column)
        value = _cell_float(value_cell, row, value_column)
        if years:
            if year == years[-1]:
                raise CsvFormatError(f"row {row}: duplicate year {year}", details={"row": row, "year": year})
            if year < years[-1]:
                raise CsvFormatError(f"row {row}: year {year} is not increasing", details={"row": row, "year": year})
            if year != years[-1] + 1:
                raise CsvFormatError(
                    f"row {row}: gap between {years[-1]} and {year}",
                    details={"row": row, "year": year},
                )
        years.append(year)
        values.append(value)
    try:
        return AnnualSeries.from_array(years[0], values, unit, label)
    except ValidationError as exc:
        raise CsvFormatError(f"{path}: {exc.errors()[0]['msg']}", details={"path": str(path)}) from None


def load_config(path: str | Path) -> DatasetConfig:
    """Parse and validate a YAML dataset config; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config not found: {path}", error_code="E_USAGE", details={"path": str(path)}) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}", details={"path": str(path)}) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping", details={"path": str(path)})
    try:
        config = DatasetConfig.model_validate(raw)
    except ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"{path}: {problems}", details={"path": str(path), "errors": exc.errors(include_url=False)}) from None
    config._base_dir = path.resolve().parent
    return config


def load_series(name: str, entry: SeriesEntry, config: DatasetConfig) -> SeriesRecord:
    try:
        path = config.resolve_path(entry)
        raw = read_csv_series(path, entry.columns.year, entry.columns.value, entry.unit, entry.label or name)
        prepared = raw
        for step in entry.transforms:
            prepared = step.apply(prepared)
            logger.debug("%s: %s -> %s-%s", name, step.describe(), prepared.start_year, prepared.end_year)
    except PhillipsLfError as exc:
        details = {**exc.details, "series": name}
        raise type(exc)(f"series {name}: {exc.message}", error_code=exc.error_code, details=details) from exc
    if entry.substitution:
        logger.warning("series %s: source substitution: %s", name, entry.substitution)
    return SeriesRecord(
        name=name,
        source=entry.source,
        raw=raw,
        prepared=prepared,
        transforms=entry.transforms,
        substitution=entry.substitution,
    )


def load_dataset(config: DatasetConfig) -> Mapping[str, SeriesRecord]:
    """Load and prepare every configured series. Alignment is left to consumers.

    Returns:
        Read-only mapping of series name to :class:`SeriesRecord`, in config order.
    """
    registry = {name: load_series(name, entry, config) for name, entry in config.series.items()}
    logger.info("loaded %d series from %s", len(registry), config.name)
    return MappingProxyType(registry)

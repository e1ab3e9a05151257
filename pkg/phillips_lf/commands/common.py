# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Shared command utilities: argument specs, the command module object and error translation."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from phillips_lf.bem import BreakModel, ModelForm, ModelKind, SearchSpec, fit_break_model, fit_generalized
from phillips_lf.exceptions import ConfigError, PhillipsLfError
from phillips_lf.ingest import DatasetConfig, SeriesRecord, load_config, load_dataset
from phillips_lf.plotting import plot_lines, series_frame
from phillips_lf.records import OutputWriter, RunManifest, file_sha256, series_fingerprint

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
FAILURE = 1
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

_TYPES: dict[str, Callable[[str], Any]] = {"str": str, "int": int, "float": float, "path": Path}


class CommandExit(Exception):
    """Raised by :meth:`CommandModule.exit_json` / :meth:`CommandModule.fail_json` to end a run."""

    def __init__(self, rc: int):
        super().__init__(rc)
        self.rc = rc


def get_common_argument_spec() -> dict[str, dict[str, Any]]:
    """Return the argument spec shared by every command (config, output, seed, logging).

    Returns:
        dict: Argument spec entries keyed by parameter name.
    """
    return dict(
        config=dict(type="path", required=True, positional=True, help="dataset configuration (YAML)"),
        out=dict(type="path", required=False, default=Path("out"), help="output directory"),
        seed=dict(type="int", required=False, default=0, help="master seed for Monte Carlo streams"),
        log_level=dict(type="str", required=False, default="ERROR", choices=LOG_LEVELS, help="stderr log level"),
    )


def get_model_argument_spec() -> dict[str, dict[str, Any]]:
    """Flags that override a configured model form and its search grids."""
    return dict(
        predictor=dict(type="str", required=False, help="series feeding the leading predictor"),
        smooth=dict(type="int", required=False, help="centered MA window applied to the leading predictor"),
        lag_grid=dict(type="str", required=False, help="lag grid A:B (inclusive)"),
        break_grid=dict(type="str", required=False, help="break-year grid A:B (inclusive)"),
        objective=dict(type="str", required=False, choices=["cumulative_sse", "annual_sse"]),
        free_unemployment=dict(type="bool", required=False, default=False, help="estimate the unemployment coefficient"),
    )


def build_parser(prog: str, description: str, argument_spec: Mapping[str, Mapping[str, Any]]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=prog, description=description)
    for name, spec in argument_spec.items():
        kwargs: dict[str, Any] = {"help": spec.get("help")}
        kind = spec.get("type", "str")
        if kind == "bool":
            flag = f"--{name.replace('_', '-')}"
            parser.add_argument(flag, dest=name, action="store_true", default=spec.get("default", False), **kwargs)
            continue
        kwargs["type"] = _TYPES[kind]
        if "choices" in spec:
            kwargs["choices"] = spec["choices"]
        if spec.get("elements"):
            kwargs["action"] = "append"
        if spec.get("positional"):
            parser.add_argument(name, **kwargs)
        else:
            parser.add_argument(f"--{name.replace('_', '-')}", dest=name, default=spec.get("default"), **kwargs)
    return parser


class CommandModule:
    """Parsed parameters plus the exit/fail protocol of one command run.

    Args:
        argument_spec: Parameter name to spec (``type``, ``required``, ``default``, ``choices``).
        prog: Program name shown in usage.
        description: Usage description.
    """

    def __init__(self, argument_spec: Mapping[str, Mapping[str, Any]], prog: str, description: str = ""):
        self.argument_spec = argument_spec
        self.parser = build_parser(prog, description, argument_spec)
        self.params: dict[str, Any] = {}
        self.result: dict[str, Any] = {}

    def exit_json(self, **result: Any) -> NoReturn:
        self.result = result
        logger.info("done: %s", ", ".join(f"{k}={v}" for k, v in sorted(result.items()) if not isinstance(v, list | dict)))
        raise CommandExit(0)

    def fail_json(
        self, msg: str, error_code: str | None = None, details: Mapping[str, Any] | None = None, rc: int = FAILURE
    ) -> NoReturn:
        self.result = {"failed": True, "msg": msg, "error_code": error_code, "details": dict(details or {})}
        line = f"error: {msg}"
        if error_code:
            line += f" [{error_code}]"
        print(line, file=sys.stderr)  # noqa: T201
        if details:
            printable = {k: v for k, v in details.items() if k != "errors"}
            if printable:
                print(f"details: {printable}", file=sys.stderr)  # noqa: T201
        raise CommandExit(rc)

    def run(self, argv: Sequence[str] | None, execute: Callable[[CommandModule], None]) -> int:
        """Parse ``argv``, configure logging and run ``execute``; returns the process exit code."""
        try:
            self.params = vars(self.parser.parse_args(argv))
        except SystemExit as exc:
            return int(exc.code) if isinstance(exc.code, int) else USAGE_ERROR
        configure_logging(self.params.get("log_level", "ERROR"))
        try:
            execute(self)
        except CommandExit as done:
            return done.rc
        except PhillipsLfError as error:
            return handle_error(self, error)
        except Exception as error:
            logger.debug("unexpected failure", exc_info=True)
            try:
                self.fail_json(msg=f"{type(error).__name__}: {error}")
            except CommandExit as done:
                return done.rc
        return 0


def configure_logging(log_level: str) -> None:
    # Set logging level for debugging if needed
    logging.basicConfig(level=getattr(logging, str(log_level).upper(), logging.ERROR), stream=sys.stderr, force=True)


def handle_error(module: CommandModule, error: PhillipsLfError) -> int:
    """Translate a package error into a failed run (exit 2 for usage errors, 1 otherwise)."""
    rc = USAGE_ERROR if error.error_code == "E_USAGE" else FAILURE
    try:
        module.fail_json(msg=str(error), error_code=error.error_code, details=error.details, rc=rc)
    except CommandExit as done:
        return done.rc
    return rc


def load_context(config_path: Path) -> tuple[DatasetConfig, Mapping[str, SeriesRecord]]:
    config = load_config(config_path)
    registry = load_dataset(config)
    return config, registry


def make_manifest(
    config_path: Path, registry: Mapping[str, SeriesRecord], command: str, params: Mapping[str, Any]
) -> RunManifest:
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(params.items()) if k not in ("config", "out")}
    return RunManifest(
        config_path=str(config_path),
        config_sha256=file_sha256(config_path),
        series_sha256={name: series_fingerprint(record.raw) for name, record in registry.items()},
        command=command,
        flags=flags,
    )


def resolve_form(config: DatasetConfig, name: str, predictor: str | None = None, smooth: int | None = None) -> ModelForm:
    """Configured model form with the leading predictor's series and smoothing overridden."""
    form = config.model(name)
    if predictor:
        if predictor not in config.series:
            raise ConfigError(f"unknown predictor series {predictor!r}", error_code="E_USAGE", details={"series": predictor})
        lead = form.predictors[0].model_copy(update={"series": predictor})
        form = form.model_copy(update={"predictors": (lead, *form.predictors[1:])})
    if smooth is not None:
        try:
            form = form.with_smoothing(smooth)
        except ValueError as exc:
            raise ConfigError(f"--smooth {smooth}: {exc}", error_code="E_USAGE") from None
    return form


def resolve_search(
    config: DatasetConfig, lag_grid: str | None = None, break_grid: str | None = None, objective: str | None = None
) -> SearchSpec:
    search = config.search_spec()
    update: dict[str, Any] = {}
    if lag_grid:
        update["lag_grid"] = lag_grid
    if break_grid:
        update["break_grid"] = break_grid
    if objective:
        update["objective"] = objective
    if not update:
        return search
    try:
        return SearchSpec.model_validate({**search.model_dump(), **update})
    except ValueError as exc:
        raise ConfigError(f"invalid search override: {exc}", error_code="E_USAGE") from None


def fit_model(
    config: DatasetConfig,
    registry: Mapping[str, SeriesRecord],
    name: str,
    form: ModelForm,
    search: SearchSpec,
    free_unemployment: bool = False,
) -> BreakModel:
    window = config.model_window_for(form)
    if form.kind is ModelKind.GENERALIZED:
        return fit_generalized(form, registry, search, window, name=name, free_unemployment=free_unemployment)
    return fit_break_model(form, registry, search, window, name=name)


def fitted_frame(model: BreakModel) -> Any:
    return series_frame(
        observed_annual=model.observed_annual,
        fitted_annual=model.fitted_annual,
        residual_annual=model.residuals_annual,
        observed_cumulative=model.observed_cumulative,
        fitted_cumulative=model.fitted_cumulative,
        residual_cumulative=model.residuals_cumulative,
    )


def write_model_outputs(
    writer: OutputWriter, key: str, model: BreakModel, registry: Mapping[str, SeriesRecord], figures: bool = True
) -> None:
    """Model record, fitted/residual table and the observed-vs-predicted figures."""
    writer.json(f"models/{key}.json", model.to_record())
    frame = fitted_frame(model)
    writer.table(f"models/{key}_fitted.csv", frame)
    if not figures:
        return
    label = model.form.predictors[0].display
    plot_lines(
        writer,
        f"{key}_annual",
        f"{model.form.dependent} vs {label}: annual",
        frame[["year", "observed_annual", "fitted_annual"]],
    )
    plot_lines(
        writer,
        f"{key}_cumulative",
        f"{model.form.dependent} vs {label}: cumulative",
        frame[["year", "observed_cumulative", "fitted_cumulative"]],
    )
    plot_lines(writer, f"{key}_residuals", f"{key}: residuals", frame[["year", "residual_annual", "residual_cumulative"]])


def finite_or_none(value: float | None) -> float | None:
    if value is None or not np.isfinite(value):
        return None
    return float(value)

# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import annotations

from collections.abc import Sequence

import pandas as pd

from phillips_lf.bem import predict
from phillips_lf.commands.common import (
    CommandModule,
    fit_model,
    get_common_argument_spec,
    get_model_argument_spec,
    load_context,
    make_manifest,
    resolve_form,
    resolve_search,
)
from phillips_lf.plotting import plot_lines
from phillips_lf.records import OutputWriter
from phillips_lf.stattests import johansen_trace
from phillips_lf.vecm import fit_vecm, forecast_vecm

DOCUMENTATION = r"""
---
command: forecast
short_description: Forecast the dependent rate beyond the model window
description:
    - Fits the model, then extends the prediction with the last segment's coefficients while the lagged
      predictors are known.
    - With C(--vecm), also fits the error-correction equation between the measured and predicted
      cumulative curves and iterates it over the same horizon.
options:
    config:
        description: Dataset configuration file.
        type: path
        required: true
    model:
        description: Model name from the configuration.
        type: str
        required: true
    horizon:
        description: Years beyond the model window; C(0) writes a header-only table.
        type: int
        default: 5
    vecm:
        description: Add the error-correction forecast.
        type: bool
        default: false
    max_lag:
        description: Largest VAR order in levels tried for the error-correction equation.
        type: int
"""

EXAMPLES = r"""
phillips-lf forecast france.yaml dgdp_l --smooth 3 --horizon 5 --vecm
"""

RETURN = r"""
forecast.csv:
    description: C(year), C(annual), C(cumulative) and, with C(--vecm), C(vecm_annual) and C(vecm_cumulative).
    returned: success
    type: file
forecast.json:
    description: Model summary, the forecast rows and the error-correction record when requested.
    returned: success
    type: dict
"""

COLUMNS = ["year", "annual", "cumulative"]
VECM_COLUMNS = ["vecm_annual", "vecm_cumulative"]


def main(argv: Sequence[str] | None = None) -> int:
    # Define the command argument specification
    argument_spec = get_common_argument_spec()
    argument_spec.update(get_model_argument_spec())
    argument_spec.update(
        dict(
            model=dict(type="str", required=True, positional=True),
            horizon=dict(type="int", required=False, default=5),
            vecm=dict(type="bool", required=False, default=False),
            max_lag=dict(type="int", required=False),
        )
    )
    module = CommandModule(argument_spec=argument_spec, prog="phillips-lf forecast", description="out-of-sample forecasts")
    return module.run(argv, execute)


def execute(module: CommandModule) -> None:
    # Get parameters
    params = module.params
    horizon = params["horizon"]
    if horizon < 0:
        module.fail_json(msg=f"--horizon must be non-negative, got {horizon}", error_code="E_USAGE", rc=2)
    config, registry = load_context(params["config"])
    form = resolve_form(config, params["model"], params.get("predictor"), params.get("smooth"))
    search = resolve_search(config, params.get("lag_grid"), params.get("break_grid"), params.get("objective"))
    model = fit_model(config, registry, params["model"], form, search, params.get("free_unemployment", False))

    prediction = predict(model, registry, horizon)
    last = model.window.last_year
    rows = [
        {"year": int(year), "annual": a, "cumulative": c}
        for year, a, c in zip(prediction.annual.years, prediction.annual.values, prediction.cumulative.values, strict=True)
        if year > last
    ]
    columns = list(COLUMNS)
    record: dict = {
        "model": params["model"],
        "lag": model.lag,
        "forecast_horizon": model.forecast_horizon,
        "break_year": model.break_year,
        "last_fitted_year": last,
        "horizon": horizon,
    }

    if params.get("vecm"):
        columns += VECM_COLUMNS
        measured = model.observed_cumulative
        in_sample = prediction.cumulative.window(model.window.first_year, last)
        johansen = johansen_trace(measured, in_sample, max_lag=config.report.johansen_max_lag)
        vecm = fit_vecm(
            measured,
            in_sample,
            max_lag=params.get("max_lag") or config.report.vecm_max_lag,
            cointegrated=None if johansen.degenerate else bool(johansen.rank),
            name=params["model"],
        )
        path = forecast_vecm(vecm, measured, prediction.cumulative, horizon)
        for row, annual, cumulative in zip(rows, path.annual, path.cumulative, strict=True):
            row["vecm_annual"] = annual
            row["vecm_cumulative"] = cumulative
        record["vecm"] = vecm.to_record()
        record["johansen"] = johansen.model_dump(mode="json")
    record["rows"] = rows

    frame = pd.DataFrame(rows, columns=columns)
    manifest = make_manifest(params["config"], registry, "forecast", params)
    with OutputWriter(params["out"], manifest) as writer:
        writer.table("forecast.csv", frame)
        writer.json("forecast.json", record)
        if config.report.figures and rows:
            history = pd.DataFrame({"year": model.observed_annual.years, "observed": model.observed_annual.array})
            annual = frame[["year", *(c for c in columns if c.endswith("annual"))]]
            plot_lines(writer, "forecast", f"{params['model']}: forecast", history.merge(annual, on="year", how="outer"))
        outputs = writer.outputs

    module.exit_json(changed=True, model=params["model"], horizon=horizon, rows=len(rows), outputs=outputs)

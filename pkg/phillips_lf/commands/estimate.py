# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import annotations

from collections.abc import Sequence

from phillips_lf.bem import deflation_threshold
from phillips_lf.commands.common import (
    CommandModule,
    fit_model,
    get_common_argument_spec,
    get_model_argument_spec,
    load_context,
    make_manifest,
    resolve_form,
    resolve_search,
    write_model_outputs,
)
from phillips_lf.exceptions import DegeneratePredictorError
from phillips_lf.records import OutputWriter

DOCUMENTATION = r"""
---
command: estimate
short_description: Fit a lagged one-break model on cumulative curves
description:
    - Fits a configured model form by grid search over lag and break year.
    - Writes the model record, the fitted and residual series, and observed versus predicted figures.
options:
    config:
        description: Dataset configuration file.
        type: path
        required: true
    model:
        description: Name of a model under C(models) in the configuration.
        type: str
        required: true
    predictor:
        description: Replace the series of the leading predictor.
        type: str
    smooth:
        description: Odd centered moving-average window for the leading predictor.
        type: int
    lag_grid:
        description: Lag grid as C(A:B), inclusive.
        type: str
    break_grid:
        description: Break-year grid as C(A:B), inclusive; C(1990:1990) forces the break.
        type: str
    objective:
        description: Objective minimized over the grid.
        type: str
        choices: ["cumulative_sse", "annual_sse"]
    free_unemployment:
        description: For generalized forms, estimate the unemployment coefficient and keep the pinned fit for comparison.
        type: bool
        default: false
"""

EXAMPLES = r"""
# CPI on smoothed labour-force change
phillips-lf estimate france.yaml cpi_l --smooth 3 --out out/cpi_l3

# Force the break year
phillips-lf estimate france.yaml dgdp_l --break-grid 1990:1990
"""

RETURN = r"""
models/model.json:
    description: BreakModel record (coefficients, lag, break year, fit diagnostics, search grids, data fingerprint).
    returned: success
    type: dict
models/model_fitted.csv:
    description: Observed, fitted and residual series, annual and cumulative.
    returned: success
    type: file
figures:
    description: CSV and SVG pairs for annual, cumulative and residual curves.
    returned: success
    type: list
"""


def main(argv: Sequence[str] | None = None) -> int:
    # Define the command argument specification
    argument_spec = get_common_argument_spec()
    argument_spec.update(get_model_argument_spec())
    argument_spec["model"] = dict(type="str", required=True, positional=True, help="model name from the config")

    module = CommandModule(argument_spec=argument_spec, prog="phillips-lf estimate", description="fit a lagged one-break model")
    return module.run(argv, execute)


def execute(module: CommandModule) -> None:
    # Get parameters
    params = module.params
    config, registry = load_context(params["config"])
    form = resolve_form(config, params["model"], params.get("predictor"), params.get("smooth"))
    search = resolve_search(config, params.get("lag_grid"), params.get("break_grid"), params.get("objective"))

    model = fit_model(config, registry, params["model"], form, search, params.get("free_unemployment", False))

    thresholds = {}
    for number, segment in enumerate(model.segments, start=1):
        try:
            thresholds[f"segment{number}"] = deflation_threshold(segment)
        except DegeneratePredictorError:
            thresholds[f"segment{number}"] = None

    manifest = make_manifest(params["config"], registry, "estimate", params)
    with OutputWriter(params["out"], manifest) as writer:
        write_model_outputs(writer, "model", model, registry, figures=config.report.figures)
        writer.json("deflation_threshold.json", thresholds)
        outputs = writer.outputs

    module.exit_json(
        changed=True,
        model=params["model"],
        lag=model.lag,
        break_year=model.break_year,
        objective_value=model.objective_value,
        outputs=outputs,
    )

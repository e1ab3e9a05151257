# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import annotations

from collections.abc import Sequence

import pandas as pd

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
from phillips_lf.exceptions import ConfigError
from phillips_lf.records import OutputWriter
from phillips_lf.series_core import first_difference
from phillips_lf.stattests import SUPPORTED_TESTS, DeterministicSpec, TestReport, run_test

DOCUMENTATION = r"""
---
command: test
short_description: Run unit-root or cointegration tests on a series or a fitted model
description:
    - With C(--series), runs ADF or Phillips-Perron on the prepared series (or its first difference).
    - With C(--model), fits the model and tests its annual residuals (ADF, PP) or the measured versus
      predicted cumulative curves (CADF, Johansen).
options:
    config:
        description: Dataset configuration file.
        type: path
        required: true
    series:
        description: Prepared series name.
        type: str
    model:
        description: Model name; required for C(cadf) and C(johansen).
        type: str
    test:
        description: Test to run.
        type: str
        required: true
        choices: ["adf", "pp", "cadf", "johansen"]
    det:
        description: Deterministic terms (Johansen defaults to C(none), the others to C(constant)).
        type: str
        choices: ["none", "constant", "constant_and_trend"]
    max_lag:
        description: ADF augmentation lags searched, or VAR order in levels for Johansen.
        type: int
        default: 4
    bandwidth:
        description: Phillips-Perron Bartlett lags; automatic when omitted.
        type: int
    first_difference:
        description: Test the first difference of the series.
        type: bool
        default: false
"""

EXAMPLES = r"""
phillips-lf test france.yaml --series l --test adf
phillips-lf test france.yaml --model dgdp_l --test johansen
"""

RETURN = r"""
tests.json:
    description: List of TestReport records.
    returned: success
    type: list
tests.csv:
    description: Same reports flattened to one row each.
    returned: success
    type: file
"""


def main(argv: Sequence[str] | None = None) -> int:
    # Define the command argument specification
    argument_spec = get_common_argument_spec()
    argument_spec.update(get_model_argument_spec())
    argument_spec.update(
        dict(
            series=dict(type="str", required=False),
            model=dict(type="str", required=False),
            test=dict(type="str", required=True),
            det=dict(type="str", required=False, choices=[d.value for d in DeterministicSpec]),
            max_lag=dict(type="int", required=False, default=4),
            bandwidth=dict(type="int", required=False),
            first_difference=dict(type="bool", required=False, default=False),
        )
    )
    module = CommandModule(
        argument_spec=argument_spec, prog="phillips-lf test", description="unit-root and cointegration tests"
    )
    return module.run(argv, execute)


def execute(module: CommandModule) -> None:
    # Get parameters
    params = module.params
    test = params["test"]
    if test not in SUPPORTED_TESTS:
        # run_test raises the typed unsupported-test error
        run_test(test)
    if bool(params.get("series")) == bool(params.get("model")):
        module.fail_json(msg="give exactly one of --series or --model", error_code="E_USAGE", rc=2)

    config, registry = load_context(params["config"])
    reports: list[TestReport] = []

    if params.get("series"):
        name = params["series"]
        if name not in registry:
            raise ConfigError(f"unknown series {name!r}", error_code="E_USAGE", details={"series": name})
        if test in ("cadf", "johansen"):
            raise ConfigError(f"--test {test} needs --model (measured vs predicted curves)", error_code="E_USAGE")
        series = registry[name].prepared.model_copy(update={"label": name})
        if params.get("first_difference"):
            series = first_difference(series).model_copy(update={"label": f"d_{name}"})
        reports.append(_run(test, series, params))
    else:
        form = resolve_form(config, params["model"], params.get("predictor"), params.get("smooth"))
        search = resolve_search(config, params.get("lag_grid"), params.get("break_grid"), params.get("objective"))
        model = fit_model(config, registry, params["model"], form, search, params.get("free_unemployment", False))
        if test in ("adf", "pp"):
            resid = model.residuals_annual.model_copy(update={"label": f"{params['model']}_residual_annual"})
            reports.append(_run(test, resid, params))
        else:
            measured = model.observed_cumulative.model_copy(update={"label": f"{params['model']}_measured"})
            predicted = model.fitted_cumulative.model_copy(update={"label": f"{params['model']}_predicted"})
            reports.append(_run(test, measured, params, predicted))

    manifest = make_manifest(params["config"], registry, "test", params)
    with OutputWriter(params["out"], manifest) as writer:
        writer.json("tests.json", [r.model_dump(mode="json") for r in reports])
        writer.table("tests.csv", pd.DataFrame([r.to_record() for r in reports]))
        outputs = writer.outputs

    module.exit_json(changed=True, test=test, status=reports[0].status, rank=reports[0].rank, outputs=outputs)


def _run(test: str, series, params, other=None) -> TestReport:
    settings = {}
    det = params.get("det")
    if test == "adf":
        settings = {"max_lag": params["max_lag"], "det": DeterministicSpec(det or "constant")}
    elif test == "pp":
        bandwidth = params["bandwidth"] if params.get("bandwidth") is not None else "auto"
        settings = {"det": DeterministicSpec(det or "constant"), "bandwidth": bandwidth}
    elif test == "cadf":
        settings = {"max_lag": params["max_lag"]}
    elif test == "johansen":
        settings = {"max_lag": params["max_lag"], "det": DeterministicSpec(det or "none")}
    if other is None:
        return run_test(test, series, **settings)
    return run_test(test, series, other, **settings)

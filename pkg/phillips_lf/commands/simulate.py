# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from phillips_lf.commands.common import LOG_LEVELS, CommandModule
from phillips_lf.synthetic import simulate_dataset

DOCUMENTATION = r"""
---
command: simulate
short_description: Write a seeded synthetic dataset with known ground truth
description:
    - Writes labour-force, CPI, deflator and unemployment CSV files plus a ready-to-use configuration.
    - Lags, break years and coefficients are fixed; the seed only moves the predictor path and the noise.
options:
    out_dir:
        description: Directory receiving the CSV files and C(synthetic.yaml).
        type: path
        required: true
    seed:
        description: Master seed.
        type: int
        default: 0
    noise:
        description: Standard deviation of the noise added to the dependent rates.
        type: float
        default: 0.002
"""

EXAMPLES = r"""
phillips-lf simulate data/synthetic --seed 7
phillips-lf report data/synthetic/synthetic.yaml --out out/synthetic
"""

RETURN = r"""
synthetic.yaml:
    description: Dataset configuration pointing at the generated CSV files.
    returned: success
    type: file
"""


def main(argv: Sequence[str] | None = None) -> int:
    # Define the command argument specification
    argument_spec = dict(
        out_dir=dict(type="path", required=True, positional=True, help="output directory for the dataset"),
        seed=dict(type="int", required=False, default=0, help="master seed"),
        noise=dict(type="float", required=False, default=0.002, help="noise sd on the dependent rates"),
        log_level=dict(type="str", required=False, default="ERROR", choices=LOG_LEVELS),
    )
    module = CommandModule(argument_spec=argument_spec, prog="phillips-lf simulate", description="synthetic dataset")
    return module.run(argv, execute)


def execute(module: CommandModule) -> None:
    params = module.params
    if params["noise"] < 0:
        module.fail_json(msg=f"--noise must be non-negative, got {params['noise']}", error_code="E_USAGE", rc=2)
    config_path = simulate_dataset(Path(params["out_dir"]), seed=params["seed"], noise=params["noise"])
    module.exit_json(changed=True, config=str(config_path), seed=params["seed"])

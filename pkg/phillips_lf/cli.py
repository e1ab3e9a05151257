# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Entry point dispatching ``phillips-lf <command>`` to the command modules."""

from __future__ import annotations

import sys
from collections.abc import Callable, Sequence

from phillips_lf import __version__
from phillips_lf.commands import estimate, forecast, report, simulate, stat_test
from phillips_lf.commands.common import USAGE_ERROR

COMMANDS: dict[str, Callable[[Sequence[str] | None], int]] = {
    "estimate": estimate.main,
    "test": stat_test.main,
    "forecast": forecast.main,
    "report": report.main,
    "simulate": simulate.main,
}

USAGE = f"""usage: phillips-lf <command> [options]

commands:
  estimate   fit a lagged one-break model
  test       unit-root and cointegration tests
  forecast   out-of-sample forecasts (break model, optional VECM)
  report     every table, figure and the reproduction check
  simulate   write a synthetic dataset with known ground truth

phillips-lf {__version__}; run 'phillips-lf <command> --help' for options.
"""


def main(argv: Sequence[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help"):
        print(USAGE, file=sys.stdout if args else sys.stderr)  # noqa: T201
        return 0 if args else USAGE_ERROR
    if args[0] == "--version":
        print(__version__)  # noqa: T201
        return 0
    command = COMMANDS.get(args[0])
    if command is None:
        print(f"error: unknown command {args[0]!r} [E_USAGE]", file=sys.stderr)  # noqa: T201
        print(USAGE, file=sys.stderr)  # noqa: T201
        return USAGE_ERROR
    return command(args[1:])


if __name__ == "__main__":
    sys.exit(main())

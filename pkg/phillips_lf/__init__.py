# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Lagged labour-force Phillips curves for annual macroeconomic series."""

__version__ = "0.1.0"

"""Numerical toolkit for concentration inequalities and their information-theoretic uses."""

from . import (channel_rates, coding_apps, entropy_method_lab, info_measures, ofdm,
               simulation_harness, special_functions, tail_bounds, transport_concentration)

__all__ = [
    "channel_rates", "coding_apps", "entropy_method_lab", "info_measures", "ofdm",
    "simulation_harness", "special_functions", "tail_bounds", "transport_concentration",
]
__version__ = "0.1.0"

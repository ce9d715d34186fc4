"""Spectral distinguishability of regular graphs behind spired-graph oracles.

A base graph is hidden inside an exponentially large spired graph; a quantum
walk from the seed apex evolves inside a polynomial-size towered graph whose
return amplitude separates candidate base graphs.
"""

from .errors import CapacityError, NumericalContractError
from .graphs import BaseGraph, build, k2, load_edge_list, moebius, prism
from .peaks import PeakResult, distinguishability, measurement_budget
from .qsim import decide, hadamard_shots, run_trials, trial_success_rate
from .serf import serf_spectrum
from .signal import parseval, return_amplitude
from .spire import build_spired, obfuscate, oracle_query, spire_return_amplitude
from .tower import TowerParams, TowerSpectrum, direct_spectrum

__version__ = "0.1.0"

__all__ = [
    "BaseGraph", "CapacityError", "NumericalContractError", "PeakResult", "TowerParams",
    "TowerSpectrum", "build", "build_spired", "decide", "direct_spectrum", "distinguishability",
    "hadamard_shots", "k2", "load_edge_list", "measurement_budget", "moebius", "obfuscate",
    "oracle_query", "parseval", "prism", "return_amplitude", "run_trials", "serf_spectrum",
    "spire_return_amplitude", "trial_success_rate",
]

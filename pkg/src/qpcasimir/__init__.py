"""Casimir energies of delta-function plate stacks arranged by substitution rules.

Modules
-------
optics      plate models and TE/TM reflection/transmission amplitudes
lattice     substitution systems, words and neighbour counts
scattering  multiple-scattering determinant and its transfer-matrix oracle
greens      region-wise Green's functions and transition matrices
energy      scaled energies, sigma sweeps and growth fits
cli         the ``casimir`` command
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .energy import EnergyResult, energy_general, energy_ideal, energy_pair, energy_triple, li4
from .errors import CasimirError, ConfigError, NumericalError, RuleParseError, UnsupportedError
from .lattice import SubstitutionSystem, iterate, parse_rules, preset, stats
from .optics import Mode, Plate, SpectralPoint, coefficients
from .scattering import Stack, delta_oracle, delta_total

__all__ = [
    "CasimirError", "ConfigError", "EnergyResult", "Mode", "NumericalError", "Plate",
    "RuleParseError", "SpectralPoint", "Stack", "SubstitutionSystem", "UnsupportedError",
    "backend_name", "coefficients", "delta_oracle", "delta_total", "energy_general",
    "energy_ideal", "energy_pair", "energy_triple", "iterate", "li4", "parse_rules", "preset",
    "stats",
]

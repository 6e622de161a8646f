"""Pseudospectral solitary-wave solver with analyticity diagnostics."""

from __future__ import annotations

__version__ = "0.1.0"

from .spectral import Grid1D, SpectralField
from .symbols import MultiplierSymbol
from .solver import SolitaryWaveProblem, SolveReport, solve
from .closedform import ClosedFormSolution, get_case, list_cases

__all__ = [
    "ClosedFormSolution",
    "Grid1D",
    "MultiplierSymbol",
    "SolitaryWaveProblem",
    "SolveReport",
    "SpectralField",
    "get_case",
    "list_cases",
    "solve",
]

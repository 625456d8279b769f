"""Dirac quantum walk and Thirring cellular automaton laboratory.

Exact free and interacting evolution, path-sum formulas, perturbative
expansions in the number of interactions and in the mass, a bound-state
scan at fixed total momentum, and exhaustive checks of the path calculus.
"""

from .core import BinLabel, BitPath, GradedAmplitude, Letter, TransitionPath, WalkParams
from .errors import (
    ConfigurationError,
    DomainError,
    PauliError,
    ResourceCapError,
    SingularParameterError,
    ThirringError,
    UnsupportedClassError,
)
from .sector import SectorState
from .thirring import evolve, graded_evolve, step_thirring, two_particle_amplitude

__all__ = [
    "BinLabel",
    "BitPath",
    "GradedAmplitude",
    "Letter",
    "TransitionPath",
    "WalkParams",
    "SectorState",
    "evolve",
    "graded_evolve",
    "step_thirring",
    "two_particle_amplitude",
    "ThirringError",
    "ConfigurationError",
    "DomainError",
    "PauliError",
    "ResourceCapError",
    "SingularParameterError",
    "UnsupportedClassError",
]

__version__ = "0.1.0"

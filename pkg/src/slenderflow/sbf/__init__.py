"""Spectral slender-body solver for interacting rigid fibers."""

from .greens import doublet, greens_free, stokeslet
from .legendre import kbar_eigenvalues
from .ewald import PeriodicStokeslet
from .system import FiberSystem, LegendreForce, SbfParams
from .solver import SbfSolution, SbfSolver

__all__ = [
    "FiberSystem",
    "LegendreForce",
    "PeriodicStokeslet",
    "SbfParams",
    "SbfSolution",
    "SbfSolver",
    "doublet",
    "greens_free",
    "kbar_eigenvalues",
    "stokeslet",
]

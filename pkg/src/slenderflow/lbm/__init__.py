"""Lattice Boltzmann solver: D3Q19 TRT with moving-boundary momentum exchange."""

from .lattice import LatticeDomain, MapResult
from .model import (
    C_LATTICE,
    CS2,
    MACH_LIMIT,
    OPPOSITE,
    W_LATTICE,
    TrtParams,
    equilibrium,
    magic_lambda_odd,
)
from .simulation import LbmSimulation, StepDiagnostics
from .vtk import write_structured_points

__all__ = [
    "C_LATTICE",
    "CS2",
    "MACH_LIMIT",
    "OPPOSITE",
    "W_LATTICE",
    "LatticeDomain",
    "LbmSimulation",
    "MapResult",
    "StepDiagnostics",
    "TrtParams",
    "equilibrium",
    "magic_lambda_odd",
    "write_structured_points",
]

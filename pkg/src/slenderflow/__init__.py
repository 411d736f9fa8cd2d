"""slenderflow: dual-method simulation kit for sedimenting elongated particles.

Two independent hydrodynamic solvers for rigid spherocylindrical fibers in
creeping flow, plus the shared rigid-body, analytic-reference, and batch
layers used to cross-validate them:

- slenderflow.sbf     slender-body boundary-integral solver (triply periodic)
- slenderflow.lbm     D3Q19 two-relaxation-time lattice-Boltzmann solver
- slenderflow.analytic  closed-form rod mobility references
- slenderflow.rigid   Newton-Euler rigid-body integration
- slenderflow.core    domain types and unit conversion
- slenderflow.harness batch experiments, metrics, and the CLI
"""

from .core import (
    EllipsoidalFiber,
    FluidProperties,
    RigidState,
    Spherocylinder,
    UnitScales,
    buoyant_force,
    derive_time_step,
    driving_force,
    particle_reynolds,
)

__version__ = "0.1.0"

__all__ = [
    "EllipsoidalFiber",
    "FluidProperties",
    "RigidState",
    "Spherocylinder",
    "UnitScales",
    "buoyant_force",
    "derive_time_step",
    "driving_force",
    "particle_reynolds",
    "__version__",
]

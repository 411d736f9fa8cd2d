"""D3Q19 stencil, TRT relaxation parameters, and the reference collision.

Lattice units throughout: dx = dt = 1 and the mean fluid density rho0 = 1.
The equilibrium is the incompressible (He-Luo) form, linear in the density
fluctuation: velocity moments are taken against rho0, not the local density.
The vectorized numpy routines here are the readable reference used by the
oracle tests; the production kernels in ``kernels.py`` implement the same
algebra cell-by-cell and are validated against these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, StabilityError

__all__ = [
    "C_LATTICE",
    "CS2",
    "MACH_LIMIT",
    "OPPOSITE",
    "W_LATTICE",
    "TrtParams",
    "collide_reference",
    "equilibrium",
    "equilibrium_split",
    "magic_lambda_odd",
    "moments",
]

# Discrete velocities: rest, six axis directions, twelve face diagonals.
# Opposite directions are adjacent (2k+1, 2k+2) which keeps the reflection
# tables trivial to audit.
C_LATTICE = np.array(
    [
        (0, 0, 0),
        (1, 0, 0), (-1, 0, 0),
        (0, 1, 0), (0, -1, 0),
        (0, 0, 1), (0, 0, -1),
        (1, 1, 0), (-1, -1, 0),
        (1, -1, 0), (-1, 1, 0),
        (1, 0, 1), (-1, 0, -1),
        (1, 0, -1), (-1, 0, 1),
        (0, 1, 1), (0, -1, -1),
        (0, 1, -1), (0, -1, 1),
    ],
    dtype=np.int64,
)

W_LATTICE = np.where(
    np.sum(C_LATTICE**2, axis=1) == 0,
    1.0 / 3.0,
    np.where(np.sum(C_LATTICE**2, axis=1) == 1, 1.0 / 18.0, 1.0 / 36.0),
)

OPPOSITE = np.array(
    [int(np.flatnonzero(np.all(C_LATTICE == -c, axis=1))[0]) for c in C_LATTICE],
    dtype=np.int64,
)

#: Lattice speed of sound squared, c_s^2 = (dx/dt)^2 / 3.
CS2 = 1.0 / 3.0

#: Compressibility guard: velocities must stay below 0.3 c_s.
MACH_LIMIT = 0.3 / np.sqrt(3.0)


def magic_lambda_odd(omega: float) -> float:
    """Odd relaxation eigenvalue placing bounce-back walls halfway between
    lattice sites (magic parameter 3/16) for a given even frequency omega."""
    return -8.0 * (2.0 - omega) / (8.0 - omega)


def _check_eigenvalue(name: str, value: float) -> None:
    # 0.0 is permitted only as an explicit override (pure streaming in tests)
    if not (-2.0 < value <= 0.0):
        raise ConfigError(f"{name} = {value} outside the stable range (-2, 0]")


@dataclass(frozen=True)
class TrtParams:
    """Two-relaxation-time eigenvalues.

    ``lambda_even`` defaults to -1/tau (sets the kinematic viscosity,
    nu = (tau - 1/2) c_s^2 dt) and ``lambda_odd`` to the magic value that
    pins bounce-back walls halfway between lattice sites.  Both may be
    overridden explicitly, e.g. ``lambda_odd=-1.0`` for full relaxation.
    """

    tau: float
    lambda_even: float | None = None
    lambda_odd: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau <= 0.5:
            raise ConfigError(f"tau = {self.tau} must be > 1/2 for positive viscosity")
        if self.lambda_even is None:
            object.__setattr__(self, "lambda_even", -1.0 / self.tau)
        if self.lambda_odd is None:
            object.__setattr__(self, "lambda_odd", magic_lambda_odd(1.0 / self.tau))
        _check_eigenvalue("lambda_even", self.lambda_even)
        _check_eigenvalue("lambda_odd", self.lambda_odd)

    @property
    def omega(self) -> float:
        return 1.0 / self.tau


def _mach_check(u: np.ndarray) -> None:
    speed2 = np.max(np.sum(np.asarray(u) ** 2, axis=-1), initial=0.0)
    if speed2 >= MACH_LIMIT**2:
        raise StabilityError(
            f"lattice speed {np.sqrt(speed2):.4g} exceeds the compressibility "
            f"guard 0.3 c_s = {MACH_LIMIT:.4g}; reduce dt or the driving load"
        )


def equilibrium_split(rho, u):
    """Even/odd (symmetric/antisymmetric in q) parts of the equilibrium.

    The even part collects the terms quadratic in c_q, the odd part the
    linear one, so even[qbar] = even[q] and odd[qbar] = -odd[q] exactly.
    """
    rho = np.asarray(rho, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    _mach_check(u)
    cu = u @ C_LATTICE.T.astype(np.float64)  # (..., 19)
    u2 = np.sum(u * u, axis=-1)[..., None]
    even = W_LATTICE * (rho[..., None] + 4.5 * cu**2 - 1.5 * u2)
    odd = W_LATTICE * (3.0 * cu)
    return even, odd


def equilibrium(rho, u):
    """He-Luo incompressible equilibrium f_q = w_q [rho + 3 c.u
    + 4.5 (c.u)^2 - 1.5 u.u] with rho0 = 1 in lattice units."""
    even, odd = equilibrium_split(rho, u)
    return even + odd


def moments(f):
    """Density and velocity (momentum / rho0) of a PDF array (..., 19)."""
    f = np.asarray(f)
    rho = np.sum(f, axis=-1)
    u = np.einsum("...q,qi->...i", f, C_LATTICE.astype(np.float64))
    return rho, u


def collide_reference(f, params: TrtParams, u_corr=None):
    """TRT collision on an (..., 19) PDF array (readable reference).

    When ``u_corr`` is given the equilibrium is evaluated at u - u_corr
    (momentum stabilization); the cell momentum then changes by exactly
    lambda_odd * rho0 * u_corr.
    """
    f = np.asarray(f, dtype=np.float64)
    rho, u = moments(f)
    if u_corr is not None:
        u = u - np.asarray(u_corr, dtype=np.float64)
    feq_e, feq_o = equilibrium_split(rho, u)
    f_opp = f[..., OPPOSITE]
    f_e = 0.5 * (f + f_opp)
    f_o = 0.5 * (f - f_opp)
    return f + params.lambda_even * (f_e - feq_e) + params.lambda_odd * (f_o - feq_o)

"""System state, force representation, and parameters for the fiber solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, GeometryError
from ..rigid import segment_distance


class FiberSystem:
    """M rigid fibers with loads, in free space or a periodic box.

    Each fiber is a straight center-line x(s) = center + s * tangent,
    s in [-half_length, half_length], of slenderness eps = radius/length.
    Loads are a net force and a net torque per fiber (SI units). All
    geometric state is mutable; the solver advances centers and tangents
    in place.
    """

    def __init__(self, centers, tangents, half_length, slenderness,
                 viscosity, forces=None, torques=None, box=None):
        self.centers = np.array(centers, dtype=float, ndmin=2)
        if self.centers.ndim != 2 or self.centers.shape[1] != 3:
            raise GeometryError(f"centers must be (M, 3), got {self.centers.shape}")
        m = self.centers.shape[0]
        self.tangents = np.array(tangents, dtype=float, ndmin=2)
        if self.tangents.shape != (m, 3):
            raise GeometryError(
                f"tangents must match centers: {self.tangents.shape} vs (M={m}, 3)")
        norms = np.linalg.norm(self.tangents, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise GeometryError(
                f"tangents must be unit vectors within 1e-12, worst |t| = "
                f"{norms[np.argmax(np.abs(norms - 1.0))]:.15g}")
        self.half_lengths = np.broadcast_to(
            np.asarray(half_length, dtype=float), (m,)).copy()
        self.slendernesses = np.broadcast_to(
            np.asarray(slenderness, dtype=float), (m,)).copy()
        if np.any(self.half_lengths <= 0.0):
            raise GeometryError("half lengths must be positive")
        if np.any((self.slendernesses <= 0.0) | (self.slendernesses >= 0.5)):
            raise GeometryError(
                f"slenderness must lie in (0, 1/2), got {self.slendernesses}")
        self.viscosity = float(viscosity)
        if self.viscosity <= 0.0:
            raise GeometryError("viscosity must be positive")
        self.forces = self._load_array(forces, m, "forces")
        self.torques = self._load_array(torques, m, "torques")
        if box is None:
            self.box = None
        else:
            self.box = np.asarray(box, dtype=float)
            if self.box.shape != (3,) or np.any(self.box <= 0.0):
                raise GeometryError(f"box must be three positive edges, got {box}")

    @staticmethod
    def _load_array(values, m, name):
        if values is None:
            return np.zeros((m, 3))
        arr = np.array(values, dtype=float, ndmin=2)
        if arr.shape != (m, 3):
            raise GeometryError(f"{name} must be (M, 3), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise GeometryError(f"{name} must be finite")
        return arr

    # ------------------------------------------------------------------

    @property
    def n_fibers(self) -> int:
        return self.centers.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return 2.0 * self.half_lengths

    @property
    def radii(self) -> np.ndarray:
        return self.slendernesses * self.lengths

    @property
    def drag_parameters(self) -> np.ndarray:
        """d = -ln(eps^2 e) per fiber."""
        return -2.0 * np.log(self.slendernesses) - 1.0

    def set_loads(self, forces=None, torques=None) -> None:
        m = self.n_fibers
        if forces is not None:
            self.forces = self._load_array(forces, m, "forces")
        if torques is not None:
            self.torques = self._load_array(torques, m, "torques")

    def endpoints(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        offset = self.half_lengths[i] * self.tangents[i]
        return self.centers[i] - offset, self.centers[i] + offset

    def min_separation(self) -> tuple[float, tuple[int, int] | None]:
        """Minimum center-line distance over fiber pairs and periodic images."""
        if self.box is None:
            offsets = np.zeros((1, 3))
        else:
            grid = np.array([-1.0, 0.0, 1.0])
            offsets = np.stack(np.meshgrid(grid, grid, grid, indexing="ij"),
                               axis=-1).reshape(-1, 3) * self.box
        best = np.inf
        pair = None
        for i in range(self.n_fibers):
            p0, p1 = self.endpoints(i)
            for j in range(i, self.n_fibers):
                q0, q1 = self.endpoints(j)
                for off in offsets:
                    if i == j and np.all(off == 0.0):
                        continue
                    d = segment_distance(p0, p1, q0 + off, q1 + off)
                    if d < best:
                        best = d
                        pair = (i, j)
        return best, pair

    def copy(self) -> "FiberSystem":
        return FiberSystem(self.centers, self.tangents, self.half_lengths,
                           self.slendernesses, self.viscosity,
                           forces=self.forces, torques=self.torques,
                           box=self.box)


@dataclass
class LegendreForce:
    """Force density per fiber as a Legendre series on s_hat in [-1, 1].

    f_tilde_m(s_hat) = constant[m] + sum_n coefficients[m, n-1] P_n(s_hat)
    is the force per unit s_hat; the physical line density is
    f_tilde(s_hat)/half_length. The constant term carries the entire net
    force (constant = F/2) because P_n integrate to zero for n >= 1.
    """

    constant: np.ndarray      # (M, 3)
    coefficients: np.ndarray  # (M, N, 3), modes n = 1..N

    @property
    def n_modes(self) -> int:
        return self.coefficients.shape[1]

    def total_force(self) -> np.ndarray:
        """Net force per fiber, exact by construction: (M, 3)."""
        return 2.0 * self.constant

    def total_torque(self, tangents, half_lengths) -> np.ndarray:
        """Net torque per fiber about its center: (2 l / 3) t x a^1."""
        lead = self.coefficients[:, 0, :]
        return (2.0 * np.asarray(half_lengths)[:, None] / 3.0) \
            * np.cross(np.asarray(tangents), lead)

    def density(self, fiber: int, s_hat) -> np.ndarray:
        """f_tilde_m(s_hat): force per unit s_hat, shape (len(s_hat), 3)."""
        from .legendre import legendre_values
        s_hat = np.atleast_1d(np.asarray(s_hat, dtype=float))
        p = legendre_values(s_hat, self.n_modes)  # (S, N+1)
        out = np.repeat(self.constant[fiber][None, :], len(s_hat), axis=0)
        out = out + np.einsum("sn,nd->sd", p[:, 1:], self.coefficients[fiber])
        return out


@dataclass(frozen=True)
class SbfParams:
    """Numerical parameters for the spectral fiber solver.

    n_modes: Legendre modes N (unknowns per fiber = 3 N).
    n_panels: uniform panels for the outer Galerkin quadrature (3-point
        Gauss per panel) and the starting mesh of the adaptive inner rule.
    gmres_tol: relative residual target of the interaction solve.
    dt: time-step for the explicit midpoint integrator (s).
    stokeslet_grid_spacing: tabulation spacing of the periodic Stokeslet's
        smooth part (m); default min(box)/64.
    """

    n_modes: int = 5
    n_panels: int = 16
    gmres_tol: float = 1e-8
    gmres_max_iter: int = 200
    dt: float | None = None
    stokeslet_grid_spacing: float | None = None

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.n_panels < 1:
            raise ConfigError(f"n_panels must be >= 1, got {self.n_panels}")
        if not 0.0 < self.gmres_tol <= 1e-2:
            raise ConfigError(
                f"gmres_tol must lie in (0, 1e-2], got {self.gmres_tol}")
        if self.gmres_max_iter < 1:
            raise ConfigError("gmres_max_iter must be >= 1")
        if self.dt is not None and self.dt <= 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.stokeslet_grid_spacing is not None \
                and self.stokeslet_grid_spacing <= 0.0:
            raise ConfigError("stokeslet_grid_spacing must be positive")

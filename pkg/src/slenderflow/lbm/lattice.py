"""Lattice domain: PDF storage, boundary configuration, and the staircase
particle mapping with cell refill.

Conventions:
  - cell (i, j, k) has its center at ((i+0.5) dx, (j+0.5) dx, (k+0.5) dx);
  - flags: 0 = fluid, b+1 = obstacle cell of body b;
  - PDFs are stored in lattice units (dx = dt = 1, mean density rho0 = 1);
  - solid cells carry all-zero PDFs, so whole-array moments equal fluid-only
    moments without masking.

Domain walls live on the half-way planes of the outermost cell layers; they
are realized link-wise in the streaming kernel, so the flag field only ever
holds fluid/obstacle values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..core import RigidState, Spherocylinder, UnitScales
from ..errors import ConfigError, GeometryError, ResolutionWarning
from .model import C_LATTICE, equilibrium

__all__ = ["BC_CODES", "LatticeDomain", "MapResult"]

#: integer codes used by the streaming kernel
BC_CODES = {"periodic": 0, "noslip": 1, "freeslip": 2}


@dataclass
class MapResult:
    """Bookkeeping from one ``map_bodies`` call."""

    n_covered: int = 0
    n_uncovered: int = 0
    covered_cells: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), int))
    uncovered_cells: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), int))
    #: change of total fluid momentum (lattice units) caused by the remap
    momentum_delta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    #: change of total fluid mass (lattice units)
    mass_delta: float = 0.0


class LatticeDomain:
    def __init__(self, shape, scales: UnitScales, *,
                 boundaries=("periodic", "periodic", "periodic"),
                 dtype=np.float64):
        shape = tuple(int(n) for n in np.atleast_1d(np.asarray(shape)))
        if len(shape) != 3 or any(n < 1 for n in shape):
            raise ConfigError(f"lattice shape {shape} must be three positive sizes")
        boundaries = tuple(boundaries)
        if len(boundaries) != 3:
            raise ConfigError("one boundary kind per axis is required")
        for kind in boundaries:
            if kind not in BC_CODES:
                raise ConfigError(
                    f"unknown boundary kind {kind!r}; expected one of "
                    f"{sorted(BC_CODES)}")
        if "noslip" in boundaries and "freeslip" in boundaries:
            raise ConfigError(
                "mixing no-slip and free-slip walls is not supported: the box "
                "edges where they meet have no well-defined reflection normal")
        self.shape = shape
        self.scales = scales
        self.boundaries = boundaries
        self.bc_codes = np.array([BC_CODES[b] for b in boundaries], dtype=np.int64)
        self.dtype = np.dtype(dtype)
        self.f = np.zeros(shape + (19,), dtype=self.dtype)
        self.f_buf = np.zeros_like(self.f)
        self.flags = np.zeros(shape, dtype=np.uint8)
        self.fluid_cell_count = int(np.prod(shape))
        self._mapped_lin = np.zeros(0, dtype=np.int64)
        self._prev_states: list[RigidState] | None = None

    # ------------------------------------------------------------------
    # state initialization and diagnostics
    # ------------------------------------------------------------------

    def initialize(self, rho: float = 1.0, velocity=(0.0, 0.0, 0.0)) -> None:
        """Set every cell to the equilibrium at (rho, velocity), lattice units."""
        u = np.asarray(velocity, dtype=np.float64)
        feq = equilibrium(np.asarray(float(rho)), u)
        self.f[...] = feq
        self.f_buf[...] = 0.0
        if np.any(self.flags):
            self.f[self.flags != 0] = 0.0

    def fluid_momentum(self) -> np.ndarray:
        """Total fluid momentum (lattice units); solid cells hold zeros."""
        return np.einsum("xyzq,qi->i", self.f, C_LATTICE.astype(np.float64))

    def fluid_mass(self) -> float:
        return float(np.sum(self.f))

    def mean_fluid_velocity(self) -> np.ndarray:
        """Domain-averaged fluid velocity (the stabilization offset source)."""
        return self.fluid_momentum() / (1.0 * self.fluid_cell_count)

    def macroscopics(self):
        """(rho, u) fields in lattice units; zeros inside obstacle cells."""
        rho = np.sum(self.f, axis=-1)
        u = np.einsum("xyzq,qi->xyzi", self.f, C_LATTICE.astype(np.float64))
        return rho, u

    # ------------------------------------------------------------------
    # particle mapping
    # ------------------------------------------------------------------

    def _voxelize(self, body: Spherocylinder, state: RigidState) -> np.ndarray:
        """Linear indices of the cells whose center lies within ``radius`` of
        the body's cap-free axis segment (staircase rule, wrapped)."""
        n = np.array(self.shape, dtype=np.int64)
        dx = self.scales.dx
        t = state.tangent
        c = np.asarray(state.position, dtype=np.float64) / dx
        r = body.radius / dx
        h = 0.5 * body.cap_free_length / dx
        if r < 2.0:
            warnings.warn(
                f"body radius {r:.2f} dx is below 2 dx: the staircase surface "
                "is too coarse to resolve", ResolutionWarning, stacklevel=3)

        # wall axes: the full body extent must stay inside the box
        ext = h * np.abs(t) + r
        for a in range(3):
            if self.bc_codes[a] == 0:
                c[a] %= n[a]
            elif c[a] - ext[a] < 0.0 or c[a] + ext[a] > n[a]:
                raise GeometryError(
                    f"body extent [{c[a]-ext[a]:.2f}, {c[a]+ext[a]:.2f}] dx "
                    f"pokes through the axis-{a} wall (domain size {n[a]})")

        lo = np.floor(c - ext - 1.0).astype(np.int64)
        hi = np.ceil(c + ext + 1.0).astype(np.int64) + 1
        for a in range(3):
            if self.bc_codes[a] != 0:
                lo[a] = max(lo[a], 0)
                hi[a] = min(hi[a], n[a])
        axes = [np.arange(lo[a], hi[a]) for a in range(3)]
        px = (axes[0] + 0.5 - c[0])[:, None, None]
        py = (axes[1] + 0.5 - c[1])[None, :, None]
        pz = (axes[2] + 0.5 - c[2])[None, None, :]
        proj = np.clip(px * t[0] + py * t[1] + pz * t[2], -h, h)
        d2 = (px - proj * t[0]) ** 2 + (py - proj * t[1]) ** 2 \
            + (pz - proj * t[2]) ** 2
        cells = np.argwhere(d2 <= r * r)
        ii = (axes[0][cells[:, 0]]) % n[0]
        jj = (axes[1][cells[:, 1]]) % n[1]
        kk = (axes[2][cells[:, 2]]) % n[2]
        lin = (ii * n[1] + jj) * n[2] + kk
        return np.unique(lin)

    def map_bodies(self, bodies: list[Spherocylinder],
                   states: list[RigidState]) -> MapResult:
        """Rebuild obstacle flags for the given bodies, dropping PDFs of newly
        covered cells and refilling newly uncovered cells with the equilibrium
        at the previous map call's surface velocity."""
        if len(bodies) != len(states):
            raise ConfigError("bodies and states must pair up one-to-one")
        if len(bodies) > 254:
            raise ConfigError("at most 254 bodies fit in the flag field")
        n = np.array(self.shape, dtype=np.int64)
        prev_states = self._prev_states if self._prev_states is not None else [
            s.copy() for s in states]

        lin_lists = [self._voxelize(b, s) for b, s in zip(bodies, states)]
        if lin_lists:
            all_lin = np.concatenate(lin_lists)
            all_bid = np.concatenate(
                [np.full(len(lin), b + 1, dtype=np.uint8)
                 for b, lin in enumerate(lin_lists)])
            # later bodies win overlapping voxels: keep the LAST occurrence
            uniq, first_rev = np.unique(all_lin[::-1], return_index=True)
            owners = all_bid[::-1][first_rev]
        else:
            uniq = np.zeros(0, dtype=np.int64)
            owners = np.zeros(0, dtype=np.uint8)

        union = np.union1d(uniq, self._mapped_lin)
        flat_flags = self.flags.reshape(-1)
        old_owner = flat_flags[union].astype(np.int64)
        pos = np.searchsorted(uniq, union)
        pos_ok = pos < len(uniq)
        new_owner = np.zeros(len(union), dtype=np.int64)
        hit = pos_ok.copy()
        hit[pos_ok] = uniq[pos[pos_ok]] == union[pos_ok]
        new_owner[hit] = owners[pos[hit]]

        covered = union[(old_owner == 0) & (new_owner > 0)]
        uncovered_mask = (old_owner > 0) & (new_owner == 0)
        uncovered = union[uncovered_mask]
        uncovered_prev_owner = old_owner[uncovered_mask]

        flat_f = self.f.reshape(-1, 19)
        res = MapResult()
        res.n_covered = len(covered)
        res.n_uncovered = len(uncovered)
        res.covered_cells = np.stack(np.unravel_index(covered, self.shape),
                                     axis=1) if len(covered) else np.zeros((0, 3), int)
        res.uncovered_cells = np.stack(np.unravel_index(uncovered, self.shape),
                                       axis=1) if len(uncovered) else np.zeros((0, 3), int)

        momentum = np.zeros(3)
        mass = 0.0
        if len(covered):
            f_cov = flat_f[covered]
            momentum -= np.einsum("nq,qi->i", f_cov, C_LATTICE.astype(np.float64))
            mass -= float(np.sum(f_cov))
            flat_f[covered] = 0.0
        if len(uncovered):
            dx, dt = self.scales.dx, self.scales.dt
            centers = (res.uncovered_cells + 0.5) * dx
            box = n * dx
            for cell_lin, cell_xyz, owner in zip(
                    uncovered, centers, uncovered_prev_owner):
                st = prev_states[owner - 1]
                delta = cell_xyz - np.asarray(st.position, dtype=np.float64)
                for a in range(3):
                    if self.bc_codes[a] == 0:
                        delta[a] -= box[a] * np.round(delta[a] / box[a])
                u_s_si = np.asarray(st.velocity, dtype=np.float64) \
                    + np.cross(np.asarray(st.angular_velocity, dtype=np.float64),
                               delta)
                u_s = u_s_si * dt / dx
                feq = equilibrium(np.asarray(1.0), u_s)
                flat_f[cell_lin] = feq
                momentum += u_s
                mass += 1.0
        res.momentum_delta = momentum
        res.mass_delta = mass

        flat_flags[union] = new_owner.astype(np.uint8)
        self._mapped_lin = uniq
        self.fluid_cell_count = int(np.prod(self.shape)) - len(uniq)
        self._prev_states = [s.copy() for s in states]
        return res

    def body_cells(self, body_index: int) -> np.ndarray:
        """Linear indices of the cells currently owned by body ``body_index``."""
        flat = self.flags.reshape(-1)
        return self._mapped_lin[flat[self._mapped_lin] == body_index + 1]

    def surface_cell_count(self, body_index: int) -> int:
        """Obstacle cells of the body with at least one fluid neighbor."""
        lin = self.body_cells(body_index)
        if len(lin) == 0:
            return 0
        n = np.array(self.shape, dtype=np.int64)
        ijk = np.stack(np.unravel_index(lin, self.shape), axis=1)
        has_fluid = np.zeros(len(lin), dtype=bool)
        flat = self.flags.reshape(-1)
        for q in range(1, 19):
            nb = ijk + C_LATTICE[q]
            valid = np.ones(len(lin), dtype=bool)
            for a in range(3):
                if self.bc_codes[a] == 0:
                    nb[:, a] %= n[a]
                else:
                    valid &= (nb[:, a] >= 0) & (nb[:, a] < n[a])
            nb_lin = (nb[:, 0] * n[1] + nb[:, 1]) * n[2] + nb[:, 2]
            nb_lin = np.clip(nb_lin, 0, np.prod(n) - 1)
            has_fluid |= valid & (flat[nb_lin] == 0)
        return int(np.sum(has_fluid))

"""Triply periodic Stokeslet via Ewald (Hasimoto) splitting.

S_per(r) = sum_p B(xi, r + p)  +  (8 pi / V) sum_{k != 0} A(k) cos(k . r)

with lattice vectors p, wave vectors k = 2 pi (n_x/L_x, n_y/L_y, n_z/L_z),

    B(xi, r) = erfc(xi r)/r (I + r_hat r_hat^T)
             + (2 xi/sqrt(pi)) e^{-xi^2 r^2} (r_hat r_hat^T - I)
    A(k)     = (I - k_hat k_hat^T) (1 + k^2/(4 xi^2)) e^{-k^2/(4 xi^2)} / k^2

The k = 0 term is excluded: this is the zero-mean-velocity gauge (the
cell-average of the periodic flow vanishes). Observables built from
relative motion are gauge-independent; absolute sedimentation speeds in a
periodic cell are only defined up to this gauge.

For fast evaluation the smooth difference W(r) = S_per(r) - S(r_wrapped)
is precomputed on a uniform octant grid [0, L/2]^3 and sampled by
symmetry-mapped trilinear interpolation: W is even under per-axis mirror
up to the sign flip of components (i, j) with exactly one mirrored index,
which also reproduces W's jump across the half-box faces exactly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf, erfc

from ..errors import GeometryError
from .greens import doublet, stokeslet

_SQRT_PI = math.sqrt(math.pi)


class PeriodicStokeslet:
    """Ewald-summed Stokeslet for one periodic box, with optional grid."""

    def __init__(self, box, grid_spacing: float | None = None,
                 xi: float | None = None, tail_tol: float = 1e-12):
        self.box = np.asarray(box, dtype=float)
        if self.box.shape != (3,) or np.any(self.box <= 0.0):
            raise GeometryError(f"box must be three positive edges, got {box}")
        self.xi = 3.5 / float(self.box.min()) if xi is None else float(xi)
        # real-space cutoff: erfc(xi r_c) < tail_tol (erfc(5.2) ~ 2e-13)
        self.r_cut = 5.2 / self.xi
        # image offsets possibly within r_cut of a wrapped point
        reach = self.r_cut + 0.5 * float(np.linalg.norm(self.box))
        counts = np.ceil(reach / self.box).astype(int)
        offs = [np.array([i, j, k]) * self.box
                for i in range(-counts[0], counts[0] + 1)
                for j in range(-counts[1], counts[1] + 1)
                for k in range(-counts[2], counts[2] + 1)]
        self._offsets = np.array(
            [o for o in offs if np.linalg.norm(o) <= reach + self.box.max()])
        # Fourier cutoff: (1 + z) e^{-z} < tail_tol at z = k^2/(4 xi^2)
        z = 35.0
        while (1.0 + z) * math.exp(-z) > tail_tol:
            z += 1.0
        k_max = 2.0 * self.xi * math.sqrt(z)
        self._n_max = np.ceil(k_max * self.box / (2.0 * math.pi)).astype(int)
        self._k_vectors, self._k_coeffs = self._fourier_table(k_max)
        self._grid = None
        if grid_spacing is not None:
            self.build_grid(grid_spacing)

    # ------------------------------------------------------------------
    # direct (gridless) evaluation
    # ------------------------------------------------------------------

    def _fourier_table(self, k_max: float):
        nx, ny, nz = self._n_max
        n = np.stack(np.meshgrid(np.arange(-nx, nx + 1),
                                 np.arange(-ny, ny + 1),
                                 np.arange(-nz, nz + 1),
                                 indexing="ij"), axis=-1).reshape(-1, 3)
        k = 2.0 * math.pi * n / self.box
        k2 = np.sum(k * k, axis=1)
        keep = (k2 > 0.0) & (k2 <= k_max * k_max)
        k = k[keep]
        k2 = k2[keep]
        khat = k / np.sqrt(k2)[:, None]
        volume = float(np.prod(self.box))
        amp = (8.0 * math.pi / volume) * (1.0 + k2 / (4.0 * self.xi ** 2)) \
            * np.exp(-k2 / (4.0 * self.xi ** 2)) / k2
        proj = np.eye(3)[None] - khat[:, :, None] * khat[:, None, :]
        return k, amp[:, None, None] * proj  # (K,3), (K,3,3)

    def wrap(self, r: np.ndarray) -> np.ndarray:
        """Nearest-image representative in [-L/2, L/2]^3."""
        r = np.asarray(r, dtype=float)
        return r - self.box * np.round(r / self.box)

    def _real_sum(self, r: np.ndarray) -> np.ndarray:
        """sum_p B(xi, r + p) over images within the real-space cutoff.

        r must be wrapped; the p = 0 term is included (r = 0 is the
        caller's problem)."""
        out = np.zeros(r.shape[:-1] + (3, 3))
        for off in self._offsets:
            d = r + off
            dist = np.linalg.norm(d, axis=-1)
            mask = (dist > 0.0) & (dist <= self.r_cut)
            if not np.any(mask):
                continue
            out[mask] += _ewald_real_kernel(self.xi, d[mask], dist[mask])
        return out

    def _fourier_sum(self, r: np.ndarray) -> np.ndarray:
        phases = np.cos(np.tensordot(np.asarray(r, dtype=float),
                                     self._k_vectors, axes=([-1], [1])))
        return np.tensordot(phases, self._k_coeffs, axes=([-1], [0]))

    def direct(self, r: np.ndarray) -> np.ndarray:
        """S_per(r) by explicit Ewald sums (no grid). Broadcasts over (...,3)."""
        rw = self.wrap(r)
        shape = rw.shape
        rw = rw.reshape(-1, 3)
        if np.any(np.linalg.norm(rw, axis=-1) == 0.0):
            raise GeometryError("periodic Stokeslet singular at R = 0 mod box")
        out = self._real_sum(rw) + self._fourier_sum(rw)
        return out.reshape(shape[:-1] + (3, 3))

    def w_direct(self, r: np.ndarray) -> np.ndarray:
        """W(r) = S_per(r) - S(r_wrapped), finite for all r including 0."""
        rw = self.wrap(r)
        shape = rw.shape
        rw = rw.reshape(-1, 3)
        dist = np.linalg.norm(rw, axis=-1)
        out = self._fourier_sum(rw)
        # images except the direct (p = 0) term
        for off in self._offsets:
            if np.all(off == 0.0):
                continue
            d = rw + off
            dd = np.linalg.norm(d, axis=-1)
            mask = (dd > 0.0) & (dd <= self.r_cut)
            if np.any(mask):
                out[mask] += _ewald_real_kernel(self.xi, d[mask], dd[mask])
        # direct term minus the free-space Stokeslet: smooth at 0
        out += _real_kernel_minus_stokeslet(self.xi, rw, dist)
        return out.reshape(shape[:-1] + (3, 3))

    # ------------------------------------------------------------------
    # grid precomputation and interpolation
    # ------------------------------------------------------------------

    def build_grid(self, grid_spacing: float) -> None:
        """Precompute W on the octant grid [0, L/2]^3 at ~grid_spacing.

        Node spacing is snapped to L_i / N_i with even N_i so the Fourier
        part can be synthesized exactly by an inverse FFT on the full-box
        lattice; the octant then holds N_i/2 + 1 nodes per axis.
        """
        if grid_spacing <= 0.0:
            raise GeometryError("grid spacing must be > 0")
        n_full = np.maximum(2 * np.round(self.box / (2.0 * grid_spacing)), 4) \
            .astype(int)
        axes = [np.arange(n // 2 + 1) * (edge / n)
                for n, edge in zip(n_full, self.box)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        dist = np.linalg.norm(mesh, axis=-1)

        w = self._fourier_on_lattice(n_full)
        for off in self._offsets:
            if np.all(off == 0.0):
                continue
            d = mesh + off
            dd = np.linalg.norm(d, axis=-1)
            mask = (dd > 0.0) & (dd <= self.r_cut)
            if np.any(mask):
                w[mask] += _ewald_real_kernel(self.xi, d[mask], dd[mask])
        w += _real_kernel_minus_stokeslet(self.xi, mesh, dist)

        self._grid = w
        self._grid_n_full = n_full
        self._grid_step = self.box / n_full

    def _fourier_on_lattice(self, n_full: np.ndarray) -> np.ndarray:
        """Fourier part of S_per on the octant of the full FFT lattice."""
        shape = tuple(int(n) for n in n_full)
        spec = np.zeros(shape + (3, 3), dtype=complex)
        idx = np.mod(np.round(self._k_vectors * self.box / (2.0 * math.pi))
                     .astype(int), n_full)
        spec[idx[:, 0], idx[:, 1], idx[:, 2]] += self._k_coeffs
        field = np.fft.ifftn(spec, axes=(0, 1, 2)) * np.prod(shape)
        octant = field[:shape[0] // 2 + 1, :shape[1] // 2 + 1,
                       :shape[2] // 2 + 1]
        return np.ascontiguousarray(octant.real)

    def w_interp(self, r: np.ndarray) -> np.ndarray:
        """Symmetry-mapped trilinear interpolation of W at arbitrary r."""
        if self._grid is None:
            raise GeometryError("grid not built; call build_grid first")
        rw = self.wrap(np.asarray(r, dtype=float))
        signs = np.where(rw < 0.0, -1.0, 1.0)  # per-axis mirror parity
        folded = np.abs(rw)
        u = folded / self._grid_step  # fractional node coordinates
        i0 = np.minimum(u.astype(int), self._grid_n_full // 2 - 1)
        frac = u - i0
        g = self._grid
        out = np.zeros(rw.shape[:-1] + (3, 3))
        for cx in (0, 1):
            wx = np.where(cx == 1, frac[..., 0], 1.0 - frac[..., 0])
            for cy in (0, 1):
                wy = np.where(cy == 1, frac[..., 1], 1.0 - frac[..., 1])
                for cz in (0, 1):
                    wz = np.where(cz == 1, frac[..., 2], 1.0 - frac[..., 2])
                    vals = g[i0[..., 0] + cx, i0[..., 1] + cy, i0[..., 2] + cz]
                    out += (wx * wy * wz)[..., None, None] * vals
        parity = signs[..., :, None] * signs[..., None, :]
        return out * parity

    # ------------------------------------------------------------------
    # public kernels
    # ------------------------------------------------------------------

    def evaluate(self, r: np.ndarray, use_grid: bool = True) -> np.ndarray:
        """Periodic Stokeslet S_per(r); grid-accelerated when available."""
        rw = self.wrap(r)
        if np.any(np.linalg.norm(rw, axis=-1) == 0.0):
            raise GeometryError("periodic Stokeslet singular at R = 0 mod box")
        w = self.w_interp(rw) if (use_grid and self._grid is not None) \
            else self.w_direct(rw)
        return w + stokeslet(rw)

    def pair_kernel(self, r: np.ndarray, fiber_radius: float,
                    same_fiber: bool = False) -> np.ndarray:
        """Fiber pair kernel in the periodic box.

        Distinct fibers: W + S(r_w) + (r_f^2/2) D(r_w) (the finite-radius
        doublet applied to the nearest image only; image doublets are
        O((r_f/L_box)^2) relative and dropped). Same fiber: W only (the
        direct interaction lives in the local/intra-fiber operators; the
        smooth image correction remains).
        """
        rw = self.wrap(r)
        w = self.w_interp(rw) if self._grid is not None else self.w_direct(rw)
        if same_fiber:
            return w
        g = w + stokeslet(rw)
        if fiber_radius != 0.0:
            g = g + 0.5 * fiber_radius ** 2 * doublet(rw)
        return g


def _ewald_real_kernel(xi: float, d: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """B(xi, d) for nonzero separations d with |d| = dist."""
    dhat = d / dist[..., None]
    outer = dhat[..., :, None] * dhat[..., None, :]
    eye = np.broadcast_to(np.eye(3), outer.shape)
    a = erfc(xi * dist) / dist
    b = (2.0 * xi / _SQRT_PI) * np.exp(-(xi * dist) ** 2)
    return a[..., None, None] * (eye + outer) + b[..., None, None] * (outer - eye)


def _real_kernel_minus_stokeslet(xi: float, d: np.ndarray,
                                 dist: np.ndarray) -> np.ndarray:
    """B(xi, d) - S(d), the screened complement: smooth, -(4 xi/sqrt(pi)) I at 0."""
    out = np.zeros(d.shape[:-1] + (3, 3))
    small = dist * xi < 1e-8
    if np.any(small):
        out[small] = -(4.0 * xi / _SQRT_PI) * np.eye(3)
    big = ~small
    if np.any(big):
        db = d[big]
        distb = dist[big]
        dhat = db / distb[..., None]
        outer = dhat[..., :, None] * dhat[..., None, :]
        eye = np.broadcast_to(np.eye(3), outer.shape)
        a = -erf(xi * distb) / distb
        b = (2.0 * xi / _SQRT_PI) * np.exp(-(xi * distb) ** 2)
        out[big] = a[..., None, None] * (eye + outer) \
            + b[..., None, None] * (outer - eye)
    return out

"""Fused TRT collide + push-stream kernel (numba, thread-parallel).

One pass per time step over the grid: for every fluid cell the collision is
evaluated inline and each post-collision PDF is pushed to its destination,
dispatching wall links (periodic wrap / half-way bounce-back / half-way
specular reflection) and moving-obstacle links (velocity bounce-back with
momentum exchange) on the fly.

Determinism: every (cell, direction) slot of the destination buffer has a
unique source, so the scattered writes are race-free, and all reductions
(momentum, mass, per-body force/torque, link counts, Mach guard) accumulate
into per-x-plane slots owned by exactly one thread, reduced later in fixed
plane order.  Results are therefore bitwise independent of the thread count.
"""

from __future__ import annotations

import math
import os

os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import numba  # noqa: E402  (env var must be set before this import)
import numpy as np  # noqa: E402
from numba import njit, prange  # noqa: E402

from .model import C_LATTICE, OPPOSITE, W_LATTICE  # noqa: E402

__all__ = ["fused_step", "set_threads"]

# compile-time constant tables
_CXI = np.ascontiguousarray(C_LATTICE[:, 0])
_CYI = np.ascontiguousarray(C_LATTICE[:, 1])
_CZI = np.ascontiguousarray(C_LATTICE[:, 2])
_CXF = _CXI.astype(np.float64)
_CYF = _CYI.astype(np.float64)
_CZF = _CZI.astype(np.float64)
_W = np.ascontiguousarray(W_LATTICE)
_OPP = np.ascontiguousarray(OPPOSITE)


def _reflect_table(axis: int) -> np.ndarray:
    flip = np.where(np.arange(3) == axis, -1, 1)
    return np.array([
        int(np.flatnonzero(np.all(C_LATTICE == C_LATTICE[q] * flip, axis=1))[0])
        for q in range(19)
    ], dtype=np.int64)


_RX = _reflect_table(0)
_RY = _reflect_table(1)
_RZ = _reflect_table(2)


def set_threads(n: int) -> None:
    """Set the kernel thread count (bounded by NUMBA_NUM_THREADS)."""
    numba.set_num_threads(int(n))


# default to serial execution; callers opt in to more threads
numba.config.NUMBA_DEFAULT_NUM_THREADS  # touch config before first set
set_threads(1)


@njit(parallel=True, fastmath=False, cache=True)
def fused_step(f, f_new, flags, bc0, bc1, bc2, lam_e, lam_o,
               ucx, ucy, ucz, gx, gy, gz, centers, bvel, bomg,
               out_j, out_mass, out_force, out_torque, out_umax2, out_links):
    nx, ny, nz = flags.shape
    for i in prange(nx):
        # computed copy of the parfor index: rebinding a variable to the raw
        # index retypes it to float64 during parfor gufunc outlining
        ii = i + 0
        jx_acc = 0.0
        jy_acc = 0.0
        jz_acc = 0.0
        m_acc = 0.0
        umax2 = 0.0
        for j in range(ny):
            for k in range(nz):
                if flags[i, j, k] != 0:
                    for q in range(19):
                        f_new[i, j, k, q] = 0.0
                    continue
                # macroscopic moments (rho0 = 1)
                rho = 0.0
                ux = 0.0
                uy = 0.0
                uz = 0.0
                for q in range(19):
                    v = float(f[i, j, k, q])
                    rho += v
                    ux += v * _CXF[q]
                    uy += v * _CYF[q]
                    uz += v * _CZF[q]
                s2 = ux * ux + uy * uy + uz * uz
                if s2 > umax2:
                    umax2 = s2
                # stabilization offset enters the equilibrium only
                vx = ux - ucx
                vy = uy - ucy
                vz = uz - ucz
                v2 = vx * vx + vy * vy + vz * vz
                for q in range(19):
                    cqx = _CXF[q]
                    cqy = _CYF[q]
                    cqz = _CZF[q]
                    cu = cqx * vx + cqy * vy + cqz * vz
                    feq_e = _W[q] * (rho + 4.5 * cu * cu - 1.5 * v2)
                    feq_o = _W[q] * 3.0 * cu
                    fq = float(f[i, j, k, q])
                    fqb = float(f[i, j, k, _OPP[q]])
                    val = fq + lam_e * (0.5 * (fq + fqb) - feq_e) \
                        + lam_o * (0.5 * (fq - fqb) - feq_o) \
                        + 3.0 * _W[q] * (cqx * gx + cqy * gy + cqz * gz)

                    # push toward the target cell, handling wall crossings
                    ti = ii + _CXI[q]
                    tj = j + _CYI[q]
                    tk = k + _CZI[q]
                    qf = q
                    hit_noslip = False
                    if ti < 0 or ti >= nx:
                        if bc0 == 0:
                            ti = (ti + nx) % nx
                        elif bc0 == 1:
                            hit_noslip = True
                        else:
                            qf = _RX[qf]
                            ti = ii
                    if tj < 0 or tj >= ny:
                        if bc1 == 0:
                            tj = (tj + ny) % ny
                        elif bc1 == 1:
                            hit_noslip = True
                        else:
                            qf = _RY[qf]
                            tj = j
                    if tk < 0 or tk >= nz:
                        if bc2 == 0:
                            tk = (tk + nz) % nz
                        elif bc2 == 1:
                            hit_noslip = True
                        else:
                            qf = _RZ[qf]
                            tk = k
                    if hit_noslip:
                        qd = _OPP[q]
                        f_new[i, j, k, qd] = val
                        jx_acc += val * _CXF[qd]
                        jy_acc += val * _CYF[qd]
                        jz_acc += val * _CZF[qd]
                        m_acc += val
                        continue
                    b = flags[ti, tj, tk]
                    if b != 0:
                        bi = b - 1
                        cfx = _CXF[qf]
                        cfy = _CYF[qf]
                        cfz = _CZF[qf]
                        # lever arm to the surface cell center (min-image)
                        ax = ti + 0.5 - centers[bi, 0]
                        ay = tj + 0.5 - centers[bi, 1]
                        az = tk + 0.5 - centers[bi, 2]
                        if bc0 == 0:
                            ax -= nx * math.floor(ax / nx + 0.5)
                        if bc1 == 0:
                            ay -= ny * math.floor(ay / ny + 0.5)
                        if bc2 == 0:
                            az -= nz * math.floor(az / nz + 0.5)
                        usx = bvel[bi, 0] + bomg[bi, 1] * az - bomg[bi, 2] * ay
                        usy = bvel[bi, 1] + bomg[bi, 2] * ax - bomg[bi, 0] * az
                        usz = bvel[bi, 2] + bomg[bi, 0] * ay - bomg[bi, 1] * ax
                        corr = 6.0 * _W[qf] * (cfx * usx + cfy * usy + cfz * usz)
                        outv = val - corr
                        si = ti - _CXI[qf]
                        sj = tj - _CYI[qf]
                        sk = tk - _CZI[qf]
                        qd = _OPP[qf]
                        bad = False
                        if si < 0 or si >= nx:
                            if bc0 == 0:
                                si = (si + nx) % nx
                            else:
                                bad = True
                        if sj < 0 or sj >= ny:
                            if bc1 == 0:
                                sj = (sj + ny) % ny
                            else:
                                bad = True
                        if sk < 0 or sk >= nz:
                            if bc2 == 0:
                                sk = (sk + nz) % nz
                            else:
                                bad = True
                        if bad:
                            # wall-reflected push into an obstacle: return the
                            # fully reversed PDF to the original cell
                            si = ii
                            sj = j
                            sk = k
                            qd = _OPP[q]
                        f_new[si, sj, sk, qd] = outv
                        jx_acc += outv * _CXF[qd]
                        jy_acc += outv * _CYF[qd]
                        jz_acc += outv * _CZF[qd]
                        m_acc += outv
                        px = (2.0 * val - corr) * cfx
                        py = (2.0 * val - corr) * cfy
                        pz = (2.0 * val - corr) * cfz
                        out_force[i, bi, 0] += px
                        out_force[i, bi, 1] += py
                        out_force[i, bi, 2] += pz
                        out_torque[i, bi, 0] += ay * pz - az * py
                        out_torque[i, bi, 1] += az * px - ax * pz
                        out_torque[i, bi, 2] += ax * py - ay * px
                        out_links[i, bi] += 1
                    else:
                        f_new[ti, tj, tk, qf] = val
                        jx_acc += val * _CXF[qf]
                        jy_acc += val * _CYF[qf]
                        jz_acc += val * _CZF[qf]
                        m_acc += val
        out_j[i, 0] = jx_acc
        out_j[i, 1] = jy_acc
        out_j[i, 2] = jz_acc
        out_mass[i] = m_acc
        out_umax2[i] = umax2

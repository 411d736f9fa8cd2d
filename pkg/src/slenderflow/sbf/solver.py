"""Galerkin slender-body solver: force solve, kinematics, time stepping.

The force density on each fiber is expanded in Legendre polynomials on
the dimensionless arc length s_hat in [-1, 1]. Projecting the center-line
velocity equation onto P_1..P_N yields, per fiber m with drag parameter
d = -ln(eps^2 e), tangent t, and half-length l:

  mode 1, perpendicular: (I - t t^T) a^1 = (3/(2l)) (M x t)   [torque row]
  mode 1, parallel:      2(d + lam_1) (t.a^1) + l t.V~^1 = 0
  mode n >= 2:           [2(d+lam_n) t t^T + (d+lam_n+2)(I - t t^T)] a^n
                          + l V~^n = 0

where lam_n are the eigenvalues of the intra-fiber integral operator and
V~^n = ((2n+1)/2) sum_l sum_k Theta^(ml)_{n,k} a_l^k collects the
hydrodynamic interaction through the pair kernel G:

  Theta^(ml)_{n,k} = int int P_n(s) G(R_ml(s, s')) P_k(s') ds' ds .

The constant mode is known (a^0 = F/2), so the unknowns are the 3 M N
coefficients a_m^n, n = 1..N. The diagonal blocks are closed-form
invertible and serve as the preconditioner; the preconditioned system
I + P^-1 C is solved with GMRES. Rigid-body velocities follow from the
projections of the interaction field:

  xdot = [2 d F_par + (d+2) F_perp]/(8 pi mu L) + V~^0/(8 pi mu)
  tdot = 3 d (M x t)/(16 pi mu l^3) + (I - t t^T) V~^1/(8 pi mu l)

Everything is deterministic: fixed quadrature orders, fixed panel
ordering in the adaptive rule, single-threaded dense linear algebra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from ..errors import (ConfigError, ConvergenceError, GeometryError,
                      NearContactWarning)
from .ewald import PeriodicStokeslet
from .greens import greens_free
from .legendre import (G7_WEIGHTS_PADDED, GK15_WEIGHTS, adaptive_gk,
                       composite_gauss, kbar_eigenvalues, legendre_values,
                       panel_nodes)
from .system import FiberSystem, LegendreForce, SbfParams

# absolute tolerance of the adaptive inner quadrature, applied to the
# integrand rescaled by a reference length so it is O(1)
INNER_TOL = 1e-10


@dataclass
class SbfSolution:
    """Solved force density and rigid-body velocities for one state."""

    forces: LegendreForce
    translational: np.ndarray    # (M, 3) xdot, m/s
    tangent_rates: np.ndarray    # (M, 3) tdot, 1/s, perpendicular to t
    gmres_iterations: int
    min_separation: float = field(default=np.inf)

    def angular_velocities(self, tangents) -> np.ndarray:
        """omega = t x tdot (no axial spin at this order of the theory)."""
        return np.cross(np.asarray(tangents), self.tangent_rates)


class SbfSolver:
    """Spectral solver for a :class:`FiberSystem` with fixed parameters."""

    def __init__(self, system: FiberSystem, params: SbfParams | None = None):
        self.system = system
        self.params = params if params is not None else SbfParams()
        n = self.params.n_modes
        self._lam = kbar_eigenvalues(n)
        d = system.drag_parameters  # (M,)
        # diagonal (local) block eigenvalues per fiber and mode n = 1..N;
        # the mode-1 perpendicular row is the torque closure (coefficient 1)
        self._c_par = 2.0 * (d[:, None] + self._lam[None, 1:])
        self._c_perp = d[:, None] + self._lam[None, 1:] + 2.0
        self._c_perp[:, 0] = 1.0
        floor = 1e-8 * (d + 2.0)
        worst = np.minimum(np.abs(self._c_par),
                           np.abs(self._c_perp)).min(axis=1)
        bad = worst < floor
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ConvergenceError(
                f"local spectral block nearly singular for fiber {i} "
                f"(slenderness {system.slendernesses[i]:.4g}, d = {d[i]:.4g}): "
                f"smallest block eigenvalue {worst[i]:.3e}; "
                "change n_modes or the aspect ratio")
        # outer Galerkin rule: n_panels uniform panels, 3-point Gauss each
        self._s_out, self._w_out = composite_gauss(self.params.n_panels, 3)
        self._p_out = legendre_values(self._s_out, n)  # (Q, N+1)
        self._length_ref = float(np.mean(system.lengths))
        self.periodic: PeriodicStokeslet | None = None
        if system.box is not None:
            # same-fiber point pairs must stay within the nearest-image
            # half box for the self-image kernel split to be exact
            if np.max(system.lengths) >= 0.5 * float(system.box.min()):
                raise GeometryError(
                    f"fiber length {np.max(system.lengths):.6g} m must be "
                    f"below half the smallest box edge "
                    f"{0.5 * float(system.box.min()):.6g} m")
            h = self.params.stokeslet_grid_spacing
            if h is None:
                h = float(system.box.min()) / 64.0
            self.periodic = PeriodicStokeslet(system.box, grid_spacing=h)
        self.last_solution: SbfSolution | None = None

    # ------------------------------------------------------------------
    # kernels and quadrature
    # ------------------------------------------------------------------

    def _inner_integrals(self, targets: np.ndarray, source: int,
                         same_fiber: bool, contact: float = 0.0) -> np.ndarray:
        """int P_k(s') G(x_t - x_source(s')) ds' for each target point.

        Returns (T, N+1, 3, 3) in SI units (1/m scaled by the kernel).

        ``contact`` is the pair's body-contact distance, softening the
        cross-fiber kernel where the center-line expansion is invalid.

        Periodic systems split the kernel: the near-singular nearest-image
        free-space part keeps the adaptive rule, while the smooth image
        correction W -- whose accuracy is bounded by its interpolation
        grid, not by quadrature depth (and whose piecewise-linear kinks
        would defeat the GK error estimate) -- is integrated in one fixed
        GK15 pass over the outer panel grid. The split assumes the
        nearest-image branch is constant along the source line, which the
        fiber-length < box/2 guard enforces.
        """
        sys = self.system
        n = self.params.n_modes
        x_l = sys.centers[source]
        t_l = sys.tangents[source]
        hl_l = sys.half_lengths[source]
        radius = sys.radii[source]
        scale = self._length_ref
        targets = np.asarray(targets, dtype=float)

        def make_batch(kernel):
            def panel_batch(los, his):
                nodes, half = panel_nodes(los, his)           # (P, 15), (P,)
                src = x_l + hl_l * nodes[..., None] * t_l     # (P, 15, 3)
                r = targets[:, None, None, :] - src[None]     # (T, P, 15, 3)
                g = kernel(r) * scale
                pk = legendre_values(nodes.ravel(), n).reshape(
                    nodes.shape + (n + 1,))
                k15 = np.einsum("tpnij,n,pnk,p->ptkij", g, GK15_WEIGHTS,
                                pk, half)
                g7 = np.einsum("tpnij,n,pnk,p->ptkij", g, G7_WEIGHTS_PADDED,
                               pk, half)
                errs = np.max(np.abs(k15 - g7), axis=(1, 2, 3, 4))
                return k15, errs
            return panel_batch

        n_panels = self.params.n_panels
        if self.periodic is None:
            batch = make_batch(
                lambda r: greens_free(r, radius, same_fiber, contact))
            out = adaptive_gk(batch, n_initial=n_panels, tol=INNER_TOL)
            return out / scale

        per = self.periodic
        los = np.linspace(-1.0, 1.0, n_panels + 1)[:-1]
        his = np.linspace(-1.0, 1.0, n_panels + 1)[1:]
        w_vals, _ = make_batch(per.w_interp)(los, his)
        out = np.sum(w_vals, axis=0)
        if not same_fiber:
            batch = make_batch(
                lambda r: greens_free(per.wrap(r), radius,
                                      same_fiber=False, contact=contact))
            out = out + adaptive_gk(batch, n_initial=n_panels, tol=INNER_TOL)
        return out / scale

    def _interaction_pairs(self) -> list[tuple[int, int]]:
        m = self.system.n_fibers
        if self.periodic is None:
            return [(a, b) for a in range(m) for b in range(m) if a != b]
        return [(a, b) for a in range(m) for b in range(m)]

    def _assemble_theta(self) -> np.ndarray:
        """Theta[m, l, n, k] as an (M, M, N+1, N+1, 3, 3) array."""
        sys = self.system
        m = sys.n_fibers
        n = self.params.n_modes
        theta = np.zeros((m, m, n + 1, n + 1, 3, 3))
        done = set()
        for (tgt, src) in self._interaction_pairs():
            if (tgt, src) in done:
                continue
            targets = sys.centers[tgt] \
                + sys.half_lengths[tgt] * self._s_out[:, None] * sys.tangents[tgt]
            contact = 0.0 if tgt == src \
                else float(sys.radii[tgt] + sys.radii[src])
            inner = self._inner_integrals(targets, src,
                                          same_fiber=(tgt == src),
                                          contact=contact)
            theta[tgt, src] = np.einsum("qn,q,qkij->nkij",
                                        self._p_out, self._w_out, inner)
            done.add((tgt, src))
            # reciprocity: Theta^(lm)_{k,n} = Theta^(ml)_{n,k} whenever the
            # pair kernel is shared (equal source radii)
            if tgt != src and sys.radii[tgt] == sys.radii[src]:
                theta[src, tgt] = np.swapaxes(theta[tgt, src], 0, 1)
                done.add((src, tgt))
        return theta

    def _warn_near_contact(self) -> float:
        dist, pair = self.system.min_separation()
        if pair is not None:
            contact = self.system.radii[pair[0]] + self.system.radii[pair[1]]
            if dist < contact:
                warnings.warn(
                    f"fibers {pair} are near contact: center-line distance "
                    f"{dist:.6g} m < {contact:.6g} m; interaction quadrature "
                    "is near-singular and no lubrication model is applied",
                    NearContactWarning, stacklevel=3)
        return dist

    # ------------------------------------------------------------------
    # linear system
    # ------------------------------------------------------------------

    def _project(self, vectors: np.ndarray):
        """Split (M, ..., 3) into parallel/perpendicular parts per fiber."""
        t = self.system.tangents
        t_b = t.reshape((t.shape[0],) + (1,) * (vectors.ndim - 2) + (3,))
        par = np.sum(vectors * t_b, axis=-1, keepdims=True) * t_b
        return par, vectors - par

    def _apply_diagonal(self, a: np.ndarray) -> np.ndarray:
        par, perp = self._project(a)
        return self._c_par[..., None] * par + self._c_perp[..., None] * perp

    def _apply_precond(self, a: np.ndarray) -> np.ndarray:
        par, perp = self._project(a)
        return par / self._c_par[..., None] + perp / self._c_perp[..., None]

    def _mode_prefactors(self) -> np.ndarray:
        n = self.params.n_modes
        return (2.0 * np.arange(1, n + 1) + 1.0) / 2.0  # (N,)

    def _apply_coupling(self, theta: np.ndarray, a: np.ndarray) -> np.ndarray:
        """C a: interaction velocity projections from modes k >= 1."""
        s = np.einsum("mlnkij,lkj->mni", theta[:, :, 1:, 1:], a)  # (M, N, 3)
        out = self.system.half_lengths[:, None, None] \
            * self._mode_prefactors()[None, :, None] * s
        # the mode-1 row only constrains the parallel component (the
        # perpendicular part is the interaction-free torque closure)
        par, _ = self._project(out[:, :1, :])
        out[:, :1, :] = par
        return out

    def _rhs(self, theta: np.ndarray) -> np.ndarray:
        sys = self.system
        n = self.params.n_modes
        s0 = np.einsum("mlnij,lj->mni", theta[:, :, 1:, 0], 0.5 * sys.forces)
        b = -sys.half_lengths[:, None, None] \
            * self._mode_prefactors()[None, :, None] * s0
        par, _ = self._project(b[:, :1, :])
        b[:, :1, :] = par
        b[:, 0, :] += (1.5 / sys.half_lengths[:, None]) \
            * np.cross(sys.torques, sys.tangents)
        return b

    def _check_torques(self) -> None:
        sys = self.system
        axial = np.abs(np.einsum("mi,mi->m", sys.torques, sys.tangents))
        mags = np.linalg.norm(sys.torques, axis=1)
        bad = axial > 1e-9 * np.maximum(mags, 1e-300)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise GeometryError(
                f"torque on fiber {i} has an axial component "
                f"({axial[i]:.3e} of {mags[i]:.3e}); axial spin carries no "
                "resistance at this order and cannot be balanced")

    def solve(self) -> SbfSolution:
        """Solve for the force density and rigid-body velocities."""
        self._check_torques()
        sys = self.system
        m, n = sys.n_fibers, self.params.n_modes
        min_sep = self._warn_near_contact()
        pairs = self._interaction_pairs()
        theta = self._assemble_theta() if pairs else np.zeros(
            (m, m, n + 1, n + 1, 3, 3))
        b = self._rhs(theta)
        iterations = 0
        if not pairs:
            a = self._apply_precond(b)
        else:
            size = 3 * m * n
            bp = self._apply_precond(b).ravel()

            def matvec(v):
                aa = v.reshape(m, n, 3)
                return (aa + self._apply_precond(
                    self._apply_coupling(theta, aa))).ravel()

            counter = {"n": 0}

            def callback(_):
                counter["n"] += 1

            op = LinearOperator((size, size), matvec=matvec)
            restart = min(self.params.gmres_max_iter, size)
            outer = max(1, -(-self.params.gmres_max_iter // restart))
            x, info = gmres(op, bp, rtol=self.params.gmres_tol, atol=0.0,
                            restart=restart, maxiter=outer,
                            callback=callback, callback_type="pr_norm")
            iterations = counter["n"]
            if info != 0:
                res = np.linalg.norm(matvec(x) - bp)
                raise ConvergenceError(
                    f"interaction solve did not converge within "
                    f"{self.params.gmres_max_iter} iterations "
                    f"(preconditioned residual {res:.3e}, "
                    f"target {self.params.gmres_tol:.1e} relative)")
            a = x.reshape(m, n, 3)
        lf = LegendreForce(constant=0.5 * sys.forces.copy(), coefficients=a)
        xdot, tdot = self._velocities(theta, lf)
        sol = SbfSolution(forces=lf, translational=xdot, tangent_rates=tdot,
                          gmres_iterations=iterations, min_separation=min_sep)
        self.last_solution = sol
        return sol

    # ------------------------------------------------------------------
    # kinematics
    # ------------------------------------------------------------------

    def _velocities(self, theta: np.ndarray, lf: LegendreForce):
        sys = self.system
        mu = sys.viscosity
        t = sys.tangents
        d = sys.drag_parameters[:, None]
        hl = sys.half_lengths[:, None]
        a_full = np.concatenate([lf.constant[:, None, :], lf.coefficients],
                                axis=1)                      # (M, N+1, 3)
        s = np.einsum("mlnkij,lkj->mni", theta, a_full)      # (M, N+1, 3)
        v0 = 0.5 * s[:, 0, :]
        v1 = 1.5 * s[:, 1, :]
        f_par, f_perp = self._project(sys.forces)
        xdot = (2.0 * d * f_par + (d + 2.0) * f_perp) / (8.0 * math.pi * mu
                                                         * 2.0 * hl) \
            + v0 / (8.0 * math.pi * mu)
        _, v1_perp = self._project(v1)
        tdot = 3.0 * d * np.cross(sys.torques, t) / (16.0 * math.pi * mu
                                                     * hl ** 3) \
            + v1_perp / (8.0 * math.pi * mu * hl)
        return xdot, tdot

    def interaction_velocity(self, forces: LegendreForce, fiber: int,
                             arc_points) -> np.ndarray:
        """Fluid velocity induced on fiber `fiber` by all other force
        densities, at arc-length positions `arc_points` (m, in
        [-half_length, half_length]). Returns (len(arc_points), 3) in m/s.
        """
        sys = self.system
        self._warn_near_contact()
        pts = np.atleast_1d(np.asarray(arc_points, dtype=float))
        if np.any(np.abs(pts) > sys.half_lengths[fiber] * (1 + 1e-12)):
            raise GeometryError("arc position outside the fiber")
        targets = sys.centers[fiber] + pts[:, None] * sys.tangents[fiber]
        a_full = np.concatenate([forces.constant[:, None, :],
                                 forces.coefficients], axis=1)
        out = np.zeros((len(pts), 3))
        for (tgt, src) in self._interaction_pairs():
            if tgt != fiber:
                continue
            inner = self._inner_integrals(targets, src,
                                          same_fiber=(tgt == src))
            out += np.einsum("tkij,kj->ti", inner, a_full[src])
        return out / (8.0 * math.pi * sys.viscosity)

    # ------------------------------------------------------------------
    # time stepping
    # ------------------------------------------------------------------

    def step(self) -> SbfSolution:
        """Advance one explicit-midpoint step; returns the pre-step solution."""
        if self.params.dt is None:
            raise ConfigError("SbfParams.dt must be set to advance in time")
        dt = self.params.dt
        sys = self.system
        x0 = sys.centers.copy()
        t0 = sys.tangents.copy()
        sol1 = self.solve()
        sys.centers = x0 + 0.5 * dt * sol1.translational
        sys.tangents = _unit_rows(t0 + 0.5 * dt * sol1.tangent_rates)
        sol2 = self.solve()
        sys.centers = x0 + dt * sol2.translational
        sys.tangents = _unit_rows(t0 + dt * sol2.tangent_rates)
        # Overlap for a center-line theory means one fiber's axis cutting
        # deep into the other fiber's body.  Close-orbit passes legitimately
        # graze down to about one radius of center-line distance (the
        # no-lubrication zone below the radius sum is reported as a warning
        # by the solves above), so the hard error fires only once the axes
        # interpenetrate past half a radius -- a state no contact-free
        # trajectory reaches.
        dist, pair = sys.min_separation()
        if pair is not None:
            limit = 0.5 * max(float(sys.radii[pair[0]]), float(sys.radii[pair[1]]))
            if dist <= limit:
                raise GeometryError(
                    f"fibers {pair[0]} and {pair[1]} overlap after step: "
                    f"center-line distance {dist:.6g} m <= half the fiber "
                    f"radius {limit:.6g} m")
        self.last_solution = sol1
        return sol1


def _unit_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)

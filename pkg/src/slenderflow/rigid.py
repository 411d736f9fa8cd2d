"""Newton-Euler integration of rigid spherocylinders.

Semi-implicit (symplectic) Euler at the solver time step: velocities are
kicked by the accumulated loads first, positions/orientations then drift
with the new velocities. Rotation integrates the body-frame Euler
equations including the gyroscopic term, followed by a quaternion update
and renormalization. Loads accumulate between steps and are cleared by
integrate().

Contacts are detected (segment-segment surface distance), never resolved:
overlap raises GeometryError. The target scenarios are contact-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import RigidState, Spherocylinder, quat_multiply, rotation_matrix
from .errors import GeometryError


def segment_distance(p0: np.ndarray, q0: np.ndarray,
                     p1: np.ndarray, q1: np.ndarray) -> float:
    """Minimum distance between segments [p0,q0] and [p1,q1].

    Standard clamped closest-point computation (Ericson, Real-Time
    Collision Detection, 5.1.9), robust for parallel and degenerate
    segments.
    """
    d1 = q0 - p0
    d2 = q1 - p1
    r = p0 - p1
    a = float(np.dot(d1, d1))
    e = float(np.dot(d2, d2))
    f = float(np.dot(d2, r))
    eps = 1e-30
    if a <= eps and e <= eps:
        return float(np.linalg.norm(r))
    if a <= eps:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = float(np.dot(d1, r))
        if e <= eps:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = float(np.dot(d1, d2))
            denom = a * e - b * b
            if denom > eps * a * e:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0  # parallel: pick an end, then optimize t
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    closest0 = p0 + s * d1
    closest1 = p1 + t * d2
    return float(np.linalg.norm(closest0 - closest1))


def surface_gap(shape_a: Spherocylinder, state_a: RigidState,
                shape_b: Spherocylinder, state_b: RigidState,
                box: np.ndarray | None = None) -> float:
    """Surface-to-surface distance of two spherocylinders (< 0 = overlap).

    With box set (periodic domain edge lengths), the nearest periodic
    image of body b is used; valid while each segment is shorter than
    half the box.
    """
    ta, tb = state_a.tangent, state_b.tangent
    ha = 0.5 * shape_a.cap_free_length
    hb = 0.5 * shape_b.cap_free_length
    pa = state_a.position
    offsets = [np.zeros(3)]
    if box is not None:
        box = np.asarray(box, dtype=float)
        offsets = [np.array([i, j, k]) * box
                   for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)]
    best = math.inf
    for off in offsets:
        pb = state_b.position + off
        d = segment_distance(pa - ha * ta, pa + ha * ta,
                             pb - hb * tb, pb + hb * tb)
        best = min(best, d)
    return best - shape_a.radius - shape_b.radius


@dataclass
class _Body:
    shape: Spherocylinder
    state: RigidState
    mass: float
    inertia_body: np.ndarray  # diag(I_t, I_t, I_a), symmetry axis = body z
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))


class BodySet:
    """Rigid spherocylinders with per-step load accumulators."""

    def __init__(self, shapes: list[Spherocylinder], states: list[RigidState],
                 periodic_box: np.ndarray | None = None):
        if len(shapes) != len(states):
            raise ValueError("one state per shape required")
        self.periodic_box = None if periodic_box is None \
            else np.asarray(periodic_box, dtype=float)
        self._bodies: list[_Body] = []
        for shape, state in zip(shapes, states):
            mass = shape.mass()
            i_ax, i_tr = shape.inertia_principal()
            self._bodies.append(_Body(
                shape=shape, state=state, mass=mass,
                inertia_body=np.array([i_tr, i_tr, i_ax])))
        self._check_overlap("initial configuration")

    def __len__(self) -> int:
        return len(self._bodies)

    @property
    def shapes(self) -> list[Spherocylinder]:
        return [b.shape for b in self._bodies]

    @property
    def states(self) -> list[RigidState]:
        return [b.state for b in self._bodies]

    def body(self, i: int) -> _Body:
        return self._bodies[i]

    def accumulate(self, i: int, force: np.ndarray, torque: np.ndarray) -> None:
        """Add a force [N] and torque [N m] about the center of body i."""
        force = np.asarray(force, dtype=float)
        torque = np.asarray(torque, dtype=float)
        if not (np.all(np.isfinite(force)) and np.all(np.isfinite(torque))):
            raise ValueError(f"non-finite load on body {i}: F={force}, M={torque}")
        self._bodies[i].force += force
        self._bodies[i].torque += torque

    def accumulate_force_at(self, i: int, force: np.ndarray,
                            point: np.ndarray) -> None:
        """Add a force applied at a world point: torque (point - x_C) x F."""
        point = np.asarray(point, dtype=float)
        lever = point - self._bodies[i].state.position
        self.accumulate(i, force, np.cross(lever, force))

    def clear_loads(self) -> None:
        for b in self._bodies:
            b.force[:] = 0.0
            b.torque[:] = 0.0

    def integrate(self, dt: float) -> list[RigidState]:
        """One semi-implicit Euler step for every body; clears accumulators."""
        for b in self._bodies:
            s = b.state
            # linear: kick then drift
            s.velocity = s.velocity + (b.force / b.mass) * dt
            s.position = s.position + s.velocity * dt
            # angular: body-frame Euler equations with gyroscopic term
            rot = rotation_matrix(s.orientation)
            w_body = rot.T @ s.angular_velocity
            m_body = rot.T @ b.torque
            i_b = b.inertia_body
            w_body = w_body + dt * (m_body - np.cross(w_body, i_b * w_body)) / i_b
            s.angular_velocity = rot @ w_body
            # quaternion drift with the updated angular velocity
            omega_quat = np.concatenate(([0.0], s.angular_velocity))
            s.orientation = s.orientation \
                + 0.5 * dt * quat_multiply(omega_quat, s.orientation)
            s.orientation = s.orientation / np.linalg.norm(s.orientation)
        self.clear_loads()
        self._check_overlap("after integration step")
        return self.states

    def min_surface_gap(self) -> float:
        """Smallest pairwise surface distance [m]; inf for a single body."""
        gap = math.inf
        for i in range(len(self._bodies)):
            for j in range(i + 1, len(self._bodies)):
                gap = min(gap, surface_gap(
                    self._bodies[i].shape, self._bodies[i].state,
                    self._bodies[j].shape, self._bodies[j].state,
                    box=self.periodic_box))
        return gap

    def kinetic_energy(self) -> float:
        """Translational plus rotational kinetic energy [J]."""
        e = 0.0
        for b in self._bodies:
            s = b.state
            w_body = rotation_matrix(s.orientation).T @ s.angular_velocity
            e += 0.5 * b.mass * float(np.dot(s.velocity, s.velocity))
            e += 0.5 * float(np.dot(w_body, b.inertia_body * w_body))
        return e

    def _check_overlap(self, when: str) -> None:
        gap = self.min_surface_gap()
        if gap <= 0.0:
            raise GeometryError(
                f"spherocylinder overlap {when} (surface gap {gap:.3e} m); "
                "contact resolution is out of scope")


def quaternion_drift(q: np.ndarray, omega_world: np.ndarray, dt: float) -> np.ndarray:
    """One explicit quaternion update q += dt/2 (0, w) q, renormalized."""
    omega_quat = np.concatenate(([0.0], np.asarray(omega_world, dtype=float)))
    q_new = q + 0.5 * dt * quat_multiply(omega_quat, q)
    return q_new / np.linalg.norm(q_new)

"""Core domain types, unit conversions, and small geometric/physical ops.

Unit conventions (locked for the whole package):
    length   meter
    time     second
    mass     kilogram
    force    newton
    density  kg/m^3
    dynamic viscosity  Pa s
    kinematic viscosity  m^2/s

Orientation is stored as a unit quaternion (w, x, y, z), Hamilton product,
rotating body frame into world frame. A particle's symmetry axis is the
body z axis; its world tangent is R(q) @ ez.

Aspect-ratio conventions for an elongated particle of total length L and
cross-section radius r:
    inverse slenderness  1/eps = L / r
    axial ratio          a     = L / (2 r)  (used by the rod-friction fits)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

STANDARD_GRAVITY = 9.81  # m/s^2


# ----------------------------------------------------------------------
# fluid and particle types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FluidProperties:
    """Newtonian fluid at rest: density [kg/m^3], kinematic viscosity [m^2/s]."""

    density: float
    kinematic_viscosity: float

    def __post_init__(self):
        if self.density <= 0.0:
            raise ValueError(f"fluid density must be > 0, got {self.density}")
        if self.kinematic_viscosity <= 0.0:
            raise ValueError(
                f"kinematic viscosity must be > 0, got {self.kinematic_viscosity}")

    @property
    def dynamic_viscosity(self) -> float:
        """mu = rho * nu [Pa s]."""
        return self.density * self.kinematic_viscosity


@dataclass(frozen=True)
class Spherocylinder:
    """Cylinder of radius r capped by two hemispheres; total tip-to-tip length L.

    The straight section has length L - 2r >= 0; L = 2r degenerates to a
    sphere (allowed so the sphere limit stays constructible). The rod
    theories and solver presets additionally require axial_ratio >= 2 and
    enforce it at their own entry points. density is the particle density
    [kg/m^3] when mass properties are needed.
    """

    radius: float
    length: float
    density: float | None = None

    def __post_init__(self):
        if self.radius <= 0.0:
            raise GeometryError(f"radius must be > 0, got {self.radius}")
        if self.length < 2.0 * self.radius:
            raise GeometryError(
                f"spherocylinder needs length >= 2*radius, "
                f"got L={self.length}, r={self.radius}")
        if self.density is not None and self.density <= 0.0:
            raise GeometryError(f"density must be > 0, got {self.density}")

    @property
    def inverse_slenderness(self) -> float:
        """1/eps = L/r."""
        return self.length / self.radius

    @property
    def axial_ratio(self) -> float:
        """a = L/(2r)."""
        return self.length / (2.0 * self.radius)

    @property
    def cap_free_length(self) -> float:
        """Straight-section length L - 2r."""
        return self.length - 2.0 * self.radius

    @property
    def volume(self) -> float:
        """Cylinder plus two hemispherical caps [m^3]."""
        r, L = self.radius, self.length
        return math.pi * r * r * (L - 2.0 * r) + (4.0 / 3.0) * math.pi * r ** 3

    def mass(self, particle_density: float | None = None) -> float:
        return self._density(particle_density) * self.volume

    def _density(self, override: float | None) -> float:
        rho = self.density if override is None else override
        if rho is None:
            raise ValueError("particle density not set")
        return rho

    def inertia_principal(
            self, particle_density: float | None = None) -> tuple[float, float]:
        """Principal moments (I_axial, I_transverse) about the centroid [kg m^2].

        I_axial is about the symmetry axis; I_transverse about any
        perpendicular axis through the centroid. Composed from the solid
        cylinder and the two hemispherical caps (parallel-axis shifted;
        a hemisphere's own centroid sits 3r/8 from its flat face).
        """
        rho = self._density(particle_density)
        r = self.radius
        h = self.length - 2.0 * r  # straight-section length
        m_cyl = rho * math.pi * r * r * h
        m_hemi = rho * (2.0 / 3.0) * math.pi * r ** 3  # each cap

        i_axial = 0.5 * m_cyl * r * r + 2.0 * (2.0 / 5.0) * m_hemi * r * r

        # hemisphere about its own centroid: 83/320 m r^2; centroid offset
        # from the particle center: h/2 + 3r/8
        d_cap = 0.5 * h + 0.375 * r
        i_trans = (m_cyl * (r * r / 4.0 + h * h / 12.0)
                   + 2.0 * (m_hemi * (83.0 / 320.0) * r * r + m_hemi * d_cap * d_cap))
        return i_axial, i_trans


@dataclass(frozen=True)
class EllipsoidalFiber:
    """Slender spheroidal fiber: half-length l and slenderness eps = r/L.

    The spectral slender-body solver's shape family. The drag parameter
    d = -ln(eps^2 e) = 2 ln(1/eps) - 1 must be positive, which bounds
    eps < e^{-1/2}; we additionally require eps < 1/2.
    """

    half_length: float
    slenderness: float

    def __post_init__(self):
        if self.half_length <= 0.0:
            raise GeometryError(f"half-length must be > 0, got {self.half_length}")
        if not 0.0 < self.slenderness < 0.5:
            raise GeometryError(
                f"slenderness must satisfy 0 < eps < 1/2, got {self.slenderness}")

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    @property
    def radius(self) -> float:
        """Mid-fiber cross-section radius r = eps * L."""
        return self.slenderness * self.length

    @property
    def drag_parameter(self) -> float:
        """d = -ln(eps^2 e) = 2 ln(1/eps) - 1 > 0."""
        return -math.log(self.slenderness ** 2 * math.e)


@dataclass
class RigidState:
    """Instantaneous rigid-body state in world coordinates.

    position [m], orientation (unit quaternion, body->world), velocity [m/s],
    angular velocity [rad/s].
    """

    position: np.ndarray
    orientation: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.orientation = np.asarray(self.orientation, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float)
        n = np.linalg.norm(self.orientation)
        if not 0.99 < n < 1.01:
            raise ValueError(f"orientation quaternion far from unit norm: {n}")
        self.orientation = self.orientation / n

    @property
    def tangent(self) -> np.ndarray:
        """World-frame symmetry axis, R(q) @ ez."""
        return quat_rotate(self.orientation, np.array([0.0, 0.0, 1.0]))

    def copy(self) -> "RigidState":
        return RigidState(self.position.copy(), self.orientation.copy(),
                          self.velocity.copy(), self.angular_velocity.copy())


# ----------------------------------------------------------------------
# quaternions (w, x, y, z), Hamilton convention
# ----------------------------------------------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b (apply b's rotation first, then a's)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q (body->world)."""
    w = q[0]
    u = q[1:]
    # v' = v + 2 w (u x v) + 2 u x (u x v)
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    return np.concatenate(([math.cos(half)], math.sin(half) * axis / n))


def quat_from_tangent(t: np.ndarray) -> np.ndarray:
    """A unit quaternion mapping ez onto the given direction t."""
    t = np.asarray(t, dtype=float)
    t = t / np.linalg.norm(t)
    c = t[2]  # dot(ez, t)
    if c > -0.9:
        # shortest arc: q = [1 + c, ez x t] / sqrt(2 (1 + c)), exact
        q = np.array([1.0 + c, -t[1], t[0], 0.0])
        return q / math.sqrt(2.0 * (1.0 + c))
    # near anti-parallel: 180 degrees about the (ez + t) bisector maps
    # ez onto t exactly; fall back to the x axis when t == -ez
    u = t + np.array([0.0, 0.0, 1.0])
    n = np.linalg.norm(u)
    if n < 1e-14:
        return np.array([0.0, 1.0, 0.0, 0.0])
    return np.concatenate(([0.0], u / n))


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of unit quaternion q."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


# ----------------------------------------------------------------------
# unit scales (SI <-> lattice)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class UnitScales:
    """Conversion between SI and lattice units.

    dx [m] and dt [s] are the lattice spacing and time step; rho0 [kg/m^3]
    is the reference density (lattice density is measured in units of rho0).
    Any quantity with dimensions rho^a m^b s^c converts by dividing by
    rho0^a dx^b dt^c.
    """

    dx: float
    dt: float
    rho0: float

    def __post_init__(self):
        if min(self.dx, self.dt, self.rho0) <= 0.0:
            raise ValueError("dx, dt, rho0 must all be > 0")

    def factor(self, density: int = 0, length: int = 0, time: int = 0) -> float:
        """SI magnitude of one lattice unit of rho^density m^length s^time."""
        return self.rho0 ** density * self.dx ** length * self.dt ** time

    def to_lattice(self, value, *, density: int = 0, length: int = 0,
                   time: int = 0):
        return np.asarray(value) / self.factor(density, length, time)

    def to_si(self, value, *, density: int = 0, length: int = 0, time: int = 0):
        return np.asarray(value) * self.factor(density, length, time)

    # named helpers for the conversions used throughout the package
    def velocity_to_lattice(self, v):
        return self.to_lattice(v, length=1, time=-1)

    def velocity_to_si(self, v):
        return self.to_si(v, length=1, time=-1)

    def force_to_lattice(self, f):
        return self.to_lattice(f, density=1, length=4, time=-2)

    def force_to_si(self, f):
        return self.to_si(f, density=1, length=4, time=-2)

    def torque_to_lattice(self, m):
        return self.to_lattice(m, density=1, length=5, time=-2)

    def torque_to_si(self, m):
        return self.to_si(m, density=1, length=5, time=-2)

    def viscosity_lattice(self, nu_si: float) -> float:
        """Kinematic viscosity in lattice units, nu dt/dx^2."""
        return float(self.to_lattice(nu_si, length=2, time=-1))


def derive_time_step(kinematic_viscosity: float, dx: float, tau: float) -> float:
    """Time step that realizes relaxation time tau at spacing dx.

    From nu = (tau - 1/2) cs^2 dx^2/dt with cs^2 = 1/3:
    dt = (tau - 1/2) dx^2 / (3 nu).
    """
    if tau <= 0.5:
        raise ValueError(f"tau must exceed 1/2 for positive viscosity, got {tau}")
    return (tau - 0.5) * dx * dx / (3.0 * kinematic_viscosity)


# ----------------------------------------------------------------------
# small physical ops
# ----------------------------------------------------------------------

def sphere_volume(radius: float) -> float:
    return (4.0 / 3.0) * math.pi * radius ** 3


def buoyant_force(volume: float, density_difference: float,
                  gravity: float = STANDARD_GRAVITY) -> float:
    """Net gravity-minus-buoyancy magnitude (rho_p - rho_f) g V [N]."""
    return density_difference * gravity * volume


def driving_force(volume: float, particle_density: float, fluid_density: float,
                  gravity_vector: np.ndarray) -> np.ndarray:
    """Gravity-minus-buoyancy force vector (rho_p - rho_f) V g [N]."""
    g = np.asarray(gravity_vector, dtype=float)
    return (particle_density - fluid_density) * volume * g


def particle_reynolds(speed: float, length_scale: float,
                      kinematic_viscosity: float) -> float:
    """Re = U L / nu for the caller's choice of length scale (length or diameter)."""
    return speed * length_scale / kinematic_viscosity

"""Oracle tests for the core domain types and unit handling.

Oracle classes:
  [TRIVIAL]  limits and identities checked by direct assertion
  [DERIVED]  values recomputed by an independent method (closed form by
             hand, Monte-Carlo integration, dimensional analysis)
  [PAPER]    golden numbers from the published validation study
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderflow.core import (
    EllipsoidalFiber,
    FluidProperties,
    RigidState,
    Spherocylinder,
    UnitScales,
    buoyant_force,
    derive_time_step,
    driving_force,
    particle_reynolds,
    quat_from_axis_angle,
    quat_from_tangent,
    quat_multiply,
    quat_normalize,
    quat_rotate,
    rotation_matrix,
    sphere_volume,
)
from slenderflow.errors import GeometryError


# ----------------------------------------------------------------------
# fluid properties
# ----------------------------------------------------------------------

def test_dynamic_viscosity_is_product():
    # [TRIVIAL] mu = rho * nu by construction
    f = FluidProperties(density=1000.0, kinematic_viscosity=1e-6)
    assert f.dynamic_viscosity == 1000.0 * 1e-6


@pytest.mark.parametrize("rho,nu", [(-1.0, 1e-6), (0.0, 1e-6), (1000.0, 0.0)])
def test_fluid_validation(rho, nu):
    with pytest.raises(ValueError):
        FluidProperties(rho, nu)


# ----------------------------------------------------------------------
# spherocylinder geometry
# ----------------------------------------------------------------------

def test_volume_sphere_limit():
    # [TRIVIAL] L = 2r degenerates to a solid sphere
    p = Spherocylinder(radius=1.0, length=2.0)
    assert p.volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
    assert p.volume == pytest.approx(sphere_volume(1.0), rel=1e-15)


def test_volume_paper_geometries():
    # [DERIVED] direct evaluation of pi r^2 (L-2r) + (4/3) pi r^3, values
    # cross-checked against the study's driving-force table
    p = Spherocylinder(radius=1.992e-5, length=1.992e-4)
    assert p.volume == pytest.approx(2.3177e-13, rel=1e-4)
    p2 = Spherocylinder(radius=4e-5, length=1.6e-4)
    assert p2.volume == pytest.approx(6.702e-13, rel=1e-4)


def test_spherocylinder_validation():
    with pytest.raises(GeometryError):
        Spherocylinder(radius=-1.0, length=1.0)
    with pytest.raises(GeometryError):
        Spherocylinder(radius=1.0, length=1.9)  # L < 2r impossible


def test_aspect_ratio_conventions():
    # [TRIVIAL] 1/eps = L/r, a = L/(2r), a = (1/eps)/2
    p = Spherocylinder(radius=4e-5, length=4e-4)
    assert p.inverse_slenderness == pytest.approx(10.0)
    assert p.axial_ratio == pytest.approx(5.0)
    assert p.axial_ratio == pytest.approx(p.inverse_slenderness / 2.0)
    assert p.cap_free_length == pytest.approx(4e-4 - 8e-5)


@given(r=st.floats(1e-6, 1e-3), scale=st.floats(2.0, 50.0))
def test_volume_monotone_in_length(r, scale):
    # volume strictly grows with L at fixed r
    v1 = Spherocylinder(radius=r, length=scale * r).volume
    v2 = Spherocylinder(radius=r, length=scale * r * 1.5).volume
    assert v2 > v1


def test_inertia_sphere_limit():
    # [TRIVIAL] L = 2r gives the solid-sphere value (2/5) m r^2 on all axes
    p = Spherocylinder(radius=1.0, length=2.0, density=1.0)
    m = p.mass()
    i_ax, i_tr = p.inertia_principal()
    assert i_ax == pytest.approx(0.4 * m, rel=1e-12)
    assert i_tr == pytest.approx(0.4 * m, rel=1e-12)


def test_inertia_monte_carlo_oracle():
    # [DERIVED] Monte-Carlo volume integration, r=1, L=4, rho=1, 1e6 samples.
    # Sample the bounding cylinder |z| <= L/2, x^2+y^2 <= r^2 and keep points
    # inside the capsule (distance to the axis segment <= r).
    r, length, rho = 1.0, 4.0, 1.0
    p = Spherocylinder(radius=r, length=length, density=rho)
    rng = np.random.default_rng(20240817)
    n = 1_000_000
    xy = rng.uniform(-r, r, size=(n, 2))
    z = rng.uniform(-length / 2.0, length / 2.0, size=n)
    in_disk = xy[:, 0] ** 2 + xy[:, 1] ** 2 <= r * r
    half_h = length / 2.0 - r
    z_seg = np.clip(z, -half_h, half_h)
    inside = (xy[:, 0] ** 2 + xy[:, 1] ** 2 + (z - z_seg) ** 2) <= r * r
    inside &= in_disk
    box_volume = (2 * r) ** 2 * length
    # (2r)^2 L box times fraction, but we sampled the square cross-section,
    # so weight each accepted point by the box volume / n
    w = box_volume / n
    mass_mc = rho * w * inside.sum()
    i_ax_mc = rho * w * np.sum((xy[inside, 0] ** 2 + xy[inside, 1] ** 2))
    i_tr_mc = rho * w * np.sum((xy[inside, 1] ** 2 + z[inside] ** 2))
    i_ax, i_tr = p.inertia_principal()
    assert p.mass() == pytest.approx(mass_mc, rel=5e-3)
    assert i_ax == pytest.approx(i_ax_mc, rel=5e-3)
    assert i_tr == pytest.approx(i_tr_mc, rel=5e-3)


def test_inertia_axisymmetric_spd():
    # two equal transverse eigenvalues, all positive
    p = Spherocylinder(radius=4e-5, length=4e-4, density=1492.0)
    i_ax, i_tr = p.inertia_principal()
    assert i_ax > 0 and i_tr > 0
    assert i_tr > i_ax  # elongated body: transverse moment dominates


def test_inertia_additivity():
    # [DERIVED] composite = cylinder + 2 shifted hemispheres (parallel axis)
    r, length, rho = 0.7, 3.0, 2.5
    p = Spherocylinder(radius=r, length=length, density=rho)
    h = length - 2 * r
    m_cyl = rho * math.pi * r * r * h
    m_hemi = rho * (2.0 / 3.0) * math.pi * r ** 3
    i_ax_expect = 0.5 * m_cyl * r * r + 2 * (2.0 / 5.0) * m_hemi * r * r
    d = h / 2 + 3 * r / 8
    i_tr_expect = (m_cyl * (r * r / 4 + h * h / 12)
                   + 2 * (m_hemi * (83.0 / 320.0) * r * r + m_hemi * d * d))
    i_ax, i_tr = p.inertia_principal()
    assert i_ax == pytest.approx(i_ax_expect, rel=1e-14)
    assert i_tr == pytest.approx(i_tr_expect, rel=1e-14)


# ----------------------------------------------------------------------
# ellipsoidal fiber
# ----------------------------------------------------------------------

def test_fiber_drag_parameter():
    # [TRIVIAL] d = 2 ln(1/eps) - 1
    f = EllipsoidalFiber(half_length=2e-4, slenderness=0.1)
    assert f.drag_parameter == pytest.approx(2.0 * math.log(10.0) - 1.0, rel=1e-14)
    assert f.length == pytest.approx(4e-4)
    assert f.radius == pytest.approx(4e-5)


def test_fiber_validation():
    with pytest.raises(GeometryError):
        EllipsoidalFiber(half_length=1e-4, slenderness=0.6)
    with pytest.raises(GeometryError):
        EllipsoidalFiber(half_length=-1e-4, slenderness=0.1)


# ----------------------------------------------------------------------
# forces and dimensionless numbers
# ----------------------------------------------------------------------

def test_buoyant_force_neutral():
    # [TRIVIAL]
    assert buoyant_force(1e-12, 0.0) == 0.0


def test_buoyant_force_sphere_paper():
    # [PAPER] sphere r=4e-5 m, delta_rho=195 kg/m^3, g=9.81 -> 5.128e-10 N
    f = buoyant_force(sphere_volume(4e-5), 195.0)
    assert f == pytest.approx(5.128e-10, rel=1e-3)


def test_buoyant_force_spherocylinder_paper():
    # [PAPER] 1/eps=10 spherocylinder, r=4*4.98e-6 m, delta_rho=492 -> 1.119e-9 N
    r = 4 * 4.98e-6
    p = Spherocylinder(radius=r, length=10 * r)
    f = buoyant_force(p.volume, 492.0)
    assert f == pytest.approx(1.119e-9, rel=1e-3)


def test_driving_force_vector():
    # [TRIVIAL] direction follows gravity, magnitude matches scalar helper
    v = 2e-12
    g = np.array([0.0, 0.0, -9.81])
    f = driving_force(v, 1195.0, 1000.0, g)
    assert f[0] == 0.0 and f[1] == 0.0
    assert f[2] == pytest.approx(-buoyant_force(v, 195.0), rel=1e-14)


def test_reynolds_paper_value():
    # [PAPER] U=503e-6 m/s, diameter 8e-5 m, nu=1e-6 -> Re = 0.040
    assert particle_reynolds(503e-6, 8e-5, 1e-6) == pytest.approx(0.040, rel=1e-2)


def test_reynolds_tip_value():
    # [DERIVED] direct evaluation: 1e-8 * 8e-5 / 1e-6 = 8e-7 (the source
    # text's "8e-4" is an arithmetic slip; the oracle is the arithmetic)
    assert particle_reynolds(1e-8, 8e-5, 1e-6) == pytest.approx(8e-7, rel=1e-12)
    assert particle_reynolds(0.0, 8e-5, 1e-6) == 0.0


# ----------------------------------------------------------------------
# tau <-> dt and unit scales
# ----------------------------------------------------------------------

def test_derive_time_step_paper_values():
    # [PAPER] tau=6, dx=1e-5, nu=1e-6 -> 1.833e-4 s; dx=4.98e-6 -> 4.55e-5 s
    assert derive_time_step(1e-6, 1e-5, 6.0) == pytest.approx(1.833e-4, rel=1e-3)
    assert derive_time_step(1e-6, 4.98e-6, 6.0) == pytest.approx(4.55e-5, rel=1e-3)
    # [TRIVIAL] unit lattice
    assert derive_time_step(1.0 / 6.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-14)


@given(tau=st.floats(0.50001, 20.0), dx=st.floats(1e-7, 1e-3))
def test_derive_time_step_round_trip(tau, dx):
    # nu(dt) = (tau-1/2) dx^2/(3 dt) must reproduce nu to 1e-14 relative
    nu = 1e-6
    dt = derive_time_step(nu, dx, tau)
    nu_back = (tau - 0.5) * dx * dx / (3.0 * dt)
    assert nu_back == pytest.approx(nu, rel=1e-14)


def test_derive_time_step_rejects_unstable_tau():
    with pytest.raises(ValueError):
        derive_time_step(1e-6, 1e-5, 0.5)


def test_force_conversion_dimensional_oracle():
    # [DERIVED] F_lat = F_SI dt^2/(rho0 dx^4) by dimensional analysis
    s = UnitScales(dx=1e-5, dt=1.833e-4, rho0=1000.0)
    f_si = 5.128e-10
    expect = f_si * 1.833e-4 ** 2 / (1000.0 * 1e-5 ** 4)
    assert float(s.force_to_lattice(f_si)) == pytest.approx(expect, rel=1e-14)
    # velocity: 1 lattice unit = dx/dt
    assert float(s.velocity_to_si(1.0)) == pytest.approx(1e-5 / 1.833e-4, rel=1e-14)
    # fluid density rho0 -> 1 in lattice units
    assert float(s.to_lattice(1000.0, density=1)) == pytest.approx(1.0, rel=1e-14)


@given(
    value=st.floats(1e-12, 1e3),
    d=st.integers(-1, 1), ln=st.integers(-3, 5), t=st.integers(-2, 2),
)
def test_unit_conversion_round_trip(value, d, ln, t):
    s = UnitScales(dx=4.98e-6, dt=4.55e-5, rho0=1000.0)
    back = s.to_si(s.to_lattice(value, density=d, length=ln, time=t),
                   density=d, length=ln, time=t)
    assert float(back) == pytest.approx(value, rel=1e-14)


def test_viscosity_lattice_matches_tau():
    # nu_lat = (tau - 1/2)/3 when dt is derived from (nu, dx, tau)
    nu, dx, tau = 1e-6, 1e-5, 6.0
    s = UnitScales(dx=dx, dt=derive_time_step(nu, dx, tau), rho0=1000.0)
    assert s.viscosity_lattice(nu) == pytest.approx((tau - 0.5) / 3.0, rel=1e-14)


# ----------------------------------------------------------------------
# quaternions and rigid state
# ----------------------------------------------------------------------

def test_quat_rotate_matches_matrix():
    rng = np.random.default_rng(7)
    for _ in range(20):
        q = quat_normalize(rng.normal(size=4))
        v = rng.normal(size=3)
        np.testing.assert_allclose(quat_rotate(q, v), rotation_matrix(q) @ v,
                                   rtol=1e-12, atol=1e-12)


def test_quat_multiply_composes_rotations():
    rng = np.random.default_rng(8)
    a = quat_normalize(rng.normal(size=4))
    b = quat_normalize(rng.normal(size=4))
    v = rng.normal(size=3)
    np.testing.assert_allclose(quat_rotate(quat_multiply(a, b), v),
                               quat_rotate(a, quat_rotate(b, v)),
                               rtol=1e-12, atol=1e-12)


def test_quat_axis_angle():
    q = quat_from_axis_angle([0.0, 0.0, 1.0], math.pi / 2.0)
    np.testing.assert_allclose(quat_rotate(q, [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0],
                               atol=1e-14)


@given(st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3))
def test_quat_from_tangent_recovers_direction(vals):
    v = np.asarray(vals)
    n = np.linalg.norm(v)
    if n < 1e-3:
        return
    t = v / n
    q = quat_from_tangent(t)
    assert abs(np.linalg.norm(q) - 1.0) < 1e-12
    np.testing.assert_allclose(quat_rotate(q, [0.0, 0.0, 1.0]), t, atol=1e-9)


def test_rigid_state_tangent_and_norm():
    s = RigidState(position=[0.0, 0.0, 0.0],
                   orientation=[1.0 + 1e-3, 0.0, 0.0, 0.0])
    assert abs(np.linalg.norm(s.orientation) - 1.0) < 1e-12
    np.testing.assert_allclose(s.tangent, [0.0, 0.0, 1.0], atol=1e-15)
    with pytest.raises(ValueError):
        RigidState(position=[0.0, 0.0, 0.0], orientation=[2.0, 0.0, 0.0, 0.0])

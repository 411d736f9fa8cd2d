"""Oracle tests for the D3Q19 model layer (stencil, TRT parameters,
equilibrium, and the reference collision operator)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderflow.errors import ConfigError, StabilityError
from slenderflow.lbm.model import (
    C_LATTICE,
    OPPOSITE,
    W_LATTICE,
    TrtParams,
    collide_reference,
    equilibrium,
    equilibrium_split,
    magic_lambda_odd,
)

RNG = np.random.default_rng(20260814)


def _random_state(n=32, u_mag=0.05):
    rho = 1.0 + 0.1 * RNG.standard_normal(n)
    u = u_mag * RNG.uniform(-1.0, 1.0, (n, 3))  # |u| <= 0.087 < 0.3 c_s
    return rho, u


# ----------------------------------------------------------------------
# Stencil constants
# ----------------------------------------------------------------------

def test_weights_values():
    # [TRIVIAL] rest 1/3, six axis 1/18, twelve diagonal 1/36
    assert W_LATTICE.shape == (19,)
    assert W_LATTICE[0] == pytest.approx(1.0 / 3.0, rel=1e-15)
    speeds = np.sum(C_LATTICE ** 2, axis=1)
    assert np.all(W_LATTICE[speeds == 1] == pytest.approx(1.0 / 18.0))
    assert np.all(W_LATTICE[speeds == 2] == pytest.approx(1.0 / 36.0))
    assert np.sum(speeds == 0) == 1
    assert np.sum(speeds == 1) == 6
    assert np.sum(speeds == 2) == 12


def test_weight_moment_identities():
    # [DERIVED] Sum w = 1, Sum w c = 0, Sum w c c^T = (1/3) I exactly
    assert np.sum(W_LATTICE) == pytest.approx(1.0, abs=1e-16)
    first = np.einsum("q,qi->i", W_LATTICE, C_LATTICE)
    np.testing.assert_allclose(first, 0.0, atol=1e-16)
    second = np.einsum("q,qi,qj->ij", W_LATTICE, C_LATTICE, C_LATTICE)
    np.testing.assert_allclose(second, np.eye(3) / 3.0, atol=1e-15)


def test_velocity_set_structure():
    # [TRIVIAL] 19 distinct integer vectors with speeds {0, 1, sqrt(2)}
    assert C_LATTICE.shape == (19, 3)
    assert C_LATTICE.dtype.kind == "i"
    assert len({tuple(c) for c in C_LATTICE}) == 19
    assert tuple(C_LATTICE[0]) == (0, 0, 0)


def test_opposite_map():
    # [TRIVIAL] c[opposite(q)] == -c[q] for every direction
    np.testing.assert_array_equal(C_LATTICE[OPPOSITE], -C_LATTICE)
    # involution
    np.testing.assert_array_equal(OPPOSITE[OPPOSITE], np.arange(19))


# ----------------------------------------------------------------------
# TRT parameters
# ----------------------------------------------------------------------

def test_trt_magic_values_tau6():
    # [PAPER] tau = 6 -> lambda_e = -1/6, lambda_o = -88/47
    p = TrtParams(tau=6.0)
    assert p.omega == pytest.approx(1.0 / 6.0, rel=1e-15)
    assert p.lambda_even == pytest.approx(-1.0 / 6.0, rel=1e-15)
    assert p.lambda_odd == pytest.approx(-88.0 / 47.0, rel=1e-15)
    assert magic_lambda_odd(1.0 / 6.0) == pytest.approx(-88.0 / 47.0, rel=1e-15)


def test_trt_magic_parameter_combination():
    # [DERIVED] the magic combination (1/lambda_e + 1/2)(1/lambda_o + 1/2)
    # equals 3/16 for the default odd eigenvalue, any tau
    for tau in (0.6, 0.9, 1.7, 6.0, 20.0):
        p = TrtParams(tau=tau)
        magic = (-1.0 / p.lambda_even - 0.5) * (-1.0 / p.lambda_odd - 0.5)
        assert magic == pytest.approx(3.0 / 16.0, rel=1e-12)


@given(tau=st.floats(0.501, 100.0))
@settings(max_examples=200, deadline=None)
def test_trt_eigenvalue_bounds(tau):
    p = TrtParams(tau=tau)
    assert -2.0 < p.lambda_even < 0.0
    assert -2.0 < p.lambda_odd < 0.0


def test_trt_explicit_odd_override():
    # full-relaxation combination used by the collision oracle below
    p = TrtParams(tau=1.0, lambda_odd=-1.0)
    assert p.lambda_even == pytest.approx(-1.0)
    assert p.lambda_odd == -1.0


def test_trt_validation():
    with pytest.raises(ConfigError):
        TrtParams(tau=0.5)  # zero viscosity
    with pytest.raises(ConfigError):
        TrtParams(tau=-1.0)
    with pytest.raises(ConfigError):
        TrtParams(tau=1.0, lambda_odd=-2.5)  # outside (-2, 0]
    with pytest.raises(ConfigError):
        TrtParams(tau=1.0, lambda_odd=0.5)
    # 0.0 is allowed as an explicit override (no relaxation, streaming tests)
    assert TrtParams(tau=1.0, lambda_even=0.0, lambda_odd=0.0).lambda_even == 0.0


# ----------------------------------------------------------------------
# Equilibrium
# ----------------------------------------------------------------------

def test_equilibrium_rest():
    # [TRIVIAL] u = 0 -> f_q = w_q rho
    rho = np.array([0.9, 1.0, 1.1])
    u = np.zeros((3, 3))
    feq = equilibrium(rho, u)
    np.testing.assert_allclose(feq, rho[:, None] * W_LATTICE[None, :],
                               rtol=1e-15)


def test_equilibrium_moments():
    # [DERIVED] Sum_q feq = rho and Sum_q c_q feq = rho0 u to 1e-13
    # (algebraic identities of the D3Q19 weights; rho0 = 1 in lattice units)
    rho, u = _random_state(64)
    feq = equilibrium(rho, u)
    np.testing.assert_allclose(np.sum(feq, axis=-1), rho, rtol=0, atol=1e-13)
    mom = np.einsum("nq,qi->ni", feq, C_LATTICE)
    np.testing.assert_allclose(mom, u, rtol=0, atol=1e-13)


def test_equilibrium_split_recombines():
    # [TRIVIAL] even + odd = full; even symmetric, odd antisymmetric under q -> qbar
    rho, u = _random_state(16)
    feq = equilibrium(rho, u)
    even, odd = equilibrium_split(rho, u)
    np.testing.assert_allclose(even + odd, feq, rtol=0, atol=1e-16)
    np.testing.assert_allclose(even[:, OPPOSITE], even, rtol=0, atol=1e-16)
    np.testing.assert_allclose(odd[:, OPPOSITE], -odd, rtol=0, atol=1e-16)


def test_equilibrium_mach_guard():
    # |u| >= 0.3 c_s -> stability error (c_s = 1/sqrt(3) lattice units)
    limit = 0.3 / np.sqrt(3.0)
    equilibrium(np.ones(1), np.array([[0.99 * limit, 0.0, 0.0]]))  # fine
    with pytest.raises(StabilityError):
        equilibrium(np.ones(1), np.array([[1.01 * limit, 0.0, 0.0]]))
    with pytest.raises(StabilityError):
        equilibrium(np.ones(1), np.full((1, 3), 0.8 * limit))


# ----------------------------------------------------------------------
# Reference collision
# ----------------------------------------------------------------------

def test_collide_fixed_point():
    # [TRIVIAL] f = feq is a fixed point of the TRT operator
    rho, u = _random_state(8)
    feq = equilibrium(rho, u)
    out = collide_reference(feq, TrtParams(tau=0.8))
    np.testing.assert_allclose(out, feq, rtol=0, atol=1e-15)


def test_collide_mass_conservation():
    # [DERIVED] per-cell mass conserved to 1e-13 for arbitrary PDFs
    f = np.abs(1.0 + 0.3 * RNG.standard_normal((40, 19))) * W_LATTICE
    out = collide_reference(f, TrtParams(tau=1.3))
    np.testing.assert_allclose(np.sum(out, axis=-1), np.sum(f, axis=-1),
                               rtol=1e-13)


def test_collide_full_relaxation():
    # [TRIVIAL] tau = 1 with explicit lambda_odd = -1 collapses to f = feq
    f = np.abs(1.0 + 0.2 * RNG.standard_normal((12, 19))) * W_LATTICE
    out = collide_reference(f, TrtParams(tau=1.0, lambda_odd=-1.0))
    rho = np.sum(f, axis=-1)
    u = np.einsum("nq,qi->ni", f, C_LATTICE)
    np.testing.assert_allclose(out, equilibrium(rho, u), rtol=0, atol=1e-14)


def test_collide_momentum_relation():
    # [DERIVED] algebra of the odd relaxation: the post-collision momentum is
    # j + lambda_o (j - rho0 u') with u' = j/rho0 - u_corr, i.e. the collision
    # changes cell momentum by exactly lambda_o rho0 u_corr.
    params = TrtParams(tau=2.0)
    f = np.abs(1.0 + 0.25 * RNG.standard_normal((30, 19))) * W_LATTICE
    u_corr = np.array([0.013, -0.007, 0.004])
    out = collide_reference(f, params, u_corr=u_corr)
    j_before = np.einsum("nq,qi->ni", f, C_LATTICE)
    j_after = np.einsum("nq,qi->ni", out, C_LATTICE)
    expect = j_before + params.lambda_odd * u_corr[None, :]
    np.testing.assert_allclose(j_after, expect, rtol=0, atol=1e-13)


def test_collide_drift_removal_factor():
    # [DERIVED] uniform drift u0, stabilized collide: momentum scales by
    # (1 + lambda_o); the full-relaxation override gives exactly zero.
    u0 = np.array([[0.02, -0.01, 0.005]])
    f = equilibrium(np.ones(1), u0)
    # magic lambda_odd at tau = 1: -8/7, factor 1 - 8/7 = -1/7
    out = collide_reference(f, TrtParams(tau=1.0), u_corr=u0[0])
    j = np.einsum("nq,qi->ni", out, C_LATTICE)
    np.testing.assert_allclose(j, (1.0 - 8.0 / 7.0) * u0, rtol=0, atol=1e-15)
    # explicit lambda_odd = -1: momentum removed entirely in one collide
    out = collide_reference(f, TrtParams(tau=1.0, lambda_odd=-1.0), u_corr=u0[0])
    j = np.einsum("nq,qi->ni", out, C_LATTICE)
    np.testing.assert_allclose(j, 0.0, atol=1e-15)

"""Oracle tests for the free-space Stokes kernels and Legendre machinery."""

import numpy as np
import pytest
from scipy.integrate import quad

from slenderflow.errors import GeometryError
from slenderflow.sbf.greens import doublet, greens_free, stokeslet
from slenderflow.sbf.legendre import (
    adaptive_gk,
    composite_gauss,
    kbar_eigenvalues,
    legendre_values,
    panel_nodes,
    GK15_WEIGHTS,
    G7_WEIGHTS_PADDED,
)


# ----------------------------------------------------------------------
# Stokeslet / doublet
# ----------------------------------------------------------------------

def test_stokeslet_unit_axis():
    # [TRIVIAL] R = (1,0,0) -> diag(2,1,1)
    np.testing.assert_allclose(stokeslet(np.array([1.0, 0, 0])),
                               np.diag([2.0, 1.0, 1.0]), atol=1e-15)


def test_stokeslet_homogeneity_and_symmetry():
    # [DERIVED] S(cR) = S(R)/c; S(R) = S(-R) = S^T, 100 random R
    rng = np.random.default_rng(3)
    for _ in range(100):
        r = rng.normal(size=3)
        c = rng.uniform(0.1, 10.0)
        s = stokeslet(r)
        np.testing.assert_allclose(stokeslet(c * r), s / c, rtol=1e-12)
        np.testing.assert_allclose(stokeslet(-r), s, rtol=1e-15)
        np.testing.assert_allclose(s, s.T, rtol=1e-15)


def test_doublet_unit_axis_trace_scaling():
    # [TRIVIAL] R=(1,0,0) -> diag(-2,1,1); trace 0; D(cR) = D(R)/c^3
    d = doublet(np.array([1.0, 0, 0]))
    np.testing.assert_allclose(d, np.diag([-2.0, 1.0, 1.0]), atol=1e-15)
    rng = np.random.default_rng(4)
    for _ in range(50):
        r = rng.normal(size=3)
        c = rng.uniform(0.2, 5.0)
        dd = doublet(r)
        assert np.trace(dd) == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(doublet(c * r), dd / c ** 3, rtol=1e-12)


def test_kernel_singularity_raises():
    with pytest.raises(GeometryError):
        stokeslet(np.zeros(3))
    with pytest.raises(GeometryError):
        doublet(np.zeros(3))


def test_greens_free_branches():
    # [TRIVIAL] r_f = 0 -> pure Stokeslet; same fiber -> zero matrix
    r = np.array([0.3, -0.2, 0.5])
    np.testing.assert_allclose(greens_free(r, 0.0), stokeslet(r), rtol=1e-15)
    np.testing.assert_array_equal(greens_free(r, 1e-5, same_fiber=True),
                                  np.zeros((3, 3)))


def test_greens_doublet_decay_slope():
    # [DERIVED] relative doublet contribution decays like (r_f/|R|)^2:
    # log-log slope of |G - S|/|S| vs |R| is -2
    r_f = 1e-5
    dists = np.array([10, 20, 40, 80]) * r_f
    rel = []
    for dist in dists:
        r = np.array([dist, 0.0, 0.0])
        num = np.linalg.norm(greens_free(r, r_f) - stokeslet(r))
        rel.append(num / np.linalg.norm(stokeslet(r)))
    slopes = np.diff(np.log(rel)) / np.diff(np.log(dists))
    np.testing.assert_allclose(slopes, -2.0, atol=1e-9)
    # magnitude ~ (r_f/R)^2/2 within a geometry factor
    assert rel[0] == pytest.approx((r_f / dists[0]) ** 2 / 2.0, rel=1.0)


def test_batched_kernels_match_loop():
    rng = np.random.default_rng(5)
    rs = rng.normal(size=(4, 7, 3))
    batch = stokeslet(rs)
    for i in range(4):
        for j in range(7):
            np.testing.assert_allclose(batch[i, j], stokeslet(rs[i, j]),
                                       rtol=1e-15)


# ----------------------------------------------------------------------
# K-bar eigenvalues
# ----------------------------------------------------------------------

def _t_operator(n, s):
    """Numerical T[P_n](s) = int (P_n(s') - P_n(s))/|s' - s| ds'."""
    pn = np.polynomial.legendre.Legendre.basis(n)

    def integrand(sp):
        if abs(sp - s) < 1e-14:
            return 0.0
        return (pn(sp) - pn(s)) / abs(sp - s)

    val, _ = quad(integrand, -1.0, 1.0, points=[s], limit=200,
                  epsabs=1e-12, epsrel=1e-12)
    return val


def test_kbar_eigenvalue_0_and_1():
    # [TRIVIAL] lambda_0 = 0; [DERIVED] lambda_1 = -2 by hand integration:
    # T[P_1](s) = int sign(s'-s) ds' = (1-s) - (s+1) = -2 s
    lam = kbar_eigenvalues(1)
    assert lam[0] == 0.0
    assert lam[1] == pytest.approx(-2.0, abs=1e-15)
    for s in (-0.7, 0.1, 0.6):
        assert _t_operator(1, s) == pytest.approx(-2.0 * s, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_kbar_eigenvalues_numeric_operator(n):
    # [DERIVED] apply T numerically to P_n and fit against P_n: the ratio
    # must equal the recursion value everywhere to 1e-8
    lam = kbar_eigenvalues(n)[n]
    pn = np.polynomial.legendre.Legendre.basis(n)
    for s in (-0.83, -0.31, 0.17, 0.59, 0.91):
        if abs(pn(s)) < 0.05:
            continue
        ratio = _t_operator(n, s) / pn(s)
        assert ratio == pytest.approx(lam, abs=1e-8)


def test_kbar_recursion_structure():
    # lambda_n = lambda_{n-1} - 2/n = -2 H_n
    lam = kbar_eigenvalues(6)
    h = np.cumsum([0.0] + [1.0 / k for k in range(1, 7)])
    np.testing.assert_allclose(lam, -2.0 * h, rtol=1e-15)


# ----------------------------------------------------------------------
# quadrature utilities
# ----------------------------------------------------------------------

def test_composite_gauss_integrates_polynomials():
    x, w = composite_gauss(4, 3)
    # 3-point Gauss is exact through degree 5 on each panel
    for deg in range(6):
        exact = (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
        assert np.sum(w * x ** deg) == pytest.approx(exact, abs=1e-14)


def test_legendre_values_orthogonality():
    x, w = composite_gauss(8, 6)
    p = legendre_values(x, 5)
    gram = (p * w[:, None]).T @ p
    expect = np.diag([2.0 / (2 * n + 1) for n in range(6)])
    np.testing.assert_allclose(gram, expect, atol=1e-13)


def test_adaptive_gk_on_peaked_integrand():
    # integrand with a sharp peak: 1/(x^2 + a^2), exact = 2 atan(1/a)/a
    a = 1e-3

    def batch(los, his):
        xs, half = panel_nodes(los, his)
        f = 1.0 / (xs ** 2 + a * a)
        vals = half * np.sum(GK15_WEIGHTS * f, axis=1)
        errs = np.abs(half * np.sum((GK15_WEIGHTS - G7_WEIGHTS_PADDED) * f,
                                    axis=1))
        return vals, errs

    val = adaptive_gk(batch, tol=1e-10 * 2.0 / a)  # scale tol to magnitude
    exact = 2.0 * np.arctan(1.0 / a) / a
    assert val == pytest.approx(exact, rel=1e-9)

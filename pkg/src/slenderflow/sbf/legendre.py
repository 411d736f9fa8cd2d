"""Legendre machinery and quadrature for the spectral fiber solver.

The intra-fiber integral operator K[f](s) = (I + t t^T) T[f](s) with
T[g](s) = int (g(s') - g(s))/|s' - s| ds' over [-1, 1] diagonalizes on
Legendre polynomials: T[P_n] = lambda_n P_n with lambda_0 = 0 and the
recursion lambda_n = lambda_{n-1} - 2/n (i.e. lambda_n = -2 H_n). The
recursion is asserted against a numerical operator application in the
test suite rather than trusted blindly.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

from ..errors import ConvergenceError

# Gauss-Kronrod 15/7 rule on [-1, 1] (QUADPACK dqk15 constants).
# Odd-indexed Kronrod nodes coincide with the embedded 7-point Gauss rule.
_GK_NODES_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_GK_WEIGHTS_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_G7_WEIGHTS_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

GK15_NODES = np.concatenate((-_GK_NODES_HALF[:-1], _GK_NODES_HALF[::-1]))
GK15_WEIGHTS = np.concatenate((_GK_WEIGHTS_HALF[:-1], _GK_WEIGHTS_HALF[::-1]))
# embedded Gauss-7 weights aligned with the 15 Kronrod nodes (zero padding
# on the Kronrod-only nodes)
G7_WEIGHTS_PADDED = np.zeros(15)
G7_WEIGHTS_PADDED[1:-1:2] = np.concatenate(
    (_G7_WEIGHTS_HALF[:-1], _G7_WEIGHTS_HALF[::-1]))


def kbar_eigenvalues(n_max: int) -> np.ndarray:
    """Eigenvalues lambda_0..lambda_n of T on P_n: lambda_n = -2 H_n."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    lam = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        lam[n] = lam[n - 1] - 2.0 / n
    return lam


def legendre_values(x: np.ndarray, n_max: int) -> np.ndarray:
    """P_0..P_n at the points x, shape (len(x), n_max + 1)."""
    return legvander(np.asarray(x, dtype=float), n_max)


def composite_gauss(n_panels: int, nodes_per_panel: int = 3,
                    lo: float = -1.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule: n_panels uniform panels, fixed nodes per panel."""
    if n_panels < 1:
        raise ValueError("need at least one panel")
    base_x, base_w = leggauss(nodes_per_panel)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    w = (half[:, None] * base_w[None, :]).ravel()
    return x, w


def adaptive_gk(panel_batch, lo: float = -1.0, hi: float = 1.0,
                n_initial: int = 8, tol: float = 1e-10,
                max_panels: int = 4096):
    """Adaptive panel-bisection integration with the GK15/G7 pair.

    panel_batch(los, his) evaluates a batch of panels and returns
    (values, errors): values has shape (n_panels, ...) holding each
    panel's 15-point Kronrod integral, errors (n_panels,) the embedded
    |K15 - G7| estimate. Panels whose error exceeds their width-
    proportional share of tol are bisected. The final sum runs in
    ascending-panel order, so the result is deterministic.
    """
    los = np.linspace(lo, hi, n_initial + 1)[:-1]
    his = np.linspace(lo, hi, n_initial + 1)[1:]
    done: list[tuple[float, np.ndarray]] = []
    total = n_initial
    for _ in range(60):
        vals, errs = panel_batch(los, his)
        local_tol = tol * (his - los) / (hi - lo)
        ok = errs <= local_tol
        for i in np.flatnonzero(ok):
            done.append((float(los[i]), vals[i]))
        if np.all(ok):
            break
        bad = ~ok
        mids = 0.5 * (los[bad] + his[bad])
        los = np.concatenate((los[bad], mids))
        his = np.concatenate((mids, his[bad]))
        total += int(bad.sum())
        if total > max_panels:
            raise ConvergenceError(
                f"adaptive quadrature exceeded {max_panels} panels "
                f"(worst error {errs.max():.3e} vs tolerance {tol:.3e})")
    else:
        raise ConvergenceError("adaptive quadrature failed to converge")
    done.sort(key=lambda item: item[0])
    return np.sum([v for (_, v) in done], axis=0)


def panel_nodes(los: np.ndarray, his: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """GK15 nodes (n_panels, 15) and half-widths for a batch of panels."""
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    return mid[:, None] + half[:, None] * GK15_NODES[None, :], half

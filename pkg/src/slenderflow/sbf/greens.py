"""Free-space Stokes kernels: Stokeslet, doublet, and the fiber pair kernel.

All functions broadcast over leading axes: R of shape (..., 3) yields
(..., 3, 3). Units: R in meters, kernels in 1/m (Stokeslet) and 1/m^3
(doublet); the combined pair kernel is in 1/m.
"""

from __future__ import annotations

import numpy as np

from ..errors import GeometryError


def _soft_norm(r: np.ndarray, contact: float) -> tuple[np.ndarray, np.ndarray]:
    """Distance softened at the body-contact scale.

    Returns ``rho = (|R|^4 + contact^4)^(1/4)`` and R.  The quartic mean
    leaves the far field essentially exact (relative change (contact/|R|)^4/4)
    while saturating the kernels smoothly at the contact distance, inside
    which the center-line expansion has no validity anyway.  With
    ``contact = 0`` this is the plain distance.
    """
    r = np.asarray(r, dtype=float)
    dist2 = np.sum(r * r, axis=-1)
    if contact > 0.0:
        rho = (dist2 * dist2 + contact ** 4) ** 0.25
    else:
        if np.any(dist2 == 0.0):
            raise GeometryError("singular kernel evaluation at R = 0")
        rho = np.sqrt(dist2)
    return rho, r


def stokeslet(r: np.ndarray, contact: float = 0.0) -> np.ndarray:
    """Oseen tensor S(R) = I/|R| + R R^T/|R|^3, optionally softened.

    ``contact > 0`` replaces |R| by the quartic-mean distance of
    :func:`_soft_norm`, bounding the kernel at the body-contact scale.
    """
    rho, r = _soft_norm(r, contact)
    eye = np.broadcast_to(np.eye(3), r.shape + (3,))
    outer = r[..., :, None] * r[..., None, :]
    return eye / rho[..., None, None] + outer / (rho ** 3)[..., None, None]


def doublet(r: np.ndarray, contact: float = 0.0) -> np.ndarray:
    """Potential doublet D(R) = I/|R|^3 - 3 R R^T/|R|^5, optionally softened."""
    rho, r = _soft_norm(r, contact)
    eye = np.broadcast_to(np.eye(3), r.shape + (3,))
    outer = r[..., :, None] * r[..., None, :]
    return eye / (rho ** 3)[..., None, None] \
        - 3.0 * outer / (rho ** 5)[..., None, None]


def greens_free(r: np.ndarray, fiber_radius: float,
                same_fiber: bool = False, contact: float = 0.0) -> np.ndarray:
    """Pair kernel between fiber center-lines in free space.

    G = S(R) + (r_f^2/2) D(R) for distinct fibers; the self branch is the
    zero matrix (a fiber's own hydrodynamics lives in the local operator
    and the intra-fiber integral operator, not in G).

    ``contact`` softens both kernels at the body-contact distance (the sum
    of the pair's radii).  Below that separation the bodies' surfaces would
    interpenetrate and the center-line kernels lose meaning; holding the
    interaction near its contact-distance strength there keeps grazing
    passes integrable without altering the valid far field.
    """
    r = np.asarray(r, dtype=float)
    if same_fiber:
        return np.zeros(r.shape[:-1] + (3, 3))
    g = stokeslet(r, contact)
    if fiber_radius != 0.0:
        g = g + 0.5 * fiber_radius ** 2 * doublet(r, contact)
    return g

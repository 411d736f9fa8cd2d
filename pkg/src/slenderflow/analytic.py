"""Closed-form rod mobility references.

Three independent theories for the drag on a rigid rod of length L and
radius r in unbounded creeping flow:

- Cox leading-order slender-body coefficients for cylinders and prolate
  spheroids (translation only),
- the Tirado/Garcia de la Torre end-corrected cylinder fits (translation
  and rotation perpendicular to the axis),
- the explicit single-fiber formulas of the spectral slender-body method
  (translation and rotation), which coincide with the Cox spheroid values
  for lengthwise motion.

Conventions: eps = r/L (so 1/eps = L/r) and a = L/(2r). Rotation always
means rotation about an axis perpendicular to the rod axis; axial spin is
not modeled by any of these theories.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ValidityWarning

_COX_CONSTANTS = {
    # shape -> (C1 lengthwise, C2 sidewise) in gamma = 2 pi mu L/(ln(1/eps)+C1),
    # 4 pi mu L/(ln(1/eps)+C2)
    "cylinder": (math.log(2.0) - 1.5, math.log(2.0) - 0.5),
    "spheroid": (-0.5, 0.5),
}

# Tirado fits are quoted for 4 <= L/r <= 60 (boundary rows are used as
# references by the validation study, so the window is inclusive)
_TIRADO_VALID_INV_SLENDERNESS = (4.0, 60.0)


@dataclass(frozen=True)
class FrictionSet:
    """Drag coefficients of one rod: translation [kg/s], rotation [kg m^2/s].

    gamma_rotational is None for theories that only provide translation.
    """

    gamma_parallel: float
    gamma_perpendicular: float
    gamma_rotational: float | None
    provenance: str
    length: float

    def __post_init__(self):
        if self.gamma_parallel <= 0.0 or self.gamma_perpendicular <= 0.0:
            raise GeometryError(
                f"{self.provenance}: non-positive drag coefficient "
                f"(aspect ratio too small for this theory)")
        if self.gamma_rotational is not None and self.gamma_rotational <= 0.0:
            raise GeometryError(
                f"{self.provenance}: non-positive rotational drag coefficient")

    def resistance_matrix(self, tangent: np.ndarray) -> np.ndarray:
        """Xi = gamma_par t t^T + gamma_perp (I - t t^T)."""
        t = _unit(tangent)
        tt = np.outer(t, t)
        return self.gamma_parallel * tt + self.gamma_perpendicular * (np.eye(3) - tt)

    def terminal_velocity(self, force: np.ndarray, tangent: np.ndarray) -> np.ndarray:
        """U = Xi^{-1} F, decomposed along/normal to the rod axis."""
        t = _unit(tangent)
        force = np.asarray(force, dtype=float)
        f_par = np.dot(force, t) * t
        f_perp = force - f_par
        return f_par / self.gamma_parallel + f_perp / self.gamma_perpendicular

    def terminal_angular_velocity(self, torque: np.ndarray,
                                  tangent: np.ndarray) -> np.ndarray:
        """omega = M / gamma_r for torque M perpendicular to the rod axis."""
        if self.gamma_rotational is None:
            raise GeometryError(
                f"{self.provenance} provides no rotational coefficient")
        t = _unit(tangent)
        torque = np.asarray(torque, dtype=float)
        _require_perpendicular(torque, t)
        return torque / self.gamma_rotational

    def response(self, load: float, mode: str) -> float:
        """Scalar steady response: velocity [m/s] or angular velocity [1/s]."""
        if mode == "parallel":
            return load / self.gamma_parallel
        if mode == "perpendicular":
            return load / self.gamma_perpendicular
        if mode == "rotation":
            if self.gamma_rotational is None:
                raise GeometryError(
                    f"{self.provenance} provides no rotational coefficient")
            return load / self.gamma_rotational
        raise ValueError(f"unknown mode {mode!r}")


def _unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not 0.999999 < n < 1.000001:
        raise ValueError(f"tangent must be a unit vector, |t| = {n}")
    return v / n


def _require_perpendicular(torque: np.ndarray, tangent: np.ndarray) -> None:
    m = np.linalg.norm(torque)
    if m > 0.0 and abs(np.dot(torque, tangent)) > 1e-9 * m:
        raise GeometryError(
            "torque must be perpendicular to the rod axis "
            "(axial spin is not modeled)")


def cox_friction(epsilon: float, length: float, viscosity: float,
                 shape: str = "cylinder") -> FrictionSet:
    """Cox leading-order translational drag of a slender body.

    gamma_par = 2 pi mu L / (ln(1/eps) + C1)
    gamma_perp = 4 pi mu L / (ln(1/eps) + C2)
    with (C1, C2) = (ln 2 - 3/2, ln 2 - 1/2) for a cylinder and
    (-1/2, +1/2) for a prolate spheroid. No rotational coefficient.
    """
    if not 0.0 < epsilon < 0.5:
        raise GeometryError(f"need 0 < eps < 1/2, got eps={epsilon}")
    try:
        c1, c2 = _COX_CONSTANTS[shape]
    except KeyError:
        raise ValueError(f"shape must be one of {sorted(_COX_CONSTANTS)}, "
                         f"got {shape!r}") from None
    log_inv = math.log(1.0 / epsilon)
    if log_inv + c1 <= 0.0:
        raise GeometryError(
            f"aspect ratio too small for the Cox {shape} formula "
            f"(ln(1/eps)+C1 = {log_inv + c1:.4f} <= 0)")
    mu_l = viscosity * length
    return FrictionSet(
        gamma_parallel=2.0 * math.pi * mu_l / (log_inv + c1),
        gamma_perpendicular=4.0 * math.pi * mu_l / (log_inv + c2),
        gamma_rotational=None,
        provenance=f"Cox-{shape}",
        length=length,
    )


def tirado_corrections(a: float) -> tuple[float, float, float]:
    """End-effect corrections (upsilon_par, upsilon_perp, delta_perp) at a = L/(2r).

    Quadratic fits in 1/a; warns outside the fitted window 4 < 2a < 60.
    """
    if a <= 0.0:
        raise GeometryError(f"axial ratio must be > 0, got {a}")
    lo, hi = _TIRADO_VALID_INV_SLENDERNESS
    if not lo <= 2.0 * a <= hi:
        warnings.warn(
            f"Tirado fits evaluated outside validity window "
            f"{lo} < L/r < {hi} (L/r = {2.0 * a:g})", ValidityWarning,
            stacklevel=2)
    inv = 1.0 / a
    ups_par = -0.207 + 0.980 * inv - 0.133 * inv * inv
    ups_perp = 0.839 + 0.185 * inv + 0.233 * inv * inv
    delta_perp = -0.662 + 0.917 * inv - 0.050 * inv * inv
    return ups_par, ups_perp, delta_perp


def tirado_friction(length: float, radius: float, viscosity: float) -> FrictionSet:
    """End-corrected cylinder drag (translation and perpendicular rotation).

    gamma_par = 2 pi mu L / (ln a + upsilon_par)
    gamma_perp = 4 pi mu L / (ln a + upsilon_perp)
    gamma_rot = (pi/3) mu L^3 / (ln a + delta_perp)
    """
    if length <= 0.0 or radius <= 0.0:
        raise GeometryError("length and radius must be > 0")
    a = length / (2.0 * radius)
    ups_par, ups_perp, delta_perp = tirado_corrections(a)
    log_a = math.log(a)
    for name, denom in (("lengthwise", log_a + ups_par),
                        ("sidewise", log_a + ups_perp),
                        ("rotational", log_a + delta_perp)):
        if denom <= 0.0:
            raise GeometryError(
                f"aspect ratio too small for the Tirado {name} fit "
                f"(denominator {denom:.4f} <= 0 at a={a:g})")
    mu_l = viscosity * length
    return FrictionSet(
        gamma_parallel=2.0 * math.pi * mu_l / (log_a + ups_par),
        gamma_perpendicular=4.0 * math.pi * mu_l / (log_a + ups_perp),
        gamma_rotational=(math.pi / 3.0) * viscosity * length ** 3
                         / (log_a + delta_perp),
        provenance="Tirado",
        length=length,
    )


def slender_body_drag_parameter(epsilon: float) -> float:
    """d = -ln(eps^2 e) = 2 ln(1/eps) - 1, the spectral method's drag constant."""
    if not 0.0 < epsilon < 1.0:
        raise GeometryError(f"need 0 < eps < 1, got eps={epsilon}")
    return -math.log(epsilon * epsilon * math.e)


def sbf_single_fiber_friction(epsilon: float, length: float,
                              viscosity: float) -> FrictionSet:
    """FrictionSet equivalent of the explicit single-fiber formulas.

    gamma_par = 4 pi mu L / d, gamma_perp = 8 pi mu L / (d + 2),
    gamma_rot = 2 pi mu L^3 / (3 d), with d = 2 ln(1/eps) - 1. The
    lengthwise value coincides with the Cox spheroid coefficient.
    """
    d = slender_body_drag_parameter(epsilon)
    if d <= 0.0:
        raise GeometryError(
            f"aspect ratio too small for the slender-body formulas (d={d:.4f})")
    mu_l = viscosity * length
    return FrictionSet(
        gamma_parallel=4.0 * math.pi * mu_l / d,
        gamma_perpendicular=8.0 * math.pi * mu_l / (d + 2.0),
        gamma_rotational=2.0 * math.pi * viscosity * length ** 3 / (3.0 * d),
        provenance="slender-body",
        length=length,
    )


def sbf_single_fiber(force: np.ndarray, torque: np.ndarray, tangent: np.ndarray,
                     epsilon: float, length: float,
                     viscosity: float) -> tuple[np.ndarray, np.ndarray]:
    """Explicit single-fiber velocities of the spectral slender-body method.

    U = [d (I + t t^T) + 2 (I - t t^T)] F / (8 pi mu L)
    omega = 3 d M / (2 pi mu L^3)        (M must be perpendicular to t)

    Returns (U [m/s], omega [1/s]).
    """
    t = _unit(tangent)
    force = np.asarray(force, dtype=float)
    torque = np.asarray(torque, dtype=float)
    _require_perpendicular(torque, t)
    d = slender_body_drag_parameter(epsilon)
    tt = np.outer(t, t)
    mobility = (d * (np.eye(3) + tt) + 2.0 * (np.eye(3) - tt)) \
        / (8.0 * math.pi * viscosity * length)
    velocity = mobility @ force
    omega = 3.0 * d * torque / (2.0 * math.pi * viscosity * length ** 3)
    return velocity, omega

"""Metrics for tumbling-pair trajectories.

A tumbling run tracks two fibers settling side by side.  The pair
periodically swaps horizontal positions; one period is delimited by two
consecutive maxima of the lateral center-to-center separation, which is where
the pair passes through the broadside configuration, halfway between the
gravity-aligned arrangements the run starts from.  Maxima are located as
sign changes (positive to negative) of the
separation rate, with the boundary time interpolated linearly between the
bracketing samples, so a detected period is accurate to within one sample
interval.

Per period the metrics report the fall distance ``D*`` of the pair center,
the duration ``T*``, the settling speed ``U* = D*/T*``, the extremes of the
lateral and vertical velocity components over both bodies, and the extremes
of the separation.  The phase-space orbit pairs the lateral separation with
its rate; for a periodic tumble it is a closed curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError

#: Scalar fields compared between two tumbling summaries (period means).
COMPARE_FIELDS = (
    "period",
    "fall_distance",
    "settling_speed",
    "ux_min",
    "ux_max",
    "uz_min",
    "uz_max",
    "separation_min",
    "separation_max",
)


@dataclass(frozen=True)
class PeriodMetrics:
    """Descriptors of one complete tumbling period."""

    t_start: float
    t_end: float
    period: float           #: T* = t_end - t_start
    fall_distance: float    #: D* = drop of the pair center over the period
    settling_speed: float   #: U* = D* / T*
    ux_min: float           #: lateral velocity extremes over both bodies
    ux_max: float
    uz_min: float           #: vertical velocity extremes over both bodies
    uz_max: float
    separation_min: float   #: lateral center-to-center separation extremes
    separation_max: float


@dataclass(frozen=True)
class TumblingMetrics:
    """Period segmentation and per-period descriptors of a tumbling run."""

    periods: tuple[PeriodMetrics, ...]
    boundaries: np.ndarray   #: period boundary times, shape (k + 1,)
    orbit: np.ndarray        #: (n, 2) polyline of (separation, rate)

    def mean(self, field: str) -> float:
        """Mean of a :class:`PeriodMetrics` field over all complete periods."""
        return float(np.mean([getattr(p, field) for p in self.periods]))


def _longest_monotone_span(t: np.ndarray, rate: np.ndarray) -> tuple[float, str]:
    """Duration and direction of the longest stretch of one-signed rate."""
    sign = np.where(rate >= 0.0, 1, -1)
    best = (0.0, "widening")
    start = 0
    for i in range(1, sign.size + 1):
        if i == sign.size or sign[i] != sign[start]:
            span = float(t[i - 1] - t[start])
            if span > best[0]:
                best = (span, "widening" if sign[start] > 0 else "narrowing")
            start = i
    return best


def tumbling_metrics(
    t,
    positions,
    velocities,
    *,
    lateral_axis: int = 0,
    gravity_axis: int = 2,
) -> TumblingMetrics:
    """Segment a two-body trajectory into tumbling periods and describe them.

    Parameters
    ----------
    t:
        Sample times, shape ``(n,)``, strictly increasing.
    positions, velocities:
        Body centers and velocities, shape ``(n, 2, 3)`` (two bodies).
    lateral_axis, gravity_axis:
        Axis along which the pair separates and axis of gravity.

    Raises
    ------
    ConvergenceError
        If fewer than two separation maxima exist, i.e. no complete period
        was recorded.  The message reports the longest monotone span of the
        separation so truncated runs are diagnosable.
    """
    t = np.asarray(t, dtype=float).ravel()
    pos = np.asarray(positions, dtype=float)
    vel = np.asarray(velocities, dtype=float)
    if pos.shape != (t.size, 2, 3) or vel.shape != pos.shape:
        raise ValueError(
            "expected positions and velocities of shape (n, 2, 3) matching "
            f"t of length {t.size}; got {pos.shape} and {vel.shape}"
        )
    if t.size < 3:
        raise ValueError("need at least three samples")

    sep = pos[:, 1, lateral_axis] - pos[:, 0, lateral_axis]
    rate = vel[:, 1, lateral_axis] - vel[:, 0, lateral_axis]
    orbit = np.column_stack([sep, rate])

    widening = rate > 0.0
    crossing = np.nonzero(widening[:-1] & ~widening[1:])[0]
    if crossing.size < 2:
        span, direction = _longest_monotone_span(t, rate)
        raise ConvergenceError(
            "no complete tumbling period detected: found "
            f"{crossing.size} separation maxima but two are needed; the "
            f"longest monotone span is {direction} for {span:.6g} s of the "
            f"{t[-1] - t[0]:.6g} s recorded — run longer or sample sooner"
        )

    # Linear interpolation of the zero crossing of the separation rate.
    u0 = rate[crossing]
    u1 = rate[crossing + 1]
    frac = u0 / (u0 - u1)
    boundaries = t[crossing] + frac * (t[crossing + 1] - t[crossing])

    center_height = pos[:, :, gravity_axis].mean(axis=1)
    boundary_height = np.interp(boundaries, t, center_height)

    periods = []
    for k in range(boundaries.size - 1):
        t0, t1 = boundaries[k], boundaries[k + 1]
        # Bracketing samples are included so extremes attained at the
        # boundaries (e.g. the separation maximum) are captured.
        window = slice(crossing[k], crossing[k + 1] + 2)
        duration = float(t1 - t0)
        drop = float(abs(boundary_height[k + 1] - boundary_height[k]))
        periods.append(
            PeriodMetrics(
                t_start=float(t0),
                t_end=float(t1),
                period=duration,
                fall_distance=drop,
                settling_speed=drop / duration,
                ux_min=float(vel[window, :, lateral_axis].min()),
                ux_max=float(vel[window, :, lateral_axis].max()),
                uz_min=float(vel[window, :, gravity_axis].min()),
                uz_max=float(vel[window, :, gravity_axis].max()),
                separation_min=float(sep[window].min()),
                separation_max=float(sep[window].max()),
            )
        )
    return TumblingMetrics(
        periods=tuple(periods),
        boundaries=boundaries,
        orbit=orbit,
    )


def compare_tumbling(
    a: TumblingMetrics, b: TumblingMetrics
) -> dict[str, float]:
    """Relative differences ``(a - b) / b`` of the period-mean descriptors.

    By convention ``a`` is the lattice result and ``b`` the reference
    (boundary-integral) result, so a negative ``settling_speed`` delta means
    the lattice pair settles slower than the reference pair.
    """
    deltas = {}
    for field in COMPARE_FIELDS:
        va = a.mean(field)
        vb = b.mean(field)
        if vb == 0.0:
            deltas[field] = 0.0 if va == 0.0 else float("inf")
        else:
            deltas[field] = (va - vb) / vb
    return deltas

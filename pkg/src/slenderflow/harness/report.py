"""Experiment artifacts: trajectory CSV, machine-parsable summary, manifest.

Every run writes the same artifact set into its output directory:

``config.yaml``
    Canonical echo of the validated configuration (defaults resolved).
``trajectory.csv`` (or ``trajectory_sNNN.csv`` per sweep point)
    One row per sample per body with the exact column set
    ``t_s,body_id,x,y,z,ux,uy,uz,wx,wy,wz`` (SI units).  Floats are printed
    with 17 significant digits, so values round-trip exactly and reruns of
    the same configuration produce byte-identical files.
``summary.txt``
    ``key = value`` lines covering every report field.
``manifest.txt``
    Ordered list of the artifacts written; status ``complete`` on success or
    ``partial`` plus the error when a disk write aborted the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from ..errors import OutputError
from .metrics import TumblingMetrics
from .stats import TerminalStats

CSV_HEADER = "t_s,body_id,x,y,z,ux,uy,uz,wx,wy,wz"


def _g17(value: float) -> str:
    """Shortest-exact decimal form (17 significant digits round-trip)."""
    return format(float(value), ".17g")


@dataclass
class TrajectorySeries:
    """Sampled rigid-body trajectories of one run (SI units)."""

    t: np.ndarray           #: (n,) sample times, seconds
    positions: np.ndarray   #: (n, B, 3) body centers, meters
    velocities: np.ndarray  #: (n, B, 3) m/s
    angular: np.ndarray     #: (n, B, 3) rad/s

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = self.t.size
        for name in ("positions", "velocities", "angular"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 3 or arr.shape[0] != n or arr.shape[2] != 3:
                raise ValueError(
                    f"{name} must have shape (n, bodies, 3) with n = {n}, "
                    f"got {arr.shape}"
                )
            setattr(self, name, arr)

    @property
    def n_bodies(self) -> int:
        return self.positions.shape[1]


def write_series_csv(path, series: TrajectorySeries) -> None:
    lines = [CSV_HEADER]
    for i in range(series.t.size):
        ts = _g17(series.t[i])
        for b in range(series.n_bodies):
            row = [ts, str(b)]
            row += [_g17(v) for v in series.positions[i, b]]
            row += [_g17(v) for v in series.velocities[i, b]]
            row += [_g17(v) for v in series.angular[i, b]]
            lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_series_csv(path) -> TrajectorySeries:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise OutputError(
            f"{path} is not a trajectory file (expected header {CSV_HEADER!r})"
        )
    rows = [line.split(",") for line in lines[1:] if line]
    if not rows:
        raise OutputError(f"{path} holds no samples")
    body_ids = sorted({int(r[1]) for r in rows})
    n_bodies = len(body_ids)
    if body_ids != list(range(n_bodies)) or len(rows) % n_bodies:
        raise OutputError(f"{path}: inconsistent body ids")
    n = len(rows) // n_bodies
    t = np.empty(n)
    pos = np.empty((n, n_bodies, 3))
    vel = np.empty((n, n_bodies, 3))
    ang = np.empty((n, n_bodies, 3))
    for k, row in enumerate(rows):
        i, b = divmod(k, n_bodies)
        if int(row[1]) != b:
            raise OutputError(f"{path}: body rows out of order at line {k + 2}")
        t[i] = float(row[0])
        pos[i, b] = [float(v) for v in row[2:5]]
        vel[i, b] = [float(v) for v in row[5:8]]
        ang[i, b] = [float(v) for v in row[8:11]]
    return TrajectorySeries(t=t, positions=pos, velocities=vel, angular=ang)


@dataclass
class ExperimentReport:
    """Everything a run produced, in memory.

    ``summary_entries`` flattens every field into the ``key = value`` map
    that ``summary.txt`` stores, so the on-disk summary always mirrors this
    record exactly.
    """

    kind: str
    solver: str
    geometry: dict[str, Any]
    steps_run: int
    samples: int
    series: TrajectorySeries | None = None
    terminal: TerminalStats | None = None
    reference: dict[str, float] = field(default_factory=dict)
    deltas: dict[str, float] = field(default_factory=dict)
    tumbling: TumblingMetrics | None = None
    sweep: dict[int, TerminalStats] | None = None
    notes: dict[str, str] = field(default_factory=dict)

    def summary_entries(self) -> dict[str, str]:
        out: dict[str, str] = {
            "kind": self.kind,
            "solver": self.solver,
            "steps_run": str(self.steps_run),
            "samples": str(self.samples),
        }
        for key in sorted(self.geometry):
            value = self.geometry[key]
            out[f"geometry.{key}"] = (
                _g17(value) if isinstance(value, float) else str(value)
            )
        if self.terminal is not None:
            out.update(_stats_entries("terminal", self.terminal))
        for key in sorted(self.reference):
            out[f"reference.{key}"] = _g17(self.reference[key])
        for key in sorted(self.deltas):
            out[f"delta.{key}"] = _g17(self.deltas[key])
        if self.tumbling is not None:
            out["tumbling.periods"] = str(len(self.tumbling.periods))
            for k, p in enumerate(self.tumbling.periods):
                prefix = f"tumbling.period.{k}"
                for name in ("t_start", "t_end", "period", "fall_distance",
                             "settling_speed", "ux_min", "ux_max", "uz_min",
                             "uz_max", "separation_min", "separation_max"):
                    out[f"{prefix}.{name}"] = _g17(getattr(p, name))
        if self.sweep is not None:
            out["sweep.sizes"] = ",".join(str(s) for s in self.sweep)
            for size, stats in self.sweep.items():
                out.update(_stats_entries(f"sweep.{size}", stats))
        for key in sorted(self.notes):
            out[f"note.{key}"] = str(self.notes[key])
        return out


def _stats_entries(prefix: str, stats: TerminalStats) -> dict[str, str]:
    return {
        f"{prefix}.mean": _g17(stats.mean),
        f"{prefix}.fluctuation": _g17(stats.fluctuation),
        f"{prefix}.reynolds": _g17(stats.reynolds),
        f"{prefix}.n_samples": str(stats.n_samples),
        f"{prefix}.window_fraction": _g17(stats.window_fraction),
    }


def write_summary(path, entries: dict[str, str]) -> None:
    lines = [f"{key} = {value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_summary(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OutputError(f"cannot read summary {path}: {exc}") from exc
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if " = " not in line:
            raise OutputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split(" = ", 1)
        entries[key.strip()] = value.strip()
    return entries


class ArtifactWriter:
    """Tracks artifacts written into a run directory.

    Any :class:`OSError` during a write aborts the run; the manifest is then
    left in ``partial`` state listing exactly what exists on disk.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.written: list[str] = []
        self._finished = False
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(
                f"cannot create output directory {self.directory}: {exc}"
            ) from exc

    def path(self, name: str) -> Path:
        return self.directory / name

    def write_text(self, name: str, text: str) -> None:
        self._attempt(name, lambda p: p.write_text(text))

    def write(self, name: str, writer) -> None:
        """Run ``writer(path)`` and record the artifact."""
        self._attempt(name, writer)

    def _attempt(self, name: str, writer) -> None:
        target = self.path(name)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            writer(target)
        except OSError as exc:
            self.finish(error=f"{name}: {exc}")
            raise OutputError(
                f"failed to write {target}: {exc} "
                f"(partial manifest left in {self.directory})"
            ) from exc
        self.written.append(name)

    def finish(self, error: str | None = None) -> None:
        if self._finished:
            return
        self._finished = True
        status = "complete" if error is None else "partial"
        lines = [f"status = {status}"]
        if error is not None:
            lines.append(f"error = {error}")
        lines += [f"artifact = {name}" for name in self.written]
        try:
            self.path("manifest.txt").write_text("\n".join(lines) + "\n")
        except OSError:
            pass  # the manifest is best-effort when the disk is failing
        if error is None:
            self.written.append("manifest.txt")

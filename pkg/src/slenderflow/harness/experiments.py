"""Experiment runners: one validated configuration in, one report out.

Each run is sequential and single-process; reproducibility is guaranteed by
the deterministic solvers (the lattice kernel is bitwise thread-independent),
the fixed sampling schedule, and exact (17-significant-digit) CSV formatting,
so rerunning a configuration produces byte-identical trajectory files.

Kinds
-----
``translate-validate``
    One fiber dragged by a constant force (or its buoyant weight); the
    trailing-window settling speed is compared against the rod-friction and
    slender-body references.
``rotate-validate``
    One fiber spun by a constant torque; the terminal angular velocity is
    compared against rod friction evaluated with the full length and with
    the cap-free length (the two bracket the expected value).
``wall-sweep``
    The translation run repeated over several lattice cross-sections to
    quantify wall retardation (lattice solver only).
``tumble-lbm`` / ``tumble-sbf``
    Two parallel gravity-aligned fibers released at a lateral separation
    with no artificial perturbation; their mutual interaction drives the
    periodic tumbling that the per-period metrics summarize.
``cross-compare``
    Loads two completed tumbling runs, checks that they simulated the same
    bodies, and reports relative metric differences ``(a - b) / b``.

A solver failure mid-run propagates as the solver's own exception type with
the failing step index prefixed; artifacts recorded up to that point stay on
disk, and the run directory's manifest is marked ``partial``.
"""

from __future__ import annotations

import math
from pathlib import Path
from statistics import fmean
from typing import Callable

import numpy as np
import yaml

from ..analytic import sbf_single_fiber, tirado_friction
from ..core import (
    RigidState,
    Spherocylinder,
    UnitScales,
    derive_time_step,
    driving_force,
    quat_from_tangent,
)
from ..errors import ConfigError, SlenderflowError
from ..lbm import LatticeDomain, LbmSimulation, TrtParams, write_structured_points
from ..sbf import FiberSystem, SbfParams, SbfSolver
from .config import ExperimentConfig
from .metrics import COMPARE_FIELDS, compare_tumbling, tumbling_metrics
from .report import (
    ArtifactWriter,
    ExperimentReport,
    TrajectorySeries,
    read_series_csv,
    read_summary,
    write_series_csv,
    write_summary,
)
from .stats import terminal_stats

#: Domains larger than this many cells default to float32 populations
#: (storage = auto); accumulation stays float64 inside the kernel either way.
FLOAT32_CELL_THRESHOLD = 4_000_000

#: Geometry keys two runs must share before their metrics are comparable.
_MATCH_KEYS = ("radius_m", "length_m", "separation_m", "particle_density")

_StopFn = Callable[[list[np.ndarray], list[np.ndarray]], bool]


# ---------------------------------------------------------------------------
# geometry and load resolution


def _cell_size(config: ExperimentConfig) -> float:
    return (config.lattice.dx if config.solver == "lbm"
            else config.sbf.cell_size)


def _body_shape(config: ExperimentConfig, density: float) -> Spherocylinder:
    cell = _cell_size(config)
    radius = config.geometry.radius_cells * cell
    return Spherocylinder(radius=radius,
                          length=config.geometry.inverse_slenderness * radius,
                          density=density)


def _resolve_drive(config: ExperimentConfig) -> tuple[float, np.ndarray]:
    """(particle density, driving force vector) for translation/tumbling."""
    loads = config.loads
    fluid = config.fluid
    if loads.force is not None:
        # Force-driven: the body is neutrally buoyant so the prescribed
        # force is the only net load (terminal dynamics match a
        # density-driven body of equal weight deficit).
        return fluid.density, np.asarray(loads.force, dtype=float)
    shape = _body_shape(config, loads.particle_density)
    gravity = np.array([0.0, 0.0, -fluid.gravity])
    force = driving_force(shape.volume, loads.particle_density,
                          fluid.density, gravity)
    return loads.particle_density, np.asarray(force, dtype=float)


def _geometry_echo(config: ExperimentConfig, extra: dict | None = None) -> dict:
    cell = _cell_size(config)
    radius = config.geometry.radius_cells * cell
    geo = {
        "radius_m": radius,
        "length_m": config.geometry.inverse_slenderness * radius,
        "inverse_slenderness": config.geometry.inverse_slenderness,
        "tangent": ",".join(format(v, ".6g") for v in config.geometry.tangent),
        "cell_m": cell,
        "particle_density": float(config.loads.particle_density or 0.0),
    }
    if config.geometry.separation_cells is not None:
        geo["separation_m"] = config.geometry.separation_cells * cell
    if config.solver == "lbm":
        geo["box"] = "x".join(str(n) for n in config.lattice.box_cells)
        geo["walls"] = ",".join(config.lattice.boundaries)
    else:
        geo["box"] = ("unbounded" if config.sbf.box_cells is None else
                      "x".join(str(n) for n in config.sbf.box_cells))
    if extra:
        geo.update(extra)
    return geo


# ---------------------------------------------------------------------------
# lattice plumbing


def _storage_dtype(config: ExperimentConfig, box_cells) -> np.dtype:
    mode = config.lattice.storage
    if mode == "float32":
        return np.dtype(np.float32)
    if mode == "float64":
        return np.dtype(np.float64)
    cells = int(np.prod(box_cells))
    return np.dtype(np.float32 if cells > FLOAT32_CELL_THRESHOLD
                    else np.float64)


def _make_lbm_sim(config: ExperimentConfig, box_cells, centers, tangents,
                  density: float, external_forces=None,
                  external_torques=None):
    lat = config.lattice
    fluid = config.fluid
    dt = derive_time_step(fluid.kinematic_viscosity, lat.dx, lat.tau)
    scales = UnitScales(lat.dx, dt, fluid.density)
    domain = LatticeDomain(box_cells, scales, boundaries=lat.boundaries,
                           dtype=_storage_dtype(config, box_cells))
    domain.initialize()
    shape = _body_shape(config, density)
    states = [RigidState(position=np.asarray(c, dtype=float),
                         orientation=quat_from_tangent(np.asarray(t)))
              for c, t in zip(centers, tangents)]
    sim = LbmSimulation(domain, TrtParams(lat.tau),
                        bodies=[shape] * len(states), states=states,
                        external_forces=external_forces,
                        external_torques=external_torques,
                        stabilize=lat.stabilize)
    return sim, domain


def _snapshot(sim) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pos = np.array([s.position for s in sim.states])
    vel = np.array([s.velocity for s in sim.states])
    ang = np.array([s.angular_velocity for s in sim.states])
    return pos, vel, ang


def _run_lbm_schedule(sim, domain, config: ExperimentConfig,
                      writer: ArtifactWriter | None, vtk_every: int,
                      stop: _StopFn | None = None, vtk_tag: str = "",
                      csv_name: str = "trajectory.csv",
                      ) -> tuple[TrajectorySeries, int, float]:
    schedule = config.schedule
    times: list[float] = [0.0]
    pos0, vel0, ang0 = _snapshot(sim)
    positions, velocities, angulars = [pos0], [vel0], [ang0]
    # largest domain-mean fluid speed (lattice units) seen at any sample;
    # bounded near zero when stabilization holds
    drift_max = float(np.linalg.norm(domain.fluid_momentum())
                      / domain.fluid_cell_count)

    def _vtk(step: int) -> None:
        if vtk_every > 0 and writer is not None:
            name = f"vtk/{vtk_tag}step_{step:08d}.vtk"
            writer.write(name, lambda p: write_structured_points(str(p),
                                                                 domain))

    def _series() -> TrajectorySeries:
        return TrajectorySeries(t=np.array(times),
                                positions=np.array(positions),
                                velocities=np.array(velocities),
                                angular=np.array(angulars))

    _vtk(0)
    steps_run = 0
    for i in range(schedule.steps):
        try:
            step_report = sim.step()
        except SlenderflowError as exc:
            # keep the samples collected so far diagnosable on disk
            if writer is not None:
                writer.write(csv_name,
                             lambda p: write_series_csv(p, _series()))
            raise type(exc)(f"step {i + 1}: {exc}") from exc
        steps_run = i + 1
        if vtk_every > 0 and steps_run % vtk_every == 0:
            _vtk(steps_run)
        if steps_run % schedule.sample_every == 0:
            p, v, a = _snapshot(sim)
            times.append(sim.time)
            positions.append(p)
            velocities.append(v)
            angulars.append(a)
            drift = float(np.linalg.norm(step_report.fluid_momentum)
                          / domain.fluid_cell_count)
            drift_max = max(drift_max, drift)
            if stop is not None and stop(velocities, angulars):
                break
    return _series(), steps_run, drift_max


def _plateau_stop(config: ExperimentConfig, scalar: Callable) -> _StopFn | None:
    """Stop once two consecutive 10-sample windows of the monitored scalar
    agree to plateau_tol (relative); disabled when plateau_tol = 0."""
    tol = config.schedule.plateau_tol
    if tol <= 0.0:
        return None
    window = 10

    def stop(velocities, angulars):
        values = [scalar(v, a) for v, a in zip(velocities, angulars)]
        if len(values) < 2 * window + 1:
            return False
        recent = fmean(values[-window:])
        earlier = fmean(values[-2 * window:-window])
        if recent == 0.0:
            return earlier == 0.0
        return abs(recent - earlier) <= tol * abs(recent)

    return stop


def _period_stop(config: ExperimentConfig) -> _StopFn | None:
    """Stop after max_periods complete periods (max_periods + 1 separation
    maxima); disabled when max_periods = 0."""
    needed = config.schedule.max_periods + 1
    if config.schedule.max_periods <= 0:
        return None

    def stop(velocities, angulars):
        rate = np.array([v[1, 0] - v[0, 0] for v in velocities])
        widening = rate > 0.0
        maxima = int(np.count_nonzero(widening[:-1] & ~widening[1:]))
        return maxima >= needed

    return stop


# ---------------------------------------------------------------------------
# steady boundary-integral runs


def _steady_series(config: ExperimentConfig, center, velocity,
                   omega) -> TrajectorySeries:
    """Exact trajectory of a steady Stokes solution: the velocity (and any
    torque-driven angular velocity) is constant, so samples replicate the
    single solve while the position drifts linearly."""
    schedule = config.schedule
    n = schedule.steps // schedule.sample_every + 1
    dt = (schedule.time_step or 1.0) * schedule.sample_every
    t = np.arange(n) * dt
    pos = np.empty((n, 1, 3))
    pos[:, 0, :] = np.asarray(center) + t[:, None] * np.asarray(velocity)
    vel = np.broadcast_to(np.asarray(velocity), (n, 1, 3)).copy()
    ang = np.broadcast_to(np.asarray(omega), (n, 1, 3)).copy()
    return TrajectorySeries(t=t, positions=pos, velocities=vel, angular=ang)


def _single_fiber_system(config: ExperimentConfig, force=None, torque=None):
    cell = config.sbf.cell_size
    radius = config.geometry.radius_cells * cell
    length = config.geometry.inverse_slenderness * radius
    box = None
    center = np.zeros(3)
    if config.sbf.box_cells is not None:
        box = np.array(config.sbf.box_cells, dtype=float) * cell
        center = box / 2.0
    system = FiberSystem(
        centers=[center],
        tangents=[config.geometry.tangent],
        half_length=length / 2.0,
        slenderness=radius / length,
        viscosity=config.fluid.viscosity,
        forces=None if force is None else [force],
        torques=None if torque is None else [torque],
        box=box,
    )
    params = SbfParams(n_modes=config.sbf.n_modes,
                       n_panels=config.sbf.n_panels,
                       gmres_tol=config.sbf.gmres_tol)
    return system, params, center


# ---------------------------------------------------------------------------
# references


def _translation_references(config: ExperimentConfig,
                            force: np.ndarray) -> dict[str, float]:
    cell = _cell_size(config)
    radius = config.geometry.radius_cells * cell
    length = config.geometry.inverse_slenderness * radius
    tangent = np.asarray(config.geometry.tangent)
    friction = tirado_friction(length, radius, config.fluid.viscosity)
    f_par = np.dot(force, tangent) * tangent
    f_perp = force - f_par
    u_rod = (f_par / friction.gamma_parallel
             + f_perp / friction.gamma_perpendicular)
    u_asym, _ = sbf_single_fiber(force, np.zeros(3), tangent,
                                 radius / length, length,
                                 config.fluid.viscosity)
    return {
        "settling_speed_rod": float(np.linalg.norm(u_rod)),
        "settling_speed_asymptotic": float(np.linalg.norm(u_asym)),
    }


def _rotation_references(config: ExperimentConfig,
                         torque: np.ndarray) -> dict[str, float]:
    cell = _cell_size(config)
    radius = config.geometry.radius_cells * cell
    length = config.geometry.inverse_slenderness * radius
    tangent = np.asarray(config.geometry.tangent)
    magnitude = float(np.linalg.norm(torque))
    full = tirado_friction(length, radius, config.fluid.viscosity)
    bare = tirado_friction(length - 2.0 * radius, radius,
                           config.fluid.viscosity)
    _, w_asym = sbf_single_fiber(np.zeros(3), torque, tangent,
                                 radius / length, length,
                                 config.fluid.viscosity)
    return {
        "angular_speed_rod": magnitude / full.gamma_rotational,
        "angular_speed_rod_capfree": magnitude / bare.gamma_rotational,
        "angular_speed_asymptotic": float(np.linalg.norm(w_asym)),
    }


def _relative_deltas(measured: float,
                     reference: dict[str, float],
                     rename: dict[str, str]) -> dict[str, float]:
    out = {}
    for key, name in rename.items():
        ref = reference[key]
        if ref == 0.0:
            out[name] = 0.0 if measured == 0.0 else math.inf
        else:
            out[name] = (measured - ref) / ref
    return out


# ---------------------------------------------------------------------------
# kind runners


def _run_translate(config: ExperimentConfig, writer, vtk_every,
                   box_cells=None, csv_name="trajectory.csv",
                   vtk_tag="") -> tuple[ExperimentReport, TrajectorySeries]:
    density, force = _resolve_drive(config)
    norm = np.linalg.norm(force)
    # Zero net load (particle density equal to the fluid's) is legitimate:
    # monitor the tangential velocity, which must stay exactly zero.
    axis = force / norm if norm > 0.0 else np.asarray(config.geometry.tangent)
    cell = _cell_size(config)
    length = config.geometry.inverse_slenderness \
        * config.geometry.radius_cells * cell
    if config.solver == "lbm":
        cells = box_cells if box_cells is not None \
            else config.lattice.box_cells
        center = np.array(cells, dtype=float) * config.lattice.dx / 2.0
        sim, domain = _make_lbm_sim(config, cells, [center],
                                    [config.geometry.tangent], density,
                                    external_forces=[force])
        stop = _plateau_stop(config,
                             lambda v, a: float(np.dot(v[0], axis)))
        series, steps_run, drift = _run_lbm_schedule(sim, domain, config,
                                                     writer, vtk_every, stop,
                                                     vtk_tag,
                                                     csv_name=csv_name)
        notes = {"mean_fluid_speed_max": format(drift, ".17g")}
    else:
        system, params, center = _single_fiber_system(config, force=force)
        solution = SbfSolver(system, params).solve()
        velocity = solution.translational[0]
        series = _steady_series(config, center, velocity, np.zeros(3))
        steps_run = 0
        notes = {"steady": "single Stokes mobility solve; series replicates "
                           "the steady state"}
    scalar = series.velocities[:, 0, :] @ axis
    stats = terminal_stats(scalar, config.schedule.window_fraction,
                           length_scale=length,
                           kinematic_viscosity=config.fluid.kinematic_viscosity)
    reference = _translation_references(config, force)
    deltas = _relative_deltas(abs(stats.mean), reference, {
        "settling_speed_rod": "settling_speed_vs_rod",
        "settling_speed_asymptotic": "settling_speed_vs_asymptotic",
    })
    report = ExperimentReport(
        kind=config.kind, solver=config.solver,
        geometry=_geometry_echo(config),
        steps_run=steps_run, samples=series.t.size, series=series,
        terminal=stats, reference=reference, deltas=deltas, notes=notes,
    )
    if writer is not None:
        writer.write(csv_name, lambda p: write_series_csv(p, series))
    return report, series


def _run_rotate(config: ExperimentConfig, writer,
                vtk_every) -> ExperimentReport:
    torque = np.asarray(config.loads.torque, dtype=float)
    axis = torque / np.linalg.norm(torque)
    cell = _cell_size(config)
    length = config.geometry.inverse_slenderness \
        * config.geometry.radius_cells * cell
    if config.solver == "lbm":
        cells = config.lattice.box_cells
        center = np.array(cells, dtype=float) * config.lattice.dx / 2.0
        sim, domain = _make_lbm_sim(config, cells, [center],
                                    [config.geometry.tangent],
                                    config.fluid.density,
                                    external_torques=[torque])
        stop = _plateau_stop(config,
                             lambda v, a: float(np.dot(a[0], axis)))
        series, steps_run, drift = _run_lbm_schedule(sim, domain, config,
                                                     writer, vtk_every, stop)
        notes = {"mean_fluid_speed_max": format(drift, ".17g")}
    else:
        system, params, center = _single_fiber_system(config, torque=torque)
        solution = SbfSolver(system, params).solve()
        omega = solution.angular_velocities(system.tangents)[0]
        series = _steady_series(config, center, np.zeros(3), omega)
        steps_run = 0
        notes = {"steady": "single Stokes mobility solve; series replicates "
                           "the steady state"}
    scalar = series.angular[:, 0, :] @ axis
    stats = terminal_stats(scalar, config.schedule.window_fraction,
                           length_scale=length,
                           kinematic_viscosity=config.fluid.kinematic_viscosity,
                           speed_scale=length / 2.0)
    reference = _rotation_references(config, torque)
    deltas = _relative_deltas(abs(stats.mean), reference, {
        "angular_speed_rod": "angular_speed_vs_rod",
        "angular_speed_rod_capfree": "angular_speed_vs_rod_capfree",
        "angular_speed_asymptotic": "angular_speed_vs_asymptotic",
    })
    report = ExperimentReport(
        kind=config.kind, solver=config.solver,
        geometry=_geometry_echo(config),
        steps_run=steps_run, samples=series.t.size, series=series,
        terminal=stats, reference=reference, deltas=deltas, notes=notes,
    )
    if writer is not None:
        writer.write("trajectory.csv", lambda p: write_series_csv(p, series))
    return report


def _run_wall_sweep(config: ExperimentConfig, writer,
                    vtk_every) -> ExperimentReport:
    span = config.lattice.box_cells[2]
    sweep: dict[int, object] = {}
    reference = None
    total_steps = 0
    last_series = None
    for size in config.sweep:
        point, series = _run_translate(
            config, writer, vtk_every, box_cells=(size, size, span),
            csv_name=f"trajectory_s{size:03d}.csv", vtk_tag=f"s{size:03d}_")
        sweep[size] = point.terminal
        reference = point.reference
        total_steps += point.steps_run
        last_series = series
    means = [abs(sweep[s].mean) for s in config.sweep]
    monotone = all(b > a for a, b in zip(means, means[1:]))
    largest = means[-1]
    deltas = _relative_deltas(largest, reference, {
        "settling_speed_rod": "settling_speed_vs_rod",
        "settling_speed_asymptotic": "settling_speed_vs_asymptotic",
    })
    report = ExperimentReport(
        kind=config.kind, solver=config.solver,
        geometry=_geometry_echo(config),
        steps_run=total_steps, samples=last_series.t.size,
        series=last_series, terminal=sweep[config.sweep[-1]],
        reference=reference, deltas=deltas, sweep=sweep,
        notes={"monotone_increase": str(monotone).lower(),
               "sweep_means": ",".join(format(m, ".17g") for m in means)},
    )
    return report


def _tumble_centers(config: ExperimentConfig,
                    box: np.ndarray) -> list[np.ndarray]:
    separation = config.geometry.separation_cells * _cell_size(config)
    center = box / 2.0
    offset = np.array([separation / 2.0, 0.0, 0.0])
    return [center - offset, center + offset]


def _tumbling_report(config: ExperimentConfig, series: TrajectorySeries,
                     steps_run: int, notes: dict) -> ExperimentReport:
    metrics = tumbling_metrics(series.t, series.positions, series.velocities)
    return ExperimentReport(
        kind=config.kind, solver=config.solver,
        geometry=_geometry_echo(config),
        steps_run=steps_run, samples=series.t.size, series=series,
        tumbling=metrics, notes=notes,
    )


def _run_tumble_lbm(config: ExperimentConfig, writer,
                    vtk_every) -> ExperimentReport:
    density, force = _resolve_drive(config)
    cells = config.lattice.box_cells
    box = np.array(cells, dtype=float) * config.lattice.dx
    centers = _tumble_centers(config, box)
    tangents = [config.geometry.tangent] * 2
    sim, domain = _make_lbm_sim(config, cells, centers, tangents, density,
                                external_forces=[force, force])
    series, steps_run, drift = _run_lbm_schedule(sim, domain, config, writer,
                                                 vtk_every,
                                                 _period_stop(config))
    if writer is not None:
        writer.write("trajectory.csv", lambda p: write_series_csv(p, series))
    return _tumbling_report(
        config, series, steps_run,
        notes={"mean_fluid_speed_max": format(drift, ".17g")})


def _run_tumble_sbf(config: ExperimentConfig, writer,
                    vtk_every) -> ExperimentReport:
    density, force = _resolve_drive(config)
    cell = config.sbf.cell_size
    radius = config.geometry.radius_cells * cell
    length = config.geometry.inverse_slenderness * radius
    box = None
    if config.sbf.box_cells is not None:
        box = np.array(config.sbf.box_cells, dtype=float) * cell
    origin = box if box is not None else np.zeros(3)
    centers = _tumble_centers(config, origin)
    system = FiberSystem(
        centers=centers,
        tangents=[config.geometry.tangent] * 2,
        half_length=length / 2.0,
        slenderness=radius / length,
        viscosity=config.fluid.viscosity,
        forces=[force, force],
        box=box,
    )
    params = SbfParams(n_modes=config.sbf.n_modes,
                       n_panels=config.sbf.n_panels,
                       gmres_tol=config.sbf.gmres_tol,
                       dt=config.schedule.time_step)
    solver = SbfSolver(system, params)
    schedule = config.schedule
    stop = _period_stop(config)
    dt = schedule.time_step
    times: list[float] = []
    positions: list[np.ndarray] = []
    velocities: list[np.ndarray] = []
    angulars: list[np.ndarray] = []
    def _series() -> TrajectorySeries:
        return TrajectorySeries(t=np.array(times),
                                positions=np.array(positions),
                                velocities=np.array(velocities),
                                angular=np.array(angulars))

    steps_run = 0
    for i in range(schedule.steps):
        sample = i % schedule.sample_every == 0
        pre_centers = system.centers.copy()
        pre_tangents = system.tangents.copy()
        try:
            solution = solver.step()
        except SlenderflowError as exc:
            if writer is not None and times:
                writer.write("trajectory.csv",
                             lambda p: write_series_csv(p, _series()))
            raise type(exc)(f"step {i + 1}: {exc}") from exc
        steps_run = i + 1
        if sample:
            times.append(i * dt)
            positions.append(pre_centers)
            velocities.append(solution.translational.copy())
            angulars.append(solution.angular_velocities(pre_tangents))
            if stop is not None and stop(velocities, angulars):
                break
    series = _series()
    if writer is not None:
        writer.write("trajectory.csv", lambda p: write_series_csv(p, series))
    notes = {"integrator": "explicit midpoint"}
    return _tumbling_report(config, series, steps_run, notes)


# ---------------------------------------------------------------------------
# cross comparison


def _load_run(directory) -> tuple[dict[str, str], TrajectorySeries]:
    directory = Path(directory)
    summary = read_summary(directory / "summary.txt")
    series = read_series_csv(directory / "trajectory.csv")
    return summary, series


def _check_geometry_match(summary_a: dict, summary_b: dict) -> None:
    mismatches = []
    for key in _MATCH_KEYS:
        full = f"geometry.{key}"
        va, vb = summary_a.get(full), summary_b.get(full)
        if va is None or vb is None:
            mismatches.append(f"{full} missing")
            continue
        fa, fb = float(va), float(vb)
        scale = max(abs(fa), abs(fb), 1e-300)
        if abs(fa - fb) > 1e-6 * scale:
            mismatches.append(f"{full}: {va} vs {vb}")
    if mismatches:
        raise ConfigError(
            "runs are not comparable, geometry differs: "
            + "; ".join(mismatches)
        )


def _run_cross_compare(config: ExperimentConfig, writer) -> ExperimentReport:
    summary_a, series_a = _load_run(config.compare.run_a)
    summary_b, series_b = _load_run(config.compare.run_b)
    _check_geometry_match(summary_a, summary_b)
    metrics_a = tumbling_metrics(series_a.t, series_a.positions,
                                 series_a.velocities)
    metrics_b = tumbling_metrics(series_b.t, series_b.positions,
                                 series_b.velocities)
    deltas = compare_tumbling(metrics_a, metrics_b)
    geometry = {key.split(".", 1)[1]: value
                for key, value in summary_a.items()
                if key.startswith("geometry.")}
    reference = {f"b_{field}": metrics_b.mean(field)
                 for field in COMPARE_FIELDS}
    report = ExperimentReport(
        kind=config.kind,
        solver=f"{summary_a.get('solver', '?')}-vs-"
               f"{summary_b.get('solver', '?')}",
        geometry=geometry,
        steps_run=0, samples=series_a.t.size,
        tumbling=metrics_a, reference=reference, deltas=deltas,
        notes={"run_a": str(config.compare.run_a),
               "run_b": str(config.compare.run_b),
               "delta_convention": "(a - b) / b"},
    )
    return report


# ---------------------------------------------------------------------------
# entry point


def _plan(config: ExperimentConfig) -> ExperimentReport:
    notes = {"dry_run": "true"}
    if config.kind == "cross-compare":
        notes["plan"] = (f"compare {config.compare.run_a} against "
                         f"{config.compare.run_b}")
        return ExperimentReport(kind=config.kind, solver="n/a", geometry={},
                                steps_run=0, samples=0, notes=notes)
    bodies = 2 if config.kind in ("tumble-lbm", "tumble-sbf") else 1
    if config.solver == "lbm":
        sizes = [config.lattice.box_cells]
        if config.kind == "wall-sweep":
            span = config.lattice.box_cells[2]
            sizes = [(s, s, span) for s in config.sweep]
        cells = sum(int(np.prod(s)) for s in sizes)
        dt = derive_time_step(config.fluid.kinematic_viscosity,
                              config.lattice.dx, config.lattice.tau)
        notes["plan"] = (
            f"{config.kind}: {len(sizes)} lattice run(s), {bodies} body(ies),"
            f" up to {config.schedule.steps} steps of dt = {dt:.6g} s,"
            f" {cells} cells per step total,"
            f" <= {cells * config.schedule.steps} site updates"
        )
    else:
        notes["plan"] = (
            f"{config.kind}: boundary-integral run, {bodies} fiber(s),"
            f" up to {config.schedule.steps} step(s)"
        )
    return ExperimentReport(kind=config.kind, solver=config.solver or "n/a",
                            geometry=_geometry_echo(config), steps_run=0,
                            samples=0, notes=notes)


def run_experiment(config: ExperimentConfig, *, output=None,
                   vtk_every: int = 0,
                   dry_run: bool = False) -> ExperimentReport:
    """Run one experiment and (optionally) persist its artifacts.

    Parameters
    ----------
    config:
        A validated :class:`~slenderflow.harness.config.ExperimentConfig`.
    output:
        Output directory; overrides ``config.output``.  With neither set the
        run stays in memory and writes nothing.
    vtk_every:
        Write a lattice snapshot every K steps (lattice runs only; 0 = off).
    dry_run:
        Validate and describe the run without executing it.
    """
    if vtk_every < 0:
        raise ConfigError(f"vtk_every must be >= 0, got {vtk_every}")
    if dry_run:
        return _plan(config)
    outdir = output if output is not None else config.output
    writer = ArtifactWriter(outdir) if outdir is not None else None
    try:
        if writer is not None:
            writer.write_text(
                "config.yaml",
                yaml.safe_dump(config.to_dict(), sort_keys=True))
        if config.kind == "translate-validate":
            report, _ = _run_translate(config, writer, vtk_every)
        elif config.kind == "rotate-validate":
            report = _run_rotate(config, writer, vtk_every)
        elif config.kind == "wall-sweep":
            report = _run_wall_sweep(config, writer, vtk_every)
        elif config.kind == "tumble-lbm":
            report = _run_tumble_lbm(config, writer, vtk_every)
        elif config.kind == "tumble-sbf":
            report = _run_tumble_sbf(config, writer, vtk_every)
        elif config.kind == "cross-compare":
            report = _run_cross_compare(config, writer)
        else:  # pragma: no cover - parse_config guarantees the enum
            raise ConfigError(f"unknown kind {config.kind!r}")
    except SlenderflowError as exc:
        if writer is not None:
            writer.finish(error=f"{type(exc).__name__}: {exc}")
        raise
    if writer is not None:
        writer.write("summary.txt",
                     lambda p: write_summary(p, report.summary_entries()))
        writer.finish()
    return report

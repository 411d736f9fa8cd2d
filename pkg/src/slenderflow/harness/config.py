"""Versioned, strict experiment configuration.

Configurations are plain YAML mappings.  The schema is versioned through a
mandatory ``schema_version`` key, unknown keys anywhere are rejected with
their dotted path, and every invariant the runners rely on (positive sizes,
valid window fractions, kind/solver consistency, load requirements) is
enforced here so a config that parses is a config that can run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from ..errors import ConfigError
from .stats import resolve_window

SCHEMA_VERSION = 1

KINDS = (
    "translate-validate",
    "rotate-validate",
    "wall-sweep",
    "tumble-lbm",
    "tumble-sbf",
    "cross-compare",
)

SOLVERS = ("lbm", "sbf")
BOUNDARY_NAMES = ("periodic", "noslip", "freeslip")
STORAGE_MODES = ("auto", "float32", "float64")

#: Kinds whose solver is implied and may not be overridden.
_PINNED_SOLVER = {
    "tumble-lbm": "lbm",
    "tumble-sbf": "sbf",
    "wall-sweep": "lbm",   # the sweep studies wall retardation on the lattice
}

#: Kinds that simulate a tumbling pair (two bodies, density-driven).
_TUMBLE_KINDS = ("tumble-lbm", "tumble-sbf")


# ---------------------------------------------------------------------------
# validated sections


@dataclass(frozen=True)
class GeometrySpec:
    radius_cells: float
    inverse_slenderness: float          #: fiber length over radius, L / r
    separation_cells: float | None = None
    tangent: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @property
    def length_cells(self) -> float:
        return self.radius_cells * self.inverse_slenderness


@dataclass(frozen=True)
class FluidSpec:
    viscosity: float
    density: float
    gravity: float = 9.81

    @property
    def kinematic_viscosity(self) -> float:
        return self.viscosity / self.density


@dataclass(frozen=True)
class LatticeSpec:
    dx: float
    tau: float
    box_cells: tuple[int, int, int]
    boundaries: tuple[str, str, str]
    stabilize: bool = True
    storage: str = "auto"


@dataclass(frozen=True)
class SbfSpec:
    cell_size: float                    #: meters per geometry cell
    box_cells: tuple[int, int, int] | None = None
    n_modes: int = 5
    n_panels: int = 16
    gmres_tol: float = 1e-8


@dataclass(frozen=True)
class LoadSpec:
    force: tuple[float, float, float] | None = None
    torque: tuple[float, float, float] | None = None
    particle_density: float | None = None


@dataclass(frozen=True)
class ScheduleSpec:
    steps: int
    sample_every: int
    window_fraction: float
    plateau_tol: float = 0.0            #: 0 disables the early plateau stop
    time_step: float | None = None      #: SBF integration step (tumble-sbf)
    max_periods: int = 0                #: 0 = run all steps


@dataclass(frozen=True)
class CompareSpec:
    run_a: str
    run_b: str


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    solver: str | None = None
    output: str | None = None
    geometry: GeometrySpec | None = None
    fluid: FluidSpec | None = None
    lattice: LatticeSpec | None = None
    sbf: SbfSpec | None = None
    loads: LoadSpec | None = None
    schedule: ScheduleSpec | None = None
    sweep: tuple[int, ...] | None = None
    compare: CompareSpec | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        """Canonical mapping with all defaults resolved; parses back equal."""
        out: dict[str, Any] = {
            "schema_version": self.schema_version,
            "kind": self.kind,
        }
        if self.solver is not None:
            out["solver"] = self.solver
        if self.output is not None:
            out["output"] = self.output
        if self.geometry is not None:
            g: dict[str, Any] = {
                "radius_cells": self.geometry.radius_cells,
                "inverse_slenderness": self.geometry.inverse_slenderness,
                "tangent": list(self.geometry.tangent),
            }
            if self.geometry.separation_cells is not None:
                g["separation_cells"] = self.geometry.separation_cells
            out["geometry"] = g
        if self.fluid is not None:
            out["fluid"] = {
                "viscosity": self.fluid.viscosity,
                "density": self.fluid.density,
                "gravity": self.fluid.gravity,
            }
        if self.lattice is not None:
            out["lattice"] = {
                "dx": self.lattice.dx,
                "tau": self.lattice.tau,
                "box_cells": list(self.lattice.box_cells),
                "boundaries": list(self.lattice.boundaries),
                "stabilize": self.lattice.stabilize,
                "storage": self.lattice.storage,
            }
        if self.sbf is not None:
            s: dict[str, Any] = {
                "cell_size": self.sbf.cell_size,
                "n_modes": self.sbf.n_modes,
                "n_panels": self.sbf.n_panels,
                "gmres_tol": self.sbf.gmres_tol,
            }
            if self.sbf.box_cells is not None:
                s["box_cells"] = list(self.sbf.box_cells)
            out["sbf"] = s
        if self.loads is not None:
            loads: dict[str, Any] = {}
            if self.loads.force is not None:
                loads["force"] = list(self.loads.force)
            if self.loads.torque is not None:
                loads["torque"] = list(self.loads.torque)
            if self.loads.particle_density is not None:
                loads["particle_density"] = self.loads.particle_density
            out["loads"] = loads
        if self.schedule is not None:
            sched: dict[str, Any] = {
                "steps": self.schedule.steps,
                "sample_every": self.schedule.sample_every,
                "window": self.schedule.window_fraction,
                "plateau_tol": self.schedule.plateau_tol,
                "max_periods": self.schedule.max_periods,
            }
            if self.schedule.time_step is not None:
                sched["time_step"] = self.schedule.time_step
            out["schedule"] = sched
        if self.sweep is not None:
            out["sweep"] = {"cross_sections": list(self.sweep)}
        if self.compare is not None:
            out["compare"] = {
                "run_a": self.compare.run_a,
                "run_b": self.compare.run_b,
            }
        return out


# ---------------------------------------------------------------------------
# scalar validators


def _mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value

def _check_keys(data: Mapping[str, Any], allowed: Sequence[str], path: str) -> None:
    for key in data:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError(f"unknown key '{where}'")

def _require(data: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in data:
        where = f"{path}.{key}" if path else key
        raise ConfigError(f"missing required key '{where}'")
    return data[key]

def _float(value: Any, path: str, *, positive: bool = False,
           nonnegative: bool = False, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    number = float(value)
    if not math.isfinite(number):
        raise ConfigError(f"{path}: must be finite, got {number}")
    if positive and number <= 0.0:
        raise ConfigError(f"{path}: must be > 0, got {number}")
    if nonnegative and number < 0.0:
        raise ConfigError(f"{path}: must be >= 0, got {number}")
    if minimum is not None and number <= minimum:
        raise ConfigError(f"{path}: must be > {minimum}, got {number}")
    return number

def _int(value: Any, path: str, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value

def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value

def _str_choice(value: Any, path: str, choices: Sequence[str]) -> str:
    if not isinstance(value, str) or value not in choices:
        raise ConfigError(
            f"{path}: expected one of {sorted(choices)}, got {value!r}"
        )
    return value

def _vec3(value: Any, path: str) -> tuple[float, float, float]:
    if not isinstance(value, Sequence) or isinstance(value, str) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of three numbers")
    return tuple(_float(v, f"{path}[{i}]") for i, v in enumerate(value))

def _int3(value: Any, path: str) -> tuple[int, int, int]:
    if not isinstance(value, Sequence) or isinstance(value, str) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of three integers")
    out = tuple(_int(v, path) for v in value)
    if any(v <= 0 for v in out):
        raise ConfigError(f"{path}: all entries must be > 0, got {list(out)}")
    return out


# ---------------------------------------------------------------------------
# section parsers


def _parse_geometry(data: Mapping[str, Any], kind: str) -> GeometrySpec:
    path = "geometry"
    data = _mapping(data, path)
    _check_keys(data, ("radius_cells", "inverse_slenderness",
                       "separation_cells", "tangent"), path)
    radius = _float(_require(data, "radius_cells", path),
                    f"{path}.radius_cells", positive=True)
    inv_eps = _float(_require(data, "inverse_slenderness", path),
                     f"{path}.inverse_slenderness", minimum=2.0)
    separation = None
    if kind in _TUMBLE_KINDS:
        separation = _float(_require(data, "separation_cells", path),
                            f"{path}.separation_cells", positive=True)
    elif "separation_cells" in data:
        raise ConfigError(
            f"{path}.separation_cells is only meaningful for tumbling runs"
        )
    tangent = (0.0, 0.0, 1.0)
    if "tangent" in data:
        raw = _vec3(data["tangent"], f"{path}.tangent")
        norm = math.sqrt(sum(v * v for v in raw))
        if norm == 0.0:
            raise ConfigError(f"{path}.tangent: must be a nonzero vector")
        tangent = tuple(v / norm for v in raw)
    return GeometrySpec(radius_cells=radius, inverse_slenderness=inv_eps,
                        separation_cells=separation, tangent=tangent)


def _parse_fluid(data: Mapping[str, Any]) -> FluidSpec:
    path = "fluid"
    data = _mapping(data, path)
    _check_keys(data, ("viscosity", "density", "gravity"), path)
    return FluidSpec(
        viscosity=_float(_require(data, "viscosity", path),
                         f"{path}.viscosity", positive=True),
        density=_float(_require(data, "density", path),
                       f"{path}.density", positive=True),
        gravity=_float(data.get("gravity", 9.81), f"{path}.gravity",
                       positive=True),
    )


def _parse_lattice(data: Mapping[str, Any]) -> LatticeSpec:
    path = "lattice"
    data = _mapping(data, path)
    _check_keys(data, ("dx", "tau", "box_cells", "boundaries", "stabilize",
                       "storage"), path)
    raw_bc = _require(data, "boundaries", path)
    if (not isinstance(raw_bc, Sequence) or isinstance(raw_bc, str)
            or len(raw_bc) != 3):
        raise ConfigError(f"{path}.boundaries: expected three names")
    boundaries = tuple(
        _str_choice(b, f"{path}.boundaries[{i}]", BOUNDARY_NAMES)
        for i, b in enumerate(raw_bc)
    )
    return LatticeSpec(
        dx=_float(_require(data, "dx", path), f"{path}.dx", positive=True),
        tau=_float(_require(data, "tau", path), f"{path}.tau", minimum=0.5),
        box_cells=_int3(_require(data, "box_cells", path), f"{path}.box_cells"),
        boundaries=boundaries,
        stabilize=_bool(data.get("stabilize", True), f"{path}.stabilize"),
        storage=_str_choice(data.get("storage", "auto"), f"{path}.storage",
                            STORAGE_MODES),
    )


def _parse_sbf(data: Mapping[str, Any]) -> SbfSpec:
    path = "sbf"
    data = _mapping(data, path)
    _check_keys(data, ("cell_size", "box_cells", "n_modes", "n_panels",
                       "gmres_tol"), path)
    box = None
    if "box_cells" in data:
        box = _int3(data["box_cells"], f"{path}.box_cells")
    return SbfSpec(
        cell_size=_float(_require(data, "cell_size", path),
                         f"{path}.cell_size", positive=True),
        box_cells=box,
        n_modes=_int(data.get("n_modes", 5), f"{path}.n_modes", minimum=1),
        n_panels=_int(data.get("n_panels", 16), f"{path}.n_panels", minimum=2),
        gmres_tol=_float(data.get("gmres_tol", 1e-8), f"{path}.gmres_tol",
                         positive=True),
    )


def _parse_loads(data: Mapping[str, Any], kind: str) -> LoadSpec:
    path = "loads"
    data = _mapping(data, path)
    _check_keys(data, ("force", "torque", "particle_density"), path)
    force = _vec3(data["force"], f"{path}.force") if "force" in data else None
    torque = (_vec3(data["torque"], f"{path}.torque")
              if "torque" in data else None)
    density = (_float(data["particle_density"], f"{path}.particle_density",
                      positive=True)
               if "particle_density" in data else None)
    if kind in _TUMBLE_KINDS:
        if force is not None or torque is not None:
            raise ConfigError(
                f"{path}: tumbling runs are driven by particle_density; "
                "explicit force/torque loads are not allowed"
            )
        if density is None:
            raise ConfigError(
                f"{path}.particle_density is required for tumbling runs"
            )
    elif kind == "rotate-validate":
        if torque is None:
            raise ConfigError(f"{path}.torque is required for rotate-validate")
        if force is not None or density is not None:
            raise ConfigError(
                f"{path}: rotate-validate takes only a torque load"
            )
    else:  # translate-validate, wall-sweep
        if (force is None) == (density is None):
            raise ConfigError(
                f"{path}: provide exactly one of force or particle_density "
                f"for {kind}"
            )
        if torque is not None:
            raise ConfigError(f"{path}.torque is not allowed for {kind}")
    return LoadSpec(force=force, torque=torque, particle_density=density)


def _parse_schedule(data: Mapping[str, Any], kind: str,
                    solver: str) -> ScheduleSpec:
    path = "schedule"
    data = _mapping(data, path)
    _check_keys(data, ("steps", "sample_every", "window", "plateau_tol",
                       "time_step", "max_periods"), path)
    window = _require(data, "window", path)
    if not isinstance(window, str):
        window = _float(window, f"{path}.window")
    try:
        fraction = resolve_window(window)
    except ConfigError as exc:
        raise ConfigError(f"{path}.window: {exc}") from None
    time_step = None
    if "time_step" in data:
        time_step = _float(data["time_step"], f"{path}.time_step",
                           positive=True)
    if solver == "sbf" and kind in _TUMBLE_KINDS and time_step is None:
        raise ConfigError(
            f"{path}.time_step is required for tumble-sbf (the lattice "
            "solver derives its own step; the boundary-integral solver "
            "does not)"
        )
    return ScheduleSpec(
        steps=_int(_require(data, "steps", path), f"{path}.steps", minimum=1),
        sample_every=_int(_require(data, "sample_every", path),
                          f"{path}.sample_every", minimum=1),
        window_fraction=fraction,
        plateau_tol=_float(data.get("plateau_tol", 0.0),
                           f"{path}.plateau_tol", nonnegative=True),
        time_step=time_step,
        max_periods=_int(data.get("max_periods", 0), f"{path}.max_periods",
                         minimum=0),
    )


def _parse_sweep(data: Mapping[str, Any]) -> tuple[int, ...]:
    path = "sweep"
    data = _mapping(data, path)
    _check_keys(data, ("cross_sections",), path)
    raw = _require(data, "cross_sections", path)
    if not isinstance(raw, Sequence) or isinstance(raw, str) or not raw:
        raise ConfigError(f"{path}.cross_sections: expected a non-empty list")
    sections = tuple(_int(v, f"{path}.cross_sections") for v in raw)
    if any(v <= 0 for v in sections):
        raise ConfigError(
            f"{path}.cross_sections: all entries must be > 0, "
            f"got {list(sections)}"
        )
    return sections


def _parse_compare(data: Mapping[str, Any]) -> CompareSpec:
    path = "compare"
    data = _mapping(data, path)
    _check_keys(data, ("run_a", "run_b"), path)
    run_a = _require(data, "run_a", path)
    run_b = _require(data, "run_b", path)
    for name, value in (("run_a", run_a), ("run_b", run_b)):
        if not isinstance(value, str) or not value:
            raise ConfigError(f"{path}.{name}: expected a directory path")
    return CompareSpec(run_a=run_a, run_b=run_b)


# ---------------------------------------------------------------------------
# top level


def parse_config(data: Mapping[str, Any],
                 source: str = "<config>") -> ExperimentConfig:
    """Validate a configuration mapping into an :class:`ExperimentConfig`.

    Raises :class:`~slenderflow.errors.ConfigError` with the dotted path of
    the offending key on any violation.  The input mapping is not mutated.
    """
    data = _mapping(data, source)
    version = _require(data, "schema_version", "")
    if not isinstance(version, int) or isinstance(version, bool) \
            or version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    kind = _str_choice(_require(data, "kind", ""), "kind", KINDS)

    output = None
    if "output" in data:
        output = data["output"]
        if not isinstance(output, str) or not output:
            raise ConfigError("output: expected a directory path")

    if kind == "cross-compare":
        _check_keys(data, ("schema_version", "kind", "output", "compare"), "")
        return ExperimentConfig(
            kind=kind,
            output=output,
            compare=_parse_compare(_require(data, "compare", "")),
        )

    _check_keys(data, ("schema_version", "kind", "solver", "output",
                       "geometry", "fluid", "lattice", "sbf", "loads",
                       "schedule", "sweep"), "")

    pinned = _PINNED_SOLVER.get(kind)
    if "solver" in data:
        solver = _str_choice(data["solver"], "solver", SOLVERS)
        if pinned is not None and solver != pinned:
            raise ConfigError(
                f"solver: {kind} always runs on the {pinned} solver, "
                f"got {solver!r}"
            )
    elif pinned is not None:
        solver = pinned
    else:
        raise ConfigError(f"missing required key 'solver' for kind {kind}")

    geometry = _parse_geometry(_require(data, "geometry", ""), kind)
    fluid = _parse_fluid(_require(data, "fluid", ""))

    lattice = None
    sbf = None
    if solver == "lbm":
        if "sbf" in data:
            raise ConfigError(
                "sbf: section is only allowed when the solver is sbf"
            )
        lattice = _parse_lattice(_require(data, "lattice", ""))
    else:
        if "lattice" in data:
            raise ConfigError(
                "lattice: section is only allowed when the solver is lbm"
            )
        sbf = _parse_sbf(_require(data, "sbf", ""))

    loads = _parse_loads(_require(data, "loads", ""), kind)
    schedule = _parse_schedule(_require(data, "schedule", ""), kind, solver)

    sweep = None
    if kind == "wall-sweep":
        sweep = _parse_sweep(_require(data, "sweep", ""))
    elif "sweep" in data:
        raise ConfigError("sweep: section is only allowed for wall-sweep")

    return ExperimentConfig(
        kind=kind,
        solver=solver,
        output=output,
        geometry=geometry,
        fluid=fluid,
        lattice=lattice,
        sbf=sbf,
        loads=loads,
        schedule=schedule,
        sweep=sweep,
    )


def load_config(path) -> ExperimentConfig:
    """Parse a YAML configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config {path} is empty")
    return parse_config(data, source=str(path))

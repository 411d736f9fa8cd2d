"""Oracle tests for the experiment configuration schema.

The schema is versioned and strict: unknown keys anywhere are errors, and
every physical invariant (positive sizes, valid window fractions, kind/solver
consistency) is enforced at parse time with dotted key paths in messages.
"""

import copy

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from slenderflow.errors import ConfigError
from slenderflow.harness.config import (
    KINDS,
    SCHEMA_VERSION,
    ExperimentConfig,
    load_config,
    parse_config,
)


def base_translate():
    return {
        "schema_version": 1,
        "kind": "translate-validate",
        "solver": "lbm",
        "geometry": {"radius_cells": 4.0, "inverse_slenderness": 8.0},
        "fluid": {"viscosity": 1.0e-3, "density": 1000.0, "gravity": 9.81},
        "lattice": {
            "dx": 1.0e-5,
            "tau": 6.0,
            "box_cells": [32, 32, 96],
            "boundaries": ["freeslip", "freeslip", "periodic"],
        },
        "loads": {"force": [0.0, 0.0, -5.128e-10]},
        "schedule": {"steps": 100, "sample_every": 10,
                     "window": "translation"},
    }


def base_tumble_sbf():
    return {
        "schema_version": 1,
        "kind": "tumble-sbf",
        "geometry": {"radius_cells": 4.0, "inverse_slenderness": 10.0,
                     "separation_cells": 14.8},
        "fluid": {"viscosity": 1.0e-3, "density": 1000.0, "gravity": 9.81},
        "sbf": {"cell_size": 1.0e-5, "box_cells": [576, 576, 576],
                "n_modes": 5, "n_panels": 16},
        "loads": {"particle_density": 1165.0},
        "schedule": {"steps": 50, "sample_every": 5, "window": 0.5,
                     "time_step": 2.0e-3},
    }


def test_kind_enum_is_the_six_experiments():
    assert set(KINDS) == {
        "translate-validate", "rotate-validate", "wall-sweep",
        "tumble-lbm", "tumble-sbf", "cross-compare",
    }


def test_minimal_translate_parses_with_defaults():
    cfg = parse_config(base_translate())
    assert isinstance(cfg, ExperimentConfig)
    assert cfg.kind == "translate-validate"
    assert cfg.solver == "lbm"
    assert cfg.geometry.radius_cells == 4.0
    assert cfg.lattice.stabilize is True          # default on
    assert cfg.lattice.storage == "auto"
    assert cfg.schedule.window_fraction == pytest.approx(0.15)
    assert cfg.schedule.plateau_tol == 0.0        # early stop disabled
    assert cfg.loads.particle_density is None


def test_schema_version_required_and_checked():
    data = base_translate()
    del data["schema_version"]
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(data)
    data = base_translate()
    data["schema_version"] = SCHEMA_VERSION + 1
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(data)


def test_unknown_top_level_key():
    data = base_translate()
    data["shenanigans"] = 1
    with pytest.raises(ConfigError, match="shenanigans"):
        parse_config(data)


def test_unknown_nested_key_reports_dotted_path():
    data = base_translate()
    data["lattice"]["relaxation"] = 1.0
    with pytest.raises(ConfigError, match=r"lattice\.relaxation"):
        parse_config(data)


def test_invalid_kind():
    data = base_translate()
    data["kind"] = "levitate"
    with pytest.raises(ConfigError, match="kind"):
        parse_config(data)


def test_sample_every_invariants():
    data = base_translate()
    data["schedule"]["sample_every"] = 0
    with pytest.raises(ConfigError, match="sample_every"):
        parse_config(data)
    data["schedule"]["sample_every"] = 2.5
    with pytest.raises(ConfigError, match="sample_every"):
        parse_config(data)


def test_window_fraction_bounds_and_presets():
    for bad in (0.0, -0.2, 1.5):
        data = base_translate()
        data["schedule"]["window"] = bad
        with pytest.raises(ConfigError, match="window"):
            parse_config(data)
    data = base_translate()
    data["schedule"]["window"] = "rotation"
    assert parse_config(data).schedule.window_fraction == pytest.approx(0.5)
    data["schedule"]["window"] = "banana"
    with pytest.raises(ConfigError, match="window"):
        parse_config(data)


@settings(max_examples=30, deadline=None)
@given(fraction=st.floats(min_value=1e-6, max_value=1.0,
                          exclude_min=False, allow_nan=False))
def test_any_fraction_in_unit_interval_is_accepted(fraction):
    data = base_translate()
    data["schedule"]["window"] = fraction
    assert parse_config(data).schedule.window_fraction == fraction


def test_positive_sizes_enforced():
    data = base_translate()
    data["lattice"]["box_cells"] = [32, -4, 96]
    with pytest.raises(ConfigError, match="box_cells"):
        parse_config(data)
    data = base_translate()
    data["lattice"]["tau"] = 0.5
    with pytest.raises(ConfigError, match="tau"):
        parse_config(data)
    data = base_translate()
    data["geometry"]["radius_cells"] = 0.0
    with pytest.raises(ConfigError, match="radius_cells"):
        parse_config(data)
    data = base_translate()
    data["geometry"]["inverse_slenderness"] = 2.0   # needs L > 2 r
    with pytest.raises(ConfigError, match="inverse_slenderness"):
        parse_config(data)


def test_boundary_names_validated():
    data = base_translate()
    data["lattice"]["boundaries"] = ["freeslip", "slippery", "periodic"]
    with pytest.raises(ConfigError, match="boundaries"):
        parse_config(data)


def test_separation_only_for_tumbling():
    data = base_translate()
    data["geometry"]["separation_cells"] = 14.8
    with pytest.raises(ConfigError, match="separation_cells"):
        parse_config(data)
    data = base_tumble_sbf()
    del data["geometry"]["separation_cells"]
    with pytest.raises(ConfigError, match="separation_cells"):
        parse_config(data)


def test_load_requirements_per_kind():
    data = base_translate()
    data["loads"] = {}
    with pytest.raises(ConfigError, match="loads"):
        parse_config(data)
    data = base_tumble_sbf()
    data["loads"] = {"force": [0.0, 0.0, -1e-10]}
    with pytest.raises(ConfigError, match="particle_density"):
        parse_config(data)
    data = base_translate()
    data["kind"] = "rotate-validate"
    data["loads"] = {"force": [0.0, 0.0, -1e-10]}
    with pytest.raises(ConfigError, match="torque"):
        parse_config(data)


def test_sweep_section_only_for_wall_sweep():
    data = base_translate()
    data["sweep"] = {"cross_sections": [32, 48]}
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(data)
    data = base_translate()
    data["kind"] = "wall-sweep"
    data["schedule"]["window"] = "wall-sweep"
    with pytest.raises(ConfigError, match="sweep"):
        parse_config(data)          # sweep section now required
    data["sweep"] = {"cross_sections": [32, 48]}
    cfg = parse_config(data)
    assert cfg.sweep == (32, 48)
    data["sweep"] = {"cross_sections": [32, 0]}
    with pytest.raises(ConfigError, match="cross_sections"):
        parse_config(data)


def test_solver_kind_consistency():
    data = base_tumble_sbf()
    data["solver"] = "lbm"
    with pytest.raises(ConfigError, match="solver"):
        parse_config(data)
    data = base_tumble_sbf()
    data["solver"] = "sbf"          # redundant but consistent
    assert parse_config(data).solver == "sbf"
    data = base_translate()
    data["kind"] = "wall-sweep"
    data["solver"] = "sbf"          # the sweep studies wall effects
    with pytest.raises(ConfigError, match="solver"):
        parse_config(data)


def test_solver_sections_must_match_solver():
    data = base_translate()
    del data["lattice"]
    with pytest.raises(ConfigError, match="lattice"):
        parse_config(data)
    data = base_tumble_sbf()
    del data["sbf"]
    with pytest.raises(ConfigError, match="sbf"):
        parse_config(data)
    data = base_translate()
    data["sbf"] = {"cell_size": 1e-5}
    with pytest.raises(ConfigError, match="sbf"):
        parse_config(data)


def test_sbf_needs_time_step_for_dynamic_runs():
    data = base_tumble_sbf()
    del data["schedule"]["time_step"]
    with pytest.raises(ConfigError, match="time_step"):
        parse_config(data)


def test_cross_compare_config():
    data = {
        "schema_version": 1,
        "kind": "cross-compare",
        "compare": {"run_a": "runs/a", "run_b": "runs/b"},
    }
    cfg = parse_config(data)
    assert cfg.compare.run_a == "runs/a"
    # other physics sections are not allowed on a comparison
    data["geometry"] = {"radius_cells": 4.0, "inverse_slenderness": 8.0}
    with pytest.raises(ConfigError, match="geometry"):
        parse_config(data)
    # and the section is mandatory
    with pytest.raises(ConfigError, match="compare"):
        parse_config({"schema_version": 1, "kind": "cross-compare"})


def test_load_config_from_yaml_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(base_translate()))
    cfg = load_config(path)
    assert cfg.kind == "translate-validate"
    assert cfg.lattice.box_cells == (32, 32, 96)


def test_config_is_not_mutated_by_parsing():
    data = base_translate()
    snapshot = copy.deepcopy(data)
    parse_config(data)
    assert data == snapshot


def test_to_dict_round_trip():
    cfg = parse_config(base_translate())
    echoed = parse_config(cfg.to_dict())
    assert echoed == cfg

import numpy as np
import orjson
import pytest

from app.config import Settings
from app.errors import ConfigurationError
from app.services.scenario import parse_config, run_scenario


def _config(**fields):
    return orjson.dumps({"version": 1, **fields})


def test_mirror_bridge_defaults():
    config = parse_config(_config(preset="mirror_bridge"))
    lattice = config.lattice()
    assert lattice.n_sites == 29
    assert config.t_prime == 1.0
    assert config.analyses == ["spectrum"]


def test_figure_key_accepted_as_preset():
    assert parse_config(_config(preset="fig1")).lattice().n_sites == 19


def test_custom_graph_with_tuned_bond():
    config = parse_config(
        _config(
            graph={
                "sites": [
                    {"index": 1, "region": "system1", "onsite_imag": 0.0},
                    {"index": 2, "region": "reservoir", "onsite_imag": 2.0},
                    {"index": 3, "region": "reservoir", "onsite_imag": -2.0},
                ],
                "bonds": [{"i": 1, "j": 2, "amplitude": "t_prime"}, {"i": 2, "j": 3, "amplitude": 1.0}],
            },
            parameters={"t_prime": 0.4},
        )
    )
    lattice = config.lattice()
    assert lattice.bond_amplitude(1, 2) == pytest.approx(0.4)
    assert lattice.bond_amplitude(3, 2) == pytest.approx(1.0)


def test_duplicate_edge_rejected():
    document = _config(
        graph={
            "sites": [
                {"index": 1, "region": "reservoir", "onsite_imag": 2.0},
                {"index": 2, "region": "reservoir", "onsite_imag": -2.0},
            ],
            "bonds": [{"i": 1, "j": 2, "amplitude": 1.0}, {"i": 2, "j": 1, "amplitude": 1.0}],
        }
    )
    with pytest.raises(ConfigurationError) as info:
        parse_config(document)
    assert "duplicate" in str(info.value)


def test_decreasing_grid_names_the_key():
    with pytest.raises(ConfigurationError) as info:
        parse_config(_config(preset="fig1", sweep_grid=[0.1, 0.3, 0.2]))
    assert info.value.key == "sweep_grid"


def test_grid_range_expands():
    config = parse_config(_config(preset="fig1", sweep_grid={"lo": 0.0, "hi": 0.1, "step": 0.05}))
    assert np.allclose(config.grid(), [0.0, 0.05, 0.1])


def test_negative_gamma_names_the_key():
    with pytest.raises(ConfigurationError) as info:
        parse_config(_config(preset="fig1", parameters={"gamma": -1.0}))
    assert info.value.key == "parameters.gamma"
    assert info.value.to_event()["key"] == "parameters.gamma"


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError) as info:
        parse_config(_config(preset="fig1", colour="blue"))
    assert info.value.key == "colour"


def test_syntax_error_reports_position():
    with pytest.raises(ConfigurationError) as info:
        parse_config(b'{\n  "version": 1,\n  "preset": }')
    assert info.value.line == 3
    assert info.value.column is not None


def test_unsupported_version():
    with pytest.raises(ConfigurationError) as info:
        parse_config(_config(version=2, preset="fig1"))
    assert info.value.key == "version"


def test_unknown_preset():
    with pytest.raises(ConfigurationError) as info:
        parse_config(_config(preset="honeycomb"))
    assert info.value.key == "preset"


def test_reproduce_needs_figure():
    with pytest.raises(ConfigurationError):
        parse_config(_config(analyses=["reproduce"]))


def test_run_spectrum_and_analyze(out_dir):
    config = parse_config(_config(preset="fig1", analyses=["spectrum", "analyze"], target_energy=[0.0, -1.0]))
    result = run_scenario(config, out_dir=str(out_dir))
    assert result.files == ["lattice_1.json", "mode_1.csv", "report_1.json", "spectrum.csv"]
    assert result.summary["n_modes"] == 19
    assert result.summary["nhph_max_deviation"] <= 1e-8
    report = orjson.loads((out_dir / "report_1.json").read_bytes())
    assert report["source"] == "analyze"
    assert report["max_continuity_residual"] <= 1e-9


def test_run_sweep_writes_events(out_dir):
    config = parse_config(_config(preset="fig1", analyses=["sweep"], sweep_grid={"lo": 0.2, "hi": 0.4, "step": 0.05}))
    result = run_scenario(config, out_dir=str(out_dir))
    assert result.files == ["events.json", "sweep.csv"]
    assert result.summary["nhph_max_deviation"] <= 1e-8
    events = orjson.loads((out_dir / "events.json").read_bytes())
    assert events["parameter"] == "t_prime"


def test_find_zero_needs_bracket(out_dir):
    config = parse_config(_config(preset="fig1", analyses=["find-zero"]))
    with pytest.raises(ConfigurationError) as info:
        run_scenario(config, out_dir=str(out_dir))
    assert info.value.key == "bracket"
    assert not out_dir.exists()


def test_tolerances_apply_only_during_the_run(out_dir, tuned_settings):
    tuned_settings.ZERO_TOL = 1e-8
    config = parse_config(_config(preset="fig1", tolerances={"zero": 1e-11, "nhph": 1e-7}))
    assert config.tolerances.settings_values()["ZERO_TOL"] == 1e-11
    run_scenario(config, out_dir=str(out_dir), tol=1e-10)
    assert tuned_settings.ZERO_TOL == 1e-8
    assert tuned_settings.NHPH_TOL == 1e-8


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("LUCAS_MAX_WORKERS", "2")
    assert Settings().MAX_WORKERS == 2


def test_custom_graph_needs_explicit_t_prime():
    document = _config(
        graph={
            "sites": [
                {"index": 1, "region": "system1", "onsite_imag": 0.0},
                {"index": 2, "region": "reservoir", "onsite_imag": 2.0},
            ],
            "bonds": [{"i": 1, "j": 2, "amplitude": "t_prime"}],
        }
    )
    with pytest.raises(ConfigurationError) as info:
        parse_config(document)
    assert info.value.key == "parameters.t_prime"

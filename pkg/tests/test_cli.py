import orjson
import pandas as pd
import pytest
from click.testing import CliRunner

from app.main import cli
from app.services.lattice import preset_for
from app.store import read_json, read_lattice, read_mode


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_config(tmp_path):
    def write(**fields):
        path = tmp_path / "scenario.json"
        path.write_bytes(orjson.dumps({"version": 1, **fields}))
        return str(path)

    return write


def _error_event(stderr: str):
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    events = [orjson.loads(line) for line in lines]
    return next(e for e in events if e.get("event") == "error")


def test_spectrum_writes_csv(runner, write_config, out_dir):
    result = runner.invoke(cli, ["spectrum", "--config", write_config(preset="fig1"), "--out", str(out_dir)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out_dir / "spectrum.csv")
    assert list(frame.columns) == ["t_prime", "branch_id", "re_E", "im_E"]
    assert len(frame) == 19
    assert str(out_dir / "spectrum.csv") in result.stdout


def test_stdout_lists_only_written_files(runner, write_config, out_dir):
    path = write_config(preset="fig1", target_energy=[0.0, -1.0])
    result = runner.invoke(cli, ["analyze", "--config", path, "--out", str(out_dir)])
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines() == [str(out_dir / name) for name in ("lattice_1.json", "mode_1.csv", "report_1.json")]
    assert "[Store]" in result.stderr


def test_negative_gamma_exits_with_validation_status(runner, write_config, out_dir):
    path = write_config(preset="fig1", parameters={"gamma": -1.0})
    result = runner.invoke(cli, ["spectrum", "--config", path, "--out", str(out_dir)])
    assert result.exit_code == 2
    assert not out_dir.exists()
    event = _error_event(result.stderr)
    assert event["kind"] == "configuration"
    assert event["key"] == "parameters.gamma"


def test_missing_config_is_a_validation_error(runner, out_dir):
    result = runner.invoke(cli, ["spectrum", "--out", str(out_dir)])
    assert result.exit_code == 2
    assert _error_event(result.stderr)["key"] == "--config"


def test_bad_grid_flag(runner, write_config, out_dir):
    result = runner.invoke(cli, ["sweep", "--config", write_config(preset="fig1"), "--grid", "0.5:0.1", "--out", str(out_dir)])
    assert result.exit_code == 2
    assert _error_event(result.stderr)["key"] == "--grid"


def test_find_zero_round_trip(runner, write_config, out_dir):
    path = write_config(preset="fig1")
    result = runner.invoke(cli, ["find-zero", "--config", path, "--bracket", "1.0", "1.1", "--out", str(out_dir)])
    assert result.exit_code == 0, result.output

    report = read_json(out_dir / "report_0.json")
    assert 1.05 <= report["t_prime"] <= 1.07
    lattice = read_lattice(out_dir / "lattice_0.json")
    assert lattice == preset_for("fig1").build(report["t_prime"])
    mode = read_mode(out_dir / "mode_0.csv", lattice)
    assert abs(mode.energy) <= 1e-8
    assert abs(mode.energy.real - report["energy"][0]) <= 1e-12
    assert abs(mode.energy.imag - report["energy"][1]) <= 1e-12


def test_find_zero_reversed_bracket(runner, write_config, out_dir):
    path = write_config(preset="fig1")
    result = runner.invoke(cli, ["find-zero", "--config", path, "--bracket", "1.1", "1.0", "--out", str(out_dir)])
    assert result.exit_code == 2
    assert _error_event(result.stderr)["kind"] == "precondition"


def test_reproduce_is_deterministic(runner, tmp_path):
    outputs = []
    for name in ("first", "second"):
        target = tmp_path / name
        result = runner.invoke(cli, ["reproduce", "fig3", "--out", str(target)])
        assert result.exit_code == 0, result.output
        outputs.append({p.name: p.read_bytes() for p in sorted(target.iterdir())})
    assert outputs[0].keys() == outputs[1].keys()
    assert "acceptance.json" in outputs[0]
    assert outputs[0] == outputs[1]
    assert orjson.loads(outputs[0]["acceptance.json"])["passed"]

"""Tests for the qfi-optics command line."""

import argparse
import json
import math
from pathlib import Path
from typing import Any

import pytest

from qfi_optics import __version__
from qfi_optics.cli import CommandRegistry, load_state, save_state, sweep_columns
from qfi_optics.core import LossMode, LossModel, ProbeState, noon_state, qfi_bound
from qfi_optics.errors import CertificationError, InputError
from qfi_optics.main import main
from qfi_optics.strategies import sine_state


def _run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, dict[str, Any]]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else {})


def _write(path: Path, document: dict[str, Any]) -> Path:
    path.write_text(json.dumps(document))
    return path


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    """--version prints the tool name and version and exits cleanly."""
    assert main(["--version"]) == 0
    assert f"qfi-optics {__version__}" in capsys.readouterr().out


def test_missing_command_is_usage_error() -> None:
    """argparse rejects a call without a subcommand."""
    assert main([]) == 2


def test_compute_noon(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Lossless ten-photon N00N gives F = 100 and delta phi = 0.1."""
    path = tmp_path / "noon.json"
    save_state(path, noon_state(10))
    code, document = _run(capsys, "compute", str(path))
    assert code == 0
    result = document["result"]
    assert result["f_exact"] == pytest.approx(100.0)
    assert result["delta_phi_min"] == pytest.approx(0.1)
    meta = document["meta"]
    assert meta["tool"] == "qfi-optics"
    assert meta["version"] == __version__
    assert meta["command"] == ["qfi-optics", "compute", str(path)]
    assert meta["metrics"] == {"qfi": "exact"}
    assert meta["seed"] is None


def test_compute_reports_gap(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """With equal losses the exact value and the bound are reported together."""
    path = tmp_path / "sine.json"
    save_state(path, sine_state(6))
    code, document = _run(capsys, "compute", str(path), "--eta-a", "0.6", "--eta-b", "0.6")
    assert code == 0
    result = document["result"]
    assert result["f_exact"] <= result["f_bound"] + 1e-9
    assert result["gap"] == pytest.approx(result["f_bound"] - result["f_exact"])
    assert result["f_bound"] == pytest.approx(qfi_bound(sine_state(6), LossModel.balanced(0.6)))


def test_compute_rejects_unnormalized_state(tmp_path: Path) -> None:
    """Weights summing to 0.9 are an input error."""
    path = _write(tmp_path / "bad.json", {"n_photons": 1, "weights": [0.45, 0.45]})
    assert main(["compute", str(path)]) == 2


def test_compute_missing_file(tmp_path: Path) -> None:
    """A missing state file is an input error."""
    assert main(["compute", str(tmp_path / "absent.json")]) == 2


def test_state_file_round_trip(tmp_path: Path) -> None:
    """Loading and saving a canonical state file reproduces its bytes."""
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    save_state(first, sine_state(5))
    save_state(second, load_state(first))
    assert first.read_bytes() == second.read_bytes()


def test_state_file_keeps_every_float_bit(tmp_path: Path) -> None:
    """Weights and phases without a short decimal form survive a save and load exactly."""
    third = 1.0 / 3.0
    weights = [third, third, 1.0 - 2.0 * third]
    phases = [0.0, math.pi / 3.0, -math.e]
    state = ProbeState.from_weights(weights, phases)
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    save_state(first, state)
    loaded = load_state(first)
    save_state(second, loaded)
    assert first.read_bytes() == second.read_bytes()
    assert loaded.weights == state.weights
    assert loaded.phases == state.phases


def test_state_file_schema(tmp_path: Path) -> None:
    """Unknown fields, wrong lengths and bad phases are rejected."""
    with pytest.raises(InputError):
        load_state(_write(tmp_path / "a.json", {"n_photons": 1, "weights": [1, 0], "x": 1}))
    with pytest.raises(InputError):
        load_state(_write(tmp_path / "b.json", {"n_photons": 2, "weights": [1, 0]}))
    with pytest.raises(InputError):
        load_state(
            _write(tmp_path / "c.json", {"n_photons": 1, "weights": [1, 0], "phases": ["x", 0]})
        )
    state = load_state(
        _write(tmp_path / "d.json", {"n_photons": 1, "weights": [0.5, 0.5 + 5e-10]})
    )
    assert sum(state.weights) == pytest.approx(1.0, abs=1e-15)


def test_optimize_lossless(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """The lossless optimum is N00N and can be saved as a state file."""
    state_path = tmp_path / "optimal.json"
    code, document = _run(capsys, "optimize", "--photons", "4", "--state-out", str(state_path))
    assert code == 0
    result = document["result"]
    assert result["objective"] == pytest.approx(16.0)
    assert result["support"] == [0, 4]
    assert result["certified_residual"] <= 1e-7
    assert document["meta"]["metrics"] == {"objective": "one_arm_closed_form"}
    assert load_state(state_path).weights == pytest.approx((0.5, 0.0, 0.0, 0.0, 0.5), abs=1e-6)
    saved = json.loads(state_path.read_text())
    assert saved["meta"] == document["meta"]
    assert saved["meta"]["version"] == __version__
    assert saved["meta"]["command"][:2] == ["qfi-optics", "optimize"]


def test_optimize_balanced_is_symmetric(capsys: pytest.CaptureFixture[str]) -> None:
    """Equal losses give mirror-symmetric weights under the bound objective."""
    code, document = _run(capsys, "optimize", "--photons", "3", "--eta-a", "0.7", "--eta-b", "0.7")
    assert code == 0
    weights = document["result"]["state"]["weights"]
    assert weights == pytest.approx(weights[::-1], abs=1e-6)
    assert document["meta"]["metrics"] == {"objective": "bound"}


def test_optimize_rejects_bad_transmissivity() -> None:
    """eta outside [0, 1] is an input error."""
    assert main(["optimize", "--photons", "3", "--eta-a", "1.5"]) == 2


def test_threshold_command(capsys: pytest.CaptureFixture[str]) -> None:
    """The ten-photon one-arm threshold is reported near 0.91."""
    code, document = _run(capsys, "threshold", "--photons", "10", "--mode", "one-arm")
    assert code == 0
    (entry,) = document["result"]["thresholds"]
    assert entry["eta_bar"] == pytest.approx(0.91, abs=0.005)
    assert document["meta"]["metrics"] == {"10": "polynomial_root"}


def test_threshold_fit_needs_two_photon_numbers() -> None:
    """A fit over a single photon number is refused."""
    assert main(["threshold", "--photons", "10", "--mode", "two-arm", "--fit"]) == 2


def test_simulate_record(capsys: pytest.CaptureFixture[str]) -> None:
    """The simulation record carries the seed and the variance ratio."""
    code, document = _run(
        capsys, "simulate", "--photons", "1", "--nu", "1000", "--trials", "30", "--seed", "4"
    )
    assert code == 0
    result = document["result"]
    assert result["seed"] == 4
    assert document["meta"]["seed"] == 4
    assert result["repetitions"] == 1000
    assert result["variance_ratio"] == pytest.approx(
        result["sample_variance"] / result["expected_variance"]
    )
    assert result["weights"] == pytest.approx([0.5, 0.5])


def test_simulate_needs_one_source(tmp_path: Path) -> None:
    """--photons and --state are mutually exclusive."""
    path = tmp_path / "noon.json"
    save_state(path, noon_state(2))
    assert main(["simulate", "--photons", "2", "--state", str(path)]) == 2
    assert main(["simulate"]) == 2


def test_sweep_and_plot(tmp_path: Path) -> None:
    """A sweep writes JSON and CSV; the plot has one series per strategy."""
    stem = tmp_path / "sweep"
    argv = ["sweep", "--photons", "3", "--mode", "two-arm", "--grid", "0.5:1:5"]
    assert main([*argv, "--out", str(stem)]) == 0
    document = json.loads(stem.with_suffix(".json").read_text())
    assert document["result"]["eta_grid"] == pytest.approx([0.5, 0.625, 0.75, 0.875, 1.0])
    assert document["meta"]["metrics"]["optimal_exact"] == "exact"
    csv_text = stem.with_suffix(".csv").read_text()
    assert csv_text.count("\n# ") >= 1

    assert main(["plot", str(stem.with_suffix(".json"))]) == 0
    svg = stem.with_suffix(".svg").read_text()
    for name in sweep_columns(LossMode.TWO_ARM):
        assert f'id="series-{name}"' in svg
    assert 'id="weights-x0"' in svg
    assert "<dc:description>" in svg
    assert f"\"version\": \"{__version__}\"" in svg
    assert "\"plot\"" in svg
    assert str(stem.with_suffix(".json")) in svg


def test_sweep_rejects_zero_transmissivity() -> None:
    """A grid starting at eta = 0 is an input error."""
    assert main(["sweep", "--photons", "3", "--mode", "one-arm", "--grid", "0:1:5"]) == 2


def test_plot_rejects_other_artifacts(tmp_path: Path) -> None:
    """Only sweep artifacts can be plotted."""
    path = _write(tmp_path / "other.json", {"n_photons": 1})
    assert main(["plot", str(path)]) == 2


def test_registry_maps_errors_to_exit_codes() -> None:
    """Certification failures exit 3, input errors 2, anything else 4."""
    registry = CommandRegistry()

    def certification(args: argparse.Namespace) -> int:
        raise CertificationError("no certificate")

    def bad_input(args: argparse.Namespace) -> int:
        raise InputError("bad input")

    def crash(args: argparse.Namespace) -> int:
        raise RuntimeError("unexpected")

    for name, handler in (("cert", certification), ("input", bad_input), ("crash", crash)):
        registry.register_command(name, name, lambda parser: None, handler)
    parser = registry.build_parser()
    assert registry.command_count == 3
    assert registry.dispatch(parser.parse_args(["cert"])) == 3
    assert registry.dispatch(parser.parse_args(["input"])) == 2
    assert registry.dispatch(parser.parse_args(["crash"])) == 4

"""Tests for transmissivity sweeps and their table form."""

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from qfi_optics.cli import (
    SweepResult,
    build_meta,
    canonical_json,
    parse_grid,
    plot_sweep,
    read_csv,
    run_sweep,
    sweep_columns,
    write_csv,
)
from qfi_optics.core import LossMode, LossModel, Metric, ProbeState, QfiReport
from qfi_optics.errors import InputError
from qfi_optics.strategies import StrategyName, heisenberg


def test_parse_grid() -> None:
    """start:stop:steps gives evenly spaced points."""
    np.testing.assert_allclose(parse_grid("0.5:1:6"), [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    np.testing.assert_allclose(parse_grid("0.3:0.3:1"), [0.3])


@pytest.mark.parametrize("text", ["0:1:5", "0.2:1.1:5", "0.5:0.4:3", "0.5:0.5:3", "0.1:1", "a:b:c"])
def test_parse_grid_rejects(text: str) -> None:
    """Zero transmissivity, reversed or malformed grids are input errors."""
    with pytest.raises(InputError):
        parse_grid(text)


def test_one_arm_sweep_ordering() -> None:
    """Across the whole grid the optimum beats every other strategy."""
    result = run_sweep(10, LossMode.ONE_ARM, parse_grid("0.05:1:96"))
    assert not result.failed_rows
    assert tuple(result.delta_phi) == sweep_columns(LossMode.ONE_ARM)
    assert result.metrics[StrategyName.OPTIMAL] is Metric.ONE_ARM_CLOSED_FORM
    optimal = np.asarray(result.delta_phi[StrategyName.OPTIMAL])
    assert np.all(optimal >= heisenberg(10) - 1e-12)
    for name, column in result.delta_phi.items():
        if name is StrategyName.HEISENBERG:
            continue
        assert np.all(optimal <= np.asarray(column) + 1e-9), name
    assert result.bound_gap is None
    np.testing.assert_allclose(np.asarray(result.weights).sum(axis=1), 1.0, atol=1e-9)


def test_two_arm_sweep_gap_is_small() -> None:
    """With equal losses the exact optimum stays close to the bound."""
    result = run_sweep(10, LossMode.TWO_ARM, parse_grid("0.05:1:20"))
    assert not result.failed_rows
    assert result.max_precision_gap <= 0.005
    assert result.bound_gap is not None
    assert min(result.bound_gap) >= -1e-9
    exact = np.asarray(result.delta_phi[StrategyName.OPTIMAL_EXACT])
    bound = np.asarray(result.delta_phi[StrategyName.OPTIMAL])
    assert np.all(exact >= bound - 1e-12)


def test_noon_loses_to_sil_under_strong_losses() -> None:
    """At eta = 0.5 in both arms ten-photon N00N is worse than separate photons."""
    result = run_sweep(10, LossMode.TWO_ARM, [0.5])
    noon = result.delta_phi[StrategyName.NOON][0]
    assert noon > result.delta_phi[StrategyName.SIL][0]
    assert result.delta_phi[StrategyName.OPTIMAL][0] < result.delta_phi[StrategyName.SIL][0]


def test_thread_count_does_not_change_results() -> None:
    """Rows come back in grid order whatever the worker count."""
    grid = parse_grid("0.2:1:9")
    serial = run_sweep(4, LossMode.ONE_ARM, grid, threads=1)
    parallel = run_sweep(4, LossMode.ONE_ARM, grid, threads=4)
    assert serial.eta_grid == parallel.eta_grid
    serial_columns, serial_rows = serial.table()
    parallel_columns, parallel_rows = parallel.table()
    assert serial_columns == parallel_columns
    np.testing.assert_allclose(parallel_rows, serial_rows, rtol=1e-12, equal_nan=True)


def test_table_and_csv_agree(tmp_path: Path) -> None:
    """The CSV holds the table columns and values of the sweep."""
    result = run_sweep(3, LossMode.TWO_ARM, parse_grid("0.6:1:5"))
    columns, rows = result.table()
    assert columns[0] == "eta"
    assert columns[-2:] == ["bound_gap", "precision_gap"]
    assert "delta_phi:N00N" in columns and "x_3" in columns
    assert rows.shape == (5, len(columns))

    path = tmp_path / "sweep.csv"
    write_csv(path, columns, rows, build_meta(["sweep"], {"optimal": Metric.BOUND}))
    read_columns, read_rows = read_csv(path)
    assert read_columns == columns
    np.testing.assert_allclose(read_rows, rows, rtol=1e-11, equal_nan=True)
    assert path.read_text().startswith("# command: ")


def test_sweep_result_validation() -> None:
    """Rows must follow an increasing grid and hold normalized weights."""
    base = {
        "n_photons": 1,
        "mode": "one-arm",
        "eta_grid": [0.5, 0.8],
        "delta_phi": {"SIL": [1.2, 1.1]},
        "metrics": {"SIL": None},
        "weights": [[0.5, 0.5], [0.4, 0.6]],
    }
    assert SweepResult.model_validate(base).eta_grid == (0.5, 0.8)
    with pytest.raises(ValidationError):
        SweepResult.model_validate({**base, "eta_grid": [0.8, 0.5]})
    with pytest.raises(ValidationError):
        SweepResult.model_validate({**base, "weights": [[0.5, 0.5], [0.4, 0.5]]})
    with pytest.raises(ValidationError):
        SweepResult.model_validate({**base, "delta_phi": {"SIL": [1.2]}})


def test_null_entries_read_back_as_nan() -> None:
    """JSON nulls of failed rows become NaN again."""
    document = {
        "n_photons": 1,
        "mode": "two-arm",
        "eta_grid": [0.5, 0.8],
        "delta_phi": {"SIL": [None, 1.1]},
        "metrics": {"SIL": None},
        "weights": [[None, None], [0.4, 0.6]],
        "bound_gap": [None, 0.0],
        "precision_gap": [None, 0.0],
        "failed_rows": [0],
    }
    result = SweepResult.model_validate(document)
    assert math.isnan(result.delta_phi[StrategyName.SIL][0])
    assert math.isnan(result.weights[0][0])
    assert result.max_precision_gap == 0.0


def test_invalid_exact_report_marks_row_failed(monkeypatch: pytest.MonkeyPatch) -> None:
    """A model validation error while scoring the optimum fails that row only."""

    def invalid_report(state: ProbeState, loss: LossModel, phase: float = 0.0) -> QfiReport:
        return QfiReport.model_validate(
            {"f_exact": 5.0, "f_bound": 4.0, "delta_phi_min": 0.5, "metric": "exact"}
        )

    monkeypatch.setattr("qfi_optics.cli.sweep.qfi_exact", invalid_report)
    result = run_sweep(2, LossMode.TWO_ARM, [0.5, 0.8], threads=1)
    assert result.failed_rows == (0, 1)
    assert result.bound_gap is not None
    assert all(math.isnan(gap) for gap in result.bound_gap)
    assert all(math.isfinite(value) for value in result.delta_phi[StrategyName.SIL])
    np.testing.assert_allclose(np.asarray(result.weights).sum(axis=1), 1.0, atol=1e-9)


def test_plot_embeds_meta(tmp_path: Path) -> None:
    """The SVG description carries the artifact meta and no creation date."""
    result = run_sweep(2, LossMode.ONE_ARM, parse_grid("0.5:1:3"))
    meta = build_meta(["plot", "sweep.json"], {str(k): v for k, v in result.metrics.items()})
    path = plot_sweep(result, tmp_path / "sweep.svg", meta)
    svg = path.read_text()
    assert canonical_json(meta).strip() in svg
    assert "<dc:date>" not in svg
    assert "qfi-optics sweep N=2" in svg

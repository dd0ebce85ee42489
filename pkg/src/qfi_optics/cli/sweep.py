"""Transmissivity sweeps comparing every strategy with the optimal probe."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from qfi_optics.config import get_settings
from qfi_optics.core.fisher import Metric, precision_from_fisher, qfi_exact
from qfi_optics.core.fock import FloatArray, LossMode
from qfi_optics.errors import InputError, QfiOpticsError
from qfi_optics.strategies import (
    StrategyName,
    get_strategy_registry,
    heisenberg,
    optimal_result,
    register_all_strategies,
    sil,
)

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOLERANCE = 1e-9

ONE_ARM_COLUMNS = (
    StrategyName.SIL,
    StrategyName.HEISENBERG,
    StrategyName.NOON,
    StrategyName.CHOP_ONE_ARM,
    StrategyName.SINE_STATE,
    StrategyName.TWO_COMPONENT,
    StrategyName.OPTIMAL,
)
TWO_ARM_COLUMNS = (
    StrategyName.SIL,
    StrategyName.HEISENBERG,
    StrategyName.NOON,
    StrategyName.CHOP_TWO_ARM,
    StrategyName.SINE_STATE,
    StrategyName.OPTIMAL,
    StrategyName.OPTIMAL_EXACT,
)


def sweep_columns(mode: LossMode) -> tuple[StrategyName, ...]:
    return ONE_ARM_COLUMNS if mode is LossMode.ONE_ARM else TWO_ARM_COLUMNS


def parse_grid(text: str) -> FloatArray:
    """``start:stop:steps`` -> evenly spaced transmissivities in (0, 1].

    eta = 0 is rejected: several strategies are undefined there.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must look like start:stop:steps, got '{text}'")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise InputError(f"cannot parse grid '{text}': {e}") from e
    if not 0.0 < start <= stop <= 1.0:
        raise InputError(f"grid needs 0 < start <= stop <= 1, got {start}:{stop}")
    if steps < 1 or (steps > 1 and start == stop):
        raise InputError(f"grid '{text}' does not describe increasing points")
    return np.linspace(start, stop, steps)


def _nan_if_none(values: Any) -> Any:
    if values is None:
        return None
    return tuple(math.nan if v is None else v for v in values)


class SweepResult(BaseModel):
    """One row per transmissivity; failed evaluations are NaN."""

    model_config = ConfigDict(frozen=True)

    n_photons: int = Field(ge=1)
    mode: LossMode
    eta_grid: tuple[float, ...]
    delta_phi: dict[StrategyName, tuple[float, ...]]
    metrics: dict[StrategyName, Metric | None]
    weights: tuple[tuple[float, ...], ...]
    bound_gap: tuple[float, ...] | None = None
    precision_gap: tuple[float, ...] | None = None
    failed_rows: tuple[int, ...] = ()

    @field_validator("bound_gap", "precision_gap", mode="before")
    @classmethod
    def _null_to_nan(cls, value: Any) -> Any:
        return _nan_if_none(value)

    @field_validator("delta_phi", mode="before")
    @classmethod
    def _columns_null_to_nan(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {name: _nan_if_none(column) for name, column in value.items()}
        return value

    @field_validator("weights", mode="before")
    @classmethod
    def _rows_null_to_nan(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            return tuple(_nan_if_none(row) for row in value)
        return value

    @model_validator(mode="after")
    def _check_shape(self) -> "SweepResult":
        grid = np.asarray(self.eta_grid)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(grid > 1.0):
            raise ValueError("grid must be nonempty and lie in (0, 1]")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        rows = grid.size
        for name, column in self.delta_phi.items():
            if len(column) != rows:
                raise ValueError(f"column {name} has {len(column)} rows, expected {rows}")
        if len(self.weights) != rows:
            raise ValueError(f"{len(self.weights)} weight rows, expected {rows}")
        for index, row in enumerate(self.weights):
            if len(row) != self.n_photons + 1:
                raise ValueError(f"weight row {index} has {len(row)} entries")
            if all(math.isnan(w) for w in row):
                continue
            if abs(math.fsum(row) - 1.0) > WEIGHT_SUM_TOLERANCE:
                raise ValueError(f"weight row {index} does not sum to 1")
        for extra in (self.bound_gap, self.precision_gap):
            if extra is not None and len(extra) != rows:
                raise ValueError("gap columns must have one entry per grid point")
        return self

    @property
    def max_precision_gap(self) -> float:
        """Largest finite precision-scale gap, NaN when there is none."""
        if self.precision_gap is None:
            return math.nan
        values = np.asarray(self.precision_gap)
        finite = values[np.isfinite(values)]
        return float(finite.max()) if finite.size else math.nan

    def table(self) -> tuple[list[str], FloatArray]:
        """Flat numeric table: eta, one delta_phi column per strategy, x_0..x_N, gaps."""
        columns = ["eta"]
        blocks: list[FloatArray] = [np.asarray(self.eta_grid)[:, None]]
        for name, values in self.delta_phi.items():
            columns.append(f"delta_phi:{name}")
            blocks.append(np.asarray(values, dtype=np.float64)[:, None])
        columns.extend(f"x_{k}" for k in range(self.n_photons + 1))
        blocks.append(np.asarray(self.weights, dtype=np.float64))
        if self.bound_gap is not None and self.precision_gap is not None:
            columns.extend(["bound_gap", "precision_gap"])
            blocks.append(np.asarray(self.bound_gap)[:, None])
            blocks.append(np.asarray(self.precision_gap)[:, None])
        return columns, np.hstack(blocks)


@dataclass(frozen=True)
class _Row:
    delta_phi: dict[StrategyName, float]
    metrics: dict[StrategyName, Metric | None]
    weights: tuple[float, ...]
    bound_gap: float
    precision_gap: float
    failed: bool


def _evaluate_row(n_photons: int, mode: LossMode, eta: float) -> _Row:
    loss = mode.model(eta)
    registry = get_strategy_registry()
    names = sweep_columns(mode)
    precisions = registry.evaluate(names, n_photons, loss)
    failed = any(p is None for p in precisions.values())

    nan_row = (math.nan,) * (n_photons + 1)
    weights: tuple[float, ...] = nan_row
    bound_gap = precision_gap = math.nan
    try:
        result = optimal_result(n_photons, loss)
        weights = result.state.weights
        if mode is LossMode.TWO_ARM:
            report = qfi_exact(result.state, loss)
            assert report.f_exact is not None and report.f_bound is not None
            bound_gap = report.f_bound - report.f_exact
            scale = sil(n_photons, loss) - heisenberg(n_photons)
            if scale > 0.0:
                precision_gap = (
                    precision_from_fisher(report.f_exact) - precision_from_fisher(report.f_bound)
                ) / scale
    except (QfiOpticsError, ValidationError) as e:
        logger.warning(f"Optimal state failed for N={n_photons}, eta={eta}: {e}")
        failed = True

    return _Row(
        delta_phi={
            name: (p.delta_phi if p is not None else math.nan) for name, p in precisions.items()
        },
        metrics={name: (p.metric if p is not None else None) for name, p in precisions.items()},
        weights=weights,
        bound_gap=bound_gap,
        precision_gap=precision_gap,
        failed=failed,
    )


def _column_metric(name: StrategyName, rows: Sequence[_Row]) -> Metric | None:
    for row in rows:
        if row.metrics[name] is not None:
            return row.metrics[name]
    strategy = get_strategy_registry().get_strategy(name)
    return strategy.metric if strategy is not None else None


def run_sweep(
    n_photons: int,
    mode: LossMode,
    grid: Sequence[float] | FloatArray,
    threads: int | None = None,
) -> SweepResult:
    """Evaluate all strategies of ``mode`` on ``grid``, rows in grid order.

    Args:
        n_photons: Photon number N
        mode: One-arm or balanced two-arm losses
        grid: Strictly increasing transmissivities in (0, 1]
        threads: Worker cap; defaults to QFI_OPTICS_THREADS

    Returns:
        The sweep table; rows that failed are NaN and listed in ``failed_rows``
    """
    if n_photons < 1:
        raise InputError(f"need at least one photon, got N={n_photons}")
    register_all_strategies()
    etas = [float(eta) for eta in grid]
    workers = threads if threads is not None else get_settings().threads
    logger.info(f"Sweeping N={n_photons} {mode} over {len(etas)} points (workers={workers})")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(lambda eta: _evaluate_row(n_photons, mode, eta), etas))

    names = sweep_columns(mode)
    metrics = {name: _column_metric(name, rows) for name in names}
    failed_rows = tuple(index for index, row in enumerate(rows) if row.failed)
    if failed_rows:
        logger.warning(f"{len(failed_rows)} of {len(rows)} sweep rows had failures")

    two_arm = mode is LossMode.TWO_ARM
    return SweepResult(
        n_photons=n_photons,
        mode=mode,
        eta_grid=tuple(etas),
        delta_phi={name: tuple(row.delta_phi[name] for row in rows) for name in names},
        metrics=metrics,
        weights=tuple(row.weights for row in rows),
        bound_gap=tuple(row.bound_gap for row in rows) if two_arm else None,
        precision_gap=tuple(row.precision_gap for row in rows) if two_arm else None,
        failed_rows=failed_rows,
    )

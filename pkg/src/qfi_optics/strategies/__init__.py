"""Baseline phase-estimation strategies and their registry."""

from qfi_optics.strategies.base import BaseStrategy, StrategyRegistry, get_strategy_registry
from qfi_optics.strategies.baselines import (
    StrategyName,
    StrategyPrecision,
    chop_constants,
    chop_one_arm,
    chop_two_arm,
    heisenberg,
    noon_precision,
    sil,
    sine_state,
)
from qfi_optics.strategies.catalog import optimal_result, register_all_strategies

__all__ = [
    "BaseStrategy",
    "StrategyName",
    "StrategyPrecision",
    "StrategyRegistry",
    "chop_constants",
    "chop_one_arm",
    "chop_two_arm",
    "get_strategy_registry",
    "heisenberg",
    "noon_precision",
    "optimal_result",
    "register_all_strategies",
    "sil",
    "sine_state",
]

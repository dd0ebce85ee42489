"""The concrete strategies compared in sweeps."""

import logging
from functools import lru_cache

from qfi_optics.core.fisher import Metric, precision_from_fisher, qfi_bound, qfi_exact
from qfi_optics.core.fock import LossModel
from qfi_optics.optimize.simplex import (
    OptimizationResult,
    certify_optimum,
    maximize_qfi,
    maximize_two_component,
)
from qfi_optics.strategies.base import BaseStrategy, get_strategy_registry
from qfi_optics.strategies.baselines import (
    StrategyName,
    StrategyPrecision,
    chop_one_arm,
    chop_two_arm,
    heisenberg,
    noon_precision,
    sil,
    sine_state,
)

logger = logging.getLogger(__name__)


def _objective_metric(loss: LossModel) -> Metric:
    return Metric.ONE_ARM_CLOSED_FORM if loss.is_one_arm else Metric.BOUND


@lru_cache(maxsize=1024)
def optimal_result(n_photons: int, loss: LossModel) -> OptimizationResult:
    """Certified maximizer of the bound, shared by the strategies that need it."""
    result = maximize_qfi(n_photons, loss, _objective_metric(loss))
    certify_optimum(result, loss)
    return result


class SilStrategy(BaseStrategy):
    name = StrategyName.SIL
    metric = None

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        return self.describe(n_photons, sil(n_photons, loss))


class HeisenbergStrategy(BaseStrategy):
    name = StrategyName.HEISENBERG
    metric = None

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        return self.describe(n_photons, heisenberg(n_photons))


class NoonStrategy(BaseStrategy):
    """Unbalanced N00N state with the loss-optimal weight x_0."""

    name = StrategyName.NOON

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        delta, x0 = noon_precision(n_photons, loss)
        weights = [0.0] * (n_photons + 1)
        weights[0] += x0
        weights[n_photons] += 1.0 - x0
        return self.describe(n_photons, delta, weights=tuple(weights))


class ChopOneArmStrategy(BaseStrategy):
    name = StrategyName.CHOP_ONE_ARM
    metric = Metric.ONE_ARM_CLOSED_FORM

    def applies_to(self, loss: LossModel) -> bool:
        return loss.is_one_arm and loss.eta_a > 0.0

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        return chop_one_arm(n_photons, loss.eta_a)


class ChopTwoArmStrategy(BaseStrategy):
    name = StrategyName.CHOP_TWO_ARM

    def applies_to(self, loss: LossModel) -> bool:
        return loss.is_balanced and loss.eta_a > 0.0

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        return chop_two_arm(n_photons, loss.eta_a)


class SineStateStrategy(BaseStrategy):
    name = StrategyName.SINE_STATE
    metric = Metric.BOUND

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        state = sine_state(n_photons)
        fisher = qfi_bound(state, loss)
        return self.describe(
            n_photons,
            precision_from_fisher(fisher),
            metric=_objective_metric(loss),
            weights=state.weights,
        )


class OptimalStrategy(BaseStrategy):
    """Maximizer of the bound; for one-arm losses the bound is the exact QFI."""

    name = StrategyName.OPTIMAL
    metric = Metric.BOUND

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        result = optimal_result(n_photons, loss)
        return self.describe(
            n_photons,
            precision_from_fisher(result.objective),
            metric=result.metric,
            weights=result.state.weights,
        )


class OptimalExactStrategy(BaseStrategy):
    """Exact QFI of the bound-optimal state when losses hit both arms."""

    name = StrategyName.OPTIMAL_EXACT

    def applies_to(self, loss: LossModel) -> bool:
        return not loss.is_one_arm

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        result = optimal_result(n_photons, loss)
        report = qfi_exact(result.state, loss)
        return self.describe(n_photons, report.delta_phi_min, weights=result.state.weights)


class TwoComponentStrategy(BaseStrategy):
    name = StrategyName.TWO_COMPONENT
    metric = Metric.ONE_ARM_CLOSED_FORM

    def applies_to(self, loss: LossModel) -> bool:
        return loss.is_one_arm

    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        result = maximize_two_component(n_photons, loss.eta_a)
        return self.describe(
            n_photons, precision_from_fisher(result.objective), weights=result.state.weights
        )


STRATEGY_CLASSES: tuple[type[BaseStrategy], ...] = (
    SilStrategy,
    HeisenbergStrategy,
    NoonStrategy,
    ChopOneArmStrategy,
    ChopTwoArmStrategy,
    SineStateStrategy,
    TwoComponentStrategy,
    OptimalStrategy,
    OptimalExactStrategy,
)


def register_all_strategies() -> None:
    """Register every strategy with the global registry (idempotent)."""
    registry = get_strategy_registry()
    for strategy_class in STRATEGY_CLASSES:
        if registry.get_strategy(strategy_class.name) is None:
            registry.register(strategy_class())
    logger.debug(f"Strategies available: {[str(name) for name in registry.names()]}")

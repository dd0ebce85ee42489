"""Base strategy class and the registry that evaluates strategies side by side."""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence

from qfi_optics.core.fisher import Metric
from qfi_optics.core.fock import LossModel
from qfi_optics.errors import InputError, QfiOpticsError
from qfi_optics.strategies.baselines import StrategyName, StrategyPrecision

logger = logging.getLogger(__name__)


class BaseStrategy(ABC):
    """A way of spending N photons on one phase estimate.

    Subclasses declare which loss geometries they are defined for and return
    the phase uncertainty they reach.
    """

    # Override in subclasses
    name: StrategyName
    metric: Metric | None = Metric.EXACT

    def applies_to(self, loss: LossModel) -> bool:
        """Whether the strategy is defined for ``loss``."""
        return True

    @abstractmethod
    def precision(self, n_photons: int, loss: LossModel) -> StrategyPrecision:
        """Phase uncertainty with ``n_photons`` photons under ``loss``."""

    def describe(self, n_photons: int, delta_phi: float, **extra: object) -> StrategyPrecision:
        """Build the result record for this strategy."""
        return StrategyPrecision.model_validate(
            {
                "name": self.name,
                "n_photons": n_photons,
                "delta_phi": delta_phi,
                "metric": self.metric,
                **extra,
            }
        )


class StrategyRegistry:
    """Registry of strategies, evaluated in registration order."""

    def __init__(self) -> None:
        self._strategies: dict[StrategyName, BaseStrategy] = {}

    def register(self, strategy: BaseStrategy) -> None:
        self._strategies[strategy.name] = strategy
        logger.debug(f"Registered strategy: {strategy.name}")

    def get_strategy(self, name: StrategyName | str) -> BaseStrategy | None:
        return self._strategies.get(StrategyName(name))

    def names(self, loss: LossModel | None = None) -> list[StrategyName]:
        """Registered strategy names, optionally only those defined for ``loss``."""
        return [
            name
            for name, strategy in self._strategies.items()
            if loss is None or strategy.applies_to(loss)
        ]

    def evaluate_all(
        self, n_photons: int, loss: LossModel
    ) -> dict[StrategyName, StrategyPrecision | None]:
        """Evaluate every applicable strategy.

        Returns:
            Strategy name -> precision; ``None`` where the evaluation failed
        """
        return self.evaluate(self.names(loss), n_photons, loss)

    def evaluate(
        self, names: Sequence[StrategyName], n_photons: int, loss: LossModel
    ) -> dict[StrategyName, StrategyPrecision | None]:
        """Evaluate the named strategies, whether or not ``applies_to`` holds."""
        results: dict[StrategyName, StrategyPrecision | None] = {}
        for name in names:
            strategy = self.get_strategy(name)
            if strategy is None:
                raise InputError(f"unknown strategy '{name}'")
            try:
                results[name] = strategy.precision(n_photons, loss)
            except (QfiOpticsError, ValueError) as e:
                logger.warning(
                    f"Strategy '{name}' failed for N={n_photons}, "
                    f"eta=({loss.eta_a}, {loss.eta_b}): {e}"
                )
                results[name] = None
        return results


# Global strategy registry
_registry: StrategyRegistry | None = None


def get_strategy_registry() -> StrategyRegistry:
    """Get or create the global strategy registry."""
    global _registry
    if _registry is None:
        _registry = StrategyRegistry()
    return _registry

"""Closed-form precisions of the reference strategies and the sine reference state."""

import logging
import math
from enum import StrEnum
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq

from qfi_optics.core.fisher import Metric
from qfi_optics.core.fock import LossModel, ProbeState
from qfi_optics.errors import InputError

logger = logging.getLogger(__name__)

HEISENBERG_TOLERANCE = 1e-12


class StrategyName(StrEnum):
    SIL = "SIL"
    HEISENBERG = "Heisenberg"
    NOON = "N00N"
    CHOP_ONE_ARM = "chop_one_arm"
    CHOP_TWO_ARM = "chop_two_arm"
    SINE_STATE = "sine_state"
    OPTIMAL = "optimal"
    TWO_COMPONENT = "two_component"
    OPTIMAL_EXACT = "optimal_exact"


class StrategyPrecision(BaseModel):
    """Phase uncertainty reached by one strategy with N photons."""

    model_config = ConfigDict(frozen=True)

    name: StrategyName
    n_photons: int = Field(ge=1)
    delta_phi: float = Field(gt=0.0)
    metric: Metric | None = None
    regime: str | None = None
    optimal_n: float | None = None
    weights: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check_heisenberg(self) -> "StrategyPrecision":
        if self.delta_phi < 1.0 / self.n_photons - HEISENBERG_TOLERANCE:
            raise ValueError(
                f"{self.name} precision {self.delta_phi!r} beats the Heisenberg limit "
                f"1/{self.n_photons}"
            )
        return self


def _check_photons(n_photons: int) -> None:
    if n_photons < 1:
        raise InputError(f"need at least one photon, got N={n_photons}")


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise InputError(f"transmissivity must lie in (0, 1], got {eta!r}")


def heisenberg(n_photons: int) -> float:
    _check_photons(n_photons)
    return 1.0 / n_photons


def sil(n_photons: int, loss: LossModel) -> float:
    """Coherent-state Mach-Zehnder precision; infinite if an arm is fully lossy."""
    _check_photons(n_photons)
    eta_a, eta_b = loss.eta_a, loss.eta_b
    if eta_a == 0.0 or eta_b == 0.0:
        return math.inf
    return (math.sqrt(eta_a) + math.sqrt(eta_b)) / (2.0 * math.sqrt(n_photons * eta_a * eta_b))


def noon_precision(n_photons: int, loss: LossModel) -> tuple[float, float]:
    """Precision of the best unbalanced N00N state and its weight x_0 on |0, N>.

    Returns:
        (delta_phi, x0); delta_phi is infinite when an arm is fully lossy
    """
    _check_photons(n_photons)
    root_a = loss.eta_a ** (n_photons / 2.0)
    root_b = loss.eta_b ** (n_photons / 2.0)
    x0 = root_a / (root_a + root_b) if root_a + root_b > 0.0 else 0.5
    if root_a == 0.0 or root_b == 0.0:
        return math.inf, x0
    return (root_a + root_b) / (2.0 * n_photons * root_a * root_b), x0


@lru_cache
def chop_constants() -> tuple[float, float]:
    """eta_0, the root of 1 + sqrt(eta) + ln(eta) = 0, and |ln eta_0|.

    Below eta_0 single photons beat every N00N chunk; in the chopped regime
    the optimal chunk size is |ln eta_0| / |ln eta|.
    """
    eta0 = float(brentq(lambda eta: 1.0 + math.sqrt(eta) + math.log(eta), 1e-9, 1.0, xtol=1e-15))
    return eta0, -math.log(eta0)


def chop_one_arm(n_photons: int, eta: float) -> StrategyPrecision:
    """N/n repetitions of the best n-photon N00N state, losses in arm a only."""
    _check_photons(n_photons)
    _check_eta(eta)
    eta0, constant = chop_constants()
    if eta <= eta0:
        delta = (1.0 + math.sqrt(eta)) / (2.0 * math.sqrt(n_photons * eta))
        regime, size = "single_photon", 1.0
    elif eta <= eta0 ** (1.0 / n_photons):
        delta = (
            (1.0 + math.sqrt(eta0))
            / (2.0 * math.sqrt(n_photons * eta0))
            * math.sqrt(math.log(eta) / math.log(eta0))
        )
        regime, size = "chopped", constant / abs(math.log(eta))
    else:
        half = eta ** (n_photons / 2.0)
        delta = (1.0 + half) / (2.0 * n_photons * half)
        regime, size = "noon", float(n_photons)
    return StrategyPrecision(
        name=StrategyName.CHOP_ONE_ARM,
        n_photons=n_photons,
        delta_phi=delta,
        metric=Metric.ONE_ARM_CLOSED_FORM,
        regime=regime,
        optimal_n=size,
    )


def chop_two_arm(n_photons: int, eta: float) -> StrategyPrecision:
    """N00N chopping with equal losses eta in both arms."""
    _check_photons(n_photons)
    _check_eta(eta)
    if eta <= math.exp(-1.0):
        delta = 1.0 / math.sqrt(n_photons * eta)
        regime, size = "single_photon", 1.0
    elif eta <= math.exp(-1.0 / n_photons):
        delta = math.sqrt(math.e * abs(math.log(eta)) / n_photons)
        regime, size = "chopped", 1.0 / abs(math.log(eta))
    else:
        delta = 1.0 / (n_photons * eta ** (n_photons / 2.0))
        regime, size = "noon", float(n_photons)
    return StrategyPrecision(
        name=StrategyName.CHOP_TWO_ARM,
        n_photons=n_photons,
        delta_phi=delta,
        metric=Metric.EXACT,
        regime=regime,
        optimal_n=size,
    )


def sine_state(n_photons: int) -> ProbeState:
    """x_k proportional to sin^2(pi (k+1) / (N+2)); the weights sum to one."""
    _check_photons(n_photons)
    ks = np.arange(n_photons + 1)
    weights = np.sin(np.pi * (ks + 1) / (n_photons + 2)) ** 2
    return ProbeState.from_weights(weights / weights.sum())

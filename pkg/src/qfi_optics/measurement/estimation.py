"""Monte Carlo maximum-likelihood phase estimation with the optimal measurement."""

import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize_scalar

from qfi_optics.config import get_settings
from qfi_optics.core.fock import LossModel, ProbeState
from qfi_optics.errors import CertificationError, InputError
from qfi_optics.measurement.povm import (
    PovmElement,
    classical_fisher,
    optimal_povm,
    outcome_probabilities,
)

logger = logging.getLogger(__name__)

GRID_POINTS = 2001
DEGENERATE_FISHER = 1e-12


class EstimationRun(BaseModel):
    """Statistics of ``trials`` independent estimates from ``repetitions`` shots each."""

    model_config = ConfigDict(frozen=True)

    true_phase: float
    anchor_phase: float
    repetitions: int = Field(ge=1)
    trials: int = Field(ge=1)
    estimate: float
    sample_variance: float = Field(ge=0.0)
    fisher: float = Field(ge=0.0)
    expected_variance: float = Field(gt=0.0)
    failures: int = Field(default=0, ge=0)
    degenerate: bool = False
    seed: int

    @property
    def variance_ratio(self) -> float:
        """Sample variance over the Cramer-Rao value 1/(nu F); tends to one."""
        return self.sample_variance / self.expected_variance

    def within_band(self, low: float = 0.7, high: float = 1.4) -> bool:
        return not self.degenerate and low <= self.variance_ratio <= high


def likelihood_bracket(state: ProbeState) -> float:
    """Half width of the phase window searched around the anchor.

    p(phi) has period 2 pi / dk, dk the spread of the occupied k. A quarter
    period on either side keeps aliases of the true phase out of the window.
    """
    support = state.support
    spread = int(support.max() - support.min()) if support.size else 0
    return min(math.pi / 2.0, math.pi / (2.0 * spread)) if spread else math.pi / 2.0


def simulate_ml(
    state: ProbeState,
    loss: LossModel,
    povm: Sequence[PovmElement] | None = None,
    true_phase: float = 0.0,
    repetitions: int = 10_000,
    trials: int = 200,
    seed: int | None = None,
    anchor_phase: float | None = None,
) -> EstimationRun:
    """Sample outcomes at ``true_phase`` and maximize the likelihood per trial.

    Args:
        state: Input probe
        loss: Transmissivities of both arms
        povm: Measurement; defaults to the optimal POVM at the anchor phase
        true_phase: Phase used to draw the outcomes
        repetitions: Shots nu per trial
        trials: Number of independent estimates
        seed: Base seed; trial t draws from default_rng([seed, t])
        anchor_phase: Known phase phi0 the window is centred on (default: true phase)

    Returns:
        Mean and sample variance of the estimates next to 1/(nu F)
    """
    if repetitions < 1 or trials < 1:
        raise InputError("repetitions and trials must be at least 1")
    seed = get_settings().seed if seed is None else seed
    anchor = true_phase if anchor_phase is None else anchor_phase
    elements = list(povm) if povm is not None else optimal_povm(state, loss, anchor)

    fisher = classical_fisher(elements, state, loss, true_phase)
    if fisher <= DEGENERATE_FISHER:
        logger.warning(f"Outcome distribution does not depend on the phase (F={fisher:.3e})")
        return EstimationRun(
            true_phase=true_phase,
            anchor_phase=anchor,
            repetitions=repetitions,
            trials=trials,
            estimate=anchor,
            sample_variance=0.0,
            fisher=max(fisher, 0.0),
            expected_variance=math.inf,
            degenerate=True,
            seed=seed,
        )

    half_width = likelihood_bracket(state)
    grid = anchor + np.linspace(-half_width, half_width, GRID_POINTS)
    with np.errstate(divide="ignore"):
        log_grid = np.log(outcome_probabilities(elements, state, loss, grid))
    probabilities = outcome_probabilities(elements, state, loss, true_phase)[0]
    probabilities = probabilities / probabilities.sum()

    def log_likelihood(
        phase: float, counts: npt.NDArray[np.int64], seen: npt.NDArray[np.int64]
    ) -> float:
        p = outcome_probabilities(elements, state, loss, phase)[0, seen]
        with np.errstate(divide="ignore"):
            return float(np.log(p) @ counts[seen])

    estimates = []
    failures = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        counts = rng.multinomial(repetitions, probabilities)
        seen = np.flatnonzero(counts)
        scores = log_grid[:, seen] @ counts[seen]
        best = int(np.argmax(scores))
        if best in (0, GRID_POINTS - 1) or not np.isfinite(scores[best]):
            failures += 1
            logger.debug(f"Trial {trial}: likelihood maximum on the bracket edge")
            continue
        found = minimize_scalar(
            lambda phase, counts=counts, seen=seen: -log_likelihood(phase, counts, seen),
            bounds=(grid[best - 1], grid[best + 1]),
            method="bounded",
            options={"xatol": 1e-8},
        )
        estimates.append(float(found.x))

    if len(estimates) < 2:
        raise CertificationError(f"likelihood maximization failed in {failures} of {trials} trials")
    if failures:
        logger.warning(f"{failures} of {trials} trials hit the likelihood bracket edge")

    values = np.asarray(estimates)
    run = EstimationRun(
        true_phase=true_phase,
        anchor_phase=anchor,
        repetitions=repetitions,
        trials=trials,
        estimate=float(values.mean()),
        sample_variance=float(values.var(ddof=1)),
        fisher=fisher,
        expected_variance=1.0 / (repetitions * fisher),
        failures=failures,
        seed=seed,
    )
    logger.info(
        f"ML simulation N={state.n_photons}, nu={repetitions}: variance ratio "
        f"{run.variance_ratio:.3f} over {len(estimates)} trials"
    )
    return run

"""Transmissivity below which the unbalanced N00N state stops being optimal."""

import logging
import math
from collections.abc import Sequence
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq, curve_fit

from qfi_optics.core.fock import FloatArray, LossMode, LossModel
from qfi_optics.errors import CertificationError, InputError

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12
SCAN_POINTS = 4000


class ThresholdMethod(StrEnum):
    POLYNOMIAL_ROOT = "polynomial_root"
    PERTURBATION_SCAN = "perturbation_scan"


class ThresholdResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_photons: int = Field(ge=2)
    eta_bar: float = Field(gt=0.0, lt=1.0)
    method: ThresholdMethod
    fit_a: float | None = None


class ThresholdFit(BaseModel):
    """Least-squares fit of eta_bar(N) = a^(-1/N)."""

    model_config = ConfigDict(frozen=True)

    mode: LossMode
    a: float
    a_stderr: float
    n_values: tuple[int, ...]
    eta_bars: tuple[float, ...]


def threshold_polynomial(n_photons: int, eta: float | FloatArray) -> float | FloatArray:
    """Sign of dF/dx_1 at the optimal N00N state for one-arm losses, up to a positive factor.

    The polynomial is (N-1)^2 at eta = 0 and 4 - 4N at eta = 1.
    """
    n = n_photons
    eta = np.asarray(eta, dtype=np.float64)
    half = np.power(eta, n / 2.0)
    value = (
        (1 - 2 * n) * np.power(eta, n)
        - 2 * n * (n - 1) * half * eta
        + 2 * (n - 1) ** 2 * half
        - n * (n - 2) * eta
        + (n - 1) ** 2
    )
    return float(value) if value.ndim == 0 else value


def noon_perturbation_gain(n_photons: int, loss: LossModel, k: int | Sequence[int]) -> FloatArray:
    """dF~/dx_k - F~ at the optimal unbalanced N00N state.

    A positive value means that moving weight into component k raises the
    bound, so the N00N state is not optimal. The one-sided derivative is
    evaluated in closed form: branches losing photons from both arms carry no
    information and cancel.
    """
    n = n_photons
    eta_a, eta_b = loss.eta_a, loss.eta_b
    if eta_a <= 0.0 or eta_b <= 0.0:
        raise InputError("the N00N state carries no information at zero transmissivity")
    ks = np.atleast_1d(np.asarray(k, dtype=np.float64))
    if np.any(ks < 0) or np.any(ks > n):
        raise InputError(f"components must lie in [0, {n}]")

    root_a, root_b = eta_a ** (n / 2.0), eta_b ** (n / 2.0)
    fisher = 4.0 * n**2 * (root_a * root_b) ** 2 / (root_a + root_b) ** 2
    mean_unlost = n * root_a / (root_a + root_b)

    kept_a = np.power(eta_a, ks)
    kept_b = np.power(eta_b, n - ks)
    gradient = 4.0 * (
        kept_a * kept_b * (ks - mean_unlost) ** 2
        + kept_a * (1.0 - kept_b) * ks**2
        + kept_b * (1.0 - kept_a) * (ks - n) ** 2
    )
    result: FloatArray = gradient - fisher
    return result


def threshold_one_arm(n_photons: int) -> ThresholdResult:
    """Root in (0, 1) of the one-arm threshold polynomial."""
    if n_photons < 2:
        raise InputError(f"thresholds need N >= 2, got {n_photons}")
    try:
        root = brentq(
            lambda eta: threshold_polynomial(n_photons, eta), 0.0, 1.0, xtol=ROOT_TOLERANCE
        )
    except ValueError as e:
        raise CertificationError(f"threshold polynomial for N={n_photons} not bracketed") from e
    eta_bar = float(root)
    logger.debug(f"One-arm threshold N={n_photons}: {eta_bar:.10f}")
    return ThresholdResult(
        n_photons=n_photons,
        eta_bar=eta_bar,
        method=ThresholdMethod.POLYNOMIAL_ROOT,
        fit_a=eta_bar ** (-n_photons),
    )


def _best_gain(n_photons: int, eta: float) -> float:
    middle = np.arange(1, n_photons)
    gains = noon_perturbation_gain(n_photons, LossModel.balanced(eta), middle)
    return float(gains.max())


def threshold_two_arm(n_photons: int) -> ThresholdResult:
    """Largest equal-loss transmissivity at which some middle component improves on N00N.

    The maximal perturbation gain over k = 1..N-1 is scanned downward from
    eta = 1 and the first sign change is refined by Brent's method.
    """
    if n_photons < 2:
        raise InputError(f"thresholds need N >= 2, got {n_photons}")
    grid = np.linspace(1.0, 0.0, SCAN_POINTS + 1)[1:-1]
    upper = 1.0
    for eta in grid:
        if _best_gain(n_photons, float(eta)) > 0.0:
            lower = float(eta)
            break
        upper = float(eta)
    else:
        raise CertificationError(f"no sign change of the N00N perturbation gain for N={n_photons}")

    root = brentq(lambda eta: _best_gain(n_photons, eta), lower, upper, xtol=ROOT_TOLERANCE)
    eta_bar = float(root)
    logger.debug(f"Two-arm threshold N={n_photons}: {eta_bar:.10f}")
    return ThresholdResult(
        n_photons=n_photons,
        eta_bar=eta_bar,
        method=ThresholdMethod.PERTURBATION_SCAN,
        fit_a=eta_bar ** (-n_photons),
    )


def threshold(n_photons: int, mode: LossMode) -> ThresholdResult:
    if mode is LossMode.ONE_ARM:
        return threshold_one_arm(n_photons)
    return threshold_two_arm(n_photons)


def fit_threshold_exponent(mode: LossMode, n_values: Sequence[int]) -> ThresholdFit:
    """Fit eta_bar = a^(-1/N) to the thresholds at ``n_values``."""
    ns = np.asarray(list(n_values), dtype=np.float64)
    if ns.size < 2:
        raise InputError("a fit needs at least two photon numbers")
    etas = np.array([threshold(int(n), mode).eta_bar for n in ns])
    start = float(np.median(etas ** (-ns)))
    popt, pcov = curve_fit(lambda n, a: a ** (-1.0 / n), ns, etas, p0=[start])
    a = float(popt[0])
    stderr = float(math.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else math.inf
    logger.info(f"Threshold fit ({mode.value}, N={int(ns[0])}..{int(ns[-1])}): a = {a:.4f}")
    return ThresholdFit(
        mode=mode,
        a=a,
        a_stderr=stderr,
        n_values=tuple(int(n) for n in ns),
        eta_bars=tuple(float(e) for e in etas),
    )

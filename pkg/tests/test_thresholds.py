"""Tests for the N00N breakdown thresholds."""

import numpy as np
import pytest
from scipy.optimize import brentq

from qfi_optics.core import LossMode, LossModel, Metric
from qfi_optics.errors import InputError
from qfi_optics.optimize import (
    ThresholdMethod,
    fit_threshold_exponent,
    maximize_qfi,
    noon_perturbation_gain,
    threshold,
    threshold_one_arm,
    threshold_polynomial,
    threshold_two_arm,
)


@pytest.mark.parametrize("n", [2, 5, 10, 40])
def test_polynomial_endpoints(n: int) -> None:
    """The polynomial is (N-1)^2 at eta = 0 and 4 - 4N at eta = 1."""
    assert threshold_polynomial(n, 0.0) == pytest.approx((n - 1) ** 2)
    assert threshold_polynomial(n, 1.0) == pytest.approx(4 - 4 * n)


def test_one_arm_threshold_n10() -> None:
    """For ten photons the N00N state stops being optimal near eta = 0.91."""
    result = threshold_one_arm(10)
    assert result.method is ThresholdMethod.POLYNOMIAL_ROOT
    assert result.eta_bar == pytest.approx(0.91, abs=0.005)
    assert result.fit_a == pytest.approx(result.eta_bar**-10)


def test_two_arm_threshold_n10() -> None:
    """With equal losses the ten-photon threshold is near eta = 0.92."""
    result = threshold_two_arm(10)
    assert result.method is ThresholdMethod.PERTURBATION_SCAN
    assert result.eta_bar == pytest.approx(0.92, abs=0.005)


def test_two_arm_threshold_n2_closed_form() -> None:
    """For two photons the middle component starts to help at eta = 2/3."""
    assert threshold_two_arm(2).eta_bar == pytest.approx(2.0 / 3.0, abs=1e-8)


def test_polynomial_root_matches_perturbation_gain() -> None:
    """The polynomial and the x_1 perturbation gain change sign together."""
    n = 5
    root = threshold_one_arm(n).eta_bar

    def gain(eta: float) -> float:
        return float(noon_perturbation_gain(n, LossModel.one_arm(eta), 1)[0])

    assert brentq(gain, 0.05, 0.999, xtol=1e-14) == pytest.approx(root, abs=1e-6)
    for eta in np.linspace(0.05, 0.99, 60):
        if abs(eta - root) < 1e-3:
            continue
        assert np.sign(gain(eta)) == np.sign(threshold_polynomial(n, eta))


def test_gain_lossless_is_negative() -> None:
    """Without loss every middle component lowers the Fisher information."""
    gains = noon_perturbation_gain(6, LossModel.lossless(), range(1, 6))
    assert np.all(gains < 0.0)


def test_gain_needs_transmission() -> None:
    """The N00N state carries nothing at zero transmissivity."""
    with pytest.raises(InputError):
        noon_perturbation_gain(4, LossModel.one_arm(0.0), 1)


def test_thresholds_need_two_photons() -> None:
    """A single photon has no middle components."""
    with pytest.raises(InputError):
        threshold(1, LossMode.ONE_ARM)
    with pytest.raises(InputError):
        threshold(1, LossMode.TWO_ARM)


def test_two_arm_threshold_matches_optimizer_support() -> None:
    """The optimizer's support changes from N00N to more components across the threshold."""
    n = 4
    eta_bar = threshold_two_arm(n).eta_bar
    above = maximize_qfi(n, LossModel.balanced(min(eta_bar + 0.03, 0.999)), Metric.BOUND)
    below = maximize_qfi(n, LossModel.balanced(eta_bar - 0.05), Metric.BOUND)
    assert above.state.support.tolist() == [0, n]
    assert below.state.support.size > 2


def test_one_arm_exponent_fit() -> None:
    """eta_bar = a^(-1/N) with a close to 2.61 for one-arm losses."""
    fit = fit_threshold_exponent(LossMode.ONE_ARM, range(5, 101))
    assert fit.a == pytest.approx(2.61, abs=0.05)
    assert fit.n_values[0] == 5 and fit.n_values[-1] == 100


def test_two_arm_exponent_fit() -> None:
    """eta_bar = a^(-1/N) with a close to 2.24 for equal losses."""
    fit = fit_threshold_exponent(LossMode.TWO_ARM, range(2, 101))
    assert fit.a == pytest.approx(2.24, abs=0.05)
    assert fit.mode is LossMode.TWO_ARM


def test_fit_needs_two_points() -> None:
    """One photon number does not determine a fit."""
    with pytest.raises(InputError):
        fit_threshold_exponent(LossMode.ONE_ARM, [10])

"""Tests for the simplex maximizer and its certificate."""

import itertools

import numpy as np
import pytest

from qfi_optics.core import (
    BoundObjective,
    LossModel,
    Metric,
    ProbeState,
    noon_state,
    qfi_bound_many,
    qfi_one_arm,
)
from qfi_optics.errors import CertificationError, InputError
from qfi_optics.optimize import (
    OptimizerOptions,
    certify_optimum,
    kkt_residual,
    maximize_qfi,
    maximize_two_component,
    project_to_simplex,
)
from qfi_optics.optimize.simplex import _SimplexAscent


def test_projection_examples() -> None:
    """Known projections onto the simplex."""
    np.testing.assert_allclose(project_to_simplex(np.array([0.5, 0.5, 0.5])), [1 / 3] * 3)
    np.testing.assert_allclose(project_to_simplex(np.array([2.0, 0.0])), [1.0, 0.0])
    np.testing.assert_allclose(project_to_simplex(np.array([0.3, 0.7])), [0.3, 0.7])


def test_projection_lands_on_simplex(rng: np.random.Generator) -> None:
    """Projected points are nonnegative, sum to one and are fixed points."""
    for _ in range(20):
        x = project_to_simplex(rng.normal(size=7) * 3.0)
        assert x.min() >= 0.0
        assert x.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(project_to_simplex(x), x, atol=1e-15)


@pytest.mark.parametrize("n", [2, 5, 10])
def test_lossless_optimum_is_balanced_noon(n: int) -> None:
    """Without loss the optimum is the balanced N00N state with F = N^2."""
    result = maximize_qfi(n, LossModel.lossless(), Metric.BOUND)
    assert result.converged
    assert result.objective == pytest.approx(n**2, rel=1e-9)
    expected = np.zeros(n + 1)
    expected[[0, n]] = 0.5
    np.testing.assert_allclose(result.state.x, expected, atol=1e-6)


def test_lossless_certificate_is_tight() -> None:
    """The closed-form optimum satisfies the KKT conditions exactly."""
    result = maximize_qfi(6, LossModel.lossless(), Metric.BOUND)
    assert certify_optimum(result) <= 1e-9


def test_above_threshold_optimum_is_noon() -> None:
    """At eta = 0.95 one-arm, above the threshold, the optimum is the unbalanced N00N."""
    eta, n = 0.95, 10
    result = maximize_qfi(n, LossModel.one_arm(eta), Metric.ONE_ARM_CLOSED_FORM)
    np.testing.assert_array_equal(result.state.support, [0, n])
    half = eta ** (n / 2)
    assert result.state.x[0] == pytest.approx(half / (1.0 + half), abs=1e-6)


def test_below_threshold_optimum_is_not_noon() -> None:
    """At eta = 0.8 one-arm the optimum uses more than the two N00N components."""
    result = maximize_qfi(10, LossModel.one_arm(0.8), Metric.ONE_ARM_CLOSED_FORM)
    assert certify_optimum(result) <= 1e-7
    assert result.state.support.tolist() != [0, 10]
    noon_value = qfi_one_arm(noon_state(10, 0.8**5 / (1.0 + 0.8**5)), 0.8)
    assert result.objective > noon_value


def _simplex_lattice(steps: int) -> np.ndarray:
    points = [
        (i, j, k, steps - i - j - k)
        for i, j, k in itertools.product(range(steps + 1), repeat=3)
        if i + j + k <= steps
    ]
    return np.asarray(points, dtype=np.float64) / steps


def _fine_patch(center: np.ndarray, spacing: float, radius: int) -> np.ndarray:
    """Lattice points of the given spacing within ``radius`` cells of ``center``."""
    base = np.round(center[:3] / spacing)
    offsets = np.arange(-radius, radius + 1)
    cells = np.asarray(list(itertools.product(offsets, repeat=3)), dtype=np.float64)
    head = (base + cells) * spacing
    points = np.column_stack([head, 1.0 - head.sum(axis=1)])
    return np.clip(points[np.all(points >= -1e-12, axis=1)], 0.0, None)


@pytest.mark.parametrize(
    "loss",
    [LossModel.one_arm(0.6), LossModel.balanced(0.7), LossModel(eta_a=0.5, eta_b=0.9)],
    ids=["one-arm", "balanced", "unbalanced"],
)
def test_optimum_beats_grid_search(loss: LossModel) -> None:
    """No point of a coarse simplex grid or a 0.002 grid near the optimum does better."""
    result = maximize_qfi(3, loss, Metric.BOUND)
    coarse = qfi_bound_many(_simplex_lattice(60), loss)
    fine = qfi_bound_many(_fine_patch(result.state.x, 0.002, 15), loss)
    best = max(coarse.max(), fine.max())
    assert best <= result.objective + 1e-4
    assert result.objective >= best - 1e-9
    assert result.objective - fine.max() <= 1e-3


@pytest.mark.parametrize(
    ("n", "loss"),
    [
        (6, LossModel(eta_a=0.8, eta_b=1.0)),
        (8, LossModel.balanced(0.7)),
        (10, LossModel(eta_a=0.6, eta_b=0.9)),
    ],
)
def test_random_restarts_agree(n: int, loss: LossModel, rng: np.random.Generator) -> None:
    """Ten random starting points reach the same certified objective."""
    objectives = []
    for _ in range(10):
        start = tuple(float(w) for w in rng.dirichlet(np.ones(n + 1)))
        result = maximize_qfi(n, loss, Metric.BOUND, OptimizerOptions(start=start))
        assert result.kkt_residual <= 1e-7
        objectives.append(result.objective)
    np.testing.assert_allclose(objectives, objectives[0], rtol=1e-7)


def test_ascent_never_decreases_objective(rng: np.random.Generator) -> None:
    """Accepted gradient-ascent iterates have non-decreasing objective values."""
    for n, loss in [(8, LossModel(eta_a=0.7, eta_b=0.8)), (5, LossModel.one_arm(0.5))]:
        ascent = _SimplexAscent(BoundObjective.for_loss(n, loss), OptimizerOptions())
        ascent.ascend(rng.dirichlet(np.ones(n + 1)), 400)
        values = np.asarray(ascent.values)
        assert values.size > 1
        assert np.all(np.diff(values) >= -1e-12 * np.abs(values[1:]))
        assert values[-1] > values[0]


def test_balanced_optimum_is_symmetric() -> None:
    """With equal losses the maximizer satisfies x_k = x_(N-k)."""
    result = maximize_qfi(3, LossModel.balanced(0.6), Metric.BOUND)
    np.testing.assert_allclose(result.state.x, result.state.x[::-1], atol=1e-6)
    certify_optimum(result)


def test_perturbed_point_fails_certification() -> None:
    """Moving away from the optimum breaks the KKT certificate."""
    result = maximize_qfi(10, LossModel.one_arm(0.8), Metric.ONE_ARM_CLOSED_FORM)
    blurred = 0.7 * result.state.x + 0.3 / 11
    state = ProbeState.from_weights(blurred / blurred.sum())
    perturbed = result.model_copy(update={"state": state})
    with pytest.raises(CertificationError):
        certify_optimum(perturbed)


def test_kkt_residual_at_noon() -> None:
    """The lossless N00N state is stationary."""
    x = noon_state(4).x
    k = np.arange(5.0)
    gradient = 4.0 * (k**2 - 2.0 * k * 2.0)
    assert kkt_residual(x, gradient, 16.0) == pytest.approx(0.0, abs=1e-12)


def test_exact_metric_is_not_an_objective() -> None:
    """Only the bound and the one-arm closed form are maximized."""
    with pytest.raises(InputError):
        maximize_qfi(3, LossModel.balanced(0.5), Metric.EXACT)


def test_one_arm_metric_needs_one_arm_loss() -> None:
    """The closed form is undefined with losses in arm b."""
    with pytest.raises(InputError):
        maximize_qfi(3, LossModel.balanced(0.5), Metric.ONE_ARM_CLOSED_FORM)


def test_start_point_length_is_checked() -> None:
    """A start point must have N+1 weights."""
    with pytest.raises(InputError):
        maximize_qfi(3, LossModel.lossless(), options=OptimizerOptions(start=(0.5, 0.5)))


def test_two_component_between_noon_and_optimum() -> None:
    """Two components beat the N00N state but not the full optimum."""
    n, eta = 10, 0.7
    two = maximize_two_component(n, eta)
    full = maximize_qfi(n, LossModel.one_arm(eta), Metric.ONE_ARM_CLOSED_FORM)
    half = eta ** (n / 2)
    noon_value = qfi_one_arm(noon_state(n, half / (1.0 + half)), eta)
    assert two.state.support.size <= 2
    assert noon_value - 1e-9 <= two.objective <= full.objective + 1e-9

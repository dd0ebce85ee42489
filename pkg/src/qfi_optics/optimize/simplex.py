"""Certified maximization of the concave Fisher-information bound on the simplex."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import null_space
from scipy.optimize import minimize_scalar

from qfi_optics.config import get_settings
from qfi_optics.core.fisher import BoundObjective, Metric
from qfi_optics.core.fock import FloatArray, LossModel, ProbeState
from qfi_optics.errors import CertificationError, InputError

logger = logging.getLogger(__name__)

CURVATURE_TOLERANCE = 1e-8


class OptimizerOptions(BaseModel):
    """Tuning knobs of :func:`maximize_qfi`; ``None`` fields fall back to settings."""

    model_config = ConfigDict(frozen=True)

    tolerance: float | None = Field(default=None, gt=0.0)
    max_iterations: int | None = Field(default=None, ge=1)
    support_threshold: float = Field(default=1e-9, ge=0.0)
    armijo: float = Field(default=1e-4, gt=0.0, lt=1.0)
    shrink: float = Field(default=0.5, gt=0.0, lt=1.0)
    polish_rounds: int = Field(default=60, ge=0)
    start: tuple[float, ...] | None = None
    symmetrize: bool = True

    def resolved_tolerance(self) -> float:
        return self.tolerance if self.tolerance is not None else get_settings().kkt_tolerance

    def resolved_max_iterations(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return get_settings().max_iterations


class OptimizationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: ProbeState
    objective: float
    kkt_residual: float = Field(ge=0.0)
    iterations: int = Field(ge=0)
    converged: bool
    metric: Metric = Metric.BOUND
    loss: LossModel


def project_to_simplex(v: FloatArray) -> FloatArray:
    """Euclidean projection of ``v`` onto {x >= 0, sum x = 1} by sorting."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    ranks = np.arange(1, v.size + 1)
    rho = int(np.flatnonzero(u - cumulative / ranks > 0.0)[-1])
    theta = cumulative[rho] / (rho + 1)
    result: FloatArray = np.maximum(v - theta, 0.0)
    return result


def kkt_residual(x: FloatArray, gradient: FloatArray, objective: float) -> float:
    """Stationarity violation of a maximizer of a function on the simplex.

    With lambda = g . x the conditions are g_i = lambda on the support and
    g_i <= lambda elsewhere. The largest violation is divided by max(1, |F|).
    """
    support = x > 0.0
    lam = float(gradient @ x)
    on_support = np.abs(gradient[support] - lam)
    off_support = np.maximum(gradient[~support] - lam, 0.0)
    worst = max(
        float(on_support.max(initial=0.0)),
        float(off_support.max(initial=0.0)),
    )
    return worst / max(1.0, abs(objective))


def _objective_for(n_photons: int, loss: LossModel, metric: Metric) -> BoundObjective:
    if metric is Metric.ONE_ARM_CLOSED_FORM:
        if not loss.is_one_arm:
            raise InputError("the one-arm closed form requires eta_b = 1")
        return BoundObjective.one_arm(n_photons, loss.eta_a)
    if metric is Metric.BOUND:
        return BoundObjective.for_loss(n_photons, loss)
    raise InputError(f"metric {metric.value!r} is not a concave objective")


def _clean(x: FloatArray, threshold: float) -> FloatArray:
    x = np.where(x < threshold, 0.0, x)
    return x / x.sum()


class _SimplexAscent:
    """Projected gradient ascent followed by an active-face Newton polish.

    ``values`` records the objective at every accepted gradient-ascent iterate.
    """

    def __init__(self, objective: BoundObjective, options: OptimizerOptions) -> None:
        self.objective = objective
        self.options = options
        self.tolerance = options.resolved_tolerance()
        self.max_iterations = options.resolved_max_iterations()
        self.iterations = 0
        self.values: list[float] = []

    def residual(self, x: FloatArray) -> float:
        gradient = self.objective.gradient(x, one_sided=True)
        return kkt_residual(x, gradient, self.objective.value(x))

    def ascend(self, x: FloatArray, budget: int) -> FloatArray:
        objective = self.objective
        value = objective.value(x)
        step = 1.0 / max(1.0, float(objective.n_photons) ** 2)
        self.values.append(value)
        for _ in range(budget):
            self.iterations += 1
            gradient = objective.gradient(x, one_sided=True)
            if kkt_residual(x, gradient, value) <= self.tolerance:
                break
            while True:
                candidate = project_to_simplex(x + step * gradient)
                candidate_value = objective.value(candidate)
                ascent = float(gradient @ (candidate - x))
                if candidate_value >= value + self.options.armijo * ascent:
                    break
                step *= self.options.shrink
                if step < 1e-18:
                    return x
            improvement = candidate_value - value
            x, value = candidate, candidate_value
            self.values.append(value)
            step *= 2.0
            if improvement <= 1e-15 * max(1.0, abs(value)):
                break
        return x

    def newton_face(self, x: FloatArray) -> FloatArray:
        """Newton steps on the face spanned by the current support."""
        objective = self.objective
        for _ in range(25):
            support = np.flatnonzero(x > 0.0)
            if support.size < 2:
                return x
            self.iterations += 1
            gradient = objective.gradient(x, one_sided=True)
            g = gradient[support]
            if np.max(np.abs(g - g @ x[support])) <= 1e-3 * self.tolerance * max(
                1.0, abs(objective.value(x))
            ):
                return x
            hessian = objective.hessian(x, support)
            size = support.size
            system = np.zeros((size + 1, size + 1))
            system[:size, :size] = hessian
            system[:size, size] = 1.0
            system[size, :size] = 1.0
            rhs = np.concatenate([-g, [0.0]])
            direction = np.linalg.lstsq(system, rhs, rcond=None)[0][:size]
            if not np.all(np.isfinite(direction)) or not np.any(direction):
                return x
            shrinking = direction < 0.0
            limit = 1.0
            if np.any(shrinking):
                limit = min(1.0, float(np.min(-x[support][shrinking] / direction[shrinking])))
            value = objective.value(x)
            t = limit
            while t > 1e-12:
                candidate = x.copy()
                candidate[support] = np.maximum(x[support] + t * direction, 0.0)
                if t == limit and limit < 1.0:
                    blocking = support[shrinking][
                        np.argmin(-x[support][shrinking] / direction[shrinking])
                    ]
                    candidate[blocking] = 0.0
                candidate /= candidate.sum()
                if objective.value(candidate) >= value - 1e-15 * max(1.0, abs(value)):
                    break
                t *= 0.5
            else:
                return x
            x = candidate
        return x

    def add_violator(self, x: FloatArray) -> tuple[FloatArray, bool]:
        """Frank-Wolfe move towards the most violating off-support vertex."""
        objective = self.objective
        gradient = objective.gradient(x, one_sided=True)
        lam = float(gradient @ x)
        off = np.flatnonzero(x <= 0.0)
        if off.size == 0:
            return x, False
        k = int(off[np.argmax(gradient[off])])
        scale = max(1.0, abs(objective.value(x)))
        if gradient[k] - lam <= 1e-3 * self.tolerance * scale:
            return x, False
        vertex = np.zeros_like(x)
        vertex[k] = 1.0
        self.iterations += 1
        found = minimize_scalar(
            lambda t: -objective.value(x + t * (vertex - x)),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        t = float(found.x)
        if t <= 0.0:
            t = 1e-9
        return x + t * (vertex - x), True

    def run(self, start: FloatArray) -> FloatArray:
        threshold = self.options.support_threshold
        x = self.ascend(start, self.max_iterations)
        x = _clean(x, threshold)
        for _ in range(self.options.polish_rounds):
            if self.iterations >= self.max_iterations:
                break
            x = _clean(self.newton_face(x), threshold)
            if self.residual(x) <= self.tolerance:
                break
            x, moved = self.add_violator(x)
            if not moved:
                budget = min(1000, self.max_iterations - self.iterations)
                x = _clean(self.ascend(x, max(budget, 1)), threshold)
        return x


def maximize_qfi(
    n_photons: int,
    loss: LossModel,
    metric: Metric = Metric.BOUND,
    options: OptimizerOptions | None = None,
) -> OptimizationResult:
    """Maximize F~ (or the one-arm closed form) over input weights x.

    Args:
        n_photons: Photon number N >= 1
        loss: Transmissivities of both arms
        metric: ``Metric.BOUND`` or ``Metric.ONE_ARM_CLOSED_FORM``
        options: Optimizer settings; defaults start from uniform weights

    Returns:
        The maximizer with its KKT residual; ``converged`` is False when the
        residual tolerance was not reached within the iteration budget
    """
    if n_photons < 1:
        raise InputError(f"need at least one photon, got N={n_photons}")
    options = options or OptimizerOptions()
    objective = _objective_for(n_photons, loss, metric)
    if options.start is None:
        start = np.full(n_photons + 1, 1.0 / (n_photons + 1))
    else:
        if len(options.start) != n_photons + 1:
            raise InputError(f"start point needs {n_photons + 1} weights")
        start = project_to_simplex(np.asarray(options.start))

    ascent = _SimplexAscent(objective, options)
    x = ascent.run(start)
    if options.symmetrize and loss.is_balanced:
        x = _clean((x + x[::-1]) / 2.0, options.support_threshold)
        x = _clean(ascent.newton_face(x), options.support_threshold)

    value = objective.value(x)
    residual = ascent.residual(x)
    tolerance = ascent.tolerance
    converged = residual <= tolerance
    if converged:
        logger.debug(
            f"Optimum for N={n_photons}, eta=({loss.eta_a}, {loss.eta_b}): F={value:.12g}, "
            f"support={np.flatnonzero(x).tolist()}, {ascent.iterations} iterations"
        )
    else:
        logger.warning(
            f"No certified optimum for N={n_photons}, eta=({loss.eta_a}, {loss.eta_b}): "
            f"residual {residual:.3e} > {tolerance:.1e} after {ascent.iterations} iterations"
        )
    return OptimizationResult(
        state=ProbeState.from_weights(x),
        objective=value,
        kkt_residual=residual,
        iterations=ascent.iterations,
        converged=converged,
        metric=metric,
        loss=loss,
    )


def certify_optimum(
    result: OptimizationResult, loss: LossModel | None = None, tolerance: float | None = None
) -> float:
    """Recompute the KKT residual of ``result`` and check curvature on its face.

    Raises:
        CertificationError: residual above ten times the tolerance, or a
            projected Hessian with a positive eigenvalue
    """
    loss = loss or result.loss
    tolerance = tolerance if tolerance is not None else get_settings().kkt_tolerance
    objective = _objective_for(result.state.n_photons, loss, result.metric)
    x = result.state.x
    value = objective.value(x)
    residual = kkt_residual(x, objective.gradient(x, one_sided=True), value)
    if residual > 10.0 * tolerance:
        raise CertificationError(
            f"KKT residual {residual:.3e} exceeds {10.0 * tolerance:.1e} "
            f"for N={result.state.n_photons}"
        )

    support = np.flatnonzero(x > 0.0)
    if support.size > 1:
        basis = null_space(np.ones((1, support.size)))
        projected = basis.T @ objective.hessian(x, support) @ basis
        top = float(np.linalg.eigvalsh(projected).max())
        if top > CURVATURE_TOLERANCE * max(1.0, abs(value)):
            raise CertificationError(f"projected Hessian has eigenvalue {top:.3e} > 0")
    return residual


def maximize_two_component(n_photons: int, eta: float) -> OptimizationResult:
    """Best one-arm state of the form sqrt(x_k)|k, N-k> + sqrt(x_N)|N, 0>.

    The search runs over k = 0..N-1 and, for each k, over the weight x_N.
    """
    if n_photons < 1:
        raise InputError(f"need at least one photon, got N={n_photons}")
    loss = LossModel.one_arm(eta)
    objective = BoundObjective.one_arm(n_photons, eta)

    best_x: FloatArray | None = None
    best_value = -math.inf
    for k in range(n_photons):

        def weights(t: float, k: int = k) -> FloatArray:
            x = np.zeros(n_photons + 1)
            x[k] = 1.0 - t
            x[n_photons] = t
            return x

        found = minimize_scalar(
            lambda t, weights=weights: -objective.value(weights(t)),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        value = -float(found.fun)
        if value > best_value:
            best_value, best_x = value, weights(float(found.x))

    assert best_x is not None
    best_x = _clean(best_x, 1e-15)
    support = np.flatnonzero(best_x > 0.0)
    gradient = objective.gradient(best_x, one_sided=True)
    face_gradient = gradient[support]
    residual = float(np.ptp(face_gradient)) / max(1.0, abs(best_value))
    logger.debug(f"Two-component optimum N={n_photons}, eta={eta}: support={support.tolist()}")
    return OptimizationResult(
        state=ProbeState.from_weights(best_x),
        objective=objective.value(best_x),
        kkt_residual=residual,
        iterations=n_photons,
        converged=residual <= get_settings().kkt_tolerance,
        metric=Metric.ONE_ARM_CLOSED_FORM,
        loss=loss,
    )

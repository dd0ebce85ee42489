"""Quantum Fisher information of lossy two-mode probes.

Three quantities are computed here:

* the pure-state QFI ``4 Var(k)``;
* the closed-form bound F~ obtained by treating every loss event (l_a, l_b) as
  a distinguishable branch, with its analytic gradient and Hessian in the
  weights x (for one-arm losses the bound is the exact QFI);
* the exact QFI from the symmetric logarithmic derivative (SLD) of the output
  density matrix, which is block diagonal in the number of surviving photons.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qfi_optics.config import get_settings
from qfi_optics.core.fock import (
    ComplexArray,
    FloatArray,
    LossModel,
    ProbeState,
    arm_loss_matrix,
    check_photon_range,
    decompose_output,
    loss_tensor,
)
from qfi_optics.errors import BoundarySingularityError, InputError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
BOUND_ORDER_TOLERANCE = 1e-9


class Metric(StrEnum):
    """Which Fisher information a precision refers to."""

    EXACT = "exact"
    BOUND = "bound"
    ONE_ARM_CLOSED_FORM = "one_arm_closed_form"


class QfiReport(BaseModel):
    """Fisher information values for one (state, loss) pair."""

    model_config = ConfigDict(frozen=True)

    f_exact: float | None = Field(default=None, ge=0.0)
    f_bound: float | None = Field(default=None, ge=0.0)
    delta_phi_min: float = Field(gt=0.0)
    metric: Metric
    gap: float | None = None

    @model_validator(mode="after")
    def _check_ordering(self) -> "QfiReport":
        if self.f_exact is not None and self.f_bound is not None:
            if self.f_exact > self.f_bound + BOUND_ORDER_TOLERANCE:
                raise ValueError(
                    f"exact QFI {self.f_exact!r} exceeds the bound {self.f_bound!r}"
                )
        return self

    @property
    def fisher(self) -> float:
        """The Fisher information the reported precision is based on."""
        value = self.f_exact if self.metric is Metric.EXACT else self.f_bound
        return 0.0 if value is None else value


def precision_from_fisher(fisher: float) -> float:
    """delta phi = 1/sqrt(F), infinite when there is no information."""
    return 1.0 / math.sqrt(fisher) if fisher > 0.0 else math.inf


def qfi_pure(
    amplitudes: Sequence[complex] | ComplexArray, generator: Sequence[float] | FloatArray
) -> float:
    """QFI 4(<psi'|psi'> - |<psi'|psi>|^2) of a pure state with psi' = i K psi.

    Args:
        amplitudes: Normalized amplitudes in the eigenbasis of the generator
        generator: Eigenvalues of the phase generator (photon numbers k)

    Returns:
        Four times the variance of the generator
    """
    psi = np.asarray(amplitudes, dtype=np.complex128)
    k = np.asarray(generator, dtype=np.float64)
    if psi.shape != k.shape:
        raise InputError(f"amplitudes {psi.shape} and generator {k.shape} differ in shape")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InputError(f"amplitudes are not normalized (|psi|^2 = {norm!r})")
    prime = 1j * k * psi
    value = 4.0 * (float(np.vdot(prime, prime).real) - abs(np.vdot(psi, prime)) ** 2)
    return max(value, 0.0)


@dataclass(frozen=True)
class BoundObjective:
    """F~(x) = 4 (sum_k k^2 x_k - sum_j a_j^2 / b_j) for a fixed N and loss model.

    Column j of ``coefficients`` holds B^k_{l_a l_b} for one loss event, so that
    b = x @ C is the branch probability and a = (k x) @ C its first moment. The
    expression is homogeneous of degree one in x.
    """

    n_photons: int
    coefficients: FloatArray
    branches: tuple[tuple[int, int], ...]
    photons: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "photons", np.arange(self.n_photons + 1, dtype=np.float64))

    @classmethod
    def for_loss(cls, n_photons: int, loss: LossModel) -> "BoundObjective":
        check_photon_range(n_photons)
        tensor = loss_tensor(n_photons, loss)
        size = n_photons + 1
        labels = [(la, lb) for la in range(size) for lb in range(size)]
        flat = tensor.reshape(size, size * size)
        keep = np.flatnonzero(np.any(flat > 0.0, axis=0))
        return cls(n_photons, flat[:, keep], tuple(labels[j] for j in keep))

    @classmethod
    def one_arm(cls, n_photons: int, eta: float) -> "BoundObjective":
        """Objective of the closed-form one-arm QFI; branches are (l, 0)."""
        check_photon_range(n_photons)
        ks = np.arange(n_photons + 1)
        matrix = arm_loss_matrix(ks, eta, n_photons + 1)
        keep = np.flatnonzero(np.any(matrix > 0.0, axis=0))
        return cls(n_photons, matrix[:, keep], tuple((int(j), 0) for j in keep))

    def _moments(self, x: FloatArray) -> tuple[FloatArray, FloatArray]:
        return (x * self.photons) @ self.coefficients, x @ self.coefficients

    def value(self, x: FloatArray) -> float:
        a, b = self._moments(x)
        ratio = np.divide(a * a, b, out=np.zeros_like(b), where=b > 0.0)
        return float(4.0 * (x @ self.photons**2 - ratio.sum()))

    def values(self, weights: FloatArray) -> FloatArray:
        """Row-wise F~ for a matrix of weight vectors."""
        a = (weights * self.photons) @ self.coefficients
        b = weights @ self.coefficients
        ratio = np.divide(a * a, b, out=np.zeros_like(b), where=b > 0.0)
        result: FloatArray = 4.0 * (weights @ self.photons**2 - ratio.sum(axis=1))
        return result

    def gradient(self, x: FloatArray, one_sided: bool = False) -> FloatArray:
        """Partial derivatives dF~/dx_i.

        A branch with b_j = 0 but nonzero coefficients is a 0/0 term. By
        default that raises; with ``one_sided`` the limit along the coordinate
        direction e_i is used instead, where the ratio a_j^2/b_j tends to
        C_ij i^2.
        """
        a, b = self._moments(x)
        live = b > 0.0
        dead = ~live & np.any(self.coefficients > 0.0, axis=0)
        if np.any(dead) and not one_sided:
            raise BoundarySingularityError([int(j) for j in np.flatnonzero(dead)])
        r = np.divide(a, b, out=np.zeros_like(b), where=live)
        k = self.photons
        c_live = self.coefficients[:, live]
        r_live = r[live]
        subtracted = c_live * (2.0 * k[:, None] * r_live[None, :] - r_live[None, :] ** 2)
        grad = k**2 - subtracted.sum(axis=1)
        if np.any(dead):
            grad = grad - self.coefficients[:, dead].sum(axis=1) * k**2
        result: FloatArray = 4.0 * grad
        return result

    def hessian(self, x: FloatArray, indices: npt.NDArray[np.int64] | None = None) -> FloatArray:
        """Second derivatives -8 sum_j C_ij C_mj (i - r_j)(m - r_j) / b_j.

        ``indices`` restricts rows and columns to a face of the simplex; every
        branch touching those coordinates must have b_j > 0.
        """
        rows = np.arange(self.n_photons + 1) if indices is None else np.asarray(indices)
        a, b = self._moments(x)
        coeffs = self.coefficients[rows]
        live = b > 0.0
        dead = ~live & np.any(coeffs > 0.0, axis=0)
        if np.any(dead):
            raise BoundarySingularityError([int(j) for j in np.flatnonzero(dead)])
        r = a[live] / b[live]
        k = self.photons[rows]
        w = coeffs[:, live] * (k[:, None] - r[None, :]) / np.sqrt(b[live])[None, :]
        result: FloatArray = -8.0 * (w @ w.T)
        return result


def qfi_one_arm(state: ProbeState, eta: float) -> float:
    """Closed-form QFI for losses in arm a only (transmissivity ``eta``)."""
    if not 0.0 <= eta <= 1.0:
        raise InputError(f"transmissivity {eta!r} outside [0, 1]")
    objective = BoundObjective.one_arm(state.n_photons, eta)
    return max(objective.value(state.x), 0.0)


def qfi_bound(state: ProbeState, loss: LossModel) -> float:
    """Upper bound F~ on the QFI, exact when η_b = 1 and for N00N states."""
    return max(BoundObjective.for_loss(state.n_photons, loss).value(state.x), 0.0)


def qfi_bound_many(weights: FloatArray, loss: LossModel) -> FloatArray:
    """F~ for every row of ``weights`` (shape (M, N+1))."""
    matrix = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    objective = BoundObjective.for_loss(matrix.shape[1] - 1, loss)
    return np.maximum(objective.values(matrix), 0.0)


def qfi_bound_gradient(state: ProbeState, loss: LossModel) -> FloatArray:
    return BoundObjective.for_loss(state.n_photons, loss).gradient(state.x)


def qfi_bound_hessian(state: ProbeState, loss: LossModel) -> FloatArray:
    return BoundObjective.for_loss(state.n_photons, loss).hessian(state.x)


@dataclass(frozen=True)
class OutputBlock:
    """Output density matrix restricted to ``surviving`` photons.

    Basis index j is the photon number in arm a, j = 0..surviving.
    """

    surviving: int
    rho: ComplexArray
    branches: tuple[tuple[int, int], ...]

    @property
    def generator(self) -> FloatArray:
        return np.arange(self.surviving + 1, dtype=np.float64)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def derivative(self) -> ComplexArray:
        """d rho / d phi = i (J rho - rho J), J = diag(j)."""
        j = self.generator
        result: ComplexArray = 1j * (j[:, None] - j[None, :]) * self.rho
        return result


@dataclass(frozen=True)
class SldBlock:
    lost_total: int
    basis_dim: int
    rho_block: ComplexArray
    rho_prime_block: ComplexArray
    sld_block: ComplexArray
    fisher: float


def _accumulate_blocks(
    components: Iterable[tuple[float, ProbeState]], loss: LossModel, phase: float
) -> list[OutputBlock]:
    rhos: dict[int, ComplexArray] = {}
    labels: dict[int, list[tuple[int, int]]] = {}
    for weight, state in components:
        for branch in decompose_output(state, loss, phase):
            m = branch.surviving
            v = branch.amplitudes
            contribution = weight * branch.probability * np.outer(v, v.conj())
            if m in rhos:
                rhos[m] = rhos[m] + contribution
            else:
                rhos[m] = contribution
            labels.setdefault(m, []).append((branch.lost_a, branch.lost_b))
    return [
        OutputBlock(m, rhos[m], tuple(labels[m])) for m in sorted(rhos, reverse=True)
    ]


def output_blocks(state: ProbeState, loss: LossModel, phase: float = 0.0) -> list[OutputBlock]:
    """Block-diagonal output ordered by total loss l = N - surviving."""
    return _accumulate_blocks([(1.0, state)], loss, phase)


def symmetric_log_derivative(
    rho: ComplexArray, drho: ComplexArray, tolerance: float | None = None
) -> tuple[ComplexArray, float]:
    """SLD A with drho = (A rho + rho A)/2 and the QFI Tr[rho A^2].

    Matrix elements between eigenvectors with p_i + p_j <= tolerance * Tr(rho)
    are set to zero.
    """
    if tolerance is None:
        tolerance = get_settings().eigen_tolerance
    p, u = np.linalg.eigh(rho)
    p = np.clip(p, 0.0, None)
    cutoff = tolerance * max(float(p.sum()), 0.0)
    d = u.conj().T @ drho @ u
    denominator = p[:, None] + p[None, :]
    mask = denominator > cutoff
    a_eig = np.zeros_like(d)
    a_eig[mask] = 2.0 * d[mask] / denominator[mask]
    fisher = float(np.sum(p[:, None] * np.abs(a_eig) ** 2))
    sld: ComplexArray = u @ a_eig @ u.conj().T
    return sld, max(fisher, 0.0)


def density_qfi(rho: ComplexArray, drho: ComplexArray, tolerance: float | None = None) -> float:
    """QFI of an arbitrary density matrix given its phase derivative."""
    return symmetric_log_derivative(rho, drho, tolerance)[1]


def sld_blocks(state: ProbeState, loss: LossModel, phase: float = 0.0) -> list[SldBlock]:
    result = []
    for block in output_blocks(state, loss, phase):
        drho = block.derivative()
        sld, fisher = symmetric_log_derivative(block.rho, drho)
        result.append(
            SldBlock(
                lost_total=state.n_photons - block.surviving,
                basis_dim=block.surviving + 1,
                rho_block=block.rho,
                rho_prime_block=drho,
                sld_block=sld,
                fisher=fisher,
            )
        )
    return result


def qfi_exact(state: ProbeState, loss: LossModel, phase: float = 0.0) -> QfiReport:
    """Exact QFI from the SLD of every surviving-photon block, with the bound alongside."""
    blocks = sld_blocks(state, loss, phase)
    f_exact = math.fsum(block.fisher for block in blocks)
    f_bound = qfi_bound(state, loss)
    logger.debug(
        f"Exact QFI N={state.n_photons} over {len(blocks)} blocks: {f_exact:.12g} "
        f"(bound {f_bound:.12g})"
    )
    return QfiReport(
        f_exact=f_exact,
        f_bound=f_bound,
        delta_phi_min=precision_from_fisher(f_exact),
        metric=Metric.EXACT,
        gap=f_bound - f_exact,
    )


def qfi_mixture(
    components: Sequence[tuple[float, ProbeState]], loss: LossModel, phase: float = 0.0
) -> float:
    """Exact QFI of a mixture of states with different photon numbers.

    Args:
        components: Pairs (beta^2, state); the weights must sum to one

    Returns:
        The QFI of the block-diagonal mixed output
    """
    total = math.fsum(weight for weight, _ in components)
    if any(weight < 0.0 for weight, _ in components) or abs(total - 1.0) > 1e-12:
        raise InputError(f"mixture weights must be nonnegative and sum to 1, got {total!r}")
    blocks = _accumulate_blocks(components, loss, phase)
    return math.fsum(density_qfi(block.rho, block.derivative()) for block in blocks)


def qfi_report(
    state: ProbeState,
    loss: LossModel,
    metric: Metric = Metric.EXACT,
    phase: float = 0.0,
) -> QfiReport:
    """Evaluate ``state`` under ``loss`` and report precision for ``metric``."""
    if metric is Metric.ONE_ARM_CLOSED_FORM:
        if not loss.is_one_arm:
            raise InputError("the one-arm closed form requires eta_b = 1")
        value = qfi_one_arm(state, loss.eta_a)
        return QfiReport(
            f_exact=value,
            f_bound=value,
            delta_phi_min=precision_from_fisher(value),
            metric=metric,
            gap=0.0,
        )
    exact = qfi_exact(state, loss, phase)
    if metric is Metric.EXACT:
        return exact
    assert exact.f_bound is not None
    return exact.model_copy(
        update={"metric": Metric.BOUND, "delta_phi_min": precision_from_fisher(exact.f_bound)}
    )

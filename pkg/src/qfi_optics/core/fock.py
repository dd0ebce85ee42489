"""N-photon two-mode probe states, the beam-splitter loss model and the lossy output."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import comb

from qfi_optics.errors import DimensionError, IndexRangeError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Binomials are evaluated in floating point; beyond this the products of
# binomials and powers of eta start to lose relative accuracy.
MAX_PHOTONS = 120
# The full two-mode density matrix has (N+1)^2 rows.
MAX_FULL_SPACE_PHOTONS = 20
WEIGHT_TOLERANCE = 1e-12


class LossModel(BaseModel):
    """Power transmissivities of the fictitious beam splitters in arms a and b."""

    model_config = ConfigDict(frozen=True)

    eta_a: float = Field(ge=0.0, le=1.0)
    eta_b: float = Field(ge=0.0, le=1.0)

    @classmethod
    def lossless(cls) -> "LossModel":
        return cls(eta_a=1.0, eta_b=1.0)

    @classmethod
    def one_arm(cls, eta: float) -> "LossModel":
        """Losses only in the phase-carrying arm a."""
        return cls(eta_a=eta, eta_b=1.0)

    @classmethod
    def balanced(cls, eta: float) -> "LossModel":
        """Equal losses in both arms."""
        return cls(eta_a=eta, eta_b=eta)

    @property
    def is_one_arm(self) -> bool:
        return self.eta_b == 1.0

    @property
    def is_balanced(self) -> bool:
        return self.eta_a == self.eta_b


class LossMode(StrEnum):
    """Loss geometry of a sweep or threshold: lossy arm a only, or equal losses."""

    ONE_ARM = "one-arm"
    TWO_ARM = "two-arm"

    def model(self, eta: float) -> LossModel:
        if self is LossMode.ONE_ARM:
            return LossModel.one_arm(eta)
        return LossModel.balanced(eta)


class ProbeState(BaseModel):
    """Pure input state sum_k alpha_k |k, N-k> with x_k = |alpha_k|^2.

    ``k`` counts the photons entering the phase-carrying arm a. Phases default
    to zero; every closed-form Fisher information in this package depends on
    the weights only.
    """

    model_config = ConfigDict(frozen=True)

    n_photons: int = Field(ge=0)
    weights: tuple[float, ...]
    phases: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check_weights(self) -> "ProbeState":
        size = self.n_photons + 1
        if len(self.weights) != size:
            raise ValueError(
                f"expected {size} weights for N={self.n_photons}, got {len(self.weights)}"
            )
        if any(not math.isfinite(w) or w < 0.0 for w in self.weights):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"weights sum to {total!r}, not 1")
        if self.phases is not None and len(self.phases) != size:
            raise ValueError(f"expected {size} phases, got {len(self.phases)}")
        return self

    @classmethod
    def from_weights(
        cls,
        weights: Sequence[float] | FloatArray,
        phases: Sequence[float] | FloatArray | None = None,
    ) -> "ProbeState":
        values = tuple(float(w) for w in weights)
        return cls(
            n_photons=len(values) - 1,
            weights=values,
            phases=None if phases is None else tuple(float(p) for p in phases),
        )

    @property
    def x(self) -> FloatArray:
        return np.asarray(self.weights, dtype=np.float64)

    @property
    def photon_numbers(self) -> npt.NDArray[np.int64]:
        """Photon number k in arm a for every Fock component."""
        return np.arange(self.n_photons + 1)

    @property
    def amplitudes(self) -> ComplexArray:
        amps = np.sqrt(self.x).astype(np.complex128)
        if self.phases is not None:
            amps = amps * np.exp(1j * np.asarray(self.phases))
        return amps

    @property
    def support(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(self.x > 0.0)


def noon_state(n_photons: int, x0: float = 0.5) -> ProbeState:
    """Unbalanced N00N state sqrt(x0)|0,N> + sqrt(1-x0)|N,0>."""
    weights = np.zeros(n_photons + 1)
    weights[0] += x0
    weights[n_photons] += 1.0 - x0
    return ProbeState.from_weights(weights)


def fock_component(n_photons: int, k: int) -> ProbeState:
    """The single Fock state |k, N-k>."""
    if not 0 <= k <= n_photons:
        raise IndexRangeError(f"component k={k} outside [0, {n_photons}]")
    weights = np.zeros(n_photons + 1)
    weights[k] = 1.0
    return ProbeState.from_weights(weights)


def check_photon_range(n_photons: int, limit: int = MAX_PHOTONS) -> None:
    if n_photons > limit:
        raise DimensionError(f"N={n_photons} exceeds the validated range N <= {limit}")


def loss_coefficient(n_photons: int, k: int, lost_a: int, lost_b: int, loss: LossModel) -> float:
    """Probability B^k_{l_a l_b} that |k, N-k> loses l_a photons from a and l_b from b.

    Evaluated as C(k,l_a) C(N-k,l_b) eta_a^(k-l_a) (1-eta_a)^l_a eta_b^(N-k-l_b) (1-eta_b)^l_b,
    which has no eta^-1 and is exact at eta = 0 and eta = 1.
    """
    if not (0 <= lost_a <= k <= n_photons and 0 <= lost_b <= n_photons - k):
        raise IndexRangeError(
            f"need 0 <= l_a <= k <= N and 0 <= l_b <= N-k, got N={n_photons}, k={k}, "
            f"l_a={lost_a}, l_b={lost_b}"
        )
    check_photon_range(n_photons)
    in_b = n_photons - k
    return float(
        math.comb(k, lost_a)
        * math.comb(in_b, lost_b)
        * loss.eta_a ** (k - lost_a)
        * (1.0 - loss.eta_a) ** lost_a
        * loss.eta_b ** (in_b - lost_b)
        * (1.0 - loss.eta_b) ** lost_b
    )


def arm_loss_matrix(photons: npt.NDArray[np.int64], eta: float, size: int) -> FloatArray:
    """M[k, l] = P(l of photons[k] photons lost | transmissivity eta)."""
    lost = np.arange(size)
    kept = photons[:, None] - lost[None, :]
    valid = kept >= 0
    kept = np.where(valid, kept, 0)
    values = (
        comb(photons[:, None], lost[None, :])
        * np.power(eta, kept)
        * np.power(1.0 - eta, lost)[None, :]
    )
    return np.where(valid, values, 0.0)


def loss_tensor(n_photons: int, loss: LossModel) -> FloatArray:
    """All coefficients B[k, l_a, l_b], zero outside the admissible index range."""
    check_photon_range(n_photons)
    ks = np.arange(n_photons + 1)
    arm_a = arm_loss_matrix(ks, loss.eta_a, n_photons + 1)
    arm_b = arm_loss_matrix(n_photons - ks, loss.eta_b, n_photons + 1)
    return arm_a[:, :, None] * arm_b[:, None, :]


@dataclass(frozen=True)
class ConditionalBranch:
    """Normalized output state given l_a photons lost from a and l_b from b.

    ``amplitudes[j]`` multiplies |j, N - l_a - l_b - j>, i.e. the surviving
    component that entered as k = j + l_a.
    """

    lost_a: int
    lost_b: int
    probability: float
    amplitudes: ComplexArray

    @property
    def lost_total(self) -> int:
        return self.lost_a + self.lost_b

    @property
    def surviving(self) -> int:
        return len(self.amplitudes) - 1

    @property
    def photons_in_a(self) -> npt.NDArray[np.int64]:
        return np.arange(len(self.amplitudes))


def decompose_output(
    state: ProbeState, loss: LossModel, phase: float = 0.0
) -> list[ConditionalBranch]:
    """Split the lossy output into its conditional pure branches.

    Branches with zero probability are omitted; the rest are ordered by total
    loss l = l_a + l_b, then by l_a.
    """
    n = state.n_photons
    ks = state.photon_numbers
    x = state.x
    amps = state.amplitudes * np.exp(1j * ks * phase)
    coefficients = loss_tensor(n, loss)

    branches: list[ConditionalBranch] = []
    for total in range(n + 1):
        for lost_a in range(total + 1):
            lost_b = total - lost_a
            window = np.arange(lost_a, n - lost_b + 1)
            b = coefficients[window, lost_a, lost_b]
            probability = float(np.dot(x[window], b))
            if probability <= 0.0:
                continue
            vector = amps[window] * np.sqrt(b) / math.sqrt(probability)
            branches.append(ConditionalBranch(lost_a, lost_b, probability, vector))
    return branches


def _kraus_operators(dim: int, eta: float) -> list[FloatArray]:
    """Single-mode loss Kraus operators sqrt(C(m,l) eta^(m-l) (1-eta)^l) |m-l><m|."""
    operators = []
    for lost in range(dim):
        op = np.zeros((dim, dim))
        for m in range(lost, dim):
            op[m - lost, m] = math.sqrt(
                math.comb(m, lost) * eta ** (m - lost) * (1.0 - eta) ** lost
            )
        operators.append(op)
    return operators


def _apply_losses(rho: ComplexArray, dim: int, loss: LossModel) -> ComplexArray:
    eye = np.eye(dim)
    arm_a = [np.kron(op, eye) for op in _kraus_operators(dim, loss.eta_a)]
    arm_b = [np.kron(eye, op) for op in _kraus_operators(dim, loss.eta_b)]
    for operators in (arm_a, arm_b):
        out = np.zeros_like(rho)
        for op in operators:
            out += op @ rho @ op.T
        rho = out
    return rho


def output_density_matrix(
    state: ProbeState, loss: LossModel, phase: float, phase_first: bool = True
) -> ComplexArray:
    """Output density matrix on the full two-mode space, index n_a * (N+1) + n_b.

    ``phase_first`` selects whether the phase shift acts before or after the
    loss channel.
    """
    n = state.n_photons
    check_photon_range(n, MAX_FULL_SPACE_PHOTONS)
    dim = n + 1
    psi = np.zeros(dim * dim, dtype=np.complex128)
    for k, alpha in enumerate(state.amplitudes):
        psi[k * dim + (n - k)] = alpha
    rho = np.outer(psi, psi.conj())

    shift = np.exp(1j * phase * np.repeat(np.arange(dim), dim))
    rotate = np.outer(shift, shift.conj())
    if phase_first:
        return _apply_losses(rho * rotate, dim, loss)
    return _apply_losses(rho, dim, loss) * rotate


def loss_phase_commutation_check(state: ProbeState, loss: LossModel, phase: float) -> float:
    """Largest entrywise difference between phase-then-loss and loss-then-phase outputs."""
    before = output_density_matrix(state, loss, phase, phase_first=True)
    after = output_density_matrix(state, loss, phase, phase_first=False)
    deviation = float(np.max(np.abs(before - after)))
    logger.debug(f"Loss/phase commutation deviation for N={state.n_photons}: {deviation:.3e}")
    return deviation

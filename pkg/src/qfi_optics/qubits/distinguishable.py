"""Distinguishable photons: N qubits, each either in arm a (1) or arm b (0).

A basis string k is stored as an integer whose most significant bit is photon
0; k-bar is the number of ones, i.e. the photons in the phase-carrying arm.
The permutation-symmetric probes are exactly the bosonic Fock states.
"""

import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import comb

from qfi_optics.core.fisher import density_qfi
from qfi_optics.core.fock import WEIGHT_TOLERANCE, FloatArray, LossModel, ProbeState
from qfi_optics.errors import DimensionError, InputError

logger = logging.getLogger(__name__)

MAX_QUBITS = 12
MAX_EXACT_QUBITS = 6
SYMMETRY_TOLERANCE = 1e-10


class QubitProbe(BaseModel):
    """Weights x over all 2^N binary strings."""

    model_config = ConfigDict(frozen=True)

    n_photons: int = Field(ge=1)
    weights: tuple[float, ...]

    @model_validator(mode="after")
    def _check_weights(self) -> "QubitProbe":
        if self.n_photons > MAX_QUBITS:
            raise DimensionError(f"N={self.n_photons} exceeds the qubit limit {MAX_QUBITS}")
        if len(self.weights) != 2**self.n_photons:
            raise ValueError(f"expected {2**self.n_photons} weights, got {len(self.weights)}")
        if any(not math.isfinite(w) or w < 0.0 for w in self.weights):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"weights sum to {total!r}, not 1")
        return self

    @classmethod
    def from_weights(cls, weights: Sequence[float] | FloatArray) -> "QubitProbe":
        values = tuple(float(w) for w in weights)
        n = max(len(values).bit_length() - 1, 0)
        if 2**n != len(values):
            raise DimensionError(f"{len(values)} weights is not a power of two")
        if n > MAX_QUBITS:
            raise DimensionError(f"N={n} exceeds the qubit limit {MAX_QUBITS}")
        return cls(n_photons=n, weights=values)

    @property
    def x(self) -> FloatArray:
        return np.asarray(self.weights, dtype=np.float64)

    @property
    def hamming_weights(self) -> npt.NDArray[np.int64]:
        return hamming_weights(self.n_photons)


def hamming_weights(n_photons: int) -> npt.NDArray[np.int64]:
    """k-bar for every string index 0..2^N - 1."""
    strings = np.arange(2**n_photons)
    bits = (strings[:, None] >> np.arange(n_photons)[None, :]) & 1
    result: npt.NDArray[np.int64] = bits.sum(axis=1)
    return result


def _photon_channel(loss: LossModel) -> FloatArray:
    """Rows: kept, lost from b, lost from a. Columns: photon in b (0), in a (1)."""
    return np.array(
        [
            [loss.eta_b, loss.eta_a],
            [1.0 - loss.eta_b, 0.0],
            [0.0, 1.0 - loss.eta_a],
        ]
    )


def _apply_per_photon(tensor: FloatArray, matrix: FloatArray) -> FloatArray:
    for axis in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def qfi_bound_qubits(probe: QubitProbe, loss: LossModel) -> float:
    """F~ for distinguishable photons.

    Every photon independently survives, is lost from a, or is lost from b,
    so the branch sums over (l_a, l_b) factorize into one 3x2 transfer
    matrix per photon acting on the 2^N weight tensor.
    """
    n = probe.n_photons
    x = probe.x
    kbar = probe.hamming_weights.astype(np.float64)
    shape = (2,) * n
    channel = _photon_channel(loss)
    b = _apply_per_photon(x.reshape(shape), channel).ravel()
    a = _apply_per_photon((kbar * x).reshape(shape), channel).ravel()
    ratio = np.divide(a * a, b, out=np.zeros_like(b), where=b > 0.0)
    return max(float(4.0 * (kbar**2 @ x - ratio.sum())), 0.0)


def qfi_bound_qubits_naive(probe: QubitProbe, loss: LossModel) -> float:
    """Direct sum over strings k and disjoint loss patterns l_a <= k, l_b <= 1 - k."""
    n = probe.n_photons
    if n > MAX_EXACT_QUBITS:
        raise DimensionError(f"the reference sum is limited to N <= {MAX_EXACT_QUBITS}")
    full = 2**n - 1
    first: dict[tuple[int, int], float] = {}
    zeroth: dict[tuple[int, int], float] = {}
    variance_term = 0.0
    for k, weight in enumerate(probe.weights):
        if weight == 0.0:
            continue
        kbar = k.bit_count()
        variance_term += kbar * kbar * weight
        in_b = full & ~k
        for lost_a in _subsets(k):
            for lost_b in _subsets(in_b):
                la, lb = lost_a.bit_count(), lost_b.bit_count()
                coefficient = (
                    (1.0 - loss.eta_a) ** la
                    * loss.eta_a ** (kbar - la)
                    * (1.0 - loss.eta_b) ** lb
                    * loss.eta_b ** (n - kbar - lb)
                )
                key = (lost_a, lost_b)
                zeroth[key] = zeroth.get(key, 0.0) + weight * coefficient
                first[key] = first.get(key, 0.0) + kbar * weight * coefficient
    subtracted = math.fsum(first[key] ** 2 / zeroth[key] for key in zeroth if zeroth[key] > 0.0)
    return max(4.0 * (variance_term - subtracted), 0.0)


def _subsets(mask: int) -> list[int]:
    result = []
    subset = mask
    while True:
        result.append(subset)
        if subset == 0:
            return result
        subset = (subset - 1) & mask


def symmetrize(probe: QubitProbe) -> QubitProbe:
    """Average the weights over all photon permutations (Hamming-weight orbits)."""
    kbar = probe.hamming_weights
    totals = np.bincount(kbar, weights=probe.x, minlength=probe.n_photons + 1)
    sizes = comb(probe.n_photons, np.arange(probe.n_photons + 1))
    return QubitProbe.from_weights((totals / sizes)[kbar])


def permute_qubits(probe: QubitProbe, permutation: Sequence[int]) -> QubitProbe:
    """Relabel photons: photon i of the result is photon ``permutation[i]`` of ``probe``."""
    n = probe.n_photons
    if sorted(permutation) != list(range(n)):
        raise InputError(f"{list(permutation)} is not a permutation of 0..{n - 1}")
    tensor = probe.x.reshape((2,) * n)
    return QubitProbe.from_weights(np.transpose(tensor, axes=list(permutation)).ravel())


def is_symmetric(probe: QubitProbe, tolerance: float = SYMMETRY_TOLERANCE) -> bool:
    return bool(np.max(np.abs(probe.x - symmetrize(probe).x)) <= tolerance)


def embed_symmetric(probe: QubitProbe) -> ProbeState:
    """Fock state with x_k equal to the total weight of the strings with k-bar = k."""
    if not is_symmetric(probe):
        raise InputError("probe is not invariant under photon permutations")
    totals = np.bincount(probe.hamming_weights, weights=probe.x, minlength=probe.n_photons + 1)
    return ProbeState.from_weights(totals / totals.sum())


def from_fock(state: ProbeState) -> QubitProbe:
    """Symmetric qubit probe spreading x_k evenly over the C(N, k) strings with k ones."""
    if state.n_photons < 1:
        raise InputError("need at least one photon")
    kbar = hamming_weights(state.n_photons)
    sizes = comb(state.n_photons, np.arange(state.n_photons + 1))
    return QubitProbe.from_weights((state.x / sizes)[kbar])


def ghz_probe(n_photons: int, x0: float = 0.5) -> QubitProbe:
    """Weight x0 on 0...0 (all photons in b) and 1 - x0 on 1...1."""
    weights = np.zeros(2**n_photons)
    weights[0] += x0
    weights[-1] += 1.0 - x0
    return QubitProbe.from_weights(weights)


def qfi_exact_qubits(probe: QubitProbe, loss: LossModel, phase: float = 0.0) -> float:
    """Exact QFI when the photons occupy distinguishable, individually detected bins.

    The set L of empty bins is observed; which arm each lost photon left from
    is not. Sector L therefore holds a mixture over the splits l_a of L into
    photons lost from a and from b.
    """
    n = probe.n_photons
    if n > MAX_EXACT_QUBITS:
        raise DimensionError(f"the exact qubit QFI is limited to N <= {MAX_EXACT_QUBITS}")
    amplitudes = np.sqrt(probe.x)
    survive = (loss.eta_b, loss.eta_a)
    perish = (1.0 - loss.eta_b, 1.0 - loss.eta_a)

    total = 0.0
    for empty in itertools.product((False, True), repeat=n):
        kept = [i for i in range(n) if not empty[i]]
        lost = [i for i in range(n) if empty[i]]
        dim = 2 ** len(kept)
        generator = hamming_weights(len(kept)).astype(np.float64) if kept else np.zeros(1)
        rho = np.zeros((dim, dim), dtype=np.complex128)
        for split in itertools.product((0, 1), repeat=len(lost)):
            vector = np.zeros(dim, dtype=np.complex128)
            for index, kept_bits in enumerate(itertools.product((0, 1), repeat=len(kept))):
                bits = [0] * n
                for i, bit in zip(kept, kept_bits, strict=True):
                    bits[i] = bit
                for i, bit in zip(lost, split, strict=True):
                    bits[i] = bit
                string = int("".join(map(str, bits)), 2) if bits else 0
                factor = math.prod(survive[bits[i]] for i in kept) * math.prod(
                    perish[bits[i]] for i in lost
                )
                vector[index] = amplitudes[string] * math.sqrt(factor)
            vector *= np.exp(1j * phase * generator)
            rho += np.outer(vector, vector.conj())
        if np.trace(rho).real <= 0.0:
            continue
        drho = 1j * (generator[:, None] - generator[None, :]) * rho
        total += density_qfi(rho, drho)
    logger.debug(f"Exact qubit QFI N={n}: {total:.12g}")
    return total

"""Photon-number-resolved measurements that saturate the quantum Cramer-Rao bound.

Outcomes are first split by the number of surviving photons m (the total
number of lost photons is measured non-destructively). Within each block a
projective measurement is built at an anchor phase phi0:

* a block fed by a single loss event (l_a, l_b) holds a pure state xi, and
  the pair |e+-> = (xi +- i(J - <J>) xi / dJ) / sqrt(2) completed to a basis
  saturates the pure-state QFI at phi0;
* a block that mixes several loss events (losses in both arms) is measured in
  the eigenbasis of its symmetric logarithmic derivative.
"""

import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from qfi_optics.core.fisher import output_blocks, symmetric_log_derivative
from qfi_optics.core.fock import (
    ComplexArray,
    FloatArray,
    LossModel,
    ProbeState,
    decompose_output,
)
from qfi_optics.errors import PovmError

logger = logging.getLogger(__name__)

COMPLETENESS_TOLERANCE = 1e-8
ZERO_VARIANCE = 1e-14
PROBABILITY_CUTOFF = 1e-13


@dataclass(frozen=True)
class PovmElement:
    """Rank-one projector acting on the block of ``surviving`` photons.

    ``branches`` lists the loss events (l_a, l_b) feeding the block; it is a
    single pair whenever the branch can be identified from the photon count.
    """

    surviving: int
    branches: tuple[tuple[int, int], ...]
    projector: ComplexArray
    label: str
    informative: bool = True

    @property
    def branch(self) -> tuple[int, int] | None:
        return self.branches[0] if len(self.branches) == 1 else None


def _projector(vector: ComplexArray) -> ComplexArray:
    return np.outer(vector, vector.conj())


def _complete_basis(vectors: list[ComplexArray], dim: int) -> list[ComplexArray]:
    """Orthonormal completion of ``vectors`` by QR over the Fock basis order."""
    stacked = np.column_stack([*vectors, np.eye(dim, dtype=np.complex128)])
    q, _ = np.linalg.qr(stacked)
    return [q[:, i] for i in range(len(vectors), dim)]


def _pure_block(
    amplitudes: ComplexArray, surviving: int, branch: tuple[int, int]
) -> list[PovmElement]:
    dim = surviving + 1
    j = np.arange(dim, dtype=np.float64)
    populations = np.abs(amplitudes) ** 2
    mean = float(populations @ j)
    variance = float(populations @ j**2) - mean**2
    if variance <= ZERO_VARIANCE:
        logger.warning(
            f"Branch {branch} has no photon-number spread; it carries no phase information"
        )
        return [
            PovmElement(surviving, (branch,), _projector(v), "completion", informative=False)
            for v in _complete_basis([], dim)
        ]
    tangent = 1j * (j - mean) * amplitudes / np.sqrt(variance)
    plus = (amplitudes + tangent) / np.sqrt(2.0)
    minus = (amplitudes - tangent) / np.sqrt(2.0)
    elements = [
        PovmElement(surviving, (branch,), _projector(plus), "e+"),
        PovmElement(surviving, (branch,), _projector(minus), "e-"),
    ]
    elements.extend(
        PovmElement(surviving, (branch,), _projector(v), "completion")
        for v in _complete_basis([plus, minus], dim)
    )
    return elements


def _mixed_block(
    rho: ComplexArray, surviving: int, branches: tuple[tuple[int, int], ...]
) -> list[PovmElement]:
    j = np.arange(surviving + 1, dtype=np.float64)
    drho = 1j * (j[:, None] - j[None, :]) * rho
    sld, _ = symmetric_log_derivative(rho, drho)
    _, vectors = np.linalg.eigh(sld)
    return [
        PovmElement(surviving, branches, _projector(vectors[:, i]), "sld")
        for i in range(surviving + 1)
    ]


def optimal_povm(state: ProbeState, loss: LossModel, phi0: float) -> list[PovmElement]:
    """Measurement saturating the QFI at ``phi0``.

    Blocks that never occur get Fock-basis projectors so that every block is
    resolved into its identity.
    """
    n = state.n_photons
    by_block: dict[int, list[tuple[tuple[int, int], ComplexArray]]] = defaultdict(list)
    for branch in decompose_output(state, loss, phi0):
        by_block[branch.surviving].append(((branch.lost_a, branch.lost_b), branch.amplitudes))
    mixed = {block.surviving: block for block in output_blocks(state, loss, phi0)}

    elements: list[PovmElement] = []
    for m in range(n, -1, -1):
        members = by_block.get(m, [])
        if len(members) == 1:
            label, amplitudes = members[0]
            elements.extend(_pure_block(amplitudes, m, label))
        elif members:
            block = mixed[m]
            elements.extend(_mixed_block(block.rho, m, block.branches))
        else:
            elements.extend(
                PovmElement(m, (), _projector(v), "fock", informative=False)
                for v in np.eye(m + 1, dtype=np.complex128)
            )
    logger.debug(f"Optimal POVM for N={n} at phi0={phi0}: {len(elements)} outcomes")
    return elements


def check_completeness(povm: Sequence[PovmElement], n_photons: int) -> float:
    """Largest entrywise deviation of any block sum from the identity.

    Raises:
        PovmError: deviation above 1e-8 or a block without elements
    """
    sums: dict[int, ComplexArray] = {}
    for element in povm:
        m = element.surviving
        if element.projector.shape != (m + 1, m + 1):
            raise PovmError(f"element {element.label} has the wrong shape for block m={m}")
        current = sums.get(m, np.zeros((m + 1, m + 1), dtype=np.complex128))
        sums[m] = current + element.projector
    worst = 0.0
    for m in range(n_photons + 1):
        if m not in sums:
            raise PovmError(f"no measurement outcomes for {m} surviving photons")
        worst = max(worst, float(np.max(np.abs(sums[m] - np.eye(m + 1)))))
    if worst > COMPLETENESS_TOLERANCE:
        raise PovmError(f"POVM elements miss the identity by {worst:.3e}")
    return worst


def outcome_probabilities(
    povm: Sequence[PovmElement],
    state: ProbeState,
    loss: LossModel,
    phases: float | Sequence[float] | FloatArray,
) -> FloatArray:
    """p(i | phi) for every element and every phase, shape (len(phases), len(povm)).

    Each block evolves as rho(phi) = U rho(0) U^dag with U = exp(i J phi), so
    p(i | phi) = sum_{rs} Pi_sr rho_rs exp(i (r - s) phi) is a trigonometric
    polynomial in phi whose coefficients are fixed once.
    """
    grid = np.atleast_1d(np.asarray(phases, dtype=np.float64))
    blocks = {block.surviving: block.rho for block in output_blocks(state, loss, 0.0)}
    result = np.zeros((grid.size, len(povm)))
    for index, element in enumerate(povm):
        rho = blocks.get(element.surviving)
        if rho is None:
            continue
        weights = element.projector.T * rho
        rotation = np.exp(1j * np.outer(grid, np.arange(element.surviving + 1)))
        values = np.einsum("pr,rs,ps->p", rotation, weights, rotation.conj())
        result[:, index] = values.real
    clipped: FloatArray = np.clip(result, 0.0, None)
    return clipped


def classical_fisher(
    povm: Sequence[PovmElement], state: ProbeState, loss: LossModel, phase: float
) -> float:
    """F = sum_i p'(i|phi)^2 / p(i|phi) with analytic p'; null outcomes are skipped."""
    check_completeness(povm, state.n_photons)
    blocks = {block.surviving: block for block in output_blocks(state, loss, phase)}
    fisher = 0.0
    for element in povm:
        block = blocks.get(element.surviving)
        if block is None:
            continue
        p = float(np.real(np.trace(element.projector @ block.rho)))
        if p <= PROBABILITY_CUTOFF:
            continue
        dp = float(np.real(np.trace(element.projector @ block.derivative())))
        fisher += dp * dp / p
    return fisher

"""Exact statevector simulation against a diagonal cost operator.

Basis convention, used everywhere in this package: bit k of a basis
index holds the value of variable x_{k+1}, and |0> encodes logical 0.
Bitstrings render x1 leftmost.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .sat import CapacityError, CnfFormula, assignment_to_bitstring, violated_counts

DEFAULT_SIM_CAP = 20


def simulator_cap() -> int:
    """Amplitude-count cap as qubit count; MOSAIC_QAOA_CAP overrides."""
    raw = os.environ.get("MOSAIC_QAOA_CAP")
    return int(raw) if raw else DEFAULT_SIM_CAP


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CostDiagonal:
    """Violated-clause count per basis index; the diagonal of the cost
    operator."""

    values: np.ndarray
    n: int
    m: int
    ground_energy: float

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    n: int

    @staticmethod
    def uniform(n: int) -> "StateVector":
        dim = 1 << n
        amp = np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)
        return StateVector(amp, n)

    @staticmethod
    def basis(n: int, index: int) -> "StateVector":
        amp = np.zeros(1 << n, dtype=np.complex128)
        amp[index] = 1.0
        return StateVector(amp, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n)


@dataclass(frozen=True)
class ShotCounts:
    counts: dict[str, int]
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to the shot total")


def build_cost_diag(f: CnfFormula, cap: int | None = None) -> CostDiagonal:
    """Dense diagonal with entry b = clauses of ``f`` violated by b."""
    limit = cap if cap is not None else simulator_cap()
    if f.n > limit:
        raise CapacityError(f"n={f.n} exceeds the simulator cap {limit}")
    values = violated_counts(f).astype(np.float64)
    return CostDiagonal(
        values=values, n=f.n, m=f.m, ground_energy=float(values.min())
    )


def _check_dims(psi: StateVector, diag: CostDiagonal) -> None:
    if psi.amplitudes.shape[0] != diag.values.shape[0]:
        raise DimensionMismatchError(
            f"state dimension {psi.amplitudes.shape[0]} vs "
            f"diagonal dimension {diag.values.shape[0]}"
        )


def apply_phase(psi: StateVector, diag: CostDiagonal, gamma: float) -> StateVector:
    """exp(-i * gamma * H_cost) |psi>."""
    _check_dims(psi, diag)
    out = psi.amplitudes.copy()
    kernels.phase_inplace(out, diag.values, gamma)
    return StateVector(out, psi.n)


def pauli_masks(axes, qubits) -> tuple[int, int, int]:
    """Encode a Pauli product as (x_mask, zy_mask, y_count); qubit q acts
    on bit q-1."""
    x_mask = 0
    zy_mask = 0
    y_count = 0
    for axis, q in zip(axes, qubits):
        bit = 1 << (q - 1)
        if axis == "X":
            x_mask |= bit
        elif axis == "Y":
            x_mask |= bit
            zy_mask |= bit
            y_count += 1
        elif axis == "Z":
            zy_mask |= bit
        else:
            raise ValueError(f"unknown Pauli axis {axis!r}")
    return x_mask, zy_mask, y_count


def apply_pauli_rotation(psi: StateVector, operator, beta: float) -> StateVector:
    """exp(-i * beta * A) |psi> for a pool operator A.

    Product Pauli strings use the closed form cos(b) I - i sin(b) A; the
    global transverse mixer sum_k X_k factorizes into commuting
    single-qubit X rotations sharing beta.
    """
    for q in operator.support:
        if q < 1 or q > psi.n:
            raise DimensionMismatchError(
                f"operator acts on qubit {q}, outside 1..{psi.n}"
            )
    out = psi.amplitudes.copy()
    if operator.is_global_mixer:
        for q in range(1, psi.n + 1):
            kernels.rotation_inplace(out, 1 << (q - 1), 0, 0, beta)
    else:
        x_mask, zy_mask, y_count = pauli_masks(operator.axes, operator.qubits)
        kernels.rotation_inplace(out, x_mask, zy_mask, y_count, beta)
    return StateVector(out, psi.n)


def expectation(psi: StateVector, diag: CostDiagonal) -> float:
    _check_dims(psi, diag)
    return kernels.expectation(diag.values, psi.amplitudes)


def _pauli_inner(bra: np.ndarray, ket: np.ndarray, operator) -> complex:
    """<bra| A |ket> for a pool operator (sum of X's for the global mixer)."""
    if operator.is_global_mixer:
        acc = 0.0 + 0.0j
        for q in operator.qubits:
            acc += kernels.pauli_inner(bra, ket, 1 << (q - 1), 0, 0)
        return acc
    x_mask, zy_mask, y_count = pauli_masks(operator.axes, operator.qubits)
    return kernels.pauli_inner(bra, ket, x_mask, zy_mask, y_count)


def gradient_score(
    psi: StateVector, diag: CostDiagonal, operator, gamma0: float
) -> float:
    """Negative slope at beta=0 of the energy after appending
    exp(-i*beta*A) to the probe evolution exp(-i*gamma0*H_cost)."""
    _check_dims(psi, diag)
    phi = apply_phase(psi, diag, gamma0)
    return gradient_score_from_probe(phi.amplitudes, diag, operator)


def gradient_score_from_probe(
    phi: np.ndarray, diag: CostDiagonal, operator, weighted: np.ndarray | None = None
) -> float:
    """Same as gradient_score with the probe-evolved amplitudes given;
    ``weighted`` may carry the precomputed diag.values * phi."""
    u = weighted if weighted is not None else diag.values * phi
    return -2.0 * _pauli_inner(u, phi, operator).imag


def sample(psi: StateVector, shots: int, seed: int) -> ShotCounts:
    """Multinomial draws from the measurement distribution |amplitude|^2."""
    if shots < 1:
        raise ValueError(f"need at least one shot, got {shots}")
    amp = psi.amplitudes
    probs = amp.real * amp.real + amp.imag * amp.imag
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    counts = {
        assignment_to_bitstring(int(idx), psi.n): int(c)
        for idx, c in enumerate(draws)
        if c > 0
    }
    return ShotCounts(counts=counts, shots=shots)

"""Mixer-operator pool: the global transverse mixer, single-qubit X/Y,
and two-qubit Pauli pairs, with gradient scoring.

Z and ZZ strings are excluded (they commute with the diagonal cost
operator). Symmetric pair types (XX, YY) are stored once per unordered
qubit pair; mixed types (XY, XZ, YZ) keep both qubit orders since
swapping the qubits changes the operator. A pair never lists Z first:
Z_i X_j is the same operator as X_j Z_i, which is already present.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .sat import InvalidDimensionError
from .simulator import CostDiagonal, StateVector, apply_phase, gradient_score_from_probe

_NAME_RE = re.compile(r"^([XY])(\d+)(?:([XYZ])(\d+))?$")

DEFAULT_GRADIENT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class PoolOperator:
    """A mixer generator: Pauli axes on 1-based qubits, or the global
    transverse mixer sum_k X_k (``is_global_mixer``)."""

    axes: tuple[str, ...]
    qubits: tuple[int, ...]
    is_global_mixer: bool = False

    def __post_init__(self):
        if len(self.axes) != len(self.qubits):
            raise ValueError("axes and qubits must be parallel")
        if not self.is_global_mixer:
            if not 1 <= len(self.qubits) <= 2:
                raise ValueError("non-global operators act on 1 or 2 qubits")
            if len(self.qubits) == 2 and self.qubits[0] == self.qubits[1]:
                raise ValueError("pair operator qubits must differ")
            if self.axes[0] == "Z" or self.axes == ("Z", "Z"):
                raise ValueError(f"excluded operator type {self.axes}")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.qubits)

    @property
    def name(self) -> str:
        if self.is_global_mixer:
            return "XMIXER"
        return "".join(f"{a}{q}" for a, q in zip(self.axes, self.qubits))

    def __str__(self) -> str:
        return self.name

    @staticmethod
    def global_mixer(n: int) -> "PoolOperator":
        return PoolOperator(("X",) * n, tuple(range(1, n + 1)), is_global_mixer=True)

    @staticmethod
    def single(axis: str, qubit: int) -> "PoolOperator":
        return PoolOperator((axis,), (qubit,))

    @staticmethod
    def pair(axis1: str, q1: int, axis2: str, q2: int) -> "PoolOperator":
        return PoolOperator((axis1, axis2), (q1, q2))

    @staticmethod
    def from_name(name: str, n: int) -> "PoolOperator":
        if name == "XMIXER":
            return PoolOperator.global_mixer(n)
        match = _NAME_RE.match(name)
        if not match:
            raise ValueError(f"unparseable operator name {name!r}")
        a1, q1, a2, q2 = match.groups()
        if a2 is None:
            return PoolOperator.single(a1, int(q1))
        return PoolOperator.pair(a1, int(q1), a2, int(q2))


@dataclass(frozen=True)
class ScoredPool:
    """Candidates whose |score| cleared the threshold, plus the max
    |score| over the whole pool for stopping decisions."""

    entries: tuple[tuple[PoolOperator, float], ...]
    gamma0: float
    threshold: float
    max_abs_score: float


def build_pool(n: int) -> list[PoolOperator]:
    """All mixer candidates for ``n`` qubits:
    1 global + 2n singles + 4n(n-1) pairs."""
    if n < 2:
        raise InvalidDimensionError(f"pool needs n >= 2 qubits, got {n}")
    ops = [PoolOperator.global_mixer(n)]
    for q in range(1, n + 1):
        ops.append(PoolOperator.single("X", q))
        ops.append(PoolOperator.single("Y", q))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ops.append(PoolOperator.pair("X", i, "X", j))
            ops.append(PoolOperator.pair("Y", i, "Y", j))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            ops.append(PoolOperator.pair("X", i, "Y", j))
            ops.append(PoolOperator.pair("X", i, "Z", j))
            ops.append(PoolOperator.pair("Y", i, "Z", j))
    return ops


def pool_size(n: int) -> int:
    return 1 + 2 * n + 4 * n * (n - 1)


def score_pool(
    psi: StateVector,
    diag: CostDiagonal,
    gamma0: float,
    pool: list[PoolOperator],
    threshold: float = DEFAULT_GRADIENT_THRESHOLD,
) -> ScoredPool:
    """One gradient score per operator against the shared probe state
    exp(-i*gamma0*H_cost)|psi>, filtered at the threshold."""
    phi = apply_phase(psi, diag, gamma0).amplitudes
    weighted = diag.values * phi
    entries = []
    max_abs = 0.0
    for op in pool:
        g = gradient_score_from_probe(phi, diag, op, weighted=weighted)
        max_abs = max(max_abs, abs(g))
        if abs(g) >= threshold:
            entries.append((op, g))
    return ScoredPool(
        entries=tuple(entries),
        gamma0=gamma0,
        threshold=threshold,
        max_abs_score=max_abs,
    )

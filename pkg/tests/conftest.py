"""Shared test helpers: independent oracles kept deliberately separate
from the implementation paths they check."""

import random

import numpy as np
import pytest

from mosaic_qaoa.engine import AnsatzCircuit, AnsatzLayer
from mosaic_qaoa.pool import build_pool
from mosaic_qaoa.sat import CnfFormula, Clause, Literal, generate_uniform


def brute_force_violations(f: CnfFormula, assignment: int) -> int:
    """Semantic clause evaluation, no bit tricks shared with the library."""
    violated = 0
    for cl in f.clauses:
        clause_true = False
        for lit in cl.literals:
            value = bool((assignment >> (lit.var_index - 1)) & 1)
            if value != lit.negated:
                clause_true = True
                break
        if not clause_true:
            violated += 1
    return violated


def brute_force_opt(f: CnfFormula) -> int:
    """Second, independently coded satisfied-count maximizer."""
    best = 0
    for assignment in range(1 << f.n):
        best = max(best, f.m - brute_force_violations(f, assignment))
    return best


def random_formula(n: int, seed: int) -> CnfFormula:
    return generate_uniform(n, seed)


def random_clause(n: int, rng: random.Random) -> Clause:
    vars_ = rng.sample(range(1, n + 1), 3)
    return Clause(tuple(Literal(v, rng.random() < 0.5) for v in vars_))


def random_circuit(n: int, layers: int, rng: random.Random) -> AnsatzCircuit:
    """Random ansatz with disjoint per-layer supports."""
    pool = build_pool(n)
    out = []
    for _ in range(layers):
        target = rng.randint(1, max(1, n // 2))
        mixers = []
        used = set()
        for op in rng.sample(pool, len(pool)):
            if used & op.support:
                continue
            mixers.append((op, rng.uniform(-1.5, 1.5)))
            used |= op.support
            if len(mixers) >= target:
                break
        out.append(AnsatzLayer(gamma=rng.uniform(-1.5, 1.5), mixers=tuple(mixers)))
    return AnsatzCircuit(n=n, layers=tuple(out))


# ---------------------------------------------------------- dense oracle

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli_matrix(axes, qubits, n: int) -> np.ndarray:
    """Kronecker-built 2^n x 2^n matrix; qubit q lives on bit q-1, and
    numpy's kron puts the LAST factor on the lowest bit."""
    per_qubit = ["I"] * n
    for axis, q in zip(axes, qubits):
        per_qubit[q - 1] = axis
    out = np.eye(1, dtype=complex)
    for q in range(n, 0, -1):
        out = np.kron(out, _PAULI[per_qubit[q - 1]])
    return out


def dense_operator_matrix(op, n: int) -> np.ndarray:
    if op.is_global_mixer:
        total = np.zeros((1 << n, 1 << n), dtype=complex)
        for q in range(1, n + 1):
            total += dense_pauli_matrix(("X",), (q,), n)
        return total
    return dense_pauli_matrix(op.axes, op.qubits, n)


def dense_circuit_state(circuit: AnsatzCircuit, diag_values: np.ndarray) -> np.ndarray:
    """Gate-by-gate dense-matrix evolution from the uniform superposition."""
    from scipy.linalg import expm

    dim = 1 << circuit.n
    psi = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    for layer in circuit.layers:
        psi = np.exp(-1j * layer.gamma * diag_values) * psi
        for op, beta in layer.mixers:
            gen = dense_operator_matrix(op, circuit.n)
            psi = expm(-1j * beta * gen) @ psi
    return psi


@pytest.fixture
def rng():
    return random.Random(20240817)

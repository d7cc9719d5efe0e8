"""Vectorized numpy implementations of the statevector kernels.

A Pauli string on n qubits is encoded by three integers derived from its
single-qubit factors (qubit q acts on bit q-1 of the basis index):

* ``x_mask``  -- bits where the factor is X or Y (bit-flipping part),
* ``zy_mask`` -- bits where the factor is Z or Y (sign-carrying part),
* ``y_count`` -- number of Y factors, contributing a global phase i**y_count.

With ``src = b ^ x_mask`` the action on a basis state is
``(P psi)[b] = i**y_count * (-1)**popcount(src & zy_mask) * psi[src]``.
"""

import numpy as np

BACKEND_NAME = "numpy"


def _signs(indices: np.ndarray, mask: int) -> np.ndarray:
    """(-1)**popcount(indices & mask) as a float array."""
    v = indices & np.uint64(mask)
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    return 1.0 - 2.0 * (v & np.uint64(1)).astype(np.float64)


def phase_inplace(psi: np.ndarray, values: np.ndarray, gamma: float) -> None:
    """psi[b] *= exp(-i * gamma * values[b])."""
    psi *= np.exp((-1j * gamma) * values)


def apply_pauli(psi: np.ndarray, x_mask: int, zy_mask: int, y_count: int) -> np.ndarray:
    """Return P @ psi for the encoded Pauli string."""
    n_amp = psi.shape[0]
    src = np.arange(n_amp, dtype=np.uint64) ^ np.uint64(x_mask)
    out = _signs(src, zy_mask) * psi[src]
    phase = 1j ** (y_count & 3)
    if phase != 1:
        out *= phase
    return out


def rotation_inplace(
    psi: np.ndarray, x_mask: int, zy_mask: int, y_count: int, beta: float
) -> None:
    """psi <- exp(-i * beta * P) psi, using P**2 = I."""
    rotated = np.cos(beta) * psi - 1j * np.sin(beta) * apply_pauli(
        psi, x_mask, zy_mask, y_count
    )
    psi[:] = rotated


def expectation(values: np.ndarray, psi: np.ndarray) -> float:
    """<psi| diag(values) |psi> as a real number."""
    probs = psi.real * psi.real + psi.imag * psi.imag
    return float(np.dot(values, probs))


def pauli_inner(
    bra: np.ndarray, ket: np.ndarray, x_mask: int, zy_mask: int, y_count: int
) -> complex:
    """<bra| P |ket> for the encoded Pauli string."""
    return complex(np.vdot(bra, apply_pauli(ket, x_mask, zy_mask, y_count)))


def diag_inner(bra: np.ndarray, values: np.ndarray, ket: np.ndarray) -> complex:
    """<bra| diag(values) |ket>."""
    return complex(np.vdot(bra, values * ket))

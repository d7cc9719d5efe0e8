# Compiled statevector kernels; same contract as numpy_backend but with
# fused in-place loops (no index or temporary arrays).

from libc.math cimport cos, sin

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define MQ_POPCNT64(x) __builtin_popcountll(x)
    #else
    static int MQ_POPCNT64(unsigned long long x) {
        int c = 0;
        while (x) { c += (int)(x & 1ULL); x >>= 1; }
        return c;
    }
    #endif
    """
    int MQ_POPCNT64(unsigned long long x) nogil

BACKEND_NAME = "cython"


cdef inline double _sign(unsigned long long b, unsigned long long mask) nogil:
    return -1.0 if (MQ_POPCNT64(b & mask) & 1) else 1.0


cdef inline double complex _y_phase(int y_count) nogil:
    cdef int r = y_count & 3
    if r == 0:
        return 1.0
    if r == 1:
        return 1j
    if r == 2:
        return -1.0
    return -1j


def phase_inplace(double complex[::1] psi, const double[::1] values, double gamma):
    cdef Py_ssize_t i, n = psi.shape[0]
    cdef double a
    with nogil:
        for i in range(n):
            a = -gamma * values[i]
            psi[i] = psi[i] * (cos(a) + 1j * sin(a))


def apply_pauli(const double complex[::1] psi, unsigned long long x_mask,
                unsigned long long zy_mask, int y_count):
    import numpy as np
    out_arr = np.empty(psi.shape[0], dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex pf = _y_phase(y_count)
    cdef Py_ssize_t b, n = psi.shape[0]
    cdef unsigned long long src
    with nogil:
        for b in range(n):
            src = (<unsigned long long> b) ^ x_mask
            out[b] = pf * _sign(src, zy_mask) * psi[src]
    return out_arr


def rotation_inplace(double complex[::1] psi, unsigned long long x_mask,
                     unsigned long long zy_mask, int y_count, double beta):
    cdef double c = cos(beta)
    cdef double complex ms = -1j * sin(beta)
    cdef double complex pf = _y_phase(y_count)
    cdef Py_ssize_t b, n = psi.shape[0]
    cdef unsigned long long hi, ub, p
    cdef double complex tb, tp
    if x_mask == 0:
        # Pure-Z string: diagonal update.
        with nogil:
            for b in range(n):
                psi[b] = psi[b] * (c + ms * pf * _sign(<unsigned long long> b, zy_mask))
        return
    # Highest flipped bit splits indices into partner pairs updated together.
    hi = x_mask
    while hi & (hi - 1):
        hi &= hi - 1
    with nogil:
        for b in range(n):
            ub = <unsigned long long> b
            if ub & hi:
                continue
            p = ub ^ x_mask
            tb = c * psi[b] + ms * pf * _sign(p, zy_mask) * psi[p]
            tp = c * psi[p] + ms * pf * _sign(ub, zy_mask) * psi[b]
            psi[b] = tb
            psi[p] = tp


def expectation(const double[::1] values, const double complex[::1] psi):
    cdef double acc = 0.0
    cdef double re, im
    cdef Py_ssize_t i, n = psi.shape[0]
    with nogil:
        for i in range(n):
            re = psi[i].real
            im = psi[i].imag
            acc += values[i] * (re * re + im * im)
    return acc


def pauli_inner(const double complex[::1] bra, const double complex[::1] ket,
                unsigned long long x_mask, unsigned long long zy_mask, int y_count):
    cdef double complex acc = 0.0
    cdef double complex pf = _y_phase(y_count)
    cdef Py_ssize_t b, n = bra.shape[0]
    cdef unsigned long long src
    with nogil:
        for b in range(n):
            src = (<unsigned long long> b) ^ x_mask
            acc += bra[b].conjugate() * (_sign(src, zy_mask) * ket[src])
    return complex(pf * acc)


def diag_inner(const double complex[::1] bra, const double[::1] values, const double complex[::1] ket):
    cdef double complex acc = 0.0
    cdef Py_ssize_t i, n = bra.shape[0]
    with nogil:
        for i in range(n):
            acc += bra[i].conjugate() * values[i] * ket[i]
    return complex(acc)

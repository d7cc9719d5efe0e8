"""Statevector kernel backend selection.

The compiled extension is preferred; the numpy implementation is the
fallback when the extension is unavailable or when the environment
variable ``MOSAIC_QAOA_PURE_PY`` is set to a non-empty value.
Both backends expose the same functions and are interchangeable
(see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""

import os

from . import numpy_backend

if os.environ.get("MOSAIC_QAOA_PURE_PY"):
    _impl = numpy_backend
else:
    try:
        from . import _statevec as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = numpy_backend

BACKEND_NAME = _impl.BACKEND_NAME
phase_inplace = _impl.phase_inplace
apply_pauli = _impl.apply_pauli
rotation_inplace = _impl.rotation_inplace
expectation = _impl.expectation
pauli_inner = _impl.pauli_inner
diag_inner = _impl.diag_inner


def compiled_available() -> bool:
    try:
        from . import _statevec  # noqa: F401
    except ImportError:
        return False
    return True

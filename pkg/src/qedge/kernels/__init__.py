"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension (qedge.kernels._core, built from _core.pyx) is
preferred when importable; otherwise the numpy implementation is used.
Set QEDGE_KERNELS=python or QEDGE_KERNELS=cython to force a choice
(forcing cython raises if the extension is missing).

Exported functions, identical across backends:
    phase_apply(amps, energies, gamma)   -> new complex array
    mixer_apply(amps, alpha, n_qubits)   -> new complex array
    expectation(amps, energies)          -> float
    qubo_spectrum(n_vars, offset, diag, rows, cols, vals) -> float array

BACKEND names the implementation in use ("cython" or "numpy").
"""

import os

import numpy as np

from . import _numpy

_requested = os.environ.get("QEDGE_KERNELS", "auto").strip().lower()

if _requested in ("python", "numpy"):
    _impl = _numpy
    BACKEND = "numpy"
elif _requested in ("cython", "compiled"):
    from . import _core as _impl  # noqa: F401  (raises if not built)

    BACKEND = "cython"
elif _requested in ("auto", ""):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _numpy
        BACKEND = "numpy"
else:
    raise RuntimeError(f"unrecognized QEDGE_KERNELS value: {_requested!r}")


def phase_apply(amps, energies, gamma):
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    return np.asarray(_impl.phase_apply(amps, energies, float(gamma)))


def mixer_apply(amps, alpha, n_qubits):
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    return np.asarray(_impl.mixer_apply(amps, float(alpha), int(n_qubits)))


def expectation(amps, energies):
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    return float(_impl.expectation(amps, energies))


def qubo_spectrum(n_vars, offset, diag, rows, cols, vals):
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    return np.asarray(_impl.qubo_spectrum(int(n_vars), float(offset), diag, rows, cols, vals))

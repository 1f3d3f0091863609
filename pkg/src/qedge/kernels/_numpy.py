"""Vectorized numpy implementations of the hot kernels.

Used as the fallback when the compiled extension is unavailable and as
the reference the extension is benchmarked against. All functions are
allocation-light and deterministic.
"""

import numpy as np


def phase_apply(amps, energies, gamma):
    """Multiply each amplitude by exp(-i * gamma * E_j)."""
    if gamma == 0.0:
        return amps.copy()
    return amps * np.exp(-1j * gamma * energies)


def mixer_apply(amps, alpha, n_qubits):
    """Apply exp(-i * alpha * X) on every qubit (qubit 0 = least significant bit)."""
    out = amps.copy()
    if alpha == 0.0:
        return out
    c = np.cos(alpha)
    s = np.sin(alpha)
    for q in range(n_qubits):
        view = out.reshape(-1, 2, 1 << q)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a - 1j * s * b
        view[:, 1, :] = c * b - 1j * s * a
    return out


def expectation(amps, energies):
    """Return sum_j |amp_j|^2 * E_j."""
    probs = amps.real * amps.real + amps.imag * amps.imag
    return float(np.dot(probs, energies))


def qubo_spectrum(n_vars, offset, diag, rows, cols, vals):
    """Energies of all 2**n_vars bitstrings, index j encodes bit i as (j >> i) & 1."""
    size = 1 << n_vars
    energies = np.full(size, offset, dtype=np.float64)

    def bit(i):
        return np.tile(np.repeat(np.array([0.0, 1.0]), 1 << i), 1 << (n_vars - 1 - i))

    for i in range(n_vars):
        if diag[i] != 0.0:
            energies += diag[i] * bit(i)
    for i, j, v in zip(rows, cols, vals):
        energies += v * (bit(int(i)) * bit(int(j)))
    return energies

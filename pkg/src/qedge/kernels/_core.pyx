# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the statevector and QUBO-spectrum kernels.

Mirrors qedge.kernels._numpy function for function; selected at import by
qedge.kernels when available.
"""

import numpy as np

from libc.math cimport cos, sin


def phase_apply(const double complex[::1] amps, const double[::1] energies, double gamma):
    cdef Py_ssize_t size = amps.shape[0]
    out_arr = np.empty(size, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t j
    cdef double ph, c, s
    for j in range(size):
        ph = -gamma * energies[j]
        c = cos(ph)
        s = sin(ph)
        out[j] = amps[j] * (c + 1j * s)
    return out_arr


def mixer_apply(const double complex[::1] amps, double alpha, int n_qubits):
    cdef Py_ssize_t size = amps.shape[0]
    out_arr = np.empty(size, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double c = cos(alpha)
    cdef double s = sin(alpha)
    cdef double complex ms = -1j * s
    cdef Py_ssize_t j, base, k, half, step
    cdef int q
    cdef double complex a, b
    for j in range(size):
        out[j] = amps[j]
    for q in range(n_qubits):
        half = 1 << q
        step = half << 1
        base = 0
        while base < size:
            for k in range(base, base + half):
                a = out[k]
                b = out[k + half]
                out[k] = c * a + ms * b
                out[k + half] = c * b + ms * a
            base += step
    return out_arr


def expectation(const double complex[::1] amps, const double[::1] energies):
    cdef Py_ssize_t size = amps.shape[0]
    cdef double acc = 0.0
    cdef double re, im
    cdef Py_ssize_t j
    for j in range(size):
        re = amps[j].real
        im = amps[j].imag
        acc += (re * re + im * im) * energies[j]
    return acc


def qubo_spectrum(int n_vars, double offset, const double[::1] diag,
                  const long[::1] rows, const long[::1] cols, const double[::1] vals):
    cdef Py_ssize_t size = 1 << n_vars
    out_arr = np.empty(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n_pairs = vals.shape[0]
    cdef Py_ssize_t j, t
    cdef int i
    cdef double e
    for j in range(size):
        e = offset
        for i in range(n_vars):
            if (j >> i) & 1:
                e += diag[i]
        for t in range(n_pairs):
            if ((j >> rows[t]) & 1) and ((j >> cols[t]) & 1):
                e += vals[t]
        out[j] = e
    return out_arr

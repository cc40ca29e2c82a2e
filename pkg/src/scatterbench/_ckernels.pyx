# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: direct circular convolution and fused modulus/energy."""
import numpy as np
from libc.math cimport sqrt


def circular_convolve_1d(const double complex[::1] f, const double complex[::1] g,
                         double weight):
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i, m, k
    cdef double complex acc
    if g.shape[0] != n:
        raise ValueError("shape mismatch")
    out = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(n):
        acc = 0
        for m in range(n):
            k = i - m
            if k < 0:
                k += n
            acc = acc + f[m] * g[k]
        o[i] = acc * weight
    return out


def circular_convolve_2d(const double complex[:, ::1] f, const double complex[:, ::1] g,
                         double weight):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1]
    cdef Py_ssize_t i0, i1, m0, m1, k0, k1
    cdef double complex acc
    if g.shape[0] != n0 or g.shape[1] != n1:
        raise ValueError("shape mismatch")
    out = np.zeros((n0, n1), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for i0 in range(n0):
        for i1 in range(n1):
            acc = 0
            for m0 in range(n0):
                k0 = i0 - m0
                if k0 < 0:
                    k0 += n0
                for m1 in range(n1):
                    k1 = i1 - m1
                    if k1 < 0:
                        k1 += n1
                    acc = acc + f[m0, m1] * g[k0, k1]
            o[i0, i1] = acc * weight
    return out


def modulus_rows(const double complex[:, ::1] x):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef Py_ssize_t r, c
    cdef double re, im, q, s
    mod = np.empty((rows, cols), dtype=np.float64)
    energy = np.empty(rows, dtype=np.float64)
    cdef double[:, ::1] mv = mod
    cdef double[::1] ev = energy
    for r in range(rows):
        s = 0.0
        for c in range(cols):
            re = x[r, c].real
            im = x[r, c].imag
            q = re * re + im * im
            mv[r, c] = sqrt(q)
            s += q
        ev[r] = s
    return mod, energy

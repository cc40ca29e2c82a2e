"""Brute-force reference implementations, independent of the FFT path."""
import itertools

import numpy as np


def _bins(shape):
    return list(itertools.product(*[range(n) for n in shape]))


def brute_dft(values, spacing):
    """f̂[k] = (∏Δ) Σ_n f[n] exp(-2πi k·n/N) by explicit summation."""
    values = np.asarray(values, dtype=complex)
    shape = values.shape
    w = float(np.prod(spacing))
    out = np.zeros(shape, dtype=complex)
    idx = _bins(shape)
    for k in idx:
        acc = 0j
        for n in idx:
            arg = sum(ki * ni / N for ki, ni, N in zip(k, n, shape))
            acc += values[n] * np.exp(-2j * np.pi * arg)
        out[k] = w * acc
    return out


def brute_idft(values, spacing):
    values = np.asarray(values, dtype=complex)
    shape = values.shape
    M = int(np.prod(shape))
    w = float(np.prod(spacing))
    out = np.zeros(shape, dtype=complex)
    idx = _bins(shape)
    for n in idx:
        acc = 0j
        for k in idx:
            arg = sum(ki * ni / N for ki, ni, N in zip(k, n, shape))
            acc += values[k] * np.exp(2j * np.pi * arg)
        out[n] = acc / (M * w)
    return out


def brute_circular_convolve(f, g, spacing):
    """(f*g)[n] = (∏Δ) Σ_m f[m] g[n-m mod N] by explicit loops."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    shape = f.shape
    w = float(np.prod(spacing))
    out = np.zeros(shape, dtype=complex)
    idx = _bins(shape)
    for n in idx:
        acc = 0j
        for m in idx:
            j = tuple((a - b) % N for a, b, N in zip(n, m, shape))
            acc += f[m] * g[j]
        out[n] = w * acc
    return out


def naive_scatter(values, spacing, output_response, peripherals, max_depth):
    """Full path enumeration using only the brute-force transforms.

    ``peripherals`` maps label -> frequency response.  Returns a dict
    path -> output array.
    """
    kernels = {lab: brute_idft(r, spacing) for lab, r in peripherals.items()}
    g0 = brute_idft(output_response, spacing)
    out = {}
    layer = {(): np.asarray(values, dtype=complex)}
    for depth in range(max_depth + 1):
        for p, u in layer.items():
            out[p] = brute_circular_convolve(u, g0, spacing)
        if depth == max_depth:
            break
        layer = {p + (lab,): np.abs(brute_circular_convolve(u, kernels[lab], spacing))
                 for p, u in layer.items() for lab in sorted(peripherals)}
    return out

"""Reference (numpy) implementations of the compiled kernels.

Selected automatically when the Cython extension is unavailable, and used
by the benchmark and the backend cross-check tests.
"""
import numpy as np


def circular_convolve(f, g, weight):
    """Direct periodic convolution ``weight * sum_m f[m] g[(n - m) mod N]``.

    O(N^2) in the total sample count; works for any array rank.
    """
    f = np.ascontiguousarray(f, dtype=np.complex128)
    g = np.ascontiguousarray(g, dtype=np.complex128)
    if f.shape != g.shape:
        raise ValueError(f"shape mismatch {f.shape} vs {g.shape}")
    axes = tuple(range(f.ndim))
    out = np.zeros_like(f)
    for idx in np.ndindex(f.shape):
        v = f[idx]
        if v != 0:
            out += v * np.roll(g, idx, axis=axes)
    return out * weight


def modulus_rows(x):
    """Row-wise modulus of a 2-D complex array plus per-row sum of squares."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    mod = np.abs(x)
    return mod, np.einsum("ij,ij->i", mod, mod)

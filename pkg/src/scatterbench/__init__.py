"""Generalized scattering transforms on periodic grids.

Modules
-------
sigkit
    Grids, signals, spectra, Fourier transform, translation, convolution.
framekit
    Filter banks (Meyer-type wavelets, uniform coverings), frame validation
    and coherent sequences.
scatter
    Propagator, truncated scattering transform and energy ledger.
verify
    Certification checks and seeded trial harnesses.
cli
    Command-line driver.
"""
from ._kernels import BACKEND
from .errors import ConstructionError, RefusalError, StructuralError
from .framekit import (FilterBank, UniformCoveringParams, WaveletParams,
                       build_coherent_sequence, build_uniform_covering_bank,
                       build_wavelet_bank, validate_bessel, validate_parseval)
from .scatter import (ScatteringCoefficients, TruncationPolicy, l2l2_norm,
                      propagate, scatter, scatter_distance)
from .sigkit import (FrequencyFilter, Grid, Signal, Spectrum, convolve, dft,
                     idft, l2_norm, modulus, translate)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConstructionError", "RefusalError", "StructuralError",
    "FilterBank", "UniformCoveringParams", "WaveletParams",
    "build_coherent_sequence", "build_uniform_covering_bank", "build_wavelet_bank",
    "validate_bessel", "validate_parseval",
    "ScatteringCoefficients", "TruncationPolicy", "l2l2_norm", "propagate",
    "scatter", "scatter_distance",
    "FrequencyFilter", "Grid", "Signal", "Spectrum", "convolve", "dft", "idft",
    "l2_norm", "modulus", "translate",
]

"""Deterministic test-signal generators."""
from __future__ import annotations

import numpy as np

from .errors import StructuralError
from .sigkit import Grid, Signal, l2_norm

DEFAULT_BANDLIMIT = 0.8


def trial_rng(seed: int, *index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


def band_mask(grid: Grid, bandlimit: float = DEFAULT_BANDLIMIT) -> np.ndarray:
    """Bins with |ξ_i| <= bandlimit · Nyquist_i on every axis."""
    if not 0 < bandlimit <= 1:
        raise StructuralError("bandlimit must lie in (0, 1]")
    mask = np.ones(grid.shape, dtype=bool)
    for x, nyq in zip(grid.frequencies, grid.nyquist):
        mask &= np.abs(x) <= bandlimit * nyq
    return mask


def bandlimited_noise(grid: Grid, rng: np.random.Generator,
                      bandlimit: float = DEFAULT_BANDLIMIT, normalize: bool = True) -> Signal:
    """Complex white noise with its spectrum zeroed beyond ``bandlimit`` x Nyquist."""
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spec[~band_mask(grid, bandlimit)] = 0
    f = Signal(grid, np.fft.ifftn(spec))
    if normalize:
        n = l2_norm(f)
        if n > 0:
            f = f * (1.0 / n)
    return f


def delta(grid: Grid, at=None, amplitude: complex = 1.0) -> Signal:
    v = np.zeros(grid.shape, dtype=np.complex128)
    v[tuple(at) if at is not None else (0,) * grid.dims] = amplitude
    return Signal(grid, v)


def gabor(grid: Grid, center, width: float, frequency) -> Signal:
    """Periodized Gaussian envelope of the given width times a complex carrier."""
    pos = grid.positions()
    period = [n * s for n, s in zip(grid.sizes, grid.spacing)]
    r2 = 0
    phase = 0
    for x, c, L, k in zip(pos, np.atleast_1d(center), period, np.atleast_1d(frequency)):
        dx = (x - c + L / 2) % L - L / 2
        r2 = r2 + dx * dx
        phase = phase + k * dx
    return Signal(grid, np.exp(-0.5 * r2 / width**2) * np.exp(2j * np.pi * phase))


def random_shift(grid: Grid, rng: np.random.Generator, c_min: float, c_max: float) -> np.ndarray:
    """Shift with log-uniform magnitude in [c_min, c_max] and random direction."""
    mag = np.exp(rng.uniform(np.log(c_min), np.log(c_max)))
    direction = rng.standard_normal(grid.dims)
    direction /= np.linalg.norm(direction)
    return mag * direction

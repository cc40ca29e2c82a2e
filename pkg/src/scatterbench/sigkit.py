"""Periodic sampled signals and the spectral operations on them.

Signals live on a periodic lattice with per-axis sample count ``N_i`` and
spacing ``Δ_i``.  The Fourier transform uses the 2π-in-the-exponent
convention with quadrature weights,

    f̂[k] = (∏Δ_i) Σ_n f[n] exp(-2πi k·n/N),

so frequencies are in cycles per physical unit, translation by ``c`` is
multiplication by ``exp(-2πi ξ·c)`` and Plancherel reads
``(∏Δ_i) Σ|f|² = (∏ 1/(N_iΔ_i)) Σ|f̂|²``.  On this model the identities used
by the translation bound hold exactly, up to floating point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Sequence

import numpy as np

from . import _kernels
from .errors import RefusalError, StructuralError

#: Direct-summation convolution is refused above this many samples.
NAIVE_MAX_SAMPLES = 4096


def _frozen(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Grid:
    """Periodic sampling lattice.

    ``sizes`` are the per-axis sample counts (even, >= 2) and ``spacing`` the
    per-axis physical sample spacing.  Frequency bin ``k`` maps to
    ``k'/(N_i Δ_i)`` with ``k'`` wrapped into ``[-N_i/2, N_i/2)``; the Nyquist
    bin is therefore the negative frequency ``-1/(2Δ_i)``.
    """

    sizes: tuple[int, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in np.atleast_1d(self.sizes))
        spacing = tuple(float(s) for s in np.atleast_1d(self.spacing))
        if len(spacing) == 1 and len(sizes) > 1:
            spacing = spacing * len(sizes)
        if len(sizes) not in (1, 2):
            raise StructuralError(f"only d=1 or d=2 grids are supported, got d={len(sizes)}")
        if len(spacing) != len(sizes):
            raise StructuralError("sizes and spacing must have the same length")
        for n in sizes:
            if n < 2 or n % 2:
                raise StructuralError(f"axis sizes must be even and >= 2, got {n}")
        for s in spacing:
            if not (np.isfinite(s) and s > 0):
                raise StructuralError(f"spacing must be finite and positive, got {s}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "spacing", spacing)

    @classmethod
    def regular(cls, n, d=1, spacing=1.0):
        return cls((n,) * d, (spacing,) * d)

    @property
    def dims(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @cached_property
    def size(self) -> int:
        return int(np.prod(self.sizes))

    @cached_property
    def cell_volume(self) -> float:
        """Quadrature weight ∏Δ_i."""
        return float(np.prod(self.spacing))

    @cached_property
    def frequency_cell(self) -> float:
        """Spectral quadrature weight ∏ 1/(N_i Δ_i)."""
        return float(np.prod([1.0 / (n * s) for n, s in zip(self.sizes, self.spacing)]))

    @property
    def nyquist(self) -> tuple[float, ...]:
        return tuple(1.0 / (2.0 * s) for s in self.spacing)

    @property
    def bin_width(self) -> tuple[float, ...]:
        return tuple(1.0 / (n * s) for n, s in zip(self.sizes, self.spacing))

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dims, 0))

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Per-axis frequency arrays broadcast to the full grid shape."""
        axes_1d = [np.fft.fftfreq(n, d=s) for n, s in zip(self.sizes, self.spacing)]
        mesh = np.meshgrid(*axes_1d, indexing="ij")
        for m in mesh:
            m.flags.writeable = False
        return tuple(mesh)

    @cached_property
    def frequency_magnitude(self) -> np.ndarray:
        """Euclidean norm |ξ_k| at every bin."""
        mag = np.sqrt(sum(x * x for x in self.frequencies))
        mag.flags.writeable = False
        return mag

    def positions(self) -> tuple[np.ndarray, ...]:
        axes_1d = [np.arange(n) * s for n, s in zip(self.sizes, self.spacing)]
        return tuple(np.meshgrid(*axes_1d, indexing="ij"))

    def to_dict(self):
        return {"sizes": list(self.sizes), "spacing": list(self.spacing)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["sizes"]), tuple(d["spacing"]))


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex samples ``f[n]`` on a periodic grid (stand-in for f ∈ L²)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size != self.grid.size:
            raise StructuralError(
                f"value count {v.size} does not match grid size {self.grid.size}"
            )
        v = _frozen(v.reshape(self.grid.shape))
        if not np.all(np.isfinite(v)):
            raise StructuralError("signal values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return Signal(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return Signal(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return Signal(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """DFT coefficients ``f̂[k]`` under the package convention."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size != self.grid.size:
            raise StructuralError(
                f"value count {v.size} does not match grid size {self.grid.size}"
            )
        object.__setattr__(self, "values", _frozen(v.reshape(self.grid.shape)))


def measure_radius(grid, response, threshold=0.0):
    """Largest |ξ_k| over bins where ``|response| > threshold`` (0 if none)."""
    mask = np.abs(response) > threshold
    if not mask.any():
        return 0.0
    return float(grid.frequency_magnitude[mask].max())


@dataclass(frozen=True, eq=False)
class FrequencyFilter:
    """Sampled frequency response ĝ(ξ_k) with its label and support radius.

    ``support_radius`` is recomputed from the response when omitted; when
    given it must agree with the recomputed value.  ``threshold`` is the
    magnitude below which a bin counts as zero for that measurement (exact
    zero test by default).
    """

    grid: Grid
    response: np.ndarray
    label: Hashable
    support_radius: float | None = None
    threshold: float = field(default=0.0)

    def __post_init__(self):
        r = np.asarray(self.response)
        if r.size != self.grid.size:
            raise StructuralError(
                f"response size {r.size} does not match grid size {self.grid.size}"
            )
        r = _frozen(r.reshape(self.grid.shape))
        if not np.all(np.isfinite(r)):
            raise StructuralError(f"filter {self.label!r} has non-finite response")
        object.__setattr__(self, "response", r)
        measured = measure_radius(self.grid, r, self.threshold)
        if self.support_radius is None:
            object.__setattr__(self, "support_radius", measured)
        elif float(self.support_radius) != measured:
            raise StructuralError(
                f"filter {self.label!r}: stored support radius {self.support_radius} "
                f"!= measured {measured}"
            )


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise StructuralError(f"grid mismatch: {a} vs {b}")


def dft(f: Signal) -> Spectrum:
    g = f.grid
    return Spectrum(g, np.fft.fftn(f.values, axes=g.axes) * g.cell_volume)


def idft(F: Spectrum) -> Signal:
    g = F.grid
    return Signal(g, np.fft.ifftn(F.values, axes=g.axes) / g.cell_volume)


def l2_norm(f: Signal) -> float:
    """sqrt((∏Δ_i) Σ_n |f[n]|²)."""
    return float(np.sqrt(energy(f)))


def energy(f: Signal) -> float:
    v = f.values.ravel()
    return float(np.vdot(v, v).real) * f.grid.cell_volume


def spectral_energy(F: Spectrum) -> float:
    v = F.values.ravel()
    return float(np.vdot(v, v).real) * F.grid.frequency_cell


def _integer_steps(grid, c):
    """Per-axis shift in samples if ``c`` is an exact multiple of Δ, else None."""
    steps = []
    for ci, s in zip(c, grid.spacing):
        q = ci / s
        if q != np.round(q) or q * s != ci:
            return None
        steps.append(int(np.round(q)))
    return tuple(steps)


def phase_factor(grid: Grid, c) -> np.ndarray:
    """exp(-2πi ξ_k·c) on every bin."""
    arg = sum(x * ci for x, ci in zip(grid.frequencies, c))
    return np.exp(-2j * np.pi * arg)


def translate(f: Signal, c: Sequence[float]) -> Signal:
    """T_c f = f(· - c), with ``c`` in physical units.

    Shifts that are exact multiples of the spacing are applied as circular
    index rotations (bit-exact); fractional shifts use band-limited
    interpolation, i.e. multiplication of the spectrum by exp(-2πi ξ·c).
    The two agree for integer shifts up to FFT roundoff.
    """
    g = f.grid
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.shape != (g.dims,):
        raise StructuralError(f"shift must have {g.dims} components, got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise StructuralError("shift must be finite")
    steps = _integer_steps(g, c)
    if steps is not None:
        return Signal(g, np.roll(f.values, steps, axis=tuple(range(g.dims))))
    F = np.fft.fftn(f.values, axes=g.axes)
    return Signal(g, np.fft.ifftn(F * phase_factor(g, c), axes=g.axes))


def convolve(f: Signal, g: FrequencyFilter) -> Signal:
    """f * g computed as idft(f̂ · ĝ)."""
    _check_same_grid(f.grid, g.grid)
    ax = f.grid.axes
    return Signal(f.grid, np.fft.ifftn(np.fft.fftn(f.values, axes=ax) * g.response, axes=ax))


def modulus(f: Signal) -> Signal:
    return Signal(f.grid, np.abs(f.values))


def spatial_kernel(g: FrequencyFilter) -> Signal:
    """The filter realized in space, g[n] = idft(ĝ)[n]."""
    return idft(Spectrum(g.grid, g.response))


def naive_convolve(f: Signal, g: FrequencyFilter) -> Signal:
    """Circular convolution by direct summation in space.

    ``(f*g)[n] = (∏Δ_i) Σ_m f[m] g[n-m]`` with ``g`` realized by the inverse
    DFT.  Quadratic in the sample count, hence refused above
    ``NAIVE_MAX_SAMPLES``.
    """
    _check_same_grid(f.grid, g.grid)
    if f.grid.size > NAIVE_MAX_SAMPLES:
        raise RefusalError(
            f"naive convolution refused for {f.grid.size} samples "
            f"(limit {NAIVE_MAX_SAMPLES})",
            limit=NAIVE_MAX_SAMPLES,
        )
    kern = spatial_kernel(g).values
    out = _kernels.circular_convolve(f.values, kern, f.grid.cell_volume)
    return Signal(f.grid, out)

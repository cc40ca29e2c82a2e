"""Semi-discrete Bessel sequences on the DFT grid.

A :class:`FilterBank` holds one output-generating filter ``g0`` (label
``"output"``) and an ordered set of peripheral filters ``g_λ``.  Two builders
are provided:

* :func:`build_wavelet_bank` -- dilations (and, in 2-D, rotations) of a
  Meyer-type mother wavelet whose squared responses tile frequency space,
  with the low-pass ``φ̂_J`` defined as the exact complement of the
  peripherals kept at cutoff ``J``;
* :func:`build_uniform_covering_bank` -- smooth compactly supported bumps
  on a frequency lattice, normalized to a pointwise partition of unity.

Both produce Parseval banks: ``|ĝ0|² + Σ|ĝ_λ|² = 1`` at every bin.
Banks are not required to satisfy the Bessel bound at construction time
(imported or hand-made banks may violate it); use :func:`validate_bessel`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConstructionError, RefusalError, StructuralError
from .sigkit import FrequencyFilter, Grid, measure_radius

OUTPUT = "output"

#: Tolerance on the Bessel bound and on the Parseval identity.
FRAME_TOL = 1e-10
#: Peripheral responses must agree to this level across a coherent sequence.
NESTING_TOL = 1e-14

WAVELET = "wavelet"
COVERING = "uniform-covering"
CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class FilterBank:
    output: FrequencyFilter
    peripherals: tuple[FrequencyFilter, ...]
    family: str = CUSTOM
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        per = tuple(sorted(self.peripherals, key=lambda g: g.label))
        object.__setattr__(self, "peripherals", per)
        grid = self.output.grid
        labels = [g.label for g in per]
        if self.output.label != OUTPUT:
            raise StructuralError(f"output filter must carry label {OUTPUT!r}")
        if OUTPUT in labels:
            raise StructuralError(f"label {OUTPUT!r} is reserved for the output filter")
        if len(set(labels)) != len(labels):
            raise StructuralError("peripheral labels must be unique")
        for g in per:
            if g.grid != grid:
                raise StructuralError(f"filter {g.label!r} lives on a different grid")

    @property
    def grid(self) -> Grid:
        return self.output.grid

    @property
    def labels(self) -> tuple:
        return tuple(g.label for g in self.peripherals)

    @cached_property
    def _index(self):
        return {g.label: i for i, g in enumerate(self.peripherals)}

    def peripheral(self, label) -> FrequencyFilter:
        try:
            return self.peripherals[self._index[label]]
        except KeyError:
            raise StructuralError(f"unknown peripheral label {label!r}") from None

    def has_label(self, label) -> bool:
        return label in self._index

    @cached_property
    def stack(self) -> np.ndarray:
        """Peripheral responses stacked along a leading axis."""
        if not self.peripherals:
            return np.zeros((0,) + self.grid.shape, dtype=np.complex128)
        s = np.stack([g.response for g in self.peripherals])
        s.flags.writeable = False
        return s

    @cached_property
    def peripheral_power(self) -> np.ndarray:
        """Σ_λ |ĝ_λ|² at every bin."""
        p = np.sum(np.abs(self.stack) ** 2, axis=0) if self.peripherals else np.zeros(self.grid.shape)
        p.flags.writeable = False
        return p

    @property
    def D(self) -> float:
        """Frequency support radius of the output-generating filter."""
        return measure_radius(self.grid, self.output.response, 0.0)

    def total_power(self) -> np.ndarray:
        return np.abs(self.output.response) ** 2 + self.peripheral_power


@dataclass(frozen=True)
class WaveletParams:
    """``J``: scale cutoff, Λ_J = {2^j r : j > -J}.

    ``n_rotations`` is the order of the rotation group in 2-D; in 1-D the
    group is {+1, -1} and the value is ignored.  ``transition_width`` is the
    width, in octaves, of the Meyer transition between adjacent scales
    (smaller is sharper).
    """

    J: int
    n_rotations: int = 4
    transition_width: float = 1.0

    def __post_init__(self):
        if int(self.J) != self.J or self.J < 1:
            raise StructuralError(f"J must be an integer >= 1, got {self.J}")
        if self.n_rotations < 1:
            raise StructuralError("n_rotations must be >= 1")
        if not (0 < self.transition_width <= 1):
            raise StructuralError("transition_width must lie in (0, 1]")


@dataclass(frozen=True)
class UniformCoveringParams:
    """Bump lattice in frequency space (physical units, cycles per unit)."""

    lattice_spacing: float
    bump_radius: float
    origin_radius: float

    def __post_init__(self):
        if not (self.lattice_spacing > 0 and self.bump_radius > 0):
            raise StructuralError("lattice_spacing and bump_radius must be positive")
        if not self.origin_radius > 0:
            raise StructuralError("origin_radius must be positive")
        if not self.lattice_spacing < 2 * self.bump_radius:
            raise StructuralError("lattice_spacing must be < 2 * bump_radius for a covering")

    @classmethod
    def default_for(cls, grid: Grid, lattice_fraction=0.25):
        """Lattice step = ``lattice_fraction`` x Nyquist, bumps of radius one step."""
        a = min(grid.nyquist) * lattice_fraction
        return cls(lattice_spacing=a, bump_radius=a, origin_radius=a / 2)


# ---------------------------------------------------------------- profiles

def _meyer_nu(x):
    x = np.clip(x, 0.0, 1.0)
    return x**4 * (35 - 84 * x + 70 * x**2 - 20 * x**3)


_SNAP = 1e-12


def smooth_step(x):
    """Nondecreasing C³ step from 0 (x <= 0) to 1 (x >= 1).

    ``smooth_step(x) + smooth_step(1 - x) == 1``; values within 1e-12 of the
    ends are snapped so supports have clean edges on the grid.
    """
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * np.pi * _meyer_nu(x)) ** 2
    s = np.where(x <= _SNAP, 0.0, s)
    return np.where(x >= 1 - _SNAP, 1.0, s)


def _octave_step(t, width):
    """Step in log-frequency centred on t = 0 with the given width."""
    return smooth_step((t + 0.5 * width) / width)


def octave_window(t, width):
    """Squared radial window on one octave: Σ_j octave_window(t - j) = 1."""
    return _octave_step(t, width) - _octave_step(t - 1.0, width)


def angular_window(u, n_sectors, width):
    """Squared angular window of sector 0, u measured in sectors in [0, n)."""
    total = np.zeros_like(u)
    for m in (-1, 0, 1):
        v = u - m * n_sectors
        total = total + _octave_step(v, width) - _octave_step(v - 1.0, width)
    return total


# ----------------------------------------------------------------- wavelet

def _wavelet_reference(grid: Grid) -> float:
    """Frequency ξ0 such that scale j=0 occupies the octave [ξ0, 2ξ0] = [Nyq/2, Nyq]."""
    return 0.5 * min(grid.nyquist)


def _lowpass_cutoff(grid: Grid, J: int, width: float) -> float:
    return 2.0 * _wavelet_reference(grid) * 2.0 ** (-J + 0.5 * width)


def max_feasible_J(grid: Grid, transition_width: float = 1.0) -> int:
    """Largest J whose low-pass cutoff still spans at least two frequency bins."""
    ratio = 2.0 * _wavelet_reference(grid) * 2.0 ** (0.5 * transition_width) / (2.0 * max(grid.bin_width))
    return int(math.floor(math.log2(ratio))) if ratio >= 1 else 0


def _log_radius(grid: Grid):
    mag = grid.frequency_magnitude
    with np.errstate(divide="ignore"):
        return np.where(mag > 0, np.log2(np.where(mag > 0, mag, 1.0) / _wavelet_reference(grid)), -np.inf)


def _angle_sectors(grid: Grid, n: int):
    """Angular coordinate in sector units: u = θ n / 2π in [0, n)."""
    fx, fy = grid.frequencies
    theta = np.mod(np.arctan2(fy, fx), 2 * np.pi)
    return theta * n / (2 * np.pi)


def _wavelet_responses(grid: Grid, params: WaveletParams):
    """Yield (label, response) for every scale reaching the grid, j > -J."""
    t = _log_radius(grid)
    w = params.transition_width
    if grid.dims == 1:
        (fx,) = grid.frequencies
        orient = {1: fx > 0, -1: fx < 0}
    else:
        L = params.n_rotations
        u = _angle_sectors(grid, L)
        orient = {r: np.sqrt(np.clip(angular_window(np.mod(u - r, L), L, w), 0.0, 1.0)) for r in range(L)}
    j = -params.J + 1
    while True:
        radial = octave_window(t - j, w)
        finite_t = t[np.isfinite(t)]
        if finite_t.size and j - 0.5 * w >= finite_t.max():
            break
        if np.any(radial > 0):
            amp = np.sqrt(np.clip(radial, 0.0, 1.0))
            for r in sorted(orient):
                yield (j, r), amp * orient[r]
        j += 1


def build_wavelet_bank(grid: Grid, params: WaveletParams) -> FilterBank:
    """Meyer-type wavelet frame windowed at scale cutoff ``J``.

    Peripherals are ψ̂_{j,r}(ξ) for ``j > -J`` whose support meets the grid
    band; the output filter is the low-pass complement
    ``|φ̂_J|² = 1 - Σ_{λ∈Λ_J} |ψ̂_λ|²``, evaluated in closed form so that its
    support edge is exact.
    """
    fmax = max_feasible_J(grid, params.transition_width)
    if params.J > fmax:
        raise RefusalError(
            f"grid {grid.sizes} cannot resolve J={params.J}; max feasible J is {fmax}",
            max_feasible_J=fmax,
        )
    peripherals = [FrequencyFilter(grid, resp.astype(np.complex128), label)
                   for label, resp in _wavelet_responses(grid, params)]
    t = _log_radius(grid)
    low = 1.0 - _octave_step(t + params.J - 1, params.transition_width)
    out = FrequencyFilter(grid, np.sqrt(np.clip(low, 0.0, 1.0)).astype(np.complex128), OUTPUT)
    meta = {"J": params.J, "n_rotations": params.n_rotations if grid.dims == 2 else 2,
            "transition_width": params.transition_width}
    return FilterBank(out, tuple(peripherals), WAVELET, meta)


# ---------------------------------------------------------------- covering

def bump(r):
    """C^∞ radial bump, 1 at r = 0, supported on r < 1."""
    r = np.asarray(r, dtype=float)
    inside = r < 1
    out = np.zeros_like(r)
    ri = r[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ri * ri))
    return out


def _lattice_points(grid: Grid, a: float, R: float):
    ranges = []
    for nyq in grid.nyquist:
        m = int(math.floor((nyq + R) / a))
        ranges.append([k for k in range(-m, m + 1) if abs(k * a) < nyq + R])
    return itertools.product(*ranges)


def _covering_bumps(grid: Grid, params: UniformCoveringParams):
    a, R = params.lattice_spacing, params.bump_radius
    freqs = grid.frequencies
    out = []
    for m in _lattice_points(grid, a, R):
        dist = np.sqrt(sum((x - k * a) ** 2 for x, k in zip(freqs, m)))
        b = bump(dist / R)
        if np.any(b > 0):
            out.append((tuple(int(k) for k in m), b))
    return out


def build_uniform_covering_bank(grid: Grid, params: UniformCoveringParams) -> FilterBank:
    """Uniform covering frame from a lattice of smooth bumps.

    Each bump ``b(ξ - ξ_m)`` is supported in the open ball of radius
    ``bump_radius`` around ``ξ_m = m * lattice_spacing`` and divided by
    ``sqrt(Σ_m b_m²)`` so the squared responses sum to one.  Bumps centred
    within ``origin_radius`` of 0 are merged into the output filter.
    """
    bumps = _covering_bumps(grid, params)
    total = np.zeros(grid.shape)
    for _, b in bumps:
        total += b * b
    if not np.all(total > 0):
        idx = tuple(int(i) for i in np.argwhere(~(total > 0))[0])
        xi = tuple(float(x[idx]) for x in grid.frequencies)
        raise ConstructionError(f"covering gap at bin {idx} (ξ={xi}): no bump reaches it")
    norm = np.sqrt(total)
    a = params.lattice_spacing
    rho = params.origin_radius * (1 + 1e-12)
    origin = np.zeros(grid.shape)
    peripherals = []
    zero_bin = (0,) * grid.dims
    for m, b in bumps:
        if math.hypot(*(k * a for k in m)) <= rho:
            origin += b * b
        else:
            if b[zero_bin] > 0:
                raise ConstructionError(
                    f"bump {m} reaches ξ=0 but lies outside origin_radius={params.origin_radius}"
                )
            peripherals.append(FrequencyFilter(grid, (b / norm).astype(np.complex128), m))
    out = FrequencyFilter(grid, np.sqrt(origin / total).astype(np.complex128), OUTPUT)
    meta = {"lattice_spacing": params.lattice_spacing, "bump_radius": params.bump_radius,
            "origin_radius": params.origin_radius}
    return FilterBank(out, tuple(peripherals), COVERING, meta)


def bump_centre(bank: FilterBank, label) -> np.ndarray:
    return np.asarray(label, dtype=float) * bank.params["lattice_spacing"]


# -------------------------------------------------------------- validators

@dataclass(frozen=True)
class BesselReport:
    max_sum: float
    worst_bin: tuple
    passed: bool

    def to_dict(self):
        return {"max_sum": self.max_sum, "worst_bin": list(self.worst_bin), "pass": self.passed}


@dataclass(frozen=True)
class ParsevalReport:
    min_sum: float
    max_sum: float
    passed: bool

    def to_dict(self):
        return {"min_sum": self.min_sum, "max_sum": self.max_sum, "pass": self.passed}


def validate_bessel(bank: FilterBank, tol: float = FRAME_TOL) -> BesselReport:
    """Check max over bins of |ĝ0|² + Σ|ĝ_λ|² <= 1 + tol."""
    power = bank.total_power()
    flat = int(np.argmax(power))
    worst = tuple(int(i) for i in np.unravel_index(flat, power.shape))
    m = float(power.ravel()[flat])
    return BesselReport(m, worst, m <= 1 + tol)


def validate_parseval(bank: FilterBank, tol: float = FRAME_TOL) -> ParsevalReport:
    """Check |ĝ0|² + Σ|ĝ_λ|² = 1 at every bin, two-sided within ``tol``."""
    power = bank.total_power()
    lo, hi = float(power.min()), float(power.max())
    return ParsevalReport(lo, hi, (hi <= 1 + tol) and (lo >= 1 - tol))


def measure_support_radius(g: FrequencyFilter, threshold: float = 0.0) -> float:
    if threshold < 0:
        raise StructuralError("threshold must be >= 0")
    return measure_radius(g.grid, g.response, threshold)


# -------------------------------------------------------------- sequences

@dataclass(frozen=True, eq=False)
class CoherentSequence:
    """Filter banks indexed by ``J`` with nested peripherals and shrinking D_J."""

    banks: tuple[FilterBank, ...]
    J_values: tuple[int, ...]

    def __post_init__(self):
        if len(self.banks) != len(self.J_values):
            raise StructuralError("one J value per bank is required")
        if not self.banks:
            raise StructuralError("a coherent sequence needs at least one bank")
        object.__setattr__(self, "banks", tuple(self.banks))
        object.__setattr__(self, "J_values", tuple(int(j) for j in self.J_values))

    @property
    def d_values(self) -> tuple[float, ...]:
        return tuple(b.D for b in self.banks)

    def __len__(self):
        return len(self.banks)


@dataclass(frozen=True)
class CoherenceReport:
    nesting_pass: bool
    d_monotone_pass: bool
    d_values: tuple[float, ...]
    first_violation: str | None = None

    @property
    def passed(self):
        return self.nesting_pass and self.d_monotone_pass

    def to_dict(self):
        return {"nesting_pass": self.nesting_pass, "d_monotone_pass": self.d_monotone_pass,
                "d_values": list(self.d_values), "first_violation": self.first_violation}


def check_coherence(seq: CoherentSequence, tol: float = NESTING_TOL) -> CoherenceReport:
    nesting, violation = True, None
    for (ja, a), (jb, b) in zip(zip(seq.J_values, seq.banks), zip(seq.J_values[1:], seq.banks[1:])):
        for g in a.peripherals:
            if not b.has_label(g.label):
                nesting, violation = False, f"label {g.label!r} of J={ja} missing at J={jb}"
                break
            if np.max(np.abs(b.peripheral(g.label).response - g.response)) > tol:
                nesting, violation = False, f"label {g.label!r} differs between J={ja} and J={jb}"
                break
        if not nesting:
            break
    d = seq.d_values
    monotone = all(x > y for x, y in zip(d, d[1:]))
    return CoherenceReport(nesting, monotone, d, violation)


def build_coherent_sequence(grid: Grid, family: str, J_range: Sequence[int],
                            params=None) -> CoherentSequence:
    """Build banks for every ``J`` in ``J_range``.

    For the wavelet family ``params`` is a :class:`WaveletParams` whose ``J``
    is overridden per bank.  For the covering family the lattice of
    ``params`` is shared and the output region shrinks as
    ``origin_radius_J = params.origin_radius * 2**-J``; bumps leaving the
    output region become peripherals.  The default covering lattice uses a
    step of Nyquist/16 and ``origin_radius`` = Nyquist.
    """
    J_range = [int(j) for j in J_range]
    if not J_range:
        raise RefusalError("J_range must be nonempty")
    if family == WAVELET:
        base = params or WaveletParams(J=1)
        banks = [build_wavelet_bank(grid, WaveletParams(J, base.n_rotations, base.transition_width))
                 for J in J_range]
    elif family == COVERING:
        if params is None:
            a = min(grid.nyquist) / 16
            params = UniformCoveringParams(a, a, min(grid.nyquist))
        banks = []
        for J in J_range:
            p = UniformCoveringParams(params.lattice_spacing, params.bump_radius,
                                      params.origin_radius * 2.0 ** (-J))
            try:
                banks.append(build_uniform_covering_bank(grid, p))
            except ConstructionError as exc:
                raise RefusalError(f"J={J} infeasible: {exc}", J=J) from exc
    else:
        raise StructuralError(f"unknown family {family!r}")
    seq = CoherentSequence(tuple(banks), tuple(J_range))
    rep = check_coherence(seq)
    if not rep.passed:
        raise RefusalError(
            f"J range {J_range} does not yield a coherent sequence on this grid "
            f"(D_J = {list(rep.d_values)}; {rep.first_violation or 'D_J not strictly decreasing'})",
            d_values=rep.d_values,
        )
    return seq

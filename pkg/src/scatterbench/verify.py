"""Numeric certificates for the scattering-transform inequalities.

Every check returns a report object with a ``passed`` flag and a
``to_dict()`` suitable for JSON.  Checks whose hypothesis does not hold
(e.g. a bound asked of a bank that is not Bessel) raise
:class:`~scatterbench.errors.RefusalError` instead of reporting a failure.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import signals
from .errors import RefusalError, StructuralError
from .framekit import (COVERING, CoherentSequence, FilterBank, check_coherence,
                       validate_bessel, validate_parseval)
from .scatter import (TruncationPolicy, layer_energy_profile, propagate, scatter,
                      scatter_distance)
from .sigkit import (Signal, Spectrum, convolve, energy, idft, l2_norm,
                     translate)

#: Relative slack on the translation bound.
BOUND_TOL = 1e-9
#: Relative slack on non-expansiveness and the decay domination.
NONEXP_TOL = 1e-10
DECAY_TOL = 1e-10
#: Relative residual allowed in the telescoping energy identity.
TELESCOPE_TOL = 1e-9
#: Max pointwise deviation for integer-shift commutation.
COMMUTE_TOL = 1e-12

#: Certification runs evaluate the full truncated tree.
CERT_POLICY = TruncationPolicy(max_depth=3, prune_threshold=0.0)

REPORT_SCHEMA = "scatterbench.report/1"


def bank_id(bank: FilterBank) -> str:
    """Stable identifier: family plus a digest of every response."""
    h = hashlib.sha256()
    h.update(repr(bank.grid).encode())
    h.update(bank.output.response.tobytes())
    for g in bank.peripherals:
        h.update(repr(g.label).encode())
        h.update(g.response.tobytes())
    return f"{bank.family}:{h.hexdigest()[:16]}"


def _require_bessel(bank):
    rep = validate_bessel(bank)
    if not rep.passed:
        raise RefusalError(
            f"bank violates the Bessel bound (max Σ|ĝ|² = {rep.max_sum:.6g} at bin "
            f"{rep.worst_bin}); the inequality's hypothesis does not hold",
            max_sum=rep.max_sum,
        )


def _require_parseval(bank):
    rep = validate_parseval(bank)
    if not rep.passed:
        raise RefusalError(
            f"bank is not Parseval (Σ|ĝ|² in [{rep.min_sum:.6g}, {rep.max_sum:.6g}]); "
            "use check_energy_inequality for Bessel-only banks",
            min_sum=rep.min_sum, max_sum=rep.max_sum,
        )


def gradient_l1_norm(bank: FilterBank) -> float:
    """‖∇g0‖_{L¹} of the output filter realized in space."""
    grid = bank.grid
    sq = np.zeros(grid.shape)
    for xi in grid.frequencies:
        comp = idft(Spectrum(grid, 2j * np.pi * xi * bank.output.response)).values
        sq += np.abs(comp) ** 2
    return float(np.sum(np.sqrt(sq))) * grid.cell_volume


# ------------------------------------------------------------ translation

@dataclass
class BoundReport:
    lhs: float
    rhs_linear: float
    rhs_cap: float
    rhs: float
    ratio: float
    passed: bool
    c: list
    c_norm: float
    D: float
    f_norm: float
    seed: object = None
    bank: str = ""
    policy: dict = field(default_factory=dict)
    gradient_reference: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def check_translation_bound(f: Signal, c, bank: FilterBank,
                            policy: TruncationPolicy = CERT_POLICY, seed=None) -> BoundReport:
    """Compare ‖S f - S T_c f‖ against min(2πD|c|, 2)·‖f‖.

    Both transforms are evaluated over the path set retained for ``f``;
    dropping paths only removes nonnegative terms from the left side.
    """
    _require_bessel(bank)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    S1 = scatter(f, bank, policy)
    S2 = scatter(translate(f, c), bank, policy, paths=S1.paths)
    lhs = scatter_distance(S1, S2)
    D = bank.D
    fn = l2_norm(f)
    cn = float(np.linalg.norm(c))
    lin = 2 * math.pi * D * cn * fn
    cap = 2 * fn
    rhs = min(lin, cap)
    grad = None
    if bank.family == COVERING:
        grad = cn * gradient_l1_norm(bank) * fn
    return BoundReport(
        lhs=lhs, rhs_linear=lin, rhs_cap=cap, rhs=rhs,
        ratio=lhs / rhs if rhs > 0 else 0.0,
        passed=lhs <= rhs * (1 + BOUND_TOL),
        c=[float(x) for x in c], c_norm=cn, D=D, f_norm=fn, seed=seed,
        bank=bank_id(bank), policy=policy.to_dict(), gradient_reference=grad,
    )


def translation_sensitivity(f: Signal, direction, bank: FilterBank,
                            magnitudes: Sequence[float],
                            policy: TruncationPolicy = CERT_POLICY) -> list[tuple[float, float, float]]:
    """(|c|, lhs, lhs/|c|) along a fixed direction, for probing small shifts."""
    u = np.atleast_1d(np.asarray(direction, dtype=float))
    u = u / np.linalg.norm(u)
    S1 = scatter(f, bank, policy)
    rows = []
    for m in magnitudes:
        S2 = scatter(translate(f, m * u), bank, policy, paths=S1.paths)
        lhs = scatter_distance(S1, S2)
        rows.append((float(m), lhs, lhs / m))
    return rows


@dataclass
class SweepRow:
    J: int
    D: float
    lhs: float
    rhs: float
    ratio: float
    passed: bool

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


@dataclass
class SweepReport:
    rows: list
    bounds: list
    envelope_pass: bool
    passed: bool

    def to_dict(self):
        return {"rows": [r.to_dict() for r in self.rows],
                "bounds": [b.to_dict() for b in self.bounds],
                "envelope_pass": self.envelope_pass, "pass": self.passed}


def sweep_corollary(seq: CoherentSequence, f: Signal, c,
                    policy: TruncationPolicy = CERT_POLICY, seed=None) -> SweepReport:
    """Translation bound per J of a coherent sequence.

    Each row's ``rhs`` is the linear envelope 2πD_J|c|‖f‖, which shrinks
    with D_J.
    """
    coh = check_coherence(seq)
    if not coh.passed:
        raise RefusalError(
            f"sequence is not coherent (nesting={coh.nesting_pass}, "
            f"D decreasing={coh.d_monotone_pass}, D_J={list(coh.d_values)})"
        )
    rows, bounds = [], []
    for J, bank in zip(seq.J_values, seq.banks):
        rep = check_translation_bound(f, c, bank, policy, seed)
        env = rep.rhs_linear
        rows.append(SweepRow(J, rep.D, rep.lhs, env, rep.lhs / env if env > 0 else 0.0,
                             rep.lhs <= env * (1 + BOUND_TOL)))
        bounds.append(rep)
    last = rows[-1]
    envelope = last.lhs <= last.rhs * (1 + BOUND_TOL)
    return SweepReport(rows, bounds, envelope, envelope and all(r.passed for r in rows))


# ------------------------------------------------------- non-expansiveness

@dataclass
class NonExpansiveReport:
    dist: float
    bound: float
    passed: bool
    seed: object = None

    def to_dict(self):
        return {"dist": self.dist, "bound": self.bound, "pass": self.passed, "seed": self.seed}


def check_nonexpansive(f: Signal, g: Signal, bank: FilterBank,
                       policy: TruncationPolicy = CERT_POLICY, seed=None) -> NonExpansiveReport:
    _require_bessel(bank)
    Sf = scatter(f, bank, policy)
    Sg = scatter(g, bank, policy, paths=Sf.paths)
    dist = scatter_distance(Sf, Sg)
    bound = l2_norm(f - g)
    return NonExpansiveReport(dist, bound, dist <= bound * (1 + NONEXP_TOL), seed)


# ------------------------------------------------------------------ energy

@dataclass
class ConservationReport:
    residuals: list
    s_norm_gaps: list
    layer_energies: list
    output_energies: list
    input_energy: float
    passed: bool
    seed: object = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def check_energy_conservation(f: Signal, bank: FilterBank, max_depth: int,
                              seed=None) -> ConservationReport:
    """‖f‖² = Σ_{k<=M} ‖S[Λ^k]f‖² + ‖U[Λ^{M+1}]f‖² for every M <= max_depth."""
    _require_parseval(bank)
    S = scatter(f, bank, TruncationPolicy(max_depth, 0.0))
    total = S.input_energy
    residuals, gaps = [], []
    for M in range(max_depth + 1):
        captured = math.fsum(S.output_energies[: M + 1])
        tail = S.layer_energies[M + 1] if M < max_depth else S.residual_energy
        res = abs(total - (captured + tail))
        residuals.append(res / total if total > 0 else res)
        gaps.append(total - captured)
    return ConservationReport(residuals, gaps, list(S.layer_energies), list(S.output_energies),
                              total, all(r <= TELESCOPE_TOL for r in residuals), seed)


def check_energy_inequality(f: Signal, bank: FilterBank, max_depth: int) -> ConservationReport:
    """Bessel-bank counterpart: captured plus tail energy never exceeds ‖f‖²."""
    _require_bessel(bank)
    S = scatter(f, bank, TruncationPolicy(max_depth, 0.0))
    total = S.input_energy
    residuals, gaps, ok = [], [], True
    for M in range(max_depth + 1):
        captured = math.fsum(S.output_energies[: M + 1])
        tail = S.layer_energies[M + 1] if M < max_depth else S.residual_energy
        excess = captured + tail - total
        residuals.append(max(excess, 0.0) / total if total > 0 else max(excess, 0.0))
        gaps.append(total - captured)
        ok &= excess <= TELESCOPE_TOL * total
    return ConservationReport(residuals, gaps, list(S.layer_energies), list(S.output_energies),
                              total, bool(ok))


@dataclass
class DecayReport:
    energies: list
    budget: float
    c0_hat: float
    passed: bool
    input_energy: float = 0.0
    seed: object = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def check_energy_decay(f: Signal, bank: FilterBank, K_max: int, seed=None) -> DecayReport:
    """Geometric decay of layer energies for a uniform covering bank.

    ``energies[K-1] = ‖U[Λ^K]f‖²`` for K = 1..K_max, ``budget`` is
    ‖f‖² - ‖f*g0‖² and ``c0_hat`` the largest successive ratio
    e_K/e_{K-1}, K >= 2.  Passes iff c0_hat < 1 and
    e_K <= c0_hat^(K-1)·budget for every K (slack DECAY_TOL·‖f‖²).
    """
    if bank.family != COVERING:
        raise RefusalError(
            f"energy decay is certified for uniform covering banks only (got {bank.family!r}); "
            "wavelet layer energies may decay arbitrarily slowly"
        )
    _require_parseval(bank)
    if K_max < 1:
        raise StructuralError("K_max must be >= 1")
    prof = layer_energy_profile(f, bank, K_max)
    e = prof[1:]
    total = prof[0]
    budget = total - energy(convolve(f, bank.output))
    ratios = [e[k] / e[k - 1] if e[k - 1] > 0 else 0.0 for k in range(1, len(e))]
    c0 = max(ratios) if ratios else 0.0
    slack = DECAY_TOL * total
    dominated = all(e[K - 1] <= c0 ** (K - 1) * budget + slack for K in range(1, K_max + 1))
    return DecayReport(e, budget, c0, bool(c0 < 1 and dominated), total, seed)


# ------------------------------------------------------------- commutation

@dataclass
class CommuteReport:
    max_deviation: float
    shift_steps: list
    path: list
    passed: bool
    seed: object = None

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def check_propagator_translation_commutes(f: Signal, bank: FilterBank, path, shift_steps,
                                          tol: float = COMMUTE_TOL, seed=None) -> CommuteReport:
    """Max |U[p] T_c f - T_c U[p] f| for a shift of whole samples."""
    steps = np.atleast_1d(np.asarray(shift_steps))
    if not np.all(steps == np.round(steps)):
        raise RefusalError("shift must be an integer number of samples")
    c = steps.astype(float) * np.asarray(f.grid.spacing)
    a = propagate(translate(f, c), bank, path)
    b = translate(propagate(f, bank, path), c)
    dev = float(np.max(np.abs(a.values - b.values)))
    return CommuteReport(dev, [int(s) for s in steps], [_jsonable(x) for x in path], dev <= tol, seed)


def _jsonable(label):
    return list(label) if isinstance(label, tuple) else label


# ------------------------------------------------------------------ trials

def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SCATTERBENCH_THREADS", "1")))
    except ValueError:
        return 1


def run_trials(fn: Callable[[int], object], n: int, threads: int | None = None) -> list:
    """Evaluate ``fn(i)`` for i < n; results come back in index order."""
    threads = threads or thread_count()
    if threads == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(n)))


def translation_trials(bank: FilterBank, n: int, seed: int, c_min: float, c_max: float,
                       policy: TruncationPolicy = CERT_POLICY,
                       bandlimit: float = signals.DEFAULT_BANDLIMIT, threads=None) -> list[BoundReport]:
    grid = bank.grid

    def one(i):
        rng = signals.trial_rng(seed, i)
        f = signals.bandlimited_noise(grid, rng, bandlimit)
        c = signals.random_shift(grid, rng, c_min, c_max)
        return check_translation_bound(f, c, bank, policy, seed=[seed, i])

    return run_trials(one, n, threads)


def nonexpansive_trials(bank: FilterBank, n: int, seed: int,
                        policy: TruncationPolicy = CERT_POLICY,
                        bandlimit: float = signals.DEFAULT_BANDLIMIT, threads=None):
    grid = bank.grid

    def one(i):
        rng = signals.trial_rng(seed, i)
        f = signals.bandlimited_noise(grid, rng, bandlimit)
        g = signals.bandlimited_noise(grid, rng, bandlimit) * rng.uniform(0.1, 2.0)
        if i % 2:
            # nearby pairs stress the small-distance regime
            g = f + g * 1e-3
        return check_nonexpansive(f, g, bank, policy, seed=[seed, i])

    return run_trials(one, n, threads)


def conservation_trials(bank: FilterBank, n: int, seed: int, max_depth: int,
                        bandlimit: float = signals.DEFAULT_BANDLIMIT, threads=None):
    grid = bank.grid

    def one(i):
        f = signals.bandlimited_noise(grid, signals.trial_rng(seed, i), bandlimit)
        return check_energy_conservation(f, bank, max_depth, seed=[seed, i])

    return run_trials(one, n, threads)


def decay_trials(bank: FilterBank, n: int, seed: int, K_max: int,
                 bandlimit: float = signals.DEFAULT_BANDLIMIT, threads=None):
    grid = bank.grid

    def one(i):
        f = signals.bandlimited_noise(grid, signals.trial_rng(seed, i), bandlimit)
        return check_energy_decay(f, bank, K_max, seed=[seed, i])

    return run_trials(one, n, threads)


def random_path(bank: FilterBank, rng: np.random.Generator, depth: int) -> tuple:
    labels = bank.labels
    return tuple(labels[int(rng.integers(len(labels)))] for _ in range(depth))


def commute_trials(bank: FilterBank, n: int, seed: int, max_depth: int = 3,
                   bandlimit: float = signals.DEFAULT_BANDLIMIT, tol: float = COMMUTE_TOL,
                   threads=None):
    grid = bank.grid

    def one(i):
        rng = signals.trial_rng(seed, i)
        f = signals.bandlimited_noise(grid, rng, bandlimit)
        path = random_path(bank, rng, int(rng.integers(0, max_depth + 1)))
        steps = [int(rng.integers(-(size // 2), size // 2 + 1)) for size in grid.sizes]
        return check_propagator_translation_commutes(f, bank, path, steps, tol, seed=[seed, i])

    return run_trials(one, n, threads)

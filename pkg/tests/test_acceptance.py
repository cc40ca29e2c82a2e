"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines are collected in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
import json
import math
import time

import numpy as np
import pytest

from scatterbench import signals
from scatterbench.cli import main as cli_main
from scatterbench.framekit import (COVERING, WAVELET, UniformCoveringParams, WaveletParams,
                                   build_coherent_sequence, build_uniform_covering_bank,
                                   build_wavelet_bank, check_coherence, validate_bessel,
                                   validate_parseval)
from scatterbench.scatter import TruncationPolicy, scatter
from scatterbench.sigkit import Grid
from scatterbench.verify import (commute_trials, conservation_trials, decay_trials,
                                 nonexpansive_trials, sweep_corollary, translation_trials)

from oracles import naive_scatter

RESULTS = []

DEPTH3 = TruncationPolicy(3, 0.0)
DEPTH2 = TruncationPolicy(2, 0.0)
SEED = 20240917


def record(n, name, ok, detail, elapsed, budget):
    in_time = elapsed <= budget
    passed = bool(ok and in_time)
    limit = "no time budget" if math.isinf(budget) else f"budget {budget:.0f}s"
    line = (f"criterion {n} [{name}]: {'PASS' if passed else 'FAIL'} "
            f"{detail}; {elapsed:.1f}s ({limit})")
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


@pytest.fixture(scope="module")
def wavelet_256():
    return build_wavelet_bank(Grid.regular(256), WaveletParams(4))


@pytest.fixture(scope="module")
def covering_64():
    g = Grid.regular(64)
    return build_uniform_covering_bank(g, UniformCoveringParams.default_for(g))


def test_criterion_1_translation_bound(wavelet_256):
    t = time.perf_counter()
    r1 = translation_trials(wavelet_256, 1000, SEED, 1e-3, 50.0, DEPTH3)
    bank2 = build_wavelet_bank(Grid.regular(64, d=2), WaveletParams(3))
    r2 = translation_trials(bank2, 100, SEED + 1, 1e-3, 50.0, DEPTH2)
    el = time.perf_counter() - t
    reps = r1 + r2
    linear = sum(r.rhs == r.rhs_linear for r in reps)
    capped = len(reps) - linear
    fails = sum(not r.passed for r in reps)
    worst = max(r.ratio for r in reps)
    ok = fails == 0 and linear > 0 and capped > 0
    record(1, "translation bound", ok,
           f"{len(reps)} trials, {fails} violations, worst lhs/rhs={worst:.4f}, "
           f"{linear} linear-regime / {capped} capped", el, 300)


def test_criterion_2_corollary_sweep():
    t = time.perf_counter()
    c = [0.73]
    details, ok = [], True
    for family, grid, J_range in [(WAVELET, Grid.regular(256), range(1, 6)),
                                  (COVERING, Grid.regular(128), range(1, 5))]:
        seq = build_coherent_sequence(grid, family, J_range)
        coh = check_coherence(seq)
        f = signals.bandlimited_noise(grid, signals.trial_rng(SEED, 2))
        rep = sweep_corollary(seq, f, c, DEPTH3, seed=[SEED, 2])
        D = seq.d_values
        good = coh.passed and rep.passed and rep.envelope_pass and all(a > b for a, b in zip(D, D[1:]))
        if family == WAVELET:
            ratios = [b / a for a, b in zip(D, D[1:])]
            good = good and all(0.45 <= r <= 0.55 for r in ratios)
            details.append(f"wavelet D ratios {[round(r, 3) for r in ratios]}")
        details.append(f"{family} {len(rep.rows)} rows max ratio {max(r.ratio for r in rep.rows):.3f}")
        ok = ok and good
    record(2, "corollary sweep", ok, "; ".join(details), time.perf_counter() - t, 120)


def test_criterion_3_oracle_equivalence():
    t = time.perf_counter()
    g = Grid.regular(16)
    worst = 0.0
    for bank in [build_wavelet_bank(g, WaveletParams(2)),
                 build_uniform_covering_bank(g, UniformCoveringParams.default_for(g))]:
        f = signals.bandlimited_noise(g, signals.trial_rng(SEED, 3), 1.0)
        S = scatter(f, bank, DEPTH2)
        ref = naive_scatter(f.values, g.spacing, bank.output.response,
                            {x.label: x.response for x in bank.peripherals}, 2)
        assert set(ref) == set(S.paths)
        worst = max(worst, max(float(np.max(np.abs(S.outputs[p].values - v))) for p, v in ref.items()))
    record(3, "oracle equivalence", worst <= 1e-10, f"max coefficient deviation {worst:.2e}",
           time.perf_counter() - t, 10)


def test_criterion_4_frame_certificates():
    t = time.perf_counter()
    worst_b, worst_p, ok = 0.0, 0.0, True
    for grid in [Grid.regular(64), Grid.regular(256), Grid.regular(64, d=2)]:
        for bank in [build_wavelet_bank(grid, WaveletParams(3)),
                     build_uniform_covering_bank(grid, UniformCoveringParams.default_for(grid))]:
            b, p = validate_bessel(bank), validate_parseval(bank)
            worst_b = max(worst_b, abs(b.max_sum - 1))
            worst_p = max(worst_p, abs(p.max_sum - 1), abs(p.min_sum - 1))
            ok = ok and b.passed and p.passed and abs(b.max_sum - 1) <= 1e-10
    record(4, "frame certificates", ok,
           f"6 banks, max |max_sum-1|={worst_b:.1e}, max Parseval deviation={worst_p:.1e}",
           time.perf_counter() - t, 30)


def test_criterion_5_energy_telescoping(wavelet_256, covering_64):
    t = time.perf_counter()
    reps = conservation_trials(wavelet_256, 100, SEED + 5, 3)
    reps += conservation_trials(covering_64, 100, SEED + 6, 3)
    worst = max(max(r.residuals) for r in reps)
    fails = sum(not r.passed for r in reps)
    record(5, "energy telescoping", fails == 0 and worst <= 1e-9,
           f"{len(reps)} signals (wavelet + covering), M=0..3, worst relative residual {worst:.1e}",
           time.perf_counter() - t, 60)


def test_criterion_6_exponential_decay(covering_64):
    t = time.perf_counter()
    reps = decay_trials(covering_64, 50, SEED + 7, 4)
    c0 = max(r.c0_hat for r in reps)
    fails = sum(not r.passed for r in reps)
    record(6, "exponential decay", fails == 0 and c0 < 1,
           f"50 signals, K_max=4, largest c0_hat={c0:.4f}, {fails} domination failures",
           time.perf_counter() - t, 120)


def test_criterion_7_nonexpansive(wavelet_256, covering_64):
    t = time.perf_counter()
    reps = nonexpansive_trials(wavelet_256, 200, SEED + 8, DEPTH3)
    reps += nonexpansive_trials(covering_64, 200, SEED + 9, DEPTH3)
    worst = max(r.dist / r.bound for r in reps)
    fails = sum(not r.passed for r in reps)
    record(7, "non-expansiveness", fails == 0,
           f"{len(reps)} pairs over 2 families, worst dist/bound={worst:.4f}", time.perf_counter() - t, 60)


def test_criterion_8_commutation(wavelet_256):
    t = time.perf_counter()
    reps = commute_trials(wavelet_256, 100, SEED + 10, 3, tol=1e-10)
    worst = max(r.max_deviation for r in reps)
    record(8, "propagator commutation", all(r.passed for r in reps) and worst <= 1e-10,
           f"100 trials, depth<=3, max deviation {worst:.1e}", time.perf_counter() - t, 30)


CHECK_CONFIGS = {
    "translation-bound": {"trials": 20, "max_depth": 2},
    "sweep": {"max_depth": 2},
    "nonexpansive": {"trials": 10, "max_depth": 2},
    "conservation": {"trials": 10, "max_depth": 2},
    "decay": {"trials": 10, "family": "uniform-covering", "N": 64},
    "commute": {"trials": 10},
}


def test_criterion_9_reproducibility(tmp_path):
    t = time.perf_counter()
    same = []
    for check, cfg in CHECK_CONFIGS.items():
        p = tmp_path / f"{check}.cfg.json"
        p.write_text(json.dumps({**cfg, "seed": SEED}))
        out = tmp_path / check
        blobs = []
        for _ in range(2):
            assert cli_main(["verify", check, "--config", str(p), "--out", str(out)]) == 0
            blobs.append(((out / f"{check}.json").read_bytes(), (out / f"{check}.csv").read_bytes()))
        same.append(blobs[0] == blobs[1])
    record(9, "reproducibility", all(same), f"{sum(same)}/{len(same)} verify subcommands bit-identical",
           time.perf_counter() - t, math.inf)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatterbench.errors import StructuralError
from scatterbench.framekit import (OUTPUT, FilterBank, UniformCoveringParams, WaveletParams,
                                   build_uniform_covering_bank, build_wavelet_bank)
from scatterbench.scatter import (CoefficientMap, ScatteringCoefficients, TruncationPolicy,
                                  l2l2_norm, layer_energy_profile, path_order, propagate,
                                  scatter, scatter_distance)
from scatterbench.sigkit import FrequencyFilter, Grid, Signal, convolve, energy, l2_norm, translate

from conftest import random_signal
from oracles import brute_circular_convolve, brute_idft, naive_scatter


def small_banks():
    g1 = Grid.regular(16)
    g2 = Grid((4, 4), (1.0, 0.5))
    return [
        build_wavelet_bank(g1, WaveletParams(2)),
        build_uniform_covering_bank(g1, UniformCoveringParams.default_for(g1)),
        build_wavelet_bank(Grid.regular(8, d=2), WaveletParams(1)),
        build_uniform_covering_bank(g2, UniformCoveringParams(0.5, 0.5, 0.25)),
    ]


BANKS = small_banks()


def _oracle(f, bank, depth):
    per = {g.label: g.response for g in bank.peripherals}
    return naive_scatter(f.values, f.grid.spacing, bank.output.response, per, depth)


# --------------------------------------------------------------- propagate

def test_propagate_empty_path(wavelet_bank_256, rng):
    f = random_signal(wavelet_bank_256.grid, rng)
    assert propagate(f, wavelet_bank_256, ()) is f


def test_propagate_zero_filter(rng):
    g = Grid.regular(16)
    bank = FilterBank(FrequencyFilter(g, np.ones(16), OUTPUT), (FrequencyFilter(g, np.zeros(16), "z"),))
    out = propagate(random_signal(g, rng), bank, ("z",))
    np.testing.assert_array_equal(out.values, 0)


@pytest.mark.parametrize("bank", BANKS[:2], ids=["wavelet", "covering"])
def test_propagate_depth2_matches_oracle(bank, rng):
    f = random_signal(bank.grid, rng)
    sp = bank.grid.spacing
    for p in [(bank.labels[0], bank.labels[-1]), (bank.labels[1], bank.labels[1])]:
        u = f.values
        for lab in p:
            u = np.abs(brute_circular_convolve(u, brute_idft(bank.peripheral(lab).response, sp), sp))
        np.testing.assert_allclose(propagate(f, bank, p).values, u, atol=1e-10)


def test_propagate_unknown_label(wavelet_bank_256, rng):
    with pytest.raises(StructuralError):
        propagate(random_signal(wavelet_bank_256.grid, rng), wavelet_bank_256, ((99, 1),))


# ----------------------------------------------------------------- scatter

@pytest.mark.parametrize("bank", BANKS, ids=["wavelet1d", "covering1d", "wavelet2d", "covering2d"])
def test_scatter_matches_naive_oracle(bank, rng):
    f = random_signal(bank.grid, rng)
    S = scatter(f, bank, TruncationPolicy(2, 0.0))
    ref = _oracle(f, bank, 2)
    assert set(S.paths) == set(ref)
    scale = max(np.max(np.abs(v)) for v in ref.values())
    for p, v in ref.items():
        assert np.max(np.abs(S.outputs[p].values - v)) <= 1e-10 * max(scale, 1.0)


def test_scatter_zero_signal(wavelet_bank_256):
    S = scatter(Signal.zeros(wavelet_bank_256.grid), wavelet_bank_256, TruncationPolicy(2, 0.0))
    assert np.all(S.outputs.array == 0)
    assert all(e == 0 for e in S.layer_energies + S.output_energies)
    assert S.residual_energy == 0 and S.pruned_energy == 0


def test_scatter_depth_zero(wavelet_bank_256, rng):
    f = random_signal(wavelet_bank_256.grid, rng)
    S = scatter(f, wavelet_bank_256, TruncationPolicy(0, 0.0))
    assert S.paths == ((),)
    np.testing.assert_allclose(S.outputs[()].values, convolve(f, wavelet_bank_256.output).values, atol=1e-14)


def test_scatter_path_order(wavelet_bank_256, rng):
    S = scatter(random_signal(wavelet_bank_256.grid, rng), wavelet_bank_256, TruncationPolicy(2, 0.0))
    L = len(wavelet_bank_256.labels)
    assert len(S) == 1 + L + L * L
    assert list(S.paths) == sorted(S.paths, key=path_order)


def test_scatter_grid_mismatch(wavelet_bank_256):
    with pytest.raises(StructuralError):
        scatter(Signal.zeros(Grid.regular(64)), wavelet_bank_256)


def test_policy_validation():
    with pytest.raises(StructuralError):
        TruncationPolicy(-1)
    with pytest.raises(StructuralError):
        TruncationPolicy(2, -0.1)
    assert TruncationPolicy() == TruncationPolicy(3, 1e-6)


def test_forced_path_set(wavelet_bank_256, rng):
    bank = wavelet_bank_256
    f = random_signal(bank.grid, rng)
    full = scatter(f, bank, TruncationPolicy(2, 0.0))
    chosen = [(), (bank.labels[0],), (bank.labels[0], bank.labels[3])]
    S = scatter(f, bank, TruncationPolicy(2, 0.0), paths=chosen)
    assert S.paths == tuple(chosen)
    for p in chosen:
        np.testing.assert_array_equal(S.outputs[p].values, full.outputs[p].values)
    with pytest.raises(StructuralError):
        scatter(f, bank, TruncationPolicy(1, 0.0), paths=chosen)


def test_pruning_soundness(rng):
    bank = build_wavelet_bank(Grid.regular(128), WaveletParams(3))
    f = random_signal(bank.grid, rng)
    full = scatter(f, bank, TruncationPolicy(3, 0.0))
    for eps in [1e-3, 1e-2, 5e-2]:
        S = scatter(f, bank, TruncationPolicy(3, eps))
        assert len(S) < len(full)
        assert S.pruned_energy > 0
        assert abs(l2l2_norm(full) - l2l2_norm(S)) <= math.sqrt(S.pruned_energy) * (1 + 1e-12)


@pytest.mark.parametrize("bank", BANKS, ids=["wavelet1d", "covering1d", "wavelet2d", "covering2d"])
def test_l2l2_norm_nonexpansive(bank, rng):
    for _ in range(5):
        f = random_signal(bank.grid, rng)
        assert l2l2_norm(scatter(f, bank, TruncationPolicy(3, 0.0))) <= l2_norm(f) * (1 + 1e-10)


def test_l2l2_norm_trivial_cases(rng):
    g = Grid.regular(8)
    empty = ScatteringCoefficients(CoefficientMap(g, (), np.zeros((0, 8), complex)), (), (), 0.0, 0.0, 0.0,
                                   TruncationPolicy())
    assert l2l2_norm(empty) == 0.0
    bank = FilterBank(FrequencyFilter(g, np.ones(8), OUTPUT), ())
    f = random_signal(g, rng)
    assert l2l2_norm(scatter(f, bank, TruncationPolicy(0, 0.0))) == pytest.approx(l2_norm(f), rel=1e-14)


# ---------------------------------------------------------------- distance

def test_distance_trivial(wavelet_bank_256, rng):
    bank = wavelet_bank_256
    f = random_signal(bank.grid, rng)
    S = scatter(f, bank, TruncationPolicy(2, 0.0))
    assert scatter_distance(S, S) == 0.0
    S0 = scatter(translate(f, [0.0]), bank, TruncationPolicy(2, 0.0), paths=S.paths)
    assert scatter_distance(S, S0) == 0.0


def test_distance_path_mismatch(wavelet_bank_256, rng):
    bank = wavelet_bank_256
    f = random_signal(bank.grid, rng)
    a = scatter(f, bank, TruncationPolicy(1, 0.0))
    b = scatter(f, bank, TruncationPolicy(2, 0.0))
    with pytest.raises(StructuralError):
        scatter_distance(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    bank = BANKS[0]
    pol = TruncationPolicy(2, 0.0)
    fs = [random_signal(bank.grid, rng) * rng.uniform(0.01, 10) for _ in range(3)]
    S = [scatter(fs[0], bank, pol)]
    S += [scatter(f, bank, pol, paths=S[0].paths) for f in fs[1:]]
    ab, bc, ac = scatter_distance(S[0], S[1]), scatter_distance(S[1], S[2]), scatter_distance(S[0], S[2])
    assert ac <= (ab + bc) * (1 + 1e-10)


# ---------------------------------------------------------------- energies

@pytest.mark.parametrize("bank", BANKS, ids=["wavelet1d", "covering1d", "wavelet2d", "covering2d"])
def test_layer_profile(bank, rng):
    f = random_signal(bank.grid, rng)
    prof = layer_energy_profile(f, bank, 3)
    assert prof[0] == pytest.approx(energy(f), rel=1e-15)
    assert all(b <= a * (1 + 1e-12) for a, b in zip(prof, prof[1:]))
    S = scatter(f, bank, TruncationPolicy(3, 0.0))
    np.testing.assert_allclose(prof, S.layer_energies, rtol=1e-12)


def test_layer_energies_match_propagated_norms(rng):
    bank = BANKS[0]
    f = random_signal(bank.grid, rng)
    S = scatter(f, bank, TruncationPolicy(2, 0.0))
    for k in range(3):
        direct = math.fsum(energy(propagate(f, bank, p)) for p in S.paths if len(p) == k)
        assert S.layer_energies[k] == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("bank", BANKS, ids=["wavelet1d", "covering1d", "wavelet2d", "covering2d"])
def test_telescoping_identity(bank, rng):
    f = random_signal(bank.grid, rng)
    M = 3
    S = scatter(f, bank, TruncationPolicy(M, 0.0))
    total = energy(f)
    for m in range(M + 1):
        tail = S.layer_energies[m + 1] if m < M else S.residual_energy
        captured = math.fsum(S.output_energies[: m + 1])
        assert abs(total - captured - tail) <= 1e-9 * total

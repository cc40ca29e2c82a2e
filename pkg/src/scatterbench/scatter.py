"""Scattering propagator and the general scattering transform.

For a filter bank with peripherals ``g_λ`` and output filter ``g0``::

    U[()]f       = f
    U[p + (λ,)]f = |U[p]f * g_λ|
    S[P]f        = {U[p]f * g0 : p ∈ P}

The path tree is truncated at ``max_depth`` and optionally pruned: a node
(and its subtree) is dropped when ``‖U[p]f‖ < prune_threshold · ‖f‖``.
Every dropped or truncated energy is recorded so that callers can bound
what the truncation discarded.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import StructuralError
from .framekit import FilterBank
from .sigkit import Signal, convolve, energy, modulus

Path = tuple

#: Upper bound on complex samples materialized per child batch.
CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class TruncationPolicy:
    max_depth: int = 3
    prune_threshold: float = 1e-6

    def __post_init__(self):
        if int(self.max_depth) != self.max_depth or self.max_depth < 0:
            raise StructuralError("max_depth must be an integer >= 0")
        if not (self.prune_threshold >= 0 and math.isfinite(self.prune_threshold)):
            raise StructuralError("prune_threshold must be finite and >= 0")

    def to_dict(self):
        return {"max_depth": int(self.max_depth), "prune_threshold": float(self.prune_threshold)}


def path_order(p):
    """Sort key: breadth first, lexicographic within a layer."""
    return (len(p), p)


class CoefficientMap(Mapping):
    """Read-only mapping path -> Signal backed by one stacked array.

    Rows follow :func:`path_order`, so two maps with the same key set line
    up row by row.
    """

    def __init__(self, grid, paths, array):
        self.grid = grid
        self._paths = tuple(paths)
        self._row = {p: i for i, p in enumerate(self._paths)}
        array.flags.writeable = False
        self.array = array

    def __getitem__(self, p):
        return Signal(self.grid, self.array[self._row[p]])

    def __iter__(self):
        return iter(self._paths)

    def __len__(self):
        return len(self._paths)

    def __contains__(self, p):
        return p in self._row

    def keys(self):
        return self._row.keys()

    def row_energies(self) -> np.ndarray:
        flat = self.array.reshape(len(self._paths), self.grid.size)
        e = np.einsum("ij,ij->i", flat.real, flat.real) + np.einsum("ij,ij->i", flat.imag, flat.imag)
        return e * self.grid.cell_volume


@dataclass(frozen=True, eq=False)
class ScatteringCoefficients:
    """Outputs ``U[p]f * g0`` keyed by path, plus the energy ledger.

    ``layer_energies[k]`` is ``‖U[Λ^k]f‖²`` over retained nodes at depth k,
    ``output_energies[k]`` the squared L²ℓ² norm of the depth-k outputs,
    ``residual_energy`` the energy of all children of the deepest retained
    layer and ``pruned_energy`` the energy of the nodes dropped by pruning.
    """

    outputs: CoefficientMap
    layer_energies: tuple[float, ...]
    output_energies: tuple[float, ...]
    residual_energy: float
    pruned_energy: float
    input_energy: float
    policy: TruncationPolicy

    @property
    def paths(self) -> tuple[Path, ...]:
        return tuple(self.outputs)

    def path_energy(self, p) -> float:
        return energy(self.outputs[p])

    @property
    def grid(self):
        return self.outputs.grid

    def __len__(self):
        return len(self.outputs)


def _check_path(bank: FilterBank, path):
    for lab in path:
        if not bank.has_label(lab):
            raise StructuralError(f"unknown peripheral label {lab!r} in path {path!r}")


def propagate(f: Signal, bank: FilterBank, path: Iterable) -> Signal:
    """U[p]f by iterated convolve-then-modulus; U[()]f = f."""
    path = tuple(path)
    _check_path(bank, path)
    u = f
    for lab in path:
        u = modulus(convolve(u, bank.peripheral(lab)))
    return u


class _Tree:
    """Chunked depth-first evaluation of the path tree."""

    def __init__(self, f, bank, max_depth, prune, keep_outputs, allowed):
        self.grid = f.grid
        self.bank = bank
        self.max_depth = max_depth
        self.keep_outputs = keep_outputs
        self.allowed = allowed
        self.w = self.grid.cell_volume
        self.M = self.grid.size
        self.labels = bank.labels
        self.G = bank.stack
        self.g0 = bank.output.response
        self.wres = bank.peripheral_power
        self.G2 = (np.abs(self.G) ** 2).reshape(len(self.labels), self.M)
        self.f_energy = energy(f)
        self.cut = (prune * math.sqrt(self.f_energy)) ** 2
        self.node_energy = {(): self.f_energy}
        self.out_energy = {}
        self.outputs = {}
        self.residual = []
        self.pruned = []

    def run(self, f):
        self._visit([()], f.values[None].astype(np.complex128), 0)

    def _visit(self, paths, U, depth):
        ax = tuple(range(1, U.ndim))
        F = np.fft.fftn(U, axes=ax)
        if self.keep_outputs:
            O = np.fft.ifftn(F * self.g0, axes=ax)
            flat = O.reshape(len(paths), self.M)
            e = np.einsum("ij,ij->i", flat.real, flat.real) + np.einsum("ij,ij->i", flat.imag, flat.imag)
            for i, p in enumerate(paths):
                self.outputs[p] = O[i]
                self.out_energy[p] = float(e[i]) * self.w
        else:
            P = (np.abs(F) ** 2).reshape(len(paths), self.M)
            g02 = (np.abs(self.g0) ** 2).ravel()
            for i, p in enumerate(paths):
                self.out_energy[p] = float(P[i] @ g02) * self.w / self.M
        if not self.labels:
            return
        P = (np.abs(F) ** 2).reshape(len(paths), self.M)
        if depth == self.max_depth:
            self.residual.extend(float(x) * self.w / self.M for x in P @ self.wres.ravel())
            return
        L = len(self.labels)
        if depth + 1 == self.max_depth and not self.keep_outputs and self.cut == 0 and self.allowed is None:
            # leaf layer: energies follow from the spectra by Plancherel
            E = (P @ self.G2.T) * (self.w / self.M)
            for i, p in enumerate(paths):
                for l, lab in enumerate(self.labels):
                    self.node_energy[p + (lab,)] = float(E[i, l])
            # leaf outputs and their children are not materialized here
            self.residual.append(float("nan"))
            return
        chunk = max(1, CHUNK_ELEMENTS // (L * self.M))
        for s in range(0, len(paths), chunk):
            sub = slice(s, s + chunk)
            C = np.fft.ifftn(F[sub, None] * self.G[None], axes=tuple(range(2, U.ndim + 1)))
            n = C.shape[0] * L
            mod, e = _kernels.modulus_rows(C.reshape(n, self.M))
            e = e * self.w
            kids, keep = [], []
            for i, p in enumerate(paths[sub]):
                for l, lab in enumerate(self.labels):
                    q = p + (lab,)
                    k = i * L + l
                    if self.allowed is not None:
                        if q not in self.allowed:
                            continue
                    elif e[k] < self.cut:
                        self.pruned.append(float(e[k]))
                        continue
                    self.node_energy[q] = float(e[k])
                    kids.append(q)
                    keep.append(k)
            if kids:
                self._visit(kids, mod[keep].reshape((len(kids),) + self.grid.shape), depth + 1)



def _assemble(tree: _Tree, policy: TruncationPolicy) -> ScatteringCoefficients:
    depth_of = lambda p: len(p)  # noqa: E731
    layers = [[] for _ in range(policy.max_depth + 1)]
    outs = [[] for _ in range(policy.max_depth + 1)]
    for p in sorted(tree.node_energy, key=path_order):
        if depth_of(p) <= policy.max_depth:
            layers[depth_of(p)].append(tree.node_energy[p])
    for p in sorted(tree.out_energy, key=path_order):
        outs[depth_of(p)].append(tree.out_energy[p])
    order = sorted(tree.outputs, key=path_order)
    if order:
        arr = np.stack([tree.outputs[p] for p in order])
    else:
        arr = np.zeros((0,) + tree.grid.shape, dtype=np.complex128)
    ordered = CoefficientMap(tree.grid, order, arr)
    return ScatteringCoefficients(
        outputs=ordered,
        layer_energies=tuple(math.fsum(x) for x in layers),
        output_energies=tuple(math.fsum(x) for x in outs),
        residual_energy=math.fsum(tree.residual),
        pruned_energy=math.fsum(tree.pruned),
        input_energy=tree.f_energy,
        policy=policy,
    )


def scatter(f: Signal, bank: FilterBank, policy: TruncationPolicy = TruncationPolicy(),
            paths=None) -> ScatteringCoefficients:
    """General scattering transform S[P]f truncated by ``policy``.

    If ``paths`` is given, exactly those paths are evaluated (the set must
    be closed under prefixes, as any path set returned by this function
    is) and the pruning threshold is ignored.  This is how two transforms
    are compared over an identical path set.
    """
    if f.grid != bank.grid:
        raise StructuralError("signal and filter bank live on different grids")
    allowed = None
    if paths is not None:
        allowed = set(tuple(p) for p in paths)
        for p in allowed:
            _check_path(bank, p)
            if len(p) > policy.max_depth:
                raise StructuralError(f"path {p!r} deeper than max_depth={policy.max_depth}")
    tree = _Tree(f, bank, policy.max_depth, policy.prune_threshold, True, allowed)
    tree.run(f)
    return _assemble(tree, policy)


def l2l2_norm(S: ScatteringCoefficients) -> float:
    return math.sqrt(math.fsum(S.outputs.row_energies()))


def scatter_distance(S1: ScatteringCoefficients, S2: ScatteringCoefficients) -> float:
    """sqrt(Σ_p ‖S1[p] - S2[p]‖²) over an identical path set."""
    if S1.outputs.keys() != S2.outputs.keys():
        only1 = len(set(S1.outputs) - set(S2.outputs))
        only2 = len(set(S2.outputs) - set(S1.outputs))
        raise StructuralError(
            f"path sets differ ({only1} paths only in the first, {only2} only in the second)"
        )
    if S1.outputs.grid != S2.outputs.grid:
        raise StructuralError("coefficients live on different grids")
    diff = CoefficientMap(S1.outputs.grid, S1.paths, S1.outputs.array - S2.outputs.array)
    return math.sqrt(math.fsum(diff.row_energies()))


def layer_energy_profile(f: Signal, bank: FilterBank, max_depth: int) -> list[float]:
    """Exact, unpruned ``‖U[Λ^k]f‖²`` for k = 0..max_depth."""
    if f.grid != bank.grid:
        raise StructuralError("signal and filter bank live on different grids")
    policy = TruncationPolicy(max_depth, 0.0)
    tree = _Tree(f, bank, max_depth, 0.0, False, None)
    tree.run(f)
    return list(_assemble(tree, policy).layer_energies)

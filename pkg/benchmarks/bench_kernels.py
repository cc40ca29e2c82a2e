"""Compare the compiled kernels against the pure-Python (numpy) fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-``repeat`` wall time per call and the maximum
absolute difference between the two backends.  The end-to-end row times a
depth-3 scattering transform in a fresh interpreter per backend, selecting
the fallback with ``SCATTERBENCH_PURE_PYTHON=1``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from scatterbench import _pykernels

try:
    from scatterbench import _ckernels
except ImportError:
    _ckernels = None

E2E = """
import time
from scatterbench import _kernels, signals
from scatterbench.framekit import WaveletParams, build_wavelet_bank
from scatterbench.scatter import TruncationPolicy, scatter
from scatterbench.sigkit import Grid
bank = build_wavelet_bank(Grid.regular(256), WaveletParams(4))
f = signals.bandlimited_noise(bank.grid, signals.trial_rng(0, 0))
scatter(f, bank, TruncationPolicy(3, 0.0))
times = []
for _ in range({repeat}):
    t = time.perf_counter()
    scatter(f, bank, TruncationPolicy(3, 0.0))
    times.append(time.perf_counter() - t)
print(_kernels.BACKEND, min(times))
"""


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def rand(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def bench_convolve(rng, repeat):
    rows = []
    for shape in [(256,), (1024,), (4096,), (32, 32), (64, 64)]:
        f, g = rand(rng, shape), rand(rng, shape)
        c_fn = _ckernels.circular_convolve_1d if len(shape) == 1 else _ckernels.circular_convolve_2d
        tp = best(lambda: _pykernels.circular_convolve(f, g, 1.0), repeat)
        tc = best(lambda: c_fn(f, g, 1.0), repeat)
        err = float(np.max(np.abs(np.asarray(c_fn(f, g, 1.0)) - _pykernels.circular_convolve(f, g, 1.0))))
        rows.append((f"circular_convolve {shape}", tp, tc, err))
    return rows


def bench_modulus(rng, repeat):
    rows = []
    for shape in [(144, 256), (1728, 256), (64, 4096)]:
        x = rand(rng, shape)
        tp = best(lambda: _pykernels.modulus_rows(x), repeat)
        tc = best(lambda: _ckernels.modulus_rows(x), repeat)
        err = float(np.max(np.abs(np.asarray(_ckernels.modulus_rows(x)[0]) - _pykernels.modulus_rows(x)[0])))
        rows.append((f"modulus_rows {shape}", tp, tc, err))
    return rows


def bench_end_to_end(repeat):
    code = E2E.format(repeat=repeat)
    out = {}
    for label, env in [("python", {"SCATTERBENCH_PURE_PYTHON": "1"}), ("cython", {})]:
        e = {k: v for k, v in os.environ.items() if k != "SCATTERBENCH_PURE_PYTHON"}
        e.update(env)
        res = subprocess.run([sys.executable, "-c", code], env=e, capture_output=True, text=True, check=True)
        backend, t = res.stdout.split()
        out[label] = (backend, float(t))
    return ("scatter N=256 J=4 depth 3", out["python"][1], out["cython"][1], float("nan")), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    rows = bench_convolve(rng, args.repeat) + bench_modulus(rng, args.repeat)
    e2e, backends = bench_end_to_end(args.repeat)
    rows.append(e2e)
    print(f"{'kernel':<34} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8} {'max |diff|':>11}")
    for name, tp, tc, err in rows:
        print(f"{name:<34} {tp:12.3e} {tc:12.3e} {tp / tc:8.1f} {err:11.1e}")
    print(f"end-to-end backends: {backends['python'][0]} vs {backends['cython'][0]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Subcommands::

    build-bank   build a filter bank and write its manifest
    gen-signal   write a seeded test signal (SCTB, or CSV for 1-D)
    scatter      run the transform on a signal file and dump coefficients
    verify CHECK run a certification suite and write JSON/CSV reports

Configuration is a flat JSON object (``--config``); command-line flags
override it.  Exit codes: 0 pass, 1 certification failure, 2 refusal or
usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import _kernels, formats, signals, verify
from .errors import ConstructionError, RefusalError, StructuralError
from .framekit import (COVERING, WAVELET, UniformCoveringParams, WaveletParams,
                       build_coherent_sequence, build_uniform_covering_bank,
                       build_wavelet_bank, validate_bessel, validate_parseval)
from .scatter import TruncationPolicy, l2l2_norm, scatter
from .sigkit import Grid

log = logging.getLogger("scatterbench")

EXIT_PASS, EXIT_FAIL, EXIT_REFUSAL = 0, 1, 2
CHECKS = ("translation-bound", "sweep", "nonexpansive", "conservation", "decay", "commute")


@dataclass
class RunConfig:
    # grid
    d: int = 1
    N: int = 256
    spacing: float = 1.0
    # bank
    family: str = WAVELET
    J: int = 4
    n_rotations: int = 4
    transition_width: float = 1.0
    lattice_spacing: float | None = None
    bump_radius: float | None = None
    origin_radius: float | None = None
    bank: str | None = None
    # truncation
    max_depth: int = 3
    prune: float = 0.0
    # experiment
    check: str = "translation-bound"
    trials: int = 100
    seed: int = 0
    c: list | None = None
    c_min: float = 1e-3
    c_max: float = 50.0
    J_min: int = 1
    J_max: int = 5
    K_max: int = 4
    bandlimit: float = signals.DEFAULT_BANDLIMIT
    signal_type: str = "noise"
    gabor_width: float = 8.0
    gabor_frequency: float = 0.125
    # outputs
    out: str | None = None

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise StructuralError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)

    @property
    def grid(self) -> Grid:
        return Grid.regular(self.N, self.d, self.spacing)

    @property
    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.max_depth, self.prune)

    def covering_params(self, grid):
        base = UniformCoveringParams.default_for(grid)
        return UniformCoveringParams(
            self.lattice_spacing or base.lattice_spacing,
            self.bump_radius or base.bump_radius,
            self.origin_radius or base.origin_radius,
        )

    def build_bank(self):
        if self.bank:
            return formats.read_bank(self.bank)
        grid = self.grid
        if self.family == WAVELET:
            return build_wavelet_bank(grid, WaveletParams(self.J, self.n_rotations, self.transition_width))
        if self.family == COVERING:
            return build_uniform_covering_bank(grid, self.covering_params(grid))
        raise StructuralError(f"unknown family {self.family!r}")

    def build_sequence(self):
        grid = self.grid
        J_range = range(self.J_min, self.J_max + 1)
        if self.family == WAVELET:
            return build_coherent_sequence(
                grid, WAVELET, J_range, WaveletParams(1, self.n_rotations, self.transition_width))
        if self.family == COVERING:
            params = None
            if self.lattice_spacing:
                a = self.lattice_spacing
                params = UniformCoveringParams(a, self.bump_radius or a,
                                               self.origin_radius or min(grid.nyquist))
            return build_coherent_sequence(grid, COVERING, J_range, params)
        raise StructuralError(f"unknown family {self.family!r}")

    def make_signal(self):
        grid = self.grid
        if self.signal_type == "noise":
            return signals.bandlimited_noise(grid, signals.trial_rng(self.seed, 0), self.bandlimit)
        if self.signal_type == "delta":
            return signals.delta(grid)
        if self.signal_type == "gabor":
            center = [n * s / 2 for n, s in zip(grid.sizes, grid.spacing)]
            return signals.gabor(grid, center, self.gabor_width, [self.gabor_frequency] * grid.dims)
        raise StructuralError(f"unknown signal type {self.signal_type!r}")


# ------------------------------------------------------------------ report

def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _write_reports(out_dir, check, cfg, status, trials, summary, csv_header, csv_rows):
    out = Path(out_dir)
    report = {
        "schema": verify.REPORT_SCHEMA,
        "check": check,
        "status": status,
        "backend": _kernels.BACKEND,
        "config": cfg.to_dict(),
        "summary": summary,
        "trials": trials,
    }
    formats.atomic_write(out / f"{check}.json", json.dumps(report, indent=1, sort_keys=True) + "\n")
    if csv_header is not None:
        formats.atomic_write(out / f"{check}.csv", _csv_text(csv_header, csv_rows))
    return out / f"{check}.json"


def _shift(cfg, grid):
    if cfg.c is not None:
        c = np.atleast_1d(np.asarray(cfg.c, dtype=float))
        if c.shape != (grid.dims,):
            raise StructuralError(f"c must have {grid.dims} components")
        return c
    return np.array([grid.spacing[0]] + [0.0] * (grid.dims - 1))


def run_check(cfg: RunConfig, check: str, out_dir) -> int:
    if check not in CHECKS:
        raise StructuralError(f"unknown check {check!r}")
    seed, n = cfg.seed, cfg.trials
    if check == "sweep":
        seq = cfg.build_sequence()
        f = cfg.make_signal()
        c = _shift(cfg, cfg.grid)
        rep = verify.sweep_corollary(seq, f, c, cfg.policy, seed=[seed, 0])
        rows = [[r.J, r.D, r.lhs, r.rhs, r.ratio, r.passed] for r in rep.rows]
        summary = {"rows": len(rows), "pass": rep.passed, "envelope_pass": rep.envelope_pass,
                   "c": [float(x) for x in c]}
        _write_reports(out_dir, check, cfg, "pass" if rep.passed else "fail", [rep.to_dict()],
                       summary, ["J", "D", "lhs", "rhs", "ratio", "pass"], rows)
        return EXIT_PASS if rep.passed else EXIT_FAIL

    bank = cfg.build_bank()
    if check == "translation-bound":
        if cfg.c is not None:
            c = _shift(cfg, bank.grid)

            def one(i):
                f = signals.bandlimited_noise(bank.grid, signals.trial_rng(seed, i), cfg.bandlimit)
                return verify.check_translation_bound(f, c, bank, cfg.policy, seed=[seed, i])
            reps = verify.run_trials(one, n)
        else:
            reps = verify.translation_trials(bank, n, seed, cfg.c_min, cfg.c_max, cfg.policy, cfg.bandlimit)
        header = ["trial", "c_norm", "D", "lhs", "rhs_linear", "rhs_cap", "rhs", "ratio", "pass"]
        rows = [[i, r.c_norm, r.D, r.lhs, r.rhs_linear, r.rhs_cap, r.rhs, r.ratio, r.passed]
                for i, r in enumerate(reps)]
        extra = {"max_ratio": max((r.ratio for r in reps), default=0.0)}
    elif check == "nonexpansive":
        reps = verify.nonexpansive_trials(bank, n, seed, cfg.policy, cfg.bandlimit)
        header = ["trial", "dist", "bound", "pass"]
        rows = [[i, r.dist, r.bound, r.passed] for i, r in enumerate(reps)]
        extra = {"max_ratio": max((r.dist / r.bound for r in reps if r.bound > 0), default=0.0)}
    elif check == "conservation":
        reps = verify.conservation_trials(bank, n, seed, cfg.max_depth, cfg.bandlimit)
        header = ["trial"] + [f"residual_M{m}" for m in range(cfg.max_depth + 1)] + ["s_norm_gap", "pass"]
        rows = [[i, *r.residuals, r.s_norm_gaps[-1], r.passed] for i, r in enumerate(reps)]
        extra = {"max_residual": max((max(r.residuals) for r in reps), default=0.0)}
    elif check == "decay":
        reps = verify.decay_trials(bank, n, seed, cfg.K_max, cfg.bandlimit)
        header = ["trial", "c0_hat", "budget"] + [f"e{k}" for k in range(1, cfg.K_max + 1)] + ["pass"]
        rows = [[i, r.c0_hat, r.budget, *r.energies, r.passed] for i, r in enumerate(reps)]
        extra = {"max_c0_hat": max((r.c0_hat for r in reps), default=0.0)}
    else:  # commute
        reps = verify.commute_trials(bank, n, seed, cfg.max_depth, cfg.bandlimit)
        header = ["trial", "depth", "max_deviation", "pass"]
        rows = [[i, len(r.path), r.max_deviation, r.passed] for i, r in enumerate(reps)]
        extra = {"max_deviation": max((r.max_deviation for r in reps), default=0.0)}

    failed = sum(not r.passed for r in reps)
    summary = {"trials": len(reps), "failed": failed, "bank": verify.bank_id(bank), **extra}
    _write_reports(out_dir, check, cfg, "fail" if failed else "pass",
                   [r.to_dict() for r in reps], summary, header, rows)
    return EXIT_FAIL if failed else EXIT_PASS


# --------------------------------------------------------------- commands

def _refuse_existing(path, force):
    if Path(path).exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")


def cmd_build_bank(cfg, args):
    out = cfg.out or "bank.json"
    _refuse_existing(out, args.force)
    bank = cfg.build_bank()
    formats.write_bank(bank, out, force=True)
    b, p = validate_bessel(bank), validate_parseval(bank)
    print(f"wrote {out}: family={bank.family} peripherals={len(bank.peripherals)}")
    print(f"bessel max_sum={b.max_sum!r} ({'pass' if b.passed else 'FAIL'})")
    print(f"parseval range=[{p.min_sum!r}, {p.max_sum!r}] ({'pass' if p.passed else 'FAIL'})")
    print(f"D={bank.D!r}")
    return EXIT_PASS


def cmd_gen_signal(cfg, args):
    out = cfg.out or "signal.sctb"
    _refuse_existing(out, args.force)
    f = cfg.make_signal()
    if str(out).endswith(".csv"):
        formats.write_csv(out, f)
    else:
        formats.write_signal(out, f)
    print(f"wrote {out}: type={cfg.signal_type} grid={f.grid.sizes} seed={cfg.seed}")
    return EXIT_PASS


def _load_signal(path, spacing):
    if str(path).endswith(".csv"):
        return formats.read_csv(path, spacing)
    return formats.read_signal(path)


def cmd_scatter(cfg, args):
    out = cfg.out or "coefficients"
    if (Path(out) / "index.json").exists() and not args.force:
        raise FileExistsError(f"{out} already holds a coefficient dump; pass --force")
    f = _load_signal(args.signal, cfg.spacing)
    bank = cfg.build_bank()
    if f.grid != bank.grid:
        raise StructuralError(f"signal grid {f.grid} does not match bank grid {bank.grid}")
    S = scatter(f, bank, cfg.policy)
    formats.write_coefficients(S, out, norms_only=args.norms_only, force=True)
    print(f"wrote {out}: {len(S)} paths")
    print(f"l2l2_norm={l2l2_norm(S)!r}")
    print(f"residual_energy={S.residual_energy!r} pruned_energy={S.pruned_energy!r}")
    return EXIT_PASS


def cmd_verify(cfg, args):
    out = cfg.out or "reports"
    try:
        code = run_check(cfg, args.check, out)
    except RefusalError as exc:
        _write_reports(out, args.check, cfg, "refused", [], {"reason": str(exc)}, None, None)
        raise
    print(f"{args.check}: {'pass' if code == EXIT_PASS else 'FAIL'} (reports in {out})")
    return code


def _defaults_epilog():
    lines = ["config keys and defaults:"]
    for f in fields(RunConfig):
        lines.append(f"  {f.name} = {json.dumps(f.default)}")
    return "\n".join(lines)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    common.add_argument("--depth", type=int, dest="max_depth")
    common.add_argument("--prune", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--family", choices=[WAVELET, COVERING])
    common.add_argument("--bank", help="filter-bank manifest to use instead of building one")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="scatterbench", description=__doc__.split("\n\n")[0],
                                epilog=_defaults_epilog(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build-bank", parents=[common], epilog=_defaults_epilog(),
                   formatter_class=argparse.RawDescriptionHelpFormatter)
    g = sub.add_parser("gen-signal", parents=[common], epilog=_defaults_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    g.add_argument("--type", dest="signal_type", choices=["noise", "delta", "gabor"])
    g.add_argument("--bandlimit", type=float)
    s = sub.add_parser("scatter", parents=[common], epilog=_defaults_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("signal", help="signal file (.sctb or 1-D .csv)")
    s.add_argument("--norms-only", action="store_true", help="write the index without payloads")
    v = sub.add_parser("verify", parents=[common], epilog=_defaults_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    v.add_argument("check", choices=CHECKS)
    return p


_OVERRIDES = ("seed", "out", "max_depth", "prune", "trials", "family", "bank", "signal_type", "bandlimit")


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise StructuralError("config must be a JSON object")
    for key in _OVERRIDES:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if getattr(args, "check", None):
        data["check"] = args.check
    return RunConfig.from_dict(data)


COMMANDS = {"build-bank": cmd_build_bank, "gen-signal": cmd_gen_signal,
            "scatter": cmd_scatter, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except (RefusalError, StructuralError, ConstructionError, FileExistsError,
            FileNotFoundError, json.JSONDecodeError, TypeError) as exc:
        print(f"scatterbench: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL


if __name__ == "__main__":
    sys.exit(main())

"""On-disk formats.

SCTB binary container (all little-endian)::

    magic    4 bytes  b"SCTB"
    version  u16      1
    dtype    u16      1 = complex128, interleaved (re, im) float64
    d        u16      number of axes
    reserved u16      0
    sizes    u64 × d
    spacing  f64 × d
    payload  complex128 × ∏sizes, C order

Also: 1-D CSV signals (``index,re,im``), filter-bank manifests (JSON plus
one SCTB spectrum per filter) and scattering-coefficient dumps (JSON index
plus optional per-path SCTB payloads).
"""
from __future__ import annotations

import csv
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import StructuralError
from .framekit import OUTPUT, FilterBank
from .scatter import ScatteringCoefficients, l2l2_norm
from .sigkit import FrequencyFilter, Grid, Signal

MAGIC = b"SCTB"
VERSION = 1
DTYPE_C128 = 1
_HEAD = struct.Struct("<4sHHHH")

BANK_SCHEMA = "scatterbench.bank/1"
COEFF_SCHEMA = "scatterbench.coefficients/1"


def atomic_write(path, data: bytes | str):
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------ SCTB

def encode_array(grid: Grid, values) -> bytes:
    v = np.asarray(values, dtype="<c16")
    if v.size != grid.size:
        raise StructuralError(f"{v.size} values for a grid of {grid.size}")
    d = grid.dims
    head = _HEAD.pack(MAGIC, VERSION, DTYPE_C128, d, 0)
    head += struct.pack(f"<{d}Q", *grid.sizes) + struct.pack(f"<{d}d", *grid.spacing)
    return head + np.ascontiguousarray(v.reshape(grid.shape)).tobytes()


def decode_array(data: bytes) -> tuple[Grid, np.ndarray]:
    if len(data) < _HEAD.size:
        raise StructuralError("truncated SCTB header")
    magic, version, dtype, d, _ = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise StructuralError(f"bad magic {magic!r}")
    if version != VERSION:
        raise StructuralError(f"unsupported SCTB version {version}")
    if dtype != DTYPE_C128:
        raise StructuralError(f"unsupported dtype tag {dtype}")
    off = _HEAD.size
    sizes = struct.unpack_from(f"<{d}Q", data, off)
    off += 8 * d
    spacing = struct.unpack_from(f"<{d}d", data, off)
    off += 8 * d
    grid = Grid(tuple(sizes), tuple(spacing))
    payload = data[off:]
    if len(payload) != 16 * grid.size:
        raise StructuralError(
            f"payload holds {len(payload)} bytes, expected {16 * grid.size}"
        )
    values = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(grid.shape)
    return grid, values


def write_signal(path, f: Signal):
    atomic_write(path, encode_array(f.grid, f.values))


def read_signal(path) -> Signal:
    grid, values = decode_array(Path(path).read_bytes())
    return Signal(grid, values)


# ------------------------------------------------------------------- CSV

def write_csv(path, f: Signal):
    if f.grid.dims != 1:
        raise StructuralError("CSV export is defined for 1-D signals only")
    lines = ["index,re,im"]
    lines += [f"{i},{v.real!r},{v.imag!r}" for i, v in enumerate(f.values.tolist())]
    atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path, spacing: float = 1.0) -> Signal:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise StructuralError(f"{path}: no samples")
    idx = [int(r["index"]) for r in rows]
    if idx != list(range(len(rows))):
        raise StructuralError(f"{path}: indices must run 0..N-1 in order")
    values = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return Signal(Grid((len(values),), (spacing,)), values)


# ---------------------------------------------------------------- labels

def label_to_json(label):
    if isinstance(label, tuple):
        return [label_to_json(x) for x in label]
    if isinstance(label, (np.integer,)):
        return int(label)
    return label


def label_from_json(obj):
    if isinstance(obj, list):
        return tuple(label_from_json(x) for x in obj)
    return obj


# ------------------------------------------------------------ bank files

def _spectra_dir(manifest: Path) -> Path:
    return manifest.with_name(manifest.stem + ".spectra")


def bank_manifest(bank: FilterBank, spectra_rel: str) -> dict:
    return {
        "schema": BANK_SCHEMA,
        "family": bank.family,
        "params": bank.params,
        "grid": bank.grid.to_dict(),
        "D": bank.D,
        "output": {"file": f"{spectra_rel}/output.sctb",
                   "support_radius": bank.output.support_radius},
        "peripherals": [
            {"label": label_to_json(g.label), "file": f"{spectra_rel}/p{i:05d}.sctb",
             "support_radius": g.support_radius}
            for i, g in enumerate(bank.peripherals)
        ],
    }


def write_bank(bank: FilterBank, manifest_path, force: bool = False) -> Path:
    """Write the JSON manifest and one SCTB spectrum per filter."""
    manifest_path = Path(manifest_path)
    spectra = _spectra_dir(manifest_path)
    if not force and (manifest_path.exists() or spectra.exists()):
        raise FileExistsError(f"{manifest_path} exists (use force to overwrite)")
    man = bank_manifest(bank, spectra.name)
    atomic_write(spectra / "output.sctb", encode_array(bank.grid, bank.output.response))
    for i, g in enumerate(bank.peripherals):
        atomic_write(spectra / f"p{i:05d}.sctb", encode_array(bank.grid, g.response))
    atomic_write(manifest_path, json.dumps(man, indent=2) + "\n")
    return manifest_path


def read_bank(manifest_path) -> FilterBank:
    manifest_path = Path(manifest_path)
    man = json.loads(manifest_path.read_text())
    if man.get("schema") != BANK_SCHEMA:
        raise StructuralError(f"{manifest_path}: unknown schema {man.get('schema')!r}")
    grid = Grid.from_dict(man["grid"])
    base = manifest_path.parent

    def load(entry, label):
        g, values = decode_array((base / entry["file"]).read_bytes())
        if g != grid:
            raise StructuralError(f"{entry['file']}: grid differs from manifest")
        return FrequencyFilter(grid, values, label, entry.get("support_radius"))

    out = load(man["output"], OUTPUT)
    per = tuple(load(e, label_from_json(e["label"])) for e in man["peripherals"])
    return FilterBank(out, per, man.get("family", "custom"), man.get("params", {}))


# ----------------------------------------------------- coefficient dumps

def write_coefficients(S: ScatteringCoefficients, directory, norms_only: bool = False,
                       force: bool = False) -> Path:
    """Dump coefficients as ``index.json`` plus ``coeffs/NNNNNN.sctb`` files."""
    directory = Path(directory)
    if (directory / "index.json").exists() and not force:
        raise FileExistsError(f"{directory} already holds a coefficient dump")
    energies = S.outputs.row_energies()
    entries = []
    for i, p in enumerate(S.paths):
        entry = {"labels": [label_to_json(x) for x in p], "norm": float(np.sqrt(energies[i]))}
        if not norms_only:
            entry["file"] = f"coeffs/{i:06d}.sctb"
            atomic_write(directory / entry["file"], encode_array(S.grid, S.outputs.array[i]))
        entries.append(entry)
    index = {
        "schema": COEFF_SCHEMA,
        "grid": S.grid.to_dict(),
        "policy": S.policy.to_dict(),
        "norms_only": bool(norms_only),
        "ledger": {
            "input_energy": S.input_energy,
            "layer_energies": list(S.layer_energies),
            "output_energies": list(S.output_energies),
            "residual_energy": S.residual_energy,
            "pruned_energy": S.pruned_energy,
            "l2l2_norm": l2l2_norm(S),
        },
        "paths": entries,
    }
    atomic_write(directory / "index.json", json.dumps(index, indent=1) + "\n")
    return directory


def read_coefficients(directory) -> tuple[dict, dict]:
    """Return the parsed index and a path -> Signal map (empty if norms-only)."""
    directory = Path(directory)
    index = json.loads((directory / "index.json").read_text())
    if index.get("schema") != COEFF_SCHEMA:
        raise StructuralError(f"{directory}: unknown schema {index.get('schema')!r}")
    signals = {}
    for entry in index["paths"]:
        if "file" in entry:
            grid, values = decode_array((directory / entry["file"]).read_bytes())
            signals[tuple(label_from_json(x) for x in entry["labels"])] = Signal(grid, values)
    return index, signals

"""Output formats: GCUR field snapshots, diagnostics CSV and the run manifest."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os
import struct

import numpy as np

from . import __version__
from .diagnostics import CSV_COLUMNS
from .noise import RNG_ALGORITHM
from .spectral import Basis, StateU

MAGIC = b"GCUR"
VERSION = 1
CSV_SCHEMA = "gcur-diagnostics/1"
_HEADER = struct.Struct("<4sIIIII")


class SnapshotError(ValueError):
    pass


def write_snapshot(state, path):
    """Binary layout: magic, u32 version, u32 nx, u32 nz, u32 tags (q, S), <f8 q, <f8 S."""
    q = np.ascontiguousarray(state.q.coeffs, dtype="<f8")
    S = np.ascontiguousarray(state.S.coeffs, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, state.nx, state.nz,
                              int(state.q.basis), int(state.S.basis)))
        fh.write(q.tobytes())
        fh.write(S.tobytes())


def read_snapshot(path, nx=None, nz=None):
    """Inverse of :func:`write_snapshot`; optionally zero-pad into a larger context."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise SnapshotError(f"{path}: not a GCUR snapshot (bad magic)")
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    _, version, fnx, fnz, tq, ts = _HEADER.unpack_from(data)
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version} (expected {VERSION})")
    if (tq, ts) != (int(Basis.DirichletSine), int(Basis.NeumannCosine)):
        raise SnapshotError(f"{path}: unexpected basis tags ({tq}, {ts})")
    n = fnx * fnz
    need = _HEADER.size + 16 * n
    if len(data) < need:
        raise SnapshotError(f"{path}: truncated file ({len(data)} of {need} bytes)")
    if len(data) > need:
        raise SnapshotError(f"{path}: {len(data) - need} trailing bytes")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=2 * n)
    state = StateU.from_arrays(body[:n].reshape(fnx, fnz), body[n:].reshape(fnx, fnz))
    if nx is not None or nz is not None:
        state = state.embed(nx or fnx, nz or fnz)
    return state


def write_csv(path, columns, rows=None):
    """Diagnostics CSV in the fixed column order; floats written round-trip exact."""
    n = len(columns["t"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i in range(n if rows is None else len(rows)):
            j = i if rows is None else rows[i]
            w.writerow([repr(float(columns[c][j])) for c in CSV_COLUMNS])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {header}")
        rows = [[float(v) for v in row] for row in r]
    arr = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {c: arr[:, i] for i, c in enumerate(CSV_COLUMNS)}


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def write_manifest(out_dir, config, files, started, command, extra=None):
    """Write ``manifest.json`` last; every listed file is hashed."""
    inventory = {os.path.relpath(f, out_dir): sha256(f) for f in sorted(files)}
    doc = {
        "command": command,
        "config": config.to_dict(),
        "rng": RNG_ALGORITHM,
        "code_version": __version__,
        "csv_schema": CSV_SCHEMA,
        "snapshot_version": VERSION,
        "started": started,
        "finished": now(),
        "files": inventory,
    }
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    os.replace(tmp, path)
    return path


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)

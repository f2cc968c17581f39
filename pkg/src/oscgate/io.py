"""Atomic, deterministic writers for reports, curves and matrix dumps."""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


def atomic_write(path, text: str) -> Path:
    """Write UTF-8 text with LF endings via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        if len(r) != len(header):
            raise InvalidInputError("row length does not match header")
        lines.append(",".join(_fmt(v) for v in r))
    return "\n".join(lines) + "\n"


def write_curve(path, header: list[str], rows, fmt: str = "csv") -> Path:
    """Curve table as CSV (header row first) or as a JSON object of columns."""
    rows = [list(r) for r in rows]
    if fmt == "csv":
        return atomic_write(path, csv_text(header, rows))
    cols = {h: [_jsonable(r[i]) for r in rows] for i, h in enumerate(header)}
    return atomic_write(Path(path).with_suffix(".json"), json.dumps(cols, indent=2, sort_keys=False) + "\n")


def matrix_rows(M):
    M = np.asarray(M, dtype=complex)
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            yield [i, j, float(M[i, j].real), float(M[i, j].imag)]


def write_matrix(path, M) -> Path:
    """Dense complex matrix as ``row,col,re,im`` lines."""
    return atomic_write(path, csv_text(["row", "col", "re", "im"], matrix_rows(M)))


def read_matrix(path) -> np.ndarray:
    """Inverse of ``write_matrix``; ``.npy`` files are accepted as well."""
    path = Path(path)
    if path.suffix == ".npy":
        return np.asarray(np.load(path, allow_pickle=False), dtype=complex)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != ["row", "col", "re", "im"]:
            raise InvalidInputError(f"{path}: expected header row,col,re,im")
        entries = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise InvalidInputError(f"{path}:{lineno}: expected 4 fields")
            entries.append((int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])))
    if not entries:
        raise InvalidInputError(f"{path}: no entries")
    n = max(max(e[0], e[1]) for e in entries) + 1
    M = np.zeros((n, n), dtype=complex)
    seen = np.zeros((n, n), dtype=bool)
    for i, j, re, im in entries:
        M[i, j] = re + 1j * im
        seen[i, j] = True
    if not seen.all():
        raise InvalidInputError(f"{path}: matrix is missing entries")
    return M


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(_jsonable(obj), indent=2, allow_nan=True) + "\n")

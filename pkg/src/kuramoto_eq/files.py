"""On-disk formats: matrix CSV + JSON sidecar, phase vectors, trajectories, manifests.

Floats are written with ``repr`` so every value round-trips bit for bit.
All writers go through :func:`atomic_write_text` (temp file + rename).
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .dynamics import Trajectory
from .graphs import AdjacencyMatrix, GraphFlags, is_circulant

__all__ = [
    "FormatError",
    "atomic_write_text",
    "read_matrix",
    "read_phases",
    "sha256_file",
    "sidecar_path",
    "trajectory_csv",
    "long_form_csv",
    "write_json",
    "write_manifest",
    "write_matrix",
    "write_phases",
]


class FormatError(ValueError):
    """Malformed input file; the message carries ``path:line:column``."""

    def __init__(self, path: Path | str, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path, self.line, self.column = str(path), line, column


def atomic_write_text(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path: Path | str, obj: Any) -> Path:
    return atomic_write_text(path, dumps(obj))


def read_json(path: Path | str) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.lineno, exc.colno, exc.msg) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _rows_to_csv(rows: Iterable[Sequence[Any]], header: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _parse_numeric_csv(path: Path | str) -> list[list[float]]:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            parsed = []
            for col, cell in enumerate(row, start=1):
                try:
                    val = float(cell)
                except ValueError:
                    raise FormatError(path, lineno, col, f"not a number: {cell.strip()!r}") from None
                if not math.isfinite(val):
                    raise FormatError(path, lineno, col, f"non-finite value {cell.strip()!r}")
                parsed.append(val)
            rows.append(parsed)
    return rows


def sidecar_path(path: Path | str) -> Path:
    return Path(path).with_suffix(".json")


def write_matrix(path: Path | str, A: AdjacencyMatrix) -> tuple[Path, Path]:
    """Write ``A`` as a full-precision CSV plus a JSON sidecar with flags and provenance."""
    path = Path(path)
    atomic_write_text(path, _rows_to_csv(A.entries.tolist()))
    meta = {
        "n": A.n,
        "flags": {
            "symmetric": A.flags.symmetric,
            "circulant": A.flags.circulant,
            "zero_diagonal": A.flags.zero_diagonal,
        },
        "generator": A.generator,
        "seed": A.seed,
        "params": A.params,
    }
    side = write_json(sidecar_path(path), meta)
    return path, side


def read_matrix(path: Path | str) -> AdjacencyMatrix:
    """Load a matrix CSV; flags come from the sidecar when present, else are inferred exactly."""
    path = Path(path)
    rows = _parse_numeric_csv(path)
    n = len(rows)
    if n == 0:
        raise FormatError(path, 1, 1, "empty matrix file")
    for i, row in enumerate(rows, start=1):
        if len(row) != n:
            raise FormatError(path, i, len(row), f"expected {n} columns, found {len(row)}")
    a = np.array(rows, dtype=np.float64)
    side = sidecar_path(path)
    if side.exists():
        meta = read_json(side)
        if meta.get("n") not in (None, n):
            raise FormatError(side, 1, 1, f"sidecar says n={meta['n']} but CSV has {n} rows")
        f = meta.get("flags", {})
        flags = GraphFlags(
            symmetric=bool(f.get("symmetric", False)),
            circulant=bool(f.get("circulant", False)),
            zero_diagonal=bool(f.get("zero_diagonal", False)),
        )
        try:
            return AdjacencyMatrix(
                a, flags=flags, generator=meta.get("generator", "user"), params=meta.get("params", {}), seed=meta.get("seed")
            )
        except ValueError as exc:
            raise FormatError(side, 1, 1, f"sidecar flags contradict matrix: {exc}") from None
    flags = GraphFlags(
        symmetric=bool(np.array_equal(a, a.T)),
        circulant=is_circulant(a),
        zero_diagonal=bool(np.all(np.diag(a) == 0.0)),
    )
    return AdjacencyMatrix(a, flags=flags, generator="file", params={"path": str(path)})


def write_phases(path: Path | str, theta: Sequence[float]) -> Path:
    """One phase per line."""
    return atomic_write_text(path, _rows_to_csv([[float(v)] for v in theta]))


def read_phases(path: Path | str) -> np.ndarray:
    """Read a phase vector stored as a single row or a single column."""
    rows = _parse_numeric_csv(path)
    if not rows:
        raise FormatError(path, 1, 1, "empty phase file")
    if len(rows) == 1:
        return np.array(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != 1:
            raise FormatError(path, i, 2, "phase file must be one row or one column")
    return np.array([r[0] for r in rows])


def trajectory_csv(
    traj: Trajectory,
    omega: float = 0.0,
    with_order_parameter: bool = False,
) -> str:
    """Wide trajectory table: ``t, theta_1..theta_n`` (+ ``absx_*`` for the complex model, + ``R``).

    ``omega`` adds the common rotation back for display; dynamics are unaffected.
    """
    n = traj.n
    phases = traj.displayed(omega) if omega else traj.phases
    header = ["t"] + [f"theta_{i + 1}" for i in range(n)]
    cols = [traj.times[:, None], phases]
    if traj.amplitudes is not None:
        header += [f"absx_{i + 1}" for i in range(n)]
        cols.append(np.abs(traj.amplitudes))
    if with_order_parameter:
        header.append("R")
        cols.append(traj.order_parameter()[:, None])
    table = np.hstack(cols)
    return _rows_to_csv((list(map(float, r)) for r in table), header)


def long_form_csv(trajs: Mapping[str, Trajectory], omega: float = 0.0) -> str:
    """Spatiotemporal plot data: one ``(model, t, node, phase)`` row per sample and node."""
    rows = []
    for label, tr in trajs.items():
        phases = tr.displayed(omega) if omega else tr.phases
        for t, row in zip(tr.times, phases):
            for node, ph in enumerate(row, start=1):
                rows.append([label, float(t), node, float(ph)])
    return _rows_to_csv(rows, ["model", "t", "node", "phase"])


def sha256_file(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    path: Path | str,
    command: str,
    argv: Sequence[str],
    params: Mapping[str, Any],
    inputs: Sequence[Path | str] = (),
    outputs: Sequence[Path | str] = (),
) -> Path:
    """Record everything needed to rerun a command: argv, parameters, version, file hashes.

    No timestamps, so reruns of deterministic commands reproduce the
    manifest byte for byte as well.
    """
    manifest = {
        "tool": "kuramoto-eq",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "params": dict(params),
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs if Path(p).exists()},
    }
    return write_json(path, manifest)

"""Field, trace and table serialisation.

Binary field format (little endian): a 32-byte header

    magic  4 bytes  b"WSF1"
    nx     int32
    ny     int32
    h      float64
    ncomp  int32
    pad    8 bytes (zero)

followed by ``ncomp * nx * ny`` complex128 values in C order
(component, x index, y index).
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

MAGIC = b"WSF1"
HEADER = struct.Struct("<4siidi8x")


def write_field_binary(path, values: np.ndarray, h: float) -> None:
    """Write a scalar ``(nx, ny)`` or multi-component ``(ncomp, nx, ny)`` field."""
    v = np.asarray(values, dtype="<c16")
    if v.ndim == 2:
        v = v[None]
    if v.ndim != 3:
        raise ConfigurationError("fields must have shape (nx, ny) or (ncomp, nx, ny)")
    ncomp, nx, ny = v.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, nx, ny, float(h), ncomp))
        fh.write(np.ascontiguousarray(v).tobytes())


def read_field_binary(path) -> tuple[np.ndarray, float]:
    """Return ``(values with shape (ncomp, nx, ny), h)``."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ConfigurationError("file too short for a field header")
    magic, nx, ny, h, ncomp = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"bad magic {magic!r}")
    n = ncomp * nx * ny
    if len(raw) != HEADER.size + 16 * n:
        raise ConfigurationError("payload size does not match the header")
    data = np.frombuffer(raw, dtype="<c16", offset=HEADER.size, count=n)
    return data.reshape(ncomp, nx, ny).astype(complex), float(h)


def write_field_csv(path, values: np.ndarray, grid) -> None:
    """Rows ``component, node, x, y, re, im`` (node index in C order)."""
    v = np.asarray(values)
    if v.ndim == 2:
        v = v[None]
    X, Y = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "node", "x", "y", "re", "im"])
        for c, comp in enumerate(v):
            flat = comp.ravel()
            for n, (x, y, z) in enumerate(zip(X.ravel(), Y.ravel(), flat)):
                w.writerow([c, n, repr(float(x)), repr(float(y)), repr(float(np.real(z))), repr(float(np.imag(z)))])


def read_field_csv(path, shape: tuple[int, int]) -> np.ndarray:
    """Read a field written by :func:`write_field_csv` into ``(ncomp, nx, ny)``."""
    rows = _read_rows(path)
    ncomp = 1 + max(int(r["component"]) for r in rows)
    out = np.zeros((ncomp, shape[0] * shape[1]), complex)
    for r in rows:
        out[int(r["component"]), int(r["node"])] = float(r["re"]) + 1j * float(r["im"])
    return out.reshape((ncomp,) + tuple(shape))


def write_trace_csv(path, trace) -> None:
    """Rows ``s, t, re, im`` for a single (unbatched) boundary trace."""
    vals = np.asarray(trace.values)
    if vals.ndim != 2:
        raise ConfigurationError("only unbatched traces can be written")
    mesh = trace.mesh
    t = mesh.grid.t
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "t", "re", "im"])
        for k in range(vals.shape[0]):
            for j in range(vals.shape[1]):
                z = vals[k, j]
                w.writerow([repr(float(mesh.s[j])), repr(float(t[k])), repr(float(z.real)), repr(float(z.imag))])


def read_trace_csv(path, nt: int, nsamples: int) -> np.ndarray:
    rows = _read_rows(path)
    if len(rows) != (nt + 1) * nsamples:
        raise ConfigurationError("row count does not match the trace shape")
    vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return vals.reshape(nt + 1, nsamples)


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    """Write dictionaries as CSV with a fixed column order; floats in repr form."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_rows_csv(path) -> list[dict]:
    return _read_rows(path)


GO_COLUMNS = ["sign", "omega_angle", "y_x", "y_y", "lambda", "r_l2", "grad_r_l2"]
RAY_COLUMNS = ["kind", "omega_angle", "offset", "y_x", "y_y", "lambda", "extracted_re", "extracted_im",
               "oracle_re", "oracle_im"]
SLICE_COLUMNS = ["xi_x", "xi_y", "omega_x", "omega_y", "weight", "re", "im"]


def ray_rows(samples) -> list[dict]:
    return [{"kind": s.kind, "omega_angle": s.omega.angle, "offset": s.offset, "y_x": s.y[0], "y_y": s.y[1],
             "lambda": s.lam, "extracted_re": s.extracted_value.real, "extracted_im": s.extracted_value.imag,
             "oracle_re": s.oracle_value.real, "oracle_im": s.oracle_value.imag} for s in samples]


def write_ray_csv(path, samples) -> None:
    write_rows_csv(path, ray_rows(samples), RAY_COLUMNS)


def write_slice_csv(path, slices) -> None:
    rows = [{"xi_x": x[0], "xi_y": x[1], "omega_x": o[0], "omega_y": o[1], "weight": w, "re": v.real,
             "im": v.imag} for x, o, w, v in zip(slices.xi, slices.omega, slices.weights, slices.values)]
    write_rows_csv(path, rows, SLICE_COLUMNS)


def write_slice_binary(path, slices, n_directions: int) -> None:
    """Slice values as a ``(n_directions, n_k)`` field; ``h`` stores the frequency step."""
    vals = np.asarray(slices.values).reshape(n_directions, -1)
    k = np.sum(slices.xi[: vals.shape[1]] ** 2, axis=1) ** 0.5
    dk = float(np.min(np.diff(np.sort(np.unique(np.round(k, 12)))))) if vals.shape[1] > 1 else 1.0
    write_field_binary(path, vals, dk)


__all__ = [
    "GO_COLUMNS", "HEADER", "MAGIC", "RAY_COLUMNS", "SLICE_COLUMNS", "read_field_binary", "read_field_csv",
    "read_rows_csv", "read_trace_csv", "ray_rows", "write_field_binary", "write_field_csv", "write_ray_csv",
    "write_rows_csv", "write_slice_binary", "write_slice_csv", "write_trace_csv",
]

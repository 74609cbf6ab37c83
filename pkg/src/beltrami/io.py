"""CSV/JSON serialisation of fields, coefficients and reports.

Field CSV: header ``x,y,re,im``, one row per node in row-major order
(``i`` along x outer, ``j`` along y inner). Coefficient CSV: header
``x,y,re_mu,im_mu,re_nu,im_nu``. Both carry a JSON sidecar with the same stem::

    {"center_re", "center_im", "halfwidth", "resolution", "meaning"}
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .coefficients import CoefficientField
from .errors import FormatError
from .grid import ComplexField, GridSpec

FIELD_HEADER = ["x", "y", "re", "im"]
COEFF_HEADER = ["x", "y", "re_mu", "im_mu", "re_nu", "im_nu"]
SIGNIFICANT = 12


def _fmt(v: float) -> str:
    return repr(float(v))


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _write_sidecar(path, spec: GridSpec, meaning: str):
    meta = {
        "center_re": spec.center.real,
        "center_im": spec.center.imag,
        "halfwidth": spec.halfwidth,
        "resolution": spec.resolution,
        "meaning": meaning,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def _write_rows(path, spec: GridSpec, header, columns):
    z = spec.nodes().ravel()
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        cols = [z.real, z.imag] + [np.ravel(c) for c in columns]
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_field(path, field: ComplexField) -> Path:
    path = Path(path)
    v = field.values
    _write_rows(path, field.spec, FIELD_HEADER, [v.real, v.imag])
    _write_sidecar(path, field.spec, field.meaning)
    return path


def write_coefficients(path, coeff: CoefficientField) -> Path:
    path = Path(path)
    mu, nu = coeff.mu.values, coeff.nu.values
    _write_rows(path, coeff.spec, COEFF_HEADER, [mu.real, mu.imag, nu.real, nu.imag])
    _write_sidecar(path, coeff.spec, "coefficient")
    return path


def _read_rows(path, header):
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: line 1: empty file") from None
        if [c.strip() for c in first] != header:
            raise FormatError(f"{path}: line 1: expected header {','.join(header)}, got {','.join(first)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric entry in {row}") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.array(rows)


def _spec_for(path, data) -> tuple[GridSpec, str | None]:
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
            spec = GridSpec(complex(meta["center_re"], meta["center_im"]), meta["halfwidth"], int(meta["resolution"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"{side}: invalid grid metadata ({exc})") from None
        return spec, meta.get("meaning")
    n = int(round(math.sqrt(len(data))))
    if n * n != len(data) or n < 2:
        raise FormatError(f"{path}: {len(data)} rows do not form a square grid")
    h = data[1, 1] - data[0, 1]
    center = complex(data[:, 0].mean(), data[:, 1].mean())
    return GridSpec(center, n * h / 2, n), None


def _check_nodes(path, spec: GridSpec, data):
    if len(data) != spec.resolution**2:
        raise FormatError(f"{path}: expected {spec.resolution**2} rows, got {len(data)}")
    z = spec.nodes().ravel()
    err = np.abs(data[:, 0] + 1j * data[:, 1] - z)
    bad = np.nonzero(err > 1e-9 * max(1.0, spec.halfwidth))[0]
    if bad.size:
        raise FormatError(f"{path}: line {bad[0] + 2}: node coordinates do not match the grid")


def read_field(path, meaning: str | None = None) -> ComplexField:
    data = _read_rows(path, FIELD_HEADER)
    spec, stored = _spec_for(path, data)
    _check_nodes(path, spec, data)
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(spec.shape)
    return ComplexField(spec, vals, meaning or stored or "scalar")


def read_coefficients(path) -> CoefficientField:
    data = _read_rows(path, COEFF_HEADER)
    spec, _ = _spec_for(path, data)
    _check_nodes(path, spec, data)
    mu = (data[:, 2] + 1j * data[:, 3]).reshape(spec.shape)
    nu = (data[:, 4] + 1j * data[:, 5]).reshape(spec.shape)
    try:
        return CoefficientField(ComplexField(spec, mu, "coefficient"), ComplexField(spec, nu, "coefficient"))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def clean(obj, digits: int = SIGNIFICANT):
    """Convert to JSON-safe builtins with floats rounded to ``digits`` significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real, digits), clean(obj.imag, digits)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.{digits}g}")
    return obj


def dump_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(clean(obj), indent=2) + "\n")
    return path

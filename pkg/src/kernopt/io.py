"""CSV and JSON persistence with schema validation on read-back.

Floats are written with repr so files round-trip exactly; every reader
checks the documented header before parsing and names the offending
column on mismatch.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .krr import Dataset
from .spectra import EigenSequence

SPECTRUM_HEADER = ("index", "value")


class SchemaError(ValueError):
    """A CSV whose header or cells do not match the documented schema."""


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def format_row(values) -> str:
    out = []
    for v in values:
        if isinstance(v, float):
            # builtin-float repr round-trips; np.float64 repr does not parse
            out.append(repr(float(v)))
        else:
            out.append(str(v))
    return ",".join(out)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(format_row(row) for row in rows)
    write_text(path, "\n".join(lines) + "\n")


def read_csv(path, expected_header) -> list[dict]:
    """Rows as string dicts; the header must match the schema exactly."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = tuple(lines[0].split(","))
    expected = tuple(expected_header)
    if header != expected:
        for i, want in enumerate(expected):
            got = header[i] if i < len(header) else "<missing>"
            if got != want:
                raise SchemaError(
                    f"{path}: column {i + 1} expected {want!r}, got {got!r}"
                )
        raise SchemaError(f"{path}: {len(header) - len(expected)} extra "
                          "columns")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(expected):
            raise SchemaError(
                f"{path}: row {len(rows) + 2} has {len(cells)} cells, "
                f"expected {len(expected)}"
            )
        rows.append(dict(zip(expected, cells)))
    return rows


def parse_float(row: dict, column: str) -> float:
    try:
        return float(row[column])
    except ValueError as exc:
        raise SchemaError(f"column {column!r}: {row[column]!r} is not a "
                          "number") from exc


# ---------------------------------------------------------------------------
# Spectrum files: "index,value" with 1-based flat indices and an optional
# tail-certificate footer comment


def save_spectrum(path, spec: EigenSequence) -> None:
    flat = spec.to_flat() if spec.indexing != "flat" else spec
    lines = [",".join(SPECTRUM_HEADER)]
    for i, v in enumerate(flat.values, start=1):
        lines.append(f"{i},{float(v)!r}")
    if flat.tail_exponent is not None:
        lines.append(
            f"# tail_exponent={float(flat.tail_exponent)!r} "
            f"tail_constant={float(flat.tail_constant)!r}"
        )
    write_text(path, "\n".join(lines) + "\n")


def load_spectrum(path) -> EigenSequence:
    text = Path(path).read_text(encoding="utf-8")
    tail_s = tail_c = None
    for ln in text.splitlines():
        if ln.startswith("#"):
            fields = dict(part.split("=") for part in ln[1:].split())
            if "tail_exponent" in fields:
                tail_s = float(fields["tail_exponent"])
                tail_c = float(fields["tail_constant"])
    rows = read_csv(path, SPECTRUM_HEADER)
    values = np.empty(len(rows))
    for k, row in enumerate(rows):
        if int(row["index"]) != k + 1:
            raise SchemaError(f"{path}: indices must be 1-based and "
                              "consecutive")
        values[k] = parse_float(row, "value")
    return EigenSequence(values, indexing="flat", tail_exponent=tail_s,
                         tail_constant=tail_c)


# ---------------------------------------------------------------------------
# Datasets: "x1..xm,y"


def save_dataset(path, data: Dataset) -> None:
    m = data.inputs.shape[1]
    header = tuple(f"x{d + 1}" for d in range(m)) + ("y",)
    rows = [tuple(x) + (y,) for x, y in zip(data.inputs, data.labels)]
    write_csv(path, header, rows)


def load_dataset(path, dim: int) -> Dataset:
    header = tuple(f"x{d + 1}" for d in range(dim)) + ("y",)
    rows = read_csv(path, header)
    X = np.empty((len(rows), dim))
    y = np.empty(len(rows))
    for k, row in enumerate(rows):
        for d in range(dim):
            X[k, d] = parse_float(row, f"x{d + 1}")
        y[k] = parse_float(row, "y")
    return Dataset(X, y)


# ---------------------------------------------------------------------------
# Manifests and config echoes


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_json(path, payload: dict) -> None:
    write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))

"""File formats: channel map containers and CSV result tables.

A channel map is stored as a two-file container directory:

    <dir>/meta.json     grid, carrier and provenance metadata
    <dir>/payload.bin   nx*ny*M complex values, each as two little-endian
                        float64 (real then imaginary), position-major then
                        antenna-minor, position rows in row-major (i, j) order

Tables are RFC-4180 CSV with a one-line header; floats are written with
shortest round-trip formatting so re-reading reproduces them exactly.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, InvalidParams, IoError, SerializationError
from .synth import CarrierSpec, ChannelMap, GridSpec

FORMAT_VERSION = 1
PAYLOAD_DTYPE = "c128le"
VALID_SOURCES = ("synthetic-los", "synthetic-nlos", "synthetic-mixed", "measured")

META_NAME = "meta.json"
PAYLOAD_NAME = "payload.bin"


def write_map(chan_map: ChannelMap, path) -> None:
    """Write a channel map container directory (meta.json + payload.bin)."""
    grid, carrier = chan_map.grid, chan_map.carrier
    if chan_map.source not in VALID_SOURCES:
        raise SerializationError(
            f"source {chan_map.source!r} not one of {VALID_SOURCES}")
    meta = {
        "format_version": FORMAT_VERSION,
        "nx": grid.nx,
        "ny": grid.ny,
        "delta_m": grid.delta,
        "x0": grid.origin[0],
        "y0": grid.origin[1],
        "fc_hz": carrier.fc,
        "M": chan_map.m,
        "row_order": "row-major",
        "payload_dtype": PAYLOAD_DTYPE,
        "source": chan_map.source,
    }
    if chan_map.seed is not None:
        meta["seed"] = chan_map.seed
    if chan_map.params is not None:
        meta["params"] = chan_map.params
    payload = np.ascontiguousarray(chan_map.coeffs.astype("<c16")).tobytes()
    base = Path(path)
    try:
        base.mkdir(parents=True, exist_ok=True)
        (base / META_NAME).write_text(
            json.dumps(meta, sort_keys=True, indent=2) + "\n")
        (base / PAYLOAD_NAME).write_bytes(payload)
    except OSError as exc:
        raise IoError(f"cannot write map container {base}: {exc}") from exc


def read_map(path) -> ChannelMap:
    """Read a channel map container directory, validating format strictly."""
    base = Path(path)
    meta_path, payload_path = base / META_NAME, base / PAYLOAD_NAME
    if not meta_path.is_file() or not payload_path.is_file():
        raise IoError(f"map container {base} is missing {META_NAME} or {PAYLOAD_NAME}")
    try:
        meta = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse {meta_path}: {exc}") from exc

    def need(key, kind):
        if key not in meta:
            raise FormatError(f"{meta_path}: missing field {key!r}")
        val = meta[key]
        if kind is float and isinstance(val, int):
            val = float(val)
        if not isinstance(val, kind):
            raise FormatError(f"{meta_path}: field {key!r} has type "
                              f"{type(val).__name__}, expected {kind.__name__}")
        return val

    version = need("format_version", int)
    if version != FORMAT_VERSION:
        raise FormatError(f"{meta_path}: unsupported format_version {version}")
    nx, ny, m = need("nx", int), need("ny", int), need("M", int)
    delta = need("delta_m", float)
    x0, y0 = need("x0", float), need("y0", float)
    fc = need("fc_hz", float)
    if need("row_order", str) != "row-major":
        raise FormatError(f"{meta_path}: unsupported row_order {meta['row_order']!r}")
    if need("payload_dtype", str) != PAYLOAD_DTYPE:
        raise FormatError(f"{meta_path}: unsupported payload_dtype "
                          f"{meta['payload_dtype']!r}")
    source = need("source", str)
    if source not in VALID_SOURCES:
        raise FormatError(f"{meta_path}: source {source!r} not one of {VALID_SOURCES}")
    if nx < 1 or ny < 1 or m < 1 or not delta > 0 or not fc > 0:
        raise FormatError(f"{meta_path}: invalid dimensions "
                          f"nx={nx} ny={ny} M={m} delta_m={delta} fc_hz={fc}")

    try:
        payload = payload_path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {payload_path}: {exc}") from exc
    expected = nx * ny * m * 16
    if len(payload) != expected:
        raise FormatError(f"{payload_path}: expected {expected} payload bytes "
                          f"for {nx}x{ny}x{m}, found {len(payload)}")
    coeffs = np.frombuffer(payload, dtype="<c16").reshape(nx * ny, m)
    try:
        return ChannelMap(
            grid=GridSpec(nx=nx, ny=ny, delta=delta, origin=(x0, y0)),
            carrier=CarrierSpec(fc=fc),
            coeffs=coeffs.astype(np.complex128),
            source=source,
            seed=meta.get("seed"),
            params=meta.get("params"),
        )
    except InvalidParams as exc:
        raise FormatError(f"{base}: {exc}") from exc


@dataclass
class ResultTable:
    """Rectangular table of int/float/str cells with named columns."""

    columns: list
    rows: list

    def __post_init__(self):
        ncol = len(self.columns)
        for r, row in enumerate(self.rows):
            if len(row) != ncol:
                raise SerializationError(
                    f"row {r} has {len(row)} cells, expected {ncol}")

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise SerializationError("boolean cells are not part of the table format")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            raise SerializationError(f"non-finite numeric cell: {value}")
        return repr(value)
    if isinstance(value, str):
        return value
    raise SerializationError(f"unsupported cell type {type(value).__name__}")


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return text
    if not np.isfinite(value):
        return text
    return value


def write_table(table: ResultTable, path) -> None:
    """Write a table as RFC-4180 CSV with one header line."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as exc:
        raise IoError(f"cannot write table {path}: {exc}") from exc


def read_table(path) -> ResultTable:
    """Read a CSV table, recovering int/float cells exactly."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"{path}: empty file, expected a header line")
            rows = [tuple(_parse_cell(cell) for cell in row) for row in reader]
    except OSError as exc:
        raise IoError(f"cannot read table {path}: {exc}") from exc
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise FormatError(f"{path}: row {r} has {len(row)} cells, "
                              f"expected {len(header)}")
    return ResultTable(columns=list(header), rows=rows)


def write_centroids(centroids: np.ndarray, path) -> None:
    """Write a (k, M) centroid matrix using the map payload layout."""
    centroids = np.asarray(centroids, dtype=np.complex128)
    if centroids.ndim != 2:
        raise SerializationError(f"centroids must be 2D, got shape {centroids.shape}")
    k, m = centroids.shape
    meta = {
        "format_version": FORMAT_VERSION,
        "k": k,
        "M": m,
        "payload_dtype": PAYLOAD_DTYPE,
    }
    base = Path(path)
    try:
        base.mkdir(parents=True, exist_ok=True)
        (base / META_NAME).write_text(
            json.dumps(meta, sort_keys=True, indent=2) + "\n")
        (base / PAYLOAD_NAME).write_bytes(
            np.ascontiguousarray(centroids.astype("<c16")).tobytes())
    except OSError as exc:
        raise IoError(f"cannot write centroid container {base}: {exc}") from exc


def read_centroids(path) -> np.ndarray:
    """Read a centroid matrix written by `write_centroids`."""
    base = Path(path)
    try:
        meta = json.loads((base / META_NAME).read_text())
        payload = (base / PAYLOAD_NAME).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read centroid container {base}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"cannot parse {base / META_NAME}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{base}: unsupported format_version "
                          f"{meta.get('format_version')}")
    k, m = meta.get("k"), meta.get("M")
    if not isinstance(k, int) or not isinstance(m, int) or k < 1 or m < 1:
        raise FormatError(f"{base}: invalid centroid dimensions k={k} M={m}")
    if len(payload) != k * m * 16:
        raise FormatError(f"{base}: expected {k * m * 16} payload bytes, "
                          f"found {len(payload)}")
    return np.frombuffer(payload, dtype="<c16").reshape(k, m).astype(np.complex128)


def positions_with_cells(grid: GridSpec) -> Sequence[tuple[int, int]]:
    """(i, j) pairs in row-major order, matching coefficient row order."""
    return [(i, j) for i in range(grid.nx) for j in range(grid.ny)]

"""CSV and ASCII PLY persistence."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset
from .diagnostics import ConvergenceReport, DensityGrid, LeakageReport
from .errors import InvalidArgumentError, ParseError, SchemaError, UnsupportedFormatError
from .sampler import Provenance, SimulatedSet

__all__ = ["CsvSchema", "PlyCloud", "format_real", "load_csv", "load_ply", "save_csv", "save_ply"]

_REAL = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


def format_real(x: float) -> str:
    """Shortest string that parses back to the same double."""
    return repr(float(x))


def _is_real(cell: str) -> bool:
    return _REAL.fullmatch(cell.strip()) is not None


@dataclass(frozen=True)
class CsvSchema:
    has_header: bool | None = None  # None: header iff no cell of the first row is numeric
    delimiter: str = ","
    columns: int | None = None

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise InvalidArgumentError(f"delimiter must be a single character, got {self.delimiter!r}")


def load_csv(path, schema: CsvSchema | None = None) -> Dataset:
    schema = schema or CsvSchema()
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh, delimiter=schema.delimiter))]
    rows = [(ln, r) for ln, r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidArgumentError(f"{path}: file is empty")
    has_header = schema.has_header
    if has_header is None:
        has_header = not any(_is_real(c) for c in rows[0][1])
    labels = None
    if has_header:
        labels = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise InvalidArgumentError(f"{path}: no data rows after the header")
    width = len(labels) if labels is not None else len(rows[0][1])
    if schema.columns is not None and width != schema.columns:
        raise ParseError(f"expected {schema.columns} columns, found {width}", path=path)
    values = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(f"expected {width} fields, found {len(cells)}", path=path, line=line)
        for c, cell in enumerate(cells):
            if not _is_real(cell):
                raise ParseError(f"not a finite real number: {cell!r}", path=path, line=line, column=c + 1)
            values[r, c] = float(cell)
    if not np.all(np.isfinite(values)):
        line, col = np.argwhere(~np.isfinite(values))[0]
        raise ParseError("value overflows double precision", path=path, line=rows[line][0], column=col + 1)
    return Dataset(values, labels)


def _write_rows(path, header, rows):
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _matrix_rows(values):
    for row in values.tolist():
        yield [repr(x) for x in row]


def save_csv(obj, path) -> None:
    """Write a Dataset, SimulatedSet, Provenance or report as UTF-8 CSV.

    Reals use the shortest round-trip representation. Density grids are
    written long-form as ``x,y,density`` triples.
    """
    if isinstance(obj, (Dataset, SimulatedSet)):
        _write_rows(path, obj.labels(), _matrix_rows(obj.values))
    elif isinstance(obj, ConvergenceReport):
        _write_rows(
            path,
            ["n", "conv1", "conv2"],
            ([str(int(n)), repr(float(a)), repr(float(b))] for n, a, b in zip(obj.checkpoints, obj.conv1, obj.conv2)),
        )
    elif isinstance(obj, DensityGrid):
        xs, ys = obj.x_edges.tolist(), obj.y_edges.tolist()
        dens = obj.density.tolist()
        _write_rows(
            path,
            ["x", "y", "density"],
            ([repr(x), repr(y), repr(dens[i][j])] for i, x in enumerate(xs) for j, y in enumerate(ys)),
        )
    elif isinstance(obj, Provenance):
        k = obj.indices.shape[1]
        header = ["pivot"] + [f"idx{i + 1}" for i in range(k)] + [f"w{i + 1}" for i in range(k)]
        idx, piv, w = obj.indices.tolist(), obj.pivots.tolist(), obj.weights.tolist()
        _write_rows(
            path,
            header,
            ([str(piv[j])] + [str(i) for i in idx[j]] + [repr(x) for x in w[j]] for j in range(len(piv))),
        )
    elif isinstance(obj, LeakageReport):
        _write_rows(
            path,
            ["level", "sim_nn_distance", "data_nn_distance"],
            ([repr(p), repr(q), repr(obj.reference_quantiles[p])] for p, q in obj.quantiles.items()),
        )
    else:
        raise InvalidArgumentError(f"cannot save objects of type {type(obj).__name__} as CSV")


@dataclass(frozen=True)
class PlyCloud:
    vertex_count: int
    coordinates: np.ndarray

    def as_dataset(self) -> Dataset:
        return Dataset(self.coordinates, ("x", "y", "z"))


_PLY_FLOATS = {"float", "float32", "double", "float64"}
_PLY_SCALARS = _PLY_FLOATS | {
    "char", "uchar", "short", "ushort", "int", "uint",
    "int8", "uint8", "int16", "uint16", "int32", "uint32",
}


def _read_ply(path) -> PlyCloud:
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    lines = raw.split(b"\n")
    if not lines or lines[0].strip() != b"ply":
        raise ParseError("missing 'ply' magic line", path=path, line=1)
    elements = []  # [name, count, [(name, type, is_list)]]
    body_start = None
    for i, bline in enumerate(lines[1:], start=2):
        try:
            line = bline.decode("ascii").strip()
        except UnicodeDecodeError:
            raise ParseError("non-ASCII bytes in header", path=path, line=i) from None
        if not line:
            continue
        tok = line.split()
        key = tok[0]
        if key == "format":
            if len(tok) < 3:
                raise ParseError("malformed format line", path=path, line=i)
            if tok[1] != "ascii":
                raise UnsupportedFormatError(
                    f"PLY format '{tok[1]}' is not supported; only 'ascii 1.0' is read", path=path, line=i
                )
        elif key in ("comment", "obj_info"):
            continue
        elif key == "element":
            if len(tok) != 3 or not tok[2].isdigit():
                raise ParseError("malformed element line", path=path, line=i)
            elements.append([tok[1], int(tok[2]), []])
        elif key == "property":
            if not elements:
                raise ParseError("property before any element", path=path, line=i)
            if len(tok) == 5 and tok[1] == "list":
                elements[-1][2].append((tok[4], "list", True))
            elif len(tok) == 3 and tok[1] in _PLY_SCALARS:
                elements[-1][2].append((tok[2], tok[1], False))
            else:
                raise ParseError(f"malformed property line: {line!r}", path=path, line=i)
        elif key == "end_header":
            body_start = i
            break
        else:
            raise ParseError(f"unknown header keyword {key!r}", path=path, line=i)
    if body_start is None:
        raise ParseError("header has no end_header line", path=path)
    vertex = next((e for e in elements if e[0] == "vertex"), None)
    if vertex is None:
        raise SchemaError("no vertex element declared", path=path)
    props = {name: (pos, typ, is_list) for pos, (name, typ, is_list) in enumerate(vertex[2])}
    for axis in "xyz":
        if axis not in props:
            raise SchemaError(f"vertex element lacks property '{axis}'", path=path)
        if props[axis][2] or props[axis][1] not in _PLY_FLOATS:
            raise SchemaError(f"vertex property '{axis}' must be float or double", path=path)
    has_lists = any(p[2] for p in vertex[2])
    cols = [props[a][0] for a in "xyz"]
    line_no = body_start  # index into lines is line_no (1-based line after end_header)
    coords = None
    for name, count, plist in elements:
        if name != "vertex":
            for _ in range(count):
                while line_no < len(lines) and not lines[line_no].strip():
                    line_no += 1
                if line_no >= len(lines):
                    raise ParseError(f"file ends inside element '{name}'", path=path)
                line_no += 1
            continue
        coords = np.empty((count, 3))
        for v in range(count):
            while line_no < len(lines) and not lines[line_no].strip():
                line_no += 1
            if line_no >= len(lines):
                raise ParseError(
                    f"vertex count mismatch: header declares {count}, file has {v}", path=path
                )
            tok = lines[line_no].split()
            line_no += 1
            if has_lists:
                vals, t = [], 0
                for _, _, is_list in plist:
                    if t >= len(tok):
                        break
                    if is_list:
                        t += 1 + int(tok[t])
                        vals.append(None)
                    else:
                        vals.append(tok[t])
                        t += 1
                ok = t == len(tok) and len(vals) == len(plist)
            else:
                vals, ok = tok, len(tok) == len(plist)
            if not ok:
                raise ParseError(
                    f"vertex {v} has {len(tok)} fields, expected {len(plist)}", path=path, line=line_no
                )
            try:
                coords[v] = [float(vals[c]) for c in cols]
            except ValueError:
                raise ParseError(f"vertex {v} has a non-numeric coordinate", path=path, line=line_no) from None
    while line_no < len(lines) and not lines[line_no].strip():
        line_no += 1
    if line_no < len(lines):
        raise ParseError("data after the last declared element (vertex count mismatch?)", path=path, line=line_no + 1)
    if not np.all(np.isfinite(coords)):
        raise ParseError("non-finite vertex coordinate", path=path)
    return PlyCloud(coords.shape[0], coords)


def load_ply(path) -> Dataset:
    """Vertices of an ASCII PLY file as an ``m x 3`` dataset, in file order.

    Faces, edges and extra vertex properties are ignored.
    """
    return _read_ply(path).as_dataset()


def save_ply(values, path, comment: str | None = None) -> None:
    """Write an ``m x 3`` point cloud as ASCII PLY (vertices only)."""
    if isinstance(values, (Dataset, SimulatedSet)):
        values = values.values
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != 3:
        raise InvalidArgumentError(f"PLY export needs an m x 3 matrix, got shape {values.shape}")
    header = ["ply", "format ascii 1.0"]
    if comment:
        header.append(f"comment {comment}")
    header += [f"element vertex {values.shape[0]}", "property double x", "property double y",
               "property double z", "end_header"]
    _write_rows(path, [header[0]], ([h] for h in header[1:]))
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        for row in values.tolist():
            fh.write(" ".join(repr(x) for x in row) + "\n")

"""Plain-text loaders and writers for meshes, point clouds, edge lists, bitmaps."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError

FLOAT_FORMAT = "%.17g"


def _records(path) -> list[tuple[int, list[str]]]:
    """Non-blank, non-comment lines as ``(line number, tokens)``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    if not out:
        raise InputError(f"{path}: file is empty")
    return out


def _table(path, kind, parse, width: int | None = None) -> np.ndarray:
    rows = []
    expected = width
    for lineno, tokens in _records(path):
        if expected is None:
            expected = len(tokens)
        if len(tokens) != expected:
            raise InputError(f"{path}:{lineno}: expected {expected} values, found {len(tokens)}")
        try:
            rows.append([parse(t) for t in tokens])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: not a valid {kind} row") from exc
    return np.array(rows)


def _float(token: str) -> float:
    value = float(token)
    if not np.isfinite(value):
        raise ValueError(token)
    return value


def load_points(path) -> np.ndarray:
    """One point per line, whitespace-separated coordinates."""
    return _table(path, "coordinate", _float).astype(float)


def load_elements(path) -> np.ndarray:
    """One simplex per line, 0-based vertex indices."""
    return _table(path, "index", int).astype(np.int64)


def load_mesh(vertices_path, elements_path):
    """Vertices and top simplices, built into a :class:`SimplicialComplex`."""
    from .simplicial_complex import build_complex

    vertices = load_points(vertices_path)
    elements = load_elements(elements_path)
    bad = np.nonzero((elements < 0) | (elements >= len(vertices)))
    if bad[0].size:
        raise InputError(
            f"{elements_path}: element {int(bad[0][0])} references vertex "
            f"{int(elements[bad][0])} but only {len(vertices)} vertices exist"
        )
    return build_complex(vertices, elements)


def load_edges(path) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``i j value``: an oriented edge i -> j and its cochain value."""
    edges, values = [], []
    for lineno, tokens in _records(path):
        if len(tokens) != 3:
            raise InputError(f"{path}:{lineno}: expected 'i j value', found {len(tokens)} fields")
        try:
            i, j, w = int(tokens[0]), int(tokens[1]), _float(tokens[2])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: not a valid edge row") from exc
        if i < 0 or j < 0:
            raise InputError(f"{path}:{lineno}: vertex labels must be nonnegative")
        if i == j:
            raise InputError(f"{path}:{lineno}: edge joins vertex {i} to itself")
        edges.append((i, j))
        values.append(w)
    return np.array(edges, dtype=np.int64), np.array(values)


def load_bitmap(path) -> np.ndarray:
    """Bitmap in index space.

    Two formats: rows of 0/1 drawn as a 2-D picture (top row is the largest
    y), or a first line ``shape d0 d1 ...`` followed by the 0/1 values in C
    order of the index-space array.
    """
    from .cube_complex import picture_to_bitmap

    records = _records(path)
    lineno, head = records[0]
    if head[0] == "shape":
        try:
            shape = tuple(int(t) for t in head[1:])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: bad shape header") from exc
        bits = []
        for ln, tokens in records[1:]:
            for t in tokens:
                if t not in ("0", "1"):
                    raise InputError(f"{path}:{ln}: bitmap values must be 0 or 1, found {t!r}")
                bits.append(int(t))
        if not shape or len(bits) != int(np.prod(shape)):
            raise InputError(f"{path}: shape {shape} needs {int(np.prod(shape))} values, found {len(bits)}")
        return np.array(bits, dtype=np.int8).reshape(shape)
    picture = _table(path, "bit", int)
    if not np.isin(picture, (0, 1)).all():
        raise InputError(f"{path}: bitmap values must be 0 or 1")
    return picture_to_bitmap(picture.astype(np.int8))


def write_table(path, rows, header: Sequence[str] | None = None, integer_columns: int = 0) -> None:
    """Write a table with 17 significant digits; leading integer columns stay integral."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    lines = []
    if header:
        lines.append("# " + " ".join(header))
    for row in rows:
        ints = [str(int(v)) for v in row[:integer_columns]]
        floats = [FLOAT_FORMAT % float(v) for v in row[integer_columns:]]
        lines.append(" ".join(ints + floats))
    Path(path).write_text("\n".join(lines) + "\n")

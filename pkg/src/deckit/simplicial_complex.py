"""Simplex arrays, canonical orientation and the face/boundary cascade.

A p-simplex is a row of p+1 vertex indices. Derived faces are stored with
ascending vertex columns and the rows of each level sorted lexicographically.
Top-level (user supplied) simplices keep their input order; their
orientation relative to the sorted row is recorded as a parity of +1 or -1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .sparse_core import canonical, transpose

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParityTaggedSimplexArray:
    rows: np.ndarray
    parity: np.ndarray
    source_index: np.ndarray

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1] - 1


def as_simplex_array(s, name: str = "simplices") -> np.ndarray:
    """Validate and convert input to a 2-D integer array."""
    arr = np.asarray(s)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InputError(f"{name} must contain integer vertex indices")
    return arr.astype(np.int64)


def canonical_format(s) -> ParityTaggedSimplexArray:
    """Sort each simplex and record the sign of the sorting permutation.

    Insertion sort is run column-wise over all rows at once; the parity flips
    on every transposition.
    """
    rows = as_simplex_array(s).copy()
    parity = np.ones(rows.shape[0], dtype=np.int8)
    k = rows.shape[1]
    for j in range(1, k):
        for i in range(j, 0, -1):
            swap = rows[:, i - 1] > rows[:, i]
            if not swap.any():
                break
            rows[swap, i - 1], rows[swap, i] = rows[swap, i], rows[swap, i - 1]
            parity[swap] *= -1
    if k > 1:
        repeated = np.nonzero(np.any(rows[:, 1:] == rows[:, :-1], axis=1))[0]
        if repeated.size:
            raise InputError(f"repeated vertex in simplex row {int(repeated[0])}: {s[repeated[0]]}")
    return ParityTaggedSimplexArray(rows, parity, np.arange(rows.shape[0]))


def _lexsort_rows(rows: np.ndarray) -> np.ndarray:
    """Stable lexicographic ordering of rows (first column most significant)."""
    if rows.shape[1] == 0:
        return np.arange(rows.shape[0])
    return np.lexsort(rows.T[::-1])


def _unique_mask(sorted_rows: np.ndarray) -> np.ndarray:
    """True at the first row of each run of identical adjacent rows."""
    mask = np.ones(sorted_rows.shape[0], dtype=bool)
    if sorted_rows.shape[0] > 1:
        mask[1:] = np.any(sorted_rows[1:] != sorted_rows[:-1], axis=1)
    return mask


def _row_keys(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    dtype = np.dtype([(f"c{i}", np.int64) for i in range(rows.shape[1])])
    return rows.view(dtype).ravel()


def row_index(table: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Positions of ``rows`` inside the lexicographically sorted unique ``table``."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    keys = _row_keys(table)
    wanted = _row_keys(rows.reshape(-1, table.shape[1]))
    pos = np.searchsorted(keys, wanted)
    pos = np.minimum(pos, len(keys) - 1)
    if len(keys) == 0 or np.any(keys[pos] != wanted):
        raise KeyError("row not present in simplex table")
    return pos.astype(np.int64)


def boundary_faces(s_plus: ParityTaggedSimplexArray) -> tuple[np.ndarray, sp.csr_matrix]:
    """Unique (p-1)-faces of canonical p-simplices and the boundary matrix.

    Column i is deleted from every row with sign (-1)^i times the parity, the
    expanded list is stably sorted on the vertex columns and runs of equal
    rows collapse to one face; parent index and sign ride along as the CSR
    column index and value.
    """
    rows = s_plus.rows
    num, k = rows.shape
    if k == 1:
        # boundary of vertices: the 1 x N0 zero matrix
        return np.zeros((0, 0), dtype=np.int64), sp.csr_matrix((1, num), dtype=float)
    faces = np.concatenate([np.delete(rows, i, axis=1) for i in range(k)])
    sign = np.concatenate([(-1) ** i * s_plus.parity.astype(float) for i in range(k)])
    parent = np.tile(np.arange(num), k)

    order = _lexsort_rows(faces)
    faces, sign, parent = faces[order], sign[order], parent[order]
    first = _unique_mask(faces)
    face_id = np.cumsum(first) - 1
    n_faces = int(first.sum())
    ptr = np.zeros(n_faces + 1, dtype=np.int64)
    np.add.at(ptr, face_id + 1, 1)
    ptr = np.cumsum(ptr)
    bnd = sp.csr_matrix((sign, parent, ptr), shape=(n_faces, num))
    bnd.sort_indices()
    return faces[first], bnd


@dataclass
class ComplexLevel:
    """Cells of one dimension and the boundary map into the level below."""

    simplices: np.ndarray
    parity: np.ndarray
    boundary: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.simplices.shape[1] - 1

    @property
    def num_simplices(self) -> int:
        return self.simplices.shape[0]

    def oriented(self) -> np.ndarray:
        """Rows in their stored orientation (odd parity swaps the first two vertices)."""
        rows = self.simplices.copy()
        odd = self.parity < 0
        if rows.shape[1] > 1:
            rows[odd, 0], rows[odd, 1] = self.simplices[odd, 1], self.simplices[odd, 0]
        return rows


def merge_user_simplices(
    faces: np.ndarray,
    boundary: sp.csr_matrix,
    user: ParityTaggedSimplexArray,
    notes: list[str],
) -> tuple[np.ndarray, np.ndarray, sp.csr_matrix]:
    """Merge user simplices into a level of derived faces.

    Concatenate, stably sort, and keep the first of equal rows (derived faces
    come first, so they win over user duplicates). Rows of ``boundary`` are
    remapped to the merged positions; user simplices that are not faces get
    empty rows.
    """
    rows = np.concatenate([faces.reshape(-1, user.rows.shape[1]), user.rows])
    parity = np.concatenate([np.ones(len(faces), dtype=np.int8), user.parity.astype(np.int8)])
    order = _lexsort_rows(rows)
    srows = rows[order]
    first = _unique_mask(srows)
    new_pos = np.cumsum(first) - 1
    position = np.empty(len(rows), dtype=np.int64)
    position[order] = new_pos

    run_start = np.maximum.accumulate(np.where(first, np.arange(len(srows)), 0))
    for j in np.nonzero(~first)[0]:
        idx = order[j]
        if idx >= len(faces):
            u = idx - len(faces)
            kind = "derived face" if order[run_start[j]] < len(faces) else "earlier user simplex"
            notes.append(
                f"user simplex {user.rows[u].tolist()} (parity {int(user.parity[u]):+d}) "
                f"duplicates a {kind}; first occurrence kept"
            )
    merged = srows[first]
    merged_parity = parity[order][first]
    remap = position[: len(faces)]
    coo = boundary.tocoo()
    new_bnd = canonical(
        sp.coo_matrix((coo.data, (remap[coo.row], coo.col)), shape=(len(merged), boundary.shape[1]))
    )
    return merged, merged_parity, new_bnd


def face_cascade(
    top: ParityTaggedSimplexArray,
    lower: Optional[dict[int, ParityTaggedSimplexArray]] = None,
    dedupe_top: bool = False,
) -> tuple[list[ComplexLevel], list[str]]:
    """Run ``boundary_faces`` from the top dimension down to vertices.

    ``lower`` maps a dimension to extra user simplices merged at that level.
    Returns levels ordered by dimension and a list of build notes.
    """
    lower = lower or {}
    notes: list[str] = []
    n = top.dim
    rows, parity = top.rows, top.parity.astype(np.int8)
    if dedupe_top:
        order = _lexsort_rows(rows)
        keep = np.zeros(len(rows), dtype=bool)
        keep[order[_unique_mask(rows[order])]] = True
        for idx in np.nonzero(~keep)[0]:
            notes.append(f"duplicate top simplex {rows[idx].tolist()} at row {int(idx)} dropped")
        rows, parity = rows[keep], parity[keep]

    levels: list[Optional[ComplexLevel]] = [None] * (n + 1)
    for p in range(n, 0, -1):
        faces, bnd = boundary_faces(ParityTaggedSimplexArray(rows, parity, np.arange(len(rows))))
        levels[p] = ComplexLevel(rows, parity, bnd)
        if p - 1 in lower:
            faces, face_parity, bnd = merge_user_simplices(faces, bnd, lower[p - 1], notes)
            levels[p].boundary = bnd
        else:
            face_parity = np.ones(len(faces), dtype=np.int8)
        rows, parity = faces, face_parity
    if n == 0 and 0 in lower:
        merged, mparity, _ = merge_user_simplices(
            np.zeros((0, 1), dtype=np.int64), sp.csr_matrix((0, 0)), lower[0], notes
        )
        rows, parity = merged, mparity
    levels[0] = ComplexLevel(rows, parity, sp.csr_matrix((1, len(rows)), dtype=float))
    for msg in notes:
        log.info(msg)
    return levels, notes


class SimplicialComplex:
    """An embedded simplicial complex: vertex coordinates plus cell levels.

    ``levels[p]`` holds the p-simplices and the boundary ``∂_p``. Metric
    quantities are computed lazily by :mod:`deckit.geometry` and cached.
    """

    def __init__(self, vertices: Optional[np.ndarray], levels: list[ComplexLevel], notes=None):
        self.vertices = None if vertices is None else np.asarray(vertices, dtype=float)
        self.levels = levels
        self.notes: list[str] = list(notes or [])
        self._cache: dict = {}

    def __getitem__(self, p: int) -> ComplexLevel:
        return self.levels[p]

    def __len__(self) -> int:
        return len(self.levels)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, shape={self.shape})"

    @property
    def dim(self) -> int:
        return len(self.levels) - 1

    @property
    def embedding_dim(self) -> int:
        return 0 if self.vertices is None else self.vertices.shape[1]

    @property
    def shape(self) -> tuple[int, ...]:
        """Cell counts ``(N_0, ..., N_n)``."""
        return tuple(level.num_simplices for level in self.levels)

    def simplices(self, p: int) -> np.ndarray:
        return self.levels[p].simplices

    def boundary(self, p: int) -> sp.csr_matrix:
        return self.levels[p].boundary

    def coboundary(self, p: int) -> sp.csr_matrix:
        return coboundary(self, p)

    def index_of(self, p: int, rows) -> np.ndarray:
        """Level-p positions of the given vertex rows (any vertex order)."""
        rows = np.sort(np.asarray(rows, dtype=np.int64).reshape(-1, p + 1), axis=1)
        if p == self.dim:
            table = self.levels[p].simplices
            order = _lexsort_rows(table)
            return order[row_index(table[order], rows)]
        return row_index(self.levels[p].simplices, rows)


def coboundary(c: SimplicialComplex, p: int) -> sp.csr_matrix:
    """The discrete exterior derivative ``d_p = ∂_{p+1}^T``."""
    if not 0 <= p < c.dim:
        raise ValueError(f"coboundary dimension {p} outside 0..{c.dim - 1}")
    return transpose(c.levels[p + 1].boundary)


def build_complex(vertices, top_simplices) -> SimplicialComplex:
    """Build all faces and boundary matrices of an embedded complex.

    Every vertex of ``vertices`` becomes a 0-simplex, referenced or not.
    Duplicate top simplices (same vertex set) are rejected.
    """
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim == 1:
        vertices = vertices.reshape(-1, 1)
    top = as_simplex_array(top_simplices, "top simplices")
    if top.shape[0] == 0:
        raise InputError("empty simplex array")
    if top.min() < 0 or top.max() >= len(vertices):
        bad = int(np.nonzero((top < 0) | (top >= len(vertices)))[0][0])
        raise InputError(f"vertex index out of range in simplex row {bad}: {top[bad].tolist()}")
    s_plus = canonical_format(top)
    order = _lexsort_rows(s_plus.rows)
    dup = ~_unique_mask(s_plus.rows[order])
    if dup.any():
        a = int(order[np.nonzero(dup)[0][0]])
        raise InputError(f"duplicate top simplex at row {a}: {top[a].tolist()}")
    all_vertices = np.arange(len(vertices)).reshape(-1, 1)
    lower = {}
    unused = np.setdiff1d(all_vertices, top)
    if s_plus.dim > 0 and unused.size:
        # isolated vertices join level 0 as user simplices with empty rows in ∂_1
        lower[0] = ParityTaggedSimplexArray(unused.reshape(-1, 1), np.ones(unused.size, np.int8), unused)
    levels, notes = face_cascade(s_plus, lower)
    if s_plus.dim == 0:
        levels[0] = ComplexLevel(all_vertices, np.ones(len(vertices), np.int8), sp.csr_matrix((1, len(vertices))))
    return SimplicialComplex(vertices, levels, notes)

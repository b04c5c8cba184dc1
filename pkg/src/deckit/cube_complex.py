"""Regular cube complexes built from n-dimensional bitmaps.

A p-cube is a row ``[corner coordinates | spanned directions]`` with the
directions ascending. Corners live in bitmap index space on the unit grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .simplicial_complex import _lexsort_rows, _unique_mask
from .sparse_core import transpose


def picture_to_bitmap(picture) -> np.ndarray:
    """Convert a 2-D picture (top row = largest y) to an index-space bitmap.

    The result is indexed ``bitmap[x, y]`` with x the picture column and y
    counted upward from the bottom row.
    """
    picture = np.asarray(picture)
    if picture.ndim != 2:
        raise InputError("a picture must be two-dimensional")
    return np.flipud(picture).T.copy()


def bitmap_to_cubes(bitmap) -> np.ndarray:
    """Top-dimensional cube array: one row per on-bit, corner = bit index."""
    bitmap = np.asarray(bitmap)
    if bitmap.size == 0:
        raise InputError("bitmap is empty")
    n = bitmap.ndim
    corners = np.argwhere(bitmap != 0)  # C order, hence lexicographic
    if corners.shape[0] == 0:
        raise InputError("bitmap has no cells switched on")
    dirs = np.broadcast_to(np.arange(n), (corners.shape[0], n))
    return np.hstack([corners, dirs]).astype(np.int64)


def cube_boundary_faces(cubes: np.ndarray, n: int) -> tuple[np.ndarray, sp.csr_matrix]:
    """Unique (p-1)-faces of p-cubes in ``R^n`` and the boundary matrix.

    Removing direction ``d_i`` gives the face shifted by ``e_{d_i}`` with sign
    ``(-1)^i`` and the unshifted face with sign ``-(-1)^i``.
    """
    cubes = np.asarray(cubes, dtype=np.int64)
    num = cubes.shape[0]
    p = cubes.shape[1] - n
    if p <= 0:
        raise InputError("0-cubes have no lower-dimensional faces")
    corners, dirs = cubes[:, :n], cubes[:, n:]
    face_rows, signs, parents = [], [], []
    for i in range(p):
        rest = np.delete(dirs, i, axis=1)
        shifted = corners.copy()
        shifted[np.arange(num), dirs[:, i]] += 1
        for corner, sign in ((corners, -((-1) ** i)), (shifted, (-1) ** i)):
            face_rows.append(np.hstack([corner, rest]))
            signs.append(np.full(num, sign, dtype=float))
            parents.append(np.arange(num))
    faces = np.concatenate(face_rows)
    sign = np.concatenate(signs)
    parent = np.concatenate(parents)

    order = _lexsort_rows(faces)
    faces, sign, parent = faces[order], sign[order], parent[order]
    first = _unique_mask(faces)
    face_id = np.cumsum(first) - 1
    n_faces = int(first.sum())
    ptr = np.concatenate([[0], np.cumsum(np.bincount(face_id, minlength=n_faces))])
    bnd = sp.csr_matrix((sign, parent, ptr), shape=(n_faces, num))
    bnd.sort_indices()
    return faces[first], bnd


@dataclass
class CubeLevel:
    cubes: np.ndarray
    boundary: sp.csr_matrix

    @property
    def num_cubes(self) -> int:
        return self.cubes.shape[0]


class CubeComplex:
    def __init__(self, n: int, levels: list[CubeLevel]):
        self.n = n
        self.levels = levels

    def __getitem__(self, p: int) -> CubeLevel:
        return self.levels[p]

    def __repr__(self) -> str:
        return f"CubeComplex(dim={self.dim}, shape={self.shape})"

    @property
    def dim(self) -> int:
        return len(self.levels) - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(level.num_cubes for level in self.levels)

    def boundary(self, p: int) -> sp.csr_matrix:
        return self.levels[p].boundary

    def coboundary(self, p: int) -> sp.csr_matrix:
        if not 0 <= p < self.dim:
            raise ValueError(f"coboundary dimension {p} outside 0..{self.dim - 1}")
        return transpose(self.levels[p + 1].boundary)


def build_cube_complex(bitmap) -> CubeComplex:
    """Cube arrays ``C_0..C_n`` and boundary matrices for a bitmap."""
    bitmap = np.asarray(bitmap)
    n = bitmap.ndim
    cubes = bitmap_to_cubes(bitmap)
    levels: list[CubeLevel] = [None] * (n + 1)  # type: ignore[list-item]
    for p in range(n, 0, -1):
        faces, bnd = cube_boundary_faces(cubes, n)
        levels[p] = CubeLevel(cubes, bnd)
        cubes = faces
    levels[0] = CubeLevel(cubes, sp.csr_matrix((1, cubes.shape[0]), dtype=float))
    return CubeComplex(n, levels)

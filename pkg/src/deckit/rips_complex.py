"""Vietoris-Rips complexes: kd-tree 1-skeleton, clique growth by sparse products."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .abstract_complex import AbstractComplex, build_abstract
from .errors import InputError
from .simplicial_complex import _lexsort_rows
from .sparse_core import from_coo, spgemm


def rips_skeleton1(points, r: float) -> tuple[np.ndarray, sp.csr_matrix]:
    """Edges ``(i, j)``, ``i < j``, with ``|x_i - x_j| <= r``, and the 0/1 matrix E."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if r <= 0:
        raise InputError("radius must be positive")
    n = points.shape[0]
    # slightly generous query, then the exact squared-distance test decides ties
    pairs = cKDTree(points).query_pairs(r * (1 + 1e-9) + 1e-300, output_type="ndarray")
    if len(pairs):
        pairs = np.sort(pairs, axis=1)
        diff = points[pairs[:, 0]] - points[pairs[:, 1]]
        pairs = pairs[np.einsum("ij,ij->i", diff, diff) <= r * r]
    pairs = pairs.reshape(-1, 2).astype(np.int64)
    pairs = pairs[_lexsort_rows(pairs)]
    e = from_coo(pairs[:, 0], pairs[:, 1], np.ones(len(pairs)), (n, n))
    return pairs, e


def rips_extend(s_p: np.ndarray, e: sp.csr_matrix) -> np.ndarray:
    """(p+1)-simplices from p-simplices via the product ``F_p E``.

    ``F_p`` is the simplex/vertex incidence; an entry ``(i, j)`` equal to p+1
    means every vertex of simplex i has an edge to the larger vertex j.
    """
    s_p = np.asarray(s_p, dtype=np.int64)
    num, k = s_p.shape
    if num == 0:
        return np.zeros((0, k + 1), dtype=np.int64)
    f = from_coo(np.repeat(np.arange(num), k), s_p.ravel(), np.ones(num * k), (num, e.shape[0]))
    fe = spgemm(f, e).tocoo()
    hit = fe.data == k
    rows = np.hstack([s_p[fe.row[hit]], fe.col[hit].reshape(-1, 1)]).astype(np.int64)
    return rows[_lexsort_rows(rows)]


class RipsComplex(AbstractComplex):
    def __init__(self, points, radius, skeletons, edge_matrix, levels, notes=None):
        super().__init__(levels, notes)
        self.points = points
        self.radius = radius
        self.skeletons = skeletons
        self.edge_matrix = edge_matrix


def build_rips(points, r: float, max_dim: int = 2) -> RipsComplex:
    """Rips complex up to ``max_dim`` (fewer if the skeletons run out)."""
    if max_dim < 1:
        raise InputError("max_dim must be at least 1")
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    n = points.shape[0]
    if n == 0:
        raise InputError("no points")
    s1, e = rips_skeleton1(points, r)
    skeletons = [np.arange(n).reshape(-1, 1), s1]
    while len(skeletons) <= max_dim:
        nxt = rips_extend(skeletons[-1], e)
        if nxt.shape[0] == 0:
            break
        skeletons.append(nxt)
    nonempty = [s for s in skeletons if s.shape[0]]
    cx = build_abstract(nonempty)
    return RipsComplex(points, r, skeletons, e, cx.levels, cx.notes)

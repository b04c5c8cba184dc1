"""Metric quantities of embedded simplices and circumcentric duals.

Functions accept either one simplex as a ``(p+1, N)`` array of vertex
coordinates or a stack of them shaped ``(M, p+1, N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .errors import DegenerateSimplexError, MeshError
from .simplicial_complex import SimplicialComplex

DEGENERACY_TOL = 1e-12
QR_CONDITION = 1e8


def _stack(points) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 2:
        return pts[None], True
    if pts.ndim != 3:
        raise ValueError(f"expected (p+1, N) or (M, p+1, N) coordinates, got {pts.shape}")
    return pts, False


def _gram_root(edges: np.ndarray) -> np.ndarray:
    """sqrt(det(E E^T)) for a stack of edge matrices (rows = edge vectors)."""
    if edges.shape[1] == 0:
        return np.ones(edges.shape[0])
    gram = edges @ np.swapaxes(edges, 1, 2)
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None))


def simplex_volume(points) -> np.ndarray | float:
    """Unsigned p-volume ``sqrt(det(V^T V)) / p!``; zero for degenerate simplices."""
    pts, single = _stack(points)
    p = pts.shape[1] - 1
    vol = _gram_root(pts[:, 1:] - pts[:, :1]) / math.factorial(p)
    return float(vol[0]) if single else vol


def degenerate_mask(points) -> np.ndarray:
    """True for simplices whose volume is negligible relative to their size."""
    pts, _ = _stack(points)
    p = pts.shape[1] - 1
    if p == 0:
        return np.zeros(pts.shape[0], dtype=bool)
    root = _gram_root(pts[:, 1:] - pts[:, :1])
    i, j = np.triu_indices(p + 1, 1)
    longest = np.linalg.norm(pts[:, i] - pts[:, j], axis=2).max(axis=1)
    return root < DEGENERACY_TOL * longest**p


def _require_nondegenerate(pts: np.ndarray, ids=None) -> None:
    bad = np.nonzero(degenerate_mask(pts))[0]
    if bad.size:
        which = int(bad[0]) if ids is None else ids[int(bad[0])]
        raise DegenerateSimplexError(f"degenerate simplex {which}")


@dataclass(frozen=True)
class Circumcenter:
    """Barycentric coordinates ``b``, center ``c``, radius ``R``.

    ``q`` is the Lagrange unknown of the linear system, which is solved in
    coordinates relative to the first vertex.
    """

    b: np.ndarray
    c: np.ndarray
    R: np.ndarray
    q: np.ndarray


def circumcenter(points, check: bool = True) -> Circumcenter:
    """Solve ``[[2 v_i.v_j, 1], [1, 0]] [b; Q] = [v_i.v_i; 1]`` for each simplex."""
    pts, single = _stack(points)
    m, k, dim = pts.shape
    if check:
        _require_nondegenerate(pts)
    rel = pts - pts[:, :1]
    system = np.zeros((m, k + 1, k + 1))
    system[:, :k, :k] = 2.0 * rel @ np.swapaxes(rel, 1, 2)
    system[:, :k, k] = 1.0
    system[:, k, :k] = 1.0
    rhs = np.zeros((m, k + 1))
    rhs[:, :k] = np.einsum("mij,mij->mi", rel, rel)
    rhs[:, k] = 1.0
    try:
        sol = np.linalg.solve(system, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplexError("singular circumcenter system") from exc
    b = sol[:, :k]
    c = np.einsum("mi,mij->mj", b, pts)
    radius = np.linalg.norm(c - pts[:, 0], axis=1)
    out = Circumcenter(b, c, radius, sol[:, k])
    if single:
        return Circumcenter(b[0], c[0], float(radius[0]), float(sol[0, k]))
    return out


@dataclass(frozen=True)
class BarycentricDifferentials:
    """Gradients of the barycentric coordinates of a simplex.

    ``X`` has the gradients of ``mu_1..mu_p`` as columns; ``grad_mu_0`` is
    minus their sum.
    """

    X: np.ndarray

    @property
    def grad_mu_0(self) -> np.ndarray:
        return -self.X.sum(axis=-1)

    @property
    def all(self) -> np.ndarray:
        """All p+1 gradients as rows, ``mu_0`` first."""
        return np.concatenate([self.grad_mu_0[..., None, :], np.swapaxes(self.X, -1, -2)], axis=-2)


def barycentric_gradients(points, check: bool = True) -> np.ndarray:
    """Rows ``grad mu_0 .. grad mu_p`` for each simplex, shape ``(M, p+1, N)``.

    ``X^T = (V0^T V0)^-1 V0^T`` with ``V0`` holding the edge vectors from
    vertex 0; badly conditioned simplices use a QR factorization instead.
    """
    pts, single = _stack(points)
    if check:
        _require_nondegenerate(pts)
    v0 = np.swapaxes(pts[:, 1:] - pts[:, :1], 1, 2)  # (M, N, p)
    p = v0.shape[2]
    if p == 0:
        grads = np.zeros((pts.shape[0], 1, pts.shape[2]))
        return grads[0] if single else grads
    gram = np.swapaxes(v0, 1, 2) @ v0
    xt = np.linalg.solve(gram, np.swapaxes(v0, 1, 2))  # (M, p, N)
    cond = np.linalg.cond(gram)
    for i in np.nonzero(~(cond < QR_CONDITION))[0]:
        q, r = np.linalg.qr(v0[i])
        xt[i] = np.linalg.solve(r, q.T)
    grads = np.concatenate([-xt.sum(axis=1, keepdims=True), xt], axis=1)
    return grads[0] if single else grads


def barycentric_differentials(points) -> BarycentricDifferentials:
    grads = barycentric_gradients(points)
    return BarycentricDifferentials(np.swapaxes(grads[..., 1:, :], -1, -2))


# --- complex-level quantities -------------------------------------------------


def _cached(c: SimplicialComplex, key, build):
    if key not in c._cache:
        c._cache[key] = build()
    return c._cache[key]


def primal_volumes(c: SimplicialComplex, p: int) -> np.ndarray:
    """Unsigned volumes of the p-simplices (1 for vertices)."""

    def build():
        if p == 0:
            return np.ones(c[0].num_simplices)
        return simplex_volume(c.vertices[c[p].simplices])

    return _cached(c, ("primal", p), build)


def circumcenters(c: SimplicialComplex, p: int) -> np.ndarray:
    return _cached(c, ("circumcenter", p), lambda: circumcenter(c.vertices[c[p].simplices]).c)


def top_face_indices(c: SimplicialComplex, p: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Local p-faces of the reference n-simplex and their global indices.

    Returns the local vertex subsets and an ``(N_n, n_faces)`` index array.
    Local faces of a sorted top row are sorted, so orientations agree with
    the stored faces.
    """

    def build():
        n = c.dim
        local = list(combinations(range(n + 1), p + 1))
        top = c[n].simplices
        if p == n:
            return local, np.arange(len(top)).reshape(-1, 1)
        idx = np.stack([c.index_of(p, top[:, list(f)]) for f in local], axis=1)
        return local, idx

    return _cached(c, ("top-faces", p), build)


def top_face_counts(c: SimplicialComplex) -> np.ndarray:
    """Number of top simplices containing each (n-1)-face."""
    return np.diff(c[c.dim].boundary.indptr)


@dataclass
class DualVolumes:
    """Signed circumcentric dual volumes ``|*σ|`` per dimension.

    ``negative`` lists, per dimension, the cells whose dual volume came out
    negative (allowed on Delaunay but not well-centered meshes).
    """

    volumes: list[np.ndarray]
    negative: dict[int, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, p: int) -> np.ndarray:
        return self.volumes[p]


def _check_manifold(c: SimplicialComplex) -> None:
    counts = top_face_counts(c)
    bad = np.nonzero(counts > 2)[0]
    if bad.size:
        faces = c[c.dim - 1].simplices[bad[:5]].tolist()
        raise MeshError(f"non-manifold complex: faces {faces} belong to more than two top simplices")


def dual_volumes(c: SimplicialComplex, check_boundary: bool = True) -> DualVolumes:
    """Signed dual volumes by summing over ascending flags of circumcenters.

    Each flag ``σ^p ≺ σ^{p+1} ≺ … ≺ σ^n`` contributes the volume of the
    simplex spanned by the circumcenters along it. The sign flips at every
    step where the larger simplex's circumcenter falls on the opposite side
    of the smaller simplex from the added vertex.
    """
    key = ("dual", check_boundary)
    if key in c._cache:
        return c._cache[key]
    if c.vertices is None:
        raise MeshError("dual volumes need vertex coordinates")
    n = c.dim
    top = c[n].simplices
    pts = c.vertices[top]  # (N_n, n+1, N)
    _require_nondegenerate(pts)
    if n > 0:
        _check_manifold(c)

    centers = {}
    for size in range(1, n + 2):
        for sub in combinations(range(n + 1), size):
            centers[sub] = pts[:, sub[0]] if size == 1 else circumcenter(pts[:, list(sub)], check=False).c

    def side(small, added):
        big = tuple(sorted(small + (added,)))
        return np.einsum("ij,ij->i", centers[big] - centers[small], pts[:, added] - centers[small])

    if check_boundary and n > 0:
        on_boundary = top_face_counts(c) == 1
        local, idx = top_face_indices(c, n - 1)
        for j, f in enumerate(local):
            (w,) = set(range(n + 1)) - set(f)
            # relative slack: right angles put the circumcenter on the face up to rounding
            reach = np.einsum("ij,ij->i", *(2 * [pts[:, w] - centers[f]]))
            wrong = (side(f, w) < -1e-12 * reach) & on_boundary[idx[:, j]]
            if wrong.any():
                t = int(np.nonzero(wrong)[0][0])
                raise MeshError(
                    f"boundary face {c[n - 1].simplices[idx[t, j]].tolist()}: circumcenter of top "
                    f"simplex {t} lies on the far side from the opposite vertex"
                )

    volumes = []
    negative = {}
    for p in range(n):
        out = np.zeros(c[p].num_simplices)
        mass = np.zeros(c[p].num_simplices)
        local, idx = top_face_indices(c, p)
        for j, f in enumerate(local):
            rest = [v for v in range(n + 1) if v not in f]
            for perm in permutations(rest):
                # successive circumcenter steps along a flag are mutually orthogonal,
                # so the flag volume is the product of step lengths over m!
                chain = f
                vol = np.full(len(top), 1.0 / math.factorial(len(rest)))
                for v in perm:
                    big = tuple(sorted(chain + (v,)))
                    step = np.linalg.norm(centers[big] - centers[chain], axis=1)
                    # a circumcenter lying on the face up to rounding is on it
                    reach = np.linalg.norm(pts[:, v] - centers[chain], axis=1)
                    step[step <= 1e-12 * reach] = 0.0
                    vol *= np.where(side(chain, v) < 0, -step, step)
                    chain = big
                np.add.at(out, idx[:, j], vol)
                np.add.at(mass, idx[:, j], np.abs(vol))
        # cancellation to rounding level (e.g. right angles) is an exact zero
        out[np.abs(out) <= 1e-12 * mass] = 0.0
        volumes.append(out)
        if np.any(out < 0):
            negative[p] = np.nonzero(out < 0)[0]
    volumes.append(np.ones(len(top)))
    result = DualVolumes(volumes, negative)
    c._cache[key] = result
    return result

"""Metric operators: Whitney mass matrices, DEC Hodge stars and what they build.

A "star" argument anywhere below may be a :class:`HodgeStar` (diagonal,
circumcentric), a sparse mass matrix (Whitney), or ``None`` for the
identity (metric-free, combinatorial operators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from .errors import ConvergenceError, MeshError
from .geometry import (
    barycentric_gradients,
    dual_volumes,
    primal_volumes,
    simplex_volume,
    top_face_indices,
)
from .simplicial_complex import SimplicialComplex, coboundary
from .sparse_core import DeterminantCounter, canonical, conjugate_gradient, dense_determinant, from_coo


@dataclass(frozen=True)
class Cochain:
    """Values on the p-cells of a complex (or on the dual cells when ``dual``)."""

    complex: SimplicialComplex
    p: int
    values: np.ndarray
    dual: bool = False

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if not 0 <= self.p <= self.complex.dim:
            raise ValueError(f"cochain dimension {self.p} outside 0..{self.complex.dim}")
        cells = self.complex.dim - self.p if self.dual else self.p
        expected = self.complex[cells].num_simplices
        if values.shape != (expected,):
            raise ValueError(f"cochain needs {expected} values, got shape {values.shape}")


# --- Whitney mass matrices --------------------------------------------------


def barycentric_moment_integral(points, a: int, b: int) -> float:
    """Exact integral of ``mu_a * mu_b`` over the simplex with the given vertices."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0] - 1
    return simplex_volume(pts) * (2.0 if a == b else 1.0) / ((n + 1) * (n + 2))


@dataclass(frozen=True)
class _MassTemplate:
    faces: list[tuple[int, ...]]
    face_pairs: np.ndarray  # (P, 2) local face indices, i <= j
    minor_rows: np.ndarray  # (U, p) row subsets of the gradient Gram matrix
    minor_cols: np.ndarray  # (U, p)
    weights: np.ndarray  # (P, U) signed moment factors


@lru_cache(maxsize=None)
def _mass_template(n: int, p: int) -> _MassTemplate:
    """Which cofactor determinants feed each local entry, for any top simplex.

    Minors are indexed by unordered pairs of p-subsets of the n+1 vertices;
    the Gram matrix is symmetric so (R, C) and (C, R) share a determinant.
    """
    faces = list(combinations(range(n + 1), p + 1))
    subsets = list(combinations(range(n + 1), p))
    where = {s: i for i, s in enumerate(subsets)}
    pairs = [(r, c) for r in range(len(subsets)) for c in range(r, len(subsets))]
    pair_id = {rc: u for u, rc in enumerate(pairs)}
    face_pairs = [(i, j) for i in range(len(faces)) for j in range(i, len(faces))]
    weights = np.zeros((len(face_pairs), len(pairs)))
    for q, (i, j) in enumerate(face_pairs):
        for k, a in enumerate(faces[i]):
            r = where[faces[i][:k] + faces[i][k + 1 :]]
            for l, b in enumerate(faces[j]):
                col = where[faces[j][:l] + faces[j][l + 1 :]]
                u = pair_id[(min(r, col), max(r, col))]
                weights[q, u] += (-1) ** (k + l) * (2.0 if a == b else 1.0)
    rows = np.array([subsets[r] for r, _ in pairs], dtype=np.int64).reshape(len(pairs), p)
    cols = np.array([subsets[c] for _, c in pairs], dtype=np.int64).reshape(len(pairs), p)
    return _MassTemplate(faces, np.array(face_pairs, dtype=np.int64), rows, cols, weights)


def determinant_counts(n: int, p: int) -> tuple[int, int]:
    """Determinants per top simplex: ``(naive, unique)`` closed forms.

    The naive scheme evaluates each of the ``(p+1)^2`` cofactors for every
    unordered pair of local p-faces; the unique scheme evaluates each
    unordered pair of p-vertex subsets once.
    """
    faces = math.comb(n + 1, p + 1)
    subsets = math.comb(n + 1, p)
    naive = (faces * faces + faces) // 2 * (p + 1) ** 2
    unique = (subsets * subsets + subsets) // 2
    return naive, unique


def _local_mass_unique(grads, vols, n, p, counter):
    tpl = _mass_template(n, p)
    gram = grads @ np.swapaxes(grads, 1, 2)  # (M, n+1, n+1)
    minors = gram[:, tpl.minor_rows[:, :, None], tpl.minor_cols[:, None, :]]  # (M, U, p, p)
    dets = dense_determinant(minors, counter).reshape(len(grads), -1)
    scale = math.factorial(p) ** 2 * vols / ((n + 1) * (n + 2))
    return (dets @ tpl.weights.T) * scale[:, None], tpl


def _local_mass_naive(grads, vols, n, p, counter):
    tpl = _mass_template(n, p)
    gram = grads @ np.swapaxes(grads, 1, 2)
    rows, cols, coef, owner = [], [], [], []
    for q, (i, j) in enumerate(tpl.face_pairs):
        fi, fj = tpl.faces[i], tpl.faces[j]
        for k, a in enumerate(fi):
            for l, b in enumerate(fj):
                rows.append(fi[:k] + fi[k + 1 :])
                cols.append(fj[:l] + fj[l + 1 :])
                coef.append((-1) ** (k + l) * (2.0 if a == b else 1.0))
                owner.append(q)
    rows = np.array(rows, dtype=np.int64).reshape(len(coef), p)
    cols = np.array(cols, dtype=np.int64).reshape(len(coef), p)
    dets = dense_determinant(gram[:, rows[:, :, None], cols[:, None, :]], counter).reshape(len(grads), -1)
    terms = dets * np.array(coef)
    local = np.zeros((len(grads), len(tpl.face_pairs)))
    np.add.at(local.T, np.array(owner), terms.T)
    scale = math.factorial(p) ** 2 * vols / ((n + 1) * (n + 2))
    return local * scale[:, None], tpl


def whitney_mass_matrix(
    c: SimplicialComplex,
    p: int,
    counter: Optional[DeterminantCounter] = None,
    naive: bool = False,
) -> sp.csr_matrix:
    """The Gram matrix ``M_p`` of Whitney p-forms under the L2 inner product.

    Per top simplex, the entry for local faces ``σ_i, σ_j`` is
    ``(p!)^2 Σ_{k,l} (-1)^(k+l) c_kl ∫ mu_{i_k} mu_{j_l}``, where ``c_kl`` is the
    determinant of gradient inner products with vertex ``i_k`` dropped from
    ``σ_i`` and ``j_l`` from ``σ_j``. Each distinct determinant is evaluated
    once per simplex unless ``naive`` is set.
    """
    n = c.dim
    if not 0 <= p <= n:
        raise ValueError(f"p={p} outside 0..{n}")
    if p == n:
        return sp.diags(1.0 / primal_volumes(c, n), format="csr")
    top = c[n].simplices
    pts = c.vertices[top]
    grads = barycentric_gradients(pts)
    vols = simplex_volume(pts)
    builder = _local_mass_naive if naive else _local_mass_unique
    local, tpl = builder(grads, vols, n, p, counter)
    _, gidx = top_face_indices(c, p)
    gi = gidx[:, tpl.face_pairs[:, 0]]
    gj = gidx[:, tpl.face_pairs[:, 1]]
    lo, hi = np.minimum(gi, gj), np.maximum(gi, gj)
    size = c[p].num_simplices
    upper = from_coo(lo.ravel(), hi.ravel(), local.ravel(), (size, size))
    return canonical(upper + sp.triu(upper, k=1).T)


def whitney_stiffness(c: SimplicialComplex, p: int, mass: Optional[sp.csr_matrix] = None) -> sp.csr_matrix:
    """``d_p^T M_{p+1} d_p``."""
    if not 0 <= p < c.dim:
        raise ValueError(f"p={p} outside 0..{c.dim - 1}")
    d = coboundary(c, p)
    m = whitney_mass_matrix(c, p + 1) if mass is None else mass
    return canonical(d.T @ m @ d)


# --- DEC Hodge stars --------------------------------------------------------


@dataclass(frozen=True)
class HodgeStar:
    """Diagonal Hodge star ``|⋆σ| / |σ|`` on p-cells of an n-complex."""

    diagonal: np.ndarray
    p: int
    n: int

    @property
    def inverse_sign(self) -> int:
        return (-1) ** (self.p * (self.n - self.p))

    @property
    def inverse_diagonal(self) -> np.ndarray:
        """Entries of ``⋆^-1`` with ``⋆^-1 ⋆ = (-1)^(p(n-p)) I``."""
        return self.inverse_sign / self.diagonal

    def matrix(self) -> sp.csr_matrix:
        return sp.diags(self.diagonal, format="csr")

    def inverse(self) -> sp.csr_matrix:
        return sp.diags(self.inverse_diagonal, format="csr")


def dec_hodge_star(c: SimplicialComplex, p: int, duals=None) -> HodgeStar:
    if not 0 <= p <= c.dim:
        raise ValueError(f"p={p} outside 0..{c.dim}")
    duals = dual_volumes(c) if duals is None else duals
    primal = primal_volumes(c, p)
    if np.any(primal <= 0):
        raise MeshError(f"zero primal volume at {p}-cells {np.nonzero(primal <= 0)[0][:5].tolist()}")
    dual = duals[p]
    neg = np.nonzero(dual < 0)[0]
    if neg.size:
        cells = c[p].simplices[neg[:5]].tolist()
        raise MeshError(f"negative dual volume at {p}-cells {cells} (Delaunay condition violated)")
    return HodgeStar(dual / primal, p, c.dim)


# --- helpers acting on any kind of star -------------------------------------

Star = Union[HodgeStar, sp.spmatrix, None]


def _star_apply(star: Star, x: np.ndarray) -> np.ndarray:
    if star is None:
        return x
    if isinstance(star, HodgeStar):
        return star.diagonal * x
    return star @ x


def _star_solve(star: Star, x: np.ndarray, tol: float) -> np.ndarray:
    """Unsigned inverse of a star applied to ``x``; mass matrices by CG."""
    if star is None:
        return x
    if isinstance(star, HodgeStar):
        return _diag_inverse(star) @ x
    return conjugate_gradient(star, x, tol=tol).require("mass-matrix solve")


def _diag_inverse(star: HodgeStar) -> sp.dia_matrix:
    """Unsigned ``1/⋆`` as a diagonal matrix; zero dual volumes have no inverse."""
    zero = np.nonzero(star.diagonal == 0)[0]
    if zero.size:
        raise MeshError(f"⋆_{star.p} is zero at cells {zero[:5].tolist()} and cannot be inverted")
    return sp.diags(1.0 / star.diagonal)


def _star_matrix(star: Star, size: int) -> sp.csr_matrix:
    if star is None:
        return sp.identity(size, format="csr")
    if isinstance(star, HodgeStar):
        return star.matrix()
    return sp.csr_matrix(star)


def codifferential(star_p: Star, star_p1: Star, d_p: sp.spmatrix, n: int, p: int, tol: float = 1e-12):
    """``δ_{p+1} = (-1)^(np+1) ⋆_p^-1 d_p^T ⋆_{p+1}``.

    Sparse for diagonal stars; for a mass matrix ``⋆_p`` a linear operator
    that solves with it on each application.
    """
    n_p1, n_p = d_p.shape
    sign = (-1) ** (n * p + 1) * (-1) ** (p * (n - p))
    if not sp.issparse(star_p):
        inv = sp.identity(n_p) if star_p is None else _diag_inverse(star_p)
        return canonical(sign * (inv @ d_p.T @ _star_matrix(star_p1, n_p1)))

    def matvec(x):
        return sign * _star_solve(star_p, d_p.T @ _star_apply(star_p1, np.ravel(x)), tol)

    return LinearOperator((n_p, n_p1), matvec=matvec, dtype=float)


def laplace_derham(c: SimplicialComplex, p: int, stars: list) -> Union[sp.csr_matrix, LinearOperator]:
    """Weak-form Laplace-deRham operator on p-cochains.

    ``d_p^T ⋆_{p+1} d_p + (-1)^((p-1)(n-p+1)) ⋆_p d_{p-1} ⋆_{p-1}^-1 d_{p-1}^T ⋆_p``
    with the first term absent at p = n and the second at p = 0. ``stars``
    is indexed by dimension.
    """
    n = c.dim
    if not 0 <= p <= n:
        raise ValueError(f"p={p} outside 0..{n}")
    size = c[p].num_simplices
    upper = None
    if p < n:
        d = coboundary(c, p)
        upper = canonical(d.T @ _star_matrix(stars[p + 1], d.shape[0]) @ d)
    if p == 0:
        return upper
    dm = coboundary(c, p - 1)
    sp_ = _star_matrix(stars[p], size)
    coef = (-1) ** ((p - 1) * (n - p + 1))
    inv_sign = (-1) ** ((p - 1) * (n - p + 1))  # sign carried by ⋆_{p-1}^-1
    sign = coef * inv_sign
    below = stars[p - 1]
    if not sp.issparse(below):
        inv = sp.identity(dm.shape[1]) if below is None else _diag_inverse(below)
        lower = canonical(sign * (sp_ @ dm @ inv @ dm.T @ sp_))
        return lower if upper is None else canonical(upper + lower)

    def matvec(x):
        x = np.ravel(x)
        y = sign * (sp_ @ (dm @ _star_solve(below, dm.T @ (sp_ @ x), 1e-12)))
        return y if upper is None else y + upper @ x

    return LinearOperator((size, size), matvec=matvec, dtype=float)


def combinatorial_laplacian(c, p: int) -> sp.csr_matrix:
    """``∂_p^T ∂_p + ∂_{p+1} ∂_{p+1}^T`` (terms outside the complex omitted)."""
    out = canonical(c.boundary(p).T @ c.boundary(p)) if p > 0 else None
    if p < c.dim:
        up = canonical(c.boundary(p + 1) @ c.boundary(p + 1).T)
        out = up if out is None else canonical(out + up)
    if out is None:
        out = sp.csr_matrix((c[p].num_simplices, c[p].num_simplices))
    return out


# --- Hodge decomposition ----------------------------------------------------


@dataclass(frozen=True)
class HodgeDecomposition:
    """``ω = dα + δβ + h``; ``gamma = ⋆_{p+1} β`` is the potential actually solved for."""

    exact: np.ndarray
    coexact: np.ndarray
    harmonic: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray


def hodge_decompose(
    omega,
    d_prev: Optional[sp.spmatrix],
    d_next: Optional[sp.spmatrix],
    star: Star = None,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
    refine: int = 0,
) -> HodgeDecomposition:
    """Split a p-cochain into exact, coexact and harmonic parts.

    ``d_prev`` is ``d_{p-1}`` and ``d_next`` is ``d_p`` (either may be None at
    the ends of the complex); ``star`` is ``⋆_p``. Both potentials come from
    singular but consistent symmetric systems solved by CG:

        d_{p-1}^T ⋆_p d_{p-1} α = d_{p-1}^T ⋆_p ω
        d_p ⋆_p^-1 d_p^T γ = d_p ω,   δβ = ⋆_p^-1 d_p^T γ

    which are the two codifferential equations multiplied through by stars.
    ``refine`` extra passes decompose the remaining harmonic part again and
    fold the corrections in. Their targets are absolute, ``1e-3 * tol`` times
    the first right-hand side norms, since relative to their own tiny
    right-hand sides they would chase rounding noise. A pass that misses its
    target is discarded rather than raising.
    """
    w = omega.values if isinstance(omega, Cochain) else np.asarray(omega, dtype=float)
    n_prev = 0 if d_prev is None else d_prev.shape[1]
    n_next = 0 if d_next is None else d_next.shape[0]
    exact, coexact = np.zeros_like(w), np.zeros_like(w)
    alpha, gamma = np.zeros(n_prev), np.zeros(n_next)
    lower = upper = None
    if n_prev:
        lower = LinearOperator(
            (n_prev, n_prev), matvec=lambda x: d_prev.T @ _star_apply(star, d_prev @ np.ravel(x)), dtype=float
        )
    if n_next:
        upper = LinearOperator(
            (n_next, n_next),
            matvec=lambda x: d_next @ _star_solve(star, d_next.T @ np.ravel(x), tol * 1e-2),
            dtype=float,
        )
    rest = w
    atol_lower = atol_upper = 0.0
    for sweep in range(refine + 1):
        if lower is not None:
            rhs = d_prev.T @ _star_apply(star, rest)
            res = conjugate_gradient(lower, rhs, tol=tol, max_iter=max_iter, atol=atol_lower)
            if sweep == 0:
                step = res.require("exact-part solve")
                atol_lower = 1e-3 * tol * np.linalg.norm(rhs)
            else:
                step = res.x if res.converged else np.zeros(n_prev)
            alpha = alpha + step
            exact = exact + d_prev @ step
        if upper is not None:
            rhs = d_next @ rest
            res = conjugate_gradient(upper, rhs, tol=tol, max_iter=max_iter, atol=atol_upper)
            if sweep == 0:
                step = res.require("coexact-part solve")
                atol_upper = 1e-3 * tol * np.linalg.norm(rhs)
            else:
                step = res.x if res.converged else np.zeros(n_next)
            gamma = gamma + step
            coexact = coexact + _star_solve(star, d_next.T @ step, tol * 1e-2)
        rest = w - exact - coexact
    return HodgeDecomposition(exact, coexact, rest, alpha, gamma)


# --- Whitney interpolation --------------------------------------------------


def whitney_interpolate_at_barycenters(u: Cochain) -> np.ndarray:
    """Vector value of the Whitney interpolant of a 1-cochain at each barycenter.

    On a top simplex the edge form is ``mu_a dmu_b - mu_b dmu_a``; at the
    barycenter every ``mu`` equals ``1/(n+1)``.
    """
    if not isinstance(u, Cochain) or u.p != 1 or u.dual:
        raise ValueError("expected a primal 1-cochain")
    c = u.complex
    n = c.dim
    if n < 1:
        raise ValueError("complex has no edges")
    grads = barycentric_gradients(c.vertices[c[n].simplices])
    local, gidx = top_face_indices(c, 1)
    out = np.zeros((grads.shape[0], grads.shape[2]))
    for j, (a, b) in enumerate(local):
        out += u.values[gidx[:, j], None] * (grads[:, b] - grads[:, a])
    return out / (n + 1)

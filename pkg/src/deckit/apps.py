"""The five example computations as library functions.

Each driver takes already-loaded inputs and returns a result object; the
command line wrapper in :mod:`deckit.cli` handles files.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .abstract_complex import build_abstract
from .dec_fem import (
    Cochain,
    dec_hodge_star,
    hodge_decompose,
    laplace_derham,
    whitney_interpolate_at_barycenters,
    whitney_mass_matrix,
    whitney_stiffness,
)
from .errors import InputError
from .geometry import circumcenters, primal_volumes, top_face_counts, top_face_indices
from .rips_complex import RipsComplex, build_rips
from .simplicial_complex import SimplicialComplex, coboundary
from .sparse_core import conjugate_gradient, least_squares, symmetric_generalized_eig

log = logging.getLogger(__name__)

DEFAULT_SEED = 42


def _require_planar_triangles(c: SimplicialComplex) -> None:
    if c.dim != 2 or c.embedding_dim != 2:
        raise InputError(f"expected a triangle mesh in the plane, got a {c.dim}-complex in R^{c.embedding_dim}")


def boundary_edges(c: SimplicialComplex) -> np.ndarray:
    """Edges that belong to exactly one triangle."""
    return np.nonzero(top_face_counts(c) == 1)[0]


def barycenters(c: SimplicialComplex) -> np.ndarray:
    return c.vertices[c[c.dim].simplices].mean(axis=1)


# --- resonant cavity ---------------------------------------------------------


@dataclass
class CavityResult:
    eigenvalues: np.ndarray  # nonzero eigenvalues, ascending
    eigenvectors: np.ndarray  # edge cochains (columns), zero on boundary edges
    fields: list[np.ndarray]  # per eigenvector, one vector per triangle
    zero_modes: int


def cavity(c: SimplicialComplex, count: int = 5, zero_tol: float = 1e-8) -> CavityResult:
    """Smallest nonzero eigenpairs of ``d1^T M2 d1 v = lam M1 v`` with tangential BCs.

    Boundary edges are removed; the kernel (discrete gradients of interior
    vertex functions) is split off by a relative threshold on eigenvalues.
    """
    _require_planar_triangles(c)
    stiff = whitney_stiffness(c, 1)
    mass = whitney_mass_matrix(c, 1)
    keep = np.setdiff1d(np.arange(c[1].num_simplices), boundary_edges(c))
    k = stiff[keep][:, keep]
    m = mass[keep][:, keep]
    vals, vecs = symmetric_generalized_eig(k, m, len(keep))
    nonzero = vals > zero_tol * max(vals[-1], 1.0)
    zero_modes = int((~nonzero).sum())
    chosen = np.nonzero(nonzero)[0][:count]
    full = np.zeros((c[1].num_simplices, len(chosen)))
    full[keep] = vecs[:, chosen]
    fields = [whitney_interpolate_at_barycenters(Cochain(c, 1, full[:, i])) for i in range(len(chosen))]
    return CavityResult(vals[chosen], full, fields, zero_modes)


# --- Darcy flow --------------------------------------------------------------


@dataclass
class DarcyResult:
    flux: np.ndarray  # primal 1-cochain
    pressure: np.ndarray  # dual 0-cochain (one value per triangle), mean zero
    velocity: np.ndarray  # per-triangle velocity at barycenters
    circumcenters: np.ndarray


def _boundary_geometry(c: SimplicialComplex, edges: np.ndarray):
    """Midpoints, outward unit normals and lengths of boundary edges."""
    verts = c.vertices[c[1].simplices[edges]]
    tangent = verts[:, 1] - verts[:, 0]
    length = np.linalg.norm(tangent, axis=1)
    right = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1) / length[:, None]
    # the triangle's third vertex lies on the inner side
    local, gidx = top_face_indices(c, 1)
    owner = {}
    tris = c[2].simplices
    for j, (a, b) in enumerate(local):
        (w,) = {0, 1, 2} - {a, b}
        for t, e in enumerate(gidx[:, j]):
            owner[e] = tris[t, w]
    inner = c.vertices[[owner[e] for e in edges]]
    mid = verts.mean(axis=1)
    outward = np.where(np.einsum("ij,ij->i", right, inner - mid)[:, None] < 0, right, -right)
    return mid, outward, length, np.sign(np.einsum("ij,ij->i", right, outward))


def uniform_flow(velocity) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Boundary normal velocity of a constant field."""
    v = np.asarray(velocity, dtype=float)
    return lambda mid, normal: normal @ v


def darcy(
    c: SimplicialComplex,
    psi: Callable[[np.ndarray, np.ndarray], np.ndarray],
    kappa: float = 1.0,
    mu: float = 1.0,
    tol: float = 1e-10,
) -> DarcyResult:
    """Mixed Darcy problem ``[[-(mu/kappa) ⋆1, d1^T], [d1, 0]] [f; p] = [0; 0]``.

    ``psi(midpoints, outward_normals)`` gives the normal velocity on boundary
    edges, which fixes their fluxes. Interior fluxes are eliminated through
    the diagonal ⋆1, leaving a weighted graph Laplacian for the pressure on
    triangles; one pressure is pinned and the result de-meaned.
    """
    _require_planar_triangles(c)
    if kappa <= 0 or mu <= 0:
        raise InputError("permeability and viscosity must be positive")
    star = dec_hodge_star(c, 1)
    d1 = coboundary(c, 1)
    bnd = boundary_edges(c)
    interior = np.setdiff1d(np.arange(c[1].num_simplices), bnd)
    mid, normal, length, orient = _boundary_geometry(c, bnd)
    normal_velocity = np.asarray(psi(mid, normal), dtype=float)
    net = float(normal_velocity @ length)
    if abs(net) > 1e-10 * max(float(np.abs(normal_velocity) @ length), 1e-300):
        raise InputError(f"boundary flux is inconsistent: net outflow {net:.6g} is not zero")

    flux = np.zeros(c[1].num_simplices)
    flux[bnd] = normal_velocity * length * orient
    d_int = d1[:, interior]
    weights = star.diagonal[interior]
    if np.any(weights <= 0):
        raise InputError("interior dual edges must have positive length")
    lap = (kappa / mu) * (d_int @ sp.diags(1.0 / weights) @ d_int.T).tocsr()
    rhs = -(d1[:, bnd] @ flux[bnd])
    pressure = np.zeros(c[2].num_simplices)
    if pressure.size > 1:
        pinned = lap[1:][:, 1:]
        reduced = np.zeros(pinned.shape[0])
        # CG plus two rounds of residual correction
        for _ in range(3):
            correction = conjugate_gradient(pinned, rhs[1:] - pinned @ reduced, tol=tol)
            reduced += correction.require("pressure solve") if _ == 0 else correction.x
        pressure[1:] = reduced
    flux[interior] = (kappa / mu) * (d_int.T @ pressure) / weights
    pressure -= pressure.mean()
    form = whitney_interpolate_at_barycenters(Cochain(c, 1, flux))
    velocity = np.stack([form[:, 1], -form[:, 0]], axis=1)  # flux form -> velocity
    return DarcyResult(flux, pressure, velocity, circumcenters(c, 2))


# --- harmonic cochains on meshes with holes -----------------------------------


@dataclass
class CohomologyResult:
    basis: np.ndarray  # harmonic 1-cochains as columns
    rank: int
    expected: int
    laplacian_residuals: np.ndarray  # |Δ1 h| / |h| per basis vector
    fields: list[np.ndarray] = field(default_factory=list)


def expected_betti1(c: SimplicialComplex) -> int:
    """First Betti number of a surface mesh from its Euler characteristic."""
    n0, n1, n2 = c.shape
    adjacency = abs(c.boundary(1)) @ abs(c.boundary(1)).T
    b0 = connected_components(adjacency, directed=False)[0]
    if len(boundary_edges(c)):
        b2 = 0
    else:
        b2 = n2 - np.linalg.matrix_rank(c.boundary(2).toarray())
    return int(b0 + b2 - (n0 - n1 + n2))


def _star_inner(w: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ (w * b))


def orthonormalize(vectors: np.ndarray, weights: np.ndarray, drop_tol: float) -> np.ndarray:
    """Gram-Schmidt (twice) under the diagonal inner product; small vectors dropped."""
    basis = []
    for v in vectors.T:
        for _ in range(2):
            for q in basis:
                v = v - _star_inner(weights, q, v) * q
        norm = np.sqrt(_star_inner(weights, v, v))
        if norm > drop_tol:
            basis.append(v / norm)
    return np.array(basis).T.reshape(vectors.shape[0], len(basis))


def localize(basis: np.ndarray) -> np.ndarray:
    """Householder pass concentrating each basis vector on its largest entry.

    For vector i, take its largest-magnitude component j and rotate vectors
    i.. so that all later ones vanish at j. The mixing is orthogonal, so an
    orthonormal basis stays orthonormal.
    """
    b = basis.copy()
    k = b.shape[1]
    for i in range(k - 1):
        j = int(np.argmax(np.abs(b[:, i])))
        row = b[j, i:].copy()
        norm = np.linalg.norm(row)
        if norm == 0.0:
            continue
        target = np.zeros_like(row)
        target[0] = -np.copysign(norm, row[0])
        u = row - target
        if np.linalg.norm(u) == 0.0:
            continue
        u /= np.linalg.norm(u)
        b[:, i:] -= 2.0 * np.outer(b[:, i:] @ u, u)
    return b


def cohomology(
    c: SimplicialComplex,
    seed: int = DEFAULT_SEED,
    expected: Optional[int] = None,
    samples: Optional[int] = None,
    tol: float = 1e-12,
) -> CohomologyResult:
    """Harmonic 1-cochain basis from the harmonic parts of random cochains."""
    _require_planar_triangles(c)
    expected = expected_betti1(c) if expected is None else expected
    samples = max(2 * expected, 2) if samples is None else samples
    stars = [dec_hodge_star(c, p) for p in range(3)]
    d0, d1 = coboundary(c, 0), coboundary(c, 1)
    rng = np.random.default_rng(seed)
    omegas = rng.standard_normal((c[1].num_simplices, samples))
    weights = stars[1].diagonal
    harmonic = np.stack(
        [hodge_decompose(omegas[:, i], d0, d1, stars[1], tol=tol, refine=1).harmonic for i in range(samples)], axis=1
    )
    scale = max(np.sqrt(_star_inner(weights, w, w)) for w in omegas.T)
    basis = orthonormalize(harmonic, weights, 1e-6 * scale)
    basis = localize(basis)
    rank = basis.shape[1]
    if rank != expected:
        warnings.warn(f"harmonic rank {rank} differs from the expected {expected}")
    lap = laplace_derham(c, 1, stars)
    residuals = np.array([np.linalg.norm(lap @ h) / np.linalg.norm(h) for h in basis.T])
    fields = [whitney_interpolate_at_barycenters(Cochain(c, 1, h)) for h in basis.T]
    return CohomologyResult(basis, rank, expected, residuals, fields)


# --- sensor network coverage ---------------------------------------------------


@dataclass
class SensorResult:
    complex: RipsComplex
    cochain: np.ndarray
    harmonic: np.ndarray  # normalized so the largest magnitude is 1 (if nonzero)
    harmonic_ratio: float  # |h| / |x| before normalization


def sensor(points, radius: float, seed: int = DEFAULT_SEED, tol: float = 1e-12) -> SensorResult:
    """Detect coverage holes from the harmonic part of a random edge cochain."""
    rips = build_rips(points, radius, max_dim=2)
    if rips.dim < 1 or rips[1].num_simplices == 0:
        raise InputError("the Rips complex has no edges at this radius")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(rips[1].num_simplices)
    d0 = rips.boundary(1).T.tocsr()
    d1 = rips.boundary(2).T.tocsr() if rips.dim >= 2 else None
    h = hodge_decompose(x, d0, d1, None, tol=tol).harmonic
    ratio = float(np.linalg.norm(h) / np.linalg.norm(x))
    if ratio > 1e-8:
        h = h / np.abs(h).max()
    return SensorResult(rips, x, h, ratio)


# --- ranking from pairwise comparisons ---------------------------------------


@dataclass
class RankResult:
    labels: np.ndarray
    scores: np.ndarray
    residual: float
    components: int


def rank(edges: np.ndarray, values: np.ndarray, tol: float = 1e-12) -> RankResult:
    """Scores ``alpha`` minimizing ``|∂1^T alpha - omega|``, shifted to minimum 0.

    Each row ``i j w`` says "j beats i by w". Repeated pairs are kept as
    separate least-squares rows. Components of a disconnected graph are
    scored independently.
    """
    edges = np.asarray(edges, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if edges.shape[0] == 0:
        raise InputError("no edges")
    cx = build_abstract([edges])
    d0 = cx.boundary(1).T.tocsr()  # rows: stored edges
    stored = cx[1].oriented()
    row_edge = cx.index_of(1, edges)
    row_sign = np.where(edges[:, 0] == stored[row_edge, 0], 1.0, -1.0)
    select = sp.csr_matrix((row_sign, (np.arange(len(edges)), row_edge)), shape=(len(edges), len(stored)))
    a = (select @ d0).tocsr()

    n_comp, label = connected_components(abs(d0.T @ d0), directed=False)
    if n_comp > 1:
        warnings.warn(f"comparison graph has {n_comp} components; each is ranked independently")
    scores = np.zeros(cx[0].num_simplices)
    for comp in range(n_comp):
        verts = np.nonzero(label == comp)[0]
        rows = np.nonzero(np.asarray(abs(a[:, verts]).sum(axis=1)).ravel() > 0)[0]
        if rows.size == 0:
            continue
        sub = a[rows][:, verts]
        alpha = least_squares(sub, values[rows], tol=tol).require("least squares")
        scores[verts] = alpha - alpha.min()
    residual = float(np.linalg.norm(a @ scores - values))
    return RankResult(cx.labels, scores, residual, n_comp)

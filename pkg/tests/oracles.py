"""Independent reference computations used by the tests.

Nothing here calls into deckit; each oracle recomputes its quantity by a
different route (dense linear algebra, brute-force enumeration, quadrature).
"""

from __future__ import annotations

import math
from itertools import combinations, product

import numpy as np
import scipy.sparse as sp


def permutation_sign(perm) -> int:
    """Sign of a permutation given as a sequence of distinct sortable items, by cycle count."""
    perm = list(perm)
    rank = {v: i for i, v in enumerate(sorted(perm))}
    target = [rank[v] for v in perm]
    seen = [False] * len(target)
    sign = 1
    for start in range(len(target)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = target[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def dense_rank(a) -> int:
    a = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    return int(np.linalg.matrix_rank(a))


def betti_numbers(boundaries: list, sizes: list[int]) -> list[int]:
    """``b_p = N_p - rank ∂_p - rank ∂_{p+1}`` with ``∂_0 = 0``."""
    ranks = [0] + [dense_rank(b) for b in boundaries[1:]] + [0]
    return [sizes[p] - ranks[p] - ranks[p + 1] for p in range(len(sizes))]


def cayley_menger_volume(points) -> float:
    """Volume of a p-simplex from its pairwise distances alone."""
    pts = np.asarray(points, dtype=float)
    k = pts.shape[0]
    p = k - 1
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    cm = np.ones((k + 1, k + 1))
    cm[0, 0] = 0.0
    cm[1:, 1:] = d2
    coef = (-1) ** (p + 1) / (2**p * math.factorial(p) ** 2)
    return math.sqrt(max(coef * np.linalg.det(cm), 0.0))


def rips_cliques(points, r: float, max_dim: int) -> list[np.ndarray]:
    """All vertex subsets with pairwise distance <= r, by exhaustive growth."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    close = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            close[i, j] = i != j and np.sum((pts[i] - pts[j]) ** 2) <= r * r
    levels = [[(i,) for i in range(n)]]
    for _ in range(max_dim):
        nxt = set()
        for s in levels[-1]:
            for v in range(s[-1] + 1, n):
                if all(close[u, v] for u in s):
                    nxt.add(s + (v,))
        if not nxt:
            break
        levels.append(sorted(nxt))
    return [np.array(level, dtype=np.int64).reshape(-1, k + 1) for k, level in enumerate(levels)]


def cube_euler_characteristic(bitmap) -> int:
    """Euler characteristic of the union of closed unit cubes at the on-bits.

    Counts every lattice cell (corner, direction subset) touched by some cube
    by brute-force enumeration of all faces of all cubes.
    """
    bitmap = np.asarray(bitmap)
    n = bitmap.ndim
    cells = set()
    for corner in np.argwhere(bitmap != 0):
        for dirs_len in range(n + 1):
            for dirs in combinations(range(n), dirs_len):
                fixed = [d for d in range(n) if d not in dirs]
                for offs in product((0, 1), repeat=len(fixed)):
                    c = list(corner)
                    for d, o in zip(fixed, offs):
                        c[d] += o
                    cells.add((tuple(c), dirs))
    return sum((-1) ** len(dirs) for _, dirs in cells)


# --- quadrature and Whitney forms --------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grundmann_moeller(n: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and weights of the degree ``2s+1`` rule on an n-simplex.

    Weights sum to 1, so a rule applied to ``f`` times the simplex volume
    integrates ``f``. Some weights are negative, which is inherent to the rule.
    """
    d = 2 * s + 1
    pts, wts = [], []
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (d + n - 2 * i) ** d / (math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            pts.append([(2 * b + 1) / (d + n - 2 * i) for b in beta])
            wts.append(w)
    wts = np.array(wts) * math.factorial(n)
    return np.array(pts), wts


def gradients_by_lstsq(points) -> np.ndarray:
    """Rows are the gradients of the barycentric coordinates within the affine hull.

    The minimum-norm solutions of ``E g_j = e_j`` (E = edge vectors from v0)
    lie in the span of the edges, which is what a tangential gradient is.
    """
    pts = np.asarray(points, dtype=float)
    edges = pts[1:] - pts[0]
    x = np.linalg.lstsq(edges, np.eye(len(edges)), rcond=None)[0].T  # (p, N)
    return np.vstack([-x.sum(axis=0), x])


def _wedge_components(grads: np.ndarray, subset) -> np.ndarray:
    """Components of ``dμ_{a_1} ∧ … ∧ dμ_{a_k}`` on increasing coordinate sets."""
    k = len(subset)
    dim = grads.shape[1]
    coords = list(combinations(range(dim), k))
    if k == 0:
        return np.ones(1)
    g = grads[list(subset)]
    return np.array([np.linalg.det(g[:, list(idx)]) for idx in coords])


def whitney_form(grads: np.ndarray, face, mu: np.ndarray) -> np.ndarray:
    """Components of the Whitney form of an oriented face at barycentric point ``mu``."""
    p = len(face) - 1
    total = 0.0
    for k in range(p + 1):
        rest = face[:k] + face[k + 1 :]
        total = total + (-1) ** k * mu[face[k]] * _wedge_components(grads, rest)
    return math.factorial(p) * total


def whitney_mass_oracle(points, faces, s: int = 2) -> np.ndarray:
    """Gram matrix of Whitney forms on one simplex by quadrature."""
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    grads = gradients_by_lstsq(pts)
    vol = cayley_menger_volume(pts)
    qp, qw = grundmann_moeller(n, s)
    m = np.zeros((len(faces), len(faces)))
    for mu, w in zip(qp, qw):
        vals = [whitney_form(grads, tuple(f), mu) for f in faces]
        for i in range(len(faces)):
            for j in range(len(faces)):
                m[i, j] += w * vol * (vals[i] @ vals[j])
    return m


def whitney_stiffness_oracle(points, faces) -> np.ndarray:
    """Gram matrix of the (constant) exterior derivatives of Whitney forms."""
    pts = np.asarray(points, dtype=float)
    grads = gradients_by_lstsq(pts)
    vol = cayley_menger_volume(pts)
    p = len(faces[0]) - 1
    vals = [math.factorial(p + 1) * _wedge_components(grads, tuple(f)) for f in faces]
    return vol * np.array([[a @ b for b in vals] for a in vals])


def random_simplex(rng, n: int, dim: int | None = None, min_quality: float = 0.05) -> np.ndarray:
    """A random n-simplex in R^dim whose volume is at least ``min_quality`` times
    that of the regular simplex with the same longest edge."""
    dim = n if dim is None else dim
    regular = math.sqrt(n + 1) / (math.factorial(n) * 2 ** (n / 2))
    while True:
        pts = rng.standard_normal((n + 1, dim))
        if n == 0:
            return pts
        size = max(np.linalg.norm(a - b) for a, b in combinations(pts, 2))
        if cayley_menger_volume(pts) > min_quality * regular * size**n:
            return pts

"""Sparse and small dense linear algebra used by every other module.

Sparse matrices are ``scipy.sparse.csr_matrix`` objects kept in canonical
form: sorted column indices within each row, no duplicate entries and no
stored zeros. Everything produced here satisfies that invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .errors import ConvergenceError

SparseMatrix = sp.csr_matrix


def canonical(a) -> sp.csr_matrix:
    """Return ``a`` as canonical CSR (sorted indices, summed duplicates, no zeros)."""
    a = sp.csr_matrix(a, copy=True)
    a.sum_duplicates()
    a.eliminate_zeros()
    a.sort_indices()
    return a


def is_canonical(a: sp.csr_matrix) -> bool:
    """Check the canonical CSR invariants without modifying ``a``."""
    if not sp.isspmatrix_csr(a):
        return False
    ptr, idx = a.indptr, a.indices
    rows, cols = a.shape
    if len(ptr) != rows + 1 or ptr[0] != 0 or ptr[-1] != len(idx) or len(idx) != len(a.data):
        return False
    if np.any(np.diff(ptr) < 0):
        return False
    if len(idx) and (idx.min() < 0 or idx.max() >= cols):
        return False
    if np.any(a.data == 0):
        return False
    # strictly increasing within rows: every in-row successor must be larger
    step = np.diff(idx)
    row_start = np.zeros(len(idx), dtype=bool)
    row_start[ptr[:-1][ptr[:-1] < len(idx)]] = True
    return bool(np.all((step > 0) | row_start[1:]))


def from_coo(rows, cols, data, shape: tuple[int, int]) -> sp.csr_matrix:
    """Build canonical CSR from coordinate triplets, summing duplicates."""
    return canonical(sp.coo_matrix((data, (rows, cols)), shape=shape))


def spgemm(a: sp.csr_matrix, b: sp.csr_matrix) -> sp.csr_matrix:
    """Sparse product ``a @ b``; entries cancelling to exactly zero are pruned."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return canonical(sp.csr_matrix(a) @ sp.csr_matrix(b))


def transpose(a: sp.csr_matrix) -> sp.csr_matrix:
    return canonical(sp.csr_matrix(a).T)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of an iterative solve. ``converged`` is never implied."""

    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    history: list[float] = field(default_factory=list, repr=False)

    def require(self, what: str = "conjugate gradient") -> np.ndarray:
        """Return ``x`` or raise if the solve did not converge."""
        if not self.converged:
            raise ConvergenceError(
                f"{what} stopped after {self.iterations} iterations "
                f"with relative residual {self.residual:.3e}"
            )
        return self.x


def _as_operator(a) -> LinearOperator:
    if isinstance(a, LinearOperator):
        return a
    return aslinearoperator(a)


def conjugate_gradient(
    a,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
    atol: float = 0.0,
) -> SolveResult:
    """Conjugate gradients from a zero start for symmetric PSD ``a``.

    For a singular but consistent system the iterates stay in range(a), so the
    result is the solution with no component in the kernel. Convergence means
    ``||a x - b|| <= max(tol * ||b||, atol)``; the reported residual is relative
    to ``||b||``.
    """
    op = _as_operator(a)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if op.shape != (n, n):
        raise ValueError(f"operator shape {op.shape} does not match rhs length {n}")
    if max_iter is None:
        max_iter = 10 * max(n, 1)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return SolveResult(x, True, 0, 0.0, [0.0])
    target = max(tol, atol / bnorm)
    r = b.copy()
    d = r.copy()
    rr = r @ r
    history = [np.sqrt(rr) / bnorm]
    it = 0
    while history[-1] > target and it < max_iter:
        ad = op.matvec(d)
        curvature = d @ ad
        if curvature <= 0.0:
            break  # direction in the kernel: b is (numerically) inconsistent
        step = rr / curvature
        x += step * d
        r -= step * ad
        rr_new = r @ r
        d = r + (rr_new / rr) * d
        rr = rr_new
        it += 1
        history.append(np.sqrt(rr) / bnorm)
        if callback is not None:
            callback(x)
    # report the true residual rather than the recursively updated one
    res = np.linalg.norm(b - op.matvec(x)) / bnorm
    return SolveResult(x, bool(res <= target), it, float(res), history)


def least_squares(a, b: np.ndarray, tol: float = 1e-10, max_iter: Optional[int] = None) -> SolveResult:
    """Minimum-norm least-squares solution by CG on the normal equations."""
    op = _as_operator(a)
    b = np.asarray(b, dtype=float)
    m, n = op.shape
    if b.shape[0] != m:
        raise ValueError(f"rhs length {b.shape[0]} does not match {m} rows")
    normal = LinearOperator((n, n), matvec=lambda v: op.rmatvec(op.matvec(v)), dtype=float)
    return conjugate_gradient(normal, op.rmatvec(b), tol=tol, max_iter=max_iter)


def symmetric_generalized_eig(k, m, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``count`` eigenpairs of ``k v = lam m v``.

    ``m`` is Cholesky factored as ``L L^T`` and the problem reduced to the
    standard symmetric one for ``L^-1 k L^-T``. Eigenvectors (columns) are
    m-orthonormal and eigenvalues ascend.
    """
    kd = k.toarray() if sp.issparse(k) else np.asarray(k, dtype=float)
    md = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)
    order = kd.shape[0]
    if kd.shape != (order, order) or md.shape != (order, order):
        raise ValueError("k and m must be square and of the same order")
    if not 0 < count <= order:
        raise ValueError(f"count must be in 1..{order}")
    try:
        low = scipy.linalg.cholesky(md, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("mass matrix is not positive definite") from exc
    half = scipy.linalg.solve_triangular(low, kd, lower=True)
    reduced = scipy.linalg.solve_triangular(low, half.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)
    vals, vecs = scipy.linalg.eigh(reduced, subset_by_index=[0, count - 1])
    vecs = scipy.linalg.solve_triangular(low.T, vecs, lower=False)
    return vals, vecs


class DeterminantCounter:
    """Tallies how many determinants ``dense_determinant`` has evaluated."""

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)


def _det_cofactor(a: np.ndarray) -> np.ndarray:
    k = a.shape[-1]
    if k == 0:
        return np.ones(a.shape[:-2])
    if k == 1:
        return a[..., 0, 0].copy()
    if k == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    # Laplace expansion along the first row
    total = np.zeros(a.shape[:-2])
    for j in range(k):
        minor = np.delete(a[..., 1:, :], j, axis=-1)
        total = total + (-1) ** j * a[..., 0, j] * _det_cofactor(minor)
    return total


def dense_determinant(a, counter: Optional[DeterminantCounter] = None):
    """Determinant of a square matrix or a stack of them (shape ``(..., k, k)``).

    Cofactor expansion for order up to 4, LU factorization beyond.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    k = a.shape[-1]
    if counter is not None:
        counter.add(int(np.prod(a.shape[:-2], dtype=np.int64)))
    if k <= 4:
        out = _det_cofactor(a)
    else:
        out = np.linalg.det(a)  # LAPACK getrf
    return float(out) if a.ndim == 2 else out

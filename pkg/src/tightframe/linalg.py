"""Small dense real linear algebra kernel.

Vectors are 1-D float arrays and matrices are 2-D float arrays. Symmetric
matrices are produced by :func:`sym_matrix`, which symmetrizes on
construction and returns a read-only array, so entry ``(i, j)`` and
``(j, i)`` are always bit-identical.

The eigensolver is a cyclic Jacobi method. It is meant for the small
matrices (n up to a few dozen) that appear in frame computations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

SYMMETRY_WARN_TOL = 1e-9
SIGN_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10


class NumericalError(RuntimeError):
    """A numerical routine failed where theory says it should succeed."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _frozen(a):
    a.setflags(write=False)
    return a


def as_vector(x):
    """Return ``x`` as a finite, non-empty 1-D float array."""
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return _frozen(v)


def _as_square(a, name="matrix"):
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def sym_matrix(a, warn_tol=SYMMETRY_WARN_TOL):
    """Build a symmetric matrix by averaging ``a`` with its transpose.

    A :class:`RuntimeWarning` is emitted when the input's asymmetry
    ``max |a_ij - a_ji|`` exceeds ``warn_tol``.
    """
    m = _as_square(a)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    asym = float(np.max(np.abs(m - m.T)))
    if asym > warn_tol:
        warnings.warn(f"input matrix asymmetric by {asym:.3g}; symmetrizing", RuntimeWarning, stacklevel=2)
    s = 0.5 * (m + m.T)
    # 0.5*(a+b) == 0.5*(b+a) bitwise, but be explicit about it.
    s = np.triu(s) + np.triu(s, 1).T
    return _frozen(s)


def outer(u, v):
    """Tensor product ``u ⊗ v``: the matrix with entries ``u_i * v_j``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return np.outer(u, v)


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``tr(A B^T) = sum_ij a_ij b_ij``."""
    a = _as_square(a, "A")
    b = _as_square(b, "B")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.einsum("ij,ij->", a, b))


def hs_norm(a):
    return math.sqrt(max(hs_inner(a, a), 0.0))


def trace(a):
    return float(np.trace(_as_square(a)))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix.

    ``eigenvalues`` are in non-decreasing order and ``eigenvectors[:, i]``
    is the unit eigenvector belonging to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def vectors(self):
        """Eigenvectors as a list of 1-D arrays, paired with ``eigenvalues``."""
        return [self.eigenvectors[:, i] for i in range(self.eigenvalues.size)]

    def reconstruct(self):
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T

    def apply_function(self, f):
        """Return ``Q f(Λ) Q^T``, e.g. a matrix square root or inverse."""
        q = self.eigenvectors
        return sym_matrix((q * f(self.eigenvalues)) @ q.T, warn_tol=np.inf)


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def eigh_symmetric(m, max_sweeps=JACOBI_MAX_SWEEPS, rel_tol=JACOBI_REL_TOL):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Pivots are visited in row-major order ``(0,1), (0,2), ..., (n-2,n-1)``.
    Sweeps stop once the off-diagonal HS norm is at most
    ``rel_tol * ||M||``. Each eigenvector is signed so that its first
    entry with magnitude above 1e-12 is positive.

    Raises
    ------
    NumericalError
        If the off-diagonal norm has not dropped below tolerance after
        ``max_sweeps`` sweeps.
    """
    a = np.array(sym_matrix(m), dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    target = rel_tol * hs_norm(a)
    sweeps = 0
    off = _off_norm(a)
    while off > target:
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
                residual=off,
            )
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                g = 100.0 * abs(apq)
                if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    # below rounding of both diagonal entries
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) Givens rotation
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        off = _off_norm(a)

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for i in range(n):
        col = v[:, i]
        big = np.flatnonzero(np.abs(col) > SIGN_TOL)
        if big.size and col[big[0]] < 0:
            v[:, i] = -col
    return EigenDecomposition(_frozen(w), _frozen(v), sweeps)


def check_orthonormal(basis, tol=ORTHONORMAL_TOL):
    """Return ``basis`` as a (k, n) array after checking its rows are orthonormal."""
    b = np.atleast_2d(np.asarray(basis, dtype=float))
    if b.ndim != 2:
        raise ValueError("basis must be a list of vectors")
    err = np.max(np.abs(b @ b.T - np.eye(b.shape[0]))) if b.size else 0.0
    if err > tol:
        raise ValueError(f"basis is not orthonormal (max deviation {err:.3e})")
    return b


def restrict_quadratic_form(m, basis):
    """Matrix of the form ``x^T M x`` restricted to ``span(basis)``.

    ``basis`` holds k orthonormal vectors of dimension n (one per row or
    list entry); the result is the k x k matrix ``B^T M B`` where ``B``
    has the basis vectors as columns.
    """
    m = _as_square(m)
    b = check_orthonormal(basis)
    if b.shape[1] != m.shape[0]:
        raise ValueError(f"basis vectors have dimension {b.shape[1]}, matrix is {m.shape[0]}x{m.shape[0]}")
    if b.shape[0] > m.shape[0]:
        raise ValueError("more basis vectors than the ambient dimension")
    return sym_matrix(b @ m @ b.T, warn_tol=np.inf)


def orthogonal_complement(x):
    """Orthonormal basis (as rows) of the hyperplane ``x^⊥``.

    Uses the Householder reflection that maps ``x / |x|`` to a coordinate
    axis; the remaining reflected axes span the complement.
    """
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("cannot take the complement of the zero vector")
    u = x / nrm
    n = u.size
    k = int(np.argmax(np.abs(u)))
    w = u.copy()
    w[k] += math.copysign(1.0, u[k])
    h = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    # rows of h are orthonormal and row k is ±u
    return np.delete(h, k, axis=0)

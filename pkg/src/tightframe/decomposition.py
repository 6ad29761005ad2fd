"""Equal-norm orthogonal systems on ellipsoids and unit-norm PSD resolutions.

A positive definite M with trace n can be written as ``sum_i v_i ⊗ v_i``
with n unit vectors: find pairwise orthogonal ``z_i`` of a common length
on the ellipsoid ``{x : x^T M x = 1}``; that length is forced to be
``sqrt(n / tr M) = 1`` and ``v_i = M^{1/2} z_i`` are the unit vectors.
Larger counts are reduced to that case by peeling off top eigenvectors.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from .linalg import (
    NumericalError,
    eigh_symmetric,
    hs_norm,
    orthogonal_complement,
    outer,
    restrict_quadratic_form,
    sym_matrix,
)

DEGENERATE_TOL = 1e-12
BISECT_TOL = 1e-12
BISECT_MAX_ITER = 200
RANK_REL_TOL = 1e-10
TRACE_REL_TOL = 1e-8
PSD_TOL = 1e-10
UNIT_GUARD = 1e-9


@dataclass(frozen=True)
class Ellipsoid:
    """The centred shell ``{x : x^T M x = 1}`` of a positive definite M."""

    form: np.ndarray

    def __post_init__(self):
        m = sym_matrix(self.form)
        lo = eigh_symmetric(m).eigenvalues[0]
        if not lo > DEGENERATE_TOL:
            raise ValueError(f"degenerate ellipsoid: smallest eigenvalue {lo:.3e}")
        object.__setattr__(self, "form", m)

    @property
    def dim(self):
        return self.form.shape[0]

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return abs(float(x @ self.form @ x) - 1.0) <= tol


@dataclass(frozen=True)
class Decomposition:
    """Unit vectors (rows of ``vectors``) with ``sum v_i ⊗ v_i ≈ M``.

    One valid witness among many; resolutions are not unique.
    """

    vectors: np.ndarray
    reconstruction_residual: float
    rank: int

    @property
    def count(self):
        return self.vectors.shape[0]


def rho_target(m, n=None):
    """Common length ``sqrt(n / tr M)`` of an orthogonal system on the ellipsoid of M."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0] if n is None else n
    tr = float(np.trace(m))
    if not tr > 0:
        raise ValueError(f"trace must be positive, got {tr!r}")
    return math.sqrt(n / tr)


def bisect(f, lo, hi, tol=BISECT_TOL, max_iter=BISECT_MAX_ITER):
    """Root of ``f`` on ``[lo, hi]`` given ``f(lo) <= 0 <= f(hi)``."""
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise NumericalError(f"root not bracketed: f({lo})={flo:.3e}, f({hi})={fhi:.3e}")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or mid in (lo, hi):
            break
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return mid


def _point_with_norm(m, ed, target_sq):
    # walk the quarter arc from the shortest to the longest semi-axis
    # direction; on it |x(θ)|^2 = 1 / (λmax cos^2 θ + λmin sin^2 θ)
    a = ed.eigenvectors[:, -1]
    b = ed.eigenvectors[:, 0]

    def on_ellipsoid(theta):
        u = math.cos(theta) * a + math.sin(theta) * b
        return u / math.sqrt(float(u @ m @ u))

    def excess(theta):
        x = on_ellipsoid(theta)
        return float(x @ x) - target_sq

    return on_ellipsoid(bisect(excess, 0.0, 0.5 * math.pi))


def _equal_norm_orthogonal(m):
    n = m.shape[0]
    if n == 1:
        return np.array([[1.0 / math.sqrt(m[0, 0])]])
    ed = eigh_symmetric(m)
    lo, hi = ed.eigenvalues[0], ed.eigenvalues[-1]
    if hi - lo <= DEGENERATE_TOL * hi:
        # a sphere: any orthonormal basis, scaled
        return ed.eigenvectors.T / np.sqrt(ed.eigenvalues)[:, None]
    # The section of the ellipsoid by x^⊥ has form trace tr M - 1/|x|^2, so
    # its orthogonal systems have length^2 (n-1) / (tr M - 1/|x|^2). That
    # equals |x|^2 exactly when |x|^2 = n / tr M.
    x0 = _point_with_norm(m, ed, n / float(np.trace(m)))
    basis = orthogonal_complement(x0)
    rest = _equal_norm_orthogonal(np.array(restrict_quadratic_form(m, basis)))
    return np.vstack([x0, rest @ basis])


def equal_norm_orthogonal(ellipsoid):
    """n pairwise orthogonal vectors of equal length lying on ``ellipsoid``.

    Returns an ``(n, n)`` array with one vector per row. Each row ``z``
    satisfies ``z^T M z = 1`` and has length ``sqrt(n / tr M)``.
    """
    if not isinstance(ellipsoid, Ellipsoid):
        ellipsoid = Ellipsoid(ellipsoid)
    return _equal_norm_orthogonal(np.array(ellipsoid.form))


def deflate_once(m):
    """Split off ``w ⊗ w`` for a unit top eigenvector ``w`` of M.

    Returns ``(w, M - w ⊗ w)``. Requires the top eigenvalue to be at
    least 1 so the remainder stays positive semi-definite.
    """
    m = sym_matrix(m)
    ed = eigh_symmetric(m)
    top = ed.eigenvalues[-1]
    if top < 1.0 - PSD_TOL:
        raise ValueError(f"largest eigenvalue {top!r} < 1; cannot remove a unit rank-one term")
    w = np.array(ed.eigenvectors[:, -1])
    return w, sym_matrix(m - outer(w, w), warn_tol=np.inf)


def _range_basis(ed):
    thr = RANK_REL_TOL * max(ed.eigenvalues[-1], 0.0)
    keep = ed.eigenvalues > thr
    return ed.eigenvectors[:, keep].T


def decompose_unit_norm(m, count):
    """Write a PSD matrix of trace ``count`` as a sum of ``count`` unit tensors.

    Vectors are confined to the range of M. While more vectors are
    needed than the rank, a top eigenvector is split off; the
    full-rank remainder is resolved through an equal-norm orthogonal
    system on its ellipsoid. The input is rescaled to trace exactly
    ``count`` before the construction, which absorbs trace rounding up to
    the accepted tolerance.

    Raises
    ------
    ValueError
        If ``count`` is not a positive integer, M is not PSD, the trace
        differs from ``count`` by more than ``1e-8 * count``, or
        ``count < rank(M)``.
    NumericalError
        If the final vectors miss unit length by more than 1e-9.
    """
    if isinstance(count, bool) or not isinstance(count, numbers.Integral):
        if isinstance(count, numbers.Real) and float(count).is_integer():
            count = int(count)
        else:
            raise ValueError(f"count must be an integer, got {count!r}")
    count = int(count)
    if count < 1:
        raise ValueError("count must be positive")
    source = sym_matrix(m)
    ed = eigh_symmetric(source)
    scale = max(1.0, abs(ed.eigenvalues[-1]))
    if ed.eigenvalues[0] < -PSD_TOL * scale:
        raise ValueError(f"matrix is not positive semi-definite (eigenvalue {ed.eigenvalues[0]:.3e})")
    tr = float(np.trace(source))
    if abs(tr - count) > TRACE_REL_TOL * count:
        raise ValueError(f"trace {tr!r} does not match count {count}")
    rank = _range_basis(ed).shape[0]
    if count < rank:
        raise ValueError(f"count {count} is smaller than rank {rank}")

    work = np.array(source) * (count / tr)
    found = []
    remaining = count
    while True:
        ed = eigh_symmetric(work)
        basis = _range_basis(ed)
        r = basis.shape[0]
        if remaining > r:
            w = np.array(ed.eigenvectors[:, -1])
            found.append(w)
            work = np.array(sym_matrix(work - outer(w, w), warn_tol=np.inf))
            remaining -= 1
            continue
        if remaining < r:
            raise NumericalError(f"rank {r} exceeds the {remaining} vectors left after deflation")
        reduced = restrict_quadratic_form(work, basis)
        z = equal_norm_orthogonal(Ellipsoid(reduced))
        root = eigh_symmetric(reduced).apply_function(lambda lam: np.sqrt(np.clip(lam, 0.0, None)))
        v = z @ root
        norms = np.linalg.norm(v, axis=1)
        err = float(np.max(np.abs(norms - 1.0)))
        if err > UNIT_GUARD:
            raise NumericalError(f"base-case vectors miss unit length by {err:.3e}", residual=err)
        found.extend((v / norms[:, None]) @ basis)
        break

    vectors = np.array(found)
    vectors.setflags(write=False)
    residual = hs_norm(np.array(source) - vectors.T @ vectors)
    return Decomposition(vectors=vectors, reconstruction_residual=residual, rank=rank)

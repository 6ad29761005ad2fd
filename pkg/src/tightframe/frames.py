"""Unit-norm vector systems, frame operators and tightness certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import hs_norm, sym_matrix

UNIT_TOL = 1e-10
RENORMALIZE_TOL = 1e-6
DEFAULT_CERT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class UnitVectorSystem:
    """An ordered system of N unit vectors in R^n.

    ``vectors`` is the N x n synthesis matrix whose rows are the frame
    vectors. Use :meth:`from_rows` to build one from approximately
    normalized data.
    """

    vectors: np.ndarray

    def __post_init__(self):
        x = np.array(self.vectors, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"expected an N x n array of vectors, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("vector system has non-finite entries")
        err = np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0))
        if err > UNIT_TOL:
            raise ValueError(f"vectors are not unit norm (max deviation {err:.3e})")
        x.setflags(write=False)
        object.__setattr__(self, "vectors", x)

    @classmethod
    def from_rows(cls, rows, renormalize_tol=RENORMALIZE_TOL):
        """Build a system, renormalizing rows whose norm is within
        ``renormalize_tol`` of 1 and rejecting anything further off."""
        x = np.array(rows, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.size == 0:
            raise ValueError(f"expected an N x n array of vectors, got shape {x.shape}")
        norms = np.linalg.norm(x, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > renormalize_tol)
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"vector {i} has norm {norms[i]!r}, not within {renormalize_tol} of 1")
        # rows already unit to rounding are kept bit-for-bit
        fix = np.abs(norms - 1.0) > 1e-15
        x[fix] /= norms[fix, None]
        return cls(x)

    @classmethod
    def random(cls, dim, count, rng):
        """I.i.d. Gaussian vectors, normalized. ``rng`` is a seed or Generator."""
        rng = np.random.default_rng(rng)
        while True:
            x = rng.standard_normal((count, dim))
            norms = np.linalg.norm(x, axis=1)
            if np.all(norms > 1e-8):
                return cls(x / norms[:, None])

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def count(self):
        return self.vectors.shape[0]

    def __len__(self):
        return self.count

    def __getitem__(self, i):
        return self.vectors[i]

    def __iter__(self):
        return iter(self.vectors)

    def __repr__(self):
        return f"UnitVectorSystem(dim={self.dim}, count={self.count})"


def frame_operator(system):
    """S = sum_i u_i ⊗ u_i = L^T L."""
    x = system.vectors
    return sym_matrix(x.T @ x, warn_tol=np.inf)


def gram_matrix(system):
    """G = L L^T, the N x N matrix of inner products."""
    x = system.vectors
    return sym_matrix(x @ x.T, warn_tol=np.inf)


def frame_potential(system):
    """Sum of squared inner products ``<u_i, u_j>^2`` over all ordered pairs."""
    x = system.vectors
    g = x @ x.T
    return float(np.sum(g * g))


def potential_lower_bound(dim, count):
    """Minimum of the frame potential over N unit vectors in R^n."""
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    if count <= dim:
        return float(count)
    return count * count / dim


def optimality_gap(system):
    """HS distance from the characterization of a global minimizer.

    For N >= n this is ``||S - (N/n) I||``, for N < n it is ``||G - I||``.
    Its square equals ``FP - potential_lower_bound`` but it is computed
    without that cancellation.
    """
    x = system.vectors
    count, dim = x.shape
    if count >= dim:
        dev = x.T @ x - (count / dim) * np.eye(dim)
    else:
        dev = x @ x.T - np.eye(count)
    return float(np.sqrt(np.sum(dev * dev)))


@dataclass(frozen=True)
class FrameCertificate:
    potential: float
    lower_bound: float
    frame_operator_deviation: float
    lambda_estimate: float
    is_tight: bool
    is_orthonormal_set: bool
    max_offdiag: float
    tol: float


def certify(system, tol=DEFAULT_CERT_TOL):
    """Check whether ``system`` is a unit-norm tight frame or an orthonormal set."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    n, count = system.dim, system.count
    s = frame_operator(system)
    g = gram_matrix(system)
    lam = float(np.trace(s)) / n
    deviation = hs_norm(s - (count / n) * np.eye(n))
    offdiag = float(np.max(np.abs(g - np.diag(np.diag(g))))) if count > 1 else 0.0
    return FrameCertificate(
        potential=frame_potential(system),
        lower_bound=potential_lower_bound(n, count),
        frame_operator_deviation=deviation,
        lambda_estimate=lam,
        is_tight=deviation <= tol,
        is_orthonormal_set=count <= n and offdiag <= tol,
        max_offdiag=offdiag,
        tol=tol,
    )


def mercedes_benz():
    """Three unit vectors at 120 degrees in the plane."""
    k = np.arange(3)
    return UnitVectorSystem(np.column_stack([np.cos(2 * math.pi * k / 3), np.sin(2 * math.pi * k / 3)]))

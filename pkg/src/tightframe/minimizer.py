"""Frame potential minimization on products of unit spheres.

Descent moves every vector along a great circle,
``u_i <- cos(d_i) u_i + sin(d_i) v_i``, with ``v_i`` the normalized
negative tangential gradient and a shared Armijo step length. When the
gradient vanishes at a system that is not a global minimizer, the
vectors are grouped by their frame-operator eigenvalue and the top group
is rotated along a linear dependence ``sum c_i u_i = 0`` toward a
lower eigendirection, which lowers the potential at second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frames import DEFAULT_CERT_TOL, UnitVectorSystem, frame_potential
from .linalg import NumericalError, eigh_symmetric

ORTHO_TOL = 1e-8
NULLSPACE_TOL = 1e-8
MAX_ESCAPE_HALVINGS = 40


@dataclass(frozen=True)
class MinimizerConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-9
    step_init: float = 0.125
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    saddle_delta: float = 0.25
    eig_group_tol: float = 1e-6
    cert_tol: float = DEFAULT_CERT_TOL
    seed: int = 0
    record_trajectory: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("grad_tol", "step_init", "saddle_delta", "eig_group_tol", "cert_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("armijo_c", "backtrack_factor"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass(frozen=True)
class EigenPartition:
    """Vectors grouped by the eigenvalue of S they belong to.

    ``groups`` is a list of ``(eigenvalue, indices)`` with eigenvalues
    strictly decreasing.
    """

    groups: list
    residual: float


@dataclass(frozen=True)
class SaddleEscape:
    indices: tuple
    coeffs: np.ndarray
    direction: np.ndarray
    top_eigenvalue: float
    lower_eigenvalue: float
    predicted_curvature: float


@dataclass
class MinimizeReport:
    final_system: UnitVectorSystem
    final_potential: float
    initial_potential: float
    iterations: int
    saddle_escapes: int
    converged: bool
    gap: float
    grad_norm: float
    trajectory: list = field(default=None, repr=False)


def _tangent_gradient(x, shift):
    # 4 (S u_i - <S u_i, u_i> u_i); the shift by a multiple of I cancels
    # exactly but keeps the products small near a tight frame
    s = x.T @ x
    s[np.diag_indices_from(s)] -= shift
    sx = x @ s
    r = np.einsum("ij,ij->i", sx, x)
    return 4.0 * (sx - r[:, None] * x)


def fp_gradient(system):
    """Tangential gradient of the frame potential, one row per vector.

    Row i is ``4 (S u_i - <S u_i, u_i> u_i)``; pairing it with a unit
    tangent ``v_i`` gives the derivative of the potential when ``u_i`` is
    turned toward ``v_i``.
    """
    x = system.vectors
    return _tangent_gradient(x, x.shape[0] / x.shape[1])


def _merit(x):
    # FP minus its lower bound, evaluated without cancellation against the bound
    count, dim = x.shape
    if count >= dim:
        d = x.T @ x
        d[np.diag_indices_from(d)] -= count / dim
    else:
        d = x @ x.T
        d[np.diag_indices_from(d)] -= 1.0
    return float(np.sum(d * d))


def _rotate(x, directions, deltas):
    c = np.cos(deltas)[:, None]
    s = np.sin(deltas)[:, None]
    y = c * x + s * directions
    return y / np.linalg.norm(y, axis=1)[:, None]


def geodesic_step(system, directions, deltas):
    """Turn each ``u_i`` by angle ``deltas[i]`` toward unit tangent ``directions[i]``.

    A zero direction or a zero angle leaves its vector untouched.
    """
    x = system.vectors
    v = np.asarray(directions, dtype=float)
    d = np.broadcast_to(np.asarray(deltas, dtype=float), (x.shape[0],))
    if v.shape != x.shape:
        raise ValueError(f"directions have shape {v.shape}, expected {x.shape}")
    vn = np.linalg.norm(v, axis=1)
    moving = vn > 0
    if np.any(np.abs(vn[moving] - 1.0) > ORTHO_TOL):
        raise ValueError("directions must be unit vectors (or zero)")
    dots = np.abs(np.einsum("ij,ij->i", v, x))
    if np.any(dots > ORTHO_TOL):
        raise ValueError(f"direction not orthogonal to its vector (|<u,v>| = {dots.max():.3e})")
    y = x.copy()
    moving &= d != 0.0
    if np.any(moving):
        y[moving] = _rotate(x[moving], v[moving], d[moving])
    return UnitVectorSystem(y)


def eigen_partition(system, tol, group_tol=1e-6):
    """Group the vectors of a critical system by frame-operator eigenvalue.

    Returns ``None`` if some ``u_i`` is not an eigenvector of S, i.e.
    ``|S u_i - <S u_i, u_i> u_i| > tol``.
    """
    x = system.vectors
    sx = x @ (x.T @ x)
    rq = np.einsum("ij,ij->i", sx, x)
    res = np.linalg.norm(sx - rq[:, None] * x, axis=1)
    residual = float(res.max())
    if residual > tol:
        return None
    order = np.argsort(-rq, kind="stable")
    clusters = [[int(order[0])]]
    for a, b in zip(order[:-1], order[1:]):
        if rq[a] - rq[b] > group_tol:
            clusters.append([])
        clusters[-1].append(int(b))
    groups = [(float(np.mean(rq[c])), tuple(sorted(c))) for c in clusters]
    return EigenPartition(groups=groups, residual=residual)


def saddle_escape_direction(system, partition):
    """Second-order descent direction at a non-optimal critical system.

    The vectors ``u_i`` of the top eigenvalue class ``λ`` are linearly
    dependent; ``c`` is a unit null vector of their Gram matrix. The
    escape direction ``v`` is a unit eigenvector of S for the smallest
    eigenvalue ``μ < λ``: a member of the lowest group, or a vector
    orthogonal to every ``u_i`` (``μ = 0``) when the system does not span.
    Turning each ``u_i`` toward ``v`` by ``c_i δ`` changes the potential
    by ``-2 δ² (λ - μ) + O(δ³)``.

    Returns ``None`` when no lower eigenvalue exists (the system is tight).
    """
    x = system.vectors
    lam, top = partition.groups[0]
    if len(partition.groups) > 1:
        mu, low = partition.groups[-1]
        v = x[low[0]].copy()
    else:
        mu, v = 0.0, None
    # a direction outside span(u_1..u_N) has eigenvalue 0, the smallest possible
    if mu > 0 or v is None:
        extra = _null_direction(x)
        if extra is not None:
            mu, v = 0.0, extra
    if v is None:
        return None

    u = x[list(top)]
    ed = eigh_symmetric(u @ u.T)
    if ed.eigenvalues[0] > NULLSPACE_TOL:
        raise NumericalError(
            f"top eigenvalue class has no linear dependence (smallest Gram eigenvalue {ed.eigenvalues[0]:.3e})",
            residual=float(ed.eigenvalues[0]),
        )
    c = ed.eigenvectors[:, 0]
    c = c / np.linalg.norm(c)
    return SaddleEscape(
        indices=tuple(top),
        coeffs=c,
        direction=v / np.linalg.norm(v),
        top_eigenvalue=lam,
        lower_eigenvalue=mu,
        predicted_curvature=2.0 * (lam - mu) * float(c @ c),
    )


def _null_direction(x):
    ed = eigh_symmetric(x.T @ x)
    if ed.eigenvalues[0] > NULLSPACE_TOL * max(1.0, ed.eigenvalues[-1]):
        return None
    return np.array(ed.eigenvectors[:, 0])


def apply_escape(system, escape, delta):
    """Rotate the escape group toward ``escape.direction`` by ``c_i * delta``."""
    x = system.vectors
    directions = np.zeros_like(x)
    deltas = np.zeros(x.shape[0])
    for i, ci in zip(escape.indices, escape.coeffs):
        # v is orthogonal to u_i only up to the criticality tolerance
        w = escape.direction - (escape.direction @ x[i]) * x[i]
        directions[i] = w / np.linalg.norm(w)
        deltas[i] = ci * delta
    return geodesic_step(system, directions, deltas)


def _try_escape(x, cfg, tol):
    system = UnitVectorSystem(x)
    part = eigen_partition(system, tol, cfg.eig_group_tol)
    if part is None:
        return None
    try:
        esc = saddle_escape_direction(system, part)
    except NumericalError:
        return None
    if esc is None:
        return None
    base = _merit(x)
    delta = cfg.saddle_delta
    for _ in range(MAX_ESCAPE_HALVINGS + 1):
        y = apply_escape(system, esc, delta).vectors
        if _merit(y) < base:
            return y
        delta *= 0.5
    return None


def _bb_step(x, g, x_prev, g_prev, base, spread=1e3):
    # Barzilai-Borwein length from consecutive iterates; the previous
    # gradient is carried over by projecting onto the current tangent space
    step = x - x_prev
    gp = g_prev - np.einsum("ij,ij->i", g_prev, x)[:, None] * x
    dg = g - gp
    sy = float(np.sum(step * dg))
    if sy <= 0.0:
        return base
    return min(max(float(np.sum(step * step)) / sy, base / spread), base * spread)


def minimize(start, cfg=None):
    """Minimize the frame potential starting from ``start``.

    The run stops as soon as the optimality gap (see
    :func:`tightframe.frames.optimality_gap`) is at most ``cfg.cert_tol``,
    or after ``cfg.max_iters`` iterations. Accepted iterates never
    increase the potential.
    """
    cfg = cfg or MinimizerConfig()
    x = np.array(start.vectors, dtype=float)
    count, dim = x.shape
    shift = count / dim if count >= dim else 1.0
    tol2 = cfg.cert_tol**2
    initial = frame_potential(start)
    merit = _merit(x)
    trajectory = [] if cfg.record_trajectory else None
    escapes = 0
    x_prev = g_prev = None
    iters = 0
    gnorm = math.nan

    while True:
        if merit <= tol2 or iters >= cfg.max_iters:
            break
        g = _tangent_gradient(x, shift)
        gi = np.sqrt(np.einsum("ij,ij->i", g, g))
        gn2 = float(gi @ gi)
        gnorm = math.sqrt(gn2)
        if trajectory is not None:
            trajectory.append((iters, float(np.sum((x @ x.T) ** 2)), gnorm))
        iters += 1

        no_escape = False
        if gnorm <= cfg.grad_tol:
            y = _try_escape(x, cfg, cfg.grad_tol)
            if y is not None:
                x, merit = y, _merit(y)
                x_prev = g_prev = None
                escapes += 1
                continue
            # no saddle here: a tiny gradient near a tight frame, keep descending
            no_escape = True
            if gnorm == 0.0:
                break

        s = x.T @ x
        lam_max = float(np.linalg.eigvalsh(s)[-1])
        t = base = cfg.step_init / lam_max
        if x_prev is not None:
            t = _bb_step(x, g, x_prev, g_prev, base)
        moving = gi > 0
        dirs = np.zeros_like(g)
        dirs[moving] = -g[moving] / gi[moving, None]
        accepted = False
        while t * gnorm > 1e-300:
            y = _rotate(x, dirs, t * gi)
            my = _merit(y)
            if my <= merit - cfg.armijo_c * t * gn2:
                accepted = True
                break
            t *= cfg.backtrack_factor
        if accepted:
            x_prev, g_prev = x, g
            x, merit = y, my
            continue
        # step lengths underflowed: numerically critical at this resolution
        if no_escape:
            break
        y = _try_escape(x, cfg, max(cfg.grad_tol, gnorm))
        if y is None:
            break
        x, merit = y, _merit(y)
        x_prev = g_prev = None
        escapes += 1

    final = UnitVectorSystem(x)
    if trajectory is not None:
        g = _tangent_gradient(x, shift)
        trajectory.append((iters, frame_potential(final), float(np.linalg.norm(g))))
    return MinimizeReport(
        final_system=final,
        final_potential=frame_potential(final),
        initial_potential=initial,
        iterations=iters,
        saddle_escapes=escapes,
        converged=merit <= tol2,
        gap=math.sqrt(merit),
        grad_norm=gnorm,
        trajectory=trajectory,
    )


def generate_frame(dim, count, cfg=None, restarts=10):
    """Minimize from seeded random starts until one converges.

    Start ``k`` uses seed ``cfg.seed + k``; returns ``(report, seed_used)``
    for the first converged run, or the last run if none converged.
    """
    cfg = cfg or MinimizerConfig()
    for k in range(restarts):
        seed = cfg.seed + k
        report = minimize(UnitVectorSystem.random(dim, count, seed), cfg)
        if report.converged:
            break
    return report, seed


__all__ = [
    "EigenPartition",
    "MinimizeReport",
    "MinimizerConfig",
    "SaddleEscape",
    "apply_escape",
    "eigen_partition",
    "fp_gradient",
    "generate_frame",
    "geodesic_step",
    "minimize",
    "saddle_escape_direction",
]

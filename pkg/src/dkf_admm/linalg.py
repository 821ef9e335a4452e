"""Symmetric-matrix utilities behind the filter.

Half-vectorization (the consensus payload for covariance information),
Cholesky-backed SPD solves, a fixed-point solver for the discrete
algebraic Riccati equation, and Schur-stability checks for the 2x2
per-mode iteration matrices that govern both consensus loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from dkf_admm.exceptions import (
    DimensionError,
    NotPositiveDefinite,
    ObservabilityError,
    RiccatiDivergence,
)


def sym(m) -> np.ndarray:
    """Symmetrize: (m + m^T) / 2. Absorbs floating-point drift."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def vech(m) -> np.ndarray:
    """Half-vectorize a symmetric matrix.

    Lower-triangular entries in column-major order:
    (1,1),(2,1),...,(n,1),(2,2),... For a symmetric matrix this equals
    the row-major upper triangle, which is how it is extracted.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    r, c = _triu_idx(n)
    return m[r, c].copy()


@lru_cache(maxsize=None)
def _triu_idx(n):
    return np.triu_indices(n)


def triangular_dim(length: int) -> int:
    """Source dimension n with n(n+1)/2 == length, or DimensionError."""
    n = int((math.isqrt(8 * length + 1) - 1) // 2)
    if n * (n + 1) // 2 != length:
        raise DimensionError(f"{length} is not a triangular number")
    return n


def unvech(v) -> np.ndarray:
    """Exact inverse of vech."""
    v = np.asarray(v, dtype=float).ravel()
    n = triangular_dim(v.size)
    out = np.zeros((n, n))
    r, c = _triu_idx(n)
    out[r, c] = v
    out[c, r] = v
    return out


def spd_solve(a, b):
    """Solve a x = b for symmetric positive definite a via Cholesky."""
    a = sym(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    b = np.asarray(b, dtype=float)
    y = np.linalg.solve(chol, b)
    return np.linalg.solve(chol.T, y)


def spd_inverse(a) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    return sym(spd_solve(a, np.eye(np.asarray(a).shape[0])))


def observability_matrix(f, h) -> np.ndarray:
    """Stacked [H; HF; ...; HF^(n-1)]."""
    f = np.asarray(f, dtype=float)
    h = np.atleast_2d(np.asarray(h, dtype=float))
    blocks = [h]
    for _ in range(f.shape[0] - 1):
        blocks.append(blocks[-1] @ f)
    return np.vstack(blocks)


def is_observable(f, h) -> bool:
    f = np.asarray(f, dtype=float)
    return np.linalg.matrix_rank(observability_matrix(f, h)) == f.shape[0]


def dare_residual(p, f, h, q, r_bar) -> float:
    """Frobenius norm of P - (F P F' - F P H'(H P H' + R)^-1 H P F' + Q)."""
    s = h @ p @ h.T + r_bar
    nxt = f @ p @ f.T - f @ p @ h.T @ np.linalg.solve(s, h @ p @ f.T) + q
    return float(np.linalg.norm(p - sym(nxt)))


def dare_solve(f, h, q, r_bar, tol=1e-12, max_iter=100_000) -> np.ndarray:
    """Fixed-point iteration for the discrete algebraic Riccati equation.

    Iterates P <- F P F' - F P H'(H P H' + R)^-1 H P F' + Q from P_0 = Q.
    This is exactly the prior-covariance recursion of the centralized
    filter, so the solver doubles as the steady-state oracle. Requires
    (F, H) observable and Q, R symmetric positive definite.
    """
    f = np.asarray(f, dtype=float)
    h = np.atleast_2d(np.asarray(h, dtype=float))
    q = sym(q)
    r_bar = sym(np.atleast_2d(np.asarray(r_bar, dtype=float)))
    if not is_observable(f, h):
        raise ObservabilityError("(F, H) is not observable")
    for m, name in ((q, "Q"), (r_bar, "R")):
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"{name} must be positive definite") from exc
    p = q.copy()
    for _ in range(max_iter):
        s = h @ p @ h.T + r_bar
        p_next = sym(f @ p @ f.T - f @ p @ h.T @ np.linalg.solve(s, h @ p @ f.T) + q)
        if np.linalg.norm(p_next - p) <= 0.1 * tol * max(np.linalg.norm(p_next), 1e-300):
            p = p_next
            if dare_residual(p, f, h, q, r_bar) <= tol * np.linalg.norm(p):
                return p
        p = p_next
    if dare_residual(p, f, h, q, r_bar) <= tol * np.linalg.norm(p):
        return p
    raise RiccatiDivergence(f"no convergence within {max_iter} iterations")


def covariance_mode_matrix(alpha_nu: float, laplacian_eigenvalue: float) -> np.ndarray:
    """Per-mode iteration matrix of the covariance consensus loop.

    [[1 - 2 a l, a l], [1, 0]] for step size a and Laplacian eigenvalue l.
    """
    al = alpha_nu * laplacian_eigenvalue
    return np.array([[1.0 - 2.0 * al, al], [1.0, 0.0]])


def state_mode_matrix(alpha_lambda: float, mu: float, laplacian_eigenvalue: float) -> np.ndarray:
    """Per-mode iteration matrix of the state consensus sub-iterations.

    [[1 - (a + mu) l, mu l], [1, 0]] for dual step a, penalty mu,
    Laplacian eigenvalue l.
    """
    lam = laplacian_eigenvalue
    return np.array([[1.0 - (alpha_lambda + mu) * lam, mu * lam], [1.0, 0.0]])


@dataclass(frozen=True)
class StabilityReport:
    """Exact per-mode spectral radii plus the simpler sufficient bound.

    `is_schur` reflects the exact radii over lambda_2..lambda_max;
    `sufficient_bound_ok` reflects the closed-form inequality, which is
    sufficient but not necessary.
    """

    spectral_radius: float
    is_schur: bool
    per_mode_radii: tuple
    sufficient_bound_ok: bool


def _mode_report(mode_matrix, eigenvalues, sufficient_ok) -> StabilityReport:
    radii = []
    for lam in eigenvalues[1:]:  # skip the nullspace mode lambda_1 = 0
        rho = float(np.max(np.abs(np.linalg.eigvals(mode_matrix(lam)))))
        radii.append((float(lam), rho))
    worst = max(r for _, r in radii)
    return StabilityReport(
        spectral_radius=worst,
        is_schur=worst < 1.0,
        per_mode_radii=tuple(radii),
        sufficient_bound_ok=sufficient_ok,
    )


def covariance_stability(alpha_nu: float, spectrum) -> StabilityReport:
    """Stability of the covariance consensus: bound alpha_nu < 2/(3 lambda_max)."""
    ok = 0.0 < alpha_nu < 2.0 / (3.0 * spectrum.lambda_max)
    return _mode_report(
        lambda lam: covariance_mode_matrix(alpha_nu, lam), spectrum.eigenvalues, ok
    )


def state_stability(alpha_lambda: float, mu: float, spectrum) -> StabilityReport:
    """Stability of the state sub-iterations: bound alpha + 2 mu < 2/lambda_max."""
    ok = (
        alpha_lambda > 0.0
        and mu > 0.0
        and alpha_lambda + 2.0 * mu < 2.0 / spectrum.lambda_max
    )
    return _mode_report(
        lambda lam: state_mode_matrix(alpha_lambda, mu, lam), spectrum.eigenvalues, ok
    )

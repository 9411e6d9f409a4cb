"""Preconditioned conjugate gradient and a Lanczos condition probe."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cholesky import CholeskyFactor
from .errors import NumericalBreakdown
from .sparse import SparseMatrix


@dataclass(frozen=True)
class CgOutcome:
    solution: np.ndarray
    iterations: int
    relative_residual: float
    converged: bool


def pcg_solve(apply_M, precond: CholeskyFactor, rhs, rel_tol, max_iter) -> CgOutcome:
    """Standard PCG with a two-term recurrence.

    Stops when ``||M x - rhs|| / max(||rhs||, 1) <= rel_tol``.  The final
    residual is always recomputed from scratch so the reported value is
    immune to recurrence drift; when the recurrence claims convergence
    but the true residual disagrees, the iteration continues from the
    refreshed residual.
    """
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    rhs = np.asarray(rhs, dtype=np.float64)
    denom = max(float(np.linalg.norm(rhs)), 1.0)
    x = np.zeros_like(rhs)
    r = rhs.copy()
    if np.linalg.norm(r) / denom <= rel_tol:
        return CgOutcome(x, 0, float(np.linalg.norm(r)) / denom, True)

    z = precond.solve(r)
    p = z.copy()
    rz = float(r @ z)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        Mp = apply_M(p)
        if not np.all(np.isfinite(Mp)):
            raise NumericalBreakdown("non-finite value in PCG matrix product")
        pMp = float(p @ Mp)
        if pMp <= 0.0 or not np.isfinite(pMp):
            raise NumericalBreakdown("PCG curvature is not positive")
        alpha = rz / pMp
        x += alpha * p
        r -= alpha * Mp
        if np.linalg.norm(r) / denom <= rel_tol:
            r = rhs - apply_M(x)
            if np.linalg.norm(r) / denom <= rel_tol:
                return CgOutcome(x, iterations, float(np.linalg.norm(r)) / denom, True)
        z = precond.solve(r)
        if not np.all(np.isfinite(z)):
            raise NumericalBreakdown("non-finite value in PCG preconditioner solve")
        rz_new = float(r @ z)
        beta = rz_new / rz
        p = z + beta * p
        rz = rz_new

    final = rhs - apply_M(x)
    rel = float(np.linalg.norm(final)) / denom
    return CgOutcome(x, iterations, rel, rel <= rel_tol)


def generalized_condition_probe(
    M1: SparseMatrix, M2_factor: CholeskyFactor, iters: int = 30
) -> float:
    """Estimate the generalized condition number kappa(M2^{-1/2} M1 M2^{-1/2}).

    Runs Lanczos with full reorthogonalization on the symmetrically
    preconditioned operator; the Ritz estimate is a lower bound of the
    true kappa.
    """
    n = M1.nrows
    if M1.ncols != n or M2_factor.dimension != n:
        raise ValueError("probe dimensions do not match")

    def apply_C(v):
        a = M2_factor.half_solve_transpose(v)
        b = M1.matvec(a)
        return M2_factor.half_solve(b)

    rng = np.random.default_rng(0x5EED)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    Q = [q]
    alphas, betas = [], []
    steps = min(max(int(iters), 1), n)
    for k in range(steps):
        w = apply_C(Q[k])
        if not np.all(np.isfinite(w)):
            raise NumericalBreakdown("non-finite value in Lanczos iteration")
        a = float(Q[k] @ w)
        alphas.append(a)
        w = w - a * Q[k]
        if k > 0:
            w = w - betas[-1] * Q[k - 1]
        # full reorthogonalization keeps the Ritz extremes trustworthy
        for qj in Q:
            w -= (qj @ w) * qj
        b = float(np.linalg.norm(w))
        if b <= 1e-12 * max(abs(a), 1.0):
            break
        betas.append(b)
        Q.append(w / b)

    if len(alphas) == 1:
        return 1.0
    ev = sla.eigh_tridiagonal(
        np.asarray(alphas), np.asarray(betas[: len(alphas) - 1]), eigvals_only=True
    )
    lo = max(float(ev[0]), np.finfo(np.float64).tiny)
    return float(ev[-1]) / lo

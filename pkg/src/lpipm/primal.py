"""Primal barrier engine.

Three modes share one loop:

* ``exact`` factorizes the scaled normal matrix every iteration and takes
  the projected Newton direction (or its infeasible-start variant).
* ``frozen_precond`` keeps a cached factorization as PCG preconditioner
  and refreshes it when the iterate moves a Euclidean distance ``theta``
  from the cache point.
* ``delayed_scaling`` refreshes on the nu-thresholded scaled distance
  instead and evaluates the search direction at the delayed scaling
  point, which keeps the cached factorization useful far longer.

Inexact (PCG) directions are followed by a least-norm feasibility repair
so the step stays in the null space of A (or restores ``-r_p`` exactly on
infeasible-start steps).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cg import CgOutcome, pcg_solve
from .cholesky import CholeskyFactor, cholesky_factorize
from .errors import (
    FactorizationFailed,
    InexactDirectionWarning,
    InteriorityViolation,
    NumericalBreakdown,
)
from .problem import IterateState, StandardLp, convergence_metrics, residuals
from .results import SolveResult, SolveStatus
from .scaling import (
    bound_scaling_diag,
    delayed_scaling_point,
    proximity,
    thresholded_distance,
)
from .sparse import form_normal_matrix
from .trace import TraceRecord

EXACT = "exact"
FROZEN_PRECOND = "frozen_precond"
DELAYED_SCALING = "delayed_scaling"

_FEASIBLE_PATH_TOL = 1e-12


@dataclass
class PrimalConfig:
    mu0: float | None = None  # None: <x0, s0> / n
    tau: float | None = None  # None: 1 / (10 sqrt(n))
    theta: float = 1e-1
    nu: float = 1.0
    step_fraction: float = 0.9995
    cg_tol: float = 1e-10
    cg_max_iter: int = 200
    max_iter: int = 100
    mode: str = EXACT
    tol: float = 1e-10
    adaptive_cg_tol: bool = False  # mu-proportional PCG tolerance schedule

    def __post_init__(self):
        if self.tau is not None and not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.theta <= 0.0 or self.nu <= 0.0 or self.tol <= 0.0:
            raise ValueError("theta, nu, tol must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.mode not in (EXACT, FROZEN_PRECOND, DELAYED_SCALING):
            raise ValueError(f"unknown mode {self.mode!r}")

    def effective_tau(self, n: int) -> float:
        return self.tau if self.tau is not None else 1.0 / (10.0 * math.sqrt(n))


@dataclass
class PreconditionerCache:
    """Snapshot point z and the factorization of its normal matrix."""

    z: np.ndarray
    factor: CholeskyFactor
    factorization_count: int = 0
    cg_iteration_total: int = 0


def refresh_cache(p: StandardLp, z, cache: PreconditionerCache | None = None) -> PreconditionerCache:
    """(Re)factorize the normal matrix at z and verify the factor with one
    random matvec probe against the matrix-free operator."""
    z = np.asarray(z, dtype=np.float64).copy()
    d = bound_scaling_diag(z, p.u)
    M = form_normal_matrix(p.A, d)
    factor = cholesky_factorize(M)
    probe_rng = np.random.default_rng(0xCACE)
    v = probe_rng.standard_normal(p.nrows)
    applied = p.A.matvec(d * d * p.A.rmatvec(v)) + factor.diag_regularization * v
    err = np.linalg.norm(factor.solve(applied) - v) / max(np.linalg.norm(v), 1.0)
    # a stale factor errs at the size of the z-change (>= theta); the
    # roundtrip of a correct factor is kappa-limited, so 1e-8 still
    # separates the two by many orders of magnitude
    if err > 1e-8:
        raise NumericalBreakdown(f"preconditioner probe failed (relative error {err:.2e})")
    if cache is None:
        return PreconditionerCache(z=z, factor=factor, factorization_count=1)
    cache.z = z
    cache.factor = factor
    cache.factorization_count += 1
    return cache


# ---------------------------------------------------------------------------
# direction operations
# ---------------------------------------------------------------------------


def ratio_test(x, dx, fraction: float, u=None) -> float:
    """Largest step (capped at 1) keeping ``x + alpha dx`` strictly inside
    the box: ``alpha = min(1, fraction * min(-x_j / dx_j : dx_j < 0))``,
    plus the mirrored test against finite upper bounds."""
    x = np.asarray(x, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    limit = np.inf
    neg = dx < 0.0
    if neg.any():
        limit = float(np.min(-x[neg] / dx[neg]))
    if u is not None:
        u = np.asarray(u, dtype=np.float64)
        pos = (dx > 0.0) & np.isfinite(u)
        if pos.any():
            limit = min(limit, float(np.min((u[pos] - x[pos]) / dx[pos])))
    return min(1.0, fraction * limit)


def feasibility_repair(p: StandardLp, dx_raw, zeta=None, aat_factor: CholeskyFactor = None) -> np.ndarray:
    """Least-norm correction removing the constraint-space error of an
    inexact step: ``dx - A^T (A A^T)^{-1} zeta`` with ``zeta = A dx`` by
    default."""
    dx_raw = np.asarray(dx_raw, dtype=np.float64)
    if zeta is None:
        zeta = p.A.matvec(dx_raw)
    if aat_factor is None:
        aat_factor = cholesky_factorize(form_normal_matrix(p.A, np.ones(p.ncols)))
    return dx_raw - p.A.rmatvec(aat_factor.solve(zeta))


def primal_direction(
    p: StandardLp,
    x,
    mu: float,
    solver: Callable[[np.ndarray], np.ndarray],
    aat_factor: CholeskyFactor = None,
) -> np.ndarray:
    """Projected Newton direction ``-D P_{AD}((1/mu) D c - D grad)``.

    With an exact factor behind ``solver`` the result already satisfies
    ``A dx = 0``; pass ``aat_factor`` when the solve is inexact so the
    feasibility repair can restore it.
    """
    pr_delta, y, _ = proximity(p, x, mu, solver)
    del pr_delta
    x = np.asarray(x, dtype=np.float64)
    d = bound_scaling_diag(x, p.u)
    grad = 1.0 / x
    if p.has_finite_bounds:
        finite = np.isfinite(p.u)
        grad[finite] -= 1.0 / (p.u[finite] - x[finite])
    v = d * (p.c / mu - grad)
    pvec = v - d * p.A.rmatvec(y / mu)
    dx = -d * pvec
    if aat_factor is not None:
        dx = feasibility_repair(p, dx, aat_factor=aat_factor)
    return dx


@dataclass
class SurrogateDirection:
    dx: np.ndarray
    y: np.ndarray
    s: np.ndarray
    cg: CgOutcome


def surrogate_direction(
    p: StandardLp,
    x,
    w,
    mu: float,
    cache: PreconditionerCache,
    cg_tol: float,
    cg_max_iter: int = 200,
    aat_factor: CholeskyFactor = None,
    y_hint=None,
) -> SurrogateDirection:
    """Search direction evaluated at the delayed scaling point ``w``:
    ``-D_w P_{A D_w} D_x^{-1} D_w v`` with the inner normal solve done by
    PCG preconditioned with the cached factorization, followed by the
    feasibility repair.

    When a dual estimate ``y_hint`` with small ``A^T y + s - c`` is
    available, the ``(1/mu) A^T y`` part of ``v`` is split off and solved
    for exactly, so the PCG right-hand side stays bounded as mu shrinks
    (otherwise cancellation costs roughly ``log10(1/mu)`` digits).

    Non-convergence of PCG raises an :class:`InexactDirectionWarning`
    (carrying the achieved residual) but still returns the direction; the
    caller decides whether to refresh the cache.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    d_x = bound_scaling_diag(x, p.u)
    d_w = bound_scaling_diag(w, p.u)
    grad = 1.0 / x
    if p.has_finite_bounds:
        finite = np.isfinite(p.u)
        grad[finite] -= 1.0 / (p.u[finite] - x[finite])
    if y_hint is None:
        v = d_x * (p.c / mu - grad)
        y_base = np.zeros(p.nrows)
    else:
        v = d_x * ((p.c - p.A.rmatvec(y_hint)) / mu - grad)
        y_base = np.asarray(y_hint, dtype=np.float64)
    g = (d_w / d_x) * v
    rhs = p.A.matvec(d_w * g)
    dw_sq = d_w * d_w

    def apply_Mw(vec):
        return p.A.matvec(dw_sq * p.A.rmatvec(vec))

    outcome = pcg_solve(apply_Mw, cache.factor, rhs, cg_tol, cg_max_iter)
    cache.cg_iteration_total += outcome.iterations
    if not outcome.converged:
        warnings.warn(
            InexactDirectionWarning(
                f"surrogate PCG stopped at residual {outcome.relative_residual:.2e}",
                residual=outcome.relative_residual,
            ),
            stacklevel=2,
        )
    t = outcome.solution
    dx_raw = -d_w * g + dw_sq * p.A.rmatvec(t)
    dx = feasibility_repair(p, dx_raw, aat_factor=aat_factor)
    y = y_base + mu * t
    s = p.c - p.A.rmatvec(y)
    return SurrogateDirection(dx=dx, y=y, s=s, cg=outcome)


def infeasible_primal_step(
    p: StandardLp,
    st: IterateState,
    solver: Callable[[np.ndarray], np.ndarray],
    stabilized: bool = True,
):
    """Infeasible-start Newton step recovered from the normal equations.

    The stabilized form solves for ``dy / mu`` (the complementarity term
    divided by mu stays bounded near the central path); the direct form
    exists for the algebraic-equivalence check only.
    """
    x = np.asarray(st.x, dtype=np.float64)
    mu = st.mu
    d = bound_scaling_diag(x, p.u)
    d_sq = d * d
    r_p, r_d, r_mu = residuals(p, st)
    if stabilized:
        rhs = -r_p + p.A.matvec(d_sq * (r_mu - r_d)) / mu
        dy = mu * solver(rhs)
    else:
        rhs = -mu * r_p + p.A.matvec(d_sq * (r_mu - r_d))
        dy = solver(rhs)
    ds = -r_d - p.A.rmatvec(dy)
    dx = -(d_sq / mu) * (r_mu + ds)
    return dx, dy, ds


# ---------------------------------------------------------------------------
# the engine loop
# ---------------------------------------------------------------------------


def complementarity_mu(p: StandardLp, st: IterateState) -> float:
    total = float(st.x @ st.s)
    count = p.ncols
    if st.w is not None and st.v is not None:
        total += float(st.w @ st.v)
        count += int(np.isfinite(p.u).sum())
    return total / max(count, 1)


def _split_composite_dual(p: StandardLp, x, s_composite, mu):
    """Split c - A^T y into s >= 0 and an upper-bound multiplier v >= 0.

    The positive-part split is the gap-minimizing choice of v subject to
    both signs, and it converges to the exact active-bound multipliers
    (v = mu/(u-x) would keep oscillating with the barrier schedule)."""
    del mu
    if not p.has_finite_bounds:
        return s_composite, None, None
    finite = np.isfinite(p.u)
    v = np.zeros_like(s_composite)
    v[finite] = np.maximum(-s_composite[finite], 0.0)
    w = np.zeros_like(s_composite)
    w[finite] = p.u[finite] - x[finite]
    return s_composite + v, v, w


def primal_solve(
    p: StandardLp,
    cfg: PrimalConfig,
    start: IterateState,
    trace_log=None,
    cache: PreconditionerCache | None = None,
    collect_iterates: bool = False,
    phase: str = "primal",
    iter_offset: int = 0,
) -> SolveResult:
    """Run the primal barrier iteration in the configured mode."""
    t_start = time.perf_counter()
    A = p.A
    n = p.ncols
    tau = cfg.effective_tau(n)
    st = start.copy()
    if np.any(st.x <= 0.0):
        raise ValueError("starting point must satisfy x > 0")
    if p.has_finite_bounds and np.any(st.x[np.isfinite(p.u)] >= p.u[np.isfinite(p.u)]):
        raise ValueError("starting point must satisfy x < u")

    mu = cfg.mu0 if cfg.mu0 is not None else complementarity_mu(p, st)
    if mu <= 0.0:
        mu = 1.0
    st.mu = mu
    if p.has_finite_bounds and st.w is None:
        # interpret the incoming reduced cost as composite and split it
        st.s, st.v, st.w = _split_composite_dual(p, st.x, st.s, mu)

    norm_b = float(np.linalg.norm(p.b))
    norm_c = float(np.linalg.norm(p.c))
    aat_factor_holder = {}

    def get_aat() -> CholeskyFactor:
        if "f" not in aat_factor_holder:
            aat_factor_holder["f"] = cholesky_factorize(
                form_normal_matrix(A, np.ones(n))
            )
        return aat_factor_holder["f"]

    factorizations = 0
    cg_total = 0
    iterations = 0
    status = SolveStatus.ITERATION_LIMIT
    message = ""
    iterates = []
    e_p = e_d = e_g = float("inf")

    try:
        for k in range(1, cfg.max_iter + 1):
            e_p, e_d, e_g = convergence_metrics(p, st)
            if max(e_p, e_d, e_g) <= cfg.tol:
                status = SolveStatus.OPTIMAL
                break

            t0 = time.perf_counter()
            x = st.x
            d = bound_scaling_diag(x, p.u)
            r_p, r_d, r_mu = residuals(p, st)
            feasible = (
                np.linalg.norm(r_p) <= _FEASIBLE_PATH_TOL * (1.0 + norm_b)
                and np.linalg.norm(r_d) <= _FEASIBLE_PATH_TOL * (1.0 + norm_c)
            )
            cg_tol_k = cfg.cg_tol
            if cfg.adaptive_cg_tol:
                cg_tol_k = min(cfg.cg_tol, max(mu * 1e-2, 1e-14))

            factorized = False
            factor = None
            if cfg.mode == EXACT:
                factor = cholesky_factorize(form_normal_matrix(A, d))
                factorizations += 1
                factorized = True
            else:
                needs = cache is None
                if not needs:
                    if cfg.mode == FROZEN_PRECOND:
                        needs = float(np.linalg.norm(x - cache.z)) >= cfg.theta
                    else:
                        needs = thresholded_distance(x, cache.z, x, cfg.nu) >= cfg.theta
                if needs:
                    cache = refresh_cache(p, x, cache)
                    factorizations += 1
                    factorized = True
            t_factor = time.perf_counter() - t0

            t1 = time.perf_counter()
            d_sq = d * d

            def apply_Md(vec, d_sq=d_sq):
                return A.matvec(d_sq * A.rmatvec(vec))

            cg_iters = 0
            delta = None
            if feasible:
                if cfg.mode == DELAYED_SCALING:
                    w_point = delayed_scaling_point(x, cache.z, cfg.nu)
                    res = _surrogate_with_refresh(
                        p, x, w_point, mu, cache, cg_tol_k, cfg, get_aat(), st.y
                    )
                    if res.refreshed:
                        factorizations += 1
                        factorized = True
                    cg_iters += res.direction.cg.iterations
                    dx = res.direction.dx
                    y_new = res.direction.y
                    s_comp = res.direction.s
                else:
                    grad = 1.0 / x
                    if p.has_finite_bounds:
                        fin = np.isfinite(p.u)
                        grad[fin] -= 1.0 / (p.u[fin] - x[fin])
                    # r_d is at noise level here, so (c - A^T y)/mu stays
                    # bounded while c/mu does not; solve for the correction
                    # to y/mu to dodge the 1/mu cancellation
                    s_est = p.c - A.rmatvec(st.y)
                    v_vec = d * (s_est / mu - grad)
                    rhs = A.matvec(d * v_vec)
                    if cfg.mode == EXACT:
                        t_sol = factor.solve(rhs)
                    else:
                        outcome = pcg_solve(
                            apply_Md, cache.factor, rhs, cg_tol_k, cfg.cg_max_iter
                        )
                        cache.cg_iteration_total += outcome.iterations
                        cg_iters += outcome.iterations
                        if not outcome.converged and not _cache_is_fresh(p, cache, x, cfg):
                            cache = refresh_cache(p, x, cache)
                            factorizations += 1
                            factorized = True
                            outcome = pcg_solve(
                                apply_Md, cache.factor, rhs, cg_tol_k, cfg.cg_max_iter
                            )
                            cg_iters += outcome.iterations
                        t_sol = outcome.solution
                    pvec = v_vec - d * A.rmatvec(t_sol)
                    delta = float(np.linalg.norm(pvec))
                    dx = -d * pvec
                    if cfg.mode != EXACT:
                        dx = feasibility_repair(p, dx, aat_factor=get_aat())
                    y_new = st.y + mu * t_sol
                    s_comp = p.c - A.rmatvec(y_new)
                alpha = ratio_test(x, dx, cfg.step_fraction, p.u)
                st.x = x + alpha * dx
                st.y = y_new
                st.s, st.v, st.w = _split_composite_dual(p, st.x, s_comp, mu)
            else:
                if cfg.mode == EXACT:
                    solver = factor.solve
                else:
                    solver = _PcgSolver(
                        apply_Md, cache, cg_tol_k, cfg.cg_max_iter
                    )
                dx, dy, ds_comp = infeasible_primal_step(p, st, solver)
                if cfg.mode != EXACT:
                    cg_iters += solver.last_iterations
                    if not solver.last_converged and not _cache_is_fresh(p, cache, x, cfg):
                        # refresh once; past that the achieved residual is
                        # the attainable floor and the repair keeps the
                        # step usable
                        cache = refresh_cache(p, x, cache)
                        factorizations += 1
                        factorized = True
                        dx, dy, ds_comp = infeasible_primal_step(p, st, solver)
                        cg_iters += solver.last_iterations
                    zeta = A.matvec(dx) + r_p
                    dx = feasibility_repair(p, dx, zeta=zeta, aat_factor=get_aat())
                if cfg.mode == EXACT:
                    pr = proximity(p, x, mu, factor.solve, d=d)
                    delta = pr.delta
                alpha = ratio_test(x, dx, cfg.step_fraction, p.u)
                st.x = x + alpha * dx
                st.y = st.y + alpha * dy
                if p.has_finite_bounds:
                    fin = np.isfinite(p.u)
                    gap = np.where(fin, p.u - x, 1.0)
                    r_v = (st.v if st.v is not None else np.zeros(n)) - np.where(
                        fin, mu / gap, 0.0
                    )
                    dv = -r_v + np.where(fin, mu / (gap * gap), 0.0) * dx
                    dv[~fin] = 0.0
                    st.v = (st.v if st.v is not None else np.zeros(n)) + alpha * dv
                    st.s = st.s + alpha * (ds_comp + dv)
                    st.w = np.where(fin, p.u - st.x, 0.0)
                else:
                    st.s = st.s + alpha * ds_comp

            if np.any(st.x <= 0.0):
                raise NumericalBreakdown("iterate left the positive orthant")
            if p.has_finite_bounds:
                fin = np.isfinite(p.u)
                if np.any(st.x[fin] >= p.u[fin]):
                    raise NumericalBreakdown("iterate crossed an upper bound")

            step = st.x - x
            step_norm = float(np.linalg.norm(step))
            thresh_step = thresholded_distance(st.x, x, st.x, 1.0)
            mu_used = mu
            mu = (1.0 - tau) * mu
            st.mu = mu
            cg_total += cg_iters
            iterations = k
            t_solve = time.perf_counter() - t1
            if trace_log is not None:
                trace_log.add(
                    TraceRecord(
                        iter=k + iter_offset,
                        phase=phase,
                        mu=mu_used,
                        e_p=e_p,
                        e_d=e_d,
                        e_g=e_g,
                        step_norm=step_norm,
                        thresholded_step=thresh_step,
                        delta=delta,
                        alpha=alpha,
                        factorized=factorized,
                        cg_iters=cg_iters,
                        wall_factor_ms=t_factor * 1e3,
                        wall_solve_ms=t_solve * 1e3,
                        wall_other_ms=0.0,
                    )
                )
            if collect_iterates:
                iterates.append(
                    IterateState(
                        x=st.x.copy(), y=st.y.copy(), s=st.s.copy(), mu=mu_used,
                    )
                )
        else:
            e_p, e_d, e_g = convergence_metrics(p, st)
            if max(e_p, e_d, e_g) <= cfg.tol:
                status = SolveStatus.OPTIMAL
    except (FactorizationFailed, NumericalBreakdown, InteriorityViolation) as exc:
        status = SolveStatus.NUMERICAL_FAILURE
        message = str(exc)
        e_p, e_d, e_g = convergence_metrics(p, st)

    return SolveResult(
        status=status,
        x=st.x,
        y=st.y,
        s=st.s,
        objective=p.objective_value(st.x),
        e_p=e_p,
        e_d=e_d,
        e_g=e_g,
        iterations=iterations,
        factorizations=factorizations,
        cg_iterations=cg_total,
        trace=list(trace_log) if trace_log is not None else [],
        wall_s=time.perf_counter() - t_start,
        mu=st.mu,
        iterates=iterates,
        message=message,
    )


@dataclass
class _SurrogateOutcome:
    direction: SurrogateDirection
    refreshed: bool


def _cache_is_fresh(p, cache, x, cfg) -> bool:
    """A refresh can only help when the cache point has actually moved;
    otherwise a PCG miss means the attainable residual floor was hit."""
    return thresholded_distance(x, cache.z, x, cfg.nu) <= 0.1 * cfg.theta


def _surrogate_with_refresh(p, x, w_point, mu, cache, cg_tol, cfg, aat_factor, y_hint):
    """Delayed-scaling direction; on PCG non-convergence refresh the cache
    at the current point (the delayed point collapses to x) and retry."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InexactDirectionWarning)
        res = surrogate_direction(
            p, x, w_point, mu, cache, cg_tol, cfg.cg_max_iter, aat_factor, y_hint
        )
    if res.cg.converged or _cache_is_fresh(p, cache, x, cfg):
        return _SurrogateOutcome(res, False)
    refresh_cache(p, x, cache)
    with warnings.catch_warnings():
        # after a fresh factorization the achieved residual is the
        # attainable floor; accept the direction, the repair keeps it safe
        warnings.simplefilter("ignore", InexactDirectionWarning)
        res = surrogate_direction(
            p, x, x.copy(), mu, cache, cg_tol, cfg.cg_max_iter, aat_factor, y_hint
        )
    return _SurrogateOutcome(res, True)


class _PcgSolver:
    """Callable normal-equation solver backed by PCG; remembers the
    iteration count and convergence of the last solve."""

    def __init__(self, apply_M, cache, tol, max_iter):
        self.apply_M = apply_M
        self.cache = cache
        self.tol = tol
        self.max_iter = max_iter
        self.last_iterations = 0
        self.last_converged = True

    def __call__(self, rhs):
        outcome = pcg_solve(self.apply_M, self.cache.factor, rhs, self.tol, self.max_iter)
        self.cache.cg_iteration_total += outcome.iterations
        self.last_iterations = outcome.iterations
        self.last_converged = outcome.converged
        return outcome.solution

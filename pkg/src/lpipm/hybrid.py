"""Hybrid controller: primal-dual until the iterates stabilize, then the
delayed-scaling primal engine reusing cached factorizations.

The switch fires once the thresholded step distance drops below
``dist_threshold`` while the measured factorization/substitution time
ratio exceeds ``time_ratio_threshold`` (both from the switch policy).
Timing is wall-clock and therefore nondeterministic; tests inject a
fixed ratio, which makes the full iterate sequence reproducible.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

from .mehrotra import PdConfig, PdIterationInfo, pd_solve
from .primal import DELAYED_SCALING, PrimalConfig, primal_solve, refresh_cache
from .problem import StandardLp
from .results import SolveResult, SolveStatus
from .scaling import thresholded_distance


@dataclass
class SwitchPolicy:
    dist_threshold: float = 1e-1
    time_ratio_threshold: float = 30.0
    nu: float = 1.0
    min_pd_iters: int = 3

    def __post_init__(self):
        if min(self.dist_threshold, self.time_ratio_threshold, self.nu) <= 0:
            raise ValueError("switch policy thresholds must be positive")
        if self.min_pd_iters <= 0:
            raise ValueError("min_pd_iters must be positive")


@dataclass(frozen=True)
class SwitchDecision:
    switch: bool
    distance: float
    time_ratio: float
    reason: str


def should_switch(info: PdIterationInfo, policy: SwitchPolicy) -> SwitchDecision:
    """Evaluate the switch rule on the most recent primal-dual iteration."""
    distance = thresholded_distance(info.state.x, info.x_prev, info.state.x, policy.nu)
    ratio = info.time_ratio
    if info.k < policy.min_pd_iters:
        return SwitchDecision(False, distance, ratio, "warming up")
    if distance > policy.dist_threshold:
        return SwitchDecision(
            False, distance, ratio,
            f"step distance {distance:.3e} above {policy.dist_threshold:.1e}",
        )
    if ratio <= policy.time_ratio_threshold:
        return SwitchDecision(
            False, distance, ratio,
            f"time ratio {ratio:.2f} below {policy.time_ratio_threshold:g}",
        )
    return SwitchDecision(
        True, distance, ratio,
        f"distance {distance:.3e} and time ratio {ratio:.2f} both past thresholds",
    )


def hybrid_solve(
    p: StandardLp,
    pd_cfg: PdConfig,
    primal_cfg: PrimalConfig,
    policy: SwitchPolicy,
    trace_log=None,
    time_ratio_override: float | None = None,
    collect_iterates: bool = False,
) -> SolveResult:
    """Phase 1 primal-dual with per-iteration switch checks; on switch,
    hand (x, y, s, mu = <x,s>/n) to the delayed-scaling primal engine
    seeded with a fresh factorization at the last primal-dual iterate.
    A primal-phase numerical failure falls back to resuming primal-dual
    once."""
    t_start = time.perf_counter()
    last_decision: dict = {}
    switch_state: dict = {}

    def hook(info: PdIterationInfo) -> bool:
        decision = should_switch(info, policy)
        last_decision["d"] = decision
        last_decision["k"] = info.k
        if decision.switch:
            switch_state["state"] = info.state.copy()
        return decision.switch

    phase1 = pd_solve(
        p,
        pd_cfg,
        trace_log=trace_log,
        hook=hook,
        collect_iterates=collect_iterates,
        time_ratio_override=time_ratio_override,
    )
    phase_stats = {
        "pd_iterations": phase1.iterations,
        "pd_factorizations": phase1.factorizations,
        "pd_wall_s": phase1.wall_s,
        "primal_iterations": 0,
        "primal_factorizations": 0,
        "primal_wall_s": 0.0,
        "switch_iteration": None,
        "fallback": False,
    }
    if phase1.status != SolveStatus.HALTED:
        phase1.phase_stats = phase_stats
        phase1.wall_s = time.perf_counter() - t_start
        return phase1

    decision = last_decision["d"]
    phase_stats["switch_iteration"] = last_decision["k"]
    phase_stats["switch_distance"] = decision.distance
    phase_stats["switch_time_ratio"] = decision.time_ratio

    start = switch_state["state"]
    cache = refresh_cache(p, start.x)  # the seed factorization, counted below
    cfg2 = dataclasses.replace(primal_cfg, mode=DELAYED_SCALING, nu=policy.nu)
    phase2 = primal_solve(
        p,
        cfg2,
        start,
        trace_log=trace_log,
        cache=cache,
        collect_iterates=collect_iterates,
        iter_offset=phase1.iterations,
    )
    phase_stats["primal_iterations"] = phase2.iterations
    phase_stats["primal_factorizations"] = phase2.factorizations + 1
    phase_stats["primal_wall_s"] = phase2.wall_s

    if phase2.status == SolveStatus.NUMERICAL_FAILURE:
        phase_stats["fallback"] = True
        final_cg = phase2.cg_iterations
        failed_iters = phase2.iterations
        resume_cfg = dataclasses.replace(
            pd_cfg, max_iter=max(pd_cfg.max_iter - phase1.iterations, 1)
        )
        phase2 = pd_solve(
            p,
            resume_cfg,
            trace_log=trace_log,
            start=start,
            collect_iterates=collect_iterates,
            time_ratio_override=time_ratio_override,
            iter_offset=phase1.iterations + failed_iters,
        )
        phase_stats["primal_factorizations"] += phase2.factorizations
    else:
        final_cg = phase2.cg_iterations

    result = SolveResult(
        status=phase2.status,
        x=phase2.x,
        y=phase2.y,
        s=phase2.s,
        objective=phase2.objective,
        e_p=phase2.e_p,
        e_d=phase2.e_d,
        e_g=phase2.e_g,
        iterations=phase1.iterations + phase2.iterations,
        factorizations=phase1.factorizations + 1 + phase2.factorizations,
        cg_iterations=final_cg,
        trace=list(trace_log) if trace_log is not None else [],
        wall_s=time.perf_counter() - t_start,
        mu=phase2.mu,
        phase_stats=phase_stats,
        iterates=(phase1.iterates + phase2.iterates) if collect_iterates else [],
        message=phase2.message,
    )
    return result

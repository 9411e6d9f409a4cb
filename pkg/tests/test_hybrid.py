import numpy as np
import pytest

from lpipm import (
    IterateState,
    PdConfig,
    PrimalConfig,
    SolveStatus,
    SwitchPolicy,
    TraceLog,
    generate_instance,
    hybrid_solve,
    parse_mps,
    pd_solve,
    should_switch,
    to_standard_form,
)
from lpipm.mehrotra import PdIterationInfo


def _info(k, dist_scale, ratio):
    """Build an iteration snapshot whose thresholded step distance is
    exactly dist_scale (x has all entries above the nu=1 threshold)."""
    x = np.full(4, 2.0)
    x_prev = x.copy()
    x_prev[0] = x[0] - 2.0 * dist_scale  # |dx|/x = dist_scale
    state = IterateState(x=x, y=np.zeros(1), s=np.ones(4), mu=1e-6)
    return PdIterationInfo(
        k=k, x_prev=x_prev, state=state, time_ratio=ratio,
        e_p=0.0, e_d=0.0, e_g=1e-6,
    )


class TestShouldSwitch:
    def test_both_gates_pass(self):
        d = should_switch(_info(5, 0.05, 40.0), SwitchPolicy())
        assert d.switch
        assert d.distance == pytest.approx(0.05)
        assert d.time_ratio == 40.0

    def test_ratio_gate_fails(self):
        d = should_switch(_info(5, 0.05, 10.0), SwitchPolicy())
        assert not d.switch
        assert "ratio" in d.reason

    def test_distance_gate_fails(self):
        d = should_switch(_info(5, 0.5, 100.0), SwitchPolicy())
        assert not d.switch
        assert "distance" in d.reason

    def test_min_iters_gate(self):
        d = should_switch(_info(2, 0.01, 100.0), SwitchPolicy(min_pd_iters=3))
        assert not d.switch


def _planted(m=40, n=100, seed=11, **kw):
    inst = generate_instance(m, n, seed=seed, **kw)
    std = to_standard_form(parse_mps(inst.mps_text))
    return inst, std


class TestHybridSolve:
    def test_disabled_switch_identical_to_pd(self):
        _, std = _planted()
        trace_h = TraceLog()
        res_h = hybrid_solve(
            std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
            SwitchPolicy(time_ratio_threshold=1e9),
            trace_log=trace_h, time_ratio_override=1.0,
        )
        trace_pd = TraceLog()
        res_pd = pd_solve(std, PdConfig(), trace_log=trace_pd)
        assert res_h.status == res_pd.status == SolveStatus.OPTIMAL
        assert res_h.iterations == res_pd.iterations
        assert np.array_equal(res_h.x, res_pd.x)
        assert all(r.phase == "pd" for r in trace_h)
        assert res_h.phase_stats["switch_iteration"] is None

    def test_switch_fires_and_saves_factorizations(self):
        inst, std = _planted()
        trace = TraceLog()
        res = hybrid_solve(
            std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
            SwitchPolicy(), trace_log=trace, time_ratio_override=100.0,
        )
        assert res.status == SolveStatus.OPTIMAL
        stats = res.phase_stats
        assert stats["switch_iteration"] is not None
        primal_rows = [r for r in trace if r.phase == "primal"]
        assert len(primal_rows) == stats["primal_iterations"]
        # post-switch factorizations strictly below post-switch iterations
        assert stats["primal_factorizations"] < stats["primal_iterations"]
        ref = inst.certificate.objective
        assert abs(res.objective - ref) <= 1e-8 * (1 + abs(ref))

    def test_phase_rows_only_factorize_on_refresh(self):
        _, std = _planted(seed=12)
        trace = TraceLog()
        res = hybrid_solve(
            std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
            SwitchPolicy(), trace_log=trace, time_ratio_override=100.0,
        )
        assert res.status == SolveStatus.OPTIMAL
        primal_rows = [r for r in trace if r.phase == "primal"]
        flagged = sum(1 for r in primal_rows if r.factorized)
        # seed factorization + flagged refreshes = primal-phase count
        assert 1 + flagged == res.phase_stats["primal_factorizations"]

    def test_termination_contract_matches_engines(self):
        _, std = _planted(seed=13)
        res = hybrid_solve(
            std, PdConfig(tol=1e-10), PrimalConfig(tau=0.28, cg_tol=1e-12, tol=1e-10),
            SwitchPolicy(), time_ratio_override=100.0,
        )
        assert res.status == SolveStatus.OPTIMAL
        assert res.max_metric <= 1e-10

    def test_deterministic_with_injected_ratio(self):
        _, std = _planted(seed=14)
        runs = []
        for _ in range(2):
            trace = TraceLog()
            res = hybrid_solve(
                std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
                SwitchPolicy(), trace_log=trace, time_ratio_override=50.0,
                collect_iterates=True,
            )
            runs.append((res, [it.x for it in res.iterates]))
        (r1, xs1), (r2, xs2) = runs
        assert r1.iterations == r2.iterations
        assert len(xs1) == len(xs2)
        for a, b in zip(xs1, xs2):
            assert np.array_equal(a, b)  # bitwise reproducible

    def test_early_return_when_start_optimal(self):
        _, std = _planted(seed=15)
        res = hybrid_solve(
            std, PdConfig(tol=1e3), PrimalConfig(), SwitchPolicy(),
            time_ratio_override=100.0,
        )
        assert res.status == SolveStatus.OPTIMAL
        assert res.iterations == 0
        assert res.phase_stats["switch_iteration"] is None

    def test_fallback_resumes_pd_once(self, monkeypatch):
        import lpipm.hybrid as hy

        _, std = _planted(seed=17)
        real_primal = hy.primal_solve

        def failing_primal(p, cfg, start, **kw):
            res = real_primal(p, cfg, start, **kw)
            res.status = SolveStatus.NUMERICAL_FAILURE
            res.iterations = 0
            return res

        monkeypatch.setattr(hy, "primal_solve", failing_primal)
        res = hy.hybrid_solve(
            std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
            SwitchPolicy(), time_ratio_override=100.0,
        )
        assert res.phase_stats["fallback"] is True
        assert res.status == SolveStatus.OPTIMAL  # pd finishes the job
        assert res.max_metric <= 1e-10

    def test_exit_code_mapping(self):
        from lpipm.results import SolveResult

        def dummy(status):
            return SolveResult(
                status=status, x=np.zeros(1), y=np.zeros(1), s=np.zeros(1),
                objective=0.0, e_p=0.0, e_d=0.0, e_g=0.0, iterations=0,
                factorizations=0, cg_iterations=0,
            )

        assert dummy(SolveStatus.OPTIMAL).exit_code() == 0
        assert dummy(SolveStatus.ITERATION_LIMIT).exit_code() == 2
        assert dummy(SolveStatus.NUMERICAL_FAILURE).exit_code() == 3

    def test_total_iteration_count_and_trace_monotone(self):
        _, std = _planted(seed=16)
        trace = TraceLog()
        res = hybrid_solve(
            std, PdConfig(), PrimalConfig(tau=0.28, cg_tol=1e-12),
            SwitchPolicy(), trace_log=trace, time_ratio_override=100.0,
        )
        iters = [r.iter for r in trace]
        assert iters == sorted(iters)
        assert len(set(iters)) == len(iters)
        assert res.iterations == len(iters)

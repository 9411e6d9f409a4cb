import numpy as np
import pytest

from lpipm import (
    PdConfig,
    SolveStatus,
    generate_instance,
    parse_certificate,
    parse_mps,
    pd_solve,
    to_standard_form,
)


class TestGenerator:
    def test_planted_objective_consistent(self):
        inst = generate_instance(1, 2, seed=0)
        assert inst.certificate.objective == pytest.approx(
            float(inst.c @ inst.x_star), rel=1e-15
        )
        assert np.allclose(inst.A @ inst.x_star, inst.b)

    def test_strict_complementarity_nondegenerate(self):
        inst = generate_instance(10, 25, seed=1)
        cert = inst.certificate
        assert len(cert.basis) == 10
        assert set(cert.basis) | set(cert.dual_support) == set(range(25))
        assert not set(cert.basis) & set(cert.dual_support)
        assert np.all(inst.x_star[list(cert.basis)] > 0)
        assert np.all(inst.s_star[list(cert.dual_support)] > 0)

    def test_degenerate_flag_shrinks_basis(self):
        inst = generate_instance(10, 25, seed=1, degenerate=True)
        assert len(inst.certificate.basis) < 10

    def test_same_seed_byte_identical(self):
        a = generate_instance(6, 15, seed=42)
        b = generate_instance(6, 15, seed=42)
        assert a.mps_text == b.mps_text
        assert a.certificate_text == b.certificate_text

    def test_different_seed_differs(self):
        a = generate_instance(6, 15, seed=1)
        b = generate_instance(6, 15, seed=2)
        assert a.mps_text != b.mps_text

    def test_certificate_round_trip(self):
        inst = generate_instance(5, 12, seed=7, degenerate=True)
        cert = parse_certificate(inst.certificate_text)
        assert cert == inst.certificate

    def test_mps_round_trip_is_solvable(self):
        inst = generate_instance(8, 20, seed=9)
        std = to_standard_form(parse_mps(inst.mps_text))
        assert std.nrows == 8 and std.ncols == 20
        # the parsed data reproduces the generated matrices exactly
        assert np.array_equal(std.A.to_dense(), inst.A)
        assert np.array_equal(std.b, inst.b)
        assert np.array_equal(std.c, inst.c)
        res = pd_solve(std, PdConfig())
        assert res.status == SolveStatus.OPTIMAL
        ref = inst.certificate.objective
        assert abs(res.objective - ref) <= 1e-8 * (1 + abs(ref))

    def test_requires_m_below_n(self):
        with pytest.raises(ValueError):
            generate_instance(5, 5, seed=0)

    def test_dense_and_spread_options(self):
        inst = generate_instance(10, 24, seed=3, density=1.0, spread=3.0)
        assert np.count_nonzero(inst.A) == 240  # fully dense
        basics = inst.x_star[inst.x_star > 0]
        assert basics.max() / basics.min() > 10.0

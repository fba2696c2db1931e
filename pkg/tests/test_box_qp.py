import numpy as np
import pytest

from projqp.activeset_qp import Infeasible, gi_solve, verify_certificate, InfeasibilityCertificate
from projqp.bench import _random_box_instance, box_faces_qp
from projqp.box_qp import BoxQp, box_infeasibility_system, box_step_direction, solve_box_qp


class TestStepDirection:
    def test_interior_point_full_direction(self):
        d = box_step_direction(np.array([0.5, 0.5]), np.array([1.0, -2.0]), np.zeros(2), np.ones(2))
        np.testing.assert_allclose(d, [1.0, -2.0])

    def test_bound_moving_away_is_free(self):
        # at the upper bound in coordinate 0 but c points back inside
        d = box_step_direction(np.array([1.0, 0.5]), np.array([-1.0, 1.0]), np.zeros(2), np.ones(2))
        np.testing.assert_allclose(d, [-1.0, 1.0])

    def test_normal_cone_blocks(self):
        d = box_step_direction(np.ones(2), np.array([1.0, 1.0]), np.zeros(2), np.ones(2))
        np.testing.assert_allclose(d, [0.0, 0.0])

    def test_zero_component_stays_zero(self):
        d = box_step_direction(np.array([0.5]), np.array([0.0]), np.zeros(1), np.ones(1))
        np.testing.assert_allclose(d, [0.0])


class TestSolve:
    def test_one_pass_example(self):
        p = BoxQp(np.array([1.0, 0.5]), np.zeros(2), np.ones(2), np.array([-1.0, 1.0]), 0.5)
        res = solve_box_qp(p)
        assert res.feasible
        np.testing.assert_allclose(res.x, [0.5, 1.0], atol=1e-12)
        # first y equals x* + 0.5 d
        np.testing.assert_allclose(res.trace[1][1], [0.5, 1.0], atol=1e-12)
        direct = gi_solve(box_faces_qp(p))
        np.testing.assert_allclose(res.x, direct.x, atol=1e-10)

    def test_infeasible_beyond_box_maximum(self):
        p = BoxQp(np.ones(2), np.zeros(2), np.ones(2), np.array([1.0, 1.0]), 3.0)
        res = solve_box_qp(p)
        assert not res.feasible
        # vertex enumeration: max of c^T x over the box is 2 < 3
        corners = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        assert float(np.max(corners @ p.c_p)) == pytest.approx(2.0)
        direct = gi_solve(box_faces_qp(p))
        assert isinstance(direct, Infeasible)
        c_mat, b_vec, lam = box_infeasibility_system(p, res.trace[-1][0])
        cert = InfeasibilityCertificate(tuple(range(c_mat.shape[1])), lam)
        assert verify_certificate(cert, c_mat, b_vec)

    def test_unbounded_direction(self):
        x_star = np.array([0.25, 0.5])
        p = BoxQp(x_star, np.zeros(2), np.array([np.inf, 1.0]), np.array([1.0, 0.0]), x_star[0] + 5.0)
        res = solve_box_qp(p)
        assert res.feasible
        np.testing.assert_allclose(res.x, [x_star[0] + 5.0, 0.5], atol=1e-12)
        direct = gi_solve(box_faces_qp(p))
        np.testing.assert_allclose(res.x, direct.x, atol=1e-10)

    def test_monotone_and_bounded_passes(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            p = _random_box_instance(rng)
            res = solve_box_qp(p)
            assert len(res.trace) <= p.x_star.shape[0] + 2
            vals = [float(p.c_p @ xt) for xt, _ in res.trace]
            for a, b in zip(vals, vals[1:]):
                assert b > a - 1e-12
                assert b <= p.b_hat + 1e-9 * (1.0 + abs(p.b_hat))

    def test_x_star_outside_box_rejected(self):
        with pytest.raises(ValueError):
            BoxQp(np.array([2.0, 0.0]), np.zeros(2), np.ones(2), np.array([1.0, 0.0]), 5.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_equivalence_with_engine(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(40):
            p = _random_box_instance(rng)
            res = solve_box_qp(p)
            direct = gi_solve(box_faces_qp(p))
            if res.feasible:
                assert not isinstance(direct, Infeasible)
                np.testing.assert_allclose(res.x, direct.x, atol=1e-8)
            else:
                assert isinstance(direct, Infeasible)

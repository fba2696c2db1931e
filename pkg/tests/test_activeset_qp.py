import math

import numpy as np
import pytest

from projqp.activeset_qp import (
    Advanced,
    AplusOptions,
    GiOptions,
    Infeasible,
    InfeasibilityCertificate,
    IterationLimitError,
    PreconditionViolated,
    QpProblem,
    STuple,
    cone_project_reduced,
    degenerate_inner_gi_step,
    empty_s_tuple,
    gi_solve,
    improve_step_direction,
    inner_gi_step,
    project_polyhedron_reduced,
    v_value,
    verify_certificate,
)
from projqp.linalg import qr_factorize
from projqp.oracles import cone_project_enum, project_polyhedron_enum

R2 = math.sqrt(2.0)


def tight_s_tuple(x, j_set, u, qp):
    """s-tuple for constraints of qp tight at x with multipliers u."""
    n_mat = qp.c_mat[:, list(j_set)].copy()
    return STuple(np.asarray(x, float), tuple(j_set), np.asarray(u, float), n_mat, qr_factorize(n_mat))


class TestEmptySTuple:
    def test_basic(self):
        s = empty_s_tuple(np.array([0.0, 10.0]))
        np.testing.assert_allclose(s.x, [0.0, 10.0])
        assert s.q == 0 and s.j_set == () and s.u.size == 0

    def test_any_dimension_zeros(self):
        for n in (1, 3, 7):
            s = empty_s_tuple(np.zeros(n))
            np.testing.assert_allclose(s.x, np.zeros(n))
            assert s.n_mat.shape == (n, 0)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            empty_s_tuple(np.array([0.0, np.nan]))


class TestInnerGiStep:
    def test_single_halfspace_projection(self):
        qp = QpProblem(np.zeros(2), np.array([[1.0], [0.0]]), np.array([1.0]))
        out = inner_gi_step(empty_s_tuple(qp.x_star), 0, qp)
        assert isinstance(out, Advanced)
        s = out.s_tuple
        np.testing.assert_allclose(s.x, [1.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(s.u, [1.0], atol=1e-14)
        assert s.j_set == (0,)

    def test_add_orthogonal_constraint(self):
        qp = QpProblem(np.zeros(2), np.eye(2), np.array([1.0, 1.0]))
        s = tight_s_tuple([1.0, 0.0], (0,), [1.0], qp)
        out = inner_gi_step(s, 1, qp)
        s2 = out.s_tuple
        np.testing.assert_allclose(s2.x, [1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(sorted(s2.u), [1.0, 1.0], atol=1e-14)
        # brute-force oracle agrees
        oracle = project_polyhedron_enum(qp.x_star, qp.c_mat, qp.b)
        np.testing.assert_allclose(s2.x, oracle.x, atol=1e-10)

    def test_tie_resolves_to_full_step(self):
        # active diagonal halfspace, new vertical one; t1 = t2 = 2
        c_mat = np.column_stack([np.array([1.0, 1.0]) / R2, np.array([1.0, 0.0])])
        qp = QpProblem(np.zeros(2), c_mat, np.array([R2, 2.0]))
        s = tight_s_tuple([1.0, 1.0], (0,), [R2], qp)
        out = inner_gi_step(s, 1, qp)
        s2 = out.s_tuple
        np.testing.assert_allclose(s2.x, [2.0, 0.0], atol=1e-12)
        assert set(s2.j_set) == {0, 1}
        np.testing.assert_allclose(s2.u, [0.0, 2.0], atol=1e-12)
        oracle = project_polyhedron_enum(qp.x_star, qp.c_mat, qp.b)
        np.testing.assert_allclose(s2.x, oracle.x, atol=1e-10)
        assert "full" in out.events

    def test_infeasible_certificate(self):
        # x1 >= 1 together with -x1 >= 0 is empty
        qp = QpProblem(np.zeros(1), np.array([[1.0, -1.0]]), np.array([1.0, 0.0]))
        out = inner_gi_step(empty_s_tuple(qp.x_star), 0, qp)
        out2 = inner_gi_step(out.s_tuple, 1, qp)
        assert isinstance(out2, Infeasible)
        cert = out2.certificate
        assert verify_certificate(cert, qp.c_mat, qp.b)
        lam = cert.lam
        cols = qp.c_mat[:, list(cert.j_prime)]
        assert float(lam @ qp.b[list(cert.j_prime)]) == pytest.approx(1.0)
        assert float(np.linalg.norm(cols @ lam)) <= 1e-12

    def test_already_active_rejected(self):
        qp = QpProblem(np.zeros(2), np.eye(2), np.array([1.0, 1.0]))
        s = tight_s_tuple([1.0, 0.0], (0,), [1.0], qp)
        with pytest.raises(PreconditionViolated):
            inner_gi_step(s, 0, qp)

    def test_satisfied_constraint_rejected(self):
        qp = QpProblem(np.zeros(2), np.eye(2), np.array([1.0, -5.0]))
        s = tight_s_tuple([1.0, 0.0], (0,), [1.0], qp)
        with pytest.raises(PreconditionViolated):
            inner_gi_step(s, 1, qp)

    def test_v_strictly_increases_along_run(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n, m = 3, 6
            c = rng.uniform(-1, 1, (n, m))
            y0 = rng.uniform(-1, 1, n)
            b = c.T @ y0 - rng.uniform(0.0, 0.5, m)
            qp = QpProblem(rng.uniform(-1, 1, n), c, b)
            s = empty_s_tuple(qp.x_star)
            v_prev = 0.0
            for _ in range(30):
                resid = qp.c_mat.T @ s.x - qp.b
                viol = np.flatnonzero(resid < -1e-9)
                if viol.size == 0:
                    break
                out = inner_gi_step(s, int(viol[np.argmin(resid[viol])]), qp)
                assert isinstance(out, Advanced)
                s = out.s_tuple
                v_now = v_value(s.x, qp.x_star)
                assert v_now > v_prev - 1e-12
                v_prev = v_now


class TestDegenerateStep:
    def test_single_halfspace_from_high_point(self):
        root59 = math.sqrt(0.59)
        qp = QpProblem(np.array([0.0, 10.0]), np.array([[0.0], [-1.0]]), np.array([-root59]))
        out = degenerate_inner_gi_step(empty_s_tuple(qp.x_star), 0, qp)
        s = out.s_tuple
        np.testing.assert_allclose(s.x, [0.0, root59], atol=1e-14)
        np.testing.assert_allclose(s.u, [10.0 - root59], atol=1e-12)

    def test_conflicting_corner_is_infeasible(self):
        # at the corner of x1 >= 0, x2 >= 0, adding c_p = -(1,1)/sqrt(2) with
        # b > 0 makes the system empty; the coefficients r <= 0 and z = 0
        # certify it (the enumeration oracle agrees)
        c_p = -np.array([1.0, 1.0]) / R2
        qp = QpProblem(np.zeros(2), np.column_stack([np.eye(2), c_p]), np.array([0.0, 0.0, 0.3]))
        s = tight_s_tuple([0.0, 0.0], (0, 1), [0.0, 0.0], qp)
        out = degenerate_inner_gi_step(s, 2, qp)
        assert isinstance(out, Infeasible)
        assert verify_certificate(out.certificate, qp.c_mat, qp.b)
        assert not project_polyhedron_enum(qp.x_star, qp.c_mat, qp.b).feasible

    def test_drop_then_slide(self):
        # active x1 >= 0 at the origin; the diagonal constraint forces the
        # drop (r > 0) and a slide along c_p to (0.5, 0.5)
        c_p = np.array([1.0, 1.0]) / R2
        qp = QpProblem(
            np.zeros(2), np.column_stack([np.array([1.0, 0.0]), c_p]), np.array([0.0, 1.0 / R2])
        )
        s = tight_s_tuple([0.0, 0.0], (0,), [0.0], qp)
        out = degenerate_inner_gi_step(s, 1, qp)
        s2 = out.s_tuple
        np.testing.assert_allclose(s2.x, [0.5, 0.5], atol=1e-14)
        assert s2.j_set == (1,)
        assert any(ev.startswith("drop:0") for ev in out.events)
        # the result is the projection onto the kept system (here it also
        # happens to solve the full one); the oracle on the kept subsystem
        # confirms the partial-solution contract
        kept = project_polyhedron_enum(qp.x_star, qp.c_mat[:, [1]], qp.b[[1]])
        np.testing.assert_allclose(s2.x, kept.x, atol=1e-12)

    def test_nonzero_multipliers_rejected(self):
        qp = QpProblem(np.zeros(2), np.eye(2), np.array([0.0, 1.0]))
        s = tight_s_tuple([0.0, 0.0], (0,), [0.5], qp)
        with pytest.raises(PreconditionViolated):
            degenerate_inner_gi_step(s, 1, qp)


class TestImproveStepDirection:
    def test_empty_pool_unchanged(self):
        qp = QpProblem(np.zeros(2), np.column_stack([np.eye(2), [[0.0], [-1.0]]]), np.array([0.0, 0.0, 1.0]))
        s = tight_s_tuple([0.0, 0.0], (0, 1), [0.0, 0.0], qp)
        state = improve_step_direction(s, 2, qp, j_pool=())
        assert state.j_set == (0, 1)
        assert state.events == ()

    def test_opposite_orthant_gives_zero(self):
        # dropping both axes leaves y = 0, and no candidate re-enters since
        # the cone of negated axes is opposite to c_p
        c_p = np.array([1.0, 1.0]) / R2
        qp = QpProblem(np.zeros(2), np.column_stack([np.eye(2), c_p]), np.array([0.0, 0.0, 1.0]))
        s0 = tight_s_tuple([0.0, 0.0], (0, 1), [0.0, 0.0], qp)
        out = degenerate_inner_gi_step(s0, 2, qp, aplus=AplusOptions(rounds=4))
        s2 = out.s_tuple
        # both axes stay dropped: the step is the plain projection onto the
        # halfspace c_p^T x >= 1
        np.testing.assert_allclose(s2.x, c_p, atol=1e-14)
        y_expected = cone_project_enum(-qp.c_mat[:, :2], c_p)
        np.testing.assert_allclose(y_expected, [0.0, 0.0], atol=1e-14)

    def test_entering_improves_direction(self):
        cols = np.column_stack([np.array([1.0, 0.0]), np.array([1.0, 1.0]) / R2])
        c_p = np.array([0.0, -1.0])
        qp = QpProblem(np.zeros(2), np.column_stack([cols, c_p]), np.array([0.0, 0.0, 0.5]))
        s = tight_s_tuple([0.0, 0.0], (0,), [0.0], qp)
        state = improve_step_direction(s, 2, qp, j_pool=(1,))
        y_oracle = cone_project_enum(-cols, c_p)
        np.testing.assert_allclose(state.y, y_oracle, atol=1e-12)
        np.testing.assert_allclose(state.y, [-0.5, -0.5], atol=1e-12)
        assert "enter:1" in state.events
        assert np.all(state.r <= 1e-12)


class TestGiSolve:
    def test_unconstrained(self):
        qp = QpProblem(np.array([1.5, -2.0]), np.zeros((2, 0)), np.zeros(0))
        res = gi_solve(qp)
        np.testing.assert_allclose(res.x, qp.x_star)
        assert res.inner_steps == 0

    def test_three_constraints_corner(self):
        c = np.column_stack([np.eye(2), np.array([1.0, 1.0])])
        qp = QpProblem(np.zeros(2), c, np.array([1.0, 1.0, 1.0]))
        res = gi_solve(qp)
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-12)
        assert set(res.j_set) <= {0, 1}
        oracle = project_polyhedron_enum(qp.x_star, qp.c_mat, qp.b)
        np.testing.assert_allclose(res.x, oracle.x, atol=1e-10)

    def test_twenty_randoms_against_oracle(self):
        rng = np.random.default_rng(20)
        done = 0
        while done < 20:
            n = int(rng.integers(1, 7))
            m = int(rng.integers(1, 11))
            c = rng.uniform(-1, 1, (n, m))
            if np.any(np.linalg.norm(c, axis=0) < 0.1):
                continue
            y0 = rng.uniform(-1, 1, n)
            b = c.T @ y0 + rng.uniform(-0.5, 0.5, m)
            qp = QpProblem(rng.uniform(-1, 1, n), c, b)
            oracle = project_polyhedron_enum(qp.x_star, qp.c_mat, qp.b)
            if oracle.feasible and float(np.linalg.norm(oracle.x - qp.x_star)) > 20.0:
                continue
            done += 1
            res = gi_solve(qp)
            if isinstance(res, Infeasible):
                assert not oracle.feasible
                assert verify_certificate(res.certificate, qp.c_mat, qp.b)
            else:
                assert oracle.feasible
                np.testing.assert_allclose(res.x, oracle.x, atol=1e-8)

    def test_first_violated_rule_same_optimum(self):
        c = np.column_stack([np.eye(2), np.array([1.0, 1.0])])
        qp = QpProblem(np.zeros(2), c, np.array([1.0, 1.0, 1.0]))
        res = gi_solve(qp, GiOptions(violated_rule="first"))
        np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-12)

    def test_iteration_limit_distinct_from_infeasible(self):
        qp = QpProblem(np.zeros(2), np.eye(2), np.array([1.0, 1.0]))
        with pytest.raises(IterationLimitError):
            gi_solve(qp, GiOptions(max_inner_steps=0))


class TestReductions:
    def test_halfspace_matches_closed_form(self):
        c = np.array([[1.0], [0.0], [0.0]])
        x = np.array([-2.0, 1.0, 4.0])
        out = project_polyhedron_reduced(x, c, np.array([1.0]))
        np.testing.assert_allclose(out, [1.0, 1.0, 4.0], atol=1e-12)

    def test_high_dimension_small_face_count(self):
        rng = np.random.default_rng(3)
        n, d = 50, 3
        c = rng.uniform(-1, 1, (n, d))
        y0 = rng.uniform(-1, 1, n)
        b = c.T @ y0 + rng.uniform(-0.5, 0.2, d)
        x = rng.uniform(-2, 2, n)
        direct = gi_solve(QpProblem(x, c, b)).x
        np.testing.assert_allclose(project_polyhedron_reduced(x, c, b), direct, atol=1e-8)

    def test_feasible_point_fixed(self):
        c = np.array([[1.0], [0.0]])
        x = np.array([2.0, 5.0])
        np.testing.assert_allclose(project_polyhedron_reduced(x, c, np.array([1.0])), x, atol=1e-12)


class TestConeProjectReduced:
    def test_membership_fixed_point(self):
        n0 = np.column_stack([np.array([-1.0, 0.0, 0.0]), np.array([0.0, -1.0, 0.0])])
        c_p = np.array([0.5, 1.5, 0.0])  # inside cone(-N0)
        y, j_idx, r = cone_project_reduced(n0, c_p)
        np.testing.assert_allclose(y, c_p, atol=1e-12)
        assert np.all(r < 0.0)

    def test_orthogonal_gives_zero(self):
        n0 = np.array([[1.0], [0.0]])
        c_p = np.array([0.0, 2.0])
        y, j_idx, r = cone_project_reduced(n0, c_p)
        np.testing.assert_allclose(y, [0.0, 0.0], atol=1e-12)
        assert j_idx == ()

    def test_random_against_enumeration(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n, q0 = 20, 4
            n0 = rng.uniform(-1, 1, (n, q0))
            c_p = rng.uniform(-1, 1, n)
            y, j_idx, r = cone_project_reduced(n0, c_p)
            np.testing.assert_allclose(y, cone_project_enum(-n0, c_p), atol=1e-8)
            if j_idx:
                np.testing.assert_allclose(n0[:, list(j_idx)] @ r, y, atol=1e-8)


class TestVerifyCertificate:
    def test_hand_farkas(self):
        c = np.array([[1.0, -1.0]])
        cert = InfeasibilityCertificate((0, 1), np.array([1.0, 1.0]))
        assert verify_certificate(cert, c, np.array([1.0, 0.0]))

    def test_negative_lambda_rejected(self):
        c = np.array([[1.0, -1.0]])
        cert = InfeasibilityCertificate((0, 1), np.array([1.0, -1.0]))
        assert not verify_certificate(cert, c, np.array([1.0, 0.0]))

    def test_zero_gap_rejected(self):
        c = np.array([[1.0, -1.0]])
        cert = InfeasibilityCertificate((0, 1), np.array([1.0, 1.0]))
        assert not verify_certificate(cert, c, np.array([0.0, 0.0]))

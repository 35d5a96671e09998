import math

import numpy as np
import pytest
from scipy.linalg import solve_continuous_are

from pendulum_control.control_framework.core.dynamics import State, acceleration
from pendulum_control.control_framework.core.errors import (
    ConvergenceError,
    DomainError,
    InstabilityError,
    NotStabilizableError,
    PreconditionError,
)
from pendulum_control.control_framework.linear.linearization import StateSpace, linearize
from pendulum_control.control_framework.linear.report import Feedback, stability_report
from pendulum_control.control_framework.linear.riccati import (
    CostMatrices,
    care_residual,
    is_controllable,
    lqr_gain,
    solve_care,
    solve_lyapunov_2x2,
)
from pendulum_control.control_framework.linear.stability import (
    closed_loop,
    dominant,
    eigenvalues_2x2,
    is_hurwitz,
    time_constant,
)

from conftest import REFERENCE_COMBINATIONS

DOUBLE_INTEGRATOR = StateSpace(a=[[0.0, 1.0], [0.0, 0.0]], b=[[0.0], [1.0]])


# linearization

def test_linearize_upright_matches_reference_jacobians(upright_ss):
    np.testing.assert_allclose(upright_ss.a, [[0.0, 1.0], [30.51, -214.0]], atol=0.01)
    np.testing.assert_allclose(upright_ss.b.ravel(), [0.0, 18.18], atol=0.01)


def test_linearize_hanging_flips_gravity_sign(pendulum):
    ss = linearize(pendulum, State(0.0, 0.0))
    assert ss.a[1, 0] == pytest.approx(-30.51, abs=0.01)
    assert ss.b[1, 0] == pytest.approx(1.0 / pendulum.m_c)


def test_linearize_rejects_non_equilibrium(pendulum):
    with pytest.raises(PreconditionError) as info:
        linearize(pendulum, State(1.0, 0.0))
    assert info.value.residual > 1.0


@pytest.mark.parametrize("theta", [0.0, math.pi])
def test_linearize_matches_finite_differences(pendulum, theta):
    h = 1e-6
    fp = State(theta, 0.0)
    ss = linearize(pendulum, fp)

    def f(th, om, u):
        return np.array([om, acceleration(pendulum, State(th, om), u)])

    jac_a = np.column_stack([
        (f(theta + h, 0.0, 0.0) - f(theta - h, 0.0, 0.0)) / (2 * h),
        (f(theta, h, 0.0) - f(theta, -h, 0.0)) / (2 * h),
    ])
    jac_b = (f(theta, 0.0, h) - f(theta, 0.0, -h)) / (2 * h)
    np.testing.assert_allclose(jac_a, ss.a, rtol=1e-5, atol=1e-12)
    np.testing.assert_allclose(jac_b, ss.b.ravel(), rtol=1e-5, atol=1e-12)


# eigenvalues and stability

def test_open_loop_eigenvalues(upright_ss):
    eig1, eig2 = eigenvalues_2x2(upright_ss.a)
    assert eig1.real == pytest.approx(0.14, abs=0.01)
    assert eig2.real == pytest.approx(-214.14, abs=0.01)
    assert eig1.imag == eig2.imag == 0.0


def test_eigenvalue_examples():
    assert eigenvalues_2x2(np.eye(2)) == (1 + 0j, 1 + 0j)
    assert eigenvalues_2x2([[0.0, -1.0], [1.0, 0.0]]) == (1j, -1j)


def test_eigenvalues_are_roots(rng):
    for _ in range(50):
        m = rng.normal(scale=10.0, size=(2, 2))
        tr, det = np.trace(m), np.linalg.det(m)
        for lam in eigenvalues_2x2(m):
            scale = max(1.0, abs(lam) ** 2)
            assert abs(lam * lam - tr * lam + det) <= 1e-9 * scale


def test_closed_loop_examples(upright_ss, upright_gain):
    np.testing.assert_array_equal(closed_loop(upright_ss, [0.0, 0.0]), upright_ss.a)
    np.testing.assert_allclose(closed_loop(upright_ss, upright_gain), [[0.0, 1.0], [-575.7, -216.89]], atol=0.5)


def test_time_constant():
    assert time_constant((-2.69 + 0j, -214.20 + 0j)) == pytest.approx(0.3717, abs=0.001)
    assert time_constant((-1 + 0j, -1 + 0j)) == 1.0
    with pytest.raises(InstabilityError):
        time_constant((0.14 + 0j, -214.14 + 0j))


def test_dominant_and_hurwitz():
    eigs = (-2.0 + 1j, -2.0 - 1j)
    assert dominant(eigs).real == -2.0
    assert is_hurwitz(eigs)
    assert not is_hurwitz((0.0 + 0j, -1.0 + 0j))


# cost matrices

def test_cost_matrices_validation():
    with pytest.raises(DomainError):
        CostMatrices.diagonal(-1.0, 0.01, 0.1)
    with pytest.raises(DomainError):
        CostMatrices.diagonal(1.0, 0.01, 0.0)
    with pytest.raises(DomainError):
        CostMatrices(q=[[1.0, 0.5], [0.0, 1.0]], r=[[1.0]])


# Riccati

def test_double_integrator_analytic_solution():
    x = solve_care(DOUBLE_INTEGRATOR, CostMatrices.diagonal(1.0, 1.0, 1.0))
    s3 = math.sqrt(3.0)
    np.testing.assert_allclose(x, [[s3, 1.0], [1.0, s3]], atol=1e-8)
    solution = lqr_gain(DOUBLE_INTEGRATOR, CostMatrices.diagonal(1.0, 1.0, 1.0))
    np.testing.assert_allclose(solution.k.ravel(), [1.0, s3], atol=1e-8)


def test_lyapunov_case():
    ss = StateSpace(a=-np.eye(2), b=[[0.0], [0.0]])
    x = solve_care(ss, CostMatrices.diagonal(1.0, 1.0, 1.0))
    np.testing.assert_allclose(x, 0.5 * np.eye(2), atol=1e-12)


def test_lyapunov_solver():
    f = np.array([[-1.0, 2.0], [0.0, -3.0]])
    m = np.array([[2.0, 0.5], [0.5, 1.0]])
    x = solve_lyapunov_2x2(f, m)
    np.testing.assert_allclose(f.T @ x + x @ f + m, np.zeros((2, 2)), atol=1e-12)
    assert x[0, 1] == x[1, 0]


def test_combination_3_gain_and_time_constant(upright_ss, combination_3):
    solution = lqr_gain(upright_ss, combination_3)
    np.testing.assert_allclose(solution.k.ravel(), [33.345, 0.159], atol=0.05)
    eig1, eig2 = solution.closed_loop_eigs
    assert eig1.real == pytest.approx(-2.69, abs=0.02)
    assert eig2.real == pytest.approx(-214.20, abs=0.02)
    assert time_constant(solution.closed_loop_eigs) == pytest.approx(0.3717, abs=0.001)
    assert solution.residual <= 1e-9
    np.testing.assert_array_equal(solution.x, solution.x.T)


@pytest.mark.parametrize("label, q11, q22, r11, expected", REFERENCE_COMBINATIONS)
def test_reference_eigenvalue_table(upright_ss, label, q11, q22, r11, expected):
    solution = lqr_gain(upright_ss, CostMatrices.diagonal(q11, q22, r11, label=label))
    eigs = [z.real for z in solution.closed_loop_eigs]
    np.testing.assert_allclose(eigs, expected, atol=0.02)
    assert solution.residual <= 1e-9


def test_matches_scipy_oracle(upright_ss, combination_3):
    x = solve_care(upright_ss, combination_3)
    oracle = solve_continuous_are(upright_ss.a, upright_ss.b, combination_3.q, combination_3.r)
    np.testing.assert_allclose(x, oracle, rtol=1e-8, atol=1e-10)


def test_randomized_cost_grid(upright_ss, rng):
    for _ in range(200):
        q11 = 10 ** rng.uniform(-2, 2)
        q22 = rng.choice([0.0, 10 ** rng.uniform(-3, 1)])
        r11 = 10 ** rng.uniform(-2, 1)
        cost = CostMatrices.diagonal(q11, q22, r11)
        solution = lqr_gain(upright_ss, cost)
        assert care_residual(upright_ss, cost, solution.x) <= 1e-9
        assert all(z.real < 0 for z in solution.closed_loop_eigs)


def test_gain_is_invariant_to_cost_scaling(upright_ss, combination_3):
    k = lqr_gain(upright_ss, combination_3).k
    scaled = CostMatrices(q=7.5 * combination_3.q, r=7.5 * combination_3.r)
    solution = lqr_gain(upright_ss, scaled)
    np.testing.assert_allclose(solution.k, k, rtol=1e-8)
    # the residual bound is absolute, not scaled by the size of q
    assert solution.residual <= 1e-9


def test_unstabilizable_pair():
    ss = StateSpace(a=[[1.0, 0.0], [0.0, -1.0]], b=[[0.0], [1.0]])
    assert not is_controllable(ss)
    with pytest.raises(NotStabilizableError):
        solve_care(ss, CostMatrices.diagonal(1.0, 1.0, 1.0))


def test_stabilizable_pair_with_uncontrollable_stable_mode():
    ss = StateSpace(a=[[1.0, 0.0], [0.0, -1.0]], b=[[1.0], [0.0]])
    assert not is_controllable(ss)
    solution = lqr_gain(ss, CostMatrices.diagonal(1.0, 1.0, 1.0))
    np.testing.assert_allclose(solution.x, [[1.0 + math.sqrt(2.0), 0.0], [0.0, 0.5]], atol=1e-9)
    assert sorted(z.real for z in solution.closed_loop_eigs) == pytest.approx([-math.sqrt(2.0), -1.0])
    assert solution.residual <= 1e-9


def test_iteration_cap_reports_residual(upright_ss, combination_3):
    with pytest.raises(ConvergenceError) as info:
        solve_care(upright_ss, combination_3, max_iterations=1)
    assert info.value.iterations == 1
    assert info.value.residual > 0


# stability report

def test_stability_report_reproduces_table(upright_ss):
    combos = [CostMatrices.diagonal(q11, q22, r11, label=label) for label, q11, q22, r11, _ in REFERENCE_COMBINATIONS]
    rows = stability_report(upright_ss, combos)
    assert [r.label for r in rows] == ["0", "1", "2", "3", "4"]
    assert rows[0].feedback is Feedback.OPEN_LOOP
    assert rows[0].eigenvalue_1.real == pytest.approx(0.14, abs=0.01)
    for row, (_, _, _, _, expected) in zip(rows[1:], REFERENCE_COMBINATIONS):
        assert row.feedback is Feedback.LQR
        assert row.error is None
        np.testing.assert_allclose([row.eigenvalue_1.real, row.eigenvalue_2.real], expected, atol=0.02)


def test_stability_report_edge_cases(upright_ss, combination_3):
    assert len(stability_report(upright_ss, [])) == 1
    rows = stability_report(upright_ss, [combination_3, combination_3])
    assert rows[1].eigenvalue_1 == rows[2].eigenvalue_1
    assert rows[1].eigenvalue_2 == rows[2].eigenvalue_2


def test_stability_report_keeps_failures_in_row():
    ss = StateSpace(a=[[1.0, 0.0], [0.0, -1.0]], b=[[0.0], [1.0]])
    rows = stability_report(ss, [CostMatrices.diagonal(1.0, 1.0, 1.0, label="bad")])
    assert rows[1].error is not None
    assert rows[1].eigenvalue_1 is None


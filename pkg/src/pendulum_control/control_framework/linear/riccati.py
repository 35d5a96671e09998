# src/pendulum_control/control_framework/linear/riccati.py

"""
Continuous algebraic Riccati equation for the 2-state, 1-input case:

    A^T X + X A - X B R^-1 B^T X + Q = 0,    K = R^-1 B^T X

solved by Newton-Kleinman iteration. Each Newton step is a 2x2 Lyapunov equation whose
three unique unknowns are solved as a 3x3 linear system.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from pendulum_control.control_framework.core.errors import (
    ConvergenceError,
    DomainError,
    NotStabilizableError,
)
from pendulum_control.control_framework.linear.linearization import StateSpace
from pendulum_control.control_framework.linear.stability import (
    EigenPair,
    closed_loop,
    eigenvalues_2x2,
    is_hurwitz,
)

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100
STEP_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-9
# Closed-loop poles of the initial stabilizing gain
INITIAL_POLES = (-1.0, -220.0)


@dataclass(frozen=True, eq=False)
class CostMatrices:
    """Quadratic cost weights: q (2x2, symmetric PSD) on the state, r (1x1, > 0) on the input."""
    q: np.ndarray
    r: np.ndarray
    label: str = ""

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(2, 2)
        r = np.array(self.r, dtype=float).reshape(1, 1)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(r))):
            raise DomainError("cost matrices must be finite")
        if not np.array_equal(q, q.T):
            raise DomainError(f"q must be symmetric, got {q.tolist()}")
        if np.min(np.linalg.eigvalsh(q)) < -1e-12 * max(1.0, np.max(np.abs(q))):
            raise DomainError(f"q must be positive semi-definite, got {q.tolist()}")
        if not r[0, 0] > 0:
            raise DomainError(f"r must be positive, got {r[0, 0]}")
        q.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def diagonal(cls, q11: float, q22: float, r11: float, label: str = "") -> "CostMatrices":
        return cls(q=np.diag([q11, q22]), r=np.array([[r11]]), label=label)


@dataclass(frozen=True, eq=False)
class LqrSolution:
    x: np.ndarray
    k: np.ndarray
    closed_loop_eigs: EigenPair
    residual: float
    iterations: int


def care_residual(ss: StateSpace, cost: CostMatrices, x: np.ndarray) -> float:
    """Frobenius norm of A^T X + X A - X B R^-1 B^T X + Q."""
    a, b = ss.a, ss.b
    r_inv = np.linalg.inv(cost.r)
    res = a.T @ x + x @ a - x @ b @ r_inv @ b.T @ x + cost.q
    return float(np.linalg.norm(res, "fro"))


def is_controllable(ss: StateSpace) -> bool:
    ctrb = np.hstack([ss.b, ss.a @ ss.b])
    scale = np.linalg.norm(ss.b) * np.linalg.norm(ss.a @ ss.b)
    return scale > 0 and abs(np.linalg.det(ctrb)) > 1e-12 * scale


def _uncontrollable_modes(ss: StateSpace) -> List[complex]:
    """Eigenvalues of A where [A - lambda I, B] drops rank (PBH test)."""
    modes = []
    scale = max(1.0, float(np.linalg.norm(np.hstack([ss.a, ss.b]))))
    for lam in np.linalg.eigvals(ss.a):
        pbh = np.hstack([ss.a - lam * np.eye(2), ss.b])
        if np.linalg.svd(pbh, compute_uv=False)[-1] <= 1e-12 * scale:
            modes.append(complex(lam))
    return modes


def _initial_gain(ss: StateSpace) -> np.ndarray:
    """A stabilizing gain to start Newton-Kleinman from."""
    if is_hurwitz(eigenvalues_2x2(ss.a)):
        return np.zeros((1, 2))
    stuck = [lam for lam in _uncontrollable_modes(ss) if lam.real >= 0]
    if stuck:
        raise NotStabilizableError(f"(A, B) is not stabilizable: uncontrollable mode(s) {stuck} are not stable")

    a = ss.a
    p1, p2 = INITIAL_POLES
    if is_controllable(ss):
        # Ackermann: K = [0 1] C^-1 phi(A), phi has roots INITIAL_POLES
        phi = a @ a - (p1 + p2) * a + (p1 * p2) * np.eye(2)
        ctrb = np.hstack([ss.b, a @ ss.b])
        return np.array([[0.0, 1.0]]) @ np.linalg.solve(ctrb, phi)

    # one real mode is controllable; K along its left eigenvector moves only that mode to p1
    eigs, left = np.linalg.eig(a.T)
    eigs, left = eigs.real, left.real
    reach = np.abs(left.T @ ss.b).ravel() / np.linalg.norm(left, axis=0)
    i = int(np.argmax(reach))
    w = left[:, i]
    gain = (eigs[i] - p1) / float(w @ ss.b.ravel())
    return gain * w.reshape(1, 2)


def solve_lyapunov_2x2(f: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Solve F^T X + X F + M = 0 for symmetric X (M symmetric)."""
    (f11, f12), (f21, f22) = f
    lhs = np.array([
        [2.0 * f11, 2.0 * f21, 0.0],
        [f12, f11 + f22, f21],
        [0.0, 2.0 * f12, 2.0 * f22],
    ])
    rhs = -np.array([m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]])
    x1, x2, x3 = np.linalg.solve(lhs, rhs)
    return np.array([[x1, x2], [x2, x3]])


def solve_care(
    ss: StateSpace,
    cost: CostMatrices,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = STEP_TOLERANCE,
) -> np.ndarray:
    x, _ = _newton_kleinman(ss, cost, max_iterations, tolerance)
    return x


def _newton_kleinman(ss: StateSpace, cost: CostMatrices, max_iterations: int, tolerance: float):
    if max_iterations < 1:
        raise DomainError(f"max_iterations must be at least 1, got {max_iterations}")
    a, b, q, r = ss.a, ss.b, cost.q, cost.r
    r_inv = np.linalg.inv(r)
    k = _initial_gain(ss)
    x_prev: Optional[np.ndarray] = None
    prev_step = np.inf

    for iteration in range(1, max_iterations + 1):
        f = a - b @ k
        try:
            x = solve_lyapunov_2x2(f, q + k.T @ r @ k)
        except np.linalg.LinAlgError as e:
            raise NotStabilizableError(f"Lyapunov step {iteration} is singular: {e}") from e
        k = r_inv @ b.T @ x

        if x_prev is not None:
            step = float(np.max(np.abs(x - x_prev)))
            logger.debug(f"Newton-Kleinman iteration {iteration}: step {step:.3e}")
            # iterates can stall a few ulps above the step tolerance once X is large
            stalled = step >= prev_step
            if step <= tolerance or stalled:
                residual = care_residual(ss, cost, x)
                if residual <= RESIDUAL_TOLERANCE:
                    logger.debug(f"CARE solved in {iteration} iterations, residual {residual:.3e}")
                    return x, iteration
                if not stalled:
                    raise ConvergenceError(
                        f"Riccati iterates settled but residual is {residual:.3e}",
                        residual=residual, iterations=iteration,
                    )
            prev_step = step
        x_prev = x

    residual = care_residual(ss, cost, x)
    raise ConvergenceError(
        f"Newton-Kleinman did not converge in {max_iterations} iterations (residual {residual:.3e})",
        residual=residual, iterations=max_iterations,
    )


def lqr_gain(
    ss: StateSpace,
    cost: CostMatrices,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = STEP_TOLERANCE,
) -> LqrSolution:
    x, iterations = _newton_kleinman(ss, cost, max_iterations, tolerance)
    k = np.linalg.inv(cost.r) @ ss.b.T @ x
    eigs = eigenvalues_2x2(closed_loop(ss, k))
    k.setflags(write=False)
    x.setflags(write=False)
    solution = LqrSolution(
        x=x, k=k, closed_loop_eigs=eigs,
        residual=care_residual(ss, cost, x), iterations=iterations,
    )
    logger.info(
        f"LQR gain K={np.round(k.ravel(), 4).tolist()} "
        f"closed-loop eigenvalues {[complex(round(z.real, 4), round(z.imag, 4)) for z in eigs]}"
    )
    return solution

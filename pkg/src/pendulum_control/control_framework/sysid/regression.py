# src/pendulum_control/control_framework/sysid/regression.py

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import linalg

from pendulum_control.control_framework.core.dynamics import PendulumParams
from pendulum_control.control_framework.core.errors import (
    ConfigError,
    InconsistentSignError,
    InsufficientDataError,
    MixedKindError,
    SingularDesignError,
)
from pendulum_control.control_framework.sysid.logs import (
    LogRecord,
    finite_difference_acceleration,
    log_arrays,
)
from pendulum_control.control_framework.sysid.segments import StaticSegment

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12
MIN_DYNAMIC_SAMPLES = 10
MIN_STATIC_SEGMENTS = 3


class RegressionKind(Enum):
    INERTIA_DAMPING = "inertia-damping"
    GRAVITY = "gravity"


@dataclass(frozen=True)
class RegressionResult:
    coefficients: Dict[str, float]
    r_squared: float
    n_samples: int
    residual_std: float
    kind: Optional[RegressionKind] = None
    source: str = ""

    def to_report(self) -> Dict[str, object]:
        return {
            "coefficients": dict(self.coefficients),
            "r_squared": self.r_squared,
            "n_samples": self.n_samples,
            "residual_std": self.residual_std,
        }


@dataclass(frozen=True)
class ParamsFragment:
    """Constants recovered by one kind of experiment; the others stay None."""
    m_c: Optional[float] = None
    b_c: Optional[float] = None
    g_c: Optional[float] = None
    per_trial: Dict[str, list] = field(default_factory=dict)

    def combine(self, other: "ParamsFragment") -> "ParamsFragment":
        merged = {}
        for name in ("m_c", "b_c", "g_c"):
            mine, theirs = getattr(self, name), getattr(other, name)
            merged[name] = theirs if mine is None else mine
        return ParamsFragment(**merged, per_trial={**self.per_trial, **other.per_trial})

    def to_params(self) -> PendulumParams:
        missing = [n for n in ("m_c", "b_c", "g_c") if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"constants not identified yet: {', '.join(missing)}")
        return PendulumParams(m_c=self.m_c, b_c=self.b_c, g_c=self.g_c)


def ols(design, y, names: Sequence[str]) -> RegressionResult:
    """
    Least squares via column-pivoted QR. A design is rank deficient when the smallest
    |R_ii| is below RANK_TOLERANCE times the largest.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n, p = x.shape
    if len(names) != p:
        raise ValueError(f"{p} design columns but {len(names)} names")
    if len(y) != n:
        raise ValueError(f"design has {n} rows but y has {len(y)}")
    if n <= p:
        raise InsufficientDataError(f"need more samples than terms ({n} <= {p})")

    q, r, perm = linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0 or diag[-1] < RANK_TOLERANCE * diag[0]:
        raise SingularDesignError(f"design matrix is rank deficient (pivots {diag.tolist()})")

    beta = np.empty(p)
    beta[perm] = linalg.solve_triangular(r, q.T @ y)

    residuals = y - x @ beta
    ss_res = float(residuals @ residuals)
    if "intercept" in names:
        centered = y - y.mean()
        ss_tot = float(centered @ centered)
    else:
        ss_tot = float(y @ y)
    if ss_tot == 0:
        r_squared = 1.0 if ss_res == 0 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    return RegressionResult(
        coefficients={name: float(b) for name, b in zip(names, beta)},
        r_squared=r_squared,
        n_samples=n,
        residual_std=math.sqrt(ss_res / (n - p)),
    )


def regress_inertia_damping(
    records: Sequence[LogRecord],
    intercept: bool = False,
    source: str = "",
) -> RegressionResult:
    """Effort feedback on velocity feedback and finite-difference acceleration (horizontal run)."""
    if len(records) < MIN_DYNAMIC_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_DYNAMIC_SAMPLES} records for the inertia/damping fit, got {len(records)}"
        )
    accel = np.array([a for _, a in finite_difference_acceleration(records)])
    velocity, effort = log_arrays(records[:-1], "velocity_fbk", "effort_fbk")

    columns, names = [velocity, accel], ["velocity", "acceleration"]
    if intercept:
        columns.append(np.ones_like(velocity))
        names.append("intercept")
    result = ols(np.column_stack(columns), effort, names)
    logger.info(f"Inertia/damping fit {source or ''}: {result.coefficients} (R^2={result.r_squared:.6f})")
    return _tagged(result, RegressionKind.INERTIA_DAMPING, source)


def regress_gravity(
    segments: Sequence[StaticSegment],
    intercept: bool = False,
    source: str = "",
) -> RegressionResult:
    """Mean static effort of each hold on the sine of its commanded angle, both cycles pooled."""
    if len(segments) < MIN_STATIC_SEGMENTS:
        raise InsufficientDataError(
            f"need at least {MIN_STATIC_SEGMENTS} static segments, got {len(segments)}"
        )
    angles = np.array([s.angle for s in segments])
    if np.all(angles == angles[0]):
        raise SingularDesignError(f"all static holds are at the same angle ({angles[0]} rad)")

    effort = np.array([s.mean_effort for s in segments])
    columns, names = [np.sin(angles)], ["sine_pos"]
    if intercept:
        columns.append(np.ones_like(effort))
        names.append("intercept")
    result = ols(np.column_stack(columns), effort, names)
    logger.info(f"Gravity fit {source or ''}: {result.coefficients} (R^2={result.r_squared:.6f})")
    return _tagged(result, RegressionKind.GRAVITY, source)


def _tagged(result: RegressionResult, kind: RegressionKind, source: str) -> RegressionResult:
    return RegressionResult(
        coefficients=result.coefficients,
        r_squared=result.r_squared,
        n_samples=result.n_samples,
        residual_std=result.residual_std,
        kind=kind,
        source=source,
    )


# coefficient name -> constant it identifies
_CONSTANTS = {
    RegressionKind.INERTIA_DAMPING: {"velocity": "b_c", "acceleration": "m_c"},
    RegressionKind.GRAVITY: {"sine_pos": "g_c"},
}


def average_trials(results: Sequence[RegressionResult], kind: RegressionKind) -> ParamsFragment:
    """
    Mean of each coefficient across trials after sign normalization. The sensor reports
    external torque negated, so magnitudes are averaged; a coefficient whose sign differs
    between trials is rejected instead of silently flipped.
    """
    kind = RegressionKind(kind)
    if not results:
        raise InsufficientDataError(f"no {kind.value} results to average")
    other = [r.kind for r in results if r.kind is not kind]
    if other:
        raise MixedKindError(
            f"cannot average {kind.value} with {', '.join(sorted({str(o.value if o else None) for o in other}))} results"
        )

    constants = {}
    per_trial = {}
    for term, constant in _CONSTANTS[kind].items():
        values = np.array([r.coefficients[term] for r in results])
        signs = set(np.sign(values[values != 0]).tolist())
        if len(signs) > 1:
            raise InconsistentSignError(
                f"coefficient '{term}' changes sign across trials: {values.tolist()}"
            )
        constants[constant] = float(np.mean(np.abs(values)))
        per_trial[constant] = np.abs(values).tolist()

    logger.info(f"Averaged {len(results)} {kind.value} trial(s): {constants}")
    return ParamsFragment(**constants, per_trial=per_trial)

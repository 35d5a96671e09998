# src/pendulum_control/control_framework/linear/stability.py

import math
from typing import Sequence, Tuple

import numpy as np

from pendulum_control.control_framework.core.errors import InstabilityError
from pendulum_control.control_framework.linear.linearization import StateSpace

EigenPair = Tuple[complex, complex]


def _sort_key(z: complex):
    return (-z.real, -z.imag)


def eigenvalues_2x2(m) -> EigenPair:
    """
    Roots of lambda^2 - tr(m) lambda + det(m), sorted by descending real part, then
    descending imaginary part.
    """
    m = np.asarray(m, dtype=float).reshape(2, 2)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    half = 0.5 * tr
    disc = half * half - det

    if disc >= 0:
        root = math.sqrt(disc)
        # larger-magnitude root first, the other from the product det to avoid cancellation
        big = half + root if half >= 0 else half - root
        small = det / big if big != 0 else 0.0
        roots = (complex(big, 0.0), complex(small, 0.0))
    else:
        root = math.sqrt(-disc)
        roots = (complex(half, root), complex(half, -root))

    return tuple(sorted(roots, key=_sort_key))


def closed_loop(ss: StateSpace, k) -> np.ndarray:
    """A - B K for a 1x2 gain K."""
    k = np.asarray(k, dtype=float).reshape(1, 2)
    return ss.a - ss.b @ k


def is_hurwitz(eigs: Sequence[complex]) -> bool:
    return all(z.real < 0 for z in eigs)


def dominant(eigs: Sequence[complex]) -> complex:
    """The slowest mode: the eigenvalue with the largest real part."""
    return max(eigs, key=lambda z: z.real)


def time_constant(eigs: Sequence[complex]) -> float:
    """tau = 1 / |Re(dominant eigenvalue)|."""
    slowest = dominant(eigs)
    if slowest.real >= 0:
        raise InstabilityError(
            f"dominant eigenvalue {slowest.real:+.4f}{slowest.imag:+.4f}j is not in the open left half-plane"
        )
    return 1.0 / abs(slowest.real)

"""Tortoise coordinate and the quasi-local validity estimator.

The cavity field is quantised as if spacetime were flat across the cavity.
In tortoise coordinates the radial wave equation is flat apart from a
potential, so the ratio of the cavity's tortoise extent to its proper length,
``L*/L``, measures how far the flat-cavity picture is stretched.  It is 1 in
flat space and grows as the cavity approaches the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DEFAULT_THRESHOLD = 1.03
ESTIMATOR_SIGN = "L*/L = sqrt(1-2m/R) + (2m/L) ln[sqrt(R^2-2mR) / (sqrt(R^2-2mR) - L)]  (plus sign)"


@dataclass(frozen=True)
class EstimatorReport:
    ratio: float
    R: float
    L: float
    m: float

    def exceeds(self, threshold: float = DEFAULT_THRESHOLD) -> bool:
        return self.ratio > threshold


def tortoise(r: float, m: float) -> float:
    """r* = r + 2m ln(r/2m - 1)."""
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if not r > 2 * m:
        raise DomainError(f"r must exceed 2m (r={r}, m={m})")
    return r + 2.0 * m * math.log(r / (2.0 * m) - 1.0)


def _check(R, L, m):
    if not m > 0:
        raise DomainError(f"m must be positive, got {m}")
    if not R > 2 * m:
        raise DomainError(f"R must exceed 2m (R={R}, m={m})")
    if not L > 0:
        raise DomainError(f"cavity length must be positive, got {L}")
    r_exit = R - math.sqrt(1.0 - 2.0 * m / R) * L
    if not r_exit > 2 * m:
        raise DomainError(f"cavity of length {L} at R={R} reaches the horizon (inner wall at r={r_exit:.6g})")
    return r_exit


def estimator(R: float, L: float, m: float = 1.0) -> EstimatorReport:
    """L*/L from the tortoise-coordinate difference across the cavity."""
    _check(R, L, m)
    # r*(R) - r*(r_exit) with both logs merged and R - r_exit formed directly,
    # so nothing cancels when L is small compared with R
    drift = math.sqrt(1.0 - 2.0 * m / R) * L
    log_term = 2.0 * m * math.log1p(drift / ((R - 2.0 * m) - drift))
    return EstimatorReport((drift + log_term) / L, R, L, m)


def estimator_closed_form(R: float, L: float, m: float = 1.0) -> float:
    """sqrt(1-2m/R) + (2m/L) ln[sqrt(R^2-2mR) / (sqrt(R^2-2mR) - L)]."""
    _check(R, L, m)
    s = math.sqrt(R * R - 2.0 * m * R)
    return math.sqrt(1.0 - 2.0 * m / R) + (2.0 * m / L) * -math.log1p(-L / s)

"""Detector worldlines in the cavity rest frame.

Two scenarios share one interface:

* radial free fall from rest at the outer cavity wall ``r = R`` of a
  Schwarzschild black hole, described in the wall's proper frame ``(r', t')``
  through the cycloid parameter ``theta``;
* uniform proper acceleration through an inertial cavity in flat spacetime.

Both worldline classes expose ``sample(s)``, which returns proper time,
cavity-frame position, cavity-frame time and ``dtau/ds`` on an array of a
smooth curve parameter ``s``.  For free fall ``s`` is ``theta``, which lets
the detector integrals avoid inverting ``tau(theta)`` inside the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .numerics import find_root

ANCHORS = ("entrance", "middle")
THETA_TOL = 1e-12


class WorldlinePoint(NamedTuple):
    tau: float
    space: float
    time: float


def _abscissae(x) -> np.ndarray:
    """``x`` as an array; long double input keeps its precision, anything else is float64."""
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(float)


class WorldlineSample(NamedTuple):
    tau: np.ndarray
    space: np.ndarray
    time: np.ndarray
    dtau_ds: np.ndarray


@dataclass(frozen=True)
class SchwarzschildBackground:
    """Black hole of mass ``m`` with the cavity's outer wall at areal radius ``R``."""

    m: float
    R: float

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError(f"m must be positive, got {self.m}")
        if not self.R > 2 * self.m:
            raise DomainError(f"R must exceed 2m (R={self.R}, m={self.m})")

    @property
    def redshift(self) -> float:
        """sqrt(1 - 2m/R): lapse of the static frame at the wall."""
        return math.sqrt(1.0 - 2.0 * self.m / self.R)

    def radius_at(self, space: float) -> float:
        """Areal radius of the point at proper distance ``space`` inside the cavity."""
        return self.R - self.redshift * space

    def check_cavity(self, L: float) -> None:
        if L < 0:
            raise DomainError(f"cavity length must be non-negative, got {L}")
        r_exit = self.radius_at(L)
        if not r_exit > 2 * self.m:
            raise DomainError(
                f"cavity of length {L} at R={self.R} reaches the horizon (inner wall at r={r_exit:.6g})"
            )


def frame_transform(r: float, t: float, bg: SchwarzschildBackground) -> tuple[float, float]:
    """Map asymptotic-frame ``(r, t)`` to the outer wall's frame ``(r', t')``."""
    if not 2 * bg.m < r <= bg.R:
        raise DomainError(f"r must lie in (2m, R] = ({2 * bg.m}, {bg.R}], got {r}")
    return (bg.R - r) / bg.redshift, bg.redshift * t


class FreeFallWorldline:
    """Radial geodesic released from rest at ``r = R``.

    ``r = R cos^2(theta/2)`` and ``tau = sqrt(R^3 / 8m) (theta + sin theta)``.
    """

    def __init__(self, background: SchwarzschildBackground):
        self.background = background
        bg = background
        self._tau_scale = math.sqrt(bg.R**3 / (8.0 * bg.m))
        self.theta_H = 2.0 * math.acos(math.sqrt(2.0 * bg.m / bg.R))
        self._tan_half_H = math.tan(0.5 * self.theta_H)

    def __repr__(self):
        bg = self.background
        return f"FreeFallWorldline(m={bg.m!r}, R={bg.R!r})"

    def tau_of_theta(self, theta):
        return self._tau_scale * (theta + np.sin(theta))

    def space_of_theta(self, theta):
        bg = self.background
        return bg.R * np.sin(0.5 * theta) ** 2 / bg.redshift

    def time_of_theta(self, theta):
        bg = self.background
        m, R = bg.m, bg.R
        f = 1.0 - 2.0 * m / R
        th = np.tan(0.5 * theta)
        bracket = 0.5 * (theta + np.sin(theta)) + (2.0 * m / R) * theta
        log_term = np.log((self._tan_half_H + th) / (self._tan_half_H - th))
        return f * math.sqrt(R**3 / (2.0 * m)) * bracket + math.sqrt(f) * 2.0 * m * log_term

    @property
    def horizon_tau(self) -> float:
        return float(self.tau_of_theta(self.theta_H))

    def theta_of_tau(self, tau: float) -> float:
        if tau < 0:
            raise DomainError(f"proper time must be non-negative, got {tau}")
        if tau == 0:
            return 0.0
        if tau >= self.horizon_tau:
            raise DomainError(
                f"tau={tau} is at or beyond horizon crossing (tau_H={self.horizon_tau:.6g})"
            )
        return find_root(lambda th: self.tau_of_theta(th) - tau, 0.0, self.theta_H, THETA_TOL)

    def position(self, tau: float) -> WorldlinePoint:
        theta = self.theta_of_tau(tau)
        return WorldlinePoint(float(tau), float(self.space_of_theta(theta)), float(self.time_of_theta(theta)))

    def exit_theta(self, L: float) -> float:
        bg = self.background
        bg.check_cavity(L)
        return 2.0 * math.asin(math.sqrt(L * bg.redshift / bg.R))

    def transit_time(self, L: float) -> float:
        return float(self.tau_of_theta(self.exit_theta(L)))

    def parameter_at(self, tau: float) -> float:
        return self.theta_of_tau(tau)

    def sample(self, theta) -> WorldlineSample:
        theta = _abscissae(theta)
        return WorldlineSample(
            self.tau_of_theta(theta),
            self.space_of_theta(theta),
            self.time_of_theta(theta),
            self._tau_scale * (1.0 + np.cos(theta)),
        )


class RindlerWorldline:
    """Uniform proper acceleration ``a`` from rest at the cavity entrance."""

    def __init__(self, a: float):
        if not a > 0:
            raise DomainError(f"acceleration must be positive, got {a}")
        self.a = float(a)

    def __repr__(self):
        return f"RindlerWorldline(a={self.a!r})"

    def position(self, tau: float) -> WorldlinePoint:
        if tau < 0:
            raise DomainError(f"proper time must be non-negative, got {tau}")
        s = self.sample(np.array([tau], dtype=float))
        return WorldlinePoint(float(tau), float(s.space[0]), float(s.time[0]))

    def transit_time(self, L: float) -> float:
        return transit_time_rindler(self.a, L)

    def parameter_at(self, tau: float) -> float:
        if tau < 0:
            raise DomainError(f"proper time must be non-negative, got {tau}")
        return float(tau)

    def sample(self, tau) -> WorldlineSample:
        tau = _abscissae(tau)
        a = self.a
        # cosh(x) - 1 = 2 sinh^2(x/2) avoids cancellation for small a*tau
        space = 2.0 * np.sinh(0.5 * a * tau) ** 2 / a
        return WorldlineSample(tau, space, np.sinh(a * tau) / a, np.ones_like(tau))


def theta_of_tau(tau: float, wl: FreeFallWorldline) -> float:
    return wl.theta_of_tau(tau)


def freefall_position(tau: float, wl: FreeFallWorldline) -> WorldlinePoint:
    return wl.position(tau)


def rindler_position(tau: float, wl: RindlerWorldline) -> WorldlinePoint:
    return wl.position(tau)


def transit_time_schwarzschild(bg: SchwarzschildBackground, L: float) -> float:
    """Proper time for a detector released at the outer wall to reach proper depth ``L``."""
    if L < 0:
        raise DomainError(f"cavity length must be non-negative, got {L}")
    if L * bg.redshift >= bg.R:
        raise DomainError(f"exit point L*sqrt(1-2m/R)={L * bg.redshift:.6g} is not inside R={bg.R}")
    return FreeFallWorldline(bg).transit_time(L)


def transit_time_rindler(a: float, L: float) -> float:
    """Proper time for ``x(tau) = (cosh(a tau) - 1)/a`` to reach ``L``."""
    if not a > 0:
        raise DomainError(f"acceleration must be positive, got {a}")
    if L < 0:
        raise DomainError(f"cavity length must be non-negative, got {L}")
    eps = a * L
    # arccosh(1 + eps) written without the cancellation of 1 + eps - 1
    return math.log1p(eps + math.sqrt(eps * (2.0 + eps))) / a


def surface_gravity_at(r: float, m: float) -> float:
    """Proper acceleration of a static observer at areal radius ``r``."""
    if not r > 2 * m:
        raise DomainError(f"radius {r} is not outside the horizon 2m={2 * m}")
    return m / (r * r * math.sqrt(1.0 - 2.0 * m / r))


def matched_acceleration(bg: SchwarzschildBackground, L: float, anchor: str = "entrance") -> float:
    """Rindler acceleration equal to the local field strength at the chosen anchor.

    ``entrance`` uses the outer wall; ``middle`` uses the proper midpoint of
    the cavity, ``r_mid = R - sqrt(1 - 2m/R) L / 2``.
    """
    if anchor == "entrance":
        return surface_gravity_at(bg.R, bg.m)
    if anchor == "middle":
        if L < 0:
            raise DomainError(f"cavity length must be non-negative, got {L}")
        return surface_gravity_at(bg.radius_at(0.5 * L), bg.m)
    raise DomainError(f"anchor must be one of {ANCHORS}, got {anchor!r}")

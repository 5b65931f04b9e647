"""Second-order excitation probability of a two-level detector crossing a cavity.

The cavity field is quantised in the cavity rest frame with Dirichlet walls,
``u_n = exp(i w_n t) sin(k_n x)``, ``w_n = k_n = n pi / L``, and each mode
enters the coupling with weight ``1/sqrt(w_n L)``.  For a detector starting in
its ground state with the field in vacuum,

    P1 = lam^2 sum_n |I_{+,n}|^2 / (w_n L)
    P2 = lam^2 sum_n 2 Re(J_n) / (w_n L)

where ``I_{+,n}`` is the single proper-time integral of the mode along the
worldline and ``J_n`` the time-ordered double integral.  P2 = P1 holds
identically (trace preservation at second order); computing J is only done
to check that.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import AccuracyError, DomainError, TruncationError
from .numerics import (
    DEFAULT_QUADRATURE,
    EXTENDED,
    QuadratureConfig,
    QuadratureResult,
    integrate_1d,
    integrate_levin,
    integrate_triangle_separable,
)

TAIL_WINDOW = 16
J_ROUNDOFF = 16.0
METHODS = ("levin", "gk")
NORMALIZATION = "1/sqrt(omega_n L) per mode; P1 = lam^2 sum |I+,n|^2 / (omega_n L)"


@dataclass(frozen=True)
class CavitySpec:
    """Dirichlet cavity of proper length ``L`` and its mode-sum truncation policy.

    The sum starts at ``n_max`` modes and doubles, up to ``n_max_limit``,
    until the last ``TAIL_WINDOW`` modes carry at most ``tail_rel_tol`` of
    the partial sum.
    """

    L: float
    n_max: int = 64
    tail_rel_tol: float = 1e-6
    n_max_limit: int = 4096

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError(f"cavity length must be positive, got {self.L}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {self.n_max}")
        if self.n_max_limit < self.n_max:
            raise DomainError("n_max_limit must be >= n_max")
        if not self.tail_rel_tol > 0:
            raise DomainError("tail_rel_tol must be positive")

    def wavenumber(self, n: int) -> float:
        return n * math.pi / self.L


@dataclass(frozen=True)
class DetectorSpec:
    lam: float
    omega: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"coupling must be positive, got {self.lam}")
        if not self.omega > 0:
            raise DomainError(f"energy gap must be positive, got {self.omega}")

    @classmethod
    def resonant(cls, lam: float, L: float, mode: int = 6) -> "DetectorSpec":
        """Gap equal to the frequency of cavity mode ``mode``."""
        if mode < 1:
            raise DomainError(f"resonant mode must be >= 1, got {mode}")
        return cls(lam, mode * math.pi / L)


@dataclass(frozen=True)
class ModeIntegral:
    n: int
    I_plus: complex
    I_minus: Optional[complex]
    J: Optional[complex] = None
    error_estimate: float = 0.0

    @property
    def unitarity_residual(self) -> Optional[float]:
        """|2 Re J - |I+|^2| / |I+|^2, or None when J was not computed."""
        if self.J is None:
            return None
        sq = abs(self.I_plus) ** 2
        diff = abs(2.0 * self.J.real - sq)
        return diff / sq if sq > 0 else diff


@dataclass(frozen=True)
class TransitionResult:
    P1: float
    P2: float
    modes: list = field(repr=False)
    T: float
    truncation_tail: float
    n_max: int
    unitarity_residual: Optional[float] = None
    remainder_estimate: float = float("nan")

    @property
    def density_matrix(self) -> np.ndarray:
        return np.diag([1.0 - self.P2, self.P1])


def mode_function(n: int, space: float, time: float, cavity: CavitySpec) -> complex:
    if not 0.0 <= space <= cavity.L:
        raise DomainError(f"position {space} outside the cavity [0, {cavity.L}]")
    k = cavity.wavenumber(n)
    return complex(np.exp(1j * k * time) * math.sin(k * space))


class _ModeIntegrand:
    """exp(i[sign*Omega*tau + w_n t]) sin(k_n x) dtau/ds on the worldline parameter."""

    def __init__(self, worldline, k, omega, sign=1.0):
        self.worldline = worldline
        self.k = k
        self.omega = omega
        self.sign = sign

    def __call__(self, s):
        w = self.worldline.sample(s)
        ph = self.sign * self.omega * w.tau + self.k * w.time
        return np.exp(1j * ph) * np.sin(self.k * w.space) * w.dtau_ds

    def phase(self, s):
        # The standing wave adds k*x of oscillation on top of the exponential.
        w = self.worldline.sample(s)
        return np.abs(self.omega * w.tau) + self.k * (w.time + w.space)

    def travelling(self, direction):
        """(amplitude, phase) of one travelling-wave half of the standing wave."""

        def amplitude_phase(s):
            w = self.worldline.sample(s)
            return w.dtau_ds, self.sign * self.omega * w.tau + self.k * (w.time + direction * w.space)

        return amplitude_phase


def _integral(worldline, n, s0, s1, cavity, det, quad, sign, method):
    g = _ModeIntegrand(worldline, cavity.wavenumber(n), det.omega, sign)
    try:
        if method == "gk":
            return integrate_1d(g, s0, s1, quad, phase=g.phase)
        # sin(kx) = (e^{ikx} - e^{-ikx}) / 2i
        fwd = integrate_levin(g.travelling(+1.0), s0, s1, quad)
        bwd = integrate_levin(g.travelling(-1.0), s0, s1, quad)
        return QuadratureResult(
            (fwd.value - bwd.value) / 2j,
            0.5 * (fwd.error_estimate + bwd.error_estimate),
            fwd.panels_used + bwd.panels_used,
        )
    except AccuracyError as exc:
        raise AccuracyError(f"mode n={n}: {exc}", best=exc.best) from exc


def _J_config(g, s1, quad):
    # |integrand| <= 1 per unit proper time, so J is a sum of terms of total
    # size T^2; rounding of the (long double) abscissae adds noise growing
    # with the number of oscillations.  Asking for less cannot succeed.
    T = float(g.worldline.sample(np.array([s1])).tau[0])
    turns = float(np.abs(np.diff(g.phase(np.array([0.0, s1])))[0])) / (2.0 * math.pi)
    floor = J_ROUNDOFF * np.finfo(EXTENDED).eps * T * T * max(1.0, turns)
    return replace(quad, abs_tol=max(quad.abs_tol, floor))


def _J(worldline, n, s1, cavity, det, quad):
    g = _ModeIntegrand(worldline, cavity.wavenumber(n), det.omega)
    cfg = _J_config(g, s1, quad)
    try:
        return integrate_triangle_separable(lambda s: np.conj(g(s)), g, s1, cfg, phase=g.phase, extended=True)
    except AccuracyError as exc:
        raise AccuracyError(f"mode n={n} (J): {exc}", best=exc.best) from exc


def compute_mode_integrals(
    n: int,
    worldline,
    T: float,
    cavity: CavitySpec,
    det: DetectorSpec,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    with_J: bool = False,
    with_minus: bool = True,
    method: str = "levin",
) -> ModeIntegral:
    """I_{+,n}, I_{-,n} and (optionally) J_n over the proper-time window [0, T].

    ``method`` selects the single-integral route: ``"levin"`` (collocation on
    the two travelling-wave halves) or ``"gk"`` (phase-partitioned
    Gauss-Kronrod).  J_n always uses iterated Gauss-Kronrod in long double, since
    its unitarity check needs abscissae finer than double spacing.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    if T < 0:
        raise DomainError(f"T must be non-negative, got {T}")
    if n < 1:
        raise DomainError(f"mode index must be >= 1, got {n}")
    if T == 0:
        return ModeIntegral(n, 0j, 0j if with_minus else None, 0j if with_J else None)
    s1 = worldline.parameter_at(T)
    plus = _integral(worldline, n, 0.0, s1, cavity, det, quad, 1.0, method)
    minus = _integral(worldline, n, 0.0, s1, cavity, det, quad, -1.0, method).value if with_minus else None
    J = _J(worldline, n, s1, cavity, det, quad).value if with_J else None
    return ModeIntegral(n, plus.value, minus, J, plus.error_estimate)


# First-order Dyson terms as (detector operator, field operator, coefficient).
_FIRST_ORDER_TERMS = (
    ("raise", "create", lambda mi: mi.I_plus),
    ("lower", "annihilate", lambda mi: np.conj(mi.I_plus)),
    ("lower", "create", lambda mi: mi.I_minus),
    ("raise", "annihilate", lambda mi: np.conj(mi.I_minus)),
)


def excited_amplitude(mi: ModeIntegral, all_terms: bool = False) -> complex:
    """<e, 1_n| U1 |g, 0> up to the factor -i lam / sqrt(w_n L).

    With ``all_terms`` every first-order term is applied to the ground
    state; the ladder-operator rules remove the ones that cannot contribute.
    Otherwise only the sigma+ a^dagger term is used.
    """
    amp = 0j
    for detector_op, field_op, coefficient in _FIRST_ORDER_TERMS:
        if not all_terms and (detector_op, field_op) != ("raise", "create"):
            continue
        # sigma-|g> = 0 and a_n|0> = 0
        if detector_op == "lower" or field_op == "annihilate":
            continue
        amp += coefficient(mi)
    return complex(amp)


def _weight(n, cavity):
    return 1.0 / (cavity.wavenumber(n) * cavity.L)


def _tail(contributions):
    """Share of the partial sum carried by the last TAIL_WINDOW modes."""
    total = math.fsum(contributions)
    if total == 0:
        return 0.0
    return math.fsum(contributions[-TAIL_WINDOW:]) / total


def _remainder(contributions):
    """Relative size of the modes beyond the truncation, extrapolated.

    Fits c_n ~ C n^-p to the last window and sums the power law to infinity.
    Returns nan when the fit is not meaningful.
    """
    c = np.asarray(contributions[-TAIL_WINDOW:], dtype=float)
    total = math.fsum(contributions)
    if len(contributions) < 2 * TAIL_WINDOW or total == 0 or np.any(c <= 0):
        return float("nan")
    n = np.arange(len(contributions) - TAIL_WINDOW + 1, len(contributions) + 1, dtype=float)
    slope, intercept = np.polyfit(np.log(n), np.log(c), 1)
    p = -slope
    if p <= 1.0:
        return float("inf")
    N = float(len(contributions))
    # sum_{n>N} C n^-p ~ C (N + 1/2)^(1-p) / (p - 1)
    log_rem = intercept + (1.0 - p) * math.log(N + 0.5) - math.log(p - 1.0) - math.log(total)
    return math.exp(min(log_rem, 700.0))


def _map_modes(fn, ns, workers):
    if workers and workers > 1 and len(ns) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, ns))
    return [fn(n) for n in ns]


def _check_end(worldline, cavity, tau_end):
    T_full = worldline.transit_time(cavity.L)
    T = T_full if tau_end is None else float(tau_end)
    if not 0.0 <= T <= T_full * (1 + 1e-12):
        raise DomainError(f"tau_end={T} outside [0, transit time {T_full}]")
    return min(T, T_full)


def _mode_table(worldline, cavity, det, quad, taus, all_terms, method, workers):
    """Per-mode integrals at every end time in ``taus`` (ascending).

    Each mode is integrated piecewise between consecutive end times and
    accumulated, so a profile costs the same as its longest transit.
    Returns (modes[point][n-1], contributions[point][n-1], tails, n_max).
    """
    edges = [0.0] + [worldline.parameter_at(t) for t in taus]

    def one(n):
        plus = np.empty(len(taus), dtype=complex)
        minus = np.empty(len(taus), dtype=complex) if all_terms else None
        err = np.empty(len(taus))
        acc_p, acc_m, acc_e = 0j, 0j, 0.0
        for j in range(len(taus)):
            r = _integral(worldline, n, edges[j], edges[j + 1], cavity, det, quad, 1.0, method)
            acc_p += r.value
            acc_e += r.error_estimate
            plus[j] = acc_p
            err[j] = acc_e
            if all_terms:
                acc_m += _integral(worldline, n, edges[j], edges[j + 1], cavity, det, quad, -1.0, method).value
                minus[j] = acc_m
        return [
            ModeIntegral(n, complex(plus[j]), None if minus is None else complex(minus[j]), None, float(err[j]))
            for j in range(len(taus))
        ]

    per_mode: list[list[ModeIntegral]] = []
    n_max = cavity.n_max
    while True:
        # results are stored by mode index, so completion order is irrelevant
        per_mode.extend(_map_modes(one, list(range(len(per_mode) + 1, n_max + 1)), workers))
        modes = [[per_mode[i][j] for i in range(len(per_mode))] for j in range(len(taus))]
        contributions = [
            [abs(excited_amplitude(mi, all_terms)) ** 2 * _weight(mi.n, cavity) for mi in row]
            for row in modes
        ]
        tails = [_tail(c) for c in contributions]
        if max(tails) <= cavity.tail_rel_tol or n_max >= cavity.n_max_limit:
            return modes, contributions, tails, n_max
        n_max = min(2 * n_max, cavity.n_max_limit)


def _raise_truncation(P1, modes, T, tail, n_max, cavity, remainder):
    raise TruncationError(
        f"mode sum tail {tail:.3e} exceeds {cavity.tail_rel_tol:.1e} at n_max={n_max}",
        best=TransitionResult(P1, P1, modes, T, tail, n_max, None, remainder),
    )


def transition_probability(
    worldline,
    cavity: CavitySpec,
    det: DetectorSpec,
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    tau_end: Optional[float] = None,
    verify_modes: int = 0,
    include_counter_terms: bool = False,
    method: str = "levin",
    workers: int = 1,
) -> TransitionResult:
    """Excitation probability after proper time ``tau_end`` inside the cavity.

    ``tau_end`` defaults to the full transit time.  The first ``verify_modes``
    modes also get the double integral J_n; P2 uses it for those modes and
    the trace identity for the rest, and ``unitarity_residual`` reports the
    worst relative mismatch.  ``include_counter_terms`` applies all four
    first-order terms (including the I_- ones) to the initial state instead
    of only the one that survives; the result must not change.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    T = _check_end(worldline, cavity, tau_end)
    modes, contributions, tails, n_max = _mode_table(
        worldline, cavity, det, quad, [T], include_counter_terms, method, workers
    )
    modes, contributions, tail = modes[0], contributions[0], tails[0]
    lam2 = det.lam**2
    P1 = lam2 * math.fsum(contributions)
    remainder = _remainder(contributions)
    if tail > cavity.tail_rel_tol:
        _raise_truncation(P1, modes, T, tail, n_max, cavity, remainder)

    residual = None
    p2_terms = list(contributions)
    if verify_modes and T > 0:
        s1 = worldline.parameter_at(T)
        for i in range(min(verify_modes, len(modes))):
            mi = modes[i]
            mi = replace(mi, J=_J(worldline, mi.n, s1, cavity, det, quad).value)
            modes[i] = mi
            p2_terms[i] = 2.0 * mi.J.real * _weight(mi.n, cavity)
            r = mi.unitarity_residual
            residual = r if residual is None else max(residual, r)
    P2 = lam2 * math.fsum(p2_terms)
    return TransitionResult(P1, P2, modes, T, tail, n_max, residual, remainder)


def transit_profile(
    worldline,
    cavity: CavitySpec,
    det: DetectorSpec,
    taus: Sequence[float],
    quad: QuadratureConfig = DEFAULT_QUADRATURE,
    method: str = "levin",
    workers: int = 1,
) -> list[TransitionResult]:
    """Excitation probability at each of the ascending end times ``taus``.

    One mode-sum truncation is shared by all points and must satisfy the
    tail test at each of them.  P2 is set from the trace identity.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}, got {method!r}")
    taus = [_check_end(worldline, cavity, t) for t in taus]
    if any(b < a for a, b in zip(taus, taus[1:])):
        raise DomainError("profile end times must be ascending")
    if not taus:
        return []
    modes, contributions, tails, n_max = _mode_table(
        worldline, cavity, det, quad, taus, False, method, workers
    )
    lam2 = det.lam**2
    out = []
    for T, row, c, tail in zip(taus, modes, contributions, tails):
        P1 = lam2 * math.fsum(c)
        remainder = _remainder(c)
        if tail > cavity.tail_rel_tol:
            _raise_truncation(P1, row, T, tail, n_max, cavity, remainder)
        out.append(TransitionResult(P1, P1, row, T, tail, n_max, None, remainder))
    return out

"""Independent reference computations used by several test modules."""

import math

import numpy as np


def cycloid_theta(tau, R, m, iterations=80):
    """Vectorised bisection for theta in tau = sqrt(R^3/8m)(theta + sin theta)."""
    tau = np.asarray(tau, dtype=float)
    scale = math.sqrt(R**3 / (8.0 * m))
    lo = np.zeros_like(tau)
    hi = np.full_like(tau, math.pi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = scale * (mid + np.sin(mid)) < tau
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def riemann_mode_integral(R, m, L, n, omega, panels=1_000_000):
    """Midpoint sum in proper time of exp(i[Omega tau + w_n t']) sin(k_n r') for free fall.

    Positions come from the cycloid and the closed-form cavity-frame time,
    evaluated at theta obtained by bisection; no adaptive machinery involved.
    """
    f = 1.0 - 2.0 * m / R
    theta_T = 2.0 * math.asin(math.sqrt(L * math.sqrt(f) / R))
    scale = math.sqrt(R**3 / (8.0 * m))
    T = scale * (theta_T + math.sin(theta_T))
    h = T / panels
    tau = (np.arange(panels) + 0.5) * h
    th = cycloid_theta(tau, R, m)
    space = R * np.sin(th / 2) ** 2 / math.sqrt(f)
    tH = math.sqrt(R / (2 * m) - 1.0)
    t_half = np.tan(th / 2)
    time = f * math.sqrt(R**3 / (2 * m)) * (0.5 * (th + np.sin(th)) + (2 * m / R) * th) + math.sqrt(
        f
    ) * 2 * m * np.log((tH + t_half) / (tH - t_half))
    k = n * math.pi / L
    return complex(np.sum(np.exp(1j * (omega * tau + k * time)) * np.sin(k * space)) * h)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavity_detector.detector_response import CavitySpec, DetectorSpec, compute_mode_integrals
from cavity_detector.errors import AccuracyError, DomainError
from cavity_detector.kinematics import FreeFallWorldline, SchwarzschildBackground
from cavity_detector.numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    find_root,
    integrate_1d,
    integrate_levin,
    integrate_triangle,
    integrate_triangle_separable,
)

from oracles import riemann_mode_integral


def within_tolerance(res, cfg=DEFAULT_QUADRATURE):
    return res.error_estimate <= max(cfg.abs_tol, cfg.rel_tol * abs(res.value))


# ---------------------------------------------------------------- config


@pytest.mark.parametrize(
    "kwargs",
    [
        {"abs_tol": 0.0},
        {"rel_tol": -1.0},
        {"max_subdivisions": 0},
        {"max_subdivisions": 2.5},
        {"max_phase_per_panel": 0.0},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(DomainError):
        QuadratureConfig(**kwargs)


# ---------------------------------------------------------------- integrate_1d


def test_exponential_closed_form():
    res = integrate_1d(lambda t: np.exp(1j * t), 0.0, 1.0)
    assert res.value == pytest.approx(complex(math.sin(1.0), 1.0 - math.cos(1.0)), abs=1e-13)
    assert abs(res.value - complex(0.841471, 0.459698)) < 1e-6
    assert within_tolerance(res)


def test_empty_interval():
    res = integrate_1d(lambda t: np.exp(1j * t) / 0.0, 2.0, 2.0)
    assert res.value == 0 and res.error_estimate == 0


def test_reversed_limits_rejected():
    with pytest.raises(DomainError):
        integrate_1d(np.cos, 1.0, 0.0)


def test_highly_oscillatory_with_phase_hint():
    w = 2000.0
    res = integrate_1d(lambda t: np.exp(1j * w * t) * t, 0.0, 3.0, phase=lambda t: w * t)
    # int t e^{iwt} = e^{iwt}(1 - iwt)/w^2 ... evaluated by hand
    exact = (np.exp(1j * w * 3.0) * (1 - 1j * w * 3.0) - 1.0) / w**2
    assert abs(res.value - exact) < 1e-12
    assert res.panels_used >= 3 * w / DEFAULT_QUADRATURE.max_phase_per_panel


def test_budget_exhaustion_carries_best_estimate():
    cfg = QuadratureConfig(max_subdivisions=3)
    with pytest.raises(AccuracyError) as info:
        integrate_1d(lambda t: np.exp(1j * 300.0 * t**2), 0.0, 4.0, cfg)
    assert info.value.best is not None
    assert info.value.best.panels_used <= 3


def test_unreachable_tolerance_is_reported():
    cfg = QuadratureConfig(abs_tol=1e-30, rel_tol=1e-30)
    with pytest.raises(AccuracyError):
        integrate_1d(lambda t: 1e6 * np.exp(1j * 40 * t), 0.0, 10.0, cfg)


def test_riemann_oracle_for_resonant_mode():
    # I_{+,6} of free fall through L=5 at R=10, evaluated on the cycloid
    # parameter and compared with a fixed-step proper-time sum.
    bg = SchwarzschildBackground(1.0, 10.0)
    wl = FreeFallWorldline(bg)
    L = 5.0
    omega = 6 * math.pi / L
    T = wl.transit_time(L)
    gk = compute_mode_integrals(6, wl, T, CavitySpec(L), DetectorSpec(0.01, omega), method="gk")
    oracle = riemann_mode_integral(10.0, 1.0, L, 6, omega)
    assert abs(gk.I_plus - oracle) <= 1e-6 * abs(oracle)


_smooth = st.tuples(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 30.0), st.floats(-2, 2)
)


def _make(c):
    a, b, w, p = c
    return lambda t: a * np.cos(w * t + p) + 1j * b * np.exp(-t * t) + a * b * t**2


@settings(max_examples=30, deadline=None)
@given(_smooth, _smooth, st.floats(-2, 2), st.floats(-2, 2))
def test_linearity(cf, cg, alpha, beta):
    f, g = _make(cf), _make(cg)
    lhs = integrate_1d(lambda t: alpha * f(t) + beta * g(t), 0.0, 2.0)
    rf, rg = integrate_1d(f, 0.0, 2.0), integrate_1d(g, 0.0, 2.0)
    tol = 10 * (lhs.error_estimate + abs(alpha) * rf.error_estimate + abs(beta) * rg.error_estimate) + 1e-14
    assert abs(lhs.value - (alpha * rf.value + beta * rg.value)) <= tol


@settings(max_examples=30, deadline=None)
@given(_smooth, st.floats(0.05, 0.95))
def test_interval_additivity(cf, frac):
    f = _make(cf)
    a, b = -1.0, 3.0
    c = a + frac * (b - a)
    whole = integrate_1d(f, a, b)
    left, right = integrate_1d(f, a, c), integrate_1d(f, c, b)
    tol = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-14
    assert abs(whole.value - left.value - right.value) <= 10 * tol


# ---------------------------------------------------------------- Levin


@pytest.mark.parametrize("w", [5.0, 300.0, 2e4])
def test_levin_matches_closed_form(w):
    res = integrate_levin(lambda s: (np.cos(s), w * s), 0.0, 2.0)
    # int cos(s) e^{iws} ds = [e^{iws}(iw cos s + sin s)] / (1 - w^2)
    F = lambda s: np.exp(1j * w * s) * (1j * w * np.cos(s) + np.sin(s)) / (1 - w * w)
    assert abs(res.value - (F(2.0) - F(0.0))) < 1e-12
    assert within_tolerance(res)


def test_levin_handles_stationary_phase():
    # psi' changes sign at 0, so the panel containing it falls back to
    # Clenshaw-Curtis; the Fresnel integral checks the result.
    res = integrate_levin(lambda s: (np.ones_like(s), 50.0 * s * s), -1.0, 1.0)
    ref = integrate_1d(lambda s: np.exp(1j * 50.0 * s * s), -1.0, 1.0, phase=lambda s: 50.0 * s * s)
    assert abs(res.value - ref.value) < 1e-11


def test_levin_agrees_with_gauss_kronrod_on_chirp():
    amp_phase = lambda s: (1.0 / (1.0 + s), 40.0 * s + 15.0 * s**2)
    lev = integrate_levin(amp_phase, 0.0, 3.0)
    gk = integrate_1d(lambda s: np.exp(1j * amp_phase(s)[1]) * amp_phase(s)[0], 0.0, 3.0,
                      phase=lambda s: amp_phase(s)[1])
    assert abs(lev.value - gk.value) < 1e-11


def test_levin_empty_interval():
    assert integrate_levin(lambda s: (s, s), 1.0, 1.0).value == 0


# ---------------------------------------------------------------- triangle


def test_triangle_constant():
    res = integrate_triangle(lambda t, t1: np.ones_like(t1, dtype=complex), 2.0)
    assert res.value == pytest.approx(2.0, abs=1e-12)


def test_triangle_empty():
    assert integrate_triangle(lambda t, t1: t1, 0.0).value == 0
    assert integrate_triangle_separable(np.cos, np.cos, 0.0).value == 0


def test_triangle_negative_size_rejected():
    with pytest.raises(DomainError):
        integrate_triangle(lambda t, t1: t1, -1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(0.1, 8.0), st.floats(-1.0, 1.0))
def test_triangle_of_product_is_half_square(T, w, c):
    h = lambda t: np.cos(w * t) + c * t
    full = integrate_1d(h, 0.0, T).value
    general = integrate_triangle(lambda t, t1: h(t) * h(t1), T)
    separable = integrate_triangle_separable(h, h, T)
    assert general.value == pytest.approx(full * full / 2, abs=1e-10)
    assert separable.value == pytest.approx(full * full / 2, abs=1e-10)


def test_triangle_non_separable_against_closed_form():
    # int_0^1 int_0^t (t - t1) dt1 dt = 1/6
    res = integrate_triangle(lambda t, t1: (t - t1).astype(complex), 1.0)
    assert res.value == pytest.approx(1 / 6, abs=1e-12)


# ---------------------------------------------------------------- find_root


def test_root_sqrt2():
    assert find_root(lambda x: x * x - 2, 1.0, 2.0, 1e-12) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert abs(find_root(lambda x: x * x - 2, 1.0, 2.0) - 1.414213562) < 1e-9


def test_root_at_endpoint():
    assert find_root(lambda x: x - 1.0, 1.0, 5.0) == 1.0
    assert find_root(lambda x: x - 5.0, 1.0, 5.0) == 5.0


def test_root_bad_bracket():
    with pytest.raises(DomainError):
        find_root(lambda x: x * x + 1, -1.0, 1.0)


def test_cycloid_root():
    scale = math.sqrt(125.0)
    theta = find_root(lambda th: scale * (th + math.sin(th)) - 27.50, 0.0, math.pi, 1e-12)
    assert theta == pytest.approx(1.465, abs=1e-3)
    # forward map round trip
    assert scale * (theta + math.sin(theta)) == pytest.approx(27.50, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 3.0))
def test_root_round_trip_monotone(c, k):
    g = lambda x: x**3 + k * x - c
    x = find_root(g, -10.0, 10.0, 1e-12)
    # the bracket [x - tol, x + tol] still contains the sign change
    assert g(x - 1e-12) <= 0 <= g(x + 1e-12) or abs(g(x)) < 1e-10

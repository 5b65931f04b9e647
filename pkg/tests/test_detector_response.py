import math

import numpy as np
import pytest

from cavity_detector.detector_response import (
    CavitySpec,
    DetectorSpec,
    ModeIntegral,
    compute_mode_integrals,
    excited_amplitude,
    mode_function,
    transit_profile,
    transition_probability,
)
from cavity_detector.errors import DomainError, TruncationError
from cavity_detector.kinematics import (
    FreeFallWorldline,
    RindlerWorldline,
    SchwarzschildBackground,
    WorldlineSample,
    matched_acceleration,
)

LAM = 0.01
L5 = 5.0
DET5 = DetectorSpec.resonant(LAM, L5, 6)


class UniformWorldline:
    """Inertial detector entering at x = 0 with speed v; has closed-form mode integrals."""

    def __init__(self, v):
        self.v = v
        self.gamma = 1.0 / math.sqrt(1.0 - v * v)

    def transit_time(self, L):
        return L / (self.v * self.gamma)

    def parameter_at(self, tau):
        return float(tau)

    def sample(self, tau):
        tau = np.asarray(tau, dtype=float)
        g = self.gamma
        return WorldlineSample(tau, self.v * g * tau, g * tau, np.ones_like(tau))

    def exact(self, n, T, L, omega, sign=1.0):
        k = n * math.pi / L
        b = sign * omega + k * self.gamma
        c = k * self.v * self.gamma
        piece = lambda q: (np.exp(1j * q * T) - 1.0) / (1j * q)
        return (piece(b + c) - piece(b - c)) / 2j


@pytest.fixture(scope="module")
def freefall_result():
    wl = FreeFallWorldline(SchwarzschildBackground(1.0, 10.0))
    return transition_probability(wl, CavitySpec(L5), DET5, verify_modes=4)


@pytest.fixture(scope="module")
def rindler_result():
    a = matched_acceleration(SchwarzschildBackground(1.0, 10.0), L5)
    return transition_probability(RindlerWorldline(a), CavitySpec(L5), DET5, verify_modes=4)


# ---------------------------------------------------------------- specs


def test_specs_validate():
    with pytest.raises(DomainError):
        CavitySpec(0.0)
    with pytest.raises(DomainError):
        CavitySpec(1.0, n_max=0)
    with pytest.raises(DomainError):
        CavitySpec(1.0, n_max=64, n_max_limit=32)
    with pytest.raises(DomainError):
        DetectorSpec(0.0, 1.0)
    with pytest.raises(DomainError):
        DetectorSpec(0.1, -1.0)
    with pytest.raises(DomainError):
        DetectorSpec.resonant(0.1, 1.0, 0)
    assert DetectorSpec.resonant(0.1, 5.0, 6).omega == pytest.approx(6 * math.pi / 5)


def test_mode_function():
    cav = CavitySpec(L5)
    assert mode_function(3, 0.0, 1.0, cav) == 0
    assert abs(mode_function(3, L5, 1.0, cav)) < 1e-15
    u = mode_function(1, 2.5, 0.7, cav)
    assert u == pytest.approx(np.exp(1j * math.pi / 5 * 0.7))
    with pytest.raises(DomainError):
        mode_function(1, 5.5, 0.0, cav)


# ---------------------------------------------------------------- mode integrals


def test_zero_interaction_time(freefall10):
    mi = compute_mode_integrals(6, freefall10, 0.0, CavitySpec(L5), DET5, with_J=True)
    assert mi.I_plus == 0 and mi.I_minus == 0 and mi.J == 0
    res = transition_probability(freefall10, CavitySpec(L5), DET5, tau_end=0.0)
    assert res.P1 == 0 and res.P2 == 0


@pytest.mark.parametrize("method", ["levin", "gk"])
@pytest.mark.parametrize("n", [1, 6, 40])
def test_uniform_worldline_closed_form(method, n):
    wl = UniformWorldline(0.3)
    T = wl.transit_time(L5)
    mi = compute_mode_integrals(n, wl, T, CavitySpec(L5), DET5, method=method)
    assert abs(mi.I_plus - wl.exact(n, T, L5, DET5.omega)) < 1e-11
    assert abs(mi.I_minus - wl.exact(n, T, L5, DET5.omega, -1.0)) < 1e-11


@pytest.mark.parametrize("n", [1, 6, 30])
def test_unitarity_identity(freefall10, n):
    T = freefall10.transit_time(L5)
    mi = compute_mode_integrals(n, freefall10, T, CavitySpec(L5), DET5, with_J=True)
    assert mi.unitarity_residual < 1e-8


def test_unitarity_identity_rindler(rindler10):
    T = rindler10.transit_time(L5)
    mi = compute_mode_integrals(6, rindler10, T, CavitySpec(L5), DET5, with_J=True)
    assert mi.unitarity_residual < 1e-8


@pytest.mark.parametrize("n", [1, 11])
@pytest.mark.parametrize("kind", ["freefall", "rindler"])
def test_unitarity_far_off_resonance(kind, n):
    # long transit with phases of several hundred radians; double precision
    # abscissae alone leave residuals near 1e-8 here
    bg = SchwarzschildBackground(1.0, 100.0)
    L = 4.0
    wl = FreeFallWorldline(bg) if kind == "freefall" else RindlerWorldline(matched_acceleration(bg, L, "middle"))
    det = DetectorSpec(LAM, 7 * math.pi / L)
    mi = compute_mode_integrals(n, wl, wl.transit_time(L), CavitySpec(L), det, with_J=True)
    assert mi.unitarity_residual < 1e-9


@pytest.mark.parametrize("n", [1, 6, 200])
def test_levin_agrees_with_gk(freefall10, n):
    T = freefall10.transit_time(L5)
    lev = compute_mode_integrals(n, freefall10, T, CavitySpec(L5), DET5)
    gk = compute_mode_integrals(n, freefall10, T, CavitySpec(L5), DET5, method="gk")
    assert abs(lev.I_plus - gk.I_plus) <= 1e-10 * max(abs(gk.I_plus), 1e-6)
    assert abs(lev.I_minus - gk.I_minus) <= 1e-10 * max(abs(gk.I_minus), 1e-6)


def test_mode_integral_domain(freefall10):
    cav = CavitySpec(L5)
    with pytest.raises(DomainError):
        compute_mode_integrals(0, freefall10, 1.0, cav, DET5)
    with pytest.raises(DomainError):
        compute_mode_integrals(1, freefall10, -1.0, cav, DET5)
    with pytest.raises(DomainError):
        compute_mode_integrals(1, freefall10, 1.0, cav, DET5, method="simpson")


def test_counter_terms_drop_out():
    mi = ModeIntegral(3, 0.2 + 0.1j, -0.7 + 2.0j)
    assert excited_amplitude(mi) == excited_amplitude(mi, all_terms=True) == mi.I_plus


# ---------------------------------------------------------------- transition probability


def test_freefall_baseline(freefall_result):
    r = freefall_result
    assert r.P1 == pytest.approx(5.1161149e-08, rel=1e-6)
    assert r.T == pytest.approx(27.50, abs=0.01)
    assert r.truncation_tail <= 1e-6
    assert r.unitarity_residual < 1e-8
    assert r.P2 == pytest.approx(r.P1, rel=1e-8)
    assert 0 < r.P1 < 1


def test_rindler_baseline(rindler_result, freefall_result):
    r = rindler_result
    assert r.P1 == pytest.approx(4.0453188612e-08, rel=1e-6)
    assert r.T == pytest.approx(29.77, abs=0.01)
    assert r.unitarity_residual < 1e-8
    # same order of magnitude as free fall, differing by tens of percent
    assert 0.5 < freefall_result.P1 / r.P1 < 2.0


def test_density_matrix(freefall_result):
    rho = freefall_result.density_matrix
    assert rho.shape == (2, 2)
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-15 + freefall_result.P1 * 1e-8)
    assert rho[1, 1] == freefall_result.P1 and rho[0, 1] == 0


def test_truncation_converged(freefall_result):
    wl = FreeFallWorldline(SchwarzschildBackground(1.0, 10.0))
    n = 2 * freefall_result.n_max
    doubled = transition_probability(wl, CavitySpec(L5, n_max=n, n_max_limit=n), DET5)
    assert abs(doubled.P1 - freefall_result.P1) <= 1e-3 * freefall_result.P1


def test_truncation_error_carries_best(freefall10):
    with pytest.raises(TruncationError) as info:
        transition_probability(freefall10, CavitySpec(L5, n_max=32, n_max_limit=32), DET5)
    best = info.value.best
    assert best.n_max == 32 and best.truncation_tail > 1e-6
    assert 0 < best.P1 < 5.2e-8


def test_coupling_scaling(rindler10):
    cav = CavitySpec(L5)
    small = transition_probability(rindler10, cav, DetectorSpec(0.01, DET5.omega), tau_end=8.0)
    large = transition_probability(rindler10, cav, DetectorSpec(0.03, DET5.omega), tau_end=8.0)
    assert large.P1 / small.P1 == pytest.approx(9.0, rel=1e-12)


def test_counter_terms_leave_probability_unchanged(rindler10):
    cav = CavitySpec(L5)
    plain = transition_probability(rindler10, cav, DET5, tau_end=8.0)
    full = transition_probability(rindler10, cav, DET5, tau_end=8.0, include_counter_terms=True)
    assert full.P1 == plain.P1


def test_workers_are_deterministic(freefall10):
    cav = CavitySpec(L5)
    one = transition_probability(freefall10, cav, DET5, tau_end=10.0)
    many = transition_probability(freefall10, cav, DET5, tau_end=10.0, workers=3)
    assert one.P1 == many.P1 and one.n_max == many.n_max


def test_tau_end_bounds(freefall10):
    with pytest.raises(DomainError):
        transition_probability(freefall10, CavitySpec(L5), DET5, tau_end=40.0)
    with pytest.raises(DomainError):
        transition_probability(freefall10, CavitySpec(L5), DET5, tau_end=-1.0)
    with pytest.raises(DomainError):
        transition_probability(freefall10, CavitySpec(L5), DET5, method="x")


# ---------------------------------------------------------------- profiles


def test_profile_matches_single_transits(rindler10):
    cav = CavitySpec(L5)
    taus = [0.0, 4.0, 9.0]
    prof = transit_profile(rindler10, cav, DET5, taus)
    assert prof[0].P1 == 0
    for t, r in zip(taus[1:], prof[1:]):
        single = transition_probability(rindler10, CavitySpec(L5, n_max=r.n_max, n_max_limit=r.n_max), DET5, tau_end=t)
        assert r.P1 == pytest.approx(single.P1, rel=1e-9)
        assert r.P2 == r.P1


def test_profile_rejects_descending(rindler10):
    with pytest.raises(DomainError):
        transit_profile(rindler10, CavitySpec(L5), DET5, [5.0, 2.0])
    assert transit_profile(rindler10, CavitySpec(L5), DET5, []) == []

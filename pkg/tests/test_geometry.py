import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from adhoccap.geometry import (Arena, DistanceModel, PathLossModel, async_cond_mean_gain,
                               cond_mean_gain, distance_cdf, gain_cdf, gain_from_distance,
                               gain_pdf, mean_gain, near_field_boundary, prob_from_range,
                               prob_from_threshold, threshold_from_prob)
from adhoccap.numerics import DomainError

EXACT = DistanceModel.EXACT_UNIFORM_SQUARE
GAUSS = DistanceModel.GAUSSIAN_APPROX

# sup |F_exact - F_gauss| on a 10^4-point grid over [0, sqrt(2) b]; scale-free in b
CDF_GAP = 0.05204560104892


def interference_integral(a, gamma, h_i):
    """E[H|h_i] straight from its defining integral over the gain support."""
    mpmath.mp.dps = 30
    C = a.C
    f = lambda h: C * h_i / (h * (h_i + h * gamma)) * mpmath.exp(-C / h)
    return float(mpmath.quad(f, [a.h_min, 1e-3, 1e-2, 1e-1, a.h_max]))


@settings(max_examples=100)
@given(b=st.floats(0.5, 1e3), lam=st.floats(1e-3, 0.3), k=st.floats(0.5, 10))
def test_arena_invariants(b, lam, k):
    a = Arena(b, lam, k)
    assert a.delta_m == 1.0
    assert a.d_m == lam
    assert a.d_M == pytest.approx(math.sqrt(2) * b)
    assert a.C == k**2 * lam**2 / (4 * b**2)
    assert a.delta_M**2 * a.C == pytest.approx(k**2 / 2, rel=1e-14)
    assert a.xi_max == k**2 / 2


def test_arena_rejects_bad_geometry():
    with pytest.raises(ValueError):
        Arena(b=0)
    with pytest.raises(ValueError):
        Arena(lam=-0.1)
    with pytest.raises(ValueError):
        Arena(b=0.01, lam=0.1)


def test_arena_sigma(arena):
    assert arena.sigma1 == pytest.approx(6 / 3.5)


def test_near_field_boundary(arena):
    d1, d2 = near_field_boundary(PathLossModel(arena.lam / 2, 1.0, 1.0), arena)
    assert d1 == pytest.approx(arena.lam / 2)
    assert d2 == pytest.approx(40.0)
    d1, _ = near_field_boundary(PathLossModel(arena.lam), arena)
    assert d1 == pytest.approx(2 * arena.lam)


def test_path_loss_model_validation():
    with pytest.raises(ValueError):
        PathLossModel(0.05, h_t=0)


@pytest.mark.parametrize("d, h", [(0.1, 1.0), (0.2, 0.25), (math.sqrt(2) * 6, 0.01 / 72)])
def test_gain_from_distance(arena, d, h):
    assert gain_from_distance(arena, d) == pytest.approx(h, rel=1e-12)


def test_gain_from_distance_domain(arena):
    with pytest.raises(DomainError):
        gain_from_distance(arena, 0.0)


def test_distance_cdf_examples(arena):
    assert distance_cdf(arena, EXACT, 0.0) == 0.0
    assert distance_cdf(arena, GAUSS, 0.0) == 0.0
    assert distance_cdf(arena, EXACT, math.sqrt(2) * arena.b) == 1.0
    assert distance_cdf(arena, EXACT, 100.0) == 1.0
    median = 2 * arena.b / arena.k * math.sqrt(math.log(2))
    assert distance_cdf(arena, GAUSS, median) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("model", [EXACT, GAUSS])
def test_distance_cdf_monotone(arena, model):
    xs = np.linspace(0, 2 * arena.b, 2001)
    vals = [distance_cdf(arena, model, x) for x in xs]
    assert np.all(np.diff(vals) >= -1e-15)
    assert 0 <= min(vals) and max(vals) <= 1


@pytest.mark.parametrize("x", [1.0, math.sqrt(2)])
def test_exact_cdf_continuous_at_branch_points(arena, x):
    d = x * arena.b
    left = distance_cdf(arena, EXACT, d * (1 - 1e-12))
    right = distance_cdf(arena, EXACT, d * (1 + 1e-12))
    assert abs(left - right) < 1e-9


def test_exact_cdf_matches_sampling():
    rng = np.random.default_rng(7)
    p = rng.uniform(0, 1, (200_000, 2, 2))
    d = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    a = Arena(b=1.0, lam=0.01)
    for x in (0.3, 0.8, 1.2):
        assert distance_cdf(a, EXACT, x) == pytest.approx(np.mean(d <= x), abs=4e-3)


@pytest.mark.parametrize("b", [6.0, 20.0])
def test_gaussian_approximation_gap(b):
    a = Arena(b=b)
    xs = np.linspace(0, math.sqrt(2) * b, 10_000)
    gap = max(abs(distance_cdf(a, EXACT, x) - distance_cdf(a, GAUSS, x)) for x in xs)
    assert gap == pytest.approx(CDF_GAP, abs=1e-9)


def test_gain_cdf_examples(arena):
    assert gain_cdf(arena, 1e9) == pytest.approx(1.0)
    # P(d <= d_m) and P(d >= d_M) in the running example
    assert 1 - gain_cdf(arena, 1.0) == pytest.approx(8.5033e-4, rel=1e-4)
    assert gain_cdf(arena, 1 / arena.delta_M**2) == pytest.approx(0.0022, abs=5e-5)


@pytest.mark.parametrize("h", [1e-4, 5e-4, 1e-3, 0.01, 0.5])
def test_gain_pdf_is_derivative(arena, h):
    step = 1e-6 * h
    fd = (gain_cdf(arena, h + step) - gain_cdf(arena, h - step)) / (2 * step)
    assert gain_pdf(arena, h) == pytest.approx(fd, rel=1e-6)


def test_gain_pdf_integrates_over_support(arena):
    total, _ = integrate.quad(lambda h: gain_pdf(arena, h), arena.h_min, arena.h_max,
                              points=[1e-3, 1e-2], limit=200)
    expected = gain_cdf(arena, arena.h_max) - gain_cdf(arena, arena.h_min)
    assert total == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_gain_laws_domain(arena, bad):
    with pytest.raises(DomainError):
        gain_cdf(arena, bad)
    with pytest.raises(DomainError):
        gain_pdf(arena, bad)


def test_mean_gain_value(arena):
    C = arena.C
    oracle = C * float(mpmath.quad(lambda t: mpmath.exp(-t) / t, [arena.xi_min, 1, arena.xi_max]))
    assert mean_gain(arena) == pytest.approx(oracle, rel=1e-12)
    assert mean_gain(arena) == pytest.approx(5.52e-3, rel=1e-3)


def test_mean_gain_monte_carlo(arena):
    # Gaussian-model distances are Rayleigh with sigma^2 = 2 b^2 / k^2
    rng = np.random.default_rng(11)
    d = rng.rayleigh(scale=math.sqrt(2) * arena.b / arena.k, size=10_000_000)
    inside = (d >= arena.d_m) & (d <= arena.d_M)
    h = np.where(inside, arena.lam**2 / np.where(inside, d, 1.0) ** 2, 0.0)
    assert h.mean() == pytest.approx(mean_gain(arena), rel=0.01)
    assert h[inside].mean() == pytest.approx(mean_gain(arena), rel=0.01)


def test_mean_gain_degenerate_support():
    # k chosen so xi_max == xi_min: empty support
    a = Arena(b=6.0, lam=0.1, k=3.5)
    object.__setattr__(a, "k", math.sqrt(2 * a.C))
    assert mean_gain(a) == 0.0


def test_cond_mean_gain_value(arena):
    got = cond_mean_gain(arena, 5.0, 9.143e-4)
    assert got == pytest.approx(interference_integral(arena, 5.0, 9.143e-4), rel=1e-9)
    assert got == pytest.approx(1.54e-4, rel=1e-2)


@pytest.mark.parametrize("h_i", [1e-5, 3e-4, 1e-3, 0.05, 1.0])
def test_cond_mean_gain_against_interference_integral(arena, h_i):
    assert cond_mean_gain(arena, 5.0, h_i) == pytest.approx(interference_integral(arena, 5.0, h_i), rel=1e-9)


def test_cond_mean_gain_limits(arena):
    E_H = mean_gain(arena)
    assert cond_mean_gain(arena, 0.0, 1e-3) == pytest.approx(E_H, rel=1e-12)
    assert cond_mean_gain(arena, 1e-12, 1e-3) == pytest.approx(E_H, rel=1e-6)
    assert cond_mean_gain(arena, 5.0, 1e12) == pytest.approx(E_H, rel=1e-6)


def test_cond_mean_gain_monotone(arena):
    gammas = np.linspace(0.1, 20, 50)
    by_gamma = [cond_mean_gain(arena, g, 1e-3) for g in gammas]
    assert np.all(np.diff(by_gamma) < 0)
    gains = np.logspace(-6, 0, 50)
    by_gain = [cond_mean_gain(arena, 5.0, h) for h in gains]
    assert np.all(np.diff(by_gain) > 0)


def test_cond_mean_gain_tiny_own_gain_is_finite(arena):
    val = cond_mean_gain(arena, 5.0, 1e-12)
    assert 0 < val < 1e-12


def test_async_cond_mean_gain_gamma_zero(arena):
    assert async_cond_mean_gain(arena, 0.0, 1e-3) == pytest.approx(mean_gain(arena), rel=1e-10)


def test_async_cond_mean_gain_symmetry(arena):
    h_i, g = 1e-3, 5.0

    def half(tau):
        shift = arena.C * g * tau / h_i
        return arena.C * tau * math.exp(shift) * float(
            mpmath.e1(arena.xi_min + shift) - mpmath.e1(arena.xi_max + shift))

    one_sided, _ = integrate.quad(half, 0, 1, epsabs=1e-15, limit=200)
    assert async_cond_mean_gain(arena, g, h_i) == pytest.approx(2 * one_sided, rel=1e-9)


def test_async_cond_mean_gain_monte_carlo(arena):
    h_i, g = 1e-3, 5.0
    rng = np.random.default_rng(3)
    tau = rng.uniform(0, 1, 100_000)
    vals = [cond_mean_gain(arena, g * t, h_i) * t + cond_mean_gain(arena, g * (1 - t), h_i) * (1 - t)
            for t in tau[:20_000]]
    mc = np.mean(vals)
    se = np.std(vals) / math.sqrt(len(vals))
    got = async_cond_mean_gain(arena, g, h_i)
    assert got > 0 and math.isfinite(got)
    assert abs(got - mc) < 4 * se


def test_async_custom_delay_density(arena):
    # delays piled at the symbol edges look more synchronous than uniform ones
    edge = lambda tau: 12 * (tau - 0.5) ** 2
    val = async_cond_mean_gain(arena, 5.0, 1e-3, delay_density=edge)
    assert cond_mean_gain(arena, 5.0, 1e-3) < val < async_cond_mean_gain(arena, 5.0, 1e-3)


def test_threshold_probability_examples(arena):
    assert threshold_from_prob(arena, 1 - math.exp(-1)) == pytest.approx(arena.C, rel=1e-12)
    assert prob_from_threshold(arena, 5.6638e-4) == pytest.approx(0.7773, abs=5e-5)
    assert threshold_from_prob(arena, 1e-300) > 1e200


@settings(max_examples=200)
@given(st.floats(1e-8, 1e3))
def test_threshold_probability_inverse(T):
    a = Arena()
    p = prob_from_threshold(a, T)
    if 0 < p < 1:
        assert threshold_from_prob(a, p) == pytest.approx(T, rel=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_threshold_from_prob_domain(arena, p):
    with pytest.raises(DomainError):
        threshold_from_prob(arena, p)


def test_prob_from_range(arena):
    assert prob_from_range(arena, math.sqrt(2) * arena.b / 2) == pytest.approx(
        1 - math.exp(-arena.k**2 / 8), rel=1e-14)
    assert prob_from_range(arena, 1e-9) < 1e-15
    assert prob_from_range(arena, 1e6) == 1.0

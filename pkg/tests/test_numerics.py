import math

import numpy as np
import pytest
from scipy import stats

from blochphase.errors import DomainError, QuadratureError
from blochphase.numerics import (GaussianStream, QuadratureOptions, adaptive_quadrature,
                                 gaussian_expectation, gaussian_sampler, loglog_slope_fit,
                                 plateau_crossover)


def test_polynomial_and_sine():
    v, e = adaptive_quadrature(lambda x: x * x, 0, 1)
    assert abs(v - 1 / 3) < 1e-12
    v, e = adaptive_quadrature(math.sin, 0, math.pi)
    assert abs(v - 2) < 1e-12


def test_square_root_kernel_against_antiderivative():
    k = 0.1
    exact = 2 / (3 * k) * (1 - (1 - k * math.pi) ** 1.5)
    v, _ = adaptive_quadrature(lambda p: math.sqrt(1 - k * p), 0, math.pi)
    assert abs(v - exact) < 1e-10


def test_endpoint_square_root_singularity():
    # radicand vanishes at the upper limit
    k = 1 / math.pi
    exact = 2 / (3 * k)
    v, _ = adaptive_quadrature(lambda p: math.sqrt(max(0.0, 1 - k * p)), 0, math.pi)
    assert abs(v - exact) < 1e-10


def test_vectorized_matches_scalar():
    a = adaptive_quadrature(np.exp, -1, 2, vectorized=True)
    b = adaptive_quadrature(math.exp, -1, 2)
    assert a == b


def test_bad_limits_and_nonconvergence():
    with pytest.raises(DomainError):
        adaptive_quadrature(math.sin, 1, 1)
    with pytest.raises(DomainError):
        adaptive_quadrature(math.sin, 0, math.inf)
    with pytest.raises(QuadratureError):
        adaptive_quadrature(lambda x: math.sin(1 / x), 1e-9, 1,
                            QuadratureOptions(max_subdivisions=8))
    with pytest.raises(DomainError):
        QuadratureOptions(max_subdivisions=4)


# (integrand, a, b, exact)
ANALYTIC = [
    (lambda x: x ** 5, 0, 2, 64 / 6),
    (math.exp, 0, 1, math.e - 1),
    (math.cos, 0, math.pi / 2, 1.0),
    (lambda x: 1 / (1 + x * x), -1, 1, math.pi / 2),
    (lambda x: 1 / x, 1, 10, math.log(10)),
    (math.sqrt, 0, 1, 2 / 3),
    (lambda x: x ** 1.5, 0, 4, 2 / 5 * 32),
    (lambda x: math.log(x) if x > 0 else 0.0, 0, 1, -1.0),
    (lambda x: math.exp(-x * x), -3, 3, math.sqrt(math.pi) * math.erf(3)),
    (lambda x: math.sin(10 * x), 0, math.pi, 0.0),
    (lambda x: math.sin(x) ** 2, 0, 2 * math.pi, math.pi),
    (lambda x: abs(x - 0.3), 0, 1, 0.5 * (0.09 + 0.49)),
    (lambda x: 1 / math.sqrt(x) if x > 0 else 0.0, 0, 1, 2.0),
    (lambda x: x * math.exp(-x), 0, 20, 1 - 21 * math.exp(-20)),
    (lambda x: math.cosh(x), -2, 2, 2 * math.sinh(2)),
    (lambda x: 1 / (1 + 100 * x * x), 0, 1, math.atan(10) / 10),
    (lambda x: math.sqrt(1 - x * x), -1, 1, math.pi / 2),
    (lambda x: x ** 3 - 2 * x, -2, 3, (81 - 16) / 4 - (9 - 4)),
    (lambda x: math.exp(3 * x) * math.cos(x), 0, 1,
     (math.exp(3) * (3 * math.cos(1) + math.sin(1)) - 3) / 10),
    (lambda x: math.tanh(5 * (x - 0.5)), 0, 1, 0.0),
]


@pytest.mark.parametrize("f, a, b, exact", ANALYTIC)
def test_error_bound_is_honest(f, a, b, exact):
    v, e = adaptive_quadrature(f, a, b, QuadratureOptions(abs_tol=1e-10, rel_tol=1e-10))
    assert abs(v - exact) <= 10 * e + 1e-15


def test_gaussian_expectation_moments():
    v, e, m = gaussian_expectation(lambda x: 1.0, 0.0, 1.0)
    assert abs(v - 1) < 1e-12 and m == 0.0
    v, _, _ = gaussian_expectation(lambda x: x, 2.5, 0.3)
    assert abs(v - 2.5) < 1e-12
    v, _, _ = gaussian_expectation(lambda x: x * x, 0.0, 4.0)
    assert abs(v - 4.0) < 1e-10


def test_gaussian_expectation_central_moments(rng):
    for _ in range(10):
        mu = rng.uniform(-5, 5)
        var = rng.uniform(0.01, 10)
        m1, _, _ = gaussian_expectation(lambda x: x - mu, mu, var)
        m2, _, _ = gaussian_expectation(lambda x: (x - mu) ** 2, mu, var)
        m3, _, _ = gaussian_expectation(lambda x: (x - mu) ** 3, mu, var)
        assert abs(m1) < 1e-10
        assert abs(m2 - var) < 1e-10 * max(1, var)
        assert abs(m3) < 1e-10 * max(1, var ** 1.5)


def test_gaussian_expectation_truncated_mass():
    v, _, m = gaussian_expectation(lambda x: 1.0, 0.0, 1.0, lower_cutoff=0.5)
    assert m == pytest.approx(stats.norm.cdf(0.5), rel=1e-14)
    assert v == pytest.approx(1 - m, abs=1e-12)
    # cutoff far above the mean
    v, _, m = gaussian_expectation(lambda x: 1.0, 0.0, 1.0, lower_cutoff=12.0)
    assert v == pytest.approx(stats.norm.sf(12.0), rel=1e-6)


def test_sampler_zero_variance_is_constant():
    s = gaussian_sampler(5, mean=1.25, variance=0.0)
    assert np.all(s.take(50) == 1.25)


def test_sampler_reproducible_and_index_addressable():
    a = GaussianStream(99).take(100)
    b = GaussianStream(99).take(100)
    assert np.array_equal(a, b)
    s = GaussianStream(99)
    # any window equals the matching slice of a sequential read
    seq = s.take(10_000)
    assert np.array_equal(GaussianStream(99).draws(4090, 20), seq[4090:4110])
    assert not np.array_equal(GaussianStream(99, key=(1,)).take(100), a)


def test_sampler_iterates():
    it = iter(GaussianStream(3))
    head = [next(it) for _ in range(5)]
    assert np.array_equal(head, GaussianStream(3).take(5))


def test_sampler_ks_statistic():
    n = 1_000_000
    crit = 1.95 / math.sqrt(n)
    good = 0
    for seed in range(20):
        x = GaussianStream(seed, 0.7, 2.0).take(n)
        d = stats.kstest(x, stats.norm(0.7, math.sqrt(2.0)).cdf).statistic
        good += d < crit
    assert good >= 18


def test_loglog_fit_exact_power_law():
    T = np.logspace(0, 3, 7)
    fit = loglog_slope_fit(np.column_stack([T, 3 * T ** 0.5]))
    assert abs(fit.slope - 0.5) < 1e-12
    assert abs(fit.r_squared - 1) < 1e-12
    assert fit.predict(4.0) == pytest.approx(6.0)
    assert plateau_crossover(fit, 3.0) == pytest.approx(1.0)


def test_loglog_fit_constant():
    fit = loglog_slope_fit([(1, 2), (10, 2), (100, 2)])
    assert abs(fit.slope) < 1e-12


def test_loglog_fit_domain_errors():
    with pytest.raises(DomainError):
        loglog_slope_fit([(1, 2), (2, 3)])
    with pytest.raises(DomainError):
        loglog_slope_fit([(1, 2), (0, 3), (3, 4)])
    with pytest.raises(DomainError):
        loglog_slope_fit([(1, -2), (2, 3), (3, 4)])

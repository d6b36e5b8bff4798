import math

import numpy as np
import pytest

from blochphase.errors import DomainError, ValidityError
from blochphase.phase import (CycleConvention, check_bound, dissipative_gp_closed_form,
                              dissipative_gp_quadrature, dissipative_profiles,
                              dynamic_phase_quadrature, geometric_phase_quadrature,
                              gp_gauge_shift_check, interference_intensity,
                              monte_carlo_thermal_gp, renormalized_frequency, thermal_factor,
                              thermal_gp, thermal_integrand, truncated_mass, weak_coupling_gp)

PI = math.pi
ONE = lambda phi: 1.0  # noqa: E731

# Goldens from an independent scipy.integrate.quad evaluation of the truncated
# Gaussian average (see tests/oracles.py).
F_RENORM = {1.0: 5.054960150253179, 100.0: 3.1534410055289483, 0.1: 12.096575111700586,
            10.0: 3.4402425767206477, 1e4: 3.1417101618180605}
F_RAW = {1.0: 4.581310553936019, 100.0: 3.151822144772159, 0.1: 12.089906004630128,
         10.0: 3.1204756365059243}
MASS = {1.0: 0.09369996641683448, 100.0: 0.0005133632606258143,
        0.1: 0.0005513219245013094, 10.0: 0.09294895144270199}


def const(v):
    return lambda phi: v


@pytest.mark.parametrize("I, rng, expected", [
    (0.5, (0.0, 2 * PI), PI),
    (0.0, (0.3, 1.7), 0.0),
    (1.0, (0.0, PI), PI),
])
def test_dynamic_phase_examples(I, rng, expected):
    conv = CycleConvention(rng, "time_dependent")
    res = dynamic_phase_quadrature(const(I), ONE, conv)
    assert res.value == pytest.approx(expected, abs=1e-14)
    assert res.method == "quadrature" and res.error_estimate >= 0


@pytest.mark.parametrize("theta0", [0.0, PI / 4, PI / 2, 3 * PI / 4, PI])
def test_geometric_phase_flat_sphere(theta0):
    conv = CycleConvention((0.0, PI), "time_dependent")
    res = geometric_phase_quadrature(const(math.cos(theta0)), ONE, conv)
    assert res.value == pytest.approx(-PI * (1 - math.cos(theta0)), abs=1e-13)
    assert geometric_phase_quadrature(const(1.0), ONE,
                                      CycleConvention((-2.0, 5.0))).value == pytest.approx(0, abs=1e-14)


def test_negative_radicand_is_flagged_not_raised():
    res = geometric_phase_quadrature(const(0.5), lambda p: 1.0 - p, CycleConvention((0.0, 2.0)))
    assert not res.validity.radicand_nonnegative
    assert math.isfinite(res.value)


def test_convention_validation():
    with pytest.raises(DomainError):
        CycleConvention((1.0, 1.0))
    with pytest.raises(DomainError):
        CycleConvention(action_mode="averaged")


@pytest.mark.parametrize("gamma, theta0, expected", [
    (0.0, PI / 2, -PI),
    (2 / PI, PI / 2, -7 * PI / 3),
    (0.1, 0.0, -1.07392956788406),
])
def test_closed_form_examples(gamma, theta0, expected):
    res = dissipative_gp_closed_form(gamma, 1.0, theta0)
    assert res.value == pytest.approx(expected, abs=1e-12)
    assert res.method == "closed_form" and res.error_estimate == 0.0
    assert res.validity.renormalization_bound_ok


def test_closed_form_rejects_beyond_bound():
    with pytest.raises(ValidityError):
        dissipative_gp_closed_form(2 / PI * (1 + 1e-9), 1.0, 0.3)
    with pytest.raises(DomainError):
        dissipative_gp_closed_form(-0.1, 1.0, 0.3)
    assert check_bound(0.3, 2.0) == pytest.approx(0.3 * PI / 4)


def test_limit_recovery():
    g = 1e-9
    for theta0 in np.linspace(0, PI, 7):
        c0 = math.cos(theta0)
        dev = dissipative_gp_closed_form(g, 1.0, theta0).value + PI * (1 - c0)
        # the residual is the exact first-order term, resolved to rounding level
        assert dev == pytest.approx(-g * PI ** 2 * (1 + c0 / 8), rel=1e-6)
        if c0 <= 0.1:
            assert abs(dev) < 1e-8


def test_only_frozen_half_range_reproduces_closed_form():
    gamma, eps, theta0 = 0.2, 1.0, 0.9
    target = dissipative_gp_closed_form(gamma, eps, theta0).value
    matches = []
    for span in (PI, 2 * PI):
        for mode in ("frozen_at_T", "time_dependent"):
            conv = CycleConvention((0.0, span), mode)
            v = dissipative_gp_quadrature(gamma, eps, theta0, conv).value
            if abs(v - target) < 1e-10:
                matches.append((span, mode))
    assert matches == [(PI, "frozen_at_T")]


def test_profiles():
    action, r2 = dissipative_profiles(0.2, 1.0, 0.0)
    assert action(2 * PI) == pytest.approx(1 - 0.2 * PI)
    assert r2(PI) == pytest.approx(1 - 0.1 * PI)


def test_weak_coupling_series():
    assert weak_coupling_gp(0.0, 1.0, 0.7).value == pytest.approx(-PI * (1 - math.cos(0.7)),
                                                                abs=1e-15)
    # theta-independent slope of the closed form at gamma = 0
    h = 1e-6
    slope = (dissipative_gp_closed_form(h, 1.0, PI / 2).value
             - dissipative_gp_closed_form(0.0, 1.0, PI / 2).value) / h
    assert slope == pytest.approx(-4 * (PI / 2) ** 2, rel=1e-4)
    res = weak_coupling_gp(1.0, 1.0, 0.0)
    assert res.method == "series" and not res.validity.renormalization_bound_ok


@pytest.mark.parametrize("gamma, expected", [(0.0, 1.0), (2 / PI, 0.0), (1.2 / PI, 0.8)])
def test_renormalized_frequency(gamma, expected):
    assert renormalized_frequency(gamma, 1.0) == pytest.approx(expected, abs=1e-15)


def test_renormalized_frequency_exact_triple():
    assert renormalized_frequency(0.6 * 2 / PI, 1.0) == 0.8 or \
        abs(renormalized_frequency(0.6 * 2 / PI, 1.0) - 0.8) <= 2.3e-16
    with pytest.raises(ValidityError):
        renormalized_frequency(1.0, 1.0)


def test_interference_examples():
    assert interference_intensity(0.0, 0.0, 0.0, 1.0, 0.0) == 2.0
    assert interference_intensity(0.0, 0.0, 0.0, 1.0, PI) == pytest.approx(0.0, abs=1e-15)
    # envelope vanishes where |I(t)| = 1
    assert interference_intensity(1.0, 0.3, 0.0, 1.0, 2.0) == 1.0
    assert interference_intensity(0.5, 0.0, 0.2, 1.0, 15.0) == pytest.approx(1.0, abs=1e-15)
    t = np.linspace(0, 10, 101)
    J = interference_intensity(0.0, 0.0, 0.1, 1.0, t)
    env = np.sqrt(1 - (0.05 * t) ** 2)
    assert np.all(J <= 1 + env + 1e-15) and np.all(J >= 1 - env - 1e-15)
    with pytest.raises(DomainError):
        interference_intensity(0.5, 0.0, 0.2, 1.0, 16.0)


def test_thermal_integrand():
    assert thermal_integrand(0.0) == PI
    assert thermal_integrand(1.0) == pytest.approx(2 / 3 * ((1 + PI) ** 1.5 - 1), rel=1e-14)
    assert math.isnan(thermal_integrand(-0.5))
    np.testing.assert_allclose(thermal_integrand(np.array([0.0, 1e-5])),
                               [PI, PI + PI ** 2 / 4 * 1e-5], rtol=1e-9)


@pytest.mark.parametrize("beta", sorted(F_RENORM))
def test_thermal_factor_goldens(beta):
    tf = thermal_factor(beta)
    assert tf.value == pytest.approx(F_RENORM[beta], rel=1e-10)
    if beta in F_RAW:
        raw = thermal_factor(beta, renormalize=False)
        assert raw.value == pytest.approx(F_RAW[beta], rel=1e-10)
        assert tf.truncated_mass == pytest.approx(MASS[beta], rel=1e-9)
        assert tf.truncated_mass == pytest.approx(truncated_mass(beta), rel=1e-12)
    assert tf.error_estimate >= 0
    assert tf.warning == (tf.truncated_mass > 1e-3)


def test_thermal_factor_examples():
    assert thermal_factor(1e4).value == pytest.approx(PI, rel=5e-3)
    assert thermal_factor(0.01).value == pytest.approx(2 / 3 * PI ** 1.5 * 10, rel=0.1)
    with pytest.raises(DomainError):
        thermal_factor(0.0)


def test_thermal_factor_monotone():
    betas = np.logspace(-2, 4, 50)
    f = [thermal_factor(b).value for b in betas]
    assert all(a >= b for a, b in zip(f, f[1:]))


def test_raw_truncated_average_is_not_monotone():
    betas = np.logspace(-2, 4, 50)
    f = [thermal_factor(b, renormalize=False).value for b in betas]
    assert any(b > a for a, b in zip(f, f[1:]))


def test_low_temperature_series_with_variance_term():
    # first order including the Gaussian variance: pi + (pi^2/4 - pi^3/24)/beta
    c1 = PI ** 2 / 4 - PI ** 3 / 24
    for beta in (100.0, 300.0, 1000.0, 1e4):
        f = thermal_factor(beta).value
        assert abs(f - PI - c1 / beta) < 5 * PI ** 2 / (4 * beta ** 2)


def test_mean_only_series_misses_first_order_term():
    # pi + pi^2/(4 beta) keeps the mean shift but drops the variance term
    beta = 100.0
    gap = thermal_factor(beta).value - (PI + PI ** 2 / (4 * beta))
    assert gap == pytest.approx(-PI ** 3 / 24 / beta, rel=0.4)


def test_thermal_gp_examples():
    for beta in (0.1, 1.0, 1e3):
        assert thermal_gp(beta, PI / 2).value == pytest.approx(-PI, abs=1e-15)
    assert thermal_gp(1e8, 0.0).value == pytest.approx(0.0, abs=1e-6)
    res = thermal_gp(1.0, 0.0)
    assert res.value == pytest.approx(F_RENORM[1.0] - PI, rel=1e-10)
    assert res.extra["warning"] is True
    assert res.validity.truncated_mass == pytest.approx(MASS[1.0], rel=1e-9)


def test_monte_carlo_agrees_with_quadrature():
    mc = monte_carlo_thermal_gp(100.0, 0.0, 100_000, 1)
    q = thermal_gp(100.0, 0.0).value
    assert mc.method == "monte_carlo"
    assert abs(mc.value - q) < 3 * mc.error_estimate


def test_monte_carlo_degenerate_noise():
    mc = monte_carlo_thermal_gp(1e20, 0.3, 1000, 4)
    assert mc.value == pytest.approx(math.cos(0.3) * PI - PI, abs=1e-9)
    assert mc.error_estimate < 1e-9
    assert mc.extra["rejected_fraction"] == 0.0


def test_monte_carlo_reproducible_across_threads():
    a = monte_carlo_thermal_gp(1.0, 0.0, 50_000, 7, workers=1)
    b = monte_carlo_thermal_gp(1.0, 0.0, 50_000, 7, workers=4)
    c = monte_carlo_thermal_gp(1.0, 0.0, 50_000, 7)
    assert a.value == b.value == c.value
    assert a.error_estimate == b.error_estimate
    assert a.extra["warning"] is True
    assert a.extra["accepted"] + round(a.extra["rejected_fraction"] * 50_000) == 50_000


def test_monte_carlo_validation():
    with pytest.raises(DomainError):
        monte_carlo_thermal_gp(1.0, 0.0, 99, 0)


def test_gauge_shift_examples():
    action, r2 = dissipative_profiles(0.2, 1.0, 0.4)
    conv = CycleConvention((0.0, PI), "time_dependent")
    o, s = gp_gauge_shift_check(action, r2, conv, 0.0)
    assert o == s
    o, s = gp_gauge_shift_check(action, r2, conv, 2 * PI)
    assert o == pytest.approx(s, abs=1e-15)
    o, s = gp_gauge_shift_check(action, r2, conv, 1.3)
    assert abs(o - s) < 1e-12


def test_gauge_shift_random():
    rng = np.random.default_rng(99)
    for _ in range(100):
        k = rng.uniform(0, 1 / PI)
        theta0 = rng.uniform(0, PI)
        alpha = rng.uniform(-2 * PI, 2 * PI)
        mode = "frozen_at_T" if rng.random() < 0.5 else "time_dependent"
        action, r2 = dissipative_profiles(2 * k, 1.0, theta0)
        o, s = gp_gauge_shift_check(action, r2, CycleConvention((0.0, PI), mode), alpha)
        assert abs(o - s) < 1e-12

"""Dynamic and geometric phases on the breathing Bloch sphere.

On a sphere of radius ``R`` the connection one-forms are ``R I dPhi``
(dynamic) and ``(R I - 1) dPhi`` (geometric), so over a cycle

    dynamic phase   = int R(Phi) I(Phi) dPhi
    geometric phase = int [R(Phi) I(Phi) - 1] dPhi

For the damped qubit ``H = eps sigma_z`` (scaled time, ``Phi_dot = 1``) the
squared radius is ``1 - k Phi`` with ``k = gamma / (2 eps)`` and the action
drifts as ``I(t) = cos(theta0) - k t``. Integrating over ``Phi in [0, pi]``
with the action frozen at its end-of-cycle value ``I(2 pi)`` reproduces the
closed form of :func:`dissipative_gp_closed_form`; see ``docs/cycle_convention.md``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, ValidityError
from .numerics import (GaussianStream, QuadratureOptions, adaptive_quadrature,
                       gaussian_expectation, normal_cdf)

__all__ = [
    "Validity",
    "PhaseResult",
    "CycleConvention",
    "DEFAULT_CONVENTION",
    "dissipative_profiles",
    "dynamic_phase_quadrature",
    "geometric_phase_quadrature",
    "dissipative_gp_quadrature",
    "dissipative_gp_closed_form",
    "weak_coupling_gp",
    "renormalized_frequency",
    "interference_intensity",
    "ThermalFactor",
    "thermal_integrand",
    "thermal_factor",
    "thermal_gp",
    "monte_carlo_thermal_gp",
    "gp_gauge_shift_check",
    "check_bound",
]

PI = math.pi
XI_MIN = -1.0 / PI
# relative slack on gamma*pi/(2 eps) <= 1 absorbing rounding in the ratio
BOUND_SLACK = 1e-12
TRUNCATION_WARN = 1e-3
MC_BLOCK = 8192


@dataclass(frozen=True)
class Validity:
    renormalization_bound_ok: bool = True
    radicand_nonnegative: bool = True
    truncated_mass: float = 0.0


@dataclass(frozen=True)
class PhaseResult:
    value: float
    method: str
    error_estimate: float = 0.0
    validity: Validity = field(default_factory=Validity)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("closed_form", "quadrature", "monte_carlo", "series"):
            raise DomainError(f"unknown method tag {self.method!r}")
        if not self.error_estimate >= 0:
            raise DomainError("error_estimate must be non-negative")

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "validity": asdict(self.validity),
        }
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class CycleConvention:
    """How a cycle integral is taken.

    ``phi_range`` are the integration limits in the angle. With
    ``action_mode="frozen_at_T"`` the action profile is evaluated once, at
    ``phi_range[0] + period_T``; with ``"time_dependent"`` it is followed
    along the path.
    """

    phi_range: tuple[float, float] = (0.0, PI)
    action_mode: str = "frozen_at_T"
    period_T: float = 2.0 * PI

    def __post_init__(self):
        a, b = self.phi_range
        if not b > a:
            raise DomainError(f"phi_range must be increasing, got {self.phi_range!r}")
        if self.action_mode not in ("frozen_at_T", "time_dependent"):
            raise DomainError(f"unknown action_mode {self.action_mode!r}")
        if not self.period_T > 0:
            raise DomainError("period_T must be positive")

    def shifted(self, alpha: float) -> "CycleConvention":
        a, b = self.phi_range
        return CycleConvention((a + alpha, b + alpha), self.action_mode, self.period_T)


DEFAULT_CONVENTION = CycleConvention()


def check_bound(gamma: float, eps: float) -> float:
    """Return ``gamma pi / (2 eps)``; raise :class:`ValidityError` above 1."""
    if not gamma >= 0:
        raise DomainError(f"gamma must be non-negative, got {gamma!r}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    ratio = gamma * PI / (2.0 * eps)
    if ratio > 1.0 + BOUND_SLACK:
        raise ValidityError(
            f"gamma*pi/(2 eps) = {ratio!r} exceeds 1: the renormalized frequency "
            f"would be imaginary, so the dissipative phase is not defined")
    return min(ratio, 1.0)


def dissipative_profiles(gamma: float, eps: float, theta0: float, phi0: float = 0.0):
    """Action and squared-radius profiles of the damped qubit as functions of ``Phi``.

    ``I(Phi) = cos(theta0) - k (Phi - phi0)`` and ``R^2(Phi) = 1 - k Phi``
    with ``k = gamma / (2 eps)``.
    """
    k = gamma / (2.0 * eps)
    c0 = math.cos(theta0)

    def action(phi):
        return c0 - k * (phi - phi0)

    def r_squared(phi):
        return 1.0 - k * phi

    return action, r_squared


def _phase_integral(action, r_squared, convention, opts, offset):
    a, b = convention.phi_range
    opts = opts or QuadratureOptions()
    negative = [False]
    frozen = None
    if convention.action_mode == "frozen_at_T":
        frozen = float(action(a + convention.period_T))

    def integrand(phi):
        r2 = r_squared(phi)
        if r2 < 0.0:
            negative[0] = True
            r2 = 0.0
        I = frozen if frozen is not None else action(phi)
        return math.sqrt(r2) * I - offset

    value, err = adaptive_quadrature(integrand, a, b, opts)
    return value, err, not negative[0]


def dynamic_phase_quadrature(action, r_squared, convention: CycleConvention = DEFAULT_CONVENTION,
                             opts: QuadratureOptions | None = None) -> PhaseResult:
    """``int R(Phi) I(Phi) dPhi`` over ``convention.phi_range``.

    ``action`` and ``r_squared`` are callables of the angle.
    """
    value, err, ok = _phase_integral(action, r_squared, convention, opts, 0.0)
    return PhaseResult(value, "quadrature", err, Validity(radicand_nonnegative=ok))


def geometric_phase_quadrature(action, r_squared, convention: CycleConvention = DEFAULT_CONVENTION,
                               opts: QuadratureOptions | None = None) -> PhaseResult:
    """``int [R(Phi) I(Phi) - 1] dPhi`` over ``convention.phi_range``.

    Where ``r_squared`` dips below zero the radius is taken as 0 and
    ``validity.radicand_nonnegative`` is cleared.
    """
    value, err, ok = _phase_integral(action, r_squared, convention, opts, 1.0)
    return PhaseResult(value, "quadrature", err, Validity(radicand_nonnegative=ok))


def dissipative_gp_quadrature(gamma: float, eps: float, theta0: float,
                              convention: CycleConvention = DEFAULT_CONVENTION,
                              opts: QuadratureOptions | None = None) -> PhaseResult:
    """Geometric phase of the damped qubit by quadrature, under any convention."""
    check_bound(gamma, eps)
    action, r2 = dissipative_profiles(gamma, eps, theta0)
    res = geometric_phase_quadrature(action, r2, convention, opts)
    return PhaseResult(res.value, res.method, res.error_estimate,
                       Validity(True, res.validity.radicand_nonnegative, 0.0))


def dissipative_gp_closed_form(gamma: float, eps: float, theta0: float) -> PhaseResult:
    """Closed-form geometric phase of the damped qubit after one cycle.

    ``-pi + 4/3 [(1 - pi gamma / 2 eps)^(3/2) - 1] (pi - (eps / gamma) cos theta0)``,
    valid for ``gamma pi / (2 eps) <= 1``. At ``gamma = 0`` the limit
    ``-pi (1 - cos theta0)`` is returned.
    """
    ratio = check_bound(gamma, eps)
    c0 = math.cos(theta0)
    if gamma == 0.0:
        return PhaseResult(-PI * (1.0 - c0), "closed_form")
    radicand = 1.0 - ratio
    # (1-u)^(3/2) - 1 via expm1/log1p stays accurate for tiny u
    if radicand > 0.0:
        bracket = math.expm1(1.5 * math.log1p(-ratio))
    else:
        bracket = -1.0
    value = -PI + 4.0 / 3.0 * bracket * (PI - eps / gamma * c0)
    return PhaseResult(value, "closed_form")


def weak_coupling_gp(gamma: float, eps: float, theta0: float) -> PhaseResult:
    """First-order series ``-pi(1 - cos theta0) - (gamma/eps)(pi/2)^2 (cos theta0 + 4)``.

    The coefficients are the published ones; ``docs/cycle_convention.md``
    discusses the ``cos theta0`` coefficient.
    """
    c0 = math.cos(theta0)
    value = -PI * (1.0 - c0) - gamma / eps * (PI / 2.0) ** 2 * (c0 + 4.0)
    ok = gamma * PI / (2.0 * eps) <= 1.0 + BOUND_SLACK
    return PhaseResult(value, "series", 0.0, Validity(renormalization_bound_ok=ok))


def renormalized_frequency(gamma: float, eps: float) -> float:
    """``sqrt(1 - (gamma pi / 2 eps)^2)`` for a bare frequency of 1."""
    ratio = check_bound(gamma, eps)
    return math.sqrt(max(0.0, (1.0 - ratio) * (1.0 + ratio)))


def interference_intensity(I0: float, phi0: float, gamma: float, eps: float, t):
    """``1 + sqrt(1 - I(t)^2) cos(t + phi0)`` with ``I(t) = I0 - (gamma / 2 eps) t``.

    Accepts scalar or array ``t``; raises :class:`DomainError` where
    ``|I(t)| > 1``.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    tt = np.asarray(t, dtype=float)
    I = I0 - gamma / (2.0 * eps) * tt
    if np.any(np.abs(I) > 1.0):
        raise DomainError("|I(t)| > 1: outside the envelope domain")
    J = 1.0 + np.sqrt(1.0 - I * I) * np.cos(tt + phi0)
    return float(J) if J.ndim == 0 else J


def thermal_integrand(xi):
    """Cycle integral ``int_0^pi sqrt(1 + xi Phi) dPhi = (2 / 3 xi)[(1 + pi xi)^(3/2) - 1]``.

    Vectorized; NaN below ``xi = -1/pi``.
    """
    scalar = np.ndim(xi) == 0
    out = kernels.thermal_kernel(np.atleast_1d(np.asarray(xi, dtype=float)))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ThermalFactor:
    value: float
    error_estimate: float
    truncated_mass: float
    renormalized: bool = True

    @property
    def warning(self) -> bool:
        return self.truncated_mass > TRUNCATION_WARN


def thermal_factor(beta: float, quad: QuadratureOptions | None = None, *,
                   renormalize: bool = True) -> ThermalFactor:
    """Thermal average of :func:`thermal_integrand` under ``N(1/beta, 1/beta)``.

    The integrand is real only for ``xi >= -1/pi``; the Gaussian mass below is
    reported as ``truncated_mass``. With ``renormalize=True`` (default) the
    average is conditioned on the real domain, i.e. divided by
    ``1 - truncated_mass``, which matches the Monte Carlo estimator that
    rejects out-of-domain draws. With ``renormalize=False`` the raw truncated
    integral is returned.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    mean = 1.0 / beta
    value, err, mass = gaussian_expectation(
        lambda x: kernels.thermal_kernel(np.maximum(x, XI_MIN)),
        mean, 1.0 / beta, XI_MIN, quad, vectorized=True)
    if renormalize:
        keep = 1.0 - mass
        value /= keep
        err /= keep
    return ThermalFactor(value, err, mass, renormalize)


def thermal_gp(beta: float, theta0: float, quad: QuadratureOptions | None = None, *,
               renormalize: bool = True) -> PhaseResult:
    """``cos(theta0) f(beta) - pi``."""
    f = thermal_factor(beta, quad, renormalize=renormalize)
    c0 = math.cos(theta0)
    return PhaseResult(c0 * f.value - PI, "quadrature", abs(c0) * f.error_estimate,
                       Validity(truncated_mass=f.truncated_mass),
                       {"thermal_factor": f.value, "warning": f.warning})


def _mc_block(stream, n, theta0, b):
    start = b * MC_BLOCK
    m = min(MC_BLOCK, n - start)
    xi = stream.draws(start, m)
    ok = xi >= XI_MIN
    vals = math.cos(theta0) * kernels.thermal_kernel(xi[ok]) - PI
    return vals, m - int(ok.sum())


def monte_carlo_thermal_gp(beta: float, theta0: float, n: int, seed: int, *,
                           workers: int = 1) -> PhaseResult:
    """Sample mean of ``cos(theta0) g(xi) - pi`` over ``xi ~ N(1/beta, 1/beta)``.

    Draws below ``-1/pi`` are rejected and counted. Draws are grouped in
    fixed blocks keyed by ``(seed, block)``, and the final reduction is a
    compensated sum in index order, so the estimate is the same for any
    ``workers``.
    """
    if n < 100:
        raise DomainError("Monte Carlo needs n >= 100")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    stream = GaussianStream(seed, 1.0 / beta, 1.0 / beta)
    nblocks = (n + MC_BLOCK - 1) // MC_BLOCK

    def run(b):
        return _mc_block(stream, n, theta0, b)

    if workers <= 1:
        parts = [run(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(nblocks)))
    vals = np.concatenate([p[0] for p in parts])
    rejected = sum(p[1] for p in parts)
    m = len(vals)
    if m < 2:
        raise DomainError("fewer than two accepted samples")
    mean = kernels.neumaier_sum(vals) / m
    dev = vals - mean
    var = kernels.neumaier_sum(dev * dev) / (m - 1)
    stderr = math.sqrt(var / m)
    frac = rejected / n
    return PhaseResult(mean, "monte_carlo", stderr,
                       Validity(truncated_mass=frac),
                       {"n": n, "accepted": m, "rejected_fraction": frac, "seed": int(seed),
                        "warning": frac > TRUNCATION_WARN})


def gp_gauge_shift_check(action, r_squared, convention: CycleConvention, alpha: float,
                         opts: QuadratureOptions | None = None) -> tuple[float, float]:
    """Geometric phase before and after the shift ``Phi -> Phi + alpha``.

    The shifted value integrates over the shifted range, with both profiles
    written as functions of the new angle.
    """
    original = geometric_phase_quadrature(action, r_squared, convention, opts).value
    shifted = geometric_phase_quadrature(
        lambda p: action(p - alpha), lambda p: r_squared(p - alpha),
        convention.shifted(alpha), opts).value
    return original, shifted


def truncated_mass(beta: float) -> float:
    """Probability that ``xi ~ N(1/beta, 1/beta)`` falls below ``-1/pi``."""
    return normal_cdf((XI_MIN - 1.0 / beta) * math.sqrt(beta))

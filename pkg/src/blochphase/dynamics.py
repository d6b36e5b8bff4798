"""Langevin dynamics of the qubit in action-angle variables.

Two systems are available:

``reduced``
    The Ohmic Langevin equations for ``H0 = -sqrt(1-I^2)(cos Phi + sin Phi) + I``::

        Phi_dot = I / sqrt(1 - I^2) (cos Phi + sin Phi) + 1
        I_dot   = -sqrt(1 - I^2) (sin Phi + cos Phi) - 2 gamma Phi_dot + xi

    ``eom_form="canonical"`` replaces the first term of ``I_dot`` by
    ``-dH0/dPhi = sqrt(1 - I^2)(cos Phi - sin Phi)``, which makes ``H0`` a
    constant of motion at ``gamma = xi = 0``. The default ``"printed"`` form
    keeps the equations as written above; it does not conserve ``H0``.

``qubit``
    ``H = eps sigma_z`` in scaled time: ``I_dot = -(gamma / 2 eps) Phi_dot + xi``,
    ``Phi_dot = 1``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .core import ActionAngleState, SystemParams, hopf_coordinates
from .errors import DomainError, PoleError, RangeError
from .numerics import GaussianStream

__all__ = [
    "NoiseSpec",
    "IntegratorConfig",
    "Trajectory",
    "eom_rhs",
    "integrate",
    "integrate_many",
    "dissipative_qubit_trajectory",
    "sample_quenched_noise",
    "noise_stream",
]

NOISE_MODELS = ("none", "quenched", "stepwise")
MEAN_MODES = ("zero", "inverse_beta")
METHODS = ("rk4", "heun_stochastic")
EOM_FORMS = ("printed", "canonical")
SYSTEMS = ("reduced", "qubit")


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise with variance ``1/beta``.

    ``quenched`` draws one value per trajectory; ``stepwise`` redraws every
    ``step_correlation_time``. ``mean_mode="inverse_beta"`` shifts the mean to
    ``1/beta``.
    """

    model: str = "none"
    beta: float = 1.0
    mean_mode: str = "zero"
    seed: int = 0
    step_correlation_time: float | None = None

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise DomainError(f"unknown noise model {self.model!r}")
        if self.mean_mode not in MEAN_MODES:
            raise DomainError(f"unknown mean mode {self.mean_mode!r}")
        if self.model != "none" and not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if self.model == "stepwise":
            tau = self.step_correlation_time
            if tau is None or not tau > 0:
                raise DomainError("stepwise noise needs a positive step_correlation_time")

    @property
    def mean(self) -> float:
        return 1.0 / self.beta if self.mean_mode == "inverse_beta" else 0.0

    @property
    def variance(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    ``method=None`` picks RK4 for deterministic and quenched runs and the
    stochastic Heun scheme for stepwise noise.
    """

    method: str | None = None
    dt: float = 1e-3
    pole_guard_delta: float = 1e-9
    stride: int = 1
    eom_form: str = "printed"

    def __post_init__(self):
        if self.method is not None and self.method not in METHODS:
            raise DomainError(f"unknown integrator {self.method!r}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not 0 < self.pole_guard_delta < 1:
            raise DomainError("pole_guard_delta must lie in (0, 1)")
        if int(self.stride) < 1:
            raise DomainError("stride must be >= 1")
        if self.eom_form not in EOM_FORMS:
            raise DomainError(f"unknown eom_form {self.eom_form!r}")

    def method_for(self, noise: NoiseSpec) -> str:
        if self.method is not None:
            return self.method
        return "heun_stochastic" if noise.model == "stepwise" else "rk4"


@dataclass
class Trajectory:
    t: np.ndarray
    I: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    r_squared: np.ndarray
    H: np.ndarray
    xi: np.ndarray
    status: str = "ok"
    diagnostic: str = ""
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def complete(self) -> bool:
        return self.status == "ok"

    @property
    def flagged(self) -> np.ndarray:
        """Mask of samples whose squared radius went negative."""
        return self.r_squared < 0.0

    def bloch(self):
        """Bloch coordinates ``(x, y, z)`` on the breathing sphere."""
        return hopf_coordinates(self.I, self.phi, self.r_squared)

    def raise_for_status(self):
        if self.status == "pole":
            raise PoleError(self.diagnostic)
        if self.status == "range":
            raise RangeError(self.diagnostic)


def eom_rhs(state: ActionAngleState, gamma: float, xi: float, *,
            pole_guard_delta: float = 1e-9, form: str = "printed") -> tuple[float, float]:
    """Right-hand side ``(I_dot, Phi_dot)`` of the reduced Langevin system.

    ``Phi_dot`` is evaluated first and substituted into ``I_dot``.

    >>> eom_rhs(ActionAngleState(0.0, 0.0), 0.1, 0.0)
    (-1.2, 1.0)
    """
    if form not in EOM_FORMS:
        raise DomainError(f"unknown eom_form {form!r}")
    system = kernels.PRINTED if form == "printed" else kernels.CANONICAL
    st, idot, pd = kernels._kernels_py._rhs(system, state.I, state.phi, gamma, 0.0, xi,
                                            pole_guard_delta)
    if st == kernels.POLE:
        raise PoleError(f"|I| = {abs(state.I)!r} is within {pole_guard_delta:g} of a pole")
    return idot, pd


def noise_stream(noise: NoiseSpec, trajectory_index: int | None = None) -> GaussianStream:
    """Draw stream for one trajectory, keyed by ``(seed, trajectory_index)``."""
    key = () if trajectory_index is None else (int(trajectory_index),)
    return GaussianStream(noise.seed, noise.mean, noise.variance, key)


def sample_quenched_noise(spec: NoiseSpec, n: int) -> np.ndarray:
    """``n`` independent draws from ``N(mean, 1/beta)``; a pure function of the spec."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if spec.model == "none":
        return np.zeros(n)
    return noise_stream(spec).draws(0, n)


def _noise_schedule(noise: NoiseSpec, dt: float, nsteps: int, trajectory_index: int):
    if noise.model == "none":
        return np.zeros(1), nsteps + 1
    stream = noise_stream(noise, trajectory_index)
    if noise.model == "quenched":
        return stream.draws(0, 1), nsteps + 1
    hold = max(1, int(round(noise.step_correlation_time / dt)))
    return stream.draws(0, nsteps // hold + 1), hold


def integrate(state0: ActionAngleState, params: SystemParams, noise: NoiseSpec,
              config: IntegratorConfig, t_end: float, *, system: str = "reduced",
              trajectory_index: int = 0) -> Trajectory:
    """Integrate one trajectory from ``state0`` up to ``t_end``.

    A pole (or, for the qubit system, ``|I| > 1``) stops the run; the samples
    gathered so far are returned with ``status`` and ``diagnostic`` set.
    Samples with a negative squared radius are kept and show up in
    :attr:`Trajectory.flagged`.
    """
    if system not in SYSTEMS:
        raise DomainError(f"unknown system {system!r}")
    if not t_end > 0:
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    dt = config.dt
    nsteps = max(1, int(round(t_end / dt)))
    stride = int(config.stride)
    method = config.method_for(noise)
    xi, hold = _noise_schedule(noise, dt, nsteps, trajectory_index)

    if system == "qubit":
        code = kernels.QUBIT
    else:
        code = kernels.PRINTED if config.eom_form == "printed" else kernels.CANONICAL
    k = params.damping_ratio
    I_out, phi_out, pd_out, n, status, steps = kernels.propagate(
        kernels.RK4 if method == "rk4" else kernels.HEUN, code,
        float(state0.I), float(state0.phi), float(params.gamma), k,
        xi, hold, dt, nsteps, stride, config.pole_guard_delta)

    I = np.asarray(I_out[:n])
    phi = np.asarray(phi_out[:n])
    pd = np.asarray(pd_out[:n])
    step_idx = np.arange(n) * stride
    t = step_idx * dt
    xi_s = np.asarray(xi)[np.minimum(step_idx // hold, len(xi) - 1)]
    if system == "qubit":
        r2 = 1.0 - k * phi * pd + xi_s * phi
        H = I + k * phi * pd - xi_s * phi
    else:
        r2 = 1.0 - 2.0 * params.gamma * phi * pd + xi_s * phi
        H0 = -np.sqrt(1.0 - I * I) * (np.cos(phi) + np.sin(phi)) + I
        H = H0 + 2.0 * params.gamma * phi * pd - xi_s * phi

    status_name = {kernels.OK: "ok", kernels.POLE: "pole", kernels.RANGE: "range"}[status]
    diagnostic = ""
    if status_name == "pole":
        diagnostic = (f"pole reached at t={steps * dt:.17g}: |I| >= 1 - {config.pole_guard_delta:g}; "
                      f"trajectory truncated after {n} samples")
    elif status_name == "range":
        diagnostic = (f"action left [-1, 1] at t={steps * dt:.17g}; "
                      f"trajectory truncated after {n} samples")
    meta = {
        "params": asdict(params),
        "noise": asdict(noise),
        "integrator": method,
        "dt": dt,
        "stride": stride,
        "system": system,
        "eom_form": config.eom_form,
        "trajectory_index": trajectory_index,
        "backend": kernels.BACKEND,
    }
    return Trajectory(t, I, phi, pd, r2, H, xi_s, status_name, diagnostic, meta)


def integrate_many(states, params: SystemParams, noise: NoiseSpec, config: IntegratorConfig,
                   t_end: float, *, system: str = "reduced", workers: int = 1) -> list[Trajectory]:
    """Integrate an ensemble; trajectory ``i`` uses noise keyed by ``(seed, i)``.

    Output does not depend on ``workers``.
    """
    states = list(states)

    def run(i):
        return integrate(states[i], params, noise, config, t_end, system=system,
                         trajectory_index=i)

    if workers <= 1:
        return [run(i) for i in range(len(states))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(states))))


def dissipative_qubit_trajectory(I0: float, phi0: float, gamma: float, eps: float,
                                 t: float) -> ActionAngleState:
    """Exact solution ``I(t) = I0 - (gamma / 2 eps) t``, ``Phi(t) = Phi0 + t``."""
    if not gamma >= 0:
        raise DomainError(f"gamma must be non-negative, got {gamma!r}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    I = I0 - gamma / (2.0 * eps) * t
    if abs(I) > 1.0:
        raise RangeError(f"I(t={t!r}) = {I!r} outside [-1, 1]; |I(t)| <= 1 needs "
                         f"gamma*pi/(2 eps) <= 1 over one cycle")
    return ActionAngleState(I, phi0 + t)


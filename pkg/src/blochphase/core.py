"""Action-angle states, the Hopf map and the Hamiltonian functions of a qubit.

A normalized qubit ``a1|1> + a2|2>`` is described by the canonical pair

    I   = |a1|^2 - |a2|^2      (population difference, -1 <= I <= 1)
    Phi = arg(a1) - arg(a2)    (relative phase, kept unwrapped)

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NormalizationError

__all__ = [
    "ActionAngleState",
    "BlochVector",
    "SystemParams",
    "RadiusSample",
    "hopf_map",
    "hopf_coordinates",
    "amplitudes_to_action_angle",
    "action_angle_to_amplitudes",
    "mmst_hamiltonian",
    "reduced_hamiltonian",
    "squared_radius",
]

NORM_TOL = 1e-10


def _check_action(I: float) -> None:
    if not abs(I) <= 1.0:
        raise DomainError(f"action I={I!r} outside [-1, 1]")


@dataclass(frozen=True)
class ActionAngleState:
    """Point ``(I, Phi)`` on the Bloch sphere. ``phi`` is never wrapped."""

    I: float
    phi: float

    def __post_init__(self):
        _check_action(self.I)
        if not math.isfinite(self.phi):
            raise DomainError(f"angle phi={self.phi!r} is not finite")


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class SystemParams:
    """Qubit parameters.

    ``eps`` is half the level splitting (``H = eps * sigma_z``), ``gamma`` the
    Ohmic friction constant and ``eta`` the coefficients of the Pauli
    expansion used by :func:`mmst_hamiltonian`.
    """

    eps: float = 1.0
    gamma: float = 0.0
    eta: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps!r}")
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma!r}")
        if len(self.eta) != 3:
            raise DomainError("eta needs exactly three coefficients")

    @property
    def damping_ratio(self) -> float:
        """``gamma / (2 eps)``, the drift rate of the action in scaled time."""
        return self.gamma / (2.0 * self.eps)

    @property
    def bound_ratio(self) -> float:
        """``gamma * pi / (2 eps)``; physical results require this to be <= 1."""
        return math.pi * self.damping_ratio


@dataclass(frozen=True)
class RadiusSample:
    """Squared radius of the breathing sphere.

    Negative values are kept rather than raised; ``flagged`` tells the caller
    that the sample left the physical regime.
    """

    r_squared: float

    @property
    def flagged(self) -> bool:
        return self.r_squared < 0.0

    @property
    def radius(self) -> float:
        if self.flagged:
            raise DomainError(f"negative squared radius {self.r_squared!r}")
        return math.sqrt(self.r_squared)

    def __float__(self) -> float:
        return self.r_squared


def hopf_map(state: ActionAngleState, r_squared: RadiusSample | float = 1.0) -> BlochVector:
    """Map ``(I, Phi)`` to the Bloch vector on a sphere of squared radius ``r_squared``.

    >>> hopf_map(ActionAngleState(0.0, 0.0)).as_tuple()
    (1.0, 0.0, 0.0)
    """
    r2 = float(r_squared)
    if not r2 >= 0.0:
        raise DomainError(f"squared radius must be non-negative, got {r2!r}")
    R = math.sqrt(r2)
    s = math.sqrt(max(0.0, 1.0 - state.I * state.I))
    return BlochVector(R * s * math.cos(state.phi), R * s * math.sin(state.phi), R * state.I)


def hopf_coordinates(I, phi, r_squared=1.0):
    """Vectorized Hopf map returning ``(x, y, z)`` arrays.

    Samples with negative ``r_squared`` are mapped through ``sqrt(max(r2, 0))``;
    callers that care inspect ``r_squared`` themselves.
    """
    I = np.asarray(I, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(I) > 1.0):
        raise DomainError("action outside [-1, 1]")
    R = np.sqrt(np.maximum(np.asarray(r_squared, dtype=float), 0.0))
    s = np.sqrt(np.maximum(0.0, 1.0 - I * I))
    return R * s * np.cos(phi), R * s * np.sin(phi), R * I


def amplitudes_to_action_angle(a1: complex, a2: complex) -> ActionAngleState:
    """Action-angle coordinates of the normalized state ``a1|1> + a2|2>``.

    The relative phase is reduced to ``(-pi, pi]``. For a basis state the phase
    is undefined and set to 0.
    """
    a1 = complex(a1)
    a2 = complex(a2)
    p1 = abs(a1) ** 2
    p2 = abs(a2) ** 2
    if abs(p1 + p2 - 1.0) > NORM_TOL:
        raise NormalizationError(f"|a1|^2 + |a2|^2 = {p1 + p2!r}, expected 1")
    I = min(1.0, max(-1.0, p1 - p2))
    if a1 == 0 or a2 == 0:
        return ActionAngleState(I, 0.0)
    phi = cmath.phase(a1) - cmath.phase(a2)
    # cmath.phase lies in (-pi, pi], so the difference needs at most one shift
    if phi > math.pi:
        phi -= 2.0 * math.pi
    elif phi <= -math.pi:
        phi += 2.0 * math.pi
    return ActionAngleState(I, phi)


def action_angle_to_amplitudes(state: ActionAngleState) -> tuple[complex, complex]:
    """Inverse of :func:`amplitudes_to_action_angle` in the gauge ``arg(a2) = 0``."""
    a1 = math.sqrt((1.0 + state.I) / 2.0) * cmath.exp(1j * state.phi)
    a2 = complex(math.sqrt((1.0 - state.I) / 2.0))
    return a1, a2


def mmst_hamiltonian(state: ActionAngleState, params: SystemParams) -> float:
    """Classical (Meyer-Miller-Stock-Thoss) image of ``sum_i eta_i sigma_i``."""
    e1, e2, e3 = params.eta
    s = math.sqrt(1.0 - state.I * state.I)
    return -2.0 * s * (e1 * math.cos(state.phi) + e2 * math.sin(state.phi)) + 2.0 * e3 * state.I


def reduced_hamiltonian(state: ActionAngleState) -> float:
    """``-sqrt(1 - I^2) (cos Phi + sin Phi) + I``.

    Equals :func:`mmst_hamiltonian` with ``eta = (1/2, 1/2, 1/2)``.
    """
    s = math.sqrt(1.0 - state.I * state.I)
    return -s * (math.cos(state.phi) + math.sin(state.phi)) + state.I


def squared_radius(phi: float, phi_dot: float, gamma: float, xi: float) -> RadiusSample:
    """Squared radius ``1 - gamma d(Phi^2)/dt + xi Phi`` of the breathing sphere.

    The time derivative is expanded as ``2 Phi Phi_dot``.
    """
    return RadiusSample(1.0 - 2.0 * gamma * phi * phi_dot + xi * phi)

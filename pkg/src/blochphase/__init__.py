"""Dissipative and stochastic geometric phase of a qubit in action-angle form."""
from .core import (ActionAngleState, BlochVector, RadiusSample, SystemParams,
                   amplitudes_to_action_angle, hopf_map, mmst_hamiltonian,
                   reduced_hamiltonian, squared_radius)
from .dynamics import (IntegratorConfig, NoiseSpec, Trajectory, dissipative_qubit_trajectory,
                       eom_rhs, integrate, sample_quenched_noise)
from .errors import (BlochError, DomainError, NumericalError, PoleError, QuadratureError,
                     RangeError, ValidityError)
from .kernels import BACKEND
from .numerics import QuadratureOptions, adaptive_quadrature, loglog_slope_fit
from .phase import (CycleConvention, PhaseResult, dissipative_gp_closed_form,
                    geometric_phase_quadrature, interference_intensity,
                    monte_carlo_thermal_gp, renormalized_frequency, thermal_factor,
                    thermal_gp, weak_coupling_gp)

__version__ = "0.1.0"

"""Coupled Morse-pendula chain: full dynamics, modal truncations, partial averaging,
activation thresholds and parametric-resonance control."""

from .averaging import (AveragedHamiltonian, TaylorSeries, average_reduced_hamiltonian, averaged_rhs,
                        build_averaged_hamiltonian, equilibrium_curve, min_activation_energy_analytic,
                        pitchfork_locus, taylor_expand_morse)
from .chain import (ChainConfig, ChainState, DimensionalParams, ExcitationConfig, chain_rhs, equilibrium_angle,
                    morse_derivative, morse_potential, time_unit_ps, total_energy)
from .errors import BracketError, ConfigError, ConvergenceError, IntegrationError, SaturationError
from .integrate import (DivisionResult, ModalSystem, Trajectory, detect_division, division_time, integrate,
                        min_activation_energy_numeric)
from .modal import (BathInitialConditions, ModalBasis, ModalState, ReducedModel, build_basis, from_modal,
                    modal_energies, reduced_model, reduced_rhs, to_modal)
from .resonance import (AveragedPRState, FixedPoint, averaged_pr_rhs, control_trajectory, effective_hamiltonian,
                        effective_potential, find_fixed_points, frequency_response, stability)

__version__ = "0.1.0"

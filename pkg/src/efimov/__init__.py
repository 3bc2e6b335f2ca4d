"""Efimov trimers in vacuum and in a medium.

Zero-range three-body bound states from the momentum-space integral
equation, their flow with a Pauli-blocking Fermi sea, and Born-Oppenheimer
trimer counts for a condensate environment.  Units: hbar = m = 1.
"""
__version__ = "0.1.0"

from .errors import (BracketError, ConfigError, ConvergenceError, DomainError, EfimovError,
                     EvaluationError, RunError, SingularityError)
from .units import (MediumParams, ThreeBodyParams, UnitSystem, coherence_length, density_to_kf,
                    dimer_energy, fermi_energy, kf_to_density)
from .numerics import KernelMatrix, Mesh, bracket_root, build_mesh, leading_eigenpair
from .stm import (TrimerState, build_kernel, calibrate_kstar, efimov_factor, exchange_kernel,
                  lambda_of_E, pair_amplitude, scan_spectrum, solve_s0, threshold_point,
                  trimer_energies)
from .medium import (blocked_pair_amplitude, blocking_factor, build_blocked_kernel,
                     disappearance_point, in_medium_dimer, medium_thresholds,
                     medium_trimer_energies, spectral_flow)
from .bo import (BOPotential, bo_potential, count_trimers_bec, count_trimers_formula,
                 light_binding, omega_constant, wkb_count, wkb_phase)
from .config import RunSpec, parse_config
from .runner import ResultSet, run
from .output import emit, fourth_root

__all__ = [n for n in dir() if not n.startswith("_")]

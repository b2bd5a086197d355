"""Spectral Galerkin solver and verification lab for u_tt - u_xx + V u = f on (0, L)."""

__version__ = "0.1.0"

from .errors import (BoundaryClippingError, ConsistencyError, InvalidArgumentError, NonnegativityError,
                     PreconditionError, StepSizeError, UnsupportedCheckError, WaveLabError)
from .spectral_core import EigenBasis, Interval, build_eigenbasis, norm, project, reconstruct
from .galerkin import GalerkinSystem, Trajectory, accel, assemble_system, integrate, solve_ivp
from .energy import (corollary_bounds, eta_of_t, gronwall_bound, m_norm, verify_energy_estimate,
                     xi_of_t)
from .singular import DistributionSpec, FitReport, Mollifier, dirac, loglog_fit, mollifier_eval, regularize, smooth
from .lifting import BoundaryData, LiftedProblem, build_lifting, check_consistency, solve_nonhomogeneous
from .vws import VwsProblem, consistency_experiment, existence_sweep, uniqueness_experiment
from .fd_oracle import FdGrid, compare, fd_solve

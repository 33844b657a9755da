"""Mean-field Fokker-Planck model of asset-return increments.

Exact evolution operators, semiclassical asymptotics and a conservative
finite-difference reference solver.
"""
from .errors import (CFLError, DomainError, NfpeError, NumericalError, ParameterError,
                     ResolutionError, TrajectoryEscapeError, TruncationError)
from .grid import DensityGrid
from .model import (SELF_CONSISTENT, CoefficientSet, ModelParams, check_exact_solvability,
                    map_empirical_coefficients)
from .moments import (MomentTrajectory, moment_const_diffusion, moment_ode_solve,
                      moment_quadratic_explicit)
from .transform import TransformContext, jacobian_dy_dx, x_of_y, y_of_x
from .exact import (ExactKernelParams, evolve_const_diffusion, evolve_quadratic,
                    solvable_configuration)
from .reference import FdConfig, fd_solve, grid_metrics
from .semiclassical import (SemiclassicalState, assemble_density, build_state, phi0, phi1,
                            pullback_initial_density, residual)

__all__ = [
    "CFLError", "DomainError", "NfpeError", "NumericalError", "ParameterError",
    "ResolutionError", "TrajectoryEscapeError", "TruncationError", "DensityGrid",
    "SELF_CONSISTENT", "CoefficientSet", "ModelParams", "check_exact_solvability",
    "map_empirical_coefficients", "MomentTrajectory", "moment_const_diffusion",
    "moment_ode_solve", "moment_quadratic_explicit", "TransformContext", "jacobian_dy_dx",
    "x_of_y", "y_of_x", "ExactKernelParams", "evolve_const_diffusion", "evolve_quadratic",
    "solvable_configuration", "FdConfig", "fd_solve", "grid_metrics", "SemiclassicalState",
    "assemble_density", "build_state", "phi0", "phi1", "pullback_initial_density", "residual",
]

__version__ = "0.1.0"

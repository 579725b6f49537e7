"""Radial k-Hessian supercritical extremal problems on the unit ball.

Weighted radial norms, the instanton family and its asymptotics, maximisers
of the supercritical functional, a shooting solver for the associated
boundary-value problem and the mountain-pass level estimates.
"""

__version__ = "0.1.0"

from .errors import (BracketError, ConsistencyError, DomainError, HessextError,
                     InvalidInputError, NumericalDegeneracyError)
from .radial_core import (Params, RadialFunction, RadialGrid, exponent, gradient_energy,
                          luxemburg_norm, lq_norm, radial_bound, sphere_area,
                          supercritical_functional, tail_radius, x1_norm)
from .instanton import (ExpansionReport, InstantonSpec, a_eps, expansion_far_tail,
                        expansion_midrange, expansion_near_zero, instanton_value,
                        sharper_estimates, sobolev_constant_S, w_eps, w_eps_function)
from .extremal import (ConcentrationReport, OptimResult, SolverConfig,
                       best_subcritical_constant, concentration_diagnostic,
                       maximize_supercritical, step2_bound_check, u_from_v)
from .hessian_ode import (ShootResult, hessian_residual, integrate_outward,
                          k_admissibility_check, shoot)
from .mountain_pass import (LevelReport, functional_I, mp_upper_bound, noncompactness_level,
                            t_eps_solve)

"""Even capillary Minkowski-type problems on spherical caps.

The package turns contact-angle convex geometry into numerics: bodies are
capillary support functions on a discretized polar cap, the prescribed
Gauss-curvature problem is solved with the contact-angle (Robin) condition,
and the L_p version for exponents p in (-n, 1) is reached through a
curvature-image fixed-point iteration with monotone Lyapunov functionals.
"""

from .body import (CapillaryBody, cap_body, curvature_function, embed,
                   from_support, load_body, mixed_volume, save_body, volume)
from .domain import (CapDomain, ScalarField, TauField, evenness_residual,
                     integrate, make_domain, node_vectors, robin_residual,
                     tau_of)
from .errors import (BodyInvariantError, CapillaryError, ConvexityError,
                     CurvatureBlowupError, DomainMismatchError, ParameterError,
                     PhiSpecError, PositivityError, RobinViolationError,
                     SolverError)
from .functionals import (A_p, B_p, FunctionalReport, IdentityReport, Omega_p,
                          check_identity_and_inequalities)
from .lp_iteration import (IterationTrace, PhiSpec, check_trace_monotone,
                           fixed_point_residual, iterate, lambda_op,
                           multiplier, normalize, refined_residual)
from .minkowski import (CompatibilityReport, SolveOptions, check_compatibility,
                        solve, solve_info)

__version__ = "0.1.0"

__all__ = [
    "A_p", "B_p", "BodyInvariantError", "CapDomain", "CapillaryBody",
    "CapillaryError", "CompatibilityReport", "ConvexityError",
    "CurvatureBlowupError", "DomainMismatchError", "FunctionalReport",
    "IdentityReport", "IterationTrace", "Omega_p", "ParameterError",
    "PhiSpec", "PhiSpecError", "PositivityError", "RobinViolationError",
    "ScalarField", "SolveOptions", "SolverError", "TauField", "cap_body",
    "check_compatibility", "check_identity_and_inequalities",
    "check_trace_monotone", "curvature_function", "embed",
    "evenness_residual", "fixed_point_residual", "from_support", "integrate",
    "iterate", "lambda_op", "load_body", "make_domain", "mixed_volume",
    "multiplier", "node_vectors", "normalize", "refined_residual",
    "robin_residual", "save_body", "solve", "solve_info", "tau_of", "volume",
]

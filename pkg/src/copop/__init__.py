"""Composition operators on weighted Hilbert spaces of analytic functions.

Numerical counterparts of the counting-function characterizations of
boundedness, compactness, Schatten membership and closed range for
``C_phi f = f o phi`` on spaces normed by ``|f(0)|^2 + int |f'|^2 w dA``.
"""

from .errors import (ConfigError, ConstantMapError, ConvergenceError, CopopError,
                     DomainError, GeometryError, InsufficientMomentsError,
                     NotASelfMapError, QuadratureError, RootFindingError)
from .weights import (Weight, check_admissible, check_l1, compute_moments,
                      custom_weight, standard_weight, tabulated_weight)
from .selfmaps import (SelfMap, blaschke, dilation, identity, moebius, polynomial,
                       preimages, rotation, sigma)
from .quadrature import QuadratureRule, integrate
from .counting import counting_function, tau, verify_change_of_variables
from .operator import build_matrix, hs_norm_basis, hs_norm_integral, hs_report, kernel_diag
from .diagnostics import (berezin_transform, closed_range_probe, essential_norm_profile,
                          schatten_integral, test_function_norm)

__version__ = "0.1.0"

__all__ = [
    "CopopError", "ConfigError", "ConstantMapError", "ConvergenceError", "DomainError",
    "GeometryError", "InsufficientMomentsError", "NotASelfMapError", "QuadratureError",
    "RootFindingError",
    "Weight", "check_admissible", "check_l1", "compute_moments", "custom_weight",
    "standard_weight", "tabulated_weight",
    "SelfMap", "blaschke", "dilation", "identity", "moebius", "polynomial", "preimages",
    "rotation", "sigma",
    "QuadratureRule", "integrate",
    "counting_function", "tau", "verify_change_of_variables",
    "build_matrix", "hs_norm_basis", "hs_norm_integral", "hs_report", "kernel_diag",
    "berezin_transform", "closed_range_probe", "essential_norm_profile",
    "schatten_integral", "test_function_norm",
]

"""Theta-spherical functions, their transforms and Paley-Wiener diagnostics for
even root multiplicities.

Submodules: :mod:`rootsys` (root systems and Weyl groups), :mod:`multiplicity`
(multiplicities, Condition A, the K_eps pair tables), :mod:`exppoly` (exact
exponential polynomials, Cherednik and shift operators), :mod:`hcseries`
(Harish-Chandra series), :mod:`special` (Theta-spherical functions),
:mod:`transform` (transform, inversion, Paley-Wiener checks) and :mod:`cli`.
"""

__version__ = "0.1.0"

from .multiplicity import MultiplicityFn, condition_A
from .rootsys import ConvexBody, RootSystemData, ThetaSubset, build_root_system, parse_theta

__all__ = [
    "ConvexBody", "MultiplicityFn", "RootSystemData", "ThetaSubset", "build_root_system", "condition_A",
    "parse_theta", "__version__",
]

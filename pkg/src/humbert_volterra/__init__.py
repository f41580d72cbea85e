"""Volterra operators with Humbert-function kernels, their inversion, and applications.

Submodules
----------
special
    Pochhammer symbols, the Gauss function, ``Xi2`` and ``F0211``.
operators
    The forward operator ``N``, its inverse ``T`` and round-trip checks.
kernel
    The composed kernel of ``T o N`` and the closed-form ``tau'``.
epd
    Cauchy and Cauchy-Goursat problems for the degenerate hyperbolic equation.
estimators
    scikit-learn style wrappers around the operators.
cli
    Command-line front end.
"""

from .errors import (
    ConfigError,
    DomainError,
    HumbertVolterraError,
    NotConverged,
    PoleParameter,
    RegimeError,
    StencilOutOfDomain,
)
from .operators import (
    DegeneracyInput,
    GridFunction,
    Parameters,
    QuadratureSpec,
    Regime,
    forward_N,
    inverse_T,
    params_from_degeneracy,
    roundtrip_check,
)
from .special import (
    DEFAULT_CONTROL,
    Convergence,
    HypergeomValue,
    SeriesControl,
    convergence_classification,
    f0211,
    gauss_2f1,
    humbert_xi2,
    pochhammer,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "HumbertVolterraError",
    "NotConverged",
    "PoleParameter",
    "RegimeError",
    "StencilOutOfDomain",
    "DegeneracyInput",
    "GridFunction",
    "Parameters",
    "QuadratureSpec",
    "Regime",
    "forward_N",
    "inverse_T",
    "params_from_degeneracy",
    "roundtrip_check",
    "DEFAULT_CONTROL",
    "Convergence",
    "HypergeomValue",
    "SeriesControl",
    "convergence_classification",
    "f0211",
    "gauss_2f1",
    "humbert_xi2",
    "pochhammer",
]

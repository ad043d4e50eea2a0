"""Analytic torsion of model spectra and the congruence and error-budget
arithmetic that controls its approximation along a tower of quotients."""

from .congruence import (
    ExactMatrix,
    exclusion_radius,
    sl_count,
    valuation_certificate,
    verify_exclusion,
)
from .dance import ErrorBudget, exponents, optimize_beta, required_lambda
from .linalg import GroupPoint, cartan_distance, check_distance_lemma
from .mellin import AsymptoticExpansion, LaurentSeries, continue_mellin, finite_part
from .spectra import Spectrum, circle_spectrum, heat_trace, torus_form_spectrum
from .torsion import TorsionInput, analytic_torsion, l2_term
from .zeta import zeta_from_spectrum, zeta_prime_zero

__version__ = "0.1.0"

__all__ = [
    "AsymptoticExpansion",
    "ErrorBudget",
    "ExactMatrix",
    "GroupPoint",
    "LaurentSeries",
    "Spectrum",
    "TorsionInput",
    "analytic_torsion",
    "cartan_distance",
    "check_distance_lemma",
    "circle_spectrum",
    "continue_mellin",
    "exclusion_radius",
    "exponents",
    "finite_part",
    "heat_trace",
    "l2_term",
    "optimize_beta",
    "required_lambda",
    "sl_count",
    "torus_form_spectrum",
    "valuation_certificate",
    "verify_exclusion",
    "zeta_from_spectrum",
    "zeta_prime_zero",
]

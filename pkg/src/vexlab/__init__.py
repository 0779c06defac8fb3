"""Numerical toolkit for weighted variable-exponent Lebesgue spaces on the torus.

Luxemburg norms, Muckenhoupt-type weight scans, smoothing operators, best
trigonometric approximation, K-functionals and empirical inequality suites.
"""

from .approximation import (
    best_approximation,
    fourier_coeffs,
    jackson_kernel,
    jackson_stechkin,
    partial_sum,
    vallee_poussin,
)
from .descent import SolverOptions
from .errors import (
    CapabilityError,
    ConfigurationError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    ExprSyntaxError,
    VexlabError,
)
from .exprdsl import evaluate, parse
from .kfunctional import k_functional, realization_operator
from .norms import INFINITE, LebesgueSpace, luxemburg_norm, modular
from .numerics import TORUS, PeriodicFunction, QuadratureConfig, TrigPolynomial, integrate
from .smoothing import difference, modulus, r_delta, steklov
from .weights import ExponentFunction, Weight, classify_weight, muckenhoupt_constant

__version__ = "0.1.0"

__all__ = [
    "best_approximation",
    "fourier_coeffs",
    "jackson_kernel",
    "jackson_stechkin",
    "partial_sum",
    "vallee_poussin",
    "SolverOptions",
    "CapabilityError",
    "ConfigurationError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "ExprSyntaxError",
    "VexlabError",
    "evaluate",
    "parse",
    "k_functional",
    "realization_operator",
    "INFINITE",
    "LebesgueSpace",
    "luxemburg_norm",
    "modular",
    "TORUS",
    "PeriodicFunction",
    "QuadratureConfig",
    "TrigPolynomial",
    "integrate",
    "difference",
    "modulus",
    "r_delta",
    "steklov",
    "ExponentFunction",
    "Weight",
    "classify_weight",
    "muckenhoupt_constant",
]

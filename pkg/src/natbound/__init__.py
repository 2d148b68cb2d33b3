"""Polynomial Euler products, their zeta factorizations and explicit formulas."""

from .dirichlet import ProductSpec, coefficient_sieve, euler_product_eval
from .explicit import explicit_report, residue_at_pole
from .ghost import candidate_boundary, estermann_check, ghost_expand
from .polyparse import BivariatePolynomial, parse_polynomial
from .presets import PRESETS, get_preset
from .zetanum import hardy_Z, zeta

__all__ = [
    "BivariatePolynomial",
    "PRESETS",
    "ProductSpec",
    "candidate_boundary",
    "coefficient_sieve",
    "estermann_check",
    "euler_product_eval",
    "explicit_report",
    "get_preset",
    "ghost_expand",
    "hardy_Z",
    "parse_polynomial",
    "residue_at_pole",
    "zeta",
]

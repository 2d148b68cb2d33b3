import math
from fractions import Fraction

import numpy as np
import pytest

from natbound.dirichlet import ConvergenceError, ProductSpec, coefficient_sieve
from natbound.explicit import (
    Comparison,
    PoleError,
    cutoff,
    default_grid,
    error_exponent_fit,
    main_poles,
    main_term_constants,
    residue_at_pole,
    smoothed_sum,
    zero_factors,
    zero_term_coefficient,
)
from natbound.polyparse import BivariatePolynomial, parse_polynomial
from natbound.presets import get_preset
from natbound.zetanum import gamma, zeta, zeta_derivative

Z6 = get_preset("polarised-z6").spec
ZETA = ProductSpec(BivariatePolynomial.one(), ((1, 0, 1),))


def test_residues_z6():
    assert abs(residue_at_pole(Z6, 7).value - 2.377) < 0.002
    assert abs(residue_at_pole(Z6, 6).value + 1.168) < 0.002
    r5 = residue_at_pole(Z6, 5).value
    assert abs(r5 - 0.0699) < 0.0005
    assert abs(0.1149 / r5 - zeta(2).real) < 5e-3


def test_residue_of_zeta_squared_prefactor():
    # zeta(s) zeta(s - 1) has residue zeta(2) at s = 2
    spec = ProductSpec(BivariatePolynomial.one(), ((1, 0, 1), (1, 1, 1)))
    assert abs(residue_at_pole(spec, 2).value - zeta(2).real) < 1e-12


def test_residue_errors():
    with pytest.raises(PoleError):
        residue_at_pole(Z6, Fraction(13, 2))
    # zeta(s + 1) has its pole at s = 0, left of the region the remainder product reaches
    spec = ProductSpec(parse_polynomial("1 + T + p*T^2"), ((1, -1, 1),))
    with pytest.raises(ConvergenceError):
        residue_at_pole(spec, 0)


def test_main_poles_and_constants():
    assert main_poles(Z6) == [7, 6, 5]
    t = main_term_constants(Z6)
    assert [float(m.exponent) for m in t] == [7 / 3, 2, 5 / 3]
    assert abs(t[0].constant_A - 2.830) < 0.005
    assert abs(t[0].constant_A / t[0].constant_B - 3) < 1e-12
    assert abs(gamma(5 / 3).real * 0.1149 - 0.1037) < 0.0005


def test_smoothed_sum_all_ones():
    # sum_{n>=1} e^(-n/x) = 1/(e^(1/x) - 1)
    for x in (10.0, 100.0):
        c = coefficient_sieve(ZETA, cutoff(x))
        assert abs(smoothed_sum(c, x) - 1 / math.expm1(1 / x)) < 1e-10


def test_smoothed_sum_needs_coefficients():
    with pytest.raises(ValueError):
        smoothed_sum(coefficient_sieve(ZETA, 100), 100.0)


def test_zero_term_formula():
    f = zero_factors(Z6)
    assert [(g.a, g.b, g.c) for g in f] == [(2, 8, -1)]  # zeta(2s - 8) = zeta(6w - 8)
    g1 = 14.134725141735
    zt = zero_term_coefficient(Z6, g1)
    rho = complex(0.5, g1)
    assert abs(zt.w - (rho + 8) / 6) < 1e-15
    # alpha * k * a * zeta'(rho) / Gamma(w) recovers the cofactor H, which is finite and nonzero
    H = zt.alpha * 6 * zeta_derivative(rho) / gamma(zt.w)
    assert 0 < abs(H) < math.inf


def test_default_grid():
    assert np.allclose(default_grid(), [1e2, 10**2.5, 1e3, 10**3.5, 1e4])


def test_fit_floor_and_errors():
    flat = [Comparison(x, 1e6, 1e6, 0.0) for x in default_grid()]
    assert error_exponent_fit(flat).verdict == "error dominated by evaluation precision"
    with pytest.raises(ValueError):
        error_exponent_fit(flat[:3])


def test_fit_recovers_known_slope():
    comps = [Comparison(x, 1e9 + 3 * x**1.4, 1e9, 0.0) for x in default_grid(1e4, 1e2, 2)]
    assert abs(error_exponent_fit(comps).slope - 1.4) < 0.01


def test_report_residuals(z6_report):
    rep = z6_report
    assert rep.choice.winner == "B" and rep.choice.discrepancy >= 2
    for c in rep.comparisons:
        assert abs(c.residual) <= 5 * c.x**1.45
    assert 1.30 <= rep.fit.slope <= 1.55
    assert rep.conjugate_imag_max < 1e-12


def test_report_without_zeros_leaves_x2_bounded(z6_report):
    # K = 0: the residual is dominated by lower-order terms, bounded by a constant times x^2
    for x in default_grid():
        c = next(c for c in z6_report.comparisons if c.x == x)
        k0 = c.residual + c.oscillatory
        assert abs(k0) / x**2 < 0.05


def test_report_serializations(z6_report):
    doc = z6_report.to_json()
    assert doc["coefficient_support"].startswith("a_{m^3}")
    assert [r["s0"] for r in doc["reference_residue_comparison"]] == ["7/1", "6/1", "5/1"]
    lines = z6_report.to_csv().splitlines()
    assert lines[0] == "x,A_direct,main,oscillatory,residual" and len(lines) == 6

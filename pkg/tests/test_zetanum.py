import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from natbound.zetanum import (
    ZetaDomainError,
    functional_equation_residual,
    gamma,
    hardy_Z,
    loggamma,
    siegel_theta,
    zeta,
    zeta_derivative,
)

mpmath.mp.dps = 30


def rel(a, b):
    return abs(complex(a) - complex(b)) / abs(complex(b))


@pytest.mark.parametrize(
    "s, expected",
    [(2, math.pi**2 / 6), (0, -0.5), (-1, -1 / 12), (3, 1.2020569031595942), (0.5, -1.4603545088095868)],
)
def test_special_values(s, expected):
    assert rel(zeta(s), expected) < 1e-13


def test_trivial_zero_exact():
    assert zeta(-2.0) == 0


def test_against_mpmath_grid():
    pts = [complex(x, y) for x in np.linspace(-2, 3, 6) for y in (0.5, 7.3, 31.0, -49.0)]
    vals = zeta(np.array(pts))
    worst = max(rel(v, complex(mpmath.zeta(p))) for v, p in zip(vals, pts))
    assert worst < 1e-12


def test_high_on_critical_line():
    for t in (1000.0, 4999.5):
        s = complex(0.5, t)
        assert rel(zeta(s), complex(mpmath.zeta(s))) < 1e-10


def test_array_matches_scalar():
    pts = np.array([2.5, 0.5 + 14j, -1.5 + 3j, 3 - 40j])
    assert np.array_equal(zeta(pts), np.array([zeta(p) for p in pts]))


def test_domain_errors():
    with pytest.raises(ZetaDomainError):
        zeta(1.0)
    with pytest.raises(ZetaDomainError):
        zeta(0.5 + 2e4j)
    with pytest.raises(ZetaDomainError):
        gamma(-3.0)
    with pytest.raises(ZetaDomainError):
        hardy_Z(-1.0)
    with pytest.raises(ValueError):
        zeta(2.0, prec=20)


@pytest.mark.parametrize(
    "s, expected",
    [(0, -0.5 * math.log(2 * math.pi)), (-1, -0.16542114370045092), (2, -0.93754825431584375)],
)
def test_derivative_values(s, expected):
    assert rel(zeta_derivative(s), expected) < 1e-9


@given(st.floats(-1.5, 3.0), st.floats(-40.0, 40.0))
def test_derivative_matches_finite_difference(x, y):
    s = complex(x, y)
    if abs(s - 1) < 0.2:
        return
    h = 1e-5
    fd = (zeta(s + h) - zeta(s - h)) / (2 * h)
    d = zeta_derivative(s)
    assert abs(fd - d) <= 1e-6 * max(1.0, abs(d))


def test_gamma_values():
    assert rel(gamma(2), 1) < 1e-13
    assert rel(gamma(7 / 3), 4 / 9 * float(mpmath.gamma(1 / 3))) < 1e-12
    assert rel(gamma(5 / 3), 2 / 3 * float(mpmath.gamma(2 / 3))) < 1e-12
    assert abs(gamma(7 / 3).real - 1.190639348) < 1e-9
    assert abs(gamma(5 / 3).real - 0.902745292) < 1e-9


@given(st.floats(-4.5, 6.0), st.floats(-20.0, 20.0))
def test_gamma_recurrence(x, y):
    s = complex(x, y)
    if abs(y) < 1e-3 and abs(x - round(x)) < 1e-3 and x < 0.5:
        return
    assert rel(gamma(s + 1), s * gamma(s)) < 1e-10


def test_loggamma_against_mpmath():
    for z in (0.25 + 50j, 3.5, 0.1 + 0.1j, -2.5 + 1j):
        assert abs(loggamma(z) - complex(mpmath.loggamma(z))) < 1e-11


def test_theta_against_mpmath():
    for t in (5.0, 60.0, 1000.0, 4000.0):
        expected = float(mpmath.siegeltheta(t))
        assert abs(math.remainder(siegel_theta(t) - expected, 2 * math.pi)) < 1e-9


def test_hardy_Z_real_and_brackets():
    assert np.sign(hardy_Z(14.0)) != np.sign(hardy_Z(14.2))
    assert hardy_Z(17.8) * hardy_Z(21.5) < 0
    t = np.linspace(10, 5000, 400)
    _, im = hardy_Z(t, return_imag=True)
    assert np.max(np.abs(im)) < 1e-12


def test_functional_equation_grid():
    worst = 0.0
    for x in np.linspace(-2, 3, 11):
        for y in np.linspace(-50, 50, 21):
            s = complex(x, y)
            if y == 0 and x == round(x) and (x <= 0 or x >= 1):
                continue
            if abs(s - 1) < 0.3:
                continue
            worst = max(worst, functional_equation_residual(s))
    assert worst <= 1e-8

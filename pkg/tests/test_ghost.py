from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from natbound.ghost import (
    DENSITY_VARIANTS,
    boundary_prime_density,
    candidate_boundary,
    convergence_abscissa,
    density_primes,
    dyadic_blocks_nonzero,
    estermann_check,
    factorization_identity_holds,
    ghost_expand,
    local_zero_abscissae,
    local_zero_spot_check,
)
from natbound.polyparse import BivariatePolynomial, parse_polynomial, product_reconstruct, series_from_polynomial

QUAD = parse_polynomial("1 + T + p*T^2")

small_polys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(1, 3)), st.integers(-3, 3).filter(bool), max_size=4
).map(lambda d: BivariatePolynomial.from_dict({(0, 0): 1, **d}))


@given(small_polys, st.integers(1, 10))
def test_exponents_are_integers_and_reconstruct(W, depth):
    # ghost_expand raises rather than rounding, so reaching here means every e(n,m) was integral
    exp = ghost_expand(W, depth)
    assert product_reconstruct(exp, depth) == series_from_polynomial(W, depth)


@given(small_polys, small_polys)
def test_expansion_is_multiplicative(W1, W2):
    depth = 8
    prod = ghost_expand(W1 * W2, depth)
    summed = ghost_expand(W1, depth) + ghost_expand(W2, depth)
    assert prod.exponents == summed.exponents


@given(small_polys)
def test_ratios_bounded_by_degree_ratio(W):
    r = max(Fraction(n, m) for (n, m), _ in W.terms if m > 0) if not W.is_one else Fraction(0)
    for (n, m) in ghost_expand(W, 10).exponents:
        assert Fraction(n, m) <= r


def test_single_factor():
    assert ghost_expand(parse_polynomial("1 - p^2*T^3"), 12).exponents == {(2, 3): -1}


def test_quadratic_low_rows():
    e = ghost_expand(QUAD, 24)
    assert (e.get(0, 1), e.get(0, 2), e.get(1, 2), e.get(1, 3), e.get(2, 4)) == (1, -1, 1, -1, -1)
    assert e.get(2, 5) == 1 and e.get(4, 9) == 1


def test_row_beyond_depth_raises():
    with pytest.raises(KeyError):
        ghost_expand(QUAD, 4).get(0, 5)


def test_convergence_abscissa():
    assert convergence_abscissa(QUAD) == 1
    assert convergence_abscissa(parse_polynomial("1 + p^5*T^2")) == 3
    assert convergence_abscissa(BivariatePolynomial.one()) is None


def test_candidate_boundary_quadratic():
    b = candidate_boundary(ghost_expand(QUAD, 24))
    # tail rows approach 1/2 from below along n = (m-1)/2
    assert Fraction(5, 11) <= b.tail_sup < Fraction(1, 2)
    assert b.global_sup == Fraction(1, 2)


def test_estermann_terminating():
    W = parse_polynomial("1 - T - p*T^2 + p*T^3")  # (1 - T)(1 - p T^2)
    rep = estermann_check(W, 24)
    assert rep.terminated
    assert rep.factors == [(0, 1, -1), (1, 2, -1)]
    assert factorization_identity_holds(W, rep.factors)


def test_estermann_non_terminating():
    rep = estermann_check(QUAD, 24)
    assert not rep.terminated
    assert rep.remainder_degree == 25
    assert all(nz for _, _, nz in dyadic_blocks_nonzero(ghost_expand(QUAD, 24)))


def test_estermann_with_positive_exponents():
    W = parse_polynomial("1 + T")  # (1 - T^2)/(1 - T)
    rep = estermann_check(W, 12)
    assert rep.terminated and rep.factors == [(0, 1, 1), (0, 2, -1)]
    assert factorization_identity_holds(W, rep.factors)


def test_density_variants():
    exp = ghost_expand(QUAD, 41)
    assert set(DENSITY_VARIANTS) == {"shifted-line", "ratio"}
    primes = density_primes(exp, "shifted-line")
    assert primes and all(p % 2 for p in primes)
    rep = boundary_prime_density(exp)
    assert rep.variant == "shifted-line"
    assert all(c >= 0 for _, c in rep.window_counts)


def test_density_rejects_bad_input():
    exp = ghost_expand(QUAD, 10)
    with pytest.raises(ValueError):
        boundary_prime_density(exp, variant="other")
    with pytest.raises(ValueError):
        boundary_prime_density(exp, variant="ratio")
    with pytest.raises(ValueError):
        boundary_prime_density(exp, xs=[8.0])  # needs depth 16


def test_local_zeros_on_half_line():
    # 1 + p^-s + p^(1-2s) has |roots| = p^(-1/2) when 1 < 4p
    for p in (2, 3, 5, 7):
        assert local_zero_abscissae(QUAD, p) == [0.5, 0.5]
    spot = local_zero_spot_check(QUAD, Fraction(3, 5), [2, 3, 5])
    assert spot["all_left_of_beta"]

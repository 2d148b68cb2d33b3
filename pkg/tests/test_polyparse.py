from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from natbound.polyparse import (
    BivariatePolynomial,
    PolynomialError,
    PolynomialSyntaxError,
    TruncatedSeries,
    format_polynomial,
    parse_polynomial,
    series_exp,
    series_from_polynomial,
    series_log,
)

# valid Euler-factor polynomials: constant 1, every other monomial carries T
monomials = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(1, 4)), st.integers(-5, 5).filter(bool), max_size=5
)
polys = monomials.map(lambda d: BivariatePolynomial.from_dict({(0, 0): 1, **d}))


def test_parse_basic():
    W = parse_polynomial("1 + T + p*T^2")
    assert W.as_dict() == {(0, 0): 1, (0, 1): 1, (1, 2): 1}
    assert str(W) == "1 + T + p*T^2"


def test_parse_combines_like_terms_and_coefficients():
    W = parse_polynomial("1 + 2*p^2*T - p^2*T + 3 T^3 - T^3")
    assert W.as_dict() == {(0, 0): 1, (2, 1): 1, (0, 3): 2}


def test_parse_order_independent():
    assert parse_polynomial("p*T^2 + T + 1") == parse_polynomial("1 + T + p*T^2")


@pytest.mark.parametrize(
    "text",
    ["", "1 +", "1 + T^", "1 + x", "(1 - T)", "1 + T**2", "1 + p^-1*T"],
)
def test_syntax_errors_carry_position(text):
    with pytest.raises(PolynomialSyntaxError) as info:
        parse_polynomial(text)
    assert info.value.position >= 0


@pytest.mark.parametrize("text", ["2 + T", "1 + p", "T", "1 + T - 2"])
def test_invariant_violations(text):
    with pytest.raises(PolynomialError):
        parse_polynomial(text)


def test_zero_coefficient_rejected_directly():
    with pytest.raises(PolynomialError):
        BivariatePolynomial((((0, 0), 1), ((1, 1), 0)))


@given(polys)
def test_format_parse_round_trip(W):
    assert parse_polynomial(format_polynomial(W)) == W


@given(st.text(alphabet="1234pT^*+- ", max_size=20))
def test_parser_total(text):
    # every input either parses or raises the documented error type
    try:
        W = parse_polynomial(text)
    except PolynomialError:
        return
    assert W.coefficient(0, 0) == 1


@given(polys, st.integers(1, 8))
def test_exp_log_round_trip(W, order):
    assert series_exp(series_log(W, order)) == series_from_polynomial(W, order)


@given(polys, polys)
def test_log_is_additive(W1, W2):
    order = 6
    lhs = series_log(W1 * W2, order)
    rhs = series_log(W1, order) + series_log(W2, order)
    assert lhs == rhs


def test_log_of_one_minus_T():
    L = series_log(parse_polynomial("1 - T"), 4)
    assert [L[m] for m in range(1, 5)] == [(-1,), (Fraction(-1, 2),), (Fraction(-1, 3),), (Fraction(-1, 4),)]


def test_truncation_index_error():
    S = TruncatedSeries(2, ((1,),))
    with pytest.raises(IndexError):
        S[3]

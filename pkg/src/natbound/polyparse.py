"""Exact bivariate polynomials W(u, Y) and truncated power series in Y.

A local Euler factor ``W(p, p^-s)`` is encoded with ``u -> p`` and ``Y -> p^-s``;
in the text grammar the variables are written ``p`` and ``T``, so
``"1 + T + p*T^2"`` is the factor ``1 + p^-s + p^(1-2s)``.

Series coefficients are univariate polynomials in ``u`` stored as dense tuples
(index = degree) of ints or ``Fraction``; nothing here touches floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

__all__ = [
    "PolynomialError",
    "PolynomialSyntaxError",
    "BivariatePolynomial",
    "TruncatedSeries",
    "parse_polynomial",
    "series_from_polynomial",
    "series_log",
    "series_exp",
    "log_numerators",
    "product_reconstruct",
]


class PolynomialError(ValueError):
    """Invalid polynomial (violates the Euler-factor invariants)."""


class PolynomialSyntaxError(PolynomialError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# ---------------------------------------------------------------------------
# univariate helpers (dense tuples, index = degree of u)
# ---------------------------------------------------------------------------

UPoly = tuple


def _trim(c: list) -> UPoly:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def upoly_add(a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def upoly_sub(a: UPoly, b: UPoly) -> UPoly:
    return upoly_add(a, tuple(-x for x in b))


def upoly_mul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return _trim(out)


def upoly_scale(a: UPoly, c) -> UPoly:
    return _trim([c * x for x in a])


def upoly_inflate(a: UPoly, k: int) -> UPoly:
    """Substitute u -> u^k."""
    if not a:
        return ()
    out = [0] * ((len(a) - 1) * k + 1)
    for i, x in enumerate(a):
        out[i * k] = x
    return _trim(out)


def upoly_monomial(n: int, c=1) -> UPoly:
    return _trim([0] * n + [c])


# ---------------------------------------------------------------------------
# BivariatePolynomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariatePolynomial:
    """Integer polynomial in (u, Y) with W(0,0)=1 and no pure u-powers.

    ``terms`` is the canonical tuple of ``((n, m), coeff)`` sorted by ``(m, n)``;
    build instances with :meth:`from_dict` or :func:`parse_polynomial`.
    """

    terms: tuple[tuple[tuple[int, int], int], ...]

    def __post_init__(self):
        seen = {}
        for (n, m), c in self.terms:
            if not isinstance(c, int) or isinstance(c, bool):
                raise PolynomialError(f"coefficient of p^{n}*T^{m} must be an integer")
            if n < 0 or m < 0:
                raise PolynomialError("negative exponents are not allowed")
            if c == 0:
                raise PolynomialError("zero coefficients must not be stored")
            if (n, m) in seen:
                raise PolynomialError(f"duplicate monomial p^{n}*T^{m}")
            seen[(n, m)] = c
        if seen.get((0, 0)) != 1:
            raise PolynomialError("constant term must be exactly 1")
        for (n, m) in seen:
            if m == 0 and n > 0:
                raise PolynomialError(f"monomial p^{n} without a T-power is not allowed")
        canonical = tuple(sorted(seen.items(), key=lambda kv: (kv[0][1], kv[0][0])))
        if canonical != self.terms:
            object.__setattr__(self, "terms", canonical)

    @classmethod
    def from_dict(cls, terms: Mapping[tuple[int, int], int]) -> "BivariatePolynomial":
        return cls(tuple((k, v) for k, v in terms.items() if v != 0))

    @classmethod
    def one(cls) -> "BivariatePolynomial":
        return cls((((0, 0), 1),))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.terms)

    def coefficient(self, n: int, m: int) -> int:
        return self.as_dict().get((n, m), 0)

    @property
    def y_degree(self) -> int:
        return max(m for (_, m), _ in self.terms)

    @property
    def is_one(self) -> bool:
        return len(self.terms) == 1

    def y_coefficient(self, m: int) -> UPoly:
        """Coefficient of Y^m as a polynomial in u."""
        row = {n: c for (n, mm), c in self.terms if mm == m}
        if not row:
            return ()
        return _trim([row.get(i, 0) for i in range(max(row) + 1)])

    def __mul__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        out: dict[tuple[int, int], int] = {}
        for (n1, m1), c1 in self.terms:
            for (n2, m2), c2 in other.terms:
                key = (n1 + n2, m1 + m2)
                out[key] = out.get(key, 0) + c1 * c2
        return BivariatePolynomial.from_dict(out)

    def __call__(self, u, y):
        return sum(c * u**n * y**m for (n, m), c in self.terms)

    def __str__(self) -> str:
        return format_polynomial(self)


def bivariate_from_rows(rows: Mapping[int, UPoly]) -> dict[tuple[int, int], int]:
    out = {}
    for m, row in rows.items():
        for n, c in enumerate(row):
            if c:
                out[(n, m)] = c
    return out


# ---------------------------------------------------------------------------
# parsing and printing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"(?P<int>\d+)|(?P<var>[pT])|(?P<caret>\^)|(?P<star>\*)|(?P<sign>[+-])|(?P<space>\s+)")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if match.lastgroup != "space":
            tokens.append((match.lastgroup, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


def parse_polynomial(text: str) -> BivariatePolynomial:
    """Parse ``coeff*p^n*T^m`` sums into a validated :class:`BivariatePolynomial`.

    Like terms are combined, so the result does not depend on term order.
    Raises :class:`PolynomialSyntaxError` (with ``position``) on malformed input
    and :class:`PolynomialError` when the Euler-factor invariants fail.
    """
    tokens = _tokenize(text)
    i = 0
    terms: dict[tuple[int, int], int] = {}

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def parse_atom():
        kind, var, pos = take()
        exp = 1
        if peek()[0] == "caret":
            take()
            kind2, val2, pos2 = peek()
            if kind2 == "sign" and val2 == "-":
                raise PolynomialSyntaxError("negative exponents are not allowed", pos2)
            if kind2 != "int":
                raise PolynomialSyntaxError("expected an exponent", pos2)
            take()
            exp = int(val2)
        return var, exp

    def parse_term(sign: int):
        kind, value, pos = peek()
        coeff = 1
        n = m = 0
        seen_any = False
        if kind == "int":
            take()
            coeff = int(value)
            seen_any = True
        while True:
            kind, value, pos = peek()
            if kind == "star":
                if not seen_any:
                    raise PolynomialSyntaxError("unexpected '*'", pos)
                take()
                kind, value, pos = peek()
                if kind != "var":
                    raise PolynomialSyntaxError("expected 'p' or 'T' after '*'", pos)
            if kind == "var":
                var, exp = parse_atom()
                if var == "p":
                    n += exp
                else:
                    m += exp
                seen_any = True
                continue
            break
        if not seen_any:
            raise PolynomialSyntaxError("expected a term", pos)
        terms[(n, m)] = terms.get((n, m), 0) + sign * coeff

    sign = 1
    if peek()[0] == "sign":
        sign = -1 if take()[1] == "-" else 1
    parse_term(sign)
    while peek()[0] == "sign":
        sign = -1 if take()[1] == "-" else 1
        parse_term(sign)
    kind, value, pos = peek()
    if kind != "end":
        raise PolynomialSyntaxError(f"unexpected token {value!r}", pos)
    return BivariatePolynomial.from_dict(terms)


def _monomial_text(n: int, m: int, c: int) -> str:
    parts = []
    if n == 0 and m == 0:
        return str(c)
    if c != 1:
        parts.append(str(c))
    if n:
        parts.append("p" if n == 1 else f"p^{n}")
    if m:
        parts.append("T" if m == 1 else f"T^{m}")
    return "*".join(parts)


def format_polynomial(W: BivariatePolynomial) -> str:
    out = []
    for k, ((n, m), c) in enumerate(W.terms):
        body = _monomial_text(n, m, abs(c))
        if k == 0:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(f" {'+' if c > 0 else '-'} {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# truncated series in Y
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedSeries:
    """Power series ``sum_m coeffs[m](u) Y^m`` modulo ``Y^(order+1)``.

    ``coeffs`` has length ``order + 1``; entry 0 is the constant term.
    """

    order: int
    coeffs: tuple[UPoly, ...]

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        c = tuple(_trim(list(row)) for row in self.coeffs)
        c = c[: self.order + 1] + ((),) * (self.order + 1 - len(c))
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, m: int) -> UPoly:
        if m > self.order:
            raise IndexError(f"coefficient Y^{m} is beyond the truncation order {self.order}")
        return self.coeffs[m]

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        order = min(self.order, other.order)
        return TruncatedSeries(order, tuple(upoly_add(self[m], other[m]) for m in range(order + 1)))

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        order = min(self.order, other.order)
        out = []
        for m in range(order + 1):
            acc: UPoly = ()
            for k in range(m + 1):
                if self[k] and other[m - k]:
                    acc = upoly_add(acc, upoly_mul(self[k], other[m - k]))
            out.append(acc)
        return TruncatedSeries(order, tuple(out))

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(min(order, self.order), self.coeffs[: order + 1])

    def is_one(self) -> bool:
        return self.coeffs[0] == (1,) and all(not c for c in self.coeffs[1:])

    def to_terms(self) -> dict[tuple[int, int], Fraction | int]:
        return bivariate_from_rows(dict(enumerate(self.coeffs)))


def series_from_polynomial(W: BivariatePolynomial, order: int) -> TruncatedSeries:
    return TruncatedSeries(order, tuple(W.y_coefficient(m) for m in range(order + 1)))


def log_numerators(W: BivariatePolynomial, order: int) -> list[UPoly]:
    """Integer polynomials ``B_m = m * b_m`` where ``log W = sum b_m Y^m``.

    Uses ``Y W' = W (Y (log W)')``, i.e. ``B_m = m w_m - sum_{k<m} B_k w_{m-k}``,
    which stays in integer arithmetic. ``B_0`` is ``()``.
    """
    w = [W.y_coefficient(m) for m in range(order + 1)]
    B: list[UPoly] = [()]
    for m in range(1, order + 1):
        acc = upoly_scale(w[m], m)
        for k in range(1, m):
            if B[k] and w[m - k]:
                acc = upoly_sub(acc, upoly_mul(B[k], w[m - k]))
        B.append(acc)
    return B


def series_log(W: BivariatePolynomial | TruncatedSeries, order: int | None = None) -> TruncatedSeries:
    """Formal logarithm modulo ``Y^(order+1)``; exact rational coefficients."""
    if isinstance(W, TruncatedSeries):
        return _series_log_general(W if order is None else W.truncate(order))
    if order is None or order < 1:
        raise ValueError("order must be >= 1")
    B = log_numerators(W, order)
    coeffs = [()] + [upoly_scale(B[m], Fraction(1, m)) for m in range(1, order + 1)]
    return TruncatedSeries(order, tuple(coeffs))


def _series_log_general(S: TruncatedSeries) -> TruncatedSeries:
    if S[0] != (1,):
        raise ValueError("logarithm needs constant term 1")
    M = S.order
    B: list[UPoly] = [()]
    for m in range(1, M + 1):
        acc = upoly_scale(S[m], m)
        for k in range(1, m):
            if B[k] and S[m - k]:
                acc = upoly_sub(acc, upoly_mul(B[k], S[m - k]))
        B.append(acc)
    return TruncatedSeries(M, tuple([()] + [upoly_scale(B[m], Fraction(1, m)) for m in range(1, M + 1)]))


def series_exp(L: TruncatedSeries) -> TruncatedSeries:
    """Formal exponential of a series with zero constant term."""
    if L[0]:
        raise ValueError("exponential needs zero constant term")
    M = L.order
    E: list[UPoly] = [(1,)]
    for m in range(1, M + 1):
        acc: UPoly = ()
        for k in range(1, m + 1):
            if L[k] and E[m - k]:
                acc = upoly_add(acc, upoly_scale(upoly_mul(L[k], E[m - k]), k))
        E.append(upoly_scale(acc, Fraction(1, m)))
    return TruncatedSeries(M, tuple(E))


def _factor_power_series(n: int, m: int, e: int, order: int) -> TruncatedSeries:
    """Series of ``(1 - u^n Y^m)^(-e)`` by the binomial theorem."""
    rows: list[UPoly] = [()] * (order + 1)
    rows[0] = (1,)
    j = 1
    while j * m <= order:
        if e > 0:
            c = comb(e + j - 1, j)
        else:
            c = (-1) ** j * comb(-e, j)
        if c == 0:
            break
        rows[j * m] = upoly_monomial(n * j, c)
        j += 1
    return TruncatedSeries(order, tuple(rows))


def product_reconstruct(expansion, order: int) -> TruncatedSeries:
    """Multiply out ``prod (1 - u^n Y^m)^(-e(n,m))`` modulo ``Y^(order+1)``.

    ``expansion`` is a :class:`~natbound.ghost.GhostExpansion` (anything with
    ``depth`` and ``exponents``). Independent of the log/Mobius route.
    """
    if expansion.depth < order:
        raise ValueError(f"expansion depth {expansion.depth} is smaller than the requested order {order}")
    out = TruncatedSeries(order, ((1,),))
    for (n, m), e in sorted(expansion.exponents.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if m > order:
            continue
        out = out * _factor_power_series(n, m, e, order)
    return out


def series_equal_polynomial(S: TruncatedSeries, W: BivariatePolynomial) -> bool:
    return S == series_from_polynomial(W, S.order)


def iter_nonzero(S: TruncatedSeries) -> Iterable[tuple[int, int, Fraction | int]]:
    for m, row in enumerate(S.coeffs):
        for n, c in enumerate(row):
            if c:
                yield n, m, c

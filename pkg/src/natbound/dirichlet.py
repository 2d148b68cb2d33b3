"""Dirichlet coefficients and numerical values of Euler products ``prod_p W(p, p^-s)``.

Coefficients are exact integers, produced two independent ways: multiplicative
assembly from local factors, and repeated Dirichlet convolution of the zeta
factors of the ghost expansion. Numerical values use the acceleration

    prod_p W = prod_{m <= M} zeta(m s - n)^e(n, m) * prod_{p <= P} R_M(p, p^-s),

where ``R_M`` starts at ``Y^(M+1)`` and is evaluated directly in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._arith import is_prime, mobius, primes_up_to
from .ghost import GhostExpansion, ghost_expand
from .polyparse import BivariatePolynomial
from .zetanum import MAX_PREC, zeta

DEFAULT_ACCEL_DEPTH = 8
DEFAULT_PRIME_CUTOFF = 100_000
_ZETA_REL_ERR = 10.0**-MAX_PREC


class ConvergenceError(ValueError):
    """Euler product evaluated outside its region of absolute convergence."""


class AccuracyError(ArithmeticError):
    """Requested accuracy not reachable with the given acceleration parameters."""


# ---------------------------------------------------------------------------
# specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class ZetaFactor:
    """``zeta(a s - b)^c``."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a < 1 or self.c == 0:
            raise ValueError(f"invalid zeta factor {self}")

    def pole(self) -> Fraction:
        """The ``s`` where ``a s - b = 1``."""
        return Fraction(self.b + 1, self.a)


ZetaFactorList = tuple[ZetaFactor, ...]


def factor_list(items) -> ZetaFactorList:
    """Normalize ``(a, b, c)`` triples; duplicate ``(a, b)`` pairs are rejected."""
    out = tuple(sorted(f if isinstance(f, ZetaFactor) else ZetaFactor(*f) for f in items))
    keys = [(f.a, f.b) for f in out]
    if len(set(keys)) != len(keys):
        raise ValueError("prefactor (a, b) pairs must be distinct")
    return out


@dataclass(frozen=True)
class ProductSpec:
    """``prod zeta(a s - b)^c * prod_p W(p, p^-s)``, with the user variable ``w = s / variable_scale``."""

    W: BivariatePolynomial
    prefactors: ZetaFactorList = ()
    variable_scale: int = 1

    def __post_init__(self):
        object.__setattr__(self, "prefactors", factor_list(self.prefactors))
        if self.variable_scale < 1:
            raise ValueError("variable_scale must be a positive integer")

    def to_json(self) -> dict:
        return {
            "W": str(self.W),
            "prefactors": [[f.a, f.b, f.c] for f in self.prefactors],
            "variable_scale": self.variable_scale,
        }


# ---------------------------------------------------------------------------
# local factors
# ---------------------------------------------------------------------------


def _mul_trunc(a: list[int], b: list[int], k_max: int) -> list[int]:
    out = [0] * (k_max + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(0, k_max + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def _zeta_local(p: int, f: ZetaFactor, k_max: int) -> list[int]:
    """``(1 - p^b X^a)^(-c)`` as a power series in ``X`` to order ``k_max``."""
    out = [0] * (k_max + 1)
    z = p**f.b
    for k in range(k_max // f.a + 1):
        if f.c > 0:
            coeff = math.comb(f.c + k - 1, k)
        else:
            coeff = (-1) ** k * math.comb(-f.c, k)
        out[k * f.a] = coeff * z**k
    return out


def local_factor_series(spec: ProductSpec, p: int, k_max: int) -> list[int]:
    """Coefficients of ``p^(-j s)``, ``j = 0..k_max``, of the full local factor at ``p``."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    series = [0] * (k_max + 1)
    for (n, m), c in spec.W.terms:
        if m <= k_max:
            series[m] += c * p**n
    for f in spec.prefactors:
        series = _mul_trunc(series, _zeta_local(p, f, k_max), k_max)
    return series


# ---------------------------------------------------------------------------
# coefficient arrays
# ---------------------------------------------------------------------------


def integer_root(n: int, k: int) -> int:
    """``floor(n^(1/k))`` exactly."""
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


@dataclass(frozen=True)
class CoefficientArray:
    """``a_1..a_N``. With ``scale > 1`` only ``a_{m^scale} = base[m]`` can be nonzero."""

    N: int
    base: tuple[int, ...]  # base[0] unused, base[m] for m = 1..floor(N^(1/scale))
    scale: int = 1

    def __post_init__(self):
        if len(self.base) < 2 or self.base[1] != 1:
            raise ValueError("a_1 must be 1")

    @property
    def support_note(self) -> str | None:
        return None if self.scale == 1 else ("cubes" if self.scale == 3 else f"{self.scale}-th powers")

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise IndexError(n)
        if self.scale == 1:
            return self.base[n]
        r = integer_root(n, self.scale)
        return self.base[r] if r**self.scale == n else 0

    def nonzero(self) -> tuple[np.ndarray, list[int]]:
        """Indices (as float64) and exact values of the nonzero entries, ascending."""
        idx = [m**self.scale for m in range(1, len(self.base)) if self.base[m]]
        vals = [self.base[m] for m in range(1, len(self.base)) if self.base[m]]
        return np.array(idx, dtype=float), vals

    def values(self) -> list[int]:
        """Dense ``[a_1, ..., a_N]``."""
        out = [0] * self.N
        for m in range(1, len(self.base)):
            out[m**self.scale - 1] = self.base[m]
        return out

    def to_csv(self) -> str:
        rows = ["n,a_n"] + [f"{n},{a}" for n, a in enumerate(self.values(), start=1)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str, scale: int = 1) -> "CoefficientArray":
        lines = text.strip().splitlines()
        if lines[0] != "n,a_n":
            raise ValueError("expected header n,a_n")
        vals = [int(line.split(",")[1]) for line in lines[1:]]
        N = len(vals)
        M = integer_root(N, scale)
        return cls(N, (0, *(vals[m**scale - 1] for m in range(1, M + 1))), scale)


@lru_cache(maxsize=8)
def _smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_up_to(int(math.isqrt(n))):
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    return spf


def coefficient_sieve(spec: ProductSpec, N: int) -> CoefficientArray:
    """Exact coefficients through ``N`` assembled multiplicatively from local factors."""
    if N < 1:
        raise ValueError("N must be >= 1")
    M = integer_root(N, spec.variable_scale)
    c = [0] * (M + 1)
    c[1] = 1
    if M >= 2:
        spf = _smallest_prime_factor(M)
        local: dict[int, list[int]] = {}
        for n in range(2, M + 1):
            p = int(spf[n])
            if p not in local:
                local[p] = local_factor_series(spec, p, int(math.log(M) / math.log(p)) + 1)
            k, rest = 0, n
            while rest % p == 0:
                rest //= p
                k += 1
            c[n] = c[rest] * local[p][k]
    return CoefficientArray(N, tuple(c), spec.variable_scale)


def _convolve_factor(arr: np.ndarray, f: ZetaFactor, M: int) -> np.ndarray:
    """``arr * zeta(a s - b)^(sign c)`` once, truncated at index ``M`` (object arrays, exact)."""
    out = np.zeros(M + 1, dtype=object)
    j = 1
    while j**f.a <= M:
        step = j**f.a
        coeff = j**f.b if f.c > 0 else mobius(j) * j**f.b
        if coeff:
            count = M // step
            out[step : count * step + 1 : step] += coeff * arr[1 : count + 1]
        j += 1
    return out


def coefficients_via_zeta_product(
    expansion: GhostExpansion, prefactors=(), N: int = 1, variable_scale: int = 1
) -> CoefficientArray:
    """Expand ``prod zeta(m s - n)^e(n, m)`` (times prefactors) by exact Dirichlet convolution."""
    M = integer_root(N, variable_scale)
    if M >= 2 ** (expansion.depth + 1):
        raise ValueError(f"N too large for expansion depth {expansion.depth}: need index < 2^{expansion.depth + 1}")
    factors = [ZetaFactor(m, n, e) for n, m, e in expansion.sorted_items() if 2**m <= M]
    factors += [f for f in factor_list(prefactors) if 2**f.a <= M]
    arr = np.zeros(M + 1, dtype=object)
    arr[1] = 1
    for f in factors:
        for _ in range(abs(f.c)):
            arr = _convolve_factor(arr, f, M)
    return CoefficientArray(N, tuple(int(v) for v in arr), variable_scale)


# ---------------------------------------------------------------------------
# accelerated Euler product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerValue:
    value: complex
    error: float
    zeta_factors: ZetaFactorList = field(default=(), repr=False)
    remainder: complex = 1.0
    tail_bound: float = 0.0


def _log1p(z: np.ndarray) -> np.ndarray:
    """Complex ``log(1 + z)`` without cancellation for small ``|z|``."""
    z = np.asarray(z, dtype=complex)
    out = np.log(1 + z)
    small = np.abs(z) < 1e-3
    if np.any(small):
        zs = z[small]
        acc = np.zeros_like(zs)
        power = zs.copy()
        for k in range(1, 12):
            acc += ((-1) ** (k + 1) / k) * power
            power = power * zs
        out[small] = acc
    return out


def degree_ratio(W: BivariatePolynomial) -> Fraction:
    """``max n/m`` over non-constant monomials; every ghost exponent has ``n <= ratio * m``."""
    return max((Fraction(n, m) for (n, m), _ in W.terms if m > 0), default=Fraction(0))


def remainder_abscissa(W: BivariatePolynomial, M: int) -> Fraction:
    """``prod_p R_M`` converges absolutely for ``Re s`` beyond this value."""
    return degree_ratio(W) + Fraction(1, M + 1)


def _prime_tail(alpha: float, P: int) -> float:
    """Upper estimate of ``sum_{p > P} p^-alpha`` for ``alpha > 1``."""
    return P ** (1 - alpha) / ((alpha - 1) * math.log(P))


@lru_cache(maxsize=32)
def _expansion(W: BivariatePolynomial, depth: int) -> GhostExpansion:
    return ghost_expand(W, depth)


@lru_cache(maxsize=8)
def _prime_array(P: int) -> np.ndarray:
    return np.array(primes_up_to(P), dtype=float)


def accelerated_factors(W: BivariatePolynomial, M: int) -> ZetaFactorList:
    """The zeta factors ``zeta(m s - n)^e(n, m)`` with ``m <= M``."""
    return tuple(ZetaFactor(m, n, e) for n, m, e in _expansion(W, M).sorted_items())


def remainder_product(W: BivariatePolynomial, s: complex, M: int, P: int) -> tuple[complex, float]:
    """``prod_{p <= P} R_M(p, p^-s)`` and an estimate of the omitted tail (relative)."""
    sigma = complex(s).real
    if sigma <= remainder_abscissa(W, M):
        raise ConvergenceError(
            f"Re s = {sigma:g} not right of the remainder abscissa {float(remainder_abscissa(W, M)):.6g}"
        )
    p = _prime_array(P)
    logp = np.log(p)
    X = np.exp(-complex(s) * logp)
    # log W(p, X)
    w1 = np.zeros_like(X)
    for (n, m), c in W.terms:
        if m > 0:
            w1 += c * np.exp(n * logp) * X**m
    total = _log1p(w1)
    for f in accelerated_factors(W, M):
        total += f.c * _log1p(-np.exp(f.b * logp) * X**f.a)
    log_r = math.fsum(total.real) + 1j * math.fsum(total.imag)
    # tail from the next M rows of the exact expansion, beyond the prime cutoff
    tail = 0.0
    for n, m, e in _expansion(W, 2 * M).sorted_items():
        if m > M:
            alpha = m * sigma - n
            tail += abs(e) * _prime_tail(alpha, P)
    return complex(np.exp(log_r)), tail


def merged_factors(spec: ProductSpec, M: int = DEFAULT_ACCEL_DEPTH) -> ZetaFactorList:
    """Prefactors and retained ghost factors combined, equal ``(a, b)`` exponents summed."""
    acc: dict[tuple[int, int], int] = {}
    pieces = spec.prefactors + (accelerated_factors(spec.W, M) if not spec.W.is_one else ())
    for f in pieces:
        acc[(f.a, f.b)] = acc.get((f.a, f.b), 0) + f.c
    return tuple(ZetaFactor(a, b, c) for (a, b), c in sorted(acc.items()) if c)


def euler_product_eval(
    spec: ProductSpec | BivariatePolynomial,
    s: complex,
    M: int = DEFAULT_ACCEL_DEPTH,
    P: int = DEFAULT_PRIME_CUTOFF,
    include_prefactors: bool = False,
    tol: float | None = None,
    exclude: tuple[tuple[int, int], ...] = (),
) -> EulerValue:
    """``prod_p W(p, p^-s)`` (optionally times the prefactors) with an error estimate.

    Retained zeta factors are evaluated by analytic continuation, so only the
    remainder needs ``Re s`` right of :func:`remainder_abscissa`. Factors whose
    ``(a, b)`` is listed in ``exclude`` are left out (used for residues).
    """
    if isinstance(spec, BivariatePolynomial):
        spec = ProductSpec(spec)
    if not include_prefactors:
        spec = ProductSpec(spec.W, (), spec.variable_scale)
    factors = tuple(f for f in merged_factors(spec, M) if (f.a, f.b) not in set(exclude))
    if spec.W.is_one and not factors:
        return EulerValue(1.0 + 0j, 0.0)
    s = complex(s)
    args = np.array([f.a * s - f.b for f in factors], dtype=complex)
    if np.any(args == 1):
        bad = [f for f, z in zip(factors, args) if z == 1]
        raise ConvergenceError(f"s = {s} is a pole of zeta factor {bad[0]}")
    value = 1.0 + 0j
    if args.size:
        zvals = zeta(args)
        if np.any(zvals == 0) and any(f.c < 0 for f, z in zip(factors, zvals) if z == 0):
            raise ConvergenceError(f"s = {s} is a pole: a negative-power factor vanishes")
        for z, f in zip(zvals, factors):
            value *= complex(z) ** f.c
    rem, tail = (1.0 + 0j, 0.0) if spec.W.is_one else remainder_product(spec.W, s, M, P)
    value *= rem
    rel = tail + _ZETA_REL_ERR * sum(abs(f.c) for f in factors) + 1e-14
    err = abs(value) * rel
    if tol is not None and err > tol:
        raise AccuracyError(f"estimated error {err:.3g} exceeds tolerance {tol:.3g}; raise M or P")
    return EulerValue(value, err, factors, rem, tail)

"""Zeta-factor expansion of polynomial Euler products.

``prod_p W(p, p^-s) = prod_{n,m} zeta(m s - n)^e(n,m)`` where the exponents come
from the formal identity ``W(u, Y) = prod (1 - u^n Y^m)^(-e(n,m))``. With
``log W = sum_M b_M(u) Y^M`` and ``B_M = M b_M`` the exponents are recovered by
Mobius inversion over divisors::

    E_M(u) = (1/M) * sum_{k | M} mu(k) * B_{M/k}(u^k),   E_M(u) = sum_n e(n, M) u^n
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._arith import divisors, mobius, primes_up_to
from .polyparse import (
    BivariatePolynomial,
    log_numerators,
    upoly_add,
    upoly_inflate,
    upoly_scale,
)

DEFAULT_DEPTH = 24

# (sqrt(5)-1)/2 enclosed by rationals, for display only
GOLDEN_EXPONENT_INTERVAL = (Fraction(618, 1000), Fraction(619, 1000))
GOLDEN_EXPONENT = (math.sqrt(5.0) - 1.0) / 2.0


DENSITY_VARIANTS = ("shifted-line", "ratio")


class WittIntegralityError(ArithmeticError):
    """A ghost exponent came out non-integral."""


@dataclass(frozen=True)
class GhostExpansion:
    """Exponents ``e(n, m)`` for ``1 <= m <= depth``; zero entries are not stored.

    ``rows`` lists every computed ``m`` so an all-zero row is distinguishable
    from one that was never computed.
    """

    depth: int
    exponents: dict[tuple[int, int], int]
    rows: tuple[int, ...] = ()
    source: str = ""

    def row(self, m: int) -> dict[int, int]:
        if m not in self.rows:
            raise KeyError(f"row m={m} was not computed (depth {self.depth})")
        return {n: e for (n, mm), e in self.exponents.items() if mm == m}

    def get(self, n: int, m: int) -> int:
        if m not in self.rows:
            raise KeyError(f"row m={m} was not computed (depth {self.depth})")
        return self.exponents.get((n, m), 0)

    def sorted_items(self) -> list[tuple[int, int, int]]:
        return [(n, m, e) for (n, m), e in sorted(self.exponents.items(), key=lambda kv: (kv[0][1], kv[0][0]))]

    def __add__(self, other: "GhostExpansion") -> "GhostExpansion":
        depth = min(self.depth, other.depth)
        out: dict[tuple[int, int], int] = {}
        for src in (self.exponents, other.exponents):
            for (n, m), e in src.items():
                if m <= depth:
                    out[(n, m)] = out.get((n, m), 0) + e
        out = {k: v for k, v in out.items() if v}
        return GhostExpansion(depth, out, tuple(range(1, depth + 1)))

    def to_json(self) -> list[dict]:
        return [{"n": n, "m": m, "e": e} for n, m, e in self.sorted_items()]


def ghost_expand(W: BivariatePolynomial, depth: int = DEFAULT_DEPTH) -> GhostExpansion:
    """Canonical exponents of ``W`` through ``Y^depth``.

    Raises :class:`WittIntegralityError` instead of rounding when a
    coefficient of ``E_M`` is not divisible by ``M``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    B = log_numerators(W, depth)
    exps: dict[tuple[int, int], int] = {}
    for M in range(1, depth + 1):
        acc = ()
        for k in divisors(M):
            mu = mobius(k)
            if mu and B[M // k]:
                acc = upoly_add(acc, upoly_scale(upoly_inflate(B[M // k], k), mu))
        for n, c in enumerate(acc):
            if c == 0:
                continue
            if c % M:
                raise WittIntegralityError(f"e({n},{M}) = {Fraction(c, M)} is not an integer")
            exps[(n, M)] = c // M
    return GhostExpansion(depth, exps, tuple(range(1, depth + 1)), str(W))


def convergence_abscissa(W: BivariatePolynomial) -> Fraction | None:
    """``max (n+1)/m`` over non-constant monomials; ``None`` for ``W == 1``."""
    ratios = [Fraction(n + 1, m) for (n, m), _ in W.terms if m > 0]
    return max(ratios) if ratios else None


# ---------------------------------------------------------------------------
# candidate boundary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryEstimate:
    global_sup: Fraction | None
    tail_sup: Fraction | None
    per_m_max_ratio: list[tuple[int, Fraction]]
    maximizers: list[tuple[int, int]] = field(default_factory=list)
    annotation: str = ""

    def to_json(self) -> dict:
        from ._arith import fmt_rational

        return {
            "global_sup": fmt_rational(self.global_sup),
            "tail_sup": fmt_rational(self.tail_sup),
            "per_m": [{"m": m, "max_ratio": fmt_rational(r)} for m, r in self.per_m_max_ratio],
            "tail_maximizers": [{"n": n, "m": m} for n, m in self.maximizers],
            "annotation": self.annotation,
        }


def _progression_note(points: list[tuple[int, int]]) -> str:
    if len(points) < 3:
        return ""
    dn = points[1][0] - points[0][0]
    dm = points[1][1] - points[0][1]
    for (n0, m0), (n1, m1) in zip(points, points[1:]):
        if (n1 - n0, m1 - m0) != (dn, dm):
            return ""
    return f"tail maximizers form the progression (n, m) = ({points[0][0]}+{dn}k, {points[0][1]}+{dm}k)"


def candidate_boundary(expansion: GhostExpansion) -> BoundaryEstimate:
    """Largest ratios ``n/m`` over nonzero exponents, per row and in the tail.

    The tail is ``m`` in ``(depth/2, depth]``. When that range holds no nonzero
    exponent (a terminating expansion) the tail is taken over the upper half of
    the rows that do carry exponents. Nothing is extrapolated.
    """
    rows: dict[int, int] = {}
    for (n, m) in expansion.exponents:
        rows[m] = max(rows.get(m, -1), n)
    if not rows:
        return BoundaryEstimate(None, None, [], [], "empty expansion")
    per_m = [(m, Fraction(rows[m], m)) for m in sorted(rows)]
    global_sup = max(r for _, r in per_m)
    lo = expansion.depth / 2
    tail = [(m, r) for m, r in per_m if m > lo]
    if not tail:
        top = max(rows)
        tail = [(m, r) for m, r in per_m if m > top / 2]
    tail_sup = max(r for _, r in tail)
    maximizers = []
    for m, r in tail:
        # best ratio in each tail row; the progression test runs on these
        maximizers.append((rows[m], m))
    best = [(n, m) for n, m in maximizers if Fraction(n, m) == tail_sup]
    note = _progression_note([(n, m) for n, m in maximizers if Fraction(n, m) >= tail_sup - Fraction(1, 4)])
    return BoundaryEstimate(global_sup, tail_sup, per_m, best, note)


# ---------------------------------------------------------------------------
# Estermann termination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstermannReport:
    terminated: bool
    factors: list[tuple[int, int, int]]
    remainder_degree: int | None
    depth: int

    def to_json(self) -> dict:
        return {
            "terminated": self.terminated,
            "factors": [{"n": n, "m": m, "e": e} for n, m, e in self.factors],
            "remainder_degree": self.remainder_degree,
            "depth": self.depth,
        }


def _dict_mul(a: dict, b: dict) -> dict:
    out: dict[tuple[int, int], int] = {}
    for (n1, m1), c1 in a.items():
        for (n2, m2), c2 in b.items():
            k = (n1 + n2, m1 + m2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _factor_poly(n: int, m: int, power: int) -> dict:
    out = {(0, 0): 1}
    base = {(0, 0): 1, (n, m): -1}
    for _ in range(power):
        out = _dict_mul(out, base)
    return out


def estermann_check(W: BivariatePolynomial, depth: int = DEFAULT_DEPTH) -> EstermannReport:
    """Does ``W`` factor completely into finitely many ``(1 - u^n Y^m)``-powers?

    ``terminated`` means the exact polynomial identity
    ``W * prod_{e>0} (1-u^n Y^m)^e == prod_{e<0} (1-u^n Y^m)^(-e)`` for the
    factors found through ``depth``. Both sides have ``Y``-degree at most
    ``L = sum_{e<0} m|e|`` once the degrees balance, so the identity holds iff
    it holds modulo ``Y^(L+1)``, i.e. iff every ghost row in ``(depth, L]`` is
    zero. ``remainder_degree`` is 0 when terminated, else the first nonzero
    ghost row past ``depth`` (``None`` if none was found through ``2*depth``).
    """
    expansion = ghost_expand(W, depth)
    factors = expansion.sorted_items()
    num_deg = sum(m * -e for _, m, e in factors if e < 0)
    den_deg = sum(m * e for _, m, e in factors if e > 0)
    deeper = ghost_expand(W, 2 * depth)
    low = min((m for (_, m) in deeper.exponents if m > depth), default=None)
    terminated = False
    if low is None and W.y_degree + den_deg == num_deg:
        if num_deg > 2 * depth:
            deeper = ghost_expand(W, num_deg)
            low = min((m for (_, m) in deeper.exponents if m > depth), default=None)
        terminated = low is None
    if terminated:
        return EstermannReport(True, factors, 0, depth)
    return EstermannReport(False, factors, low, depth)


def factorization_identity_holds(W: BivariatePolynomial, factors: list[tuple[int, int, int]]) -> bool:
    """Multiply out both sides of the finite factorization exactly (small inputs only)."""
    lhs = W.as_dict()
    rhs = {(0, 0): 1}
    for n, m, e in factors:
        if e > 0:
            lhs = _dict_mul(lhs, _factor_poly(n, m, e))
        else:
            rhs = _dict_mul(rhs, _factor_poly(n, m, -e))
    return lhs == rhs


def dyadic_blocks_nonzero(expansion: GhostExpansion) -> list[tuple[int, int, bool]]:
    """For each block ``[2^k, 2^(k+1)) ∩ [1, depth]``: does it carry an exponent?"""
    out = []
    lo = 1
    while lo <= expansion.depth:
        hi = min(2 * lo - 1, expansion.depth)
        hit = any(lo <= m <= hi for (_, m) in expansion.exponents)
        out.append((lo, hi, hit))
        lo *= 2
    return out


# ---------------------------------------------------------------------------
# prime-density diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityReport:
    variant: str
    beta_used: Fraction | None
    epsilon: Fraction
    primes: list[int]
    prime_counts: list[tuple[float, int]]
    window_counts: list[tuple[float, int]]
    log_reference_curve: list[tuple[float, float]]
    verdict: str = "finite-range diagnostic, not a proof"

    @property
    def reference_curve(self) -> list[tuple[float, float]]:
        return [(x, math.exp(v)) for x, v in self.log_reference_curve]

    def to_json(self) -> dict:
        from ._arith import fmt_rational

        return {
            "variant": self.variant,
            "beta_used": fmt_rational(self.beta_used),
            "epsilon": fmt_rational(self.epsilon),
            "exponent_interval": [fmt_rational(q) for q in GOLDEN_EXPONENT_INTERVAL],
            "primes": self.primes,
            "prime_counts": [{"x": x, "P": c} for x, c in self.prime_counts],
            "window_counts": [{"x": x, "window": c} for x, c in self.window_counts],
            "log_reference": [{"x": x, "log_ref": round(v, 12)} for x, v in self.log_reference_curve],
            "verdict": self.verdict,
        }


def density_primes(expansion: GhostExpansion, variant: str, beta: Fraction | None = None) -> list[int]:
    """Primes ``p <= depth`` in the distinguished set.

    ``shifted-line``: factors written ``zeta(nu (s - 1/2) + 1/2)^(n_nu)`` have
    ``m = nu`` and ``n = (nu - 1)/2``; keep odd ``p`` with ``n_p > 0``.
    ``ratio``: keep ``p`` having some ``e(n, p) != 0`` with ``n/p + 1/(2p) > beta``.
    """
    out = []
    for p in primes_up_to(expansion.depth):
        if variant == "shifted-line":
            if p % 2 and expansion.get((p - 1) // 2, p) > 0:
                out.append(p)
        elif variant == "ratio":
            if beta is None:
                raise ValueError("beta is required for the ratio variant")
            if any(Fraction(2 * n + 1, 2 * p) > beta for n in expansion.row(p)):
                out.append(p)
        else:
            raise ValueError(f"unknown variant {variant!r}")
    return out


def boundary_prime_density(
    expansion: GhostExpansion,
    beta: Fraction | None = None,
    variant: str = "shifted-line",
    epsilon: Fraction = Fraction(1),
    xs: list[float] | None = None,
) -> DensityReport:
    """Count the distinguished primes and their windows ``P((1+eps)x) - P(x)``.

    Every ``x`` must satisfy ``(1+eps) x <= depth`` so that all counted rows
    were computed. The reference curve ``x^theta log^2 x`` is kept as logs.
    """
    epsilon = Fraction(epsilon)
    if variant not in DENSITY_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "ratio" and beta is None:
        raise ValueError("beta is required for the ratio variant")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if xs is None:
        top = math.floor(expansion.depth / (1 + epsilon))
        xs = list(range(2, top + 1))
    for x in xs:
        if (1 + epsilon) * Fraction(x) > expansion.depth:
            raise ValueError(f"x={x} needs depth {(1 + epsilon) * Fraction(x)} > {expansion.depth}")
    primes = density_primes(expansion, variant, beta)
    arr = np.array(primes, dtype=float)

    def P(x):
        return int(np.count_nonzero(arr <= x + 1e-9))

    counts = [(float(x), P(x)) for x in xs]
    windows = [(float(x), P(float((1 + epsilon) * Fraction(x))) - P(x)) for x in xs]
    logref = [
        (float(x), GOLDEN_EXPONENT * math.log(x) + 2 * math.log(math.log(x))) for x in xs if x > 1
    ]
    return DensityReport(variant, beta, epsilon, primes, counts, windows, logref)


def local_zero_abscissae(W: BivariatePolynomial, p: int) -> list[float]:
    """Real parts of the zeros of ``s -> W(p, p^-s)`` (one period in Im s)."""
    deg = W.y_degree
    if deg == 0:
        return []
    coeffs = [0.0] * (deg + 1)
    for (n, m), c in W.terms:
        coeffs[m] += c * float(p) ** n
    roots = np.roots(coeffs[::-1])
    # rounded so that roots on a line do not print as 0.5000000000000001
    return sorted(round(float(-math.log(abs(r)) / math.log(p)), 12) for r in roots)


def local_zero_spot_check(W: BivariatePolynomial, beta: Fraction, primes: list[int]) -> dict:
    """Finite-p check that local zeros sit left of ``Re s = beta`` (diagnostic only)."""
    worst = {p: max(local_zero_abscissae(W, p), default=-math.inf) for p in primes}
    return {
        "primes": primes,
        "max_abscissa": {str(p): v for p, v in worst.items()},
        "all_left_of_beta": all(v < float(beta) for v in worst.values()),
        "note": "finite-range diagnostic, not a proof",
    }

"""Explicit formula for the smoothed sum ``A(x) = sum a_n exp(-n/x)``.

With ``D(w) = sum a_n n^-w`` and ``F(s) = D(s/k)`` the factored product
(``k`` the variable scale), Mellin inversion gives

    A(x) = (1/2 pi i) int D(w) Gamma(w) x^w dw,

so a simple pole of ``F`` at ``s0`` contributes ``Gamma(s0/k) Res_s F / k * x^(s0/k)``
(the "w" convention, B). The "s" convention, A, omits the ``1/k``. Each simple
zero ``rho`` of a factor ``zeta(a s - b)^-1`` contributes
``Gamma(w) H(w) / (k a zeta'(rho)) * x^w`` at ``w = (rho + b)/(k a)``, where
``H`` is everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._arith import fmt_rational
from .dirichlet import (
    DEFAULT_ACCEL_DEPTH,
    DEFAULT_PRIME_CUTOFF,
    CoefficientArray,
    ConvergenceError,
    ProductSpec,
    ZetaFactor,
    coefficient_sieve,
    euler_product_eval,
    merged_factors,
    remainder_abscissa,
)
from .ghost import candidate_boundary, ghost_expand
from .zetanum import gamma, zeta_derivative

CONVENTIONS = ("A", "B")
DEFAULT_ZEROS = 50
_ZETA_PRIME_FLOOR = 1e-8
_FLOOR_REL = 1e-11


class PoleError(ValueError):
    """The requested point is not a simple pole of the product."""


# ---------------------------------------------------------------------------
# residues and main terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Residue:
    s0: Fraction
    value: float
    error: float
    factor: ZetaFactor


def residue_at_pole(
    spec: ProductSpec, s0, M: int = DEFAULT_ACCEL_DEPTH, P: int = DEFAULT_PRIME_CUTOFF
) -> Residue:
    """Residue in the ``s`` variable at a simple pole of exactly one zeta factor."""
    s0 = Fraction(s0)
    factors = merged_factors(spec, M)
    hits = [f for f in factors if f.a * s0 - f.b == 1]
    if len(hits) != 1 or hits[0].c != 1:
        raise PoleError(f"s = {s0} is not a simple pole of a single retained factor")
    f = hits[0]
    if s0 <= remainder_abscissa(spec.W, M):
        raise ConvergenceError(f"s = {s0} is left of the accelerated convergence region")
    rest = euler_product_eval(spec, float(s0), M, P, include_prefactors=True, exclude=((f.a, f.b),))
    value = rest.value / f.a
    if abs(value.imag) > 1e-12 * max(1.0, abs(value)):
        raise ArithmeticError("residue at a real point came out non-real")
    return Residue(s0, value.real, rest.error / f.a, f)


def main_poles(spec: ProductSpec, M: int = DEFAULT_ACCEL_DEPTH, depth: int = 16) -> list[Fraction]:
    """Simple poles right of the candidate boundary, descending."""
    beta = candidate_boundary(ghost_expand(spec.W, depth)).global_sup if not spec.W.is_one else None
    limit = Fraction(-(10**9)) if beta is None else beta
    poles = {f.pole() for f in merged_factors(spec, M) if f.c > 0}
    return sorted((p for p in poles if p > limit), reverse=True)


@dataclass(frozen=True)
class MainTerm:
    s0: Fraction
    residue: float
    residue_error: float
    exponent: Fraction  # power of x
    gamma_factor: float
    constant_A: float
    constant_B: float

    def constant(self, convention: str) -> float:
        return self.constant_A if convention == "A" else self.constant_B


def main_term_constants(spec: ProductSpec, M: int = DEFAULT_ACCEL_DEPTH, P: int = DEFAULT_PRIME_CUTOFF) -> list[MainTerm]:
    """``c = Gamma(s0/k) Res_s`` (convention A) and the same divided by ``k`` (B)."""
    k = spec.variable_scale
    out = []
    for s0 in main_poles(spec, M):
        r = residue_at_pole(spec, s0, M, P)
        g = gamma(float(s0 / k)).real
        out.append(MainTerm(s0, r.value, r.error, s0 / k, g, g * r.value, g * r.value / k))
    return out


# ---------------------------------------------------------------------------
# zero terms
# ---------------------------------------------------------------------------


def zero_factors(spec: ProductSpec, M: int = DEFAULT_ACCEL_DEPTH) -> list[ZetaFactor]:
    """Inverse zeta factors whose zeros ``a s - b = 1/2 + i g`` lie in the evaluable region."""
    edge = remainder_abscissa(spec.W, M) if not spec.W.is_one else Fraction(-(10**9))
    out = []
    for f in merged_factors(spec, M):
        if f.c < 0 and Fraction(2 * f.b + 1, 2 * f.a) > edge:
            if f.c != -1:
                raise PoleError(f"factor {f} gives poles of order {-f.c}; only simple poles are handled")
            out.append(f)
    return out


@dataclass(frozen=True)
class ZeroTerm:
    gamma: float
    factor: ZetaFactor
    w: complex
    alpha: complex
    error: float


def zero_term_coefficient(
    spec: ProductSpec,
    gamma_ord: float,
    factor: ZetaFactor | None = None,
    M: int = DEFAULT_ACCEL_DEPTH,
    P: int = DEFAULT_PRIME_CUTOFF,
) -> ZeroTerm:
    """``alpha_rho`` (w variable) for the zero ``rho = 1/2 + i gamma`` of ``factor``."""
    if factor is None:
        fs = zero_factors(spec, M)
        if not fs:
            raise PoleError("product has no inverse zeta factor with zeros in range")
        factor = fs[0]
    k = spec.variable_scale
    rho = complex(0.5, gamma_ord)
    s = (rho + factor.b) / factor.a
    dz = zeta_derivative(rho)
    if abs(dz) < _ZETA_PRIME_FLOOR:
        raise ArithmeticError(f"|zeta'(rho)| = {abs(dz):.3g} too small at gamma = {gamma_ord}; multiple zero?")
    H = euler_product_eval(spec, s, M, P, include_prefactors=True, exclude=((factor.a, factor.b),))
    w = s / k
    g = gamma(w)
    alpha = g * H.value / (k * factor.a * dz)
    return ZeroTerm(gamma_ord, factor, w, alpha, abs(alpha) * (H.error / max(abs(H.value), 1e-300) + 1e-9))


def zero_terms(spec: ProductSpec, ordinates, M: int = DEFAULT_ACCEL_DEPTH, P: int = DEFAULT_PRIME_CUTOFF) -> list[ZeroTerm]:
    """Coefficients for the upper-half-plane zeros ``ordinates`` of every zero factor."""
    return [zero_term_coefficient(spec, float(g), f, M, P) for f in zero_factors(spec, M) for g in ordinates]


def oscillatory_sum(terms: list[ZeroTerm], x: float, scale: float = 1.0) -> float:
    """``sum over rho and conj(rho)`` of ``alpha x^w``, i.e. ``2 Re`` of each upper term."""
    logx = math.log(x)
    parts = [2.0 * (t.alpha * np.exp(t.w * logx)).real for t in terms]
    return scale * math.fsum(parts)


def oscillatory_pair_imag(upper: list[ZeroTerm], lower: list[ZeroTerm], x: float) -> float:
    """Relative imaginary part of the sum over zeros of both half-planes, each computed separately."""
    logx = math.log(x)
    total = [t.alpha * np.exp(t.w * logx) for t in upper + lower]
    re = math.fsum(z.real for z in total)
    im = math.fsum(z.imag for z in total)
    return abs(im) / max(abs(re), math.fsum(abs(z) for z in total) * 1e-3, 1e-300)


# ---------------------------------------------------------------------------
# smoothed sum
# ---------------------------------------------------------------------------


def cutoff(x: float) -> int:
    """Index beyond which the tail of ``sum a_n exp(-n/x)`` is negligible."""
    return math.ceil(x * (3 * math.log(x) + 40))


def smoothed_sum(coeffs: CoefficientArray, x: float) -> float:
    """``sum a_n exp(-n/x)`` in ascending ``n`` with compensated summation."""
    if not x > 0:
        raise ValueError("x must be positive")
    need = cutoff(max(x, 1.0))
    if coeffs.N < need:
        raise ValueError(f"coefficients reach N={coeffs.N}; x={x:g} needs N >= {need}")
    n, vals = coeffs.nonzero()
    keep = n <= need
    weights = np.exp(-n[keep] / x)
    return math.fsum(float(a) * w for a, w in zip(vals, weights))


def coefficients_for(spec: ProductSpec, x_max: float) -> CoefficientArray:
    return coefficient_sieve(spec, cutoff(max(x_max, 1.0)))


# ---------------------------------------------------------------------------
# explicit formula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    x: float
    A_direct: float
    main: float
    oscillatory: float

    @property
    def predicted(self) -> float:
        return self.main + self.oscillatory

    @property
    def residual(self) -> float:
        return self.A_direct - self.predicted


def main_sum(terms: list[MainTerm], x: float, convention: str, c2_sign: int = 1) -> float:
    """Main terms; ``c2_sign = -1`` flips the second constant (sign arbitration)."""
    parts = []
    for i, t in enumerate(terms):
        c = t.constant(convention) * (c2_sign if i == 1 else 1)
        parts.append(c * x ** float(t.exponent))
    return math.fsum(parts)


def explicit_formula_eval(
    coeffs: CoefficientArray,
    terms: list[MainTerm],
    zeros: list[ZeroTerm],
    x: float,
    K: int,
    convention: str = "B",
    c2_sign: int = 1,
    k: int = 3,
) -> Comparison:
    """Direct ``A(x)`` against the main terms plus the first ``K`` zero pairs."""
    if not x > 0:
        raise ValueError("x must be positive")
    if K > len(zeros):
        raise ValueError(f"K={K} exceeds the {len(zeros)} available zero terms")
    scale = 1.0 if convention == "B" else float(k)
    return Comparison(
        x, smoothed_sum(coeffs, x), main_sum(terms, x, convention, c2_sign), oscillatory_sum(zeros[:K], x, scale)
    )


@dataclass(frozen=True)
class ExponentFit:
    slope: float | None
    intercept: float | None
    verdict: str
    points: int

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "verdict": self.verdict, "points": self.points}


def error_exponent_fit(comparisons: list[Comparison]) -> ExponentFit:
    """Least-squares slope of ``log |residual|`` against ``log x``."""
    xs = np.array([c.x for c in comparisons])
    if xs.size < 5 or math.log10(xs.max() / xs.min()) < 2 - 1e-9:
        raise ValueError("need at least 5 points spanning 2 decades")
    res = np.array([abs(c.residual) for c in comparisons])
    floor = np.array([_FLOOR_REL * max(abs(c.A_direct), 1.0) for c in comparisons])
    if np.all(res <= floor):
        return ExponentFit(None, None, "error dominated by evaluation precision", int(xs.size))
    ok = res > floor
    slope, intercept = np.polyfit(np.log(xs[ok]), np.log(res[ok]), 1)
    slope = float(slope)
    marks = {"4/3": 4 / 3, "17/12": 17 / 12, "3/2": 1.5}
    nearest = min(marks, key=lambda k: abs(marks[k] - slope))
    if slope > 1.8:
        verdict = f"slope {slope:.3f} near 2: an x^2 term is not cancelled"
    elif slope > 1.55:
        verdict = f"slope {slope:.3f} above 3/2"
    elif slope < 1.30:
        verdict = f"slope {slope:.3f} below 1.30"
    else:
        verdict = f"slope {slope:.3f} in [1.30, 1.55], nearest reference exponent {nearest}"
    return ExponentFit(slope, float(intercept), verdict, int(xs.size))


# ---------------------------------------------------------------------------
# convention arbitration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConventionChoice:
    winner: str
    ratios: dict[str, float]  # prediction / A_direct at the largest x, per convention
    discrepancy: float  # loser's distance from 1 as a factor
    cauchy_change: float  # relative change of A/x^top between the two largest x
    c2_sign: int
    c2_slopes: dict[str, float | None]

    def to_json(self) -> dict:
        return {
            "winner": self.winner,
            "ratio_main_over_direct": self.ratios,
            "rejection_factor": self.discrepancy,
            "cauchy_change": self.cauchy_change,
            "c2_sign": self.c2_sign,
            "c2_fit_slopes_K0": self.c2_slopes,
        }


def _factor_off(r: float) -> float:
    """How far a positive ratio is from 1, as a multiplicative factor (>= 1)."""
    if r <= 0:
        return math.inf
    return max(r, 1 / r)


def choose_convention(coeffs: CoefficientArray, terms: list[MainTerm], xs: list[float]) -> ConventionChoice:
    """Pick the Jacobian convention and the sign of ``c2`` from direct sums alone."""
    xs = sorted(xs)
    direct = {x: smoothed_sum(coeffs, x) for x in xs}
    xt = xs[-1]
    ratios = {c: main_sum(terms, xt, c) / direct[xt] for c in CONVENTIONS}
    offs = {c: _factor_off(r) for c, r in ratios.items()}
    winner = min(CONVENTIONS, key=lambda c: offs[c])
    loser = "A" if winner == "B" else "B"
    top = float(terms[0].exponent) if terms else 1.0
    lead = [direct[x] / x**top for x in xs[-2:]]
    cauchy = abs(lead[1] - lead[0]) / abs(lead[1]) if len(lead) == 2 else math.nan
    # c2 sign: the wrong sign leaves a pure x^2 error, so its residual slope is near 2
    slopes: dict[str, float | None] = {}
    norms = {}
    for sign, label in ((1, "derived"), (-1, "flipped")):
        comps = [Comparison(x, direct[x], main_sum(terms, x, winner, sign), 0.0) for x in xs]
        norms[sign] = math.fsum((c.residual / c.x**2) ** 2 for c in comps)
        try:
            slopes[label] = error_exponent_fit(comps).slope
        except ValueError:
            slopes[label] = None
    c2_sign = min((1, -1), key=lambda s: norms[s])
    return ConventionChoice(winner, ratios, offs[loser], cauchy, c2_sign, slopes)


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitFormulaReport:
    spec: ProductSpec
    main_terms: list[MainTerm]
    reference_residues: dict[str, float]
    choice: ConventionChoice
    zero_terms: list[ZeroTerm]
    K: int
    comparisons: list[Comparison]
    fit: ExponentFit
    fit_without_zeros: ExponentFit
    conjugate_imag_max: float
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        mt = []
        for t in self.main_terms:
            mt.append(
                {
                    "s0": fmt_rational(t.s0),
                    "exponent": fmt_rational(t.exponent),
                    "residue_s": t.residue,
                    "residue_error": t.residue_error,
                    "gamma": t.gamma_factor,
                    "c_convention_A": t.constant_A,
                    "c_convention_B": t.constant_B,
                }
            )
        return {
            "spec": self.spec.to_json(),
            "coefficient_support": "a_{m^3} = c_m, zero off cubes" if self.spec.variable_scale == 3 else None,
            "main_terms": mt,
            "reference_residue_comparison": self.reference_comparison(),
            "convention": self.choice.to_json(),
            "zero_terms": [
                {
                    "gamma": z.gamma,
                    "factor": [z.factor.a, z.factor.b, z.factor.c],
                    "w_re": z.w.real,
                    "w_im": z.w.imag,
                    "alpha_re": z.alpha.real,
                    "alpha_im": z.alpha.imag,
                    "error": z.error,
                }
                for z in self.zero_terms
            ],
            "K": self.K,
            "comparisons": [
                {"x": c.x, "A_direct": c.A_direct, "main": c.main, "oscillatory": c.oscillatory, "residual": c.residual}
                for c in self.comparisons
            ],
            "fit": self.fit.to_json(),
            "fit_K0": self.fit_without_zeros.to_json(),
            "conjugate_imag_max": self.conjugate_imag_max,
            "notes": self.notes,
        }

    def reference_comparison(self) -> list[dict]:
        """Computed residues next to externally supplied reference values."""
        out = []
        for t in self.main_terms:
            key = fmt_rational(t.s0)
            if key in self.reference_residues:
                ref = self.reference_residues[key]
                out.append({"s0": key, "computed": t.residue, "reference": ref, "ratio": ref / t.residue})
        return out

    def to_csv(self) -> str:
        rows = ["x,A_direct,main,oscillatory,residual"]
        rows += [f"{c.x!r},{c.A_direct!r},{c.main!r},{c.oscillatory!r},{c.residual!r}" for c in self.comparisons]
        return "\n".join(rows) + "\n"


def default_grid(x_max: float = 1e4, x_min: float = 1e2, per_half_decade: int = 1) -> list[float]:
    """``10^2, 10^2.5, ..., x_max``."""
    lo, hi = math.log10(x_min), math.log10(x_max)
    steps = int(round((hi - lo) * 2 * per_half_decade))
    return [float(10 ** (lo + i * (hi - lo) / steps)) for i in range(steps + 1)]


def explicit_report(
    spec: ProductSpec,
    ordinates,
    xs: list[float],
    K: int = DEFAULT_ZEROS,
    convention: str | None = None,
    M: int = DEFAULT_ACCEL_DEPTH,
    P: int = DEFAULT_PRIME_CUTOFF,
    reference_residues: dict[str, float] | None = None,
) -> ExplicitFormulaReport:
    """Residues, constants, zero terms, and the direct-versus-predicted table on ``xs``."""
    xs = sorted(float(x) for x in xs)
    if xs[0] <= 0:
        raise ValueError("x must be positive")
    ordinates = list(ordinates)[:K]
    if len(ordinates) < K:
        raise ValueError(f"{K} zeros requested, only {len(ordinates)} available")
    terms = main_term_constants(spec, M, P)
    coeffs = coefficients_for(spec, xs[-1])
    choice = choose_convention(coeffs, terms, xs)
    conv = convention or choice.winner
    zts = zero_terms(spec, ordinates, M, P)
    comps = [explicit_formula_eval(coeffs, terms, zts, x, len(zts), conv, choice.c2_sign, spec.variable_scale) for x in xs]
    comps0 = [explicit_formula_eval(coeffs, terms, zts, x, 0, conv, choice.c2_sign, spec.variable_scale) for x in xs]
    lower = zero_terms(spec, [-g for g in ordinates], M, P)
    imag = max((oscillatory_pair_imag(zts, lower, x) for x in xs), default=0.0)
    notes = [
        "Mellin kernel exp(-y) = (1/2 pi i) int Gamma(w) y^-w dw",
        "residues are in the s variable; convention B divides by the variable scale",
        "zero terms are simple poles from inverse zeta factors, upper-half-plane zeros listed, conjugates implied",
    ]
    return ExplicitFormulaReport(
        spec, terms, {fmt_rational(Fraction(k)): v for k, v in (reference_residues or {}).items()}, choice, zts, len(zts), comps,
        error_exponent_fit(comps), error_exponent_fit(comps0), imag, notes,
    )

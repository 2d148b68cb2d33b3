"""Random products ``prod_nu zeta(a_nu s + b_nu)^(c_nu + eps_nu)`` and their divisors.

Only the divisors of the individual factors are computed (a finite
truncation ``nu <= V``), never that of a continuation of the product. Every
zero ``1/2 + i g`` of zeta maps to ``s = (1/2 + i g - b)/a`` with order
``c + eps``; the pole at ``a s + b = 1`` and the trivial zeros map to real
points. Weights are exact fractions, so merging conserves them exactly.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .zeros import ZeroTable

COINCIDENCE_TOL = 1e-9
CANCEL_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid random-series configuration."""


# ---------------------------------------------------------------------------
# coefficient formulas
# ---------------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_node(node: ast.AST, nu: int) -> Fraction:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, nu)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return Fraction(node.value)
    if isinstance(node, ast.Name) and node.id == "nu":
        return Fraction(nu)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, nu)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, nu), _eval_node(node.right, nu))
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        exp = _eval_node(node.right, nu)
        if exp.denominator != 1:
            raise ConfigError("only integer powers are allowed in formulas")
        return _eval_node(node.left, nu) ** int(exp)
    raise ConfigError(f"unsupported construct in formula: {ast.dump(node)[:60]}")


@dataclass(frozen=True)
class Formula:
    """Rational expression in ``nu`` built from integers, ``+ - * /`` and integer powers (``^`` or ``**``)."""

    text: str

    def __post_init__(self):
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse formula {self.text!r}") from exc
        try:
            _eval_node(tree, 1)  # validates the node types
        except ZeroDivisionError:
            pass

    def __call__(self, nu: int) -> Fraction:
        try:
            return _eval_node(ast.parse(self.text.replace("^", "**"), mode="eval"), nu)
        except ZeroDivisionError as exc:
            raise ConfigError(f"formula {self.text!r} divides by zero at nu={nu}") from exc


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationLaw:
    """``discrete`` (values with probabilities) or ``uniform`` on ``[low, high]``."""

    kind: str
    values: tuple[Fraction, ...] = ()
    probs: tuple[float, ...] = ()
    low: float = 0.0
    high: float = 0.0

    def __post_init__(self):
        if self.kind == "discrete":
            if not self.values or len(self.values) != len(self.probs):
                raise ConfigError("discrete law needs matching values and probs")
            if abs(sum(self.probs) - 1) > 1e-12 or min(self.probs) < 0:
                raise ConfigError("probabilities must be nonnegative and sum to 1")
            if max(self.probs) >= 1:
                raise ConfigError("degenerate law: a single atom carries all the mass")
        elif self.kind == "uniform":
            if not self.high > self.low:
                raise ConfigError("uniform law needs low < high")
        else:
            raise ConfigError(f"unknown perturbation law {self.kind!r}")

    @property
    def max_atom(self) -> float:
        return max(self.probs) if self.kind == "discrete" else 0.0

    def sample(self, rng: np.random.Generator, size: int) -> list[Fraction]:
        if size == 0:
            return []
        if self.kind == "discrete":
            picks = rng.choice(len(self.values), size=size, p=np.array(self.probs))
            return [self.values[i] for i in picks]
        return [Fraction(float(x)) for x in rng.uniform(self.low, self.high, size=size)]

    def to_json(self) -> dict:
        if self.kind == "discrete":
            return {"kind": "discrete", "values": [str(v) for v in self.values], "probs": list(self.probs)}
        return {"kind": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class RandomSeriesConfig:
    """Factor generator ``nu -> (a, b, c)``, perturbation law and truncation ``V``."""

    a: Formula
    b: Formula
    c: Formula
    law: PerturbationLaw
    V: int
    target_sigma: Fraction | None = None

    def __post_init__(self):
        if self.V < 0:
            raise ConfigError("V must be >= 0")
        for nu in range(1, self.V + 1):
            if self.a(nu) <= 0:
                raise ConfigError(f"a_nu must be positive (nu={nu})")
        if self.target_sigma is not None and self.V > 0:
            if abs(self.sigma_h - self.target_sigma) > Fraction(1, self.V):
                raise ConfigError(f"sigma_h = {self.sigma_h} is not within 1/V of the target {self.target_sigma}")

    def factor(self, nu: int) -> tuple[Fraction, Fraction, Fraction]:
        return self.a(nu), self.b(nu), self.c(nu)

    @property
    def sigma_h(self) -> Fraction | None:
        """Finite-V proxy for ``limsup -b/a``: the sup over ``nu`` in ``(V/2, V]``."""
        if self.V == 0:
            return None
        return max(-self.b(nu) / self.a(nu) for nu in range(self.V // 2 + 1, self.V + 1))

    @property
    def sigma(self) -> Fraction | None:
        """Line the scan is centred on: the target if given, else ``sigma_h``."""
        return self.target_sigma if self.target_sigma is not None else self.sigma_h

    @classmethod
    def from_json(cls, doc: dict | str) -> "RandomSeriesConfig":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            gen = doc["generator"]
            law = doc["perturbation"]
            if law["kind"] == "discrete":
                pl = PerturbationLaw(
                    "discrete", tuple(Fraction(str(v)) for v in law["values"]), tuple(float(p) for p in law["probs"])
                )
            else:
                pl = PerturbationLaw(law["kind"], low=float(law.get("low", 0)), high=float(law.get("high", 0)))
            target = doc.get("target_sigma")
            return cls(
                Formula(str(gen["a"])),
                Formula(str(gen["b"])),
                Formula(str(gen.get("c", "0"))),
                pl,
                int(doc["V"]),
                None if target is None else Fraction(str(target)),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "generator": {"a": self.a.text, "b": self.b.text, "c": self.c.text},
            "perturbation": self.law.to_json(),
            "V": self.V,
            "target_sigma": None if self.target_sigma is None else str(self.target_sigma),
            "sigma_h": None if self.sigma_h is None else str(self.sigma_h),
        }


def critical_line_preset(V: int = 50) -> RandomSeriesConfig:
    """Factors ``zeta(nu (s - 1/2) + 1/2)`` with symmetric sign perturbations."""
    law = PerturbationLaw("discrete", (Fraction(-1), Fraction(1)), (0.5, 0.5))
    return RandomSeriesConfig(Formula("nu"), Formula("(1 - nu)/2"), Formula("0"), law, V, Fraction(1, 2))


# ---------------------------------------------------------------------------
# realizations and divisors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Realization:
    config: RandomSeriesConfig
    seed: int
    factors: tuple[tuple[Fraction, Fraction], ...]  # (a, b) for nu = 1..V
    weights: tuple[Fraction, ...]  # c + eps

    def signs(self) -> np.ndarray:
        eps = [w - self.config.c(nu) for nu, w in enumerate(self.weights, start=1)]
        return np.sign(np.array([float(e) for e in eps]))


def sample_realization(config: RandomSeriesConfig, seed: int) -> Realization:
    """Exponents ``c_nu + eps_nu`` for ``nu <= V``; deterministic in ``(config, seed)``."""
    rng = np.random.default_rng(seed)
    eps = config.law.sample(rng, config.V)
    factors, weights = [], []
    for nu in range(1, config.V + 1):
        a, b, c = config.factor(nu)
        factors.append((a, b))
        weights.append(c + eps[nu - 1])
    return Realization(config, seed, tuple(factors), tuple(weights))


@dataclass(frozen=True)
class Box:
    sigma1: float
    sigma2: float
    t1: float
    t2: float

    def contains(self, z: complex) -> bool:
        return self.sigma1 <= z.real <= self.sigma2 and self.t1 <= z.imag <= self.t2

    def reflected(self) -> "Box":
        return Box(self.sigma1, self.sigma2, -self.t2, -self.t1)


@dataclass(frozen=True)
class DivisorPoint:
    location: complex
    weight: Fraction
    kind: str  # "zero-image", "pole" or "trivial-zero"
    sources: tuple[int, ...]  # nu values contributing

    @property
    def cancelled(self) -> bool:
        return abs(self.weight) < CANCEL_TOL


@dataclass(frozen=True)
class BoxDivisor:
    box: Box
    points: tuple[DivisorPoint, ...]
    raw_weight_sum: Fraction
    near_misses: int = 0
    note: str = "divisors of the individual factors nu <= V, not of a continuation of the product"

    @property
    def merged_weight_sum(self) -> Fraction:
        return sum((p.weight for p in self.points), Fraction(0))

    @property
    def live_points(self) -> list[DivisorPoint]:
        return [p for p in self.points if not p.cancelled]


def _ordinates_needed(realization: Realization, box: Box) -> float:
    """Largest ``|g|`` whose image can reach the box: ``|a Im s| <= a max|t|``."""
    tmax = max(abs(box.t1), abs(box.t2))
    return max((float(a) * tmax for a, _ in realization.factors), default=0.0)


def divisor_in_box(realization: Realization, box: Box, zeros: ZeroTable) -> BoxDivisor:
    """Zeros, poles and trivial zeros of each factor that land in ``box``, merged."""
    need = _ordinates_needed(realization, box)
    if need > zeros.t_max:
        raise ValueError(f"box needs zeta zeros up to {need:g}; table covers {zeros.t_max:g}")
    g = zeros.array()
    g = np.concatenate([-g[::-1], g])
    # merge key: exact data identifying the location (equal (a, b) and same zero, or an exact rational)
    merged: dict[tuple, list] = {}
    raw = Fraction(0)
    for nu, ((a, b), w) in enumerate(zip(realization.factors, realization.weights), start=1):
        if w == 0:
            continue
        fa, fb = float(a), float(b)
        lo, hi = fa * box.t1, fa * box.t2
        sel = np.flatnonzero((g >= lo) & (g <= hi))
        for i in sel:
            z = complex((0.5 - fb) / fa, g[i] / fa)
            if box.contains(z):
                key = ("zero", a, b, int(i))
                merged.setdefault(key, [z, Fraction(0), "zero-image", []])
                merged[key][1] += w
                merged[key][3].append(nu)
                raw += w
        if box.t1 <= 0 <= box.t2:
            real_pts = [((1 - b) / a, -w, "pole")]
            # trivial zeros a s + b = -2k lie at s = (-2k - b)/a, decreasing in k
            k = 1
            while float((-2 * k - b) / a) >= box.sigma1:
                real_pts.append(((-2 * k - b) / a, w, "trivial-zero"))
                k += 1
            for loc, wt, kind in real_pts:
                z = complex(float(loc), 0.0)
                if box.contains(z):
                    key = ("real", loc)
                    merged.setdefault(key, [z, Fraction(0), kind, []])
                    merged[key][1] += wt
                    merged[key][3].append(nu)
                    raw += wt
    points = sorted(
        (DivisorPoint(z, wt, kind, tuple(src)) for z, wt, kind, src in merged.values()),
        key=lambda p: (p.location.imag, p.location.real, p.kind),
    )
    near = sum(
        1
        for p, q in zip(points, points[1:])
        if abs(p.location - q.location) < COINCIDENCE_TOL
    )
    return BoxDivisor(box, tuple(points), raw, near)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    t: float
    box_hit: bool
    points: int


@dataclass(frozen=True)
class ScanReport:
    seed: int
    n: int
    sigma: float
    rows: tuple[ScanRow, ...]
    weights_conserved: bool

    @property
    def hit_fraction(self) -> float:
        return sum(r.box_hit for r in self.rows) / len(self.rows) if self.rows else 0.0

    def to_csv(self) -> str:
        lines = ["t,box_hit,points"] + [f"{r.t!r},{int(r.box_hit)},{r.points}" for r in self.rows]
        return "\n".join(lines) + "\n"


def boundary_scan(realization: Realization, n: int, t_grid, zeros: ZeroTable) -> ScanReport:
    """Boxes of side ``2/n`` centred on ``sigma + i t``; a hit is an uncancelled point."""
    sigma = realization.config.sigma
    rows = []
    conserved = True
    if sigma is None:
        return ScanReport(realization.seed, n, math.nan, tuple(ScanRow(float(t), False, 0) for t in t_grid), True)
    sg = float(sigma)
    for t in t_grid:
        box = Box(sg - 1 / n, sg + 1 / n, float(t) - 1 / n, float(t) + 1 / n)
        d = divisor_in_box(realization, box, zeros)
        conserved &= d.merged_weight_sum == d.raw_weight_sum
        live = d.live_points
        rows.append(ScanRow(float(t), bool(live), len(live)))
    return ScanReport(realization.seed, n, sg, tuple(rows), conserved)


@dataclass(frozen=True)
class MonteCarloReport:
    config: RandomSeriesConfig
    n: int
    t_grid: tuple[float, ...]
    scans: tuple[ScanReport, ...]
    sign_balance_p: float | None
    independence_p: float | None
    notes: tuple[str, ...] = field(default=())

    @property
    def hit_fraction(self) -> float:
        return float(np.mean([s.hit_fraction for s in self.scans])) if self.scans else 0.0

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "n": self.n,
            "t_grid": list(self.t_grid),
            "seeds": [s.seed for s in self.scans],
            "hit_fraction": self.hit_fraction,
            "per_seed_hit_fraction": [s.hit_fraction for s in self.scans],
            "weights_conserved": all(s.weights_conserved for s in self.scans),
            "sign_balance_p": self.sign_balance_p,
            "independence_p": self.independence_p,
            "notes": list(self.notes),
        }

    def to_csv(self) -> str:
        """``t,box_hit,points`` with hits and points summed over seeds."""
        lines = ["t,box_hit,points"]
        for i, t in enumerate(self.t_grid):
            hits = sum(s.rows[i].box_hit for s in self.scans)
            pts = sum(s.rows[i].points for s in self.scans)
            lines.append(f"{t!r},{hits},{pts}")
        return "\n".join(lines) + "\n"


def sign_tests(realizations: list[Realization]) -> tuple[float | None, float | None]:
    """Chi-square p-values: balance of signs, and consecutive-pair independence."""
    signs = np.concatenate([r.signs() for r in realizations]) if realizations else np.array([])
    signs = signs[signs != 0]
    if signs.size < 10 or np.unique(signs).size < 2:
        return None, None
    pos = int((signs > 0).sum())
    balance = float(stats.chisquare([pos, signs.size - pos]).pvalue)
    table = np.zeros((2, 2))
    for r in realizations:
        s = r.signs()
        for x, y in zip(s, s[1:]):
            if x and y:
                table[int(x > 0), int(y > 0)] += 1
    indep = float(stats.chi2_contingency(table)[1]) if np.all(table.sum(axis=0)) and np.all(table.sum(axis=1)) else None
    return balance, indep


def _scan_seed(payload) -> ScanReport:
    config_doc, seed, n, t_grid, zeros = payload
    realization = sample_realization(RandomSeriesConfig.from_json(config_doc), seed)
    return boundary_scan(realization, n, t_grid, zeros)


def monte_carlo(config: RandomSeriesConfig, seeds, n: int, t_grid, zeros: ZeroTable, jobs: int = 1) -> MonteCarloReport:
    """Scan one realization per seed; results are in seed order whatever ``jobs`` is."""
    seeds = [int(s) for s in seeds]
    reals = [sample_realization(config, s) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        doc = json.dumps(config.to_json())
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            scans = tuple(ex.map(_scan_seed, [(doc, s, n, list(t_grid), zeros) for s in seeds]))
    else:
        scans = tuple(boundary_scan(r, n, t_grid, zeros) for r in reals)
    bal, ind = sign_tests(reals)
    notes = ["finite-V Monte-Carlo diagnostic, not an almost-sure statement"]
    if config.law.kind == "discrete":
        notes.append(
            f"stationary discrete law: max atom {config.law.max_atom:g} does not tend to 0, "
            "so the vanishing-atom hypothesis is not met; run is a demonstration"
        )
    return MonteCarloReport(config, n, tuple(float(t) for t in t_grid), scans, bal, ind, tuple(notes))

"""Critical-line zeros of zeta: sign-change scan of Hardy's Z, bisection, and
an argument-principle count that certifies the table is complete.

N(T) = theta(T)/pi + 1 + S(T), with pi S(T) the continuous variation of
arg zeta along 3 + iT -> 1/2 + iT (on Re s = 3 the real part of zeta stays
positive, so the starting argument is the principal one).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .zetanum import _theta_scalar, hardy_Z, zeta

MAX_T = 5000.0
ORDINATE_DECIMALS = 12
_BISECT_WIDTH = 2e-13
_MAX_REFINEMENTS = 4


class ZeroCertificationError(RuntimeError):
    """Located zeros disagree with the argument-principle count."""


@dataclass(frozen=True)
class ZeroTable:
    """Ascending ordinates of every zero ``1/2 + i g`` with ``0 < g <= t_max``."""

    ordinates: tuple[float, ...]
    t_max: float
    precision: float = 10.0**-ORDINATE_DECIMALS
    certified_at: tuple[tuple[float, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        g = np.asarray(self.ordinates)
        if g.size and (np.any(np.diff(g) <= 0) or g[0] <= 0):
            raise ValueError("ordinates must be positive and strictly increasing")

    def __len__(self) -> int:
        return len(self.ordinates)

    def array(self) -> np.ndarray:
        return np.asarray(self.ordinates, dtype=float)

    def first(self, k: int) -> np.ndarray:
        if k > len(self.ordinates):
            raise ValueError(f"table holds {len(self.ordinates)} zeros, {k} requested")
        return self.array()[:k]


# ---------------------------------------------------------------------------
# argument principle
# ---------------------------------------------------------------------------


def _arg_variation(T: float, start: float = 3.0, points: int = 64) -> float:
    """Continuous change of ``arg zeta`` from ``start + iT`` to ``1/2 + iT``, plus the start arg."""
    for _ in range(12):
        sigma = np.linspace(start, 0.5, points)
        vals = zeta(sigma + 1j * T)
        steps = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(steps)) < 0.25:
            return float(np.angle(vals[0]) + steps.sum())
        points *= 2
    raise ZeroCertificationError(f"arg zeta does not resolve along Im s = {T}; is T at a zero?")


def argument_principle_count(T: float) -> int:
    """Number of zeros with ``0 < Im rho <= T`` in the critical strip."""
    value = _theta_scalar(T) / math.pi + 1 + _arg_variation(T) / math.pi
    n = round(value)
    if abs(value - n) > 0.05:
        raise ZeroCertificationError(f"count at T={T} is not near an integer ({value:.4f})")
    return int(n)


def riemann_von_mangoldt(T):
    """Smooth main term ``(T/2pi) log(T/2pi) - T/2pi + 7/8``."""
    x = np.asarray(T, dtype=float) / (2 * math.pi)
    return x * np.log(x) - x + 7 / 8


# ---------------------------------------------------------------------------
# sign-change scan and bisection
# ---------------------------------------------------------------------------


def _grid(t0: float, t1: float, density: float) -> np.ndarray:
    """Points with spacing ``min(0.5, gap/density)``, gap the local mean zero spacing."""
    pts = [t0]
    t = t0
    while t < t1:
        gap = 2 * math.pi / math.log(max(t, 7.0) / (2 * math.pi)) if t > 7 else 2 * math.pi
        t = min(t + min(0.5, gap / density), t1)
        pts.append(t)
    return np.array(pts)


def _bisect(lo: np.ndarray, hi: np.ndarray, zlo: np.ndarray) -> np.ndarray:
    """Vectorized bisection of brackets with ``Z(lo)`` of sign ``zlo``."""
    lo, hi, slo = lo.copy(), hi.copy(), np.sign(zlo)
    for _ in range(80):
        width = hi - lo
        active = width > np.maximum(_BISECT_WIDTH, 4 * np.spacing(hi))
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        zm = np.sign(hardy_Z(mid[active]))
        m = mid[active]
        same = zm == slo[active]
        ia = np.flatnonzero(active)
        lo[ia[same]] = m[same]
        hi[ia[~same]] = m[~same]
        exact = zm == 0
        lo[ia[exact]] = hi[ia[exact]] = m[exact]
    return 0.5 * (lo + hi)


def _scan_grid(t: np.ndarray) -> np.ndarray:
    """Roots bracketed by consecutive points of ``t``."""
    z = hardy_Z(t)
    sgn = np.sign(z)
    idx = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
    roots = _bisect(t[idx], t[idx + 1], z[idx])
    exact = t[sgn == 0]
    return np.sort(np.concatenate([roots, exact]))


def _scan(t0: float, t1: float, density: float, jobs: int) -> np.ndarray:
    t = _grid(t0, t1, density)
    if jobs <= 1 or t.size < 2000:
        return _scan_grid(t)
    # one global grid split into overlapping pieces, so results do not depend on jobs;
    # cut points are chosen for equal work (cost per point grows like t)
    work = np.cumsum(t)
    cuts = np.searchsorted(work, np.linspace(0, work[-1], 4 * jobs + 1)[1:-1])
    bounds = [0, *cuts.tolist(), t.size - 1]
    pieces = [t[a : b + 1] for a, b in zip(bounds, bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(_scan_grid, pieces))
    roots = np.concatenate(parts)
    # a grid point that is an exact zero would be reported by both neighbours
    return np.unique(roots)


def _check_points(roots: np.ndarray, t_max: float, count: int = 8) -> list[float]:
    """Mid-gap heights spread over the range, the last one in ``(t_max, next zero)``."""
    inside = np.flatnonzero(roots <= t_max)
    pts = []
    if inside.size:
        chosen = np.unique(np.linspace(0, inside[-1], count).astype(int))
        pts = [0.5 * (roots[i] + roots[i + 1]) for i in chosen[:-1]]
    beyond = roots[roots > t_max]
    pts.append(0.5 * (t_max + beyond[0]) if beyond.size else t_max)
    return sorted(set(float(T) for T in pts))


def certify(roots: np.ndarray, heights: list[float]) -> list[tuple[float, int]]:
    """Compare located counts with the argument principle at each height."""
    out = []
    for T in heights:
        expected = argument_principle_count(T)
        found = int(np.searchsorted(roots, T, side="right"))
        if found != expected:
            raise ZeroCertificationError(f"N({T:.6f}): located {found}, argument principle {expected}")
        out.append((float(T), expected))
    return out


def locate_zeros(t_max: float, jobs: int = 1) -> ZeroTable:
    """All zeros with ordinate ``<= t_max``, certified complete by counting."""
    if not 0 < t_max <= MAX_T:
        raise ValueError(f"t_max must be in (0, {MAX_T:g}]")
    density = 8.0
    last_error = None
    for _ in range(_MAX_REFINEMENTS + 1):
        # scan a little past t_max so the final certification height sits in a gap beyond it
        roots = _scan(1.0, t_max + 4.0, density, jobs)
        while roots.size and roots[-1] <= t_max:
            more = _scan(float(roots[-1]) + 1e-9, float(roots[-1]) + 8.0, density, 1)
            if more.size == 0:
                break
            roots = np.concatenate([roots, more])
        try:
            cert = certify(roots, _check_points(roots, t_max))
        except ZeroCertificationError as exc:
            last_error = exc
            density *= 2
            continue
        # stored at the cache precision so fresh and cached tables are identical
        kept = [round(float(g), ORDINATE_DECIMALS) for g in roots[roots <= t_max]]
        return ZeroTable(tuple(kept), float(t_max), certified_at=tuple(cert))
    raise ZeroCertificationError(f"certification failed after {_MAX_REFINEMENTS} refinements: {last_error}")


# ---------------------------------------------------------------------------
# counting queries
# ---------------------------------------------------------------------------


def zero_count(table: ZeroTable, T: float) -> int:
    """``N(T) = #{g <= T}``."""
    if T > table.t_max:
        raise ValueError(f"T={T} beyond table coverage t_max={table.t_max}")
    return int(np.searchsorted(table.array(), T, side="right"))


def backlund_gap_check(table: ZeroTable, T: float) -> bool:
    """``N(T + 6) > N(T)``."""
    if T + 6 > table.t_max:
        raise ValueError(f"T+6={T + 6} beyond table coverage t_max={table.t_max}")
    return zero_count(table, T + 6) > zero_count(table, T)


@dataclass(frozen=True)
class CountingReport:
    """Gap checks and the deviation of N(T) from the smooth main term."""

    gap_range: tuple[int, int] | None
    gap_failures: tuple[int, ...]
    sample_T: tuple[float, ...]
    deviations: tuple[float, ...]
    backlund_ratio_max: float
    note: str = (
        "deviation measured against main(T) = (T/2pi)log(T/2pi) - T/2pi + 7/8; "
        "dropping the -T/2pi term makes |N(T) - (T/2pi)log(T/2pi)| grow linearly, so no log T bound holds for it"
    )

    @property
    def gaps_ok(self) -> bool:
        return not self.gap_failures

    def to_json(self) -> dict:
        return {
            "gap_range": list(self.gap_range) if self.gap_range else None,
            "gaps_ok": self.gaps_ok,
            "gap_failures": list(self.gap_failures),
            "max_abs_deviation": max((abs(d) for d in self.deviations), default=0.0),
            "backlund_ratio_max": self.backlund_ratio_max,
            "note": self.note,
        }


def counting_report(table: ZeroTable, gap_from: int | None = None, gap_to: int | None = None) -> CountingReport:
    """Gap check on integer T in ``[gap_from, gap_to]`` and the main-term deviation."""
    gap_range = None
    failures: list[int] = []
    if gap_from is not None:
        gap_to = int(table.t_max - 6) if gap_to is None else gap_to
        gap_range = (gap_from, gap_to)
        failures = [T for T in range(gap_from, gap_to + 1) if not backlund_gap_check(table, T)]
    hi = table.t_max
    lo = min(100.0, hi)
    sample = np.linspace(lo, hi, 50) if hi > lo else np.array([hi])
    dev = [zero_count(table, float(T)) - float(riemann_von_mangoldt(T)) for T in sample]
    ratio = max((abs(d) / math.log(T) for d, T in zip(dev, sample) if T > 1), default=0.0)
    return CountingReport(gap_range, tuple(failures), tuple(float(x) for x in sample), tuple(dev), ratio)

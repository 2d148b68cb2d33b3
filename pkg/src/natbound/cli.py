"""Command-line front end.

Every subcommand validates its arguments, computes the whole report in
memory, and only then writes files (atomically). Errors are printed as JSON
with a machine-readable code; exit status 2 means invalid input, 3 a failed
numerical certification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import cache
from ._arith import fmt_rational, parse_rational
from .dirichlet import (
    AccuracyError,
    ConvergenceError,
    ProductSpec,
    coefficient_sieve,
    coefficients_via_zeta_product,
    integer_root,
)
from .explicit import (
    DEFAULT_ZEROS,
    PoleError,
    default_grid,
    explicit_report,
    main_poles,
    residue_at_pole,
)
from .ghost import (
    DEFAULT_DEPTH,
    DENSITY_VARIANTS,
    WittIntegralityError,
    boundary_prime_density,
    candidate_boundary,
    convergence_abscissa,
    dyadic_blocks_nonzero,
    estermann_check,
    ghost_expand,
    local_zero_spot_check,
)
from .polyparse import PolynomialError, PolynomialSyntaxError, parse_polynomial
from .presets import get_preset
from .randlab import ConfigError, RandomSeriesConfig, critical_line_preset, monte_carlo
from .zeros import ZeroCertificationError, counting_report
from .zetanum import ZetaDomainError, gamma, zeta

SCHEMA = 1
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CERTIFICATION = 3


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage_error", message)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _factor(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("prefactor must be a,b,c meaning zeta(a s - b)^c")
    return tuple(int(x) for x in parts)


def _add_spec_args(p: argparse.ArgumentParser, poly_default: str | None = None) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--poly", help="local factor polynomial in p and T, e.g. '1 + T + p*T^2'")
    g.add_argument("--preset", help="named specification (quadratic-half, polarised-z6)")
    g.add_argument("--spec", type=Path, help="JSON file with W, prefactors, variable_scale")
    p.add_argument("--prefactor", type=_factor, action="append", default=[], help="extra zeta(a s - b)^c as a,b,c")
    p.add_argument("--scale", type=_positive_int, default=None, help="variable scale k (w = s/k)")
    p.set_defaults(poly_default=poly_default)


def _spec_from_args(args) -> tuple[ProductSpec, object]:
    """The product specification and the preset it came from (or None)."""
    preset = None
    if args.preset:
        preset = get_preset(args.preset)
        spec = preset.spec
    elif args.spec:
        try:
            doc = json.loads(args.spec.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("validation_error", f"cannot read spec file: {exc}") from exc
        spec = ProductSpec(parse_polynomial(doc["W"]), tuple(tuple(f) for f in doc.get("prefactors", [])), int(doc.get("variable_scale", 1)))
    elif args.poly or args.poly_default:
        spec = ProductSpec(parse_polynomial(args.poly or args.poly_default))
    else:
        raise CliError("validation_error", "one of --poly, --preset or --spec is required")
    if args.prefactor or args.scale:
        spec = ProductSpec(spec.W, spec.prefactors + tuple(args.prefactor), args.scale or spec.variable_scale)
    return spec, preset


# ---------------------------------------------------------------------------
# subcommands: each returns (report, csv_text or None)
# ---------------------------------------------------------------------------


def _reference_factor_comparison(expansion, boundary, reference: dict) -> list[dict]:
    out = []
    for (n, m), e_ref in sorted(reference.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        e = expansion.get(n, m) if m <= expansion.depth else None
        row = {"n": n, "m": m, "canonical": e, "reference": e_ref, "agree": e == e_ref}
        if e != e_ref and boundary.tail_sup is not None and Fraction(n, m) < boundary.global_sup:
            row["note"] = (
                f"n/m = {fmt_rational(Fraction(n, m))} lies left of the candidate boundary; a factor holomorphic "
                "beyond the boundary can absorb it, so a displayed product may differ from the canonical one here"
            )
        out.append(row)
    return out


def cmd_expand(args):
    spec, preset = _spec_from_args(args)
    W = spec.W
    exp = ghost_expand(W, args.depth)
    boundary = candidate_boundary(exp)
    est = estermann_check(W, args.depth)
    report = {
        "polynomial": str(W),
        "depth": args.depth,
        "expansion": exp.to_json(),
        "sigma_a": fmt_rational(convergence_abscissa(W)),
        "boundary": boundary.to_json(),
        "estermann": est.to_json(),
        "dyadic_blocks": [{"from": a, "to": b, "nonzero": nz} for a, b, nz in dyadic_blocks_nonzero(exp)],
    }
    if preset is not None and preset.reference_factors:
        report["reference_comparison"] = _reference_factor_comparison(exp, boundary, preset.reference_factors)
    return report, None


def cmd_density(args):
    spec, _ = _spec_from_args(args)
    exp = ghost_expand(spec.W, args.depth)
    xs = args.x or None
    dens = boundary_prime_density(exp, args.beta, args.variant, args.epsilon, xs)
    report = {"polynomial": str(spec.W), "depth": args.depth, "density": dens.to_json()}
    if args.beta is not None and dens.primes:
        report["local_zero_spot_check"] = local_zero_spot_check(spec.W, args.beta, dens.primes[:10])
    return report, None


def cmd_coeffs(args):
    spec, _ = _spec_from_args(args)
    ca = coefficient_sieve(spec, args.N)
    M = integer_root(args.N, spec.variable_scale)
    checks = {"a_1": ca[1], "nonnegative": all(v >= 0 for v in ca.base[1:])}
    if not args.no_dual:
        depth = max(1, M.bit_length())
        cb = coefficients_via_zeta_product(ghost_expand(spec.W, depth), spec.prefactors, args.N, spec.variable_scale)
        checks["dual_route_depth"] = depth
        checks["dual_route_equal"] = cb == ca
    head = [{"n": m**spec.variable_scale, "a_n": ca.base[m]} for m in range(1, min(M, 30) + 1) if ca.base[m]]
    report = {
        "spec": spec.to_json(),
        "N": args.N,
        "support": ca.support_note,
        "first_nonzero": head,
        "checks": checks,
    }
    return report, ca.to_csv() if args.csv else None


def _zero_table(t_max: float, args):
    return cache.get_zero_table(t_max, args.cache_dir, jobs=args.jobs, use_cache=not args.no_cache)


def cmd_zeros(args):
    table = _zero_table(args.tmax, args)
    cr = counting_report(table, args.check_gaps, args.gaps_to) if args.check_gaps is not None else counting_report(table)
    report = {
        "t_max": table.t_max,
        "count": len(table),
        "first": [round(g, 12) for g in table.ordinates[:5]],
        "certified_at": [{"T": T, "N": n} for T, n in table.certified_at],
        "counting": cr.to_json(),
    }
    return report, cache.zeros_csv_text(table) if args.csv else None


def _residue_block(spec, preset, points, M, P):
    refs = preset.reference_residues if preset else {}
    out = []
    for s0 in points:
        r = residue_at_pole(spec, s0, M, P)
        row = {"s0": fmt_rational(r.s0), "residue": r.value, "error": r.error, "pole_factor": [r.factor.a, r.factor.b, r.factor.c]}
        ref = {Fraction(k): v for k, v in refs.items()}.get(r.s0)
        if ref is not None:
            row["reference"] = ref
            row["reference_over_computed"] = ref / r.value
        out.append(row)
    return out


def cmd_residues(args):
    spec, preset = _spec_from_args(args)
    points = [Fraction(x) for x in args.at] if args.at else main_poles(spec, args.M)
    rows = _residue_block(spec, preset, points, args.M, args.P)
    report = {"spec": spec.to_json(), "residues_s": rows, "zeta_2": zeta(2.0).real}
    return report, None


def _enough_zeros(K: int, args):
    T = 30.0 + 3.0 * K
    while True:
        table = _zero_table(T, args)
        if len(table) >= K:
            return table
        T *= 1.5


def cmd_explicit(args):
    spec, preset = _spec_from_args(args)
    if args.xmin >= args.xmax:
        raise CliError("validation_error", "--xmin must be below --xmax")
    xs = default_grid(args.xmax, args.xmin, args.per_half_decade)
    table = _enough_zeros(args.zeros, args) if args.zeros else None
    ords = table.ordinates[: args.zeros] if table else ()
    conv = None if args.convention == "auto" else args.convention
    refs = {k: v for k, v in (preset.reference_residues if preset else {}).items()}
    rep = explicit_report(spec, ords, xs, args.zeros, conv, args.M, args.P, refs)
    report = {"report": rep.to_json()}
    if preset is not None and preset.reference_constants and len(rep.main_terms) >= 3:
        t1, _, t3 = rep.main_terms[:3]
        report["reference_checks"] = {
            "c1_convention_A": t1.constant_A,
            "c1_reference": preset.reference_constants.get("c1"),
            "gamma_5_3_times_reference_residue": (gamma(float(t3.exponent)).real * refs["5"]) if "5" in refs else None,
            "c3_reference": preset.reference_constants.get("c3"),
            "residue_5_reference_over_computed": refs["5"] / t3.residue if "5" in refs else None,
            "zeta_2": zeta(2.0).real,
        }
    return report, rep.to_csv() if args.csv else None


def cmd_randlab(args):
    if args.config:
        try:
            config = RandomSeriesConfig.from_json(args.config.read_text())
        except OSError as exc:
            raise CliError("validation_error", f"cannot read config: {exc}") from exc
        if args.V is not None:
            config = RandomSeriesConfig(config.a, config.b, config.c, config.law, args.V, config.target_sigma)
    else:
        config = critical_line_preset(args.V if args.V is not None else 50)
    steps = int(round((args.t_to - args.t_from) / args.t_step))
    t_grid = [args.t_from + i * args.t_step for i in range(steps + 1)]
    seeds = list(range(args.seed_start, args.seed_start + args.seeds))
    reach = max((float(config.a(nu)) for nu in range(1, config.V + 1)), default=0.0) * (max(abs(t) for t in t_grid) + 1.0 / args.n)
    table = _zero_table(max(20.0, math.ceil(reach) + 1.0), args)
    mc = monte_carlo(config, seeds, args.n, t_grid, table, jobs=args.jobs)
    return {"randlab": mc.to_json()}, mc.to_csv() if args.csv else None


def cmd_cache(args):
    if args.action == "warm":
        if args.tmax is None:
            raise CliError("validation_error", "cache warm needs --tmax")
        return {"cache": cache.warm(args.tmax, args.cache_dir, args.jobs)}, None
    if args.action == "verify":
        return {"cache": cache.verify(args.cache_dir)}, None
    return {"cache": cache.purge(args.cache_dir)}, None


# ---------------------------------------------------------------------------
# parser and driver
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common(default):
        c = _Parser(add_help=False)
        c.add_argument("--out", type=Path, default=default(None), help="write the JSON report here instead of stdout")
        c.add_argument("--csv", type=Path, default=default(None), help="also write the subcommand's CSV table here")
        c.add_argument("--cache-dir", type=Path, default=default(None), help=f"zero cache directory (default ${cache.CACHE_ENV} or ~/.cache/natbound)")
        c.add_argument("--no-cache", action="store_true", default=default(False), help="compute zeros without reading or writing the cache")
        c.add_argument("--jobs", type=_positive_int, default=default(1), help="worker processes for parallel steps")
        return c

    # the same options are accepted before or after the subcommand
    parser = _Parser(prog="natbound", description="Euler products, zeta factorizations and explicit formulas.", parents=[common(lambda v: v)])
    shared = common(lambda v: argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expand", parents=[shared], help="ghost expansion, candidate boundary and termination test")
    _add_spec_args(p)
    p.add_argument("--depth", type=_positive_int, default=DEFAULT_DEPTH)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("density", parents=[shared], help="prime-density diagnostic for the boundary criteria")
    _add_spec_args(p)
    p.add_argument("--depth", type=_positive_int, default=41)
    p.add_argument("--variant", choices=DENSITY_VARIANTS, default="shifted-line")
    p.add_argument("--beta", type=_rational, default=None)
    p.add_argument("--epsilon", type=_rational, default=Fraction(1))
    p.add_argument("--x", type=_positive_float, nargs="*", default=None)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("coeffs", parents=[shared], help="Dirichlet coefficients with the dual-route check")
    _add_spec_args(p)
    p.add_argument("--N", type=_positive_int, default=10_000)
    p.add_argument("--no-dual", action="store_true", help="skip the convolution cross-check")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("zeros", parents=[shared], help="locate and certify zeta zeros, gap checks")
    p.add_argument("--tmax", type=_positive_float, required=True)
    p.add_argument("--check-gaps", type=int, default=None, help="first integer T for the N(T+6) > N(T) check")
    p.add_argument("--gaps-to", type=int, default=None, help="last integer T (default t_max - 6)")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("residues", parents=[shared], help="residues at the main poles (s variable)")
    _add_spec_args(p)
    p.add_argument("--at", nargs="*", default=None, help="poles to evaluate (default: all main poles)")
    p.add_argument("-M", type=_positive_int, default=8, help="acceleration depth")
    p.add_argument("-P", type=_positive_int, default=100_000, help="prime cutoff")
    p.set_defaults(func=cmd_residues)

    p = sub.add_parser("explicit", parents=[shared], help="direct A(x) against the explicit formula")
    _add_spec_args(p)
    p.add_argument("--xmin", type=_positive_float, default=1e2)
    p.add_argument("--xmax", type=_positive_float, default=1e4)
    p.add_argument("--per-half-decade", type=_positive_int, default=1)
    p.add_argument("--zeros", type=int, default=DEFAULT_ZEROS, help="number K of zero pairs")
    p.add_argument("--convention", choices=("auto", "A", "B"), default="auto")
    p.add_argument("-M", type=_positive_int, default=8)
    p.add_argument("-P", type=_positive_int, default=100_000)
    p.set_defaults(func=cmd_explicit)

    p = sub.add_parser("randlab", parents=[shared], help="random zeta products: divisors in boxes along the boundary")
    p.add_argument("--config", type=Path, default=None, help="JSON config (default: critical-line preset)")
    p.add_argument("--V", type=int, default=None)
    p.add_argument("--seeds", type=_positive_int, default=20)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--n", type=_positive_int, default=10, help="boxes have side 2/n")
    p.add_argument("--t-from", type=float, default=5.0)
    p.add_argument("--t-to", type=float, default=20.0)
    p.add_argument("--t-step", type=_positive_float, default=1.0)
    p.set_defaults(func=cmd_randlab)

    p = sub.add_parser("cache", parents=[shared], help="zero cache administration")
    p.add_argument("action", choices=("warm", "verify", "purge"))
    p.add_argument("--tmax", type=_positive_float, default=None)
    p.set_defaults(func=cmd_cache)
    return parser


def _classify(exc: BaseException) -> tuple[str, int]:
    if isinstance(exc, CliError):
        return exc.code, exc.exit_code
    if isinstance(exc, cache.CacheCorruptError):
        return "cache_corrupt", EXIT_CERTIFICATION
    if isinstance(exc, ZeroCertificationError):
        return "certification_failure", EXIT_CERTIFICATION
    if isinstance(exc, AccuracyError):
        return "accuracy_unreachable", EXIT_CERTIFICATION
    if isinstance(exc, WittIntegralityError):
        return "integrality_failure", EXIT_CERTIFICATION
    if isinstance(exc, PolynomialSyntaxError):
        return "polynomial_syntax", EXIT_VALIDATION
    if isinstance(exc, PolynomialError):
        return "polynomial_invalid", EXIT_VALIDATION
    if isinstance(exc, ConfigError):
        return "config_invalid", EXIT_VALIDATION
    if isinstance(exc, (ConvergenceError, PoleError, ZetaDomainError)):
        return "domain_error", EXIT_VALIDATION
    return "validation_error", EXIT_VALIDATION


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def run(argv: list[str] | None = None) -> int:
    """Execute one command; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        report, csv_text = args.func(args)
    except (CliError, ValueError, KeyError, ArithmeticError, ZeroCertificationError) as exc:
        code, status = _classify(exc)
        error = {"code": code, "message": str(exc)}
        if isinstance(exc, PolynomialSyntaxError):
            error["position"] = exc.position
        sys.stdout.write(_dumps({"schema": SCHEMA, "command": command, "status": "error", "error": error}))
        return status
    doc = {"schema": SCHEMA, "command": command, "status": "ok", **report}
    text = _dumps(doc)
    # everything is computed; only now touch the filesystem
    if args.csv is not None and csv_text is not None:
        cache.atomic_write_text(args.csv, csv_text)
    if args.out is not None:
        cache.atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

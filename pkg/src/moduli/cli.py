"""Command-line front end: queries, result serialization, memo cache.

Exit codes: 0 success, 1 computation error, 2 usage error, 3 selftest
failure.  Results print as human-readable text, or as JSON with --json;
--decimal appends a floating approximation (display only, comparisons
stay exact).  --cache FILE (or the MODULI_CACHE environment variable,
which wins) persists S-number values between runs as newline-delimited
JSON; records from a different engine version are ignored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import ENGINE_VERSION
from .hierarchy import boussinesq_check, bracket_value
from .hurwitz import (
    DegreeTooLarge,
    HurwitzQuery,
    NoFullCyclePassport,
    PreconditionViolated,
    hurwitz_bruteforce,
    hurwitz_class_algebra,
    hurwitz_polynomial_closed,
    tau3g_from_hurwitz,
)
from .m0n import DegreeOverflow, intersection_hurwitz, intersection_integrand
from .partitions import RamificationProfile, format_rational
from .rspin import (
    RSpinEngine,
    canonical_shat1_key,
    primary_table_from_json_obj,
    shat1_table_from_json_obj,
)
from .acceptance import run_all

USAGE_ERROR, COMPUTE_ERROR, SELFTEST_ERROR = 2, 1, 3


class UsageError(ValueError):
    """Malformed flag value; maps to exit code 2."""


@dataclass
class QueryResult:
    """What a query computed and how."""

    query: dict
    value: str
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "QueryResult":
        return QueryResult(**json.loads(text))


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_passports(text: str) -> tuple[tuple[int, ...], ...]:
    """'4;2,2;2,1,1' -> ((4,), (2,2), (2,1,1))."""
    try:
        out = []
        for chunk in text.split(";"):
            parts = tuple(int(tok) for tok in chunk.split(",") if tok.strip())
            if not parts:
                raise ValueError("empty passport")
            out.append(parts)
        return tuple(out)
    except ValueError as exc:
        raise UsageError(f"bad passport list {text!r}: {exc}") from None


def parse_label_counts(text: str) -> list[int]:
    """'1:3,0:1' -> [1, 1, 1, 0] (a label repeated count times)."""
    labels: list[int] = []
    if not text:
        return labels
    try:
        for tok in text.split(","):
            label, count = tok.split(":")
            labels.extend([int(label)] * int(count))
    except ValueError:
        raise UsageError(f"bad 'label:count' list {text!r}") from None
    return labels


def parse_insertions(text: str) -> tuple[tuple[int, int], ...]:
    """'0:1,1:2' -> ((0,1), (1,2)): one eta_{label,multiplicity} per token."""
    try:
        out = []
        for tok in text.split(","):
            label, mult = tok.split(":")
            out.append((int(label), int(mult)))
        return tuple(out)
    except ValueError:
        raise UsageError(f"bad 'label:multiplicity' list {text!r}") from None


def parse_tau(text: str) -> tuple[int, int]:
    try:
        n, m = (int(tok) for tok in text.split(","))
        return n, m
    except ValueError:
        raise UsageError(f"bad descendant {text!r}; expected 'n,m'") from None


# ---------------------------------------------------------------------------
# cache file


def cache_path(args) -> str | None:
    return os.environ.get("MODULI_CACHE") or getattr(args, "cache", None)


def load_cache(path: str | None) -> dict[str, str]:
    if not path or not os.path.exists(path):
        return {}
    out: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                return {}  # corrupt cache: ignore the whole file
            if rec.get("version") != ENGINE_VERSION:
                return {}  # stale cache: ignore the whole file
            out[rec["key"]] = rec["value"]
    return out


def save_cache(path: str | None, values: dict[str, str]) -> None:
    if not path:
        return
    with open(path, "w") as fh:
        for key in sorted(values):
            fh.write(
                json.dumps(
                    {"key": key, "value": values[key], "version": ENGINE_VERSION}
                )
                + "\n"
            )


def engine_with_cache(args, r: int) -> tuple[RSpinEngine, dict[str, str]]:
    primary = None
    shat1 = None
    if getattr(args, "primary_table", None):
        with open(args.primary_table) as fh:
            table_r, primary = primary_table_from_json_obj(json.load(fh))
        if table_r != r:
            raise UsageError(f"primary table is for r={table_r}, query uses r={r}")
    if getattr(args, "shat1_table", None):
        with open(args.shat1_table) as fh:
            table_r, shat1 = shat1_table_from_json_obj(json.load(fh))
        if table_r != r:
            raise UsageError(f"shat1 table is for r={table_r}, query uses r={r}")
    engine = RSpinEngine(r, primary_table=primary, shat1_table=shat1)
    cached = load_cache(cache_path(args))
    if cached:
        engine.preload(cached)
    return engine, cached


def flush_cache(args, engine: RSpinEngine, cached: dict[str, str]) -> None:
    path = cache_path(args)
    if path:
        cached.update(engine.dump_constants())
        save_cache(path, cached)


# ---------------------------------------------------------------------------
# output


def emit(args, result: QueryResult) -> None:
    if args.decimal:
        value = Fraction(result.value)
        result.diagnostics["approx"] = repr(float(value))
    if args.json:
        print(result.to_json())
    else:
        print(f"{result.value}  [{result.method}]")
        if args.decimal:
            print(f"  ~ {result.diagnostics['approx']}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_hurwitz(args) -> int:
    passports = parse_passports(args.passports)
    profile = RamificationProfile(args.n, passports)
    if args.genus is not None:
        HurwitzQuery(profile, args.genus)  # cross-check the redundant genus
    dispatch = {
        "brute": hurwitz_bruteforce,
        "class-algebra": hurwitz_class_algebra,
        "closed-form": hurwitz_polynomial_closed,
        "psi-classes": intersection_hurwitz,
    }
    t0 = time.monotonic()
    if args.method == "auto":
        values: dict[str, Fraction] = {}
        for name in ("closed-form", "class-algebra", "brute", "psi-classes"):
            try:
                values[name] = dispatch[name](profile)
            except (PreconditionViolated, NoFullCyclePassport, DegreeTooLarge, DegreeOverflow):
                continue
            if len(values) == 2:
                break
        if not values:
            print("no evaluation method applies to this profile", file=sys.stderr)
            return COMPUTE_ERROR
        distinct = set(values.values())
        if len(distinct) != 1:
            print(f"methods disagree: {values}", file=sys.stderr)
            return COMPUTE_ERROR
        value = distinct.pop()
        method = "+".join(values)
    else:
        value = dispatch[args.method](profile)
        method = args.method
    result = QueryResult(
        query={"n": args.n, "passports": args.passports},
        value=format_rational(value),
        method=method,
        diagnostics={"elapsed": round(time.monotonic() - t0, 6)},
    )
    if args.dump_class:
        cls = intersection_integrand(profile)
        result.diagnostics["class"] = cls.to_json_obj()
    emit(args, result)
    return 0


def cmd_correlator(args) -> int:
    n, m = parse_tau(args.tau)
    primaries = parse_label_counts(args.tau0)
    engine, cached = engine_with_cache(args, args.r)
    t0 = time.monotonic()
    insertions = [(n, m)] + [(0, q) for q in primaries]
    value = bracket_value(engine, insertions, args.genus)
    result = QueryResult(
        query={"r": args.r, "tau": args.tau, "tau0": args.tau0, "genus": args.genus},
        value=format_rational(value),
        method="spin-recursion",
        diagnostics={
            "elapsed": round(time.monotonic() - t0, 6),
            "cache_hits": engine.cache_hits,
            "cache_misses": engine.cache_misses,
            "recursion_depth": engine.max_depth,
        },
    )
    flush_cache(args, engine, cached)
    emit(args, result)
    return 0


def cmd_snumber(args) -> int:
    engine, cached = engine_with_cache(args, args.r)
    t0 = time.monotonic()
    value = engine.S_number(args.n, args.g, args.m, parse_insertions(args.insertions))
    result = QueryResult(
        query={
            "r": args.r, "n": args.n, "g": args.g, "m": args.m,
            "insertions": args.insertions,
        },
        value=format_rational(value),
        method="spin-recursion",
        diagnostics={
            "elapsed": round(time.monotonic() - t0, 6),
            "cache_hits": engine.cache_hits,
            "cache_misses": engine.cache_misses,
            "recursion_depth": engine.max_depth,
        },
    )
    flush_cache(args, engine, cached)
    emit(args, result)
    return 0


def cmd_shat1(args) -> int:
    engine, cached = engine_with_cache(args, args.r)
    pairs = parse_insertions(args.key)
    t0 = time.monotonic()
    value = engine.shat1(pairs)
    result = QueryResult(
        query={"r": args.r, "key": args.key},
        value=format_rational(value),
        method="trr",
        diagnostics={
            "elapsed": round(time.monotonic() - t0, 6),
            "canonical_key": [list(p) for p in canonical_shat1_key(pairs)],
        },
    )
    emit(args, result)
    return 0


def cmd_tau3g(args) -> int:
    t0 = time.monotonic()
    value = tau3g_from_hurwitz(args.g, args.l)
    result = QueryResult(
        query={"g": args.g, "l": args.l},
        value=format_rational(value),
        method="class-algebra",
        diagnostics={"elapsed": round(time.monotonic() - t0, 6)},
    )
    emit(args, result)
    return 0


def cmd_bouss_check(args) -> int:
    engine, cached = engine_with_cache(args, 3)
    extra = tuple((0, q) for q in parse_label_counts(args.extra))
    report = boussinesq_check(engine, args.n, args.m, extra)
    flush_cache(args, engine, cached)
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        verdict = "holds" if report["equal"] else "FAILS"
        print(
            f"relation (n={args.n}, m={args.m}, extra={args.extra or '-'}) {verdict}: "
            f"lhs = {report['lhs']}, rhs = {report['rhs']}"
        )
    return 0 if report["equal"] else COMPUTE_ERROR


def cmd_selftest(args) -> int:
    records = run_all(jobs=args.jobs)
    for rec in records:
        status = "PASS" if rec["passed"] else "FAIL"
        print(
            f"{status} criterion {rec['id']}: {rec['description']} "
            f"[{rec['elapsed']:.2f}s] {rec['detail']}"
        )
    if args.json:
        print(json.dumps(records, sort_keys=True))
    return 0 if all(r["passed"] for r in records) else SELFTEST_ERROR


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moduli",
        description=(
            "Exact Hurwitz numbers, genus-zero tautological intersections, "
            "and r-spin intersection numbers."
        ),
    )
    parser.add_argument("--json", action="store_true", help="JSON on stdout")
    parser.add_argument(
        "--decimal", action="store_true", help="append a float approximation"
    )
    parser.add_argument(
        "--cache", metavar="FILE", help="persistent memo cache (MODULI_CACHE wins)"
    )

    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values parsed by the main parser
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--decimal", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--cache", metavar="FILE", default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("hurwitz", help="Hurwitz number of a ramification profile")
    p.add_argument("--n", type=int, required=True, help="degree")
    p.add_argument(
        "--passports", required=True, help="semicolon-separated, e.g. '4;2,2;2,1,1'"
    )
    p.add_argument(
        "--genus", type=int, default=None, help="optional cross-check of the genus"
    )
    p.add_argument(
        "--method",
        choices=["auto", "brute", "class-algebra", "closed-form", "psi-classes"],
        default="auto",
        help="auto cross-validates two applicable methods",
    )
    p.add_argument(
        "--dump-class",
        action="store_true",
        help="include the intersection-formula integrand strata in diagnostics",
    )
    p.set_defaults(fn=cmd_hurwitz)

    tables = argparse.ArgumentParser(add_help=False)
    tables.add_argument(
        "--primary-table", metavar="FILE", default=argparse.SUPPRESS,
        help="JSON genus-0 primary table for r outside {2,3,4}",
    )
    tables.add_argument(
        "--shat1-table", metavar="FILE", default=argparse.SUPPRESS,
        help="JSON table of solved genus-1 divisor integrals",
    )

    p = sub.add_parser("correlator", parents=[common, tables],
                       help="<tau_{n,m} prod tau_{0,i}>_g")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--tau", required=True, help="descendant as 'n,m'")
    p.add_argument("--tau0", default="", help="primaries as 'label:count,...'")
    p.add_argument("--genus", type=int, default=None)
    p.set_defaults(fn=cmd_correlator)

    p = sub.add_parser("snumber", parents=[common, tables],
                       help="S^n_{g,m}(prod eta_{q,a})")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--insertions", required=True, help="'label:mult,label:mult,...'")
    p.set_defaults(fn=cmd_snumber)

    p = sub.add_parser("shat1", parents=[common, tables],
                       help="genus-1 divisor integral by its signed key")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--key", required=True, help="'label:b,label:-b,...'")
    p.set_defaults(fn=cmd_shat1)

    p = add_parser("tau3g", help="<tau_{3g} tau_0^2>_g from Hurwitz numbers")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--l", type=int, required=True, help="shift parameter (any l works)")
    p.set_defaults(fn=cmd_tau3g)

    p = add_parser("bouss-check", help="verify one r=3 hierarchy relation instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True, choices=[0, 1])
    p.add_argument("--extra", default="", help="extra primaries as 'label:count,...'")
    p.set_defaults(fn=cmd_bouss_check)

    p = add_parser("selftest", help="run the full acceptance battery")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, LookupError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())

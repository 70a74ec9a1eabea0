"""Command-line surface: census runs, sweeps, constants, verification suites,
and classification queries.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 capacity error.

Box convention (everywhere a --x X1 X2 X3 X4 flag appears): X_i bounds the
i-th invariant.  Since inv1 = m2', inv2 = m3', inv3 = m1' and inv4 is the
twist, X1 bounds m2', X2 bounds m3', X3 bounds m1', X4 bounds the twist.
For symmetric boxes the distinction is invisible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from math import gcd

from . import __version__
from .arith import (
    CapacityError,
    InvalidTripleError,
    SignedSquarefreeTriple,
    build_sieve,
    decompose_triple,
    factor_small,
    load_sieve_cache,
    save_sieve_cache,
    _is_squarefree_small,
)
from .asymptotic import (
    CONSTANTS,
    EulerProductSpec,
    c_base,
    c_tilde,
    constant_identity,
    dyadic_hom_count,
    leading_constant,
    lemma432_sums,
    per_prime_identity_fractions,
    predicted_count,
    primes_up_to,
    tamagawa_constant,
)
from .census import (
    BoundBox,
    InertiaClass,
    exact_census,
    inertia_class,
    invariants_of,
    required_sieve_limit,
    splitting_rows,
)
from .charsum import L_divisor_sum, L_product, census_from_classes
from .localsolve import (
    ALL_DELTAS,
    ALL_NUS,
    TWO_PLACE,
    UNIT_RESIDUES,
    e_set_literal_000,
    e_set_literal_010,
    find_conic_point,
    hilbert_symbol,
    in_E_set,
    padic_oracle,
    relevant_places,
    satisfies_local_conditions,
    u_weight,
)

SWEEP_CSV_HEADER = "x1,x2,x3,x4,exact,predicted,ratio"
BREAKDOWN_CSV_HEADER = "m1,m2,m3,twists,cumulative"

VERIFY_SUITES = (
    "lemma432",
    "hasse",
    "lemma41",
    "esets",
    "divisor-identity",
    "census-consistency",
    "constants",
    "tamagawa",
)


def _fmt_float(v: float) -> str:
    if v != v or v in (float("inf"), float("-inf")):
        return "null"
    return format(v, ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits.

    Re-serializing a parsed report reproduces it byte for byte.
    """
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return repr(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ",".join(
            f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in sorted(obj.items())
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _envelope(command: str, config: dict, result, elapsed: float, checks=None) -> dict:
    env = {
        "tool": "d4census",
        "version": __version__,
        "command": command,
        "config": config,
        "result": result,
        "elapsed_seconds": elapsed,
    }
    if checks is not None:
        env["checks"] = checks
    return env


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _load_tables(limit: int, cache_path):
    """Build the sieve, or reuse a cache file when it covers the limit."""
    if cache_path and os.path.exists(cache_path):
        try:
            tables = load_sieve_cache(cache_path)
        except ValueError as err:
            raise CapacityError(f"sieve cache {cache_path}: {err}") from err
        if tables.limit >= limit:
            return tables
    tables = build_sieve(limit)
    if cache_path:
        save_sieve_cache(tables, cache_path)
    return tables


def cmd_count(args) -> int:
    t0 = time.perf_counter()
    box = BoundBox(*args.x)
    tables = _load_tables(required_sieve_limit(box), args.sieve_cache)
    report = exact_census(
        box, tables, workers=args.workers, pmax=args.pmax,
        want_breakdown=(args.format == "csv"),
    )
    if args.format == "csv":
        lines = [BREAKDOWN_CSV_HEADER]
        for m1, m2, m3, twists, cumulative in report.breakdown or []:
            lines.append(f"{m1},{m2},{m3},{twists},{cumulative}")
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    result = {
        "box": list(box.as_tuple()),
        "exact": report.exact,
        "predicted": report.predicted,
        "ratio": report.ratio,
        "triples_visited": report.triples_visited,
    }
    if args.format == "json":
        env = _envelope("count", _config_echo(args), result, time.perf_counter() - t0)
        _emit(canonical_json(env), args.out)
    else:
        _emit(
            f"box       = {box.as_tuple()}\n"
            f"exact     = {report.exact}\n"
            f"predicted = {report.predicted:.6f}\n"
            f"ratio     = {report.ratio:.6f}\n"
            f"triples   = {report.triples_visited}\n",
            args.out,
        )
    return 0


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    box = BoundBox(*args.x)
    spec = EulerProductSpec(pmax=args.pmax)
    lead = leading_constant(spec)
    result = {
        "box": list(box.as_tuple()),
        "leading_constant": lead.value,
        "tail_bound": lead.tail_bound,
        "predicted": predicted_count(box, spec),
    }
    if args.format == "json":
        _emit(canonical_json(_envelope("predict", _config_echo(args), result,
                                       time.perf_counter() - t0)), args.out)
    else:
        _emit(
            f"leading constant = {lead.value:.12f} (log-tail <= {lead.tail_bound:.2e})\n"
            f"predicted        = {result['predicted']:.6f}\n",
            args.out,
        )
    return 0


def cmd_constants(args) -> int:
    t0 = time.perf_counter()
    spec = EulerProductSpec(pmax=args.pmax)
    c1 = c_base(spec)
    ct = c_tilde(spec)
    lead = leading_constant(spec)
    ident = constant_identity(spec)
    tam = tamagawa_constant(spec)
    result = {
        "pmax": args.pmax,
        "c1": c1.value,
        "c1_tail": c1.tail_bound,
        "c_tilde": ct.value,
        "c_tilde_tail": ct.tail_bound,
        "leading_constant": lead.value,
        "identity_residual": ident.residual,
        "tamagawa": {
            "alpha_star": tam.parts.alpha_star,
            "tau_infty": tam.parts.tau_infty,
            "tau_two": tam.parts.tau_two,
            "tau2_hom_count": tam.tau2_etale,
            "group_order": tam.parts.group_order,
            "rational_prefactor": tam.parts.rational_prefactor(),
            "product": tam.product,
        },
    }
    if args.format == "json":
        _emit(canonical_json(_envelope("constants", _config_echo(args), result,
                                       time.perf_counter() - t0)), args.out)
    else:
        lines = [
            f"c(1)            = {c1.value:.12f}  (log-tail <= {c1.tail_bound:.2e})",
            f"c_tilde         = {ct.value:.12e}  (log-tail <= {ct.tail_bound:.2e})",
            f"leading const   = {lead.value:.12f}",
            f"identity resid  = {ident.residual:.3e}",
            f"tamagawa parts  = |G|=8, alpha*=1/4, tau_inf=3/4, tau_2=9/4 "
            f"(hom count {tam.tau2_etale})",
            f"tamagawa value  = {tam.product:.12f}",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    boxes = []
    x = args.min
    while x <= args.max:
        x4 = args.fix_x4 if args.fix_x4 is not None else x
        boxes.append(BoundBox(x, x, x, x4))
        x *= args.factor
    if args.classes:
        # per-class breakdown rows instead of the aggregate census
        from .charsum import class_sums_csv

        chunks = []
        for i, box in enumerate(boxes):
            try:
                tables = _load_tables(required_sieve_limit(box), args.sieve_cache)
                text = class_sums_csv(box, tables, EulerProductSpec(pmax=args.pmax))
            except CapacityError as err:
                print(f"sweep: skipping {box.as_tuple()}: {err}", file=sys.stderr)
                continue
            chunks.append(text if i == 0 else text.split("\n", 1)[1])
        _emit("".join(chunks), args.out)
        return 0
    lines = [SWEEP_CSV_HEADER]
    for box in boxes:
        try:
            tables = _load_tables(required_sieve_limit(box), args.sieve_cache)
            report = exact_census(box, tables, workers=args.workers, pmax=args.pmax)
        except CapacityError as err:
            print(f"sweep: skipping {box.as_tuple()}: {err}", file=sys.stderr)
            continue
        x1, x2, x3, x4 = box.as_tuple()
        lines.append(
            f"{_fmt_float(float(x1))},{_fmt_float(float(x2))},{_fmt_float(float(x3))},"
            f"{_fmt_float(float(x4))},{report.exact},{_fmt_float(report.predicted)},"
            f"{_fmt_float(report.ratio)}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    triple = SignedSquarefreeTriple(*args.triple)
    try:
        triple.validate()
        vec = invariants_of(triple, args.twist)
    except (InvalidTripleError, ValueError) as err:
        print(f"classify: {err}", file=sys.stderr)
        return 2
    dec = decompose_triple(triple)
    a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
    soluble = satisfies_local_conditions(triple)
    ramified = {}
    for p in sorted(set(factor_small(dec.m1p * dec.m2p * dec.m3p * args.twist))):
        cls = inertia_class(p, triple, args.twist)
        ramified[str(p)] = cls.value
    witness = find_conic_point(a, b, args.height) if soluble else None
    result = {
        "triple": list(triple.as_tuple()),
        "twist": args.twist,
        "invariants": list(vec.as_tuple()),
        "conic": {"a": a, "b": b, "locally_soluble": soluble,
                  "witness": list(witness) if witness else None},
        "ramified_primes": ramified,
    }
    if args.prime:
        cls = inertia_class(args.prime, triple, args.twist)
        result["queried_prime"] = {
            "p": args.prime,
            "inertia_class": cls.value,
            "splitting_rows": [list(r) for r in splitting_rows(cls)]
            if cls is not InertiaClass.UNRAMIFIED else [],
        }
    if args.format == "json":
        _emit(canonical_json(_envelope("classify", _config_echo(args), result,
                                       time.perf_counter() - t0)), args.out)
    else:
        lines = [
            f"triple      = {triple.as_tuple()}, twist = {args.twist}",
            f"invariants  = {vec.as_tuple()}",
            f"conic       = x^2 - ({a})y^2 - ({b})z^2, soluble: {soluble}, "
            f"witness: {witness}",
            f"ramified    = {ramified}",
        ]
        if args.prime:
            lines.append(f"prime {args.prime} inertia class: {result['queried_prime']['inertia_class']}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# verification suites


def _check(name: str, expected, actual, ok=None) -> dict:
    passed = (expected == actual) if ok is None else bool(ok)
    return {"name": name, "expected": expected, "actual": actual, "pass": passed}


def _suite_lemma432(args) -> list[dict]:
    sums = lemma432_sums()
    checks = [
        _check("class_sum_weight_at_one", 432, sums.weight_at_one),
        _check("class_sum_weighted", 432, sums.weighted),
    ]
    for delta in ALL_DELTAS:
        tally = tuple(sums.tally[(delta, nu)] for nu in ALL_NUS)
        checks.append(_check(f"class_tally_delta_{delta}", list(CONSTANTS["class_tally"]),
                             list(tally)))
    return checks


def _valid_triples(bound: int):
    sf = [n for n in range(1, bound + 1) if _is_squarefree_small(n)]
    signed = [s * n for n in sf for s in (1, -1)]
    for m1 in sf:
        for m2 in signed:
            if gcd(m1, m2) != 1:
                continue
            for m3 in signed:
                if gcd(m1, m3) != 1 or gcd(m2, m3) != 1:
                    continue
                yield SignedSquarefreeTriple(m1, m2, m3)


def _suite_hasse(args) -> list[dict]:
    bound = args.bound or 30
    bad = 0
    total = 0
    for triple in _valid_triples(bound):
        a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
        prod = 1
        for v in relevant_places(triple):
            prod *= hilbert_symbol(a, b, v)
        total += 1
        if prod != 1:
            bad += 1
    return [_check(f"hasse_product_bound_{bound}", {"cases": total, "failures": 0},
                   {"cases": total, "failures": bad})]


def _suite_lemma41(args) -> list[dict]:
    bound = args.bound or 30
    memo: dict = {}

    def oracle(a, b, v):
        key = (a, b, v.p)
        if key not in memo:
            memo[key] = padic_oracle(a, b, v)
        return memo[key]

    total = equiv_bad = oracle_bad = 0
    for triple in _valid_triples(bound):
        a, b = triple.m1 * triple.m2, triple.m1 * triple.m3
        places = relevant_places(triple)
        all_plus = all(hilbert_symbol(a, b, v) == 1 for v in places)
        if satisfies_local_conditions(triple) != all_plus:
            equiv_bad += 1
        if all(oracle(a, b, v) for v in places) != all_plus:
            oracle_bad += 1
        total += 1
    return [
        _check(f"local_conditions_vs_symbols_bound_{bound}",
               {"cases": total, "failures": 0}, {"cases": total, "failures": equiv_bad}),
        _check(f"symbols_vs_oracle_bound_{bound}",
               {"cases": total, "failures": 0}, {"cases": total, "failures": oracle_bad}),
    ]


def _suite_esets(args) -> list[dict]:
    ident_bad = positive_bad = 0
    for a1 in UNIT_RESIDUES:
        for a2 in UNIT_RESIDUES:
            for a3 in UNIT_RESIDUES:
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        mu, al, be = nu
                        u = u_weight(a1, a2, a3, delta, nu)
                        sym = hilbert_symbol(
                            (1 << (mu + al)) * delta[0] * a1 * a2,
                            (1 << (mu + be)) * delta[1] * a1 * a3,
                            TWO_PLACE,
                        )
                        if u != sym:
                            ident_bad += 1
                        if in_E_set((a1, a2, a3), nu, delta) and u != 1:
                            positive_bad += 1
    literal_bad = 0
    for a1 in UNIT_RESIDUES:
        for a2 in UNIT_RESIDUES:
            for a3 in UNIT_RESIDUES:
                eps = (a1, a2, a3)
                if e_set_literal_000(eps) != in_E_set(eps, (0, 0, 0)):
                    literal_bad += 1
                if e_set_literal_010(eps) != in_E_set(eps, (0, 1, 0)):
                    literal_bad += 1
    return [
        _check("u_equals_dyadic_symbol_768_cases", 0, ident_bad),
        _check("u_positive_on_admissible_classes", 0, positive_bad),
        _check("literal_residue_lists_match", 0, literal_bad),
    ]


def _suite_divisor_identity(args) -> list[dict]:
    bound = args.bound or 3000
    tables = build_sieve(bound)
    odd_sf = tables.odd_squarefree_upto(bound)
    bad = total = 0
    for m1 in odd_sf:
        for m2 in odd_sf:
            if m1 * m2 > bound:
                break
            if gcd(m1, m2) != 1:
                continue
            m12 = m1 * m2
            for m3 in odd_sf:
                if m12 * m3 > bound:
                    break
                if gcd(m12, m3) != 1:
                    continue
                tau = int(tables.tau[m12 * m3])
                for delta in ALL_DELTAS:
                    for nu in ALL_NUS:
                        lp = L_product((m1, m2, m3), delta, nu)
                        ls = L_divisor_sum((m1, m2, m3), delta, nu)
                        total += 1
                        if lp != ls or lp not in (0, tau):
                            bad += 1
    return [_check(f"product_equals_divisor_sum_upto_{bound}",
                   {"cases": total, "failures": 0}, {"cases": total, "failures": bad})]


def _suite_census_consistency(args) -> list[dict]:
    boxes = [(1, 1, 1, 1), (10, 10, 10, 10), (50, 50, 50, 50)]
    if args.x:
        boxes = [tuple(args.x)]
    checks = []
    for raw in boxes:
        box = BoundBox(*raw)
        tables = build_sieve(required_sieve_limit(box))
        exact = exact_census(box, tables, workers=args.workers, pmax=args.pmax).exact
        via_classes = census_from_classes(box, tables)
        checks.append(_check(f"census_vs_class_sums_{raw}", exact, via_classes))
        if raw == (1, 1, 1, 1):
            checks.append(_check("unit_box_exact", 16, exact))
    return checks


def _suite_constants(args) -> list[dict]:
    spec = EulerProductSpec(pmax=args.pmax)
    ident = constant_identity(spec)
    per_prime_bad = sum(
        1 for p in primes_up_to(100)[1:] if per_prime_identity_fractions(int(p))[0]
        != per_prime_identity_fractions(int(p))[1]
    )
    spec_small = EulerProductSpec(pmax=max(args.pmax // 2, 3))
    ident_small = constant_identity(spec_small)
    return [
        _check(f"identity_residual_below_{args.tol}",
               {"residual_max": args.tol}, {"residual": ident.residual},
               ok=ident.residual < args.tol),
        _check("per_prime_identity_exact_to_100", 0, per_prime_bad),
        _check("residual_shrinks_with_pmax", True,
               ident.residual <= ident_small.residual + args.tol),
    ]


def _suite_tamagawa(args) -> list[dict]:
    spec = EulerProductSpec(pmax=args.pmax)
    tam = tamagawa_constant(spec)
    head = tam.parts.rational_prefactor()
    return [
        _check("dyadic_hom_count", "36", str(dyadic_hom_count())),
        _check("rational_head_27_over_8", "27/8", str(head)),
        _check(f"product_matches_leading_below_{args.tol}",
               {"difference_max": args.tol}, {"difference": tam.difference},
               ok=tam.difference < args.tol),
    ]


_SUITE_RUNNERS = {
    "lemma432": _suite_lemma432,
    "hasse": _suite_hasse,
    "lemma41": _suite_lemma41,
    "esets": _suite_esets,
    "divisor-identity": _suite_divisor_identity,
    "census-consistency": _suite_census_consistency,
    "constants": _suite_constants,
    "tamagawa": _suite_tamagawa,
}


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    checks = _SUITE_RUNNERS[args.suite](args)
    all_pass = all(c["pass"] for c in checks)
    result = {"suite": args.suite, "all_pass": all_pass}
    env = _envelope("verify", _config_echo(args), result,
                    time.perf_counter() - t0, checks=checks)
    if args.format == "json":
        _emit(canonical_json(env), args.out)
    else:
        lines = []
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            lines.append(f"{status:4s} {c['name']}: expected {c['expected']}, "
                         f"actual {c['actual']}")
        lines.append(f"suite {args.suite}: {'PASS' if all_pass else 'FAIL'}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if all_pass else 1


def _config_echo(args) -> dict:
    skip = {"func"}
    out = {}
    for k, v in vars(args).items():
        if k in skip or v is None:
            continue
        out[k] = list(v) if isinstance(v, (list, tuple)) else v
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d4census",
        description="Exact census and asymptotic checks for dihedral octic "
                    "fields ordered by multi-invariants.",
    )
    parser.add_argument("--version", action="version", version=f"d4census {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_box=False, box_required=False):
        if with_box:
            p.add_argument("--x", nargs=4, type=float, metavar=("X1", "X2", "X3", "X4"),
                           required=box_required,
                           help="invariant bounds; X1->m2', X2->m3', X3->m1', X4->twist")
        p.add_argument("--pmax", type=int, default=100_000,
                       help="Euler product truncation (default 100000)")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--out", default=None, help="write output to this path")
        p.add_argument("--sieve-cache", default=None, help="sieve cache file path")

    p_count = sub.add_parser("count", help="exact census of a box")
    add_common(p_count, with_box=True, box_required=True)
    p_count.set_defaults(func=cmd_count)

    p_predict = sub.add_parser("predict", help="main-term prediction for a box")
    add_common(p_predict, with_box=True, box_required=True)
    p_predict.set_defaults(func=cmd_predict)

    p_const = sub.add_parser("constants", help="evaluate the closed-form constants")
    add_common(p_const)
    p_const.set_defaults(func=cmd_constants)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", required=True, choices=VERIFY_SUITES)
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--bound", type=int, default=None,
                          help="case bound for exhaustive suites")
    add_common(p_verify, with_box=True)
    p_verify.set_defaults(func=cmd_verify)

    p_classify = sub.add_parser("classify", help="invariants and inertia classes "
                                                 "of a labeled triple")
    p_classify.add_argument("--triple", nargs=3, type=int, required=True,
                            metavar=("M1", "M2", "M3"))
    p_classify.add_argument("--twist", type=int, default=1)
    p_classify.add_argument("--prime", type=int, default=None)
    p_classify.add_argument("--height", type=int, default=500,
                            help="search bound for a conic witness point")
    add_common(p_classify)
    p_classify.set_defaults(func=cmd_classify)

    p_sweep = sub.add_parser("sweep", help="census over a doubling grid of boxes")
    p_sweep.add_argument("--min", type=float, default=10.0)
    p_sweep.add_argument("--max", type=float, default=80.0)
    p_sweep.add_argument("--factor", type=float, default=2.0)
    p_sweep.add_argument("--fix-x4", type=float, default=None,
                         help="hold X4 at this value instead of the symmetric bound")
    p_sweep.add_argument("--classes", action="store_true",
                         help="emit per-residue-class rows instead of the aggregate")
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CapacityError as err:
        print(f"capacity error: {err}", file=sys.stderr)
        return 3
    except (InvalidTripleError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: table reproduction, bounds, searches, verification.

Exit codes: 0 success, 1 invalid input (or a failed verify), 2 a table row
outside tolerance, 3 a search that failed to converge.  The error class
name goes to stderr.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
from mpmath import mpf

from . import bounds, multilinear, report
from .errors import BHError, ConvergenceFailure, InvalidParameter, ParseError
from .families import FamilySpec, bernoulli_random, certified_norm, make_family, p2k_poly, tm_form
from .polycore import (
    deserialize,
    eval_real,
    lp_interpolation_bounds,
    poly_new,
    serialize,
)
from .precision import to_mpf
from .report import RunConfig, load_config
from .supnorm import OptimizerConfig, sup_norm_bivariate, sup_norm_multistart, sup_norm_pab_closed


def _parse_param(text: str):
    key, sep, raw = text.partition("=")
    if not sep:
        raise InvalidParameter(f"--param expects key=value, got {text!r}")
    try:
        return key, int(raw)
    except ValueError:
        pass
    try:
        return key, Fraction(raw)
    except (ValueError, ZeroDivisionError):
        return key, raw


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--precision", type=int, help="working precision in significant digits")
    common.add_argument("--threads", type=int, help="worker threads for table rows")
    common.add_argument("--seed", type=int, help="seed for randomized commands")
    common.add_argument("--format", choices=("csv", "markdown"), help="table output format")
    common.add_argument("--out", help="write the CSV result to this path")
    common.add_argument("--cache", help="directory for cached power expansions")

    parser = argparse.ArgumentParser(prog="bh", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_table = sub.add_parser("table", parents=[common], help="reproduce a bounds table")
    p_table.add_argument("id", choices=("1", "2", "3", "summary", "comparative"))

    p_bound = sub.add_parser("bound", parents=[common], help="lower bound from a family power")
    p_bound.add_argument("--family", required=True)
    p_bound.add_argument("--param", action="append", default=[], metavar="k=v")
    p_bound.add_argument("--power", type=int, default=1)

    p_search = sub.add_parser("search", parents=[common], help="extremal-parameter search")
    p_search.add_argument("target", choices=("m2", "m3", "m6"))

    p_sup = sub.add_parser("supnorm", parents=[common], help="sup norm of a polynomial file")
    p_sup.add_argument("file")

    p_hyper = sub.add_parser("hyper", parents=[common], help="aggregate growth evidence from a results CSV")
    p_hyper.add_argument("file")

    p_ml = sub.add_parser("multilinear", parents=[common], help="doubling-family multilinear bound")
    p_ml.add_argument("--m", type=int, required=True)

    p_con = sub.add_parser("contractivity", parents=[common], help="fixed-dimension complex constant")
    p_con.add_argument("--n", type=int, required=True)
    p_con.add_argument("--m", type=int, required=True)

    p_ksz = sub.add_parser("ksz", parents=[common], help="random-polynomial growth-slope experiment")
    p_ksz.add_argument("--m", type=int, required=True)
    p_ksz.add_argument("--r", required=True, help="exponent in [1, 2m/(m+1)], e.g. 1 or 4/3")
    p_ksz.add_argument("--n-list", required=True, help="comma-separated dimensions, e.g. 4,8,16,32")
    p_ksz.add_argument("--trials", type=int, default=32)

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def _config_from_args(args) -> RunConfig:
    overrides = {
        "precision_digits": getattr(args, "precision", None),
        "threads": getattr(args, "threads", None),
        "seed": getattr(args, "seed", None),
        "output_format": getattr(args, "format", None),
        "cache_dir": getattr(args, "cache", None),
    }
    return load_config(getattr(args, "config", None), overrides)


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _record_output(record: bounds.BoundRecord, human: str, args) -> None:
    csv_text = report.records_to_csv([record])
    if args.out:
        Path(args.out).write_text(csv_text)
    sys.stdout.write(csv_text)
    print(human)


def cmd_table(args, cfg: RunConfig) -> int:
    if args.id == "comparative":
        _emit(report.render_comparative(cfg.output_format), args.out)
        return 0
    rows = report.compute_table(args.id, cfg)
    rendered = report.render_table(rows, cfg.output_format)
    if args.out:
        Path(args.out).write_text(report.records_to_csv([r.record for r in rows]))
    sys.stdout.write(rendered)
    bad = [r for r in rows if not r.ok]
    for r in bad:
        print(f"row m={r.record.m}: computed {report.nstr12(r.record.value)} "
              f"vs reference {r.reference} (rel {r.rel_err:.2e})", file=sys.stderr)
    return 2 if bad else 0


def cmd_bound(args, cfg: RunConfig) -> int:
    params = dict(_parse_param(p) for p in args.param)
    spec = FamilySpec(args.family, params)
    record = report.power_bound_cached(spec, args.power, cfg.cache_dir)
    _record_output(
        record,
        f"degree {record.m} lower bound {report.nstr12(record.value)} "
        f"(mth root {report.nstr12(record.mth_root)}) from {spec.label()}^{args.power}",
        args,
    )
    return 0


def cmd_search(args, cfg: RunConfig) -> int:
    target = args.target
    if target == "m2":
        ex = bounds.search_m2()
        root = mpmath.sqrt(ex.bound)
    elif target == "m3":
        ex = bounds.search_m3()
        root = ex.bound ** (mpf(1) / 3)
    else:
        ex = bounds.search_m6()
        root = ex.bound ** (mpf(1) / 6)
    m = {"m2": 2, "m3": 3, "m6": 6}[target]
    record = bounds.BoundRecord(bounds.KIND_POLY_REAL, m, ex.bound, root, ex.family, 1, "extremal-search")
    _record_output(
        record,
        f"degree {m}: extremal parameter {mpmath.nstr(ex.parameter, 12)} "
        f"gives lower bound {report.nstr12(ex.bound)}",
        args,
    )
    return 0


def cmd_supnorm(args, cfg: RunConfig) -> int:
    poly = deserialize(Path(args.file).read_text())
    if poly.n == 1:
        value = max((abs(to_mpf(c)) for c in poly.terms.values()), default=mpf(0))
        method, maximizer = "analytic", (1.0,)
    elif poly.n == 2:
        result = sup_norm_bivariate(poly)
        value, method, maximizer = result.value, result.method, result.maximizer
    else:
        result = sup_norm_multistart(poly, OptimizerConfig(seed=cfg.seed))
        value, method, maximizer = result.value, result.method, result.maximizer
    line = f"supnorm,{report.nstr12(value)},{method}\n"
    if args.out:
        Path(args.out).write_text(line)
    sys.stdout.write(line)
    print(f"sup norm {report.nstr12(value)} via {method} at {tuple(round(x, 6) for x in maximizer)}")
    return 0


def cmd_hyper(args, cfg: RunConfig) -> int:
    records = report.read_records_csv(Path(args.file).read_text())
    real = [r for r in records if r.kind == bounds.KIND_POLY_REAL]
    estimate = bounds.hyper_aggregate(real)
    evidence = (report.nstr12(estimate.h_inf_lower_evidence)
                if estimate.h_inf_lower_evidence is not None else "n/a")
    print(f"absolute growth lower bound: {report.nstr12(estimate.h_a_lower)}")
    print(f"asymptotic growth evidence (degrees >= 16): {evidence}")
    if args.out:
        Path(args.out).write_text(
            f"h_a_lower,{report.nstr12(estimate.h_a_lower)}\nh_inf_lower_evidence,{evidence}\n"
        )
    return 0


def cmd_multilinear(args, cfg: RunConfig) -> int:
    form = tm_form(args.m)
    exact = form.m * form.n <= multilinear.BRUTE_FORCE_CAP
    norm = multilinear.ml_sup_norm_bruteforce(form, iterative=not exact)
    q = Fraction(2 * args.m, args.m + 1)
    lq = multilinear.ml_coeff_lq_norm(form, q)
    quotient = lq.value / norm.value
    formula = multilinear.cm_lower_bound(args.m, q)
    record = bounds.BoundRecord(bounds.KIND_MULTILINEAR, args.m, quotient,
                                quotient ** (mpf(1) / args.m), FamilySpec("tm", {"m": args.m}),
                                1, norm.method)
    _record_output(
        record,
        f"arity {args.m}: coefficient norm {report.nstr12(lq.value)}, cube norm "
        f"{report.nstr12(norm.value)} ({'exact' if exact else 'heuristic'}), quotient "
        f"{report.nstr12(quotient)}; closed form {report.nstr12(formula)}",
        args,
    )
    return 0


def cmd_contractivity(args, cfg: RunConfig) -> int:
    value = bounds.contractivity_dm(args.n, args.m)
    line = f"contractivity,{args.n},{args.m},{report.nstr12(value)}\n"
    if args.out:
        Path(args.out).write_text(line)
    sys.stdout.write(line)
    print(f"fixed dimension n={args.n}, degree m={args.m}: constant {report.nstr12(value)}")
    return 0


def cmd_ksz(args, cfg: RunConfig) -> int:
    n_list = tuple(int(x) for x in args.n_list.split(","))
    rep = bounds.ksz_experiment(args.m, Fraction(args.r), n_list, args.trials, cfg.seed)
    line = (f"ksz,{rep.m},{rep.r},{'|'.join(map(str, rep.n_list))},{rep.trials},"
            f"{rep.seed},{rep.theoretical_slope:.6f},{rep.fitted_slope:.6f}\n")
    if args.out:
        Path(args.out).write_text(line)
    sys.stdout.write(line)
    print(f"fitted slope {rep.fitted_slope:.4f} vs theoretical {rep.theoretical_slope:.4f} "
          f"(m={rep.m}, r={rep.r})")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _sample_cube(poly, count: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    points = rng.uniform(-1.0, 1.0, size=(count, poly.n))
    total = np.zeros(count)
    for alpha, c in poly.sorted_terms():
        term = np.full(count, float(c))
        for i, e in enumerate(alpha):
            if e:
                term *= points[:, i] ** e
        total += term
    return float(np.max(np.abs(total)))


def _verify_checks():
    import random as pyrandom

    rng = pyrandom.Random(20240901)

    def check_homogeneity():
        for _ in range(20):
            n = rng.randint(1, 4)
            m = rng.randint(1, 6)
            poly = bernoulli_random(n, m, rng.randrange(2**32))
            x = [rng.uniform(-1, 1) for _ in range(n)]
            t = rng.uniform(-2, 2)
            lhs = float(to_mpf(eval_real(poly, [t * v for v in x])))
            rhs = float(t**m) * float(to_mpf(eval_real(poly, x)))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs)), (lhs, rhs)

    def check_lp_sandwich():
        for _ in range(20):
            d = rng.randint(1, 12)
            v = [rng.uniform(-5, 5) for _ in range(d)]
            p = rng.uniform(1, 3)
            q = p + rng.uniform(0, 3)
            lo, hi = lp_interpolation_bounds(v, p, q)
            direct = sum(abs(c) ** p for c in v) ** (1 / p)
            assert float(lo) <= direct * (1 + 1e-9) and direct <= float(hi) * (1 + 1e-9)

    def check_quartic_norm():
        p4 = make_family(FamilySpec("p4"))
        value = sup_norm_bivariate(p4).value
        assert abs(value - 2 * mpmath.sqrt(3) / 9) < mpf("1e-30")

    def check_closed_vs_bruteforce():
        for _ in range(40):
            a = rng.uniform(-3, 3)
            b = rng.uniform(-3, 3)
            if abs(a) + abs(b) < 1e-6:
                continue
            closed = sup_norm_pab_closed(a, b).value
            brute = sup_norm_bivariate(poly_new(
                2, 3, [((3, 0), a), ((2, 1), b), ((1, 2), b), ((0, 3), a)])).value
            assert abs(closed - brute) <= mpf("1e-9") * max(1, brute), (a, b)

    def check_pipeline_consistency():
        for fam in ("p4", "p5"):
            spec = FamilySpec(fam)
            one = bounds.power_bound(spec, 1)
            direct = bounds.bh_lower_bound(make_family(spec), certified_norm(spec))
            assert one.value == direct.value

    def check_binomial_identity():
        import math as pymath
        for n in range(1, 61):
            assert sum(pymath.comb(n, k) ** 2 for k in range(n + 1)) == pymath.comb(2 * n, n)
        sharp, relaxed = bounds.estimate_4n(40)
        assert sharp.value >= relaxed

    def check_multilinear():
        t2 = tm_form(2)
        norm = multilinear.ml_sup_norm_bruteforce(t2)
        lq = multilinear.ml_coeff_lq_norm(t2, Fraction(4, 3))
        assert abs(lq.value / norm.value - mpmath.sqrt(2)) < mpf("1e-12")
        for m in (2, 3):
            form = tm_form(m)
            assert len(form.coeffs) == 4 ** (m - 1)
            assert set(form.coeffs.values()) <= {1, -1}
            assert multilinear.ml_sup_norm_bruteforce(form).value == 2 ** (m - 1)

    def check_p2k():
        for k in (1, 2, 3):
            poly = p2k_poly(k)
            e1 = [1] + [0] * (poly.n - 1)
            assert eval_real(poly, e1) == 1
            assert _sample_cube(poly, 100_000, seed=k) <= 1 + 1e-12

    def check_searches():
        ex2 = bounds.search_m2()
        assert bounds.m2_quotient(ex2.parameter - mpf("1e-4")) < ex2.bound
        assert bounds.m2_quotient(ex2.parameter + mpf("1e-4")) < ex2.bound
        lam0, lam1 = bounds.find_lambda01()
        assert abs(bounds.find_b1() - bounds.find_b1_numeric()) < mpf("1e-10")
        assert lam0 < lam1 < 0

    def check_serialization():
        p5 = make_family(FamilySpec("p5"))
        assert deserialize(serialize(p5)) == p5

    return [
        ("homogeneity", check_homogeneity),
        ("lp interpolation sandwich", check_lp_sandwich),
        ("quartic family norm", check_quartic_norm),
        ("cubic closed form vs brute force", check_closed_vs_bruteforce),
        ("pipeline consistency", check_pipeline_consistency),
        ("binomial identity and relaxation", check_binomial_identity),
        ("multilinear quotients", check_multilinear),
        ("difference-of-squares family", check_p2k),
        ("extremal searches", check_searches),
        ("serialization round trip", check_serialization),
    ]


def cmd_verify(args, cfg: RunConfig) -> int:
    failures = 0
    for name, check in _verify_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
    return 1 if failures else 0


_COMMANDS = {
    "table": cmd_table,
    "bound": cmd_bound,
    "search": cmd_search,
    "supnorm": cmd_supnorm,
    "hyper": cmd_hyper,
    "multilinear": cmd_multilinear,
    "contractivity": cmd_contractivity,
    "ksz": cmd_ksz,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        with mpmath.workdps(cfg.precision_digits):
            return _COMMANDS[args.command](args, cfg)
    except ConvergenceFailure as exc:
        print(f"ConvergenceFailure: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameter, ParseError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BHError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, TypeError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

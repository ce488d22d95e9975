"""The lower-bound pipeline and the extremal-parameter searches.

Everything here produces certified lower bounds for the best constant in
the degree-m coefficient inequality  |coeffs(P)|_{2m/(m+1)} <= D_m * ||P||:
any single polynomial with a known norm gives the quotient as a bound, and
powers of a fixed family give bounds for all multiples of its degree since
sup |P^n| = (sup |P|)^n.  Quotients are formed in the log domain, so powers
with thousand-digit coefficients cost nothing in accuracy.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf

from .errors import ConvergenceFailure, InvalidParameter
from .families import (
    FamilyExtremum,
    FamilySpec,
    bernoulli_random,
    certified_norm,
    make_family,
    p2k_poly,
)
from .polycore import HomogeneousPoly, coeff_lp_norm, lp_norm_from_multiset, poly_pow
from .precision import log_abs, to_mpf
from .supnorm import OptimizerConfig, pab_branch_boundary, qab_critical_value, sup_norm_multistart, sup_norm_pab_closed, sup_norm_qab

KIND_POLY_REAL = "poly-real"
KIND_POLY_COMPLEX = "poly-complex"
KIND_MULTILINEAR = "multilinear"


@dataclass(frozen=True)
class BoundRecord:
    """One lower-bound datum for the degree-m constant."""

    kind: str
    m: int
    value: mpf
    mth_root: mpf
    family: FamilySpec | None
    power: int
    method: str


@dataclass(frozen=True)
class HyperEstimate:
    """Aggregated growth-rate evidence from a batch of bound records.

    h_a_lower bounds the absolute growth constant (inf over admissible
    bases).  h_inf_lower_evidence is only the best m-th root seen among
    large degrees: finite data cannot certify a limsup, so it is labeled
    evidence, never a value.
    """

    h_a_lower: mpf
    h_inf_lower_evidence: mpf | None
    source_records: tuple[BoundRecord, ...]


def _quotient_record(p: HomogeneousPoly, denom_log: mpf, family, power, method) -> BoundRecord:
    if not p.terms:
        raise InvalidParameter("zero polynomial has no lower-bound quotient")
    lp = coeff_lp_norm(p, Fraction(2 * p.m, p.m + 1))
    log_value = lp.log_value - denom_log
    return BoundRecord(
        kind=KIND_POLY_REAL,
        m=p.m,
        value=mpmath.exp(log_value),
        mth_root=mpmath.exp(log_value / p.m),
        family=family,
        power=power,
        method=method,
    )


def bh_lower_bound(p: HomogeneousPoly, norm) -> BoundRecord:
    """Coefficient-norm quotient for one polynomial with a known sup norm."""
    if not norm.value > 0:
        raise InvalidParameter("norm must be positive")
    return _quotient_record(p, mpmath.log(norm.value), None, 1, f"quotient/{norm.method}")


def quotient_bound(expanded: HomogeneousPoly, base_norm, spec: FamilySpec | None,
                   power: int) -> BoundRecord:
    """Record for an already-expanded family power with its base norm.

    sup |P^n| = (sup |P|)^n, so the denominator is the base norm to the
    power, taken in the log domain.
    """
    if power < 1:
        raise InvalidParameter(f"power must be >= 1, got {power}")
    if not base_norm.value > 0:
        raise InvalidParameter("norm must be positive")
    return _quotient_record(
        expanded, power * mpmath.log(base_norm.value), spec, power, f"quotient/{base_norm.method}"
    )


def power_bound(spec: FamilySpec, power: int) -> BoundRecord:
    """Bound for degree m*power from the power of a certified family member."""
    if power < 1:
        raise InvalidParameter(f"power must be >= 1, got {power}")
    base = make_family(spec)
    expanded = poly_pow(base, power) if power > 1 else base
    return quotient_bound(expanded, certified_norm(spec), spec, power)


# ---------------------------------------------------------------------------
# closed-form families of bounds
# ---------------------------------------------------------------------------

def quartic_family_norm() -> mpf:
    """Norm of x^3 y - x y^3 on the square: 2*sqrt(3)/9."""
    return 2 * mpmath.sqrt(3) / 9


def estimate_4n(n: int) -> tuple[BoundRecord, mpf]:
    """Degree-4n bound from the binomial coefficient vector of the quartic
    family's n-th power, plus its central-binomial relaxation.

    Returns (sharp record, relaxed value); sharp >= relaxed always, since
    the l_{8n/(4n+1)} norm dominates the euclidean norm.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    multiset = sorted(Counter(math.comb(n, k) for k in range(n + 1)).items())
    lp = lp_norm_from_multiset(multiset, Fraction(8 * n, 4 * n + 1))
    denom_log = n * mpmath.log(quartic_family_norm())
    log_value = lp.log_value - denom_log
    record = BoundRecord(
        kind=KIND_POLY_REAL,
        m=4 * n,
        value=mpmath.exp(log_value),
        mth_root=mpmath.exp(log_value / (4 * n)),
        family=FamilySpec("p4"),
        power=n,
        method="binomial-closed-form",
    )
    relaxed = mpmath.exp(mpmath.log(mpf(math.comb(2 * n, n))) / 2 - denom_log)
    if not record.value >= relaxed:
        raise ConvergenceFailure("binomial sharp bound fell below its relaxation")
    return record, relaxed


def stirling_growth_base() -> mpf:
    """The proved geometric floor for degree-4n bounds: 27^(1/8) ~ 1.5098."""
    return mpf(27) ** (mpf(1) / 8)


def stirling_lower(m: int) -> mpf:
    """Asymptotic closed form (4/(m*pi))^(1/4) * (27^(1/8))^m for m = 4n."""
    if m % 4 != 0 or m <= 0:
        raise InvalidParameter(f"m must be a positive multiple of 4, got {m}")
    return (4 / (m * mpmath.pi)) ** (mpf(1) / 4) * stirling_growth_base() ** m


# ---------------------------------------------------------------------------
# extremal-parameter searches
# ---------------------------------------------------------------------------

def _golden_max(f, lo: mpf, hi: mpf, tol: mpf) -> mpf:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    phi = (mpmath.sqrt(5) - 1) / 2
    c = hi - phi * (hi - lo)
    d = lo + phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2


def m2_quotient(t: mpf) -> mpf:
    """l_{4/3} coefficient norm of the extreme quadratic with parameter t
    (its sup norm is 1, so this is the full degree-2 quotient)."""
    t = to_mpf(t)
    third4 = mpf(4) / 3
    return (2 * t**third4 + (2 * mpmath.sqrt(t * (1 - t))) ** third4) ** (mpf(3) / 4)


def search_m2(tol: float = 1e-12) -> FamilyExtremum:
    """Maximize the degree-2 quotient over the extreme-point parameter."""
    tstar = _golden_max(m2_quotient, mpf("0.5"), mpf(1), mpf(tol))
    return FamilyExtremum(
        family=FamilySpec("extreme2", {"t": float(tstar)}),
        parameter=tstar,
        bound=m2_quotient(tstar),
    )


def find_b1() -> mpf:
    """Branch boundary of the symmetric cubic norm formula, in closed form."""
    return pab_branch_boundary()


def find_b1_numeric(tol: float = 1e-12) -> mpf:
    """The same boundary from the branch equation, by bisection.

    At the boundary the interior-critical expression of the edge restriction
    equals the corner value |2 + 2*lambda|.
    """
    def gap(lam: mpf) -> mpf:
        first = 1 - lam**2 / 3 + 2 * lam**3 / 27 + (mpf(2) / 27) * (lam**2 - 3 * lam) ** mpf("1.5")
        return abs(first) - abs(2 + 2 * lam)

    return _bisect(gap, mpf("-1.8"), mpf("-1.5"), mpf(tol))


def m3_quotient(lam) -> mpf:
    """Degree-3 quotient of the symmetric cubic family at ratio lambda."""
    lam = to_mpf(lam)
    num = (2 + 2 * abs(lam) ** mpf("1.5")) ** (mpf(2) / 3)
    return num / sup_norm_pab_closed(1, lam).value


def search_m3(grid: int = 601) -> FamilyExtremum:
    """Degree-3 extremum: the quotient peaks at the branch boundary.

    A coarse parameter sweep confirms no grid point beats the boundary value.
    """
    b1 = find_b1()
    bound = m3_quotient(b1)
    lo, hi = mpf(-3), mpf(0)
    for i in range(grid):
        lam = lo + (hi - lo) * i / (grid - 1)
        if m3_quotient(lam) > bound + mpf("1e-9"):
            raise ConvergenceFailure(f"quotient at lambda={lam} beats the boundary value")
    return FamilyExtremum(family=FamilySpec("pab", {"a": 1, "b": float(b1)}), parameter=b1, bound=bound)


def _bisect(f, lo: mpf, hi: mpf, tol: mpf, widen: mpf = mpf("0.2")) -> mpf:
    flo, fhi = f(lo), f(hi)
    if (flo > 0) == (fhi > 0):
        lo, hi = lo - widen, hi + widen
        flo, fhi = f(lo), f(hi)
        if (flo > 0) == (fhi > 0):
            raise ConvergenceFailure(f"no sign change in [{lo}, {hi}] even after widening")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return (lo + hi) / 2


def find_lambda01(tol: float = 1e-12) -> tuple[mpf, mpf]:
    """Both roots of |inner critical value| = |boundary value| for the sextic
    edge polynomial x^5 + lambda*x^3 + x on [0, 1]."""
    def gap(lam: mpf) -> mpf:
        inner = qab_critical_value(lam)
        if inner is None:
            return -abs(2 + lam)
        return inner - abs(2 + lam)

    lam0 = _bisect(gap, mpf("-2.4"), mpf("-2.1"), mpf(tol))
    lam1 = _bisect(gap, mpf("-1.8"), mpf("-1.55"), mpf(tol))
    return lam0, lam1


def m6_quotient(lam, cross_check: bool = False) -> mpf:
    """Degree-6 quotient of the symmetric sextic family at ratio lambda."""
    lam = to_mpf(lam)
    num = (2 + abs(lam) ** (mpf(12) / 7)) ** (mpf(7) / 12)
    return num / sup_norm_qab(1, lam, cross_check=cross_check).value


def search_m6(grid: int = 601, tol: float = 1e-12) -> FamilyExtremum:
    """Degree-6 extremum: the quotient peaks at the lower tie-point root."""
    lam0, _ = find_lambda01(tol)
    bound = (2 + abs(lam0) ** (mpf(12) / 7)) ** (mpf(7) / 12) / abs(2 + lam0)
    lo, hi = mpf(-4), mpf(0)
    for i in range(grid):
        lam = lo + (hi - lo) * i / (grid - 1)
        if m6_quotient(lam) > bound + mpf("1e-9"):
            raise ConvergenceFailure(f"quotient at lambda={lam} beats the tie-point value")
    return FamilyExtremum(
        family=FamilySpec("qab", {"a": 1, "b": float(lam0)}), parameter=lam0, bound=bound
    )


# ---------------------------------------------------------------------------
# recursive family, contractivity, complex bounds, aggregation
# ---------------------------------------------------------------------------

def p2k_bounds(k: int) -> BoundRecord:
    """Bound from the difference-of-squares family on 2^k variables.

    The norm is exactly 1, so the bound is the plain l_{2m/(m+1)} norm of
    the exact integer expansion.
    """
    if not 1 <= k <= 5:
        raise InvalidParameter(f"k must be in [1, 5], got {k}")
    p = p2k_poly(k)
    lp = coeff_lp_norm(p, Fraction(2 * p.m, p.m + 1))
    return BoundRecord(
        kind=KIND_POLY_REAL,
        m=p.m,
        value=lp.value,
        mth_root=mpmath.exp(lp.log_value / p.m),
        family=FamilySpec("p2k", {"k": k}),
        power=1,
        method="quotient/analytic",
    )


def contractivity_dm(n: int, m: int) -> mpf:
    """binom(m+n-1, n-1)^(1/(2m)): the fixed-dimension complex constant."""
    if n < 1 or m < 1:
        raise InvalidParameter(f"need n, m >= 1, got n={n}, m={m}")
    return mpmath.exp(log_abs(math.comb(m + n - 1, n - 1)) / (2 * m))


def complex_lower_bound(m: int) -> mpf:
    """(2 + 2^m)^((m+1)/(2m)) / sqrt(4 + 2^(m+1)), the complex-scalars floor.

    Strictly exceeds 1 for every m >= 2.  Since 4 + 2^(m+1) = 2*(2 + 2^m),
    the log of the quotient collapses to log1p(2^(1-m)) / (2m); the value is
    formed at whatever local precision keeps that excess representable, so
    the strict inequality survives arbitrarily large m.
    """
    if m < 2:
        raise InvalidParameter(f"m must be >= 2, got {m}")
    needed = max(mpmath.mp.dps, int(0.302 * m) + 20)
    with mpmath.workdps(needed):
        log_excess = mpmath.log1p(mpf(2) ** (1 - m)) / (2 * m)
        return mpmath.exp(log_excess)


def hyper_aggregate(records, tail_min_degree: int = 16) -> HyperEstimate:
    """Best m-th roots over a batch of real polynomial bounds.

    The overall max lower-bounds the absolute growth constant.  The max over
    degrees >= tail_min_degree is reported as limsup evidence only.
    """
    records = tuple(records)
    if not records:
        raise InvalidParameter("no records to aggregate")
    if any(r.kind != KIND_POLY_REAL for r in records):
        raise InvalidParameter("aggregation is defined for real polynomial records only")
    h_a = max(r.mth_root for r in records)
    tail = [r.mth_root for r in records if r.m >= tail_min_degree]
    return HyperEstimate(
        h_a_lower=h_a,
        h_inf_lower_evidence=max(tail) if tail else None,
        source_records=records,
    )


# ---------------------------------------------------------------------------
# random-coefficient growth experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KszReport:
    """Slope fit of log(coefficient-to-sup ratio) against log(dimension)."""

    m: int
    r: Fraction
    n_list: tuple[int, ...]
    trials: int
    seed: int
    theoretical_slope: float
    fitted_slope: float
    mean_log_ratios: dict[int, float] = field(repr=False, default_factory=dict)


def ksz_experiment(m: int, r, n_list, trials: int, seed: int,
                   cfg: OptimizerConfig | None = None) -> KszReport:
    """Growth-rate experiment for random +-1 polynomials.

    For each dimension n, draws seeded random full-support polynomials,
    forms l_r(coeffs) / heuristic sup, and fits the log-log slope across
    dimensions.  The expected exponent is m/r - (m+1)/2, vanishing exactly
    at r = 2m/(m+1).
    """
    rf = r if isinstance(r, Fraction) else Fraction(r)
    if m < 1 or trials < 1 or not n_list:
        raise InvalidParameter("need m >= 1, trials >= 1 and a nonempty n list")
    if not 1 <= rf <= Fraction(2 * m, m + 1):
        raise InvalidParameter(f"r must lie in [1, 2m/(m+1)], got {r}")
    for n in n_list:
        if math.comb(m + n - 1, n - 1) > 10**5:
            raise InvalidParameter(f"support too large at n={n}")
    mean_logs: dict[int, float] = {}
    for n in n_list:
        logs = []
        for t in range(trials):
            child = seed * 1_000_003 + n * 1_009 + t
            poly = bernoulli_random(n, m, child)
            sup = sup_norm_multistart(
                poly, cfg or OptimizerConfig(restarts=1, seed=child + 17)
            )
            lp = coeff_lp_norm(poly, rf)
            logs.append(float(lp.log_value - mpmath.log(sup.value)))
        mean_logs[n] = float(np.mean(logs))
    xs = np.log(np.array(sorted(mean_logs), dtype=float))
    ys = np.array([mean_logs[n] for n in sorted(mean_logs)])
    fitted = float(np.polyfit(xs, ys, 1)[0])
    theoretical = float(Fraction(m, 1) / rf - Fraction(m + 1, 2))
    return KszReport(
        m=m,
        r=rf,
        n_list=tuple(n_list),
        trials=trials,
        seed=seed,
        theoretical_slope=theoretical,
        fitted_slope=fitted,
        mean_log_ratios=mean_logs,
    )

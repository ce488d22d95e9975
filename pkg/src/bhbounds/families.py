"""Constructors for the named extremal families and random test polynomials.

Every family that feeds a table has a certified norm: the symmetric cubic
and sextic two-variable families through their closed forms, the quartic
and quintic through the univariate edge reduction, and the recursive
difference-of-squares family analytically.  Construction is exact wherever
the defining parameters are rational.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import InvalidParameter
from .multilinear import MultilinearForm
from .polycore import HomogeneousPoly, poly_new, poly_square
from .precision import Coefficient, to_mpf
from .supnorm import (
    SupNormResult,
    pab_branch_boundary,
    sup_norm_bivariate,
    sup_norm_p2k_analytic,
    sup_norm_pab_closed,
    sup_norm_qab,
)

# Defining parameters of the antisymmetric quintic family (12-digit decimals,
# kept rational so that powers are exact and reproducible).
P5_A = Fraction("0.194627836350")
P5_B = Fraction("0.660089997037")
P5_C = Fraction("0.978333058512")

# Canonical member of the sextic family used by the degree-6n tables:
# the 4-digit truncation of the branch-tie ratio, kept rational so that
# powers are exact.  The full-precision tie point is available from the
# bounds module's root-finder and differs by less than 5e-5.
P6_LAMBDA = Fraction("-2.2654")

FAMILY_IDS = ("pab", "qab", "p3", "p4", "p5", "p6", "p2k", "bernoulli", "extreme2", "t2", "tm")

_REQUIRED_PARAMS: dict[str, tuple[str, ...]] = {
    "pab": ("a", "b"),
    "qab": ("a", "b"),
    "p3": (),
    "p4": (),
    "p5": (),
    "p6": (),
    "p2k": ("k",),
    "bernoulli": ("n", "m", "seed"),
    "extreme2": ("t",),
    "t2": (),
    "tm": ("m",),
}

_OPTIONAL_PARAMS: dict[str, tuple[str, ...]] = {"extreme2": ("sign",)}


@dataclass(frozen=True)
class FamilySpec:
    """A family identifier plus its parameter map."""

    id: str
    params: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in FAMILY_IDS:
            raise InvalidParameter(f"unknown family {self.id!r}; known: {', '.join(FAMILY_IDS)}")
        required = _REQUIRED_PARAMS[self.id]
        allowed = set(required) | set(_OPTIONAL_PARAMS.get(self.id, ()))
        missing = [k for k in required if k not in self.params]
        extra = [k for k in self.params if k not in allowed]
        if missing:
            raise InvalidParameter(f"family {self.id!r} missing params: {', '.join(missing)}")
        if extra:
            raise InvalidParameter(f"family {self.id!r} got unknown params: {', '.join(extra)}")

    def label(self) -> str:
        if not self.params:
            return self.id
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.id}({inner})"


@dataclass(frozen=True)
class FamilyExtremum:
    """Result of an extremal-parameter search: the argmax and its quotient."""

    family: FamilySpec
    parameter: mpf
    bound: mpf


def _pab(a, b) -> HomogeneousPoly:
    return poly_new(2, 3, [((3, 0), a), ((2, 1), b), ((1, 2), b), ((0, 3), a)])


def _qab(a, b) -> HomogeneousPoly:
    return poly_new(2, 6, [((5, 1), a), ((3, 3), b), ((1, 5), a)])


def p5_poly() -> HomogeneousPoly:
    return poly_new(
        2, 5,
        [((5, 0), P5_A), ((4, 1), -P5_B), ((3, 2), -P5_C),
         ((2, 3), P5_C), ((1, 4), P5_B), ((0, 5), -P5_A)],
    )


_P2K_CACHE: dict[int, HomogeneousPoly] = {}


def p2k_poly(k: int) -> HomogeneousPoly:
    """Recursive difference of squares on 2^k variables, degree 2^k.

    Both halves are the same polynomial on renamed variables, so one
    squaring per level suffices; the two blocks share no monomials.
    """
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if k in _P2K_CACHE:
        return _P2K_CACHE[k]
    if k == 1:
        poly = poly_new(2, 2, [((2, 0), 1), ((0, 2), -1)])
    else:
        half = p2k_poly(k - 1)
        sq = poly_square(half)
        pad = (0,) * half.n
        terms: dict[tuple[int, ...], Coefficient] = {}
        for e, c in sq.terms.items():
            terms[e + pad] = c
            terms[pad + e] = -c
        poly = HomogeneousPoly(2 * half.n, 2 * half.m, terms)
    if k <= 4:
        _P2K_CACHE[k] = poly
    return poly


def extreme_quadratic_poly(t, sign: int = 1) -> HomogeneousPoly:
    """Extreme points of the unit ball of 2-homogeneous forms on the square:
    t*x^2 - t*y^2 +- 2*sqrt(t*(1-t))*x*y, for t in [1/2, 1]; sup norm 1."""
    tm = to_mpf(t)
    if not (mpf("0.5") <= tm <= 1):
        raise InvalidParameter(f"t must lie in [1/2, 1], got {t}")
    if sign not in (1, -1):
        raise InvalidParameter("sign must be +1 or -1")
    cross = 2 * mpmath.sqrt(tm * (1 - tm))
    return poly_new(2, 2, [((2, 0), tm), ((0, 2), -tm), ((1, 1), sign * cross)])


def make_family(spec: FamilySpec) -> HomogeneousPoly:
    """Construct the polynomial a family spec names (exactly where possible)."""
    p = spec.params
    if spec.id == "pab":
        return _pab(p["a"], p["b"])
    if spec.id == "qab":
        return _qab(p["a"], p["b"])
    if spec.id == "p3":
        return _pab(1, pab_branch_boundary())
    if spec.id == "p4":
        return poly_new(2, 4, [((3, 1), 1), ((1, 3), -1)])
    if spec.id == "p5":
        return p5_poly()
    if spec.id == "p6":
        return _qab(1, P6_LAMBDA)
    if spec.id == "p2k":
        return p2k_poly(int(p["k"]))
    if spec.id == "bernoulli":
        return bernoulli_random(int(p["n"]), int(p["m"]), p["seed"])
    if spec.id == "extreme2":
        return extreme_quadratic_poly(p["t"], int(p.get("sign", 1)))
    raise InvalidParameter(f"family {spec.id!r} is multilinear; use tm_form")


def certified_norm(spec: FamilySpec) -> SupNormResult:
    """Sup norm of the family member by its dedicated certified route."""
    p = spec.params
    if spec.id == "pab":
        return sup_norm_pab_closed(p["a"], p["b"])
    if spec.id == "p3":
        return sup_norm_pab_closed(1, pab_branch_boundary())
    if spec.id == "qab":
        return sup_norm_qab(p["a"], p["b"])
    if spec.id == "p6":
        return sup_norm_qab(1, P6_LAMBDA)
    if spec.id in ("p4", "p5", "extreme2"):
        return sup_norm_bivariate(make_family(spec))
    if spec.id == "p2k":
        return sup_norm_p2k_analytic(int(p["k"]))
    raise InvalidParameter(f"family {spec.id!r} has no certified norm")


def _degree_indices(n: int, m: int):
    """All exponent tuples of total degree m over n variables, lexicographic."""
    if n == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _degree_indices(n - 1, m - first):
            yield (first,) + rest


def bernoulli_random(n: int, m: int, seed) -> HomogeneousPoly:
    """Full-support polynomial with independent +-1 coefficients.

    The multi-indices are enumerated lexicographically and the generator is
    seeded, so a seed fully determines the polynomial.
    """
    support = math.comb(m + n - 1, n - 1)
    if support > 10**6:
        raise InvalidParameter(f"support {support} exceeds the 1e6 term budget")
    rng = random.Random(seed)
    terms = [(alpha, rng.choice((-1, 1))) for alpha in _degree_indices(n, m)]
    return poly_new(n, m, terms)


def tm_form(m: int) -> MultilinearForm:
    """Doubling family of +-1 multilinear forms on 2^(m-1) coordinates per slot.

    T_1(x) = x_0, and T_m couples two copies of T_(m-1) through the sum and
    difference of the last slot's first two coordinates.  This pins the three
    facts the lower-bound pipeline uses: all 4^(m-1) coefficients are +-1 and
    the cube norm is exactly 2^(m-1).
    """
    if not 2 <= m <= 6:
        raise InvalidParameter(f"arity must be in [2, 6], got {m}")
    coeffs: dict[tuple[int, ...], int] = {(0,): 1}
    for arity in range(2, m + 1):
        shift = 2 ** (arity - 2)
        nxt: dict[tuple[int, ...], int] = {}
        for idx, c in coeffs.items():
            low = idx + (0,)
            high = idx + (1,)
            nxt[low] = nxt.get(low, 0) + c
            nxt[high] = nxt.get(high, 0) + c
            shifted = tuple(i + shift for i in idx)
            low_s = shifted + (0,)
            high_s = shifted + (1,)
            nxt[low_s] = nxt.get(low_s, 0) + c
            nxt[high_s] = nxt.get(high_s, 0) - c
        coeffs = nxt
    return MultilinearForm(m, 2 ** (m - 1), coeffs)

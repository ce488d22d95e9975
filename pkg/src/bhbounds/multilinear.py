"""Multilinear forms on products of l_inf^n and their exact cube norms.

A real m-linear form is affine in each slot, so its supremum over the
product of unit cubes is attained at sign vectors; enumerating the signs of
slots 2..m and contracting leaves the first slot's optimum in closed form
(the l_1 norm of the contracted vector).  Above the enumeration cap an
alternating per-slot sign ascent is available as a restarted heuristic.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mpf

from .errors import DimensionMismatch, InvalidParameter
from .polycore import HomogeneousPoly, LpNormValue, lp_norm_from_multiset
from .precision import Coefficient, to_mpf
from .supnorm import SupNormResult, sup_norm_bivariate, sup_norm_multistart

BRUTE_FORCE_CAP = 24  # exact vertex enumeration allowed while m*n <= this

METHOD_VERTEX = "vertex-enumeration"
METHOD_SIGN_ASCENT = "sign-ascent"


@dataclass(frozen=True)
class MultilinearForm:
    """Sparse m-linear form; coeffs maps (i_1, ..., i_m) with 0 <= i_k < n."""

    m: int
    n: int
    coeffs: dict[tuple[int, ...], Coefficient]


def ml_new(m: int, n: int, entries) -> MultilinearForm:
    if m < 1 or n < 1:
        raise InvalidParameter(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    acc: dict[tuple[int, ...], Coefficient] = {}
    for idx, c in entries:
        idx = tuple(int(i) for i in idx)
        if len(idx) != m:
            raise DimensionMismatch(f"index {idx} has arity {len(idx)}, expected {m}")
        if any(not 0 <= i < n for i in idx):
            raise InvalidParameter(f"index {idx} out of range for n={n}")
        acc[idx] = acc.get(idx, 0) + c
    return MultilinearForm(m, n, {k: v for k, v in acc.items() if v != 0})


def ml_eval(t: MultilinearForm, slots) -> Coefficient:
    """Evaluate T(x^1, ..., x^m); exact for exact coefficients and points."""
    if len(slots) != t.m:
        raise DimensionMismatch(f"got {len(slots)} slot vectors, expected {t.m}")
    for x in slots:
        if len(x) != t.n:
            raise DimensionMismatch("slot vector has wrong length")
    total = 0
    for idx, c in sorted(t.coeffs.items()):
        prod = c
        for k, i in enumerate(idx):
            prod = prod * slots[k][i]
        total = total + prod
    return total


def _dense_tensor(t: MultilinearForm) -> np.ndarray:
    arr = np.zeros((t.n,) * t.m, dtype=np.float64)
    for idx, c in t.coeffs.items():
        arr[idx] += float(c)
    return arr


def _enumerate_best(arr: np.ndarray, n: int) -> tuple[float, list[tuple[int, ...]]]:
    """Exact max over sign vertices: enumerate slots 2..m, close slot 1."""
    if arr.ndim == 1:
        return float(np.abs(arr).sum()), [tuple(1 if v >= 0 else -1 for v in arr)]
    best_val, best_signs = -1.0, None
    for signs in itertools.product((1.0, -1.0), repeat=n):
        sub = arr @ np.asarray(signs)
        val, tail = _enumerate_best(sub, n)
        if val > best_val:
            best_val = val
            best_signs = tail + [tuple(int(s) for s in signs)]
    return best_val, best_signs


def _sign_ascent(arr: np.ndarray, m: int, n: int, restarts: int = 32, seed: int = 0):
    """Alternating per-slot optimization; each step is exact given the rest."""
    rng = random.Random(seed)

    def contract_except(k: int, signs) -> np.ndarray:
        # contracting axes from the highest down keeps lower axis labels valid
        out = arr
        for j in range(m - 1, -1, -1):
            if j != k:
                out = np.tensordot(out, signs[j], axes=(j, 0))
        return out

    best_val, best_signs = -1.0, None
    for _ in range(restarts):
        signs = [np.array([rng.choice((-1.0, 1.0)) for _ in range(n)]) for _ in range(m)]
        for _round in range(200):
            changed = False
            for k in range(m):
                contracted = contract_except(k, signs)
                current = float(contracted @ signs[k])
                target = float(np.abs(contracted).sum())
                if target > abs(current) + 1e-12:
                    signs[k] = np.where(contracted >= 0, 1.0, -1.0)
                    changed = True
            if not changed:
                break
        final = contract_except(m - 1, signs) @ signs[m - 1]
        value = abs(float(final))
        if value > best_val:
            best_val = value
            best_signs = [tuple(int(s) for s in vec) for vec in signs]
    return best_val, best_signs


def ml_sup_norm_bruteforce(t: MultilinearForm, iterative: bool = False) -> SupNormResult:
    """Exact sup norm over the product of unit cubes (vertex enumeration).

    Multilinearity puts the maximum at sign vertices.  Beyond the size cap
    the exact sweep is refused unless ``iterative`` selects the restarted
    per-slot sign ascent, which is a heuristic lower bound.

    The maximizer is the concatenation of the m slot sign vectors.
    """
    if not t.coeffs:
        return SupNormResult(mpf(0), (0.0,) * (t.m * t.n), METHOD_VERTEX, mpf(0))
    exact_ok = t.m * t.n <= BRUTE_FORCE_CAP
    if not exact_ok and not iterative:
        raise InvalidParameter(
            f"m*n = {t.m * t.n} exceeds enumeration cap {BRUTE_FORCE_CAP}; pass iterative=True"
        )
    arr = _dense_tensor(t)
    if exact_ok:
        value, sign_list = _enumerate_best(arr, t.n)
        method = METHOD_VERTEX
    else:
        value, sign_list = _sign_ascent(arr, t.m, t.n)
        method = METHOD_SIGN_ASCENT
    # sign_list is slot-1-first; evaluate exactly at the vertex for the certificate
    slots = [list(map(int, s)) for s in sign_list]
    exact_val = ml_eval(t, slots)
    certified = abs(to_mpf(exact_val)) if not isinstance(exact_val, complex) else abs(exact_val)
    maximizer = tuple(float(v) for s in slots for v in s)
    return SupNormResult(
        value=max(mpf(value), certified),
        maximizer=maximizer,
        method=method,
        certified_lower=certified,
    )


def ml_coeff_lq_norm(t: MultilinearForm, q) -> LpNormValue:
    """l_q norm over the full coefficient tensor."""
    counts = Counter(abs(c) for c in t.coeffs.values())
    return lp_norm_from_multiset(sorted(counts.items(), key=lambda kv: to_mpf(kv[0])), q)


def _multinomial(m: int, alpha) -> int:
    out = math.factorial(m)
    for e in alpha:
        out //= math.factorial(e)
    return out


def polar_form(p: HomogeneousPoly, max_m: int = 6, max_n: int = 4) -> MultilinearForm:
    """The symmetric m-linear form T with T(x, ..., x) = P(x).

    Each exponent pattern alpha spreads its coefficient evenly over all
    distinct orderings: T at any such index is a_alpha / multinomial(m, alpha).
    """
    if p.m > max_m or p.n > max_n:
        raise InvalidParameter(f"polar form capped at m <= {max_m}, n <= {max_n}")
    if p.m < 1:
        raise InvalidParameter("degree must be >= 1")
    coeffs: dict[tuple[int, ...], Coefficient] = {}
    for alpha, c in p.sorted_terms():
        base = []
        for var, e in enumerate(alpha):
            base.extend([var] * e)
        weight = _multinomial(p.m, alpha)
        value = Fraction(c, weight) if isinstance(c, int) else c / weight
        if isinstance(value, Fraction) and value.denominator == 1:
            value = int(value)
        for perm in set(itertools.permutations(base)):
            coeffs[perm] = value
    return MultilinearForm(p.m, p.n, coeffs)


def polarization_norm_check(p: HomogeneousPoly) -> tuple[mpf, mpf]:
    """(norm of the polar form, (m^m / m!) * norm of P); callers assert <=."""
    t = polar_form(p)
    norm_t = ml_sup_norm_bruteforce(t, iterative=t.m * t.n > BRUTE_FORCE_CAP).value
    if p.n == 1:
        norm_p = max(abs(to_mpf(c)) for c in p.terms.values()) if p.terms else mpf(0)
    elif p.n == 2:
        norm_p = sup_norm_bivariate(p).value
    else:
        norm_p = sup_norm_multistart(p).value
    factor = to_mpf(Fraction(p.m**p.m, math.factorial(p.m)))
    return norm_t, factor * norm_p


def cm_lower_bound(m: int, q) -> mpf:
    """(4^(m-1))^(1/q) / 2^(m-1): the doubling family's norm-to-l_q quotient.

    At q = 2m/(m+1) this is exactly 2^(1 - 1/m).
    """
    if m < 2:
        raise InvalidParameter(f"arity must be >= 2, got {m}")
    qf = q if isinstance(q, Fraction) else Fraction(q)
    if qf < 1:
        raise InvalidParameter(f"q must be >= 1, got {q}")
    exponent = Fraction(2 * (m - 1), 1) / qf - (m - 1)
    return mpf(2) ** to_mpf(exponent)

"""Sparse homogeneous polynomials with exact or high-precision coefficients.

A polynomial in n variables of degree m is a map from exponent tuples
(length n, entries summing to m) to nonzero coefficients.  Coefficients are
``int``, ``fractions.Fraction`` (both exact) or ``mpmath.mpf``.  Exact inputs
stay exact through products and powers; any mpf makes the result mpf at the
current working precision.

Bivariate polynomials get a dense fast path for products: a degree-m
homogeneous polynomial in (x, y) is the coefficient vector of x^i y^(m-i)
indexed by i, and multiplication is plain convolution.  Exact bivariate
convolution is done over scaled integers, which keeps powers such as the
80th power of the degree-5 family (coefficient denominators 10^960) cheap.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import DimensionMismatch, InvalidParameter, NotHomogeneous, ParseError
from .precision import Coefficient, is_exact, log_abs, to_mpf, exact_decimal, parse_decimal

MultiIndex = tuple[int, ...]


def _normalize_coeff(c: Coefficient) -> Coefficient:
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


@dataclass(frozen=True)
class HomogeneousPoly:
    """Immutable n-variable degree-m homogeneous polynomial."""

    n: int
    m: int
    terms: dict[MultiIndex, Coefficient] = field(default_factory=dict)

    def sorted_terms(self) -> list[tuple[MultiIndex, Coefficient]]:
        """Terms in canonical (lexicographic) order, for deterministic reductions."""
        return sorted(self.terms.items())

    def coeff_kind(self) -> str:
        """'int', 'rat' or 'dec' — the widest kind present among coefficients."""
        kind = "int"
        for c in self.terms.values():
            if isinstance(c, mpf):
                return "dec"
            if isinstance(c, Fraction):
                kind = "rat"
        return kind

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.sorted_terms():
            mono = "*".join(f"x{i}^{e}" for i, e in enumerate(alpha) if e)
            parts.append(f"({c})*{mono}" if mono else f"({c})")
        return " + ".join(parts)


@dataclass(frozen=True)
class LpNormValue:
    """An l_p coefficient norm held in the log domain."""

    log_value: mpf
    value: mpf


def poly_new(n: int, m: int, terms) -> HomogeneousPoly:
    """Build a polynomial from (multi-index, coefficient) pairs.

    Duplicate indices are summed; zero coefficients are dropped.  Raises
    NotHomogeneous if some index total differs from m, DimensionMismatch if
    an index has the wrong length.
    """
    if n < 1 or m < 0:
        raise InvalidParameter(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    acc: dict[MultiIndex, Coefficient] = {}
    for alpha, c in terms:
        alpha = tuple(int(e) for e in alpha)
        if len(alpha) != n:
            raise DimensionMismatch(f"index {alpha} has length {len(alpha)}, expected {n}")
        if any(e < 0 for e in alpha):
            raise InvalidParameter(f"negative exponent in {alpha}")
        if sum(alpha) != m:
            raise NotHomogeneous(f"index {alpha} has total degree {sum(alpha)}, expected {m}")
        if alpha in acc:
            acc[alpha] = acc[alpha] + c
        else:
            acc[alpha] = c
    cleaned = {a: _normalize_coeff(c) for a, c in acc.items() if c != 0}
    return HomogeneousPoly(n, m, cleaned)


def dense_vector(p: HomogeneousPoly) -> list[Coefficient]:
    """Bivariate coefficient vector: entry i is the coefficient of x^i y^(m-i)."""
    if p.n != 2:
        raise DimensionMismatch("dense vector view requires exactly 2 variables")
    vec: list[Coefficient] = [0] * (p.m + 1)
    for (i, _), c in p.terms.items():
        vec[i] = c
    return vec


def from_dense(m: int, vec) -> HomogeneousPoly:
    """Inverse of :func:`dense_vector`."""
    return poly_new(2, m, [((i, m - i), c) for i, c in enumerate(vec) if c != 0])


def _dense_mul_exact(u: list[Coefficient], v: list[Coefficient]) -> list[Coefficient]:
    """Exact convolution of Fraction/int vectors via scaled integers."""
    du = math.lcm(*(c.denominator for c in u if isinstance(c, Fraction)), 1)
    dv = math.lcm(*(c.denominator for c in v if isinstance(c, Fraction)), 1)
    iu = [int(c * du) if isinstance(c, Fraction) else c * du for c in u]
    iv = [int(c * dv) if isinstance(c, Fraction) else c * dv for c in v]
    out = [0] * (len(u) + len(v) - 1)
    for i, a in enumerate(iu):
        if a:
            for j, b in enumerate(iv):
                if b:
                    out[i + j] += a * b
    scale = du * dv
    if scale == 1:
        return list(out)
    return [_normalize_coeff(Fraction(c, scale)) for c in out]


def _dense_mul_mpf(u, v) -> list[Coefficient]:
    uu = [to_mpf(c) if c else None for c in u]
    vv = [to_mpf(c) if c else None for c in v]
    out = [mpf(0)] * (len(u) + len(v) - 1)
    for i, a in enumerate(uu):
        if a is not None:
            for j, b in enumerate(vv):
                if b is not None:
                    out[i + j] += a * b
    return out


def poly_mul(p: HomogeneousPoly, q: HomogeneousPoly) -> HomogeneousPoly:
    """Product polynomial, exact when both inputs are exact."""
    if p.n != q.n:
        raise DimensionMismatch(f"variable counts differ: {p.n} vs {q.n}")
    if not p.terms or not q.terms:
        return HomogeneousPoly(p.n, p.m + q.m, {})
    kinds = {type(c) for c in p.terms.values()} | {type(c) for c in q.terms.values()}
    if p.n == 2 and not any(issubclass(k, (complex, mpmath.mpc)) for k in kinds):
        u, v = dense_vector(p), dense_vector(q)
        exact = all(is_exact(c) for c in u) and all(is_exact(c) for c in v)
        w = _dense_mul_exact(u, v) if exact else _dense_mul_mpf(u, v)
        return from_dense(p.m + q.m, w)
    out: dict[MultiIndex, Coefficient] = {}
    for a1, c1 in p.terms.items():
        for a2, c2 in q.terms.items():
            key = tuple(x + y for x, y in zip(a1, a2))
            prod = c1 * c2
            if key in out:
                out[key] = out[key] + prod
            else:
                out[key] = prod
    cleaned = {a: _normalize_coeff(c) for a, c in out.items() if c != 0}
    return HomogeneousPoly(p.n, p.m + q.m, cleaned)


def poly_square(p: HomogeneousPoly) -> HomogeneousPoly:
    """Square of p; the sparse path does each unordered term pair once."""
    if p.n == 2:
        return poly_mul(p, p)
    items = list(p.terms.items())
    out: dict[MultiIndex, Coefficient] = {}
    for i, (a1, c1) in enumerate(items):
        key = tuple(2 * x for x in a1)
        sq = c1 * c1
        out[key] = out[key] + sq if key in out else sq
        for j in range(i + 1, len(items)):
            a2, c2 = items[j]
            key = tuple(x + y for x, y in zip(a1, a2))
            cross = 2 * c1 * c2
            out[key] = out[key] + cross if key in out else cross
    cleaned = {a: _normalize_coeff(c) for a, c in out.items() if c != 0}
    return HomogeneousPoly(p.n, 2 * p.m, cleaned)


def poly_pow(p: HomogeneousPoly, k: int) -> HomogeneousPoly:
    """k-th power by repeated squaring (k >= 1), exact for exact inputs."""
    if k < 1:
        raise InvalidParameter(f"power must be >= 1, got {k}")
    result = None
    base = p
    while True:
        if k & 1:
            result = base if result is None else poly_mul(result, base)
        k >>= 1
        if not k:
            return result
        base = poly_square(base)


def poly_add(p: HomogeneousPoly, q: HomogeneousPoly) -> HomogeneousPoly:
    """Sum of two polynomials of identical shape (same n and m)."""
    if p.n != q.n:
        raise DimensionMismatch(f"variable counts differ: {p.n} vs {q.n}")
    if p.m != q.m:
        raise NotHomogeneous(f"degrees differ: {p.m} vs {q.m}")
    out = dict(p.terms)
    for a, c in q.terms.items():
        out[a] = out[a] + c if a in out else c
    cleaned = {a: _normalize_coeff(c) for a, c in out.items() if c != 0}
    return HomogeneousPoly(p.n, p.m, cleaned)


def poly_scale(p: HomogeneousPoly, c: Coefficient) -> HomogeneousPoly:
    if c == 0:
        return HomogeneousPoly(p.n, p.m, {})
    return HomogeneousPoly(p.n, p.m, {a: _normalize_coeff(v * c) for a, v in p.terms.items()})


def coeff_abs_multiset(p: HomogeneousPoly) -> list[tuple[Coefficient, int]]:
    """Distinct |coefficient| values with multiplicities, in canonical order.

    Collapsing equal magnitudes keeps l_p norms cheap for expansions with
    hundreds of thousands of terms but few distinct values.
    """
    counts = Counter(abs(c) for c in p.terms.values())
    return sorted(counts.items(), key=lambda kv: to_mpf(kv[0]))


def lp_norm_from_multiset(multiset, p) -> LpNormValue:
    """l_p norm of a magnitude multiset, computed with log-sum-exp.

    p may be a Fraction (exponents like 2m/(m+1) are kept rational and
    converted once, at the current precision).
    """
    if isinstance(p, Fraction):
        if p < 1:
            raise InvalidParameter(f"p must be >= 1, got {p}")
        pm = to_mpf(p)
    else:
        pm = to_mpf(p)
        if pm < 1:
            raise InvalidParameter(f"p must be >= 1, got {p}")
    entries = [(v, k) for v, k in multiset if v != 0 and k > 0]
    if not entries:
        return LpNormValue(mpf("-inf"), mpf(0))
    logs = [mpmath.log(k) + pm * log_abs(v) for v, k in entries]
    top = max(logs)
    total = mpf(0)
    for lg in logs:
        total += mpmath.exp(lg - top)
    log_value = (top + mpmath.log(total)) / pm
    return LpNormValue(log_value, mpmath.exp(log_value))


def coeff_lp_norm(p: HomogeneousPoly, lp) -> LpNormValue:
    """(sum over terms of |coeff|^p)^(1/p), stable for huge coefficients."""
    return lp_norm_from_multiset(coeff_abs_multiset(p), lp)


def eval_real(p: HomogeneousPoly, x) -> Coefficient:
    """Evaluate at a real point: exact if everything is exact, else mpf."""
    if len(x) != p.n:
        raise DimensionMismatch(f"point has length {len(x)}, expected {p.n}")
    exact = all(is_exact(c) for c in p.terms.values()) and all(
        isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in x
    )
    if exact:
        total_e = Fraction(0)
        for alpha, c in p.sorted_terms():
            mono = Fraction(1)
            for v, e in zip(x, alpha):
                if e:
                    mono *= Fraction(v) ** e
            total_e += Fraction(c) * mono
        return _normalize_coeff(total_e)
    xs = [to_mpf(v) for v in x]
    total = mpf(0)
    for alpha, c in p.sorted_terms():
        mono = to_mpf(c)
        for v, e in zip(xs, alpha):
            if e:
                mono *= v**e
        total += mono
    return total


def eval_complex(p: HomogeneousPoly, z):
    """Evaluate at a complex point (mpc at the current precision)."""
    if len(z) != p.n:
        raise DimensionMismatch(f"point has length {len(z)}, expected {p.n}")
    zs = [mpmath.mpc(v) for v in z]
    total = mpmath.mpc(0)
    for alpha, c in p.sorted_terms():
        if isinstance(c, (complex, mpmath.mpc)):
            mono = mpmath.mpc(c)
        else:
            mono = mpmath.mpc(to_mpf(c))
        for v, e in zip(zs, alpha):
            if e:
                mono *= v**e
        total += mono
    return total


def lp_interpolation_bounds(v, p, q) -> tuple[mpf, mpf]:
    """Sandwich for |v|_p from |v|_q when 1 <= p <= q.

    Returns (|v|_q, d^(1/p - 1/q) * |v|_q); |v|_p always lies in between.
    """
    pf = Fraction(p) if not isinstance(p, Fraction) else p
    qf = Fraction(q) if not isinstance(q, Fraction) else q
    if pf < 1 or pf > qf:
        raise InvalidParameter(f"need 1 <= p <= q, got p={p}, q={q}")
    d = len(v)
    if d == 0:
        raise InvalidParameter("empty vector")
    norm_q = lp_norm_from_multiset(Counter(abs(c) for c in v if c != 0).items(), qf).value
    factor = to_mpf(d) ** (to_mpf(pf**-1) - to_mpf(qf**-1)) if pf != qf else mpf(1)
    return norm_q, factor * norm_q


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

_KINDS = ("int", "rat", "dec")


def serialize(p: HomogeneousPoly) -> str:
    """Render in the polynomial file format (one term per line)."""
    kind = p.coeff_kind()
    lines = [f"BHPOLY 1 n={p.n} m={p.m} terms={len(p.terms)} coeff={kind}"]
    for alpha, c in p.sorted_terms():
        if kind == "dec":
            lit = exact_decimal(to_mpf(c))
        elif isinstance(c, Fraction):
            lit = f"{c.numerator}/{c.denominator}"
        else:
            lit = str(c)
        lines.append(" ".join(str(e) for e in alpha) + " " + lit)
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> HomogeneousPoly:
    """Parse the polynomial file format; ParseError carries the bad line."""
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise ParseError("empty input", 1)
    header = lines[0].split()
    if len(header) != 6 or header[0] != "BHPOLY" or header[1] != "1":
        raise ParseError("expected 'BHPOLY 1 n=<n> m=<m> terms=<k> coeff=<kind>'", 1)
    try:
        fields = dict(part.split("=", 1) for part in header[2:])
        n = int(fields["n"])
        m = int(fields["m"])
        k = int(fields["terms"])
        kind = fields["coeff"]
    except (ValueError, KeyError) as exc:
        raise ParseError(f"bad header field: {exc}", 1) from None
    if kind not in _KINDS:
        raise ParseError(f"unknown coefficient kind {kind!r}", 1)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != k:
        raise ParseError(f"header declares {k} terms but file has {len(body)}", 1 + len(lines[1:]))
    terms = []
    for idx, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != n + 1:
            raise ParseError(f"expected {n} exponents and a coefficient", idx)
        try:
            alpha = tuple(int(e) for e in parts[:n])
        except ValueError:
            raise ParseError("non-integer exponent", idx) from None
        lit = parts[n]
        try:
            if kind == "int":
                coeff: Coefficient = int(lit)
            elif kind == "rat":
                coeff = _normalize_coeff(Fraction(lit))
            else:
                coeff = parse_decimal(lit)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad coefficient literal {lit!r}", idx) from None
        terms.append((alpha, coeff))
    return poly_new(n, m, terms)

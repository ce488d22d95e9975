"""Sup norms over the unit cube, via closed forms where available.

For a homogeneous polynomial the maximum of |P| over the unit ball of
l_inf^n sits on the boundary, so bivariate norms reduce to two univariate
problems on an edge of the square.  The named cubic and sextic two-variable
families have fully closed-form norms; the recursive difference-of-squares
family has norm exactly 1; everything else falls back to a multistart
coordinate-ascent heuristic (certified from below only) or, for complex
scalars, a torus grid estimate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath import mpf

from . import polycore
from .errors import ConvergenceFailure, DimensionMismatch, InvalidParameter
from .polycore import HomogeneousPoly, dense_vector, eval_real
from .precision import to_mpf

METHOD_CLOSED_FORM = "closed-form"
METHOD_UNIVARIATE = "univariate-critical"
METHOD_MULTISTART = "multistart"
METHOD_ANALYTIC = "analytic"


@dataclass(frozen=True)
class SupNormResult:
    """A sup-norm value together with the point certifying it from below."""

    value: mpf
    maximizer: tuple[float, ...]
    method: str
    certified_lower: mpf


@dataclass(frozen=True)
class OptimizerConfig:
    grid_points: int = 10001
    newton_tol: float = 1e-14
    restarts: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 3:
            raise InvalidParameter(f"grid_points must be >= 3, got {self.grid_points}")
        if not self.newton_tol > 0:
            raise InvalidParameter("newton_tol must be positive")
        if self.restarts < 1:
            raise InvalidParameter("restarts must be >= 1")


# ---------------------------------------------------------------------------
# univariate maximization
# ---------------------------------------------------------------------------

def _horner_float(coeffs: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _horner_mpf(coeffs, x: mpf) -> mpf:
    acc = mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + to_mpf(c)
    return acc


def _derivative(coeffs):
    return [k * c for k, c in enumerate(coeffs)][1:]


def _polish_root(coeffs: list[float], lo: float, hi: float, flo: float,
                 tol: float, maxit: int = 200) -> float:
    """Safeguarded Newton on a bracketed sign change of a float polynomial."""
    dcoeffs = _derivative(coeffs)
    x = 0.5 * (lo + hi)
    for _ in range(maxit):
        f = _horner_float(coeffs, x)
        if f == 0.0:
            return x
        if (f > 0) == (flo > 0):
            lo = x
        else:
            hi = x
        df = _horner_float(dcoeffs, x)
        step_ok = False
        if df != 0.0:
            x_new = x - f / df
            if lo < x_new < hi:
                step_ok = True
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol:
            return x_new
        x = x_new
    if hi - lo <= 1e3 * tol:
        return 0.5 * (lo + hi)
    raise ConvergenceFailure(f"root polish stalled in [{lo}, {hi}]")


def _critical_points(coeffs: list[float], lo: float, hi: float, cfg: OptimizerConfig) -> list[float]:
    """Real roots of the derivative inside [lo, hi], by sign-change scan."""
    dcoeffs = _derivative(coeffs)
    if len(dcoeffs) <= 1:
        return []  # constant derivative: no interior critical points
    xs = np.linspace(lo, hi, cfg.grid_points)
    vals = np.polyval(list(reversed(dcoeffs)), xs)
    roots: list[float] = []
    for i in range(len(xs) - 1):
        a, b = float(vals[i]), float(vals[i + 1])
        if a == 0.0:
            roots.append(float(xs[i]))
        elif a * b < 0:
            roots.append(_polish_root(dcoeffs, float(xs[i]), float(xs[i + 1]), a, cfg.newton_tol))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    return roots


def _refine_mpf(coeffs, x: mpf, lo: mpf, hi: mpf, steps: int = 4) -> mpf:
    """A few Newton steps on the derivative at working precision."""
    d1 = _derivative(coeffs)
    d2 = _derivative(d1)
    for _ in range(steps):
        g = _horner_mpf(d1, x)
        h = _horner_mpf(d2, x)
        if h == 0:
            break
        x_new = x - g / h
        if not (lo <= x_new <= hi):
            break
        x = x_new
    return x


def univariate_max_abs(coeffs, interval, cfg: OptimizerConfig | None = None) -> SupNormResult:
    """Maximum of |p(x)| over [lo, hi] for a dense coefficient vector.

    Checks the endpoints and every derivative sign change found at grid
    resolution, each polished by safeguarded Newton and then sharpened at
    working precision.
    """
    cfg = cfg or OptimizerConfig()
    lo, hi = float(interval[0]), float(interval[1])
    if not lo <= hi:
        raise InvalidParameter(f"empty interval [{interval[0]}, {interval[1]}]")
    coeffs = list(coeffs)
    floats = [float(c) for c in coeffs]
    candidates = [lo, hi] if hi > lo else [lo]
    candidates += _critical_points(floats, lo, hi, cfg)
    mlo, mhi = mpf(lo), mpf(hi)
    best_val = mpf(-1)
    best_x = lo
    for x in candidates:
        xm = mpf(x)
        if lo < x < hi:
            # sharpen at working precision, then round back to the stored
            # maximizer so the certificate replays exactly (second-order loss)
            xm = mpf(float(_refine_mpf(coeffs, xm, mlo, mhi)))
        v = abs(_horner_mpf(coeffs, xm))
        if v > best_val or (v == best_val and float(xm) < best_x):
            best_val, best_x = v, float(xm)
    return SupNormResult(
        value=best_val,
        maximizer=(best_x,),
        method=METHOD_UNIVARIATE,
        certified_lower=best_val,
    )


# ---------------------------------------------------------------------------
# bivariate reduction
# ---------------------------------------------------------------------------

def sup_norm_bivariate(p: HomogeneousPoly, cfg: OptimizerConfig | None = None) -> SupNormResult:
    """Norm of a bivariate homogeneous polynomial on the unit square.

    By homogeneity the maximum lies on an edge, and opposite edges mirror
    each other, so two univariate problems on [-1, 1] suffice.
    """
    if p.n != 2:
        raise DimensionMismatch("sup_norm_bivariate requires n = 2")
    if p.m < 1:
        raise InvalidParameter("degree must be >= 1")
    vec = dense_vector(p)
    edge_x = univariate_max_abs(vec, (-1.0, 1.0), cfg)            # P(x, 1)
    edge_y = univariate_max_abs(list(reversed(vec)), (-1.0, 1.0), cfg)  # P(1, y)
    cand_x = (edge_x.value, (edge_x.maximizer[0], 1.0))
    cand_y = (edge_y.value, (1.0, edge_y.maximizer[0]))
    value, maximizer = max(cand_x, cand_y, key=lambda t: (t[0], tuple(-c for c in t[1])))
    certified = abs(to_mpf(eval_real(p, [mpf(maximizer[0]), mpf(maximizer[1])])))
    return SupNormResult(
        value=max(value, certified),
        maximizer=maximizer,
        method=METHOD_UNIVARIATE,
        certified_lower=certified,
    )


# ---------------------------------------------------------------------------
# closed forms for the named families
# ---------------------------------------------------------------------------

_B1_CACHE: dict[int, mpf] = {}


def pab_branch_boundary() -> mpf:
    """The negative ratio b/a where the two norm branches of the symmetric
    cubic family a*x^3 + b*x^2 y + b*x y^2 + a*y^3 coincide (about -1.6692)."""
    dps = mpmath.mp.dps
    if dps not in _B1_CACHE:
        s3 = mpmath.sqrt(3)
        _B1_CACHE[dps] = (mpf(3) / 7) * (
            3 - 2 * mpmath.cbrt(9) / mpmath.cbrt(-12 + 7 * s3) + 2 * mpmath.cbrt(-36 + 21 * s3)
        )
    return _B1_CACHE[dps]


def _pab_poly(a, b) -> HomogeneousPoly:
    return polycore.poly_new(2, 3, [((3, 0), a), ((2, 1), b), ((1, 2), b), ((0, 3), a)])


def sup_norm_pab_closed(a, b) -> SupNormResult:
    """Closed-form norm of the symmetric cubic family.

    Inside the ratio window (b1, 3 - 2*sqrt(3)) the norm is attained at an
    interior critical point of the edge restriction; otherwise at the corner
    (1, 1) with value |2a + 2b|.
    """
    am, bm = to_mpf(a), to_mpf(b)
    if am == 0 and bm == 0:
        raise InvalidParameter("(a, b) must not be (0, 0)")
    interior = False
    if am != 0:
        lam = bm / am
        if pab_branch_boundary() < lam < 3 - 2 * mpmath.sqrt(3):
            interior = True
    if interior:
        formula = abs(am) * abs(
            1 - lam**2 / 3 + 2 * lam**3 / 27 + (mpf(2) / 27) * (lam**2 - 3 * lam) ** mpf("1.5")
        )
        # edge restriction g(y) = a + b y + b y^2 + a y^3; critical points
        root = mpmath.sqrt(lam**2 - 3 * lam)
        ys = [(-lam + root) / 3, (-lam - root) / 3]
        cands = [y for y in ys if -1 <= y <= 1] + [mpf(-1), mpf(1)]
        best_y = max(cands, key=lambda y: abs(am * (1 + lam * y + lam * y**2 + y**3)))
        maximizer = (1.0, float(best_y))
    else:
        formula = abs(2 * am + 2 * bm)
        maximizer = (1.0, 1.0)
    certified = abs(to_mpf(eval_real(_pab_poly(a, b), [mpf(1), mpf(maximizer[1])])))
    return SupNormResult(
        value=max(formula, certified),
        maximizer=maximizer,
        method=METHOD_CLOSED_FORM,
        certified_lower=certified,
    )


def _qab_poly(a, b) -> HomogeneousPoly:
    return polycore.poly_new(2, 6, [((5, 1), a), ((3, 3), b), ((1, 5), a)])


def qab_critical_value(lam: mpf) -> mpf | None:
    """|q(x0)| for q(x) = x^5 + lam*x^3 + x, or None when q is monotone.

    x0 is the smaller positive critical point; it exists iff
    lam <= -2*sqrt(5)/3 and always lies in [0, 1].
    """
    if lam > -2 * mpmath.sqrt(5) / 3:
        return None
    disc = mpmath.sqrt(9 * lam**2 - 20)
    x0 = mpmath.sqrt((-3 * lam - disc) / 10)
    return abs(x0**5 + lam * x0**3 + x0)


def sup_norm_qab(a, b, cross_check: bool = True) -> SupNormResult:
    """Closed-form norm of the symmetric sextic family a*x^5 y + b*x^3 y^3 + a*x y^5.

    Scales out a, reduces to |x^5 + (b/a) x^3 + x| on [0, 1] and compares the
    boundary value |2 + b/a| with the inner critical value.  A coarse
    univariate brute-force pass guards the formula.
    """
    am, bm = to_mpf(a), to_mpf(b)
    if am == 0:
        val = abs(bm)
        p = _qab_poly(a, b)
        certified = abs(to_mpf(eval_real(p, [mpf(1), mpf(1)]))) if p.terms else mpf(0)
        return SupNormResult(max(val, certified), (1.0, 1.0), METHOD_CLOSED_FORM, certified)
    lam = bm / am
    boundary = abs(2 + lam)
    cands: list[tuple[mpf, mpf]] = [(abs(am) * boundary, mpf(1))]
    inner = qab_critical_value(lam)
    if inner is not None:
        disc = mpmath.sqrt(9 * lam**2 - 20)
        x0 = mpmath.sqrt((-3 * lam - disc) / 10)
        cands.append((abs(am) * inner, x0))
    value, x_best = max(cands, key=lambda t: t[0])
    maximizer = (float(x_best), 1.0)
    certified = abs(to_mpf(eval_real(_qab_poly(a, b), [mpf(maximizer[0]), mpf(1)])))
    result = SupNormResult(
        value=max(value, certified),
        maximizer=maximizer,
        method=METHOD_CLOSED_FORM,
        certified_lower=certified,
    )
    if cross_check:
        edge = [0, am, 0, bm, 0, am]  # a*x^5 + b*x^3 + a*x on the y=1 edge, indexed by power
        brute = univariate_max_abs(edge, (0.0, 1.0), OptimizerConfig(grid_points=2001))
        scale = max(mpf(1), result.value)
        if abs(brute.value - result.value) > mpf("1e-9") * scale:
            raise ConvergenceFailure(
                f"closed-form norm {result.value} disagrees with brute force {brute.value}"
            )
    return result


def sup_norm_p2k_analytic(k: int) -> SupNormResult:
    """Norm of the recursive difference-of-squares family: exactly 1.

    The two halves of the recursion live on disjoint blocks and each ranges
    over [-1, 1] on its cube, so A^2 - B^2 ranges over [-1, 1] and the value
    1 is attained at the first unit vector.
    """
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    n = 2**k
    maximizer = (1.0,) + (0.0,) * (n - 1)
    return SupNormResult(mpf(1), maximizer, METHOD_ANALYTIC, mpf(1))


# ---------------------------------------------------------------------------
# multistart coordinate ascent (heuristic, general n)
# ---------------------------------------------------------------------------

def _coordinate_terms(p: HomogeneousPoly):
    """For each variable: [(exponent of that variable, coeff, rest)] over the
    terms containing it, where rest = ((var, exp), ...) for the other vars."""
    per_coord: list[list[tuple[int, float, tuple[tuple[int, int], ...]]]] = [[] for _ in range(p.n)]
    for alpha, c in p.sorted_terms():
        cf = float(c)
        for j, e in enumerate(alpha):
            if e:
                rest = tuple((i, ei) for i, ei in enumerate(alpha) if ei and i != j)
                per_coord[j].append((e, cf, rest))
    return per_coord


def _max_abs_univ_small(coeffs: list[float], lo: float, hi: float) -> tuple[float, float]:
    """Argmax of |p| over [lo, hi] for small dense float polynomials."""
    cands = [lo, hi]
    d = _derivative(coeffs)
    if len(d) == 2 and d[1] != 0.0:               # quadratic polynomial
        cands.append(-d[0] / d[1])
    elif len(d) == 3 and d[2] != 0.0:             # cubic polynomial
        disc = d[1] * d[1] - 4 * d[0] * d[2]
        if disc >= 0:
            r = disc**0.5
            cands += [(-d[1] + r) / (2 * d[2]), (-d[1] - r) / (2 * d[2])]
    elif len(d) >= 2:
        roots = np.roots(list(reversed(d)))
        cands += [float(r.real) for r in roots if abs(r.imag) < 1e-9]
    best_x, best_v = lo, -1.0
    for x in cands:
        if lo <= x <= hi:
            v = abs(_horner_float(coeffs, x))
            if v > best_v:
                best_x, best_v = x, v
    return best_x, best_v


def sup_norm_multistart(p: HomogeneousPoly, cfg: OptimizerConfig | None = None) -> SupNormResult:
    """Heuristic norm for general n: coordinate ascent restricted to faces.

    By homogeneity the maximum has some coordinate at +-1, so each face
    x_j = s is searched from cfg.restarts random starts.  The returned value
    is certified from below by evaluation; no upper certificate is claimed.
    """
    if p.n < 2:
        raise InvalidParameter("multistart requires n >= 2")
    if not p.terms:
        return SupNormResult(mpf(0), (0.0,) * p.n, METHOD_MULTISTART, mpf(0))
    cfg = cfg or OptimizerConfig()
    rng = random.Random(cfg.seed)
    per_coord = _coordinate_terms(p)
    float_terms = [(alpha, float(c)) for alpha, c in p.sorted_terms()]

    def eval_float(x: list[float]) -> float:
        total = 0.0
        for alpha, c in float_terms:
            v = c
            for xi, e in zip(x, alpha):
                if e:
                    v *= xi**e
            total += v
        return total

    best_val = -1.0
    best_x: list[float] | None = None
    for j in range(p.n):
        for s in (1.0, -1.0):
            for _ in range(cfg.restarts):
                x = [rng.uniform(-1.0, 1.0) for _ in range(p.n)]
                x[j] = s
                value = eval_float(x)
                for _sweep in range(60):
                    improved = False
                    value = eval_float(x)
                    for i in range(p.n):
                        if i == j:
                            continue
                        coeffs = [0.0] * (p.m + 1)
                        for e, cf, rest in per_coord[i]:
                            prod = cf
                            for v_idx, v_e in rest:
                                prod *= x[v_idx] ** v_e
                            coeffs[e] += prod
                        tail = sum(coeffs[d] * x[i] ** d for d in range(1, p.m + 1))
                        coeffs[0] = value - tail
                        xi_new, v_new = _max_abs_univ_small(coeffs, -1.0, 1.0)
                        if v_new > abs(value) + 1e-15 * max(1.0, abs(value)):
                            x[i] = xi_new
                            value = sum(coeffs[d] * xi_new**d for d in range(p.m + 1))
                            improved = True
                    if not improved:
                        break
                if abs(value) > best_val:
                    best_val = abs(value)
                    best_x = list(x)
    if best_x is None:
        raise ConvergenceFailure("no restart produced a finite value")
    certified = abs(to_mpf(eval_real(p, [mpf(v) for v in best_x])))
    return SupNormResult(
        value=certified,
        maximizer=tuple(best_x),
        method=METHOD_MULTISTART,
        certified_lower=certified,
    )


# ---------------------------------------------------------------------------
# complex torus estimate
# ---------------------------------------------------------------------------

def _reduced_frequencies(p: HomogeneousPoly):
    """Complex coefficients keyed by the first n-1 exponents.

    On the torus |P| only depends on angle differences against the last
    coordinate (homogeneity contributes a unimodular factor), which drops
    one grid dimension.
    """
    freqs: dict[tuple[int, ...], complex] = {}
    for alpha, c in p.sorted_terms():
        key = alpha[:-1]
        freqs[key] = freqs.get(key, 0j) + complex(c)
    return freqs


def complex_torus_sup_estimate(p: HomogeneousPoly, grid_per_dim: int = 4096) -> mpf:
    """Certified lower estimate of sup |P| over the unit torus.

    Scans a uniform grid in the reduced angles, then locally refines the
    best point for three rounds.  The result is the exact |P| at the best
    point found, so it never overshoots the true complex sup norm.
    """
    if grid_per_dim < 8:
        raise InvalidParameter(f"grid_per_dim must be >= 8, got {grid_per_dim}")
    if not p.terms:
        return mpf(0)
    r = p.n - 1
    freqs = _reduced_frequencies(p)
    if r == 0:
        (coeff,) = freqs.values()
        return abs(to_mpf(abs(coeff)))
    if r == 1:
        vec = np.zeros(grid_per_dim, dtype=np.complex128)
        for (f0,), c in freqs.items():
            vec[f0 % grid_per_dim] += c
        vals = np.fft.ifft(vec) * grid_per_dim
        best = int(np.argmax(np.abs(vals)))
        angles = [2 * np.pi * best / grid_per_dim]
    elif r == 2:
        grid = np.zeros((grid_per_dim, grid_per_dim), dtype=np.complex128)
        for (f0, f1), c in freqs.items():
            grid[f0 % grid_per_dim, f1 % grid_per_dim] += c
        vals = np.fft.ifft2(grid) * grid_per_dim**2
        flat = int(np.argmax(np.abs(vals)))
        i0, i1 = divmod(flat, grid_per_dim)
        angles = [2 * np.pi * i0 / grid_per_dim, 2 * np.pi * i1 / grid_per_dim]
    else:
        raise InvalidParameter("torus estimate supports at most 3 variables")

    items = list(freqs.items())

    def local_eval(theta: np.ndarray) -> float:
        total = 0j
        for f, c in items:
            phase = sum(fk * tk for fk, tk in zip(f, theta))
            total += c * np.exp(1j * phase)
        return abs(total)

    h = 2 * np.pi / grid_per_dim
    theta = np.array(angles)
    for _ in range(3):
        for axis in range(r):
            offsets = np.linspace(-h, h, 33)
            best_off, best_v = 0.0, local_eval(theta)
            for off in offsets:
                cand = theta.copy()
                cand[axis] += off
                v = local_eval(cand)
                if v > best_v:
                    best_off, best_v = off, v
            theta[axis] += best_off
        h /= 8
    z = [mpmath.exp(mpmath.mpc(0, t)) for t in theta] + [mpmath.mpc(1)]
    return abs(polycore.eval_complex(p, z))

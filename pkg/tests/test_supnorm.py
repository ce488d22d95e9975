import random

import mpmath
import numpy as np
import pytest
from mpmath import mpf

from bhbounds import (
    DimensionMismatch,
    InvalidParameter,
    complex_torus_sup_estimate,
    coeff_lp_norm,
    eval_real,
    poly_new,
    sup_norm_bivariate,
    sup_norm_multistart,
    sup_norm_p2k_analytic,
    sup_norm_pab_closed,
    sup_norm_qab,
    univariate_max_abs,
)
from bhbounds.bounds import find_lambda01
from bhbounds.families import FamilySpec, make_family, p2k_poly
from bhbounds.supnorm import OptimizerConfig, pab_branch_boundary


def cubic_family(a, b):
    return poly_new(2, 3, [((3, 0), a), ((2, 1), b), ((1, 2), b), ((0, 3), a)])


def sample_cube_numpy(poly, count, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(count, poly.n))
    total = np.zeros(count)
    for alpha, c in poly.sorted_terms():
        term = np.full(count, float(c))
        for i, e in enumerate(alpha):
            if e:
                term *= pts[:, i] ** e
        total += term
    return float(np.max(np.abs(total)))


class TestUnivariate:
    def test_linear(self):
        result = univariate_max_abs([0, 1], (-1, 1))
        assert result.value == 1
        assert abs(result.maximizer[0]) == 1.0

    def test_cubic_critical_point(self):
        result = univariate_max_abs([0, -1, 0, 1], (-1, 1))
        assert abs(result.value - 2 / (3 * mpmath.sqrt(3))) < mpf("1e-20")
        assert abs(abs(result.maximizer[0]) - 3 ** -0.5) < 1e-10

    def test_dense_grid_oracle(self):
        rng = random.Random(5)
        for _ in range(25):
            deg = rng.randint(1, 7)
            coeffs = [rng.uniform(-2, 2) for _ in range(deg + 1)]
            result = univariate_max_abs(coeffs, (-1, 1))
            xs = np.linspace(-1, 1, 40001)
            brute = float(np.max(np.abs(np.polyval(list(reversed(coeffs)), xs))))
            assert float(result.value) >= brute - 1e-9
            assert float(result.value) <= brute + 1e-4 * max(1.0, brute)

    def test_boundary_ties_critical_at_tie_root(self):
        lam0, _ = find_lambda01()
        coeffs = [0, mpf(1), 0, lam0, 0, mpf(1)]
        result = univariate_max_abs(coeffs, (0, 1))
        assert abs(result.value - abs(2 + lam0)) < mpf("1e-11")

    def test_empty_interval_rejected(self):
        with pytest.raises(InvalidParameter):
            univariate_max_abs([0, 1], (1, -1))


class TestBivariate:
    def test_quartic_norm(self):
        p = make_family(FamilySpec("p4"))
        result = sup_norm_bivariate(p)
        expected = 2 * mpmath.sqrt(3) / 9
        assert abs(result.value - expected) / expected < mpf("1e-10")
        x, y = result.maximizer
        assert {abs(round(abs(x), 6)), abs(round(abs(y), 6))} == {1.0, round(3 ** -0.5, 6)}

    def test_monomial(self):
        p = poly_new(2, 6, [((6, 0), 1)])
        assert sup_norm_bivariate(p).value == 1

    def test_quintic_norm_ten_decimals(self):
        p = make_family(FamilySpec("p5"))
        result = sup_norm_bivariate(p)
        assert abs(result.value - mpf("0.286170950359")) < mpf("1e-9")

    def test_requires_two_variables(self):
        with pytest.raises(DimensionMismatch):
            sup_norm_bivariate(poly_new(3, 2, [((1, 1, 0), 1)]))

    def test_dense_grid_never_beats_reduction(self):
        rng = random.Random(11)
        for _ in range(10):
            m = rng.randint(1, 6)
            p = poly_new(2, m, [((i, m - i), rng.uniform(-3, 3)) for i in range(m + 1)])
            if not p.terms:
                continue
            value = float(sup_norm_bivariate(p).value)
            xs = np.linspace(-1, 1, 2001)
            grid_x, grid_y = np.meshgrid(xs, xs)
            total = np.zeros_like(grid_x)
            for (i, j), c in p.sorted_terms():
                total += float(c) * grid_x**i * grid_y**j
            assert float(np.max(np.abs(total))) <= value + 1e-9


class TestClosedForms:
    def test_boundary_case_both_branches_agree(self):
        b1 = pab_branch_boundary()
        result = sup_norm_pab_closed(1, b1)
        corner = abs(2 + 2 * b1)
        assert abs(result.value - corner) < mpf("1e-40")
        assert abs(result.value - mpf("1.3384")) < mpf("1e-3")
        brute = sup_norm_bivariate(cubic_family(1, b1))
        assert abs(result.value - brute.value) < mpf("1e-12")

    def test_corner_branch(self):
        assert sup_norm_pab_closed(1, 0).value == 2

    def test_interior_window_matches_bruteforce(self):
        result = sup_norm_pab_closed(1, -1.0)  # -1 lies inside (b1, 3-2*sqrt(3))
        brute = sup_norm_bivariate(cubic_family(1, -1.0))
        assert abs(result.value - brute.value) < mpf("1e-10")

    def test_outside_window(self):
        result = sup_norm_pab_closed(1, -1.8)
        assert abs(result.value - mpf("1.6")) < mpf("1e-12")
        brute = sup_norm_bivariate(cubic_family(1, -1.8))
        assert abs(result.value - brute.value) < mpf("1e-10")

    def test_rejects_zero_pair(self):
        with pytest.raises(InvalidParameter):
            sup_norm_pab_closed(0, 0)

    def test_oracle_agreement_200_random(self):
        rng = random.Random(99)
        for _ in range(200):
            a = rng.uniform(-3, 3)
            b = rng.uniform(-3, 3)
            if abs(a) < 1e-9 and abs(b) < 1e-9:
                continue
            closed = sup_norm_pab_closed(a, b).value
            brute = sup_norm_bivariate(cubic_family(a, b)).value
            assert abs(closed - brute) / brute < mpf("1e-9"), (a, b)

    def test_sextic_no_critical_points(self):
        assert sup_norm_qab(1, 0).value == 2

    def test_sextic_tie_at_root(self):
        lam0, _ = find_lambda01()
        result = sup_norm_qab(1, lam0)
        boundary = abs(2 + lam0)
        assert abs(result.value - boundary) < mpf("1e-11")
        assert abs(result.value - mpf("0.2654")) < mpf("1e-4")

    def test_sextic_double_well(self):
        result = sup_norm_qab(1, -2)
        edge = [0.0, 1.0, 0.0, -2.0, 0.0, 1.0]
        brute = univariate_max_abs(edge, (0.0, 1.0))
        assert abs(result.value - brute.value) < mpf("1e-10")

    def test_sextic_oracle_agreement_random(self):
        rng = random.Random(3)
        for _ in range(60):
            a = rng.uniform(-3, 3)
            lam = rng.uniform(-4, 1)
            if abs(a) < 1e-9:
                continue
            result = sup_norm_qab(a, a * lam)  # cross-check runs inside the op
            edge = [0, a, 0, a * lam, 0, a]
            brute = univariate_max_abs(edge, (0.0, 1.0))
            assert abs(result.value - brute.value) / brute.value < mpf("1e-9")

    def test_degenerate_sextic_monomial(self):
        assert sup_norm_qab(0, -3).value == 3


class TestRecursiveFamilyNorm:
    def test_base_case(self):
        result = sup_norm_p2k_analytic(1)
        assert result.value == 1
        assert result.maximizer == (1.0, 0.0)

    def test_unit_vector_eval(self):
        for k in (1, 2, 3):
            p = p2k_poly(k)
            e1 = [1] + [0] * (p.n - 1)
            assert eval_real(p, e1) == 1

    def test_stochastic_sampling_never_exceeds_one(self):
        # the analytic norm has no published closed form; keep this check on
        p = p2k_poly(3)
        assert sample_cube_numpy(p, 1_000_000, seed=123) <= 1 + 1e-12


class TestMultistart:
    def test_quartic(self):
        p = make_family(FamilySpec("p4"))
        result = sup_norm_multistart(p, OptimizerConfig(restarts=16, seed=4))
        expected = 2 * mpmath.sqrt(3) / 9
        assert abs(result.value - expected) / expected < mpf("1e-10")

    def test_monomial_three_variables(self):
        p = poly_new(3, 3, [((1, 1, 1), 1)])
        result = sup_norm_multistart(p, OptimizerConfig(restarts=8, seed=1))
        assert abs(result.value - 1) < mpf("1e-12")

    def test_four_variable_doubling_member(self):
        p = p2k_poly(2)
        result = sup_norm_multistart(p, OptimizerConfig(restarts=16, seed=2))
        assert abs(result.value - 1) < mpf("1e-9")

    def test_certification(self):
        p = make_family(FamilySpec("p5"))
        result = sup_norm_multistart(p, OptimizerConfig(restarts=8, seed=9))
        replay = abs(eval_real(p, [mpf(v) for v in result.maximizer]))
        assert replay == result.certified_lower
        assert result.certified_lower <= result.value
        assert max(abs(v) for v in result.maximizer) <= 1 + 1e-14


class TestTorusEstimate:
    def test_monomial_exactly_one(self):
        p = poly_new(1, 4, [((4,), 1)])
        assert abs(complex_torus_sup_estimate(p, 64) - 1) < mpf("1e-30")

    def test_difference_of_squares(self):
        p = poly_new(2, 2, [((2, 0), 1), ((0, 2), -1)])
        assert abs(complex_torus_sup_estimate(p, 4096) - 2) < mpf("1e-12")

    def test_quartic_between_real_norm_and_complexification_bound(self):
        p = make_family(FamilySpec("p4"))
        est = complex_torus_sup_estimate(p, 4096)
        real_norm = sup_norm_bivariate(p).value
        assert real_norm - mpf("1e-12") <= est <= 8 * real_norm + mpf("1e-8")

    def test_rejects_tiny_grid(self):
        with pytest.raises(InvalidParameter):
            complex_torus_sup_estimate(poly_new(1, 1, [((1,), 1)]), 4)

    def test_three_variables(self):
        p = poly_new(3, 2, [((2, 0, 0), 1), ((0, 2, 0), -1), ((0, 0, 2), 1)])
        est = complex_torus_sup_estimate(p, 128)
        assert est <= 3 + mpf("1e-12")
        assert est >= 3 - mpf("1e-3")

    def test_parseval_lower_bound_random_complex(self):
        rng = random.Random(7)
        for _ in range(50):
            m = rng.randint(1, 5)
            terms = [((i, m - i), complex(rng.gauss(0, 1), rng.gauss(0, 1))) for i in range(m + 1)]
            p = poly_new(2, m, terms)
            l2 = coeff_lp_norm(p, 2).value
            assert l2 <= complex_torus_sup_estimate(p, 4096) + mpf("1e-8")

    def test_complexification_factor_random_real(self):
        rng = random.Random(31)
        for _ in range(40):
            m = rng.randint(1, 6)
            p = poly_new(2, m, [((i, m - i), rng.randint(-4, 4)) for i in range(m + 1)])
            if not p.terms:
                continue
            est = complex_torus_sup_estimate(p, 4096)
            assert est <= 2 ** (m - 1) * sup_norm_bivariate(p).value + mpf("1e-8")


class TestResultInvariants:
    def test_certified_lower_replays_exactly(self):
        cases = [
            sup_norm_bivariate(make_family(FamilySpec("p4"))),
            sup_norm_pab_closed(1, -1.2),
            sup_norm_qab(1, -2.1),
        ]
        polys = [
            make_family(FamilySpec("p4")),
            cubic_family(1, -1.2),
            poly_new(2, 6, [((5, 1), 1), ((3, 3), -2.1), ((1, 5), 1)]),
        ]
        for result, poly in zip(cases, polys):
            replay = abs(eval_real(poly, [mpf(v) for v in result.maximizer]))
            assert replay == result.certified_lower
            assert result.certified_lower <= result.value
            assert max(abs(v) for v in result.maximizer) <= 1 + 1e-14

    def test_config_validation(self):
        with pytest.raises(InvalidParameter):
            OptimizerConfig(grid_points=2)
        with pytest.raises(InvalidParameter):
            OptimizerConfig(newton_tol=0)

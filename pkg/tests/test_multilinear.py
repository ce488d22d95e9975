import itertools
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mpf

from bhbounds import (
    InvalidParameter,
    cm_lower_bound,
    ml_coeff_lq_norm,
    ml_eval,
    ml_new,
    ml_sup_norm_bruteforce,
    polar_form,
    polarization_norm_check,
    poly_new,
)
from bhbounds.families import FamilySpec, make_family, tm_form


def t2():
    return ml_new(2, 2, [((0, 0), 1), ((0, 1), 1), ((1, 0), 1), ((1, 1), -1)])


class TestVertexNorm:
    def test_four_term_form(self):
        result = ml_sup_norm_bruteforce(t2())
        assert result.value == 2
        slots = [result.maximizer[:2], result.maximizer[2:]]
        assert abs(ml_eval(t2(), slots)) == result.certified_lower

    def test_rank_one(self):
        assert ml_sup_norm_bruteforce(ml_new(2, 2, [((0, 0), 1)])).value == 1

    def test_arity_three_doubling_form(self):
        assert ml_sup_norm_bruteforce(tm_form(3)).value == 4

    def test_cap_enforced_without_iterative(self):
        t4 = tm_form(4)  # 4 slots x 8 coordinates = 32 > 24
        with pytest.raises(InvalidParameter):
            ml_sup_norm_bruteforce(t4)

    def test_vertex_beats_dense_sampling(self):
        rng = random.Random(6)
        for _ in range(12):
            n = rng.randint(1, 3)
            coeffs = [
                (idx, rng.uniform(-2, 2))
                for idx in itertools.product(range(n), repeat=2)
            ]
            form = ml_new(2, n, coeffs)
            exact = float(ml_sup_norm_bruteforce(form).value)
            sampler = np.random.default_rng(1)
            best = 0.0
            for _ in range(40):
                xs = sampler.uniform(-1, 1, size=(500, n))
                ys = sampler.uniform(-1, 1, size=(500, n))
                arr = np.zeros((n, n))
                for (i, j), c in form.coeffs.items():
                    arr[i, j] = c
                vals = np.abs(np.einsum("ki,ij,kj->k", xs, arr, ys))
                best = max(best, float(vals.max()))
            assert best <= exact + 1e-12


class TestCoefficientNorms:
    def test_four_thirds_norm(self):
        value = ml_coeff_lq_norm(t2(), Fraction(4, 3)).value
        assert abs(value - mpf(4) ** mpf("0.75")) < mpf("1e-50")

    def test_quotient_is_sqrt_two(self):
        quotient = ml_coeff_lq_norm(t2(), Fraction(4, 3)).value / ml_sup_norm_bruteforce(t2()).value
        assert abs(quotient - mpmath.sqrt(2)) < mpf("1e-12")

    def test_large_q_approaches_max_coefficient(self):
        form = ml_new(2, 2, [((0, 0), 5), ((1, 1), -3)])
        value = ml_coeff_lq_norm(form, 64).value
        assert abs(value - 5) < mpf("0.1")

    def test_l2_below_sup_norm(self):
        rng = random.Random(8)
        for _ in range(20):
            n = rng.randint(1, 3)
            form = ml_new(
                2, n,
                [(idx, rng.choice((-1, 1))) for idx in itertools.product(range(n), repeat=2)],
            )
            l2 = ml_coeff_lq_norm(form, 2).value
            assert l2 <= ml_sup_norm_bruteforce(form).value + mpf("1e-12")


class TestPolarForm:
    def test_power_monomial(self):
        p = poly_new(1, 2, [((2,), 1)])
        assert polar_form(p).coeffs == {(0, 0): 1}

    def test_mixed_quadratic(self):
        p = poly_new(2, 2, [((1, 1), 2)])
        assert polar_form(p).coeffs == {(0, 1): 1, (1, 0): 1}

    def test_diagonal_identity_on_random_points(self):
        p = make_family(FamilySpec("p4"))
        form = polar_form(p)
        rng = random.Random(9)
        from bhbounds import eval_real

        for _ in range(100):
            x = [Fraction(rng.randint(-30, 30), 29) for _ in range(2)]
            assert ml_eval(form, [x, x, x, x]) == eval_real(p, x)

    def test_slot_permutation_symmetry(self):
        form = polar_form(make_family(FamilySpec("p4")))
        for idx, c in form.coeffs.items():
            for perm in itertools.permutations(idx):
                assert form.coeffs.get(perm) == c

    def test_size_cap(self):
        p = poly_new(5, 2, [((2, 0, 0, 0, 0), 1)])
        with pytest.raises(InvalidParameter):
            polar_form(p)


class TestPolarizationBound:
    def test_power_monomial_norm_one(self):
        p = poly_new(1, 4, [((4,), 1)])
        norm_t, bound = polarization_norm_check(p)
        assert norm_t == 1
        assert norm_t <= bound

    def test_quartic_family(self):
        norm_t, bound = polarization_norm_check(make_family(FamilySpec("p4")))
        expected = mpf(4**4) / 24 * (2 * mpmath.sqrt(3) / 9)
        assert abs(bound - expected) < mpf("1e-30")
        assert norm_t <= bound

    def test_mixed_quadratic_inequality(self):
        norm_t, bound = polarization_norm_check(poly_new(2, 2, [((1, 1), 2)]))
        assert norm_t <= bound
        assert abs(bound - 4) < mpf("1e-30")


class TestClosedFormQuotient:
    def test_arity_two(self):
        assert abs(cm_lower_bound(2, Fraction(4, 3)) - mpmath.sqrt(2)) < mpf("1e-50")

    def test_arity_three(self):
        value = cm_lower_bound(3, Fraction(3, 2))
        assert abs(value - mpf(2) ** (mpf(2) / 3)) < mpf("1e-50")

    def test_q_two_boundary(self):
        for m in range(2, 8):
            assert cm_lower_bound(m, 2) == 1

    @pytest.mark.parametrize("m", range(2, 11))
    def test_dual_exponent_closed_form(self, m):
        value = cm_lower_bound(m, Fraction(2 * m, m + 1))
        assert abs(value - mpf(2) ** (1 - mpf(1) / m)) < mpf("1e-12")

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            cm_lower_bound(1, 2)
        with pytest.raises(InvalidParameter):
            cm_lower_bound(3, Fraction(1, 2))

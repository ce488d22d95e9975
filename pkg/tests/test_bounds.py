import math
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from bhbounds import (
    ConvergenceFailure,
    InvalidParameter,
    bh_lower_bound,
    complex_lower_bound,
    contractivity_dm,
    estimate_4n,
    find_b1,
    find_b1_numeric,
    find_lambda01,
    hyper_aggregate,
    ksz_experiment,
    p2k_bounds,
    poly_new,
    power_bound,
    search_m2,
    search_m3,
    search_m6,
    stirling_growth_base,
    stirling_lower,
)
from bhbounds.bounds import BoundRecord, KIND_POLY_REAL, m2_quotient, m3_quotient, m6_quotient
from bhbounds.families import FamilySpec, certified_norm, make_family
from bhbounds.supnorm import sup_norm_bivariate


def rel_err(value, reference) -> float:
    ref = mpf(reference)
    return float(abs(value - ref) / abs(ref))


class TestQuotientPipeline:
    def test_quartic_direct(self):
        record = bh_lower_bound(make_family(FamilySpec("p4")), certified_norm(FamilySpec("p4")))
        expected = mpf(2) ** (mpf(5) / 8) / (2 * mpmath.sqrt(3) / 9)
        assert abs(record.value - expected) < mpf("1e-30")
        assert rel_err(record.value, "4.006") < 2e-4

    def test_monomial_gives_one(self):
        p = poly_new(2, 3, [((3, 0), 1)])
        record = bh_lower_bound(p, sup_norm_bivariate(p))
        assert abs(record.value - 1) < mpf("1e-30")

    def test_zero_polynomial_rejected(self):
        zero = poly_new(2, 3, [])
        with pytest.raises(InvalidParameter):
            bh_lower_bound(zero, sup_norm_bivariate(poly_new(2, 3, [((3, 0), 1)])))

    def test_power_one_matches_direct_exactly(self):
        for fam in ("p4", "p5", "p6"):
            spec = FamilySpec(fam)
            assert power_bound(spec, 1).value == bh_lower_bound(
                make_family(spec), certified_norm(spec)
            ).value

    def test_mth_root_consistency(self):
        record = power_bound(FamilySpec("p5"), 4)
        assert abs(record.mth_root**record.m - record.value) <= mpf("1e-12") * record.value

    def test_family_records_at_least_one(self):
        records = [
            power_bound(FamilySpec("p4"), 1),
            power_bound(FamilySpec("p5"), 2),
            power_bound(FamilySpec("p6"), 3),
            p2k_bounds(2),
        ]
        assert all(r.value >= 1 for r in records)

    def test_sextic_quotient_cross_check_at_critical_threshold(self):
        lam = -2 * mpmath.sqrt(5) / 3
        formula = m6_quotient(lam)
        pipeline = power_bound(FamilySpec("qab", {"a": 1, "b": float(lam)}), 1)
        assert abs(formula - pipeline.value) < mpf("1e-9")


class TestQuarticTable:
    def test_small_row(self):
        record, relaxed = estimate_4n(2)
        assert rel_err(record.value, "17.4817") < 5e-4
        assert record.value >= relaxed

    def test_large_row(self):
        record, _ = estimate_4n(100)
        assert rel_err(record.value, "8.8123e70") < 5e-4

    def test_binomial_identity_exact(self):
        for n in range(1, 201):
            assert sum(math.comb(n, k) ** 2 for k in range(n + 1)) == math.comb(2 * n, n)

    def test_matches_expanded_power(self):
        # the closed form uses the exact norm 2*sqrt(3)/9; the pipeline's
        # certificate is evaluated at a float-rounded maximizer, so agreement
        # is to second order rather than bitwise
        for n in (1, 3, 7):
            table = estimate_4n(n)[0]
            expanded = power_bound(FamilySpec("p4"), n)
            assert abs(table.value - expanded.value) <= mpf("1e-25") * table.value

    def test_roots_increase(self):
        roots = [estimate_4n(n)[0].mth_root for n in range(1, 101)]
        assert all(a < b for a, b in zip(roots, roots[1:]))

    def test_stirling_base_and_tail_agreement(self):
        base = stirling_growth_base()
        assert abs(base - mpf("1.5098")) < mpf("1e-4")
        ratio = estimate_4n(100)[0].value / stirling_lower(400)
        assert 1 <= ratio <= mpf("1.05")

    def test_stirling_rejects_bad_degree(self):
        with pytest.raises(InvalidParameter):
            stirling_lower(10)


class TestSearches:
    def test_degree_two(self):
        ex = search_m2()
        assert abs(ex.parameter - mpf("0.8678352808")) < mpf("1e-8")
        assert rel_err(ex.bound, "1.8374") < 5e-4
        assert m2_quotient(1) < ex.bound  # endpoint sanity: 2^(3/4) ~ 1.6818
        assert abs(m2_quotient(1) - mpf(2) ** mpf("0.75")) < mpf("1e-30")

    def test_degree_two_interior_maximum(self):
        ex = search_m2()
        for off in (mpf("-1e-4"), mpf("1e-4")):
            assert m2_quotient(ex.parameter + off) < ex.bound

    def test_branch_boundary_both_routes(self):
        closed = find_b1()
        numeric = find_b1_numeric()
        assert abs(closed - mpf("-1.6692")) < mpf("5e-4")
        assert abs(numeric - mpf("-1.6692")) < mpf("5e-4")
        assert abs(closed - numeric) < mpf("1e-10")

    def test_degree_three(self):
        ex = search_m3()
        assert rel_err(ex.bound, "2.5525") < 5e-4
        assert abs(m3_quotient(0.0 + 1e-12) - mpf(2) ** (mpf(2) / 3) / 2) < mpf("1e-6")
        for off in (mpf("-1e-4"), mpf("1e-4")):
            assert m3_quotient(ex.parameter + off) < ex.bound

    def test_tie_point_roots(self):
        lam0, lam1 = find_lambda01()
        assert abs(lam0 - mpf("-2.2654")) < mpf("5e-4")
        assert abs(lam1 - mpf("-1.6779")) < mpf("5e-4")

    def test_bracket_widening_failure(self):
        from bhbounds.bounds import _bisect

        with pytest.raises(ConvergenceFailure):
            _bisect(lambda x: x * x + 1, mpf(0), mpf(1), mpf("1e-6"))

    def test_degree_six(self):
        ex = search_m6()
        assert rel_err(ex.bound, "10.7809") < 5e-4
        for off in (mpf("-1e-4"), mpf("1e-4")):
            assert m6_quotient(ex.parameter + off) < ex.bound


class TestPowerTables:
    def test_quintic_rows(self):
        assert rel_err(power_bound(FamilySpec("p5"), 2).value, "48.03065") < 5e-4
        assert rel_err(power_bound(FamilySpec("p5"), 1).value, "6.835918785877") < 1e-9

    def test_sextic_rows(self):
        assert rel_err(power_bound(FamilySpec("p6"), 2).value, "144.057") < 5e-4

    def test_recursive_family(self):
        rec2 = p2k_bounds(2)
        assert rel_err(rec2.value, "4.2335") < 5e-4
        assert rel_err(rec2.mth_root, "1.4344") < 1e-4
        assert rel_err(p2k_bounds(3).mth_root, "1.5241") < 1e-4

    def test_recursive_family_cap(self):
        with pytest.raises(InvalidParameter):
            p2k_bounds(6)


class TestScalarBounds:
    def test_contractivity_small_cases(self):
        assert abs(contractivity_dm(2, 3) - mpf(4) ** (mpf(1) / 6)) < mpf("1e-50")
        for m in (1, 2, 5, 17):
            assert contractivity_dm(1, m) == 1

    def test_contractivity_monotone_sample(self):
        values = [contractivity_dm(3, m) for m in (2, 4, 8, 16, 32, 64, 128, 256)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_complex_floor_small_degrees(self):
        expected2 = mpf(6) ** mpf("0.75") / mpmath.sqrt(12)
        assert abs(complex_lower_bound(2) - expected2) < mpf("1e-50")
        assert rel_err(complex_lower_bound(2), "1.1067") < 1e-4
        expected3 = mpf(10) ** (mpf(2) / 3) / mpmath.sqrt(20)
        assert abs(complex_lower_bound(3) - expected3) < mpf("1e-50")
        assert rel_err(complex_lower_bound(3), "1.0379") < 1e-4

    def test_complex_floor_strictly_above_one(self):
        for m in [*range(2, 101), 1000, 10000]:
            assert complex_lower_bound(m) > 1

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            complex_lower_bound(1)
        with pytest.raises(InvalidParameter):
            contractivity_dm(0, 3)


class TestAggregation:
    def test_single_record(self):
        ex = search_m2()
        record = BoundRecord(KIND_POLY_REAL, 2, ex.bound, mpmath.sqrt(ex.bound), ex.family, 1, "search")
        estimate = hyper_aggregate([record])
        assert abs(estimate.h_a_lower - mpf("1.3555")) < mpf("1e-4")
        assert estimate.h_inf_lower_evidence is None

    def test_tail_evidence_from_sextic_powers(self):
        record = power_bound(FamilySpec("p6"), 70)
        estimate = hyper_aggregate([record])
        assert abs(estimate.h_inf_lower_evidence - mpf("1.5828")) < mpf("1e-4")

    def test_rejects_empty_and_foreign_kinds(self):
        with pytest.raises(InvalidParameter):
            hyper_aggregate([])
        bad = BoundRecord("multilinear", 2, mpf(2), mpmath.sqrt(2), None, 1, "x")
        with pytest.raises(InvalidParameter):
            hyper_aggregate([bad])


class TestGrowthExperiment:
    def test_exponent_vanishes_at_dual(self):
        report = ksz_experiment(2, Fraction(4, 3), (4, 8), trials=2, seed=5)
        assert report.theoretical_slope == 0

    def test_exponent_for_l1(self):
        report = ksz_experiment(2, Fraction(1), (4, 8), trials=2, seed=5)
        assert report.theoretical_slope == 0.5
        assert report.n_list == (4, 8)
        assert set(report.mean_log_ratios) == {4, 8}

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            ksz_experiment(2, Fraction(3, 2), (4,), trials=1, seed=0)  # r > 4/3
        with pytest.raises(InvalidParameter):
            ksz_experiment(2, Fraction(1), (), trials=1, seed=0)

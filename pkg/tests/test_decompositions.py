"""Superlevel sets, Whitney families, stopping-cube splits, checkers."""

import math
from fractions import Fraction

import pytest

from tws import conditions as cond
from tws.checks import summability_constant, verify_cz
from tws.corpus import (
    cascade_measure,
    dirac,
    lebesgue_on,
    random_measure,
    random_step_function,
)
from tws.decompositions import (
    CellUnion,
    cz_split,
    first_height,
    good_lambda_check,
    max_principle_check,
    mesh_profile,
    nested_property_violations,
    principal_cubes,
    shifted_whitney_compatibility,
    superlevel_set,
    whitney,
)
from tws.dyadic import SHIFTS
from tws.measures import StepAtomicMeasure, StepFunction, WeightPair
from tws.operators import SearchBudget

BUDGET = SearchBudget(points_per_decade=6, refine_iters=8)


class TestSuperlevelSet:
    def test_zero_measure_empty(self):
        zero = StepAtomicMeasure(0, {})
        assert superlevel_set(zero, 0).is_empty()

    def test_point_mass_closed_form(self):
        # the supremum at x against a unit atom is exactly 1/|x|
        nu = dirac(0.0)
        ms = -4
        om = superlevel_set(nu, 2, mesh_scale=ms, budget=BUDGET)
        width = 2.0**ms
        expect = {
            k for k in range(-200, 200) if abs((k + 0.5) * width) < 2.0**-2
        }
        assert set(om.cells) == expect

    def test_levels_nested(self, rng):
        nu = random_measure(rng, resolution=4, n_atoms=1, spread=2)
        prof = mesh_profile(nu, budget=BUDGET)
        oms = [superlevel_set(nu, k, profile=prof) for k in range(-2, 3)]
        for fine, coarse in zip(oms[1:], oms):
            assert fine.subset_of(coarse)


class TestWhitney:
    def test_open_unit_interval_example(self):
        # omega = (0,1) with constant 3: [3/8, 1/2) qualifies and its parent
        # does not, so it appears among the maximal cubes
        om = CellUnion(-4, tuple(range(16)))
        wd = whitney(om, rw=3.0, n_dilate=3, depth_pad=4)
        spans = {(q.left_fraction(), q.right_fraction()) for q in wd.cubes}
        assert (Fraction(3, 8), Fraction(1, 2)) in spans
        info = wd.verify()
        assert info["overlap_constant"] <= 16

    def test_empty(self):
        wd = whitney(CellUnion(-2, ()))
        assert wd.cubes == []

    def test_each_point_in_one_cube(self, rng):
        om = CellUnion(-4, tuple(range(-8, 20)) + tuple(range(40, 64)))
        wd = whitney(om)
        wd.verify()
        spans = sorted((q.left_fraction(), q.right_fraction()) for q in wd.cubes)
        for (l0, r0), (l1, _) in zip(spans, spans[1:]):
            assert r0 <= l1

    def test_rw_validation(self):
        with pytest.raises(ValueError):
            whitney(CellUnion(-2, (0,)), rw=2.0)
        with pytest.raises(ValueError):
            whitney(CellUnion(-2, (0,)), rw=6.0, n_dilate=9)

    def test_invariants_random_levels(self, rng):
        nu = random_measure(rng, resolution=4, n_atoms=1, spread=2)
        lo, hi = nu.support_bounds()
        prof = mesh_profile(
            nu, budget=BUDGET, window=(lo - 2.0, hi + 2.0)
        )
        vals = sorted(v for v in prof[2] if v > 0)
        k0 = math.floor(math.log2(vals[int(0.6 * len(vals))]))
        wds = []
        for k in (k0, k0 + 1, k0 + 2):
            om = superlevel_set(nu, k, profile=prof)
            if om.is_empty():
                continue
            wd = whitney(om, level=k)
            info = wd.verify()
            assert info["overlap_constant"] <= 64
            wds.append(wd)
        assert nested_property_violations(wds) == []


class TestShiftedCompanions:
    def test_chain_and_comparability(self, rng):
        nu = random_measure(rng, resolution=4, n_atoms=1, spread=2)
        lo, hi = nu.support_bounds()
        prof = mesh_profile(nu, budget=BUDGET, window=(lo - 2.0, hi + 2.0))
        vals = sorted(v for v in prof[2] if v > 0)
        k = math.floor(math.log2(vals[int(0.6 * len(vals))]))
        om = superlevel_set(nu, k, profile=prof)
        info = shifted_whitney_compatibility(om)
        assert info["cubes"] > 0
        assert info["n_required"] <= info["n_bound"]
        lo_r, hi_r = info["comparability"]
        assert 1.0 / 32.0 <= lo_r and hi_r <= 32.0


class TestPrincipalCubes:
    def test_threshold_above_sup_empty(self):
        sigma = lebesgue_on(0.0, 1.0, 3)
        f = StepFunction(0, {0: 1.0})
        assert principal_cubes(f, sigma, 2.0) == []

    def test_spec_example(self):
        sigma = lebesgue_on(0.0, 1.0, 4)
        f = StepFunction(1, {0: 2.0})  # 2 on [0, 1/2)
        cubes = principal_cubes(f, sigma, 1.0)
        assert len(cubes) == 1
        cube, avg = cubes[0]
        assert (cube.left_fraction(), cube.right_fraction()) == (0, Fraction(1, 2))
        assert avg == pytest.approx(2.0)

    def test_threshold_below_global_average_raises(self):
        sigma = lebesgue_on(0.0, 1.0, 3)
        f = StepFunction(0, {0: 4.0})
        with pytest.raises(ValueError):
            principal_cubes(f, sigma, 2.0)


class TestCZSplit:
    def test_spec_example_values(self):
        sigma = lebesgue_on(0.0, 1.0, 4)
        f = StepFunction(1, {0: 2.0})
        dz = cz_split(f, sigma, 2.0, 0)
        assert len(dz.principal) == 1
        cube, avg = dz.principal[0]
        assert avg == pytest.approx(2.0)
        # g equals 2 on the principal cube and the remainder vanishes
        assert dz.good_value(0, 0.25) == pytest.approx(2.0)
        assert dz.bad_value(0, 0.25) == pytest.approx(0.0)
        assert dz.doubling_warning  # restricted Lebesgue is not 2-doubling

    def test_gamma_validation(self):
        sigma = lebesgue_on(0.0, 1.0, 2)
        f = StepFunction(0, {0: 1.0})
        with pytest.raises(ValueError):
            cz_split(f, sigma, 1.5, 0)

    def test_invariants_random(self, rng):
        done = 0
        for _ in range(8):
            sigma = cascade_measure(rng, resolution=5)
            f = random_step_function(rng, sigma, signed=True)
            gamma = max(2.0, cond.doubling_gamma(sigma))
            alpha = SHIFTS[int(rng.integers(0, 3))]
            t = first_height(f, sigma, gamma)
            dz = cz_split(f, sigma, gamma, t, alpha)
            done += 1
            info = verify_cz(dz)
            total = info["total_mass"]
            assert info["identity_ok"]
            assert info["bound_children_ok"]
            assert info["bound_uncovered_ok"]
            assert info["mean_zero_residual"] <= 1e-12 * max(total, 1.0)
            assert not dz.doubling_warning
        assert done == 8

    def test_summability(self, rng):
        for _ in range(4):
            sigma = cascade_measure(rng, resolution=5)
            f = random_step_function(rng, sigma)
            gamma = max(2.0, cond.doubling_gamma(sigma))
            measured, bound = summability_constant(f, sigma, gamma, 2.0)
            assert measured <= bound * (1 + 1e-9)


class TestMaxPrinciple:
    def test_zero_measure_vacuous(self):
        zero = StepAtomicMeasure(0, {})
        om = superlevel_set(zero, 0)
        wd = whitney(om, level=0)
        rep = max_principle_check(zero, wd)
        assert rep["constant"] == 0.0 and rep["per_cube"] == []

    def test_support_inside_triples(self):
        # all mass concentrated at the center: for every Whitney cube of a
        # high level, the triple swallows the support, the restricted
        # measure vanishes, and the excess is nonpositive
        nu = dirac(0.0).plus(dirac(2.0**-6, 1.0))
        om = superlevel_set(nu, 3, mesh_scale=-8, budget=BUDGET)
        wd = whitney(om, level=3)
        rep = max_principle_check(nu, wd, samples_per_cube=2, budget=BUDGET)
        assert rep["constant"] >= 0.0
        assert math.isfinite(rep["constant"])

    def test_random_finite(self, rng):
        nu = random_measure(rng, resolution=4, n_atoms=1, spread=2)
        prof = mesh_profile(nu, budget=BUDGET)
        vals = sorted(v for v in prof[2] if v > 0)
        k = math.floor(math.log2(vals[int(0.7 * len(vals))]))
        om = superlevel_set(nu, k, profile=prof)
        wd = whitney(om, level=k, depth_pad=-2)
        rep = max_principle_check(nu, wd, samples_per_cube=3, budget=BUDGET)
        assert math.isfinite(rep["constant"])
        assert not rep["flagged"]


class TestGoodLambda:
    def test_zero_function(self, rng):
        sigma = lebesgue_on(0.0, 1.0, 3)
        w = WeightPair(sigma, sigma, 2.0)
        f = StepFunction(3, {})
        assert good_lambda_check(w, f, 0.25, 0, budget=BUDGET) == (0.0, 0.0, 0.0)

    def test_huge_beta_reduces_to_superlevel(self, rng):
        sigma = cascade_measure(rng, resolution=4)
        w = WeightPair(sigma, sigma, 2.0)
        f = random_step_function(rng, sigma)
        k = 0
        lhs, term1, term2 = good_lambda_check(w, f, 1e12, k, budget=BUDGET)
        # with the maximal-function constraint vacuous, the left side is the
        # sampled superlevel mass at the doubled threshold
        _, term1_up, _ = good_lambda_check(w, f, 1e12, k + 1, budget=BUDGET)
        assert lhs == pytest.approx(term1_up, rel=1e-12)
        assert term2 > 0.0

    def test_monitored_combination(self, rng):
        sigma = cascade_measure(rng, resolution=4)
        w = WeightPair(sigma, cascade_measure(rng, resolution=4), 2.0)
        f = random_step_function(rng, sigma)
        for beta in (0.25, 0.0625):
            lhs, term1, term2 = good_lambda_check(w, f, beta, 0, budget=BUDGET)
            assert lhs <= term1 + 1e-12
            assert math.isfinite(term2)

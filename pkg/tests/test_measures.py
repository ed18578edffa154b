"""Measure algebra: exact masses, tail-kernel integrals, serialization."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tws.corpus import dirac, lebesgue_on, random_measure
from tws.measures import (
    AtomOnBoundaryError,
    Interval,
    PointTooCloseError,
    StepAtomicMeasure,
    StepFunction,
    WeightPair,
    hilbert_off_support,
    integrate_inverse_square,
    integrate_power_kernel,
    mass,
)


def fraction_mass_oracle(mu: StepAtomicMeasure, a: float, b: float) -> Fraction:
    """Independent cell-by-cell exact-rational summation."""
    total = Fraction(0)
    af, bf = Fraction(a), Fraction(b)
    for l, r, w in zip(mu.seg_left, mu.seg_right, mu.seg_weight):
        lo, hi = max(af, Fraction(float(l))), min(bf, Fraction(float(r)))
        if lo < hi:
            total += Fraction(float(w)) * (hi - lo)
    for x, m in zip(mu.atom_x, mu.atom_m):
        if af <= Fraction(float(x)) < bf:
            total += Fraction(float(m))
    return total


class TestMass:
    def test_uniform_density(self):
        leb = lebesgue_on(0.0, 1.0, resolution=4)
        assert mass(leb, Interval(0.0, 0.5)) == 0.5

    def test_half_open_atom_convention(self):
        d = dirac(0.0, 1.0)
        assert mass(d, Interval(0.0, 1.0)) == 1.0
        assert mass(d, Interval(-1.0, 0.0)) == 0.0

    def test_partial_cell_overlap(self):
        # density 2 on [0, 1/2), zero elsewhere
        mu = StepAtomicMeasure(1, {0: 2.0})
        v = mass(mu, Interval(0.25, 0.75))
        assert v == 0.5
        assert Fraction(v) == fraction_mass_oracle(mu, 0.25, 0.75)

    def test_fraction_endpoints(self):
        mu = lebesgue_on(0.0, 2.0, resolution=2)
        assert mu.mass_fraction(Fraction(1, 3), Fraction(2, 3)) == pytest.approx(
            1.0 / 3.0, abs=1e-15
        )

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_additivity_bit_exact(self, seed):
        r = np.random.default_rng(seed)
        mu = random_measure(r, resolution=6, n_atoms=2)
        lo, hi = mu.support_bounds()
        width = 2.0**-mu.resolution
        k0, k1 = math.floor(lo / width) - 1, math.ceil(hi / width) + 1
        a, m, b = sorted(r.choice(np.arange(k0, k1 + 1), 3, replace=False))
        a, m, b = a * width, m * width, b * width
        assert mu.mass_ab(a, b) == mu.mass_ab(a, m) + mu.mass_ab(m, b)

    def test_restrict_and_complement_partition(self, rng):
        mu = random_measure(rng, resolution=5, n_atoms=2)
        inner = mu.restrict(0.0, 1.0)
        outer = mu.restrict_outside(0.0, 1.0)
        assert inner.total_mass() + outer.total_mass() == pytest.approx(
            mu.total_mass(), rel=1e-14
        )


class TestPowerKernel:
    def test_saturating_window_analytic(self):
        # analytic value: ∫ (1/(1+|u|))^2 du over the whole line is 2, so a
        # window much longer than q gives 2|q| up to the O(|q|/T) tail
        T = 1024.0
        q = Interval(-0.5, 0.5)
        v = integrate_power_kernel(lebesgue_on(-T, T), q, 2.0)
        exact = 2.0 * (1.0 - 1.0 / (1.0 + T))
        assert v == pytest.approx(exact, rel=1e-8)
        assert v == pytest.approx(2.0, rel=2e-3)

    def test_atom_at_center(self):
        q = Interval(1.0, 3.0)
        assert integrate_power_kernel(dirac(2.0, 5.0), q, 3.3) == pytest.approx(5.0)

    def test_atom_one_length_away(self):
        q = Interval(-0.5, 0.5)
        # s = |q|/(|q| + |q|) = 1/2, squared is 1/4
        v = integrate_power_kernel(dirac(q.center() + q.length(), 2.0), q, 2.0)
        assert v == pytest.approx(0.5)

    def test_exponent_validation(self):
        with pytest.raises(ValueError):
            integrate_power_kernel(dirac(0.0), Interval(0.0, 1.0), 1.0)

    def test_midpoint_oracle(self, rng):
        worst = 0.0
        for _ in range(3):
            mu = random_measure(rng, resolution=5, n_atoms=1)
            q = Interval(-1.0, 1.5)
            e = float(rng.uniform(1.5, 3.0))
            v = integrate_power_kernel(mu, q, e)
            ref = _midpoint_power(mu, q, e, 2.0**-20)
            worst = max(worst, abs(v - ref) / abs(ref))
        assert worst < 1e-6

    def test_monotone_in_measure_and_mass_bounded(self, rng):
        mu = random_measure(rng, resolution=5)
        q = Interval(-1.0, 1.0)
        v = integrate_power_kernel(mu, q, 2.0)
        assert v <= mu.total_mass() + 1e-12
        bigger = mu.plus(dirac(0.125, 3.0))
        assert integrate_power_kernel(bigger, q, 2.0) >= v


def _midpoint_power(mu, q, e, step):
    h, c = q.length(), q.center()
    total = 0.0
    for l, r, w in zip(mu.seg_left, mu.seg_right, mu.seg_weight):
        n = max(1, int(round((r - l) / step)))
        ys = np.linspace(l, r, n, endpoint=False) + (r - l) / n / 2.0
        total += float(w) * (r - l) / n * float(
            np.sum((h / (h + np.abs(ys - c))) ** e)
        )
    for x, m in zip(mu.atom_x, mu.atom_m):
        total += float(m) * (h / (h + abs(float(x) - c))) ** e
    return total


class TestInverseSquare:
    def test_single_atom(self):
        assert integrate_inverse_square(dirac(2.0), Interval(-1.0, 1.0)) == 0.25

    def test_antiderivative(self):
        # ∫_2^3 z^-2 dz = 1/2 - 1/3
        v = integrate_inverse_square(lebesgue_on(2.0, 3.0), Interval(-1.0, 1.0))
        assert v == pytest.approx(1.0 / 6.0, rel=1e-14)

    def test_supported_inside(self):
        v = integrate_inverse_square(lebesgue_on(-0.5, 0.5, 1), Interval(-1.0, 1.0))
        assert v == 0.0

    def test_atom_on_boundary_rejected(self):
        with pytest.raises(AtomOnBoundaryError):
            integrate_inverse_square(dirac(1.0), Interval(-1.0, 1.0))


class TestHilbertOffSupport:
    def test_atom(self):
        assert hilbert_off_support(dirac(2.0), 0.0, 1.0) == -0.5

    def test_log_antiderivative(self):
        v = hilbert_off_support(lebesgue_on(1.0, 2.0), 0.0, 0.5)
        assert v == pytest.approx(-math.log(2.0), rel=1e-14)

    def test_odd_cancellation(self):
        sym = lebesgue_on(1.0, 2.0).plus(lebesgue_on(-2.0, -1.0))
        assert abs(hilbert_off_support(sym, 0.0, 0.5)) < 1e-15

    def test_too_close_rejected(self):
        with pytest.raises(PointTooCloseError):
            hilbert_off_support(lebesgue_on(0.0, 1.0), 1.1, 0.5)

    def test_paper_orientation_increasing(self, rng):
        # mass left of the window: x -> -H(x) increases across it
        mu = random_measure(rng, resolution=5, spread=2)
        _, hi = mu.support_bounds()
        xs = (hi + 0.5, hi + 1.0, hi + 3.0)
        vals = [-hilbert_off_support(mu, x, 0.25) for x in xs]
        assert vals[0] <= vals[1] <= vals[2]


class TestSerialization:
    def test_roundtrip(self, rng):
        mu = random_measure(rng, resolution=5, n_atoms=2)
        text = json.dumps(mu.to_json_dict())
        back = StepAtomicMeasure.from_json(text)
        assert back.cells == mu.cells
        assert np.array_equal(back.atom_x, mu.atom_x)
        assert np.array_equal(back.atom_m, mu.atom_m)

    @pytest.mark.parametrize(
        "doc",
        [
            {"resolution": 0, "cells": [{"k": 0, "w": float("nan")}]},
            {"resolution": 0, "cells": [{"k": 0, "w": float("inf")}]},
            {"resolution": 0, "atoms": [{"x": float("inf"), "m": 1.0}]},
            {"resolution": 0, "cells": [{"k": 0}]},
            {"cells": []},
        ],
    )
    def test_invalid_rejected(self, doc):
        with pytest.raises(ValueError):
            StepAtomicMeasure.from_json_dict(doc)

    def test_unsigned_negative_rejected(self):
        with pytest.raises(ValueError):
            StepAtomicMeasure(0, {0: -1.0})


class TestWeightPair:
    def test_exponent_conjugate(self):
        leb = lebesgue_on(0.0, 1.0)
        w = WeightPair(leb, leb, 1.5)
        assert 1.0 / w.p + 1.0 / w.p_conj == pytest.approx(1.0)

    def test_exponent_validation(self):
        leb = lebesgue_on(0.0, 1.0)
        with pytest.raises(ValueError):
            WeightPair(leb, leb, 1.0)

    def test_common_point_mass_report(self):
        a = StepAtomicMeasure(0, {}, [(0.5, 1.0)])
        b = StepAtomicMeasure(0, {}, [(0.5, 2.0), (0.75, 1.0)])
        w = WeightPair(a, b, 2.0)
        assert w.common_point_masses() == [0.5]
        with pytest.raises(ValueError):
            w.require_no_common_point_masses()


class TestStepFunction:
    def test_product_with_measure(self):
        leb = lebesgue_on(0.0, 1.0, 2)
        f = StepFunction(1, {0: 3.0})  # 3 on [0, 1/2)
        fs = f.times_measure(leb)
        assert fs.total_mass() == pytest.approx(1.5)
        assert fs.mass_ab(0.0, 0.25) == pytest.approx(0.75)

    def test_lp_norm(self):
        leb = lebesgue_on(0.0, 1.0, 1)
        f = StepFunction(1, {0: 2.0, 1: -2.0})
        assert f.lp_norm(2.0, leb) == pytest.approx(2.0)
        assert f.sup_norm() == 2.0

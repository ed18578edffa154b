"""Shifted grids: location, selection, covering lemma."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tws.dyadic import (
    SHIFTS,
    DyadicInterval,
    besicovitch_maximal,
    locate,
    max_overlap,
    select_shifted_grid,
)
from tws.measures import Interval


class TestLocate:
    def test_unit_cube(self):
        assert locate(0, 0.7, 0).interval().as_tuple() == (0.0, 1.0)

    def test_shifted_unit_cube(self):
        # enumeration oracle: scan k until the cube contains 0
        alpha = Fraction(1, 3)
        found = None
        for k in range(-3, 4):
            c = DyadicInterval(0, k, alpha)
            if c.contains_point(0):
                found = c
                break
        q = locate(alpha, 0.0, 0)
        assert q == found
        assert (q.left_fraction(), q.right_fraction()) == (
            Fraction(-2, 3),
            Fraction(1, 3),
        )

    def test_fine_scale(self):
        assert locate(0, 0.7, -2).interval().as_tuple() == (0.5, 0.75)

    @given(
        st.floats(-64, 64, allow_nan=False),
        st.integers(-8, 8),
        st.sampled_from([0, 1, 2]),
    )
    @settings(max_examples=150, deadline=None)
    def test_membership(self, x, j, ai):
        q = locate(SHIFTS[ai], x, j)
        assert q.contains_point(x)


class TestGridStructure:
    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=100, deadline=None)
    def test_grid_property(self, seed):
        r = np.random.default_rng(seed)
        alpha = SHIFTS[int(r.integers(0, 3))]
        q1 = locate(alpha, float(r.uniform(-8, 8)), int(r.integers(-6, 7)))
        q2 = locate(alpha, float(r.uniform(-8, 8)), int(r.integers(-6, 7)))
        lo = max(q1.left_fraction(), q2.left_fraction())
        hi = min(q1.right_fraction(), q2.right_fraction())
        if lo < hi:  # they intersect: one contains the other
            assert q1.contains(q2) or q2.contains(q1)

    def test_parent_contains_and_doubles(self):
        for ai in range(3):
            q = locate(SHIFTS[ai], 0.37, -4)
            p = q.parent()
            assert p.contains(q)
            assert p.length_fraction() == 2 * q.length_fraction()

    def test_children_partition(self):
        for ai in range(3):
            q = locate(SHIFTS[ai], -1.21, 2)
            a, b = q.children()
            assert a.right_fraction() == b.left_fraction()
            assert a.left_fraction() == q.left_fraction()
            assert b.right_fraction() == q.right_fraction()

    @given(st.integers(0, 4), st.integers(0, 4))
    @settings(max_examples=30, deadline=None)
    def test_ancestor_composition(self, l1, l2):
        q = locate(Fraction(1, 3), 0.11, -6)
        assert q.ancestor(l1 + l2) == q.ancestor(l1).ancestor(l2)


class TestSelectShiftedGrid:
    def test_small_interval(self):
        gs = select_shifted_grid(Interval(0.4, 0.6))
        # 3q = [0.3, 0.7) fits in the plain unit cube; nothing smaller works
        assert gs.size_ratio <= 5.0 + 1e-9

    def test_unit_interval(self):
        # exhaustive-scan oracle over shifts, scales, and positions
        gs = select_shifted_grid(Interval(0.0, 1.0))
        assert gs.size_ratio <= 8.0 + 1e-12
        best = None
        for ai, alpha in enumerate(SHIFTS):
            for j in range(2, 6):
                for k in range(-20, 20):
                    c = DyadicInterval(j, k, alpha)
                    if c.left_fraction() <= -1 and 2 <= c.right_fraction():
                        key = (c.length_fraction(), ai, c.left_fraction())
                        if best is None or key < best:
                            best = key
        assert gs.hat.length_fraction() == best[0]

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=100, deadline=None)
    def test_containment_postcondition(self, seed):
        r = np.random.default_rng(seed)
        a, b = sorted(r.uniform(-32, 32, 2))
        if not b > a:
            return
        q = Interval(float(a), float(b))
        gs = select_shifted_grid(q)
        lf, rf = Fraction(q.left), Fraction(q.right)
        c = (lf + rf) / 2
        h3 = 3 * (rf - lf) / 2
        assert gs.hat.left_fraction() <= c - h3
        assert c + h3 <= gs.hat.right_fraction()
        assert math.isfinite(gs.dilation_bound)

    def test_dilation_statistics(self, rng):
        worst = 0.0
        for _ in range(2000):
            a, b = sorted(rng.uniform(-16, 16, 2))
            if not b > a:
                continue
            worst = max(worst, select_shifted_grid(Interval(a, b)).size_ratio)
        assert math.isfinite(worst)
        # the three-shift construction never needs more than a fixed blowup
        assert worst <= 32.0


class TestBesicovitch:
    def test_spec_pair(self):
        a = DyadicInterval(0, 0)  # [0,1): triple [-1, 2)
        b = DyadicInterval(-1, 0)  # [0,1/2): triple [-1/2, 1)
        assert besicovitch_maximal([a, b], 3) == [a]

    def test_single_cube(self):
        a = DyadicInterval(2, 5, Fraction(1, 3))
        assert besicovitch_maximal([a], 3) == [a]

    def test_even_dilation_rejected(self):
        with pytest.raises(ValueError):
            besicovitch_maximal([DyadicInterval(0, 0)], 2)

    def test_mixed_grids_rejected(self):
        with pytest.raises(ValueError):
            besicovitch_maximal(
                [DyadicInterval(0, 0), DyadicInterval(0, 0, Fraction(1, 3))], 3
            )

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=60, deadline=None)
    def test_overlap_bound(self, seed):
        r = np.random.default_rng(seed)
        alpha = SHIFTS[int(r.integers(0, 3))]
        cubes = [
            locate(alpha, float(r.uniform(-8, 8)), int(r.integers(-6, 4)))
            for _ in range(14)
        ]
        kept = besicovitch_maximal(cubes, 3)
        spans = [c.dilate_fractions(3) for c in kept]
        # exact sweep equals counting on any mesh finer than the arrangement
        assert max_overlap(spans) <= 3
        # every dropped cube's dilate sits inside a kept larger dilate
        for c in cubes:
            if c in kept:
                continue
            lo, hi = c.dilate_fractions(3)
            assert any(
                s[0] <= lo and hi <= s[1] for k, s in zip(kept, spans) if k.j > c.j
            )

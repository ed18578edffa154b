"""Shifted dyadic grids on the line, grid selection, and the covering lemma
for maximal dilates.

A grid cube at scale j with shift alpha is 2^j (k + [0,1) + (-1)^j alpha),
alpha in {0, 1/3, 2/3}.  Endpoints involve thirds, so all comparisons run
through exact rationals of the form (a + b/3) 2^j; nothing is decided in
binary64.  The alternating sign on the shift is what prevents boundary
points from persisting across scales for every shift simultaneously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .measures import Interval

SHIFTS = (Fraction(0), Fraction(1, 3), Fraction(2, 3))


def _pow2(j: int) -> Fraction:
    return Fraction(2) ** j


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """Grid cube 2^j (k + [0,1) + (-1)^j alpha); length 2^j."""

    j: int
    k: int
    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        if self.alpha not in SHIFTS:
            raise ValueError(f"shift must be one of {SHIFTS}")

    # exact geometry -----------------------------------------------------
    def left_fraction(self) -> Fraction:
        sign = -1 if self.j % 2 else 1
        return _pow2(self.j) * (self.k + sign * self.alpha)

    def right_fraction(self) -> Fraction:
        return self.left_fraction() + _pow2(self.j)

    def length_fraction(self) -> Fraction:
        return _pow2(self.j)

    def center_fraction(self) -> Fraction:
        return self.left_fraction() + _pow2(self.j) / 2

    def interval(self) -> Interval:
        """Float realization (thirds round to nearest binary64)."""
        return Interval(float(self.left_fraction()), float(self.right_fraction()))

    def length(self) -> float:
        return float(self.length_fraction())

    def contains_point(self, x: Fraction | float) -> bool:
        x = Fraction(x)
        return self.left_fraction() <= x < self.right_fraction()

    def contains(self, other: "DyadicInterval") -> bool:
        return (
            self.left_fraction() <= other.left_fraction()
            and other.right_fraction() <= self.right_fraction()
        )

    # grid structure -----------------------------------------------------
    def parent(self) -> "DyadicInterval":
        """Unique grid member at scale j+1 containing this cube.

        Inverts the child index formula k_child = 2 k_parent +- 3 alpha + b
        with b in {0, 1}; pure integer arithmetic (3 alpha is an integer).
        """
        sign = -1 if self.j % 2 else 1
        kp = (self.k + sign * int(3 * self.alpha)) >> 1
        return DyadicInterval(self.j + 1, kp, self.alpha)

    def ancestor(self, ell: int) -> "DyadicInterval":
        """ell-th ancestor: length 2^ell times this one, containing it."""
        if ell < 0:
            raise ValueError("ancestor level must be nonnegative")
        q = self
        for _ in range(ell):
            q = q.parent()
        return q

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        sign = -1 if self.j % 2 else 1
        k0 = 2 * self.k + sign * int(3 * self.alpha)
        return (
            DyadicInterval(self.j - 1, k0, self.alpha),
            DyadicInterval(self.j - 1, k0 + 1, self.alpha),
        )

    def dilate_fractions(self, m: int) -> tuple[Fraction, Fraction]:
        """Endpoints of the concentric m-fold dilate."""
        c = self.center_fraction()
        h = m * _pow2(self.j) / 2
        return (c - h, c + h)


def locate(alpha: Fraction | float, point: float | Fraction, scale: int) -> DyadicInterval:
    """The unique grid member at the given scale containing the point."""
    alpha = Fraction(alpha)
    sign = -1 if scale % 2 else 1
    k = math.floor(Fraction(point) / _pow2(scale) - sign * alpha)
    q = DyadicInterval(scale, k, alpha)
    assert q.contains_point(point)
    return q


@dataclass(frozen=True)
class GridSelection:
    """Chosen shift and covering cube for a base interval.

    hat contains the triple of base; dilation_bound is the smallest M with
    hat contained in the concentric M-dilate of base.
    """

    base: Interval
    alpha: Fraction
    hat: DyadicInterval
    dilation_bound: float

    @property
    def size_ratio(self) -> float:
        return self.hat.length() / self.base.length()


def select_shifted_grid(q: Interval, max_extra_scales: int = 16) -> GridSelection:
    """Smallest shifted-grid cube containing the triple of q.

    Scans each of the three shifts upward in scale from the first scale that
    could fit 3q, keeping the smallest qualifying cube; ties break by shift
    order 0 < 1/3 < 2/3 and then by leftmost position.  A qualifying cube
    always exists among the three shifts.
    """
    lf = Fraction(q.left)
    rf = Fraction(q.right)
    c = (lf + rf) / 2
    h3 = 3 * (rf - lf) / 2
    left3, right3 = c - h3, c + h3
    jmin = math.ceil(math.log2(float(3 * (rf - lf))))
    best: tuple | None = None
    for ai, alpha in enumerate(SHIFTS):
        for j in range(jmin, jmin + max_extra_scales + 1):
            cube = locate(alpha, left3, j)
            if cube.right_fraction() >= right3:
                key = (cube.length_fraction(), ai, cube.left_fraction())
                if best is None or key < best[0]:
                    best = (key, alpha, cube)
                break
    if best is None:
        raise RuntimeError("no qualifying shifted cube found; raise max_extra_scales")
    _, alpha, cube = best
    m = 2 * max(abs(cube.left_fraction() - c), abs(cube.right_fraction() - c)) / (rf - lf)
    return GridSelection(base=q, alpha=alpha, hat=cube, dilation_bound=float(m))


def besicovitch_maximal(cubes: list[DyadicInterval], m: int) -> list[DyadicInterval]:
    """Maximal elements among the m-fold dilates of grid cubes.

    Keeps the cubes whose dilate is not strictly contained in a larger
    listed dilate; the surviving dilates overlap at most m times (covering
    lemma for dilates of grid cubes).  m must be an odd positive integer and
    all cubes must come from one grid.
    """
    if m <= 0 or m % 2 == 0:
        raise ValueError("dilation factor must be an odd positive integer")
    if not cubes:
        return []
    alpha = cubes[0].alpha
    for c in cubes:
        if c.alpha != alpha:
            raise ValueError("all cubes must come from a single grid")
    uniq = sorted(set(cubes), key=lambda c: (-c.j, c.left_fraction()))
    spans = [c.dilate_fractions(m) for c in uniq]
    out = []
    for i, (ci, si) in enumerate(zip(uniq, spans)):
        dominated = False
        for jx, (cj, sj) in enumerate(zip(uniq, spans)):
            if jx == i or cj.j <= ci.j:
                continue
            if sj[0] <= si[0] and si[1] <= sj[1]:
                dominated = True
                break
        if not dominated:
            out.append(ci)
    return out


def max_overlap(spans: list[tuple[Fraction, Fraction]]) -> int:
    """Peak number of half-open spans covering a single point (exact sweep)."""
    events: list[tuple[Fraction, int]] = []
    for lo, hi in spans:
        events.append((lo, 1))
        events.append((hi, -1))
    # closings at a point take effect before openings: half-open intervals
    events.sort(key=lambda e: (e[0], e[1]))
    depth = 0
    peak = 0
    for _, d in events:
        depth += d
        peak = max(peak, depth)
    return peak

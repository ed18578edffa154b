"""Poisson-type tail functionals of a measure relative to an interval, and
the positive linear operators assembled from them.

All the annular/ancestor series terminate exactly: once a dilate or an
ancestor swallows the (bounded) support, the remaining terms either vanish
(annuli) or sum to a closed-form geometric tail (saturated ancestors), so no
truncation tolerance is involved anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dyadic import DyadicInterval
from .measures import Interval, StepAtomicMeasure

__all__ = [
    "DiniModulus",
    "LINEAR_MODULUS",
    "PartitionData",
    "poisson_bold",
    "poisson_std",
    "poisson_dyadic",
    "poisson_redef",
    "poisson_operator_apply",
    "pjk_operator",
    "leftmost_max_subcube",
]


@dataclass(frozen=True)
class DiniModulus:
    """Modulus of continuity with a finite Dini integral.

    Either the linear modulus s -> s (Dini integral exactly 1) or a sampled
    nondecreasing table on [0, 1] with delta(0) = 0, validated by a Riemann
    sum of delta(s)/s.
    """

    kind: str = "linear"
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "linear":
            return
        if self.kind != "table":
            raise ValueError("kind must be 'linear' or 'table'")
        pts = sorted(self.table)
        if not pts or pts[0][0] != 0.0 or pts[0][1] != 0.0:
            raise ValueError("table modulus must start at (0, 0)")
        prev = -math.inf
        for _, v in pts:
            if v < prev:
                raise ValueError("modulus must be nondecreasing")
            prev = v
        if not math.isfinite(self.dini_integral()):
            raise ValueError("Dini integral diverges")

    def __call__(self, s: float) -> float:
        if self.kind == "linear":
            return max(0.0, s)
        pts = sorted(self.table)
        if s <= 0.0:
            return 0.0
        if s >= pts[-1][0]:
            return pts[-1][1]
        for (a, va), (b, vb) in zip(pts, pts[1:]):
            if a <= s <= b:
                if b == a:
                    return vb
                return va + (vb - va) * (s - a) / (b - a)
        return pts[-1][1]

    def dini_integral(self) -> float:
        """∫_0^1 delta(s)/s ds; exact for the linear kind."""
        if self.kind == "linear":
            return 1.0
        total = 0.0
        n = 4096
        for i in range(1, n + 1):
            s = i / n
            total += self(s) / s * (1.0 / n)
        return total


LINEAR_MODULUS = DiniModulus()


@dataclass(frozen=True)
class PartitionData:
    """A root grid cube and pairwise disjoint grid subcubes inside it."""

    root: DyadicInterval
    pieces: tuple[DyadicInterval, ...]

    def __post_init__(self):
        for p in self.pieces:
            if p.alpha != self.root.alpha:
                raise ValueError("pieces must live in the root's grid")
            if not self.root.contains(p):
                raise ValueError(f"piece {p} escapes the root")
        spans = sorted((p.left_fraction(), p.right_fraction()) for p in self.pieces)
        for (l0, r0), (l1, _) in zip(spans, spans[1:]):
            if r0 > l1:
                raise ValueError("pieces overlap")

    def piece_containing(self, x: float) -> DyadicInterval | None:
        xf = Fraction(x)
        for p in self.pieces:
            if p.left_fraction() <= xf < p.right_fraction():
                return p
        return None


def _abs_measure(nu: StepAtomicMeasure) -> StepAtomicMeasure:
    return nu.absolute() if nu.signed else nu


def poisson_bold(
    q: Interval, nu: StepAtomicMeasure, delta: DiniModulus = LINEAR_MODULUS
) -> float:
    """Inner average plus modulus-weighted annular averages of |nu|.

    (1/|q|) |nu|(q) + sum_l delta(2^-l) |nu|(2^{l+1}q \\ 2^l q) / |2^{l+1}q|;
    the series stops as soon as a dilate swallows the support (later annuli
    are empty), so the value is an exact finite sum.
    """
    anu = _abs_measure(nu)
    if anu.is_zero():
        return 0.0
    qlen = q.length()
    total = anu.mass(q) / qlen
    bounds = anu.support_bounds()
    inner = q
    prev_mass = anu.mass(q)
    level = 0
    while True:
        if inner.left <= bounds[0] and bounds[1] < inner.right:
            break
        outer = q.dilate(float(2 ** (level + 1)))
        outer_mass = anu.mass(outer)
        ring = outer_mass - prev_mass
        if ring != 0.0:
            total += delta(2.0**-level) * ring / outer.length()
        inner = outer
        prev_mass = outer_mass
        level += 1
        if level > 1100:  # support is bounded; this cannot happen
            raise RuntimeError("annular series failed to terminate")
    return total


def poisson_std(q: Interval, nu: StepAtomicMeasure) -> float:
    """Linear-modulus Poisson tail: sum_l 2^-l |nu|(2^l q) / |2^l q|.

    Terms with saturated dilates collapse to the closed-form geometric tail
    (4/3) 4^-L |nu| / |q|.
    """
    anu = _abs_measure(nu)
    if anu.is_zero():
        return 0.0
    qlen = q.length()
    bounds = anu.support_bounds()
    total = 0.0
    level = 0
    dilate = q
    while True:
        if dilate.left <= bounds[0] and bounds[1] < dilate.right:
            total += (4.0 / 3.0) * 4.0**-level * anu.total_mass() / qlen
            return total
        total += 4.0**-level * anu.mass(dilate) / qlen
        level += 1
        dilate = q.dilate(float(2**level))
        if level > 1100:
            raise RuntimeError("dilate series failed to terminate")


def ancestors_saturated(cube: DyadicInterval, lo: Fraction, hi: Fraction) -> bool:
    """True when no later ancestor of the cube can gain [lo, hi]-mass.

    An ancestor edge either passes the corresponding hull endpoint or is
    pinned; the only pinned edge in these grids is the point 0 of the
    unshifted grid (shifted edges never stabilize).
    """
    pinned_left = cube.alpha == 0 and cube.left_fraction() == 0
    pinned_right = cube.alpha == 0 and cube.right_fraction() == 0
    left_ok = cube.left_fraction() <= lo or pinned_left
    right_ok = hi < cube.right_fraction() or pinned_right
    return left_ok and right_ok


def poisson_dyadic(i: DyadicInterval, nu: StepAtomicMeasure) -> float:
    """Grid Poisson tail over ancestors: sum_l 2^-l nu(i^(l)) / |i^(l)|."""
    if nu.signed:
        raise ValueError("grid Poisson tail requires an unsigned measure")
    if nu.is_zero():
        return 0.0
    bounds = nu.support_bounds()
    lo = Fraction(bounds[0])
    hi = Fraction(bounds[1])
    total = 0.0
    cube = i
    ilen = i.length()
    level = 0
    while True:
        if ancestors_saturated(cube, lo, hi):
            # every later ancestor carries the same mass as this one
            m = nu.mass_fraction(cube.left_fraction(), cube.right_fraction())
            total += (4.0 / 3.0) * 4.0**-level * m / ilen
            return total
        m = nu.mass_fraction(cube.left_fraction(), cube.right_fraction())
        total += 4.0**-level * m / ilen
        cube = cube.parent()
        level += 1
        if level > 1100:
            raise RuntimeError("ancestor series failed to terminate")


def poisson_redef(i: Interval, nu: StepAtomicMeasure) -> float:
    """Inner average plus half-length-weighted inverse-square tail.

    (1/|i|) nu(i) + (|i|/2) ∫_{R \\ i} |z - center|^-2 dnu(z), the tail in
    closed form; comparable to the linear-modulus Poisson tail.
    """
    from .measures import integrate_inverse_square

    return nu.mass(i) / i.length() + 0.5 * i.length() * integrate_inverse_square(
        nu, i
    )


def poisson_operator_apply(
    parts: PartitionData, nu: StepAtomicMeasure, x: float
) -> float:
    """Value at x of the positive linear operator sum_r P(q_r, nu) chi_{q_r}."""
    piece = parts.piece_containing(x)
    if piece is None:
        return 0.0
    return poisson_std(piece.interval(), nu)


def pjk_operator(
    e_set: Sequence[Interval],
    pieces: Sequence[DyadicInterval],
    mu: StepAtomicMeasure,
    x: float,
    delta: DiniModulus = LINEAR_MODULUS,
) -> float:
    """Annular Poisson operator of mu restricted to a union of intervals.

    sum_r bold(g_r, chi_E mu) chi_{g_r}(x) over disjoint grid pieces g_r.
    """
    restricted = None
    for e in e_set:
        part = mu.restrict(e.left, e.right)
        restricted = part if restricted is None else restricted.plus(part)
    if restricted is None or restricted.is_zero():
        return 0.0
    xf = Fraction(x)
    total = 0.0
    for g in pieces:
        if g.left_fraction() <= xf < g.right_fraction():
            total += poisson_bold(g.interval(), restricted, delta)
    return total


def leftmost_max_subcube(q: Interval, alpha: Fraction | float) -> DyadicInterval:
    """Largest grid interval inside q, leftmost among equals.

    There are at most two grid intervals of the maximal length inside any
    interval; ties are broken to the left.
    """
    alpha = Fraction(alpha)
    lf, rf = Fraction(q.left), Fraction(q.right)
    j = math.floor(math.log2(q.length())) + 1
    for _ in range(200):
        width = Fraction(2) ** j
        sign = -1 if j % 2 else 1
        k_lo = math.ceil(lf / width - sign * alpha)
        cand = DyadicInterval(j, k_lo, alpha)
        if cand.right_fraction() <= rf:
            return cand
        j -= 1
    raise RuntimeError("no grid subinterval found (degenerate interval?)")

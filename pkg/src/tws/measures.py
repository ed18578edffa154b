"""Exact locally finite measures on the line: dyadic step densities plus atoms.

A measure is a finite list of constant-density segments (cells of a dyadic
lattice at a fixed resolution, or clipped pieces of such cells) together with
a finite list of point masses.  All intervals and cells are half-open
``[a, b)``; an atom sitting exactly on a queried boundary belongs to the
interval on its right.  With weights that are dyadic rationals of bounded
precision, every mass query over dyadic endpoints is carried out without any
rounding, which is what makes the additivity and doubling bookkeeping
downstream exact rather than approximate.

Integration of the smooth tail kernels is split by route:

* piecewise-rational integrands with elementary antiderivatives
  (``integrate_inverse_square``, ``hilbert_off_support``) are evaluated in
  closed form,
* the power tail-kernel (``integrate_power_kernel``) goes through adaptive
  Simpson quadrature with the kink of the integrand inserted as a panel
  boundary, at relative tolerance 1e-9 and maximum depth 40.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Interval",
    "StepAtomicMeasure",
    "StepFunction",
    "WeightPair",
    "QuadratureError",
    "AtomOnBoundaryError",
    "PointTooCloseError",
    "mass",
    "integrate_power_kernel",
    "integrate_inverse_square",
    "hilbert_off_support",
]

QUAD_RTOL = 1e-9
QUAD_MAX_DEPTH = 40


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to meet tolerance; carries the estimate."""

    def __init__(self, achieved: float):
        super().__init__(f"quadrature tolerance not met (achieved ~{achieved:.3e})")
        self.achieved = achieved


class AtomOnBoundaryError(ValueError):
    pass


class PointTooCloseError(ValueError):
    pass


def _require_finite(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class Interval:
    """Half-open interval [left, right) with positive length."""

    left: float
    right: float

    def __post_init__(self):
        _require_finite(self.left, "left")
        _require_finite(self.right, "right")
        if not self.left < self.right:
            raise ValueError(f"degenerate interval [{self.left}, {self.right})")

    def center(self) -> float:
        return 0.5 * (self.left + self.right)

    def length(self) -> float:
        return self.right - self.left

    def contains(self, x: float) -> bool:
        return self.left <= x < self.right

    def contains_interval(self, other: "Interval") -> bool:
        return self.left <= other.left and other.right <= self.right

    def dilate(self, factor: float) -> "Interval":
        """Concentric dilate: same center, length scaled by ``factor``."""
        c = self.center()
        h = 0.5 * factor * self.length()
        return Interval(c - h, c + h)

    def intersects(self, other: "Interval") -> bool:
        return self.left < other.right and other.left < self.right

    def as_tuple(self) -> tuple[float, float]:
        return (self.left, self.right)


def _merge_sorted_segments(segs: list[tuple[float, float, float]]):
    """Merge adjacent equal-density segments; drop zero-weight ones."""
    out: list[tuple[float, float, float]] = []
    for seg in segs:
        l, r, w = seg
        if w == 0.0 or l >= r:
            continue
        if out and out[-1][1] == l and out[-1][2] == w:
            out[-1] = (out[-1][0], r, w)
        else:
            out.append((l, r, w))
    return out


class StepAtomicMeasure:
    """A measure with a piecewise-constant density plus finitely many atoms.

    Canonical construction is from dyadic cells at a fixed resolution ``L``
    (cell ``k`` is ``[k 2^-L, (k+1) 2^-L)`` with density value ``w``); clipped
    variants produced by :meth:`restrict` keep exact segment endpoints but no
    longer align with the lattice.
    """

    __slots__ = (
        "resolution",
        "signed",
        "seg_left",
        "seg_right",
        "seg_weight",
        "atom_x",
        "atom_m",
        "_prefix_seg",
        "_prefix_atom",
        "_cells",
    )

    def __init__(
        self,
        resolution: int,
        cells: Mapping[int, float] | Iterable[tuple[int, float]] = (),
        atoms: Iterable[tuple[float, float]] = (),
        signed: bool = False,
    ):
        self.resolution = int(resolution)
        self.signed = bool(signed)
        items = cells.items() if isinstance(cells, Mapping) else cells
        width = 2.0 ** (-self.resolution)
        cell_map: dict[int, float] = {}
        for k, w in items:
            w = _require_finite(w, "cell weight")
            if w == 0.0:
                continue
            if not signed and w < 0:
                raise ValueError("unsigned measure with negative cell weight")
            cell_map[int(k)] = cell_map.get(int(k), 0.0) + w
        segs = [(k * width, (k + 1) * width, w) for k, w in sorted(cell_map.items())]
        self._cells = dict(sorted(cell_map.items()))
        self._init_from_segments(segs, atoms)

    @classmethod
    def from_segments(
        cls,
        segments: Sequence[tuple[float, float, float]],
        atoms: Iterable[tuple[float, float]] = (),
        signed: bool = False,
        resolution: int = 0,
    ) -> "StepAtomicMeasure":
        """Build directly from disjoint density segments (clipped cells)."""
        self = cls.__new__(cls)
        self.resolution = int(resolution)
        self.signed = bool(signed)
        self._cells = {}
        segs = sorted((float(l), float(r), float(w)) for l, r, w in segments)
        for l, r, w in segs:
            _require_finite(w, "segment weight")
            if not signed and w < 0:
                raise ValueError("unsigned measure with negative density")
        self._init_from_segments(segs, atoms)
        return self

    def _init_from_segments(self, segs, atoms):
        segs = _merge_sorted_segments(sorted(segs))
        for (l0, r0, _), (l1, _, _) in zip(segs, segs[1:]):
            if r0 > l1:
                raise ValueError("overlapping density segments")
        atom_list: list[tuple[float, float]] = []
        for x, m in atoms:
            x = _require_finite(x, "atom position")
            m = _require_finite(m, "atom mass")
            if m == 0.0:
                continue
            if not self.signed and m < 0:
                raise ValueError("unsigned measure with negative atom mass")
            atom_list.append((x, m))
        atom_list.sort()
        for (x0, _), (x1, _) in zip(atom_list, atom_list[1:]):
            if x0 == x1:
                raise ValueError("duplicate atom positions")
        self.seg_left = np.array([s[0] for s in segs], dtype=np.float64)
        self.seg_right = np.array([s[1] for s in segs], dtype=np.float64)
        self.seg_weight = np.array([s[2] for s in segs], dtype=np.float64)
        self.atom_x = np.array([a[0] for a in atom_list], dtype=np.float64)
        self.atom_m = np.array([a[1] for a in atom_list], dtype=np.float64)
        # prefix[i] = mass of the first i segments / atoms, summed left to right
        self._prefix_seg = np.concatenate(
            ([0.0], np.cumsum(self.seg_weight * (self.seg_right - self.seg_left)))
        )
        self._prefix_atom = np.concatenate(([0.0], np.cumsum(self.atom_m)))

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    @property
    def cells(self) -> dict[int, float]:
        return dict(self._cells)

    def is_zero(self) -> bool:
        return self.seg_left.size == 0 and self.atom_x.size == 0

    def total_mass(self) -> float:
        return float(self._prefix_seg[-1] + self._prefix_atom[-1])

    def total_variation(self) -> float:
        return float(
            np.sum(np.abs(self.seg_weight) * (self.seg_right - self.seg_left))
            + np.sum(np.abs(self.atom_m))
        )

    def support_bounds(self) -> tuple[float, float] | None:
        """(lo, hi) hull of the support; possibly degenerate (single atom)."""
        lo = math.inf
        hi = -math.inf
        if self.seg_left.size:
            lo = min(lo, float(self.seg_left[0]))
            hi = max(hi, float(self.seg_right[-1]))
        if self.atom_x.size:
            lo = min(lo, float(self.atom_x[0]))
            hi = max(hi, float(self.atom_x[-1]))
        if lo > hi:
            return None
        return (lo, hi)

    def support(self) -> Interval | None:
        """Smallest interval carrying all mass, widened if degenerate."""
        bounds = self.support_bounds()
        if bounds is None:
            return None
        lo, hi = bounds
        if lo == hi:  # single atom
            pad = 2.0 ** (-self.resolution - 1)
            return Interval(lo - pad, hi + pad)
        return Interval(lo, hi)

    def distance_to_support(self, x: float) -> float:
        d = math.inf
        for l, r in zip(self.seg_left, self.seg_right):
            if x < l:
                d = min(d, l - x)
            elif x > r:
                d = min(d, x - r)
            else:
                return 0.0
        for a in self.atom_x:
            d = min(d, abs(x - a))
        return d

    def atom_at(self, x: float) -> float:
        i = np.searchsorted(self.atom_x, x)
        if i < self.atom_x.size and self.atom_x[i] == x:
            return float(self.atom_m[i])
        return 0.0

    # ------------------------------------------------------------------
    # mass
    # ------------------------------------------------------------------
    def mass_ab(self, a: float, b: float) -> float:
        """Measure of [a, b); exact when a, b avoid segment interiors."""
        if b <= a:
            return 0.0
        sl, sr, sw = self.seg_left, self.seg_right, self.seg_weight
        i0 = int(np.searchsorted(sr, a, side="right"))
        i1 = int(np.searchsorted(sl, b, side="left"))
        total = 0.0
        full_lo, full_hi = i0, i1
        # shave partial overlaps at the two ends
        if i0 < i1 and sl[i0] < a:
            total += sw[i0] * (min(b, sr[i0]) - a)
            full_lo = i0 + 1
        if full_lo < i1 and sr[i1 - 1] > b:
            total += sw[i1 - 1] * (b - max(a, sl[i1 - 1]))
            full_hi = i1 - 1
        if full_lo < full_hi:
            total += float(self._prefix_seg[full_hi] - self._prefix_seg[full_lo])
        j0 = int(np.searchsorted(self.atom_x, a, side="left"))
        j1 = int(np.searchsorted(self.atom_x, b, side="left"))
        total += float(self._prefix_atom[j1] - self._prefix_atom[j0])
        return total

    def mass(self, q: Interval) -> float:
        return self.mass_ab(q.left, q.right)

    def mass_fraction(self, a: Fraction, b: Fraction) -> float:
        """Measure of [a, b) for exact rational endpoints.

        Overlaps are accumulated in exact rational arithmetic and rounded
        once at the end; used by the shifted-grid machinery whose cube
        endpoints involve thirds.
        """
        if b <= a:
            return 0.0
        af, bf = float(a), float(b)
        # floats under- / over-shoot by at most one ulp; pad the scan range
        i0 = max(0, int(np.searchsorted(self.seg_right, af, side="left")) - 1)
        i1 = min(
            self.seg_left.size,
            int(np.searchsorted(self.seg_left, bf, side="right")) + 1,
        )
        total = Fraction(0)
        for i in range(i0, i1):
            lo = max(a, Fraction(float(self.seg_left[i])))
            hi = min(b, Fraction(float(self.seg_right[i])))
            if lo < hi:
                total += Fraction(float(self.seg_weight[i])) * (hi - lo)
        j0 = max(0, int(np.searchsorted(self.atom_x, af, side="left")) - 1)
        j1 = min(
            self.atom_x.size,
            int(np.searchsorted(self.atom_x, bf, side="right")) + 1,
        )
        for j in range(j0, j1):
            if a <= Fraction(float(self.atom_x[j])) < b:
                total += Fraction(float(self.atom_m[j]))
        return float(total)

    # ------------------------------------------------------------------
    # derived measures
    # ------------------------------------------------------------------
    def restrict(self, a: float, b: float) -> "StepAtomicMeasure":
        """Restriction to [a, b); clips straddling segments exactly."""
        segs = []
        for l, r, w in zip(self.seg_left, self.seg_right, self.seg_weight):
            lo, hi = max(l, a), min(r, b)
            if lo < hi:
                segs.append((lo, hi, w))
        atoms = [
            (x, m) for x, m in zip(self.atom_x, self.atom_m) if a <= x < b
        ]
        return StepAtomicMeasure.from_segments(
            segs, atoms, signed=self.signed, resolution=self.resolution
        )

    def restrict_outside(self, a: float, b: float) -> "StepAtomicMeasure":
        """Restriction to the complement of [a, b)."""
        segs = []
        for l, r, w in zip(self.seg_left, self.seg_right, self.seg_weight):
            if l < a:
                segs.append((l, min(r, a), w))
            if r > b:
                segs.append((max(l, b), r, w))
        atoms = [
            (x, m)
            for x, m in zip(self.atom_x, self.atom_m)
            if not (a <= x < b)
        ]
        return StepAtomicMeasure.from_segments(
            segs, atoms, signed=self.signed, resolution=self.resolution
        )

    def scaled(self, c: float) -> "StepAtomicMeasure":
        segs = [
            (l, r, w * c)
            for l, r, w in zip(self.seg_left, self.seg_right, self.seg_weight)
        ]
        atoms = [(x, m * c) for x, m in zip(self.atom_x, self.atom_m)]
        return StepAtomicMeasure.from_segments(
            segs, atoms, signed=self.signed or c < 0, resolution=self.resolution
        )

    def absolute(self) -> "StepAtomicMeasure":
        segs = [
            (l, r, abs(w))
            for l, r, w in zip(self.seg_left, self.seg_right, self.seg_weight)
        ]
        atoms = [(x, abs(m)) for x, m in zip(self.atom_x, self.atom_m)]
        return StepAtomicMeasure.from_segments(
            segs, atoms, signed=False, resolution=self.resolution
        )

    def plus(self, other: "StepAtomicMeasure") -> "StepAtomicMeasure":
        """Sum measure; requires compatible (non-interleaved) segments."""
        segs = list(zip(self.seg_left, self.seg_right, self.seg_weight))
        cuts = sorted(
            set(np.concatenate([self.seg_left, self.seg_right, other.seg_left, other.seg_right]).tolist())
        )

        def density(measure, x):
            i = int(np.searchsorted(measure.seg_right, x, side="right"))
            if i < measure.seg_left.size and measure.seg_left[i] <= x:
                return float(measure.seg_weight[i])
            return 0.0

        segs = []
        for lo, hi in zip(cuts, cuts[1:]):
            mid = 0.5 * (lo + hi)
            w = density(self, mid) + density(other, mid)
            if w != 0.0:
                segs.append((lo, hi, w))
        atom_map: dict[float, float] = {}
        for x, m in zip(self.atom_x, self.atom_m):
            atom_map[float(x)] = atom_map.get(float(x), 0.0) + float(m)
        for x, m in zip(other.atom_x, other.atom_m):
            atom_map[float(x)] = atom_map.get(float(x), 0.0) + float(m)
        return StepAtomicMeasure.from_segments(
            segs,
            sorted(atom_map.items()),
            signed=self.signed or other.signed,
            resolution=max(self.resolution, other.resolution),
        )

    # ------------------------------------------------------------------
    # serialization (external interface)
    # ------------------------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "cells": [{"k": int(k), "w": float(w)} for k, w in sorted(self._cells.items())],
            "atoms": [
                {"x": float(x), "m": float(m)}
                for x, m in zip(self.atom_x, self.atom_m)
            ],
            "signed": self.signed,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "StepAtomicMeasure":
        try:
            resolution = int(d["resolution"])
            raw_cells = d.get("cells", [])
            raw_atoms = d.get("atoms", [])
            signed = bool(d.get("signed", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed measure object: {exc}") from exc
        cells = []
        for i, c in enumerate(raw_cells):
            try:
                k, w = int(c["k"]), float(c["w"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed cell entry #{i}: {exc}") from exc
            if not math.isfinite(w):
                raise ValueError(f"cell entry #{i}: non-finite weight {w!r}")
            cells.append((k, w))
        atoms = []
        for i, a in enumerate(raw_atoms):
            try:
                x, m = float(a["x"]), float(a["m"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed atom entry #{i}: {exc}") from exc
            if not (math.isfinite(x) and math.isfinite(m)):
                raise ValueError(f"atom entry #{i}: non-finite value")
            atoms.append((x, m))
        return cls(resolution, cells, atoms, signed=signed)

    @classmethod
    def from_json(cls, text: str) -> "StepAtomicMeasure":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self):
        return (
            f"StepAtomicMeasure(L={self.resolution}, segments={self.seg_left.size}, "
            f"atoms={self.atom_x.size}, signed={self.signed})"
        )


class StepFunction:
    """Piecewise-constant function on the dyadic lattice at resolution L.

    Zero outside its listed cells.  Used for the densities f in f·sigma and
    for the bounded test functions fed to the testing functionals.
    """

    __slots__ = ("resolution", "values")

    def __init__(self, resolution: int, values: Mapping[int, float]):
        self.resolution = int(resolution)
        self.values = {
            int(k): _require_finite(v, "step value")
            for k, v in values.items()
            if v != 0.0
        }

    def __call__(self, x: float) -> float:
        k = math.floor(x * 2.0**self.resolution)
        return self.values.get(k, 0.0)

    def cell_interval(self, k: int) -> Interval:
        width = 2.0 ** (-self.resolution)
        return Interval(k * width, (k + 1) * width)

    def sup_norm(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def abs(self) -> "StepFunction":
        return StepFunction(self.resolution, {k: abs(v) for k, v in self.values.items()})

    def shift_value(self, c: float) -> "StepFunction":
        return StepFunction(self.resolution, {k: v + c for k, v in self.values.items()})

    def scale(self, c: float) -> "StepFunction":
        return StepFunction(self.resolution, {k: c * v for k, v in self.values.items()})

    def restrict(self, a: float, b: float) -> "StepFunction":
        width = 2.0 ** (-self.resolution)
        vals = {
            k: v
            for k, v in self.values.items()
            if k * width >= a and (k + 1) * width <= b
        }
        return StepFunction(self.resolution, vals)

    def times_measure(self, mu: StepAtomicMeasure) -> StepAtomicMeasure:
        """The measure f·mu (signed whenever f takes negative values)."""
        width = 2.0 ** (-self.resolution)
        segs = []
        for l, r, w in zip(mu.seg_left, mu.seg_right, mu.seg_weight):
            k0 = math.floor(l * 2.0**self.resolution)
            k1 = math.ceil(r * 2.0**self.resolution)
            for k in range(k0, k1):
                cl, cr = max(l, k * width), min(r, (k + 1) * width)
                if cl >= cr:
                    continue
                v = self.values.get(k, 0.0)
                if v != 0.0:
                    segs.append((cl, cr, v * w))
        atoms = []
        for x, m in zip(mu.atom_x, mu.atom_m):
            v = self(float(x))
            if v != 0.0:
                atoms.append((float(x), v * float(m)))
        return StepAtomicMeasure.from_segments(
            segs,
            atoms,
            signed=True,
            resolution=max(mu.resolution, self.resolution),
        )

    def lp_norm(self, p: float, sigma: StepAtomicMeasure) -> float:
        """(∫ |f|^p dsigma)^(1/p)."""
        total = 0.0
        width = 2.0 ** (-self.resolution)
        for k, v in sorted(self.values.items()):
            if v == 0.0:
                continue
            total += abs(v) ** p * sigma.mass_ab(k * width, (k + 1) * width)
        return total ** (1.0 / p)

    def integral(self, sigma: StepAtomicMeasure) -> float:
        total = 0.0
        width = 2.0 ** (-self.resolution)
        for k, v in sorted(self.values.items()):
            total += v * sigma.mass_ab(k * width, (k + 1) * width)
        return total

    def support_cells(self) -> list[int]:
        return sorted(self.values)

    def abs_sup_on(self, lo: Fraction, hi: Fraction) -> float:
        """sup of |f| over [lo, hi) (cells are half-open at resolution)."""
        width = Fraction(2) ** -self.resolution
        best = 0.0
        for k, v in self.values.items():
            if k * width < hi and lo < (k + 1) * width:
                best = max(best, abs(v))
        return best


@dataclass(frozen=True)
class WeightPair:
    """An input weight sigma, an output weight omega, and the exponent p."""

    sigma: StepAtomicMeasure
    omega: StepAtomicMeasure
    p: float

    def __post_init__(self):
        if self.sigma.signed or self.omega.signed:
            raise ValueError("weights must be unsigned")
        if not 1.0 < self.p < math.inf:
            raise ValueError(f"exponent must lie in (1, inf), got {self.p}")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    def common_point_masses(self) -> list[float]:
        """Positions carrying an atom of both weights."""
        out = []
        for x, m in zip(self.sigma.atom_x, self.sigma.atom_m):
            if m != 0.0 and self.omega.atom_at(float(x)) != 0.0:
                out.append(float(x))
        return out

    def require_no_common_point_masses(self):
        shared = self.common_point_masses()
        if shared:
            raise ValueError(f"weights share point masses at {shared}")


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------
def mass(mu: StepAtomicMeasure, q: Interval) -> float:
    """Exact measure of the half-open interval q."""
    return mu.mass(q)


def _adaptive_simpson(f, a, b, rtol, worst):
    """Recursive Simpson; returns integral, updates worst[0] with the largest

    unresolved local error ratio seen at the depth cap."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, fa, m, fm, b, fb, whole, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        scale = abs(left + right) + 1e-300
        if abs(err) <= 15.0 * rtol * scale or depth >= QUAD_MAX_DEPTH:
            if depth >= QUAD_MAX_DEPTH and abs(err) > 15.0 * rtol * scale:
                # unresolved local error as a multiple of the tolerance
                worst[0] = max(worst[0], abs(err) / scale / 15.0 / rtol)
            return left + right + err / 15.0
        return rec(a, fa, lm, flm, m, fm, left, depth + 1) + rec(
            m, fm, rm, frm, b, fb, right, depth + 1
        )

    return rec(a, fa, m, fm, b, fb, whole, 0)


def integrate_power_kernel(
    mu: StepAtomicMeasure, q: Interval, exponent: float
) -> float:
    """∫ (|q| / (|q| + |x - c|))^exponent dmu(x), c the center of q.

    Atoms contribute exactly; density segments are integrated by adaptive
    Simpson with the kink at c split out.  Raises QuadratureError if the
    tolerance cannot be certified.
    """
    if not exponent > 1.0:
        raise ValueError("exponent must exceed 1")
    from . import backend

    h = q.length()
    c = q.center()
    total, worst = backend.power_tail_segments(
        mu.seg_left, mu.seg_right, mu.seg_weight, c, h, exponent, QUAD_RTOL
    )
    for x, m in zip(mu.atom_x, mu.atom_m):
        total += float(m) * (h / (h + abs(float(x) - c))) ** exponent
    if worst > 1.0:
        raise QuadratureError(worst * QUAD_RTOL)
    return total


def integrate_inverse_square(mu: StepAtomicMeasure, i: Interval) -> float:
    """∫_{R \\ i} |z - center(i)|^-2 dmu(z), in closed form.

    The antiderivative of (z-c)^-2 is -(z-c)^-1 on each side of c; atoms on
    the boundary of i are rejected.
    """
    c = i.center()
    for x in mu.atom_x:
        if float(x) == i.left or float(x) == i.right:
            raise AtomOnBoundaryError(f"atom on boundary of {i}")
    # antiderivative of (z-c)^-2 is -(z-c)^-1; clipped segments never
    # contain c, so the formula below is uniform on either side
    total = 0.0
    for l, r, w in zip(mu.seg_left, mu.seg_right, mu.seg_weight):
        for lo, hi in ((l, min(r, i.left)), (max(l, i.right), r)):
            if lo < hi:
                total += w * (1.0 / (lo - c) - 1.0 / (hi - c))
    for x, m in zip(mu.atom_x, mu.atom_m):
        x = float(x)
        if x < i.left or x >= i.right:
            total += float(m) / (x - c) ** 2
    return total


def hilbert_off_support(mu: StepAtomicMeasure, x: float, gap: float) -> float:
    """∫ (x - z)^-1 dmu(z) for x at distance >= gap from the support.

    Closed form: atoms give m/(x-z), density segments give
    w·log|(x-l)/(x-r)|.
    """
    if not gap > 0.0:
        raise ValueError("gap must be positive")
    if mu.distance_to_support(x) < gap:
        raise PointTooCloseError(f"x={x} closer than gap={gap} to the support")
    total = 0.0
    for l, r, w in zip(mu.seg_left, mu.seg_right, mu.seg_weight):
        total += w * math.log(abs((x - l) / (x - r)))
    for z, m in zip(mu.atom_x, mu.atom_m):
        total += float(m) / (x - float(z))
    return total

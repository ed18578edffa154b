"""Whitney decompositions of superlevel sets, stopping-cube splits at
geometric heights, and the two empirical checkers built on them (the
localized maximum principle and the good-lambda inequality).

Superlevel sets of the maximal truncation are center-sampled on a dyadic
mesh two scales finer than the measure resolution by default; everything
derived from them is mesh-relative, and the mesh scale travels with the
object.  Whitney and stopping-cube families are truncated at a configurable
depth below the mesh/step resolution; the ideal families are infinite near
boundaries, and the truncation slivers are certified in the verifiers
rather than ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from typing import Sequence

from .dyadic import DyadicInterval, locate, max_overlap
from .measures import Interval, StepAtomicMeasure, StepFunction, WeightPair
from .operators import SearchBudget, DEFAULT_BUDGET, t_natural, maximal_fn
from .poisson import DiniModulus, LINEAR_MODULUS, poisson_bold

__all__ = [
    "CellUnion",
    "WhitneyDecomposition",
    "CZDecomposition",
    "mesh_profile",
    "superlevel_set",
    "whitney",
    "shifted_whitney_compatibility",
    "principal_cubes",
    "first_height",
    "cz_split",
    "max_principle_check",
    "good_lambda_check",
    "nested_property_violations",
]


@dataclass(frozen=True)
class CellUnion:
    """Union of half-open mesh cells [k 2^scale, (k+1) 2^scale)."""

    scale: int
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted(set(self.cells))))

    def is_empty(self) -> bool:
        return not self.cells

    def runs(self) -> list[tuple[Fraction, Fraction]]:
        """Connected components as exact rational intervals (cached)."""
        cached = getattr(self, "_runs", None)
        if cached is not None:
            return cached
        width = Fraction(2) ** self.scale
        out: list[tuple[Fraction, Fraction]] = []
        for k in self.cells:
            lo = k * width
            hi = lo + width
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
        object.__setattr__(self, "_runs", out)
        return out

    def contains_span(self, lo: Fraction, hi: Fraction) -> bool:
        """Containment in the open interior of a run.

        The union approximates an open superlevel set, so run edges are
        excluded: [lo, hi) fits a run (a, b) iff a < lo and hi <= b.
        """
        for a, b in self.runs():
            if a < lo and hi <= b:
                return True
        return False

    def measure(self) -> float:
        return len(self.cells) * 2.0**self.scale

    def subset_of(self, other: "CellUnion") -> bool:
        if self.scale == other.scale:
            return set(self.cells) <= set(other.cells)
        return all(other.contains_span(a, b) for a, b in self.runs())


def mesh_profile(
    nu: StepAtomicMeasure,
    mesh_scale: int | None = None,
    budget: SearchBudget = DEFAULT_BUDGET,
    window: tuple[float, float] | None = None,
    max_cells: int = 200_000,
) -> tuple[int, list[int], list[float]]:
    """Maximal-truncation values at mesh-cell centers over a window.

    Default mesh is two scales finer than the measure resolution.  The
    window defaults to the support hull; superlevel extraction widens it per
    level using the exact bound T(x) <= |nu|(R) / dist(x, supp nu).
    Returns (mesh_scale, cell_indices, values).
    """
    if mesh_scale is None:
        mesh_scale = -(nu.resolution + 2)
    bounds = nu.support_bounds()
    if bounds is None:
        return mesh_scale, [], []
    if window is None:
        lo, hi = bounds
    else:
        lo, hi = window
    width = 2.0**mesh_scale
    if hi - lo < 2.0 * width:  # degenerate window (single atom): pad it
        lo, hi = lo - width, hi + width
    k0 = math.floor(lo / width)
    k1 = math.ceil(hi / width)
    if k1 - k0 > max_cells:
        raise ValueError(f"mesh window needs {k1 - k0} cells (cap {max_cells})")
    ks = list(range(k0, k1))
    vals = [t_natural(nu, (k + 0.5) * width, budget) for k in ks]
    return mesh_scale, ks, vals


def superlevel_set(
    nu: StepAtomicMeasure,
    k_level: int,
    mesh_scale: int | None = None,
    budget: SearchBudget = DEFAULT_BUDGET,
    profile: tuple[int, list[int], list[float]] | None = None,
    max_cells: int = 200_000,
) -> CellUnion:
    """Center-sampled superlevel set {T nu > 2^k} as a mesh-cell union.

    Outside dist(x, supp) <= |nu|(R) 2^-k the level cannot be exceeded, so
    the scan window is finite and rigorous; inside it the set is sampled at
    cell centers.  A precomputed profile (from mesh_profile over the same
    window logic) lets several levels share one scan.
    """
    thr = 2.0**k_level
    if profile is not None:
        ms, ks, vals = profile
        return CellUnion(ms, tuple(k for k, v in zip(ks, vals) if v > thr))
    bounds = nu.support_bounds()
    if bounds is None:
        return CellUnion(mesh_scale if mesh_scale is not None else 0, ())
    reach = nu.total_variation() / thr
    window = (bounds[0] - reach, bounds[1] + reach)
    ms, ks, vals = mesh_profile(nu, mesh_scale, budget, window, max_cells)
    return CellUnion(ms, tuple(k for k, v in zip(ks, vals) if v > thr))


@dataclass
class WhitneyDecomposition:
    """Maximal grid cubes whose rw-dilates sit inside the open set.

    Constructed down to min_scale; the uncovered part of omega is certified
    to lie within (rw+1)/2 * 2^min_scale of the complement.
    """

    omega: CellUnion
    cubes: list[DyadicInterval]
    rw: float
    n_dilate: int
    alpha: Fraction
    min_scale: int
    level: int | None = None
    constants: dict = field(default_factory=dict)

    def verify(self) -> dict:
        """Measured Whitney constants; raises AssertionError on violations."""
        runs = self.omega.runs()
        rwf = Fraction(self.rw)
        nf = Fraction(self.n_dilate)
        spans = []
        for q in self.cubes:
            lo, hi = q.left_fraction(), q.right_fraction()
            spans.append((lo, hi))
        spans.sort()
        for (l0, r0), (l1, _) in zip(spans, spans[1:]):
            assert r0 <= l1, "whitney cubes overlap"
        # cubes and their rw/3rw dilates
        for q in self.cubes:
            c = q.center_fraction()
            h = q.length_fraction() / 2
            in_lo, in_hi = c - rwf * h, c + rwf * h
            assert self.omega.contains_span(in_lo, in_hi), "rw-dilate escapes omega"
            out_lo, out_hi = c - 3 * rwf * h, c + 3 * rwf * h
            assert not self.omega.contains_span(out_lo, out_hi), (
                "3rw-dilate stays inside omega"
            )
            if self.n_dilate <= self.rw:
                assert self.omega.contains_span(c - nf * h, c + nf * h)
        # cover up to the certified boundary sliver
        sliver = Fraction(self.rw + 1) / 2 * Fraction(2) ** self.min_scale
        uncovered = 0.0
        for a, b in runs:
            inside = [(l, r) for (l, r) in spans if a <= l and r <= b]
            cursor = a
            gaps = []
            for l, r in inside:
                if l > cursor:
                    gaps.append((cursor, l))
                cursor = r
            if cursor < b:
                gaps.append((cursor, b))
            for g0, g1 in gaps:
                uncovered += float(g1 - g0)
                mid = (a + b) / 2
                t = min(max(g0, mid), g1)
                depth = min(t - a, b - t)
                assert depth <= sliver, (
                    f"uncovered point at depth {float(depth)} > sliver {float(sliver)}"
                )
        # bounded overlap of the n-dilates, and crowd control; counting runs
        # on sorted float endpoints (grid geometry never lands within one
        # ulp, so the counts match the exact comparisons)
        ndil = [q.dilate_fractions(self.n_dilate) for q in self.cubes]
        overlap = max_overlap(ndil)
        lefts = np.array([float(l) for l, _ in spans])
        rights = np.array([float(r) for _, r in spans])
        crowd = 0
        for lo_i, hi_i in ndil:
            # cubes q with q.left < hi_i and lo_i < q.right
            count = int(np.searchsorted(lefts, float(hi_i), side="left")) - int(
                np.searchsorted(rights, float(lo_i), side="right")
            )
            crowd = max(crowd, count)
        out = {
            "cube_count": len(self.cubes),
            "overlap_constant": overlap,
            "crowd_constant": crowd,
            "uncovered_length": uncovered,
            "sliver_bound": float(sliver),
        }
        self.constants.update(out)
        return out


def whitney(
    omega: CellUnion,
    rw: float = 12.0,
    alpha: Fraction | float = 0,
    n_dilate: int = 9,
    depth_pad: int = 6,
    level: int | None = None,
) -> WhitneyDecomposition:
    """Maximal grid cubes q with the rw-dilate of q inside omega.

    Descends from a covering scale to omega.scale - depth_pad; every emitted
    cube is maximal because the search only recurses through non-qualifying
    cubes.  rw >= 3 and n_dilate <= rw are required so the dilate chain of
    the second Whitney property closes.
    """
    if rw < 3.0:
        raise ValueError("whitney constant must be at least 3")
    if n_dilate < 3 or n_dilate > rw:
        raise ValueError("crowd dilate must satisfy 3 <= n <= rw")
    alpha = Fraction(alpha)
    if omega.is_empty():
        return WhitneyDecomposition(omega, [], rw, n_dilate, alpha, omega.scale, level)
    runs = omega.runs()
    lo = runs[0][0]
    hi = runs[-1][1]
    extent = float(hi - lo)
    top = max(omega.scale + 1, math.ceil(math.log2(extent)) + 1)
    min_scale = omega.scale - depth_pad
    rwf = Fraction(rw)
    cubes: list[DyadicInterval] = []
    k_start = locate(alpha, lo, top).k
    k_end = locate(alpha, hi, top).k
    stack = [DyadicInterval(top, k, alpha) for k in range(k_start, k_end + 1)]
    while stack:
        q = stack.pop()
        ql, qr = q.left_fraction(), q.right_fraction()
        # prune: no descendant can qualify if q misses omega entirely
        if not any(a < qr and ql < b for a, b in runs):
            continue
        c = q.center_fraction()
        h = q.length_fraction() / 2
        if omega.contains_span(c - rwf * h, c + rwf * h):
            cubes.append(q)
            continue
        if q.j > min_scale:
            stack.extend(q.children())
    cubes.sort(key=lambda q: q.left_fraction())
    return WhitneyDecomposition(omega, cubes, rw, n_dilate, alpha, min_scale, level)


def shifted_whitney_compatibility(omega: CellUnion, depth_pad: int = 8) -> dict:
    """Verify the shifted companion chain on a Whitney family of omega.

    For every cube q of a plain-grid family, select the shifted covering
    cube (the smallest grid cube over the three shifts containing the
    triple of q) and locate the member of the shifted-grid Whitney family
    (with constant rw/M) that contains it.  The verified chain is

        3q  in  hat(q)  in  tilde(q)  in  3 tilde(q)  in  N q,

    with M the largest selection dilation over the family; the content of
    the chain is that one N depending only on M closes it for every cube,
    so the checker measures the required N and asserts it stays below the
    geometric bound 20 ceil(M)+1.  Cross-grid side lengths of companions
    are also checked comparable.  Returns the measured constants; raises
    on violations.
    """
    from .dyadic import select_shifted_grid

    # fixpoint for the dilation bound: the plain constant must dominate
    # 3 + something proportional to M before the chain can close
    rw = 12.0
    m_univ = 1.0
    for _ in range(4):
        wd = whitney(omega, rw=rw, n_dilate=9, depth_pad=depth_pad)
        if not wd.cubes:
            return {"cubes": 0}
        sels = [select_shifted_grid(q.interval()) for q in wd.cubes]
        m_new = max(max(gs.dilation_bound for gs in sels), 1.0)
        rw_new = max(12.0, 10.0 * math.ceil(m_new))
        if rw_new <= rw and m_new <= m_univ + 1e-12:
            m_univ = max(m_univ, m_new)
            break
        rw, m_univ = rw_new, m_new
    rw_shift = rw / math.ceil(m_univ)
    shifted = {
        alpha: whitney(omega, rw=rw_shift, alpha=alpha, n_dilate=3,
                       depth_pad=depth_pad)
        for alpha in set(gs.alpha for gs in sels)
    }
    n_required = 3
    cmp_lo, cmp_hi = math.inf, 0.0
    for q, gs in zip(wd.cubes, sels):
        hat = gs.hat
        # triple of q inside hat: guaranteed by the selector, re-verified
        c = q.center_fraction()
        h3 = 3 * q.length_fraction() / 2
        if not (hat.left_fraction() <= c - h3 and c + h3 <= hat.right_fraction()):
            raise AssertionError("triple escapes the selected shifted cube")
        tilde = None
        for b in shifted[gs.alpha].cubes:
            if b.left_fraction() <= hat.left_fraction() and hat.right_fraction() <= b.right_fraction():
                tilde = b
                break
        if tilde is None:
            raise AssertionError("no shifted Whitney companion contains the hat")
        # smallest dilate of q swallowing the triple of tilde
        off = abs(tilde.center_fraction() - c)
        need = (2 * off + 3 * tilde.length_fraction()) / q.length_fraction()
        n_required = max(n_required, math.ceil(need))
        ratio = float(q.length_fraction() / tilde.length_fraction())
        cmp_lo, cmp_hi = min(cmp_lo, ratio), max(cmp_hi, ratio)
    n_bound = 20 * math.ceil(m_univ) + 1
    if n_required > n_bound:
        raise AssertionError(
            f"chain dilate N={n_required} exceeds the geometric bound {n_bound}"
        )
    if not (1.0 / 32.0 <= cmp_lo and cmp_hi <= 32.0):
        raise AssertionError(f"companion side lengths not comparable: "
                             f"[{cmp_lo}, {cmp_hi}]")
    return {
        "cubes": len(wd.cubes),
        "dilation_bound": m_univ,
        "rw": rw,
        "n_required": n_required,
        "n_bound": n_bound,
        "comparability": (cmp_lo, cmp_hi),
    }


def nested_property_violations(
    decomps: Sequence[WhitneyDecomposition],
) -> list[tuple]:
    """Pairs violating: strict containment implies strictly higher level.

    Containment between cubes of one grid is an ancestor relation, so each
    lower-level cube walks its ancestor chain against an index of the
    higher-level family instead of scanning all pairs.
    """
    bad = []
    for wa in decomps:
        for wb in decomps:
            if wa.level is None or wb.level is None or wa.level >= wb.level:
                continue
            if not wb.cubes:
                continue
            index = {(q.j, q.k) for q in wb.cubes}
            top = max(q.j for q in wb.cubes)
            # wa at the lower level: its cubes may not sit strictly inside
            # a cube of the higher level wb
            if wb.alpha != wa.alpha:  # cross-grid: geometric fallback
                for qa in wa.cubes:
                    for qb in wb.cubes:
                        if qb.contains(qa) and qb.length_fraction() > qa.length_fraction():
                            bad.append((wa.level, qa, wb.level, qb))
                continue
            for qa in wa.cubes:
                cube = qa
                while cube.j < top:
                    cube = cube.parent()
                    if (cube.j, cube.k) in index:
                        bad.append((wa.level, qa, wb.level, cube))
                        break
    return bad


def principal_cubes(
    f: StepFunction,
    sigma: StepAtomicMeasure,
    threshold: float,
    alpha: Fraction | float = 0,
    depth_pad: int = 8,
) -> list[tuple[DyadicInterval, float]]:
    """Maximal grid cubes whose sigma-average of |f| exceeds the threshold.

    Exact for the aligned grid (averages stabilize at the step resolution);
    for shifted grids the descent is truncated depth_pad scales below the
    resolution and deeper sliver cubes are dropped.  Raises when the
    threshold does not exceed the top-level averages (no maximal cube would
    exist).
    """
    alpha = Fraction(alpha)
    bounds = sigma.support_bounds()
    if bounds is None:
        return []
    g = f.abs().times_measure(sigma)
    res = max(sigma.resolution, f.resolution)
    lo, hi = bounds
    extent = max(hi - lo, 2.0**-res)
    top = math.ceil(math.log2(extent)) + 1
    k0 = locate(alpha, lo, top).k
    k1 = locate(alpha, hi, top).k
    roots = [DyadicInterval(top, k, alpha) for k in range(k0, k1 + 1)]
    for root in roots:
        den = sigma.mass_fraction(root.left_fraction(), root.right_fraction())
        if den > 0:
            num = g.mass_fraction(root.left_fraction(), root.right_fraction())
            if num / den > threshold:
                raise ValueError(
                    "threshold below a top-level average; no maximal cube exists"
                )
    min_scale = -(res + depth_pad) if alpha != 0 else -res - 1
    out: list[tuple[DyadicInterval, float]] = []
    stack = roots
    while stack:
        q = stack.pop()
        ql, qr = q.left_fraction(), q.right_fraction()
        # no descendant can beat the threshold where even sup|f| fails it
        if f.abs_sup_on(ql, qr) <= threshold:
            continue
        den = sigma.mass_fraction(ql, qr)
        if den <= 0.0:
            continue
        num = g.mass_fraction(ql, qr)
        avg = num / den
        if avg > threshold:
            out.append((q, avg))
            continue
        if q.j > min_scale:
            stack.extend(q.children())
    out.sort(key=lambda t: t[0].left_fraction())
    return out


@dataclass
class CZDecomposition:
    """Split of f at height gamma^t over the stopping cubes of one grid.

    For each maximal cube at height gamma^t, the good part replaces f by its
    sigma-average on every maximal subcube at height gamma^{t+1}; the bad
    parts are the mean-zero remainders on those subcubes.
    """

    alpha: Fraction
    gamma: float
    t: int
    f: StepFunction
    sigma: StepAtomicMeasure
    principal: list[tuple[DyadicInterval, float]]
    children: list[list[tuple[DyadicInterval, float]]]  # per principal cube
    doubling_warning: bool = False

    def good_value(self, s: int, x: float) -> float:
        """g on the s-th principal cube (0 outside it)."""
        cube, _ = self.principal[s]
        xf = Fraction(x)
        if not (cube.left_fraction() <= xf < cube.right_fraction()):
            return 0.0
        for child, avg in self.children[s]:
            if child.left_fraction() <= xf < child.right_fraction():
                return avg
        return self.f(x)

    def bad_value(self, s: int, x: float) -> float:
        cube, _ = self.principal[s]
        xf = Fraction(x)
        if not (cube.left_fraction() <= xf < cube.right_fraction()):
            return 0.0
        for child, avg in self.children[s]:
            if child.left_fraction() <= xf < child.right_fraction():
                return self.f(x) - avg
        return 0.0

    def bad_pieces(self, s: int) -> list[tuple[DyadicInterval, float]]:
        return self.children[s]


def first_height(f: StepFunction, sigma: StepAtomicMeasure, gamma: float) -> int:
    """Smallest height t with gamma^t above the global average of |f|.

    Heights below it have no maximal cubes (every ancestor of a charged
    cube keeps an average above the threshold on a finite-mass weight).
    """
    g = f.abs().times_measure(sigma)
    total = sigma.total_mass()
    if total <= 0 or g.total_mass() <= 0:
        return 0
    avg = g.total_mass() / total
    return math.floor(math.log(avg) / math.log(gamma)) + 1


def cz_split(
    f: StepFunction,
    sigma: StepAtomicMeasure,
    gamma: float,
    t: int,
    alpha: Fraction | float = 0,
) -> CZDecomposition:
    """Stopping-cube split of f against sigma at height gamma^t.

    Requires gamma >= 2; when sigma fails gamma-doubling over the support
    window the decomposition is still returned with a warning flag (the
    upper average bound gamma^{t+1} may then fail).
    """
    if gamma < 2.0:
        raise ValueError("height base gamma must be at least 2")
    alpha = Fraction(alpha)
    thr_t = gamma**t
    thr_t1 = gamma ** (t + 1)
    prin = principal_cubes(f, sigma, thr_t, alpha)
    fine = principal_cubes(f, sigma, thr_t1, alpha)
    children: list[list[tuple[DyadicInterval, float]]] = []
    sig_avg = _signed_averages(f, sigma, [c for c, _ in fine])
    for cube, _ in prin:
        mine = [
            (c, sig_avg[i])
            for i, (c, _) in enumerate(fine)
            if cube.contains(c)
        ]
        children.append(mine)
    warn = _doubling_violated(sigma, gamma)
    return CZDecomposition(
        alpha, gamma, t, f, sigma, prin, children, doubling_warning=warn
    )


def _signed_averages(f, sigma, cubes):
    fs = f.times_measure(sigma)
    out = []
    for c in cubes:
        den = sigma.mass_fraction(c.left_fraction(), c.right_fraction())
        num = fs.mass_fraction(c.left_fraction(), c.right_fraction())
        out.append(num / den if den > 0 else 0.0)
    return out


def _doubling_violated(sigma: StepAtomicMeasure, gamma: float) -> bool:
    """Cheap probe: gamma-doubling of sigma on dyadic cubes over the support."""
    bounds = sigma.support_bounds()
    if bounds is None:
        return False
    lo, hi = bounds
    res = sigma.resolution
    top = math.ceil(math.log2(max(hi - lo, 2.0**-res)))
    for j in range(-res, top):
        width = 2.0**j
        k0 = math.floor(lo / width)
        k1 = math.ceil(hi / width)
        for k in range(k0, k1):
            q = Interval(k * width, (k + 1) * width)
            inner = sigma.mass(q)
            if inner > 0.0 and sigma.mass(q.dilate(3.0)) > gamma * inner:
                return True
    return False


def max_principle_check(
    nu: StepAtomicMeasure,
    wd: WhitneyDecomposition,
    samples_per_cube: int = 4,
    budget: SearchBudget = DEFAULT_BUDGET,
    delta: DiniModulus = LINEAR_MODULUS,
) -> dict:
    """Measured constant in the localized maximum principle.

    For each Whitney cube of {T nu > 2^k}: the truncation supremum of nu
    restricted off the cube's triple, sampled inside the cube, must not
    exceed 2^k by more than C times the annular Poisson functional of nu on
    the cube.  Returns the max measured C and per-cube data; a positive
    excess against a vanishing Poisson value is flagged.
    """
    if wd.level is None:
        raise ValueError("decomposition carries no height level")
    thr = 2.0**wd.level
    worst = 0.0
    flagged = []
    per_cube = []
    for q in wd.cubes:
        qi = q.interval()
        t3 = qi.dilate(3.0)
        outside = nu.restrict_outside(t3.left, t3.right)
        p = poisson_bold(qi, nu, delta)
        excess = 0.0
        for i in range(samples_per_cube):
            x = qi.left + (i + 0.5) / samples_per_cube * qi.length()
            excess = max(excess, t_natural(outside, x, budget) - thr)
        if excess > 0.0:
            if p <= 0.0:
                flagged.append(q)
            else:
                worst = max(worst, excess / p)
        per_cube.append((q, excess, p))
    return {"constant": worst, "flagged": flagged, "per_cube": per_cube}


def good_lambda_check(
    w: WeightPair,
    f: StepFunction,
    beta: float,
    k_level: int,
    mesh_scale: int | None = None,
    budget: SearchBudget = DEFAULT_BUDGET,
) -> tuple[float, float, float]:
    """Center-sampled ingredients of the good-lambda inequality at 2^k.

    Returns (lhs, term1, term2): the omega-measure where the truncation
    supremum exceeds 2^{k+1} while the maximal function stays below
    beta 2^k, the omega-measure where the supremum exceeds 2^k, and
    beta^-p 2^-kp ∫ |f|^p dsigma.
    """
    nu = f.times_measure(w.sigma)
    anu = nu.absolute()
    lam = 2.0**k_level
    if mesh_scale is None:
        mesh_scale = -(max(w.sigma.resolution, f.resolution) + 2)
    width = 2.0**mesh_scale
    # omega-carrying sample points: mesh cells under the density, plus atoms
    points: list[tuple[float, float]] = []
    for l, r, wt in zip(w.omega.seg_left, w.omega.seg_right, w.omega.seg_weight):
        k0 = math.floor(float(l) / width)
        k1 = math.ceil(float(r) / width)
        for k in range(k0, k1):
            lo = max(float(l), k * width)
            hi = min(float(r), (k + 1) * width)
            if lo < hi:
                points.append(((k + 0.5) * width, wt * (hi - lo)))
    for ax, am in zip(w.omega.atom_x, w.omega.atom_m):
        points.append((float(ax), float(am)))
    lhs = 0.0
    term1 = 0.0
    for x, wgt in points:
        tv = t_natural(nu, x, budget)
        if tv > lam:
            term1 += wgt
            if tv > 2.0 * lam and maximal_fn(anu, x) <= beta * lam:
                lhs += wgt
    p = w.p
    term2 = beta**-p * lam**-p * sum(
        abs(v) ** p * w.sigma.mass_ab(*f.cell_interval(k).as_tuple())
        for k, v in f.values.items()
    )
    return lhs, term1, term2

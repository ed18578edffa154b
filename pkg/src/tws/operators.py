"""Truncated Hilbert transforms, their parameter suprema, maximal functions,
and linearizations with adjoints.

The built-in kernel is K(x, y) = 1/(x - y) with the fixed C^1 cutoff pair
(cubic smoothstep ramps).  The evaluation layer also accepts a custom kernel
carrying a size/smoothness certificate together with a custom cutoff
profile; that generic route always goes through the pure quadrature path,
while the built-in pair dispatches to the selected backend kernel.

All suprema over truncation parameters are grid-search lower bounds with a
golden-section refinement pass; every constant derived from them downstream
is therefore a lower bound on the true constant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import backend
from .measures import Interval, StepAtomicMeasure, StepFunction, _adaptive_simpson

__all__ = [
    "CutoffProfile",
    "TruncationParams",
    "SearchBudget",
    "HilbertKernel",
    "CertifiedKernel",
    "Linearization",
    "t_trunc",
    "t_natural",
    "t_natural_argmax",
    "t_flat",
    "maximal_fn",
    "dyadic_maximal",
    "linearized_adjoint",
    "linearization_from_argmax",
    "DEFAULT_CUTOFF",
    "HILBERT",
]

ECC_LO = 0.25
ECC_HI = 4.0


@dataclass(frozen=True)
class CutoffProfile:
    """Smooth cutoff pair: zeta opens past the inner radius, eta closes at

    the outer one.  zeta must vanish below 1/2 and equal 1 above 1,
    nondecreasing; eta must equal 1 below 1 and vanish above 2,
    nonincreasing."""

    zeta: Callable[[float], float]
    eta: Callable[[float], float]
    is_default: bool = False

    def validate(self, samples: int = 1024) -> None:
        prev_z = -1.0
        prev_e = 2.0
        for i in range(samples + 1):
            t = 3.0 * i / samples
            z, e = self.zeta(t), self.eta(t)
            if not (-1e-12 <= z <= 1.0 + 1e-12 and -1e-12 <= e <= 1.0 + 1e-12):
                raise ValueError("cutoff values must lie in [0, 1]")
            if t <= 0.5 and z != 0.0:
                raise ValueError("zeta must vanish on [0, 1/2]")
            if t >= 1.0 and z != 1.0:
                raise ValueError("zeta must equal 1 on [1, inf)")
            if t <= 1.0 and e != 1.0:
                raise ValueError("eta must equal 1 on [0, 1]")
            if t >= 2.0 and e != 0.0:
                raise ValueError("eta must vanish on [2, inf)")
            if z < prev_z - 1e-12:
                raise ValueError("zeta must be nondecreasing")
            if e > prev_e + 1e-12:
                raise ValueError("eta must be nonincreasing")
            prev_z, prev_e = z, e


DEFAULT_CUTOFF = CutoffProfile(zeta=backend.zeta, eta=backend.eta, is_default=True)


@dataclass(frozen=True)
class HilbertKernel:
    """The built-in kernel 1/(x - y)."""

    def k(self, x: float, y: float) -> float:
        return 1.0 / (x - y)


@dataclass(frozen=True)
class CertifiedKernel:
    """A kernel with a size/smoothness certificate for the generic route.

    ``size_const`` bounds |K(x,y)|·|x-y| and ``dini`` is the modulus in the
    smoothness bound; they are carried so downstream constants can be
    reported relative to the certificate.
    """

    k: Callable[[float, float], float]
    size_const: float
    dini: Callable[[float], float]


HILBERT = HilbertKernel()


@dataclass(frozen=True)
class TruncationParams:
    """One admissible truncation: left radius, right radius, outer cap."""

    eps1: float
    eps2: float
    R: float

    def __post_init__(self):
        if not (self.eps1 > 0.0 and self.eps2 > 0.0):
            raise ValueError("truncation radii must be positive")
        ratio = self.eps1 / self.eps2
        if not (ECC_LO <= ratio <= ECC_HI):
            raise ValueError(f"eccentricity {ratio} outside [1/4, 4]")
        if not max(self.eps1, self.eps2) < self.R < math.inf:
            raise ValueError("cap R must exceed both radii and be finite")


@dataclass(frozen=True)
class SearchBudget:
    """Grid density for the truncation-parameter supremum search."""

    points_per_decade: int = 64
    ratios: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    refine_iters: int = 20
    max_points: int = 4096

    def scaled(self, factor: float) -> "SearchBudget":
        return SearchBudget(
            points_per_decade=max(2, int(round(self.points_per_decade * factor))),
            ratios=self.ratios,
            refine_iters=self.refine_iters,
            max_points=self.max_points,
        )


DEFAULT_BUDGET = SearchBudget()
_EMPTY = np.zeros(0, dtype=np.float64)


def _scale_window(nu: StepAtomicMeasure, x: float) -> tuple[float, float]:
    """Log-grid range of truncation scales relevant at x.

    The lower end must resolve the nearest point mass: an atom much closer
    than a density cell dominates the maximal function there, and the
    supremum needs windows at that scale to see it.
    """
    bounds = nu.support_bounds()
    if bounds is None:
        return (1.0, 2.0)
    lo_s, hi_s = bounds
    dmax = max(abs(x - lo_s), abs(x - hi_s))
    width = 2.0 ** (-nu.resolution)
    dist = nu.distance_to_support(x)
    finest = width
    for ax in nu.atom_x:
        d = abs(float(ax) - x)
        if 0.0 < d < finest:
            finest = d
    if dist > 0.0:
        finest = max(finest, dist)
    lo = max(finest / 4.0, dmax * 1e-12, 1e-300)
    hi = 4.0 * (dmax + width)
    if hi <= lo:
        hi = 2.0 * lo
    return lo, hi


def _npts(lo: float, hi: float, budget: SearchBudget) -> int:
    decades = max(1, math.ceil(math.log10(hi / lo)))
    return min(budget.max_points, budget.points_per_decade * decades + 1)


def _extras_array(extras: Sequence[TruncationParams]) -> np.ndarray:
    if not extras:
        return _EMPTY
    flat = []
    for p in extras:
        flat.extend((p.eps1, p.eps2, p.R))
    return np.asarray(flat, dtype=np.float64)


def t_trunc(
    nu: StepAtomicMeasure,
    x: float,
    params: TruncationParams,
    cut: CutoffProfile = DEFAULT_CUTOFF,
    kernel=HILBERT,
) -> float:
    """Smoothly truncated singular integral at x.

    ∫ K(x,y) {zeta_{e1}(x-y) + zeta_{e2}(y-x)} eta_R(|x-y|) dnu(y): atoms
    exactly, density segments by panel-wise quadrature with the cutoff knots
    as panel boundaries (relative tolerance 1e-9).
    """
    if cut.is_default and isinstance(kernel, HilbertKernel):
        return backend.trunc_value(
            nu.seg_left,
            nu.seg_right,
            nu.seg_weight,
            nu.atom_x,
            nu.atom_m,
            float(x),
            params.eps1,
            params.eps2,
            params.R,
        )
    return _t_trunc_generic(nu, x, params, cut, kernel)


def _t_trunc_generic(nu, x, params, cut, kernel) -> float:
    e1, e2, r = params.eps1, params.eps2, params.R
    kf = kernel.k if not callable(kernel) else kernel

    def weight(y: float) -> float:
        d = x - y
        w = cut.zeta(d / e1) + cut.zeta(-d / e2)
        return w * cut.eta(abs(d) / r)

    def integrand(y: float) -> float:
        return kf(x, y) * weight(y)

    knots = sorted(
        {
            x - 2.0 * r,
            x - r,
            x - e1,
            x - 0.5 * e1,
            x + 0.5 * e2,
            x + e2,
            x + r,
            x + 2.0 * r,
        }
    )
    total = 0.0
    worst = [0.0]
    for l, rr, w in zip(nu.seg_left, nu.seg_right, nu.seg_weight):
        cuts = [l] + [t for t in knots if l < t < rr] + [rr]
        for a, b in zip(cuts, cuts[1:]):
            mid = 0.5 * (a + b)
            if weight(mid) == 0.0 and weight(a) == 0.0 and weight(b) == 0.0:
                continue
            total += w * _adaptive_simpson(integrand, a, b, 1e-9, worst)
    for ax, am in zip(nu.atom_x, nu.atom_m):
        ax = float(ax)
        if ax != x:
            total += float(am) * integrand(ax)
    if worst[0] > 1.0:
        from .measures import QuadratureError

        raise QuadratureError(worst[0] * 1e-9)
    return total


def _sup(nu, x, budget, ratios, extras, centered_branch, pin_ratio):
    lo, hi = _scale_window(nu, x)
    n = _npts(lo, hi, budget)
    return backend.sup_search(
        nu.seg_left,
        nu.seg_right,
        nu.seg_weight,
        nu.atom_x,
        nu.atom_m,
        float(x),
        lo,
        hi,
        n,
        np.asarray(ratios, dtype=np.float64),
        budget.refine_iters,
        _extras_array(extras),
        centered_branch,
        pin_ratio,
    )


def t_natural_argmax(
    nu: StepAtomicMeasure,
    x: float,
    budget: SearchBudget = DEFAULT_BUDGET,
    extras: Sequence[TruncationParams] = (),
) -> tuple[float, TruncationParams | None]:
    """Value and witness parameters of the noncentered supremum search."""
    v, e1, e2, r = _sup(nu, x, budget, budget.ratios, extras, True, False)
    if v <= 0.0 or e1 <= 0.0:
        return max(v, 0.0), None
    return v, TruncationParams(e1, e2, r)


def t_natural(
    nu: StepAtomicMeasure,
    x: float,
    budget: SearchBudget = DEFAULT_BUDGET,
    extras: Sequence[TruncationParams] = (),
) -> float:
    """Noncentered maximal truncation: sup over admissible (e1, e2, R).

    Grid-search lower bound; nested grids make the grid stage monotone in
    points_per_decade, and the refined value never drops below it.
    """
    return t_natural_argmax(nu, x, budget, extras)[0]


def t_flat(
    nu: StepAtomicMeasure,
    x: float,
    budget: SearchBudget = DEFAULT_BUDGET,
    extras: Sequence[TruncationParams] = (),
) -> float:
    """Centered maximal truncation (equal radii); never exceeds t_natural

    at the same budget, since the noncentered search subsumes its grid and
    its refinement path."""
    v, _, _, _ = _sup(nu, x, budget, (1.0,), extras, False, True)
    return max(v, 0.0)


def maximal_fn(nu: StepAtomicMeasure, x: float) -> float:
    """Exact noncentered Hardy-Littlewood maximal function at x.

    The supremum over intervals containing x is attained in the closure of
    the finite family with endpoints at segment edges, atom positions and x
    itself (averages are monotone between breakpoints); right-closed
    variants realize the limits that include an atom at the right end.
    Infinite when an atom sits exactly at x.
    """
    if nu.signed:
        raise ValueError("maximal function requires an unsigned measure")
    return backend.maximal_value(
        nu.seg_left, nu.seg_right, nu.seg_weight, nu.atom_x, nu.atom_m, float(x)
    )


def dyadic_maximal(
    mu: StepAtomicMeasure,
    f: StepFunction,
    x: float,
    alpha: Fraction | float = 0,
) -> float:
    """Grid maximal average sup_{Q ∋ x} (1/|Q|_mu) ∫_Q |f| dmu.

    Exact finite scan over grid cubes from below the step resolution up to
    the support-covering scale; cubes of zero mu-mass are skipped.  When mu
    charges a neighborhood of x, the pointwise value |f(x)| joins the
    candidate set as the limit of shrinking averages.
    """
    from .dyadic import locate

    if mu.signed:
        raise ValueError("dyadic maximal requires an unsigned measure")
    alpha = Fraction(alpha)
    bounds = mu.support_bounds()
    if bounds is None:
        return 0.0
    lo_s, hi_s = bounds
    g = f.abs().times_measure(mu)
    res = max(mu.resolution, f.resolution)
    j_floor = -(res + (0 if alpha == 0 else 8))
    extent = max(hi_s - lo_s, 2.0**-res) + max(abs(x - lo_s), abs(x - hi_s))
    j_top = math.ceil(math.log2(max(extent, 2.0**-res))) + 2
    best = 0.0
    for j in range(j_floor, j_top + 1):
        cube = locate(alpha, x, j)
        den = mu.mass_fraction(cube.left_fraction(), cube.right_fraction())
        if den <= 0.0:
            continue
        num = g.mass_fraction(cube.left_fraction(), cube.right_fraction())
        if num / den > best:
            best = num / den
    if mu.atom_at(float(x)) > 0.0:
        best = max(best, abs(f(float(x))))
    else:
        i = int(np.searchsorted(mu.seg_right, x, side="right"))
        if i < mu.seg_left.size and mu.seg_left[i] <= x and mu.seg_weight[i] > 0:
            best = max(best, abs(f(float(x))))
    return best


@dataclass(frozen=True)
class Linearization:
    """A measurable selection of truncation parameters and phases.

    Turns the maximal truncation into a linear operator on the evaluation
    set: Lf(x) = e^{i theta(x)} T_{(e1(x), e2(x)), R(x)} f(x).
    """

    points: tuple[float, ...]
    selections: tuple[tuple[TruncationParams, float], ...]
    localized_cube: Interval | None = None

    def __post_init__(self):
        if len(self.points) != len(self.selections):
            raise ValueError("one selection per evaluation point required")
        if self.localized_cube is not None:
            cap = 0.5 * self.localized_cube.length()
            for params, _ in self.selections:
                if params.R > cap:
                    raise ValueError("localized selection exceeds half the cube")

    def selection_at(self, x: float) -> tuple[TruncationParams, float]:
        i = self.points.index(x)
        return self.selections[i]

    def apply(self, nu: StepAtomicMeasure, x: float) -> complex:
        params, theta = self.selection_at(x)
        return cmath.exp(1j * theta) * t_trunc(nu, x, params)


def linearization_from_argmax(
    nu: StepAtomicMeasure,
    points: Sequence[float],
    budget: SearchBudget = DEFAULT_BUDGET,
    localized_cube: Interval | None = None,
) -> Linearization:
    """Selection seeded from the supremum-search argmax at each point; the

    phase is aligned so the linearized value is the nonnegative maximal
    value there (theta = -arg of the truncated value)."""
    sels = []
    cap = 0.5 * localized_cube.length() if localized_cube is not None else math.inf
    for x in points:
        v, params = t_natural_argmax(nu, x, budget)
        if params is None or params.R > cap:
            fallback_r = cap if cap < math.inf else 1.0
            params = TruncationParams(fallback_r / 4.0, fallback_r / 4.0, fallback_r)
        raw = t_trunc(nu, x, params)
        theta = 0.0 if raw >= 0.0 else math.pi
        sels.append((params, theta))
    return Linearization(tuple(points), tuple(sels), localized_cube)


def linearized_adjoint(
    lin: Linearization,
    mu: StepAtomicMeasure,
    y: float,
    cut: CutoffProfile = DEFAULT_CUTOFF,
) -> complex:
    """Adjoint of a linearization against a measure carried by its points.

    Sum over x of {zeta_{e1(x)}(x-y) + zeta_{e2(x)}(y-x)} eta_{R(x)}(|x-y|)
    K(x,y) e^{i theta(x)} mu({x}).
    """
    if mu.seg_left.size:
        raise ValueError("adjoint argument must be purely atomic")
    pts = set(lin.points)
    for ax in mu.atom_x:
        if float(ax) not in pts:
            raise ValueError(f"measure carries mass off the evaluation set at {ax}")
    total = 0.0 + 0.0j
    for ax, am in zip(mu.atom_x, mu.atom_m):
        x = float(ax)
        params, theta = lin.selection_at(x)
        d = x - y
        if d == 0.0:
            continue
        w = cut.zeta(d / params.eps1) + cut.zeta(-d / params.eps2)
        w *= cut.eta(abs(d) / params.R)
        if w != 0.0:
            total += w * (1.0 / d) * cmath.exp(1j * theta) * float(am)
    return total

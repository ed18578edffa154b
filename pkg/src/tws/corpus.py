"""Reproducible random inputs: step weights from bounded-ratio mass
cascades, atom injection, step densities, intervals and grid families.

All generated weights and masses are dyadic rationals of bounded precision
(cascade ratios are eighths, base masses are twelfth-scale dyadics), so
every mass query downstream is carried out exactly in binary64; this is the
contract behind the bit-level additivity checks.  Doubling is controlled by
the cascade ratio band: gapless cascades with ratios in [3/8, 5/8] are
uniformly doubling, while gap injection deliberately breaks doubling.
"""

from __future__ import annotations

import math

import numpy as np

from .dyadic import DyadicInterval
from .measures import Interval, StepAtomicMeasure, StepFunction, WeightPair

__all__ = [
    "lebesgue_on",
    "dirac",
    "cascade_measure",
    "random_measure",
    "random_weight_pair",
    "random_step_function",
    "random_interval",
    "random_partition",
]


def lebesgue_on(a: float, b: float, resolution: int = 0) -> StepAtomicMeasure:
    """Unit density on [a, b); endpoints must sit on the chosen lattice."""
    width = 2.0**-resolution
    k0 = round(a / width)
    k1 = round(b / width)
    if not (k0 * width == a and k1 * width == b and k1 > k0):
        raise ValueError("endpoints must be lattice points at this resolution")
    return StepAtomicMeasure(resolution, {k: 1.0 for k in range(k0, k1)})


def dirac(x: float, m: float = 1.0, resolution: int = 0) -> StepAtomicMeasure:
    return StepAtomicMeasure(resolution, {}, [(x, m)])


def cascade_measure(
    rng: np.random.Generator,
    resolution: int = 6,
    top_scale: int = 0,
    base_cell: int = 0,
    total_mass: float | None = None,
    ratio_band: tuple[int, int] = (3, 5),
    gap_prob: float = 0.0,
) -> StepAtomicMeasure:
    """Multiplicative cascade on [base_cell, base_cell+1) 2^top_scale.

    Mass splits by ratios k/8 with k in the band at every level down to the
    resolution; optionally kills subtrees with probability gap_prob.  With
    the default band and no gaps the result is uniformly doubling.
    """
    depth = resolution + top_scale
    if depth < 0:
        raise ValueError("resolution must reach below the top scale")
    if total_mass is None:
        total_mass = float(rng.integers(1, 2**8)) / 4.0
    masses = {base_cell: total_mass}
    for _ in range(depth):
        nxt: dict[int, float] = {}
        for k, m in masses.items():
            if gap_prob > 0.0 and rng.random() < gap_prob:
                side = int(rng.integers(0, 2))
                nxt[2 * k + side] = m
                continue
            num = int(rng.integers(ratio_band[0], ratio_band[1] + 1))
            left = m * (num / 8.0)
            nxt[2 * k] = nxt.get(2 * k, 0.0) + left
            nxt[2 * k + 1] = nxt.get(2 * k + 1, 0.0) + (m - left)
        masses = nxt
    width = 2.0**-resolution
    cells = {k: m / width for k, m in masses.items() if m > 0.0}
    return StepAtomicMeasure(resolution, cells)


def random_measure(
    rng: np.random.Generator,
    resolution: int = 6,
    top_scale: int = 0,
    n_blocks: int = 1,
    n_atoms: int = 0,
    gap_prob: float = 0.0,
    spread: int = 4,
) -> StepAtomicMeasure:
    """Union of cascade blocks at random coarse positions plus atoms.

    Atom positions are odd lattice points one scale below the resolution
    (so they avoid all cell boundaries at the resolution); masses are
    twelfth-scale dyadics.
    """
    base = cascade_measure(
        rng,
        resolution,
        top_scale,
        base_cell=int(rng.integers(-spread, spread)),
        gap_prob=gap_prob,
    )
    for _ in range(n_blocks - 1):
        extra = cascade_measure(
            rng,
            resolution,
            top_scale,
            base_cell=int(rng.integers(-spread, spread)),
            gap_prob=gap_prob,
        )
        base = base.plus(extra)
    if n_atoms:
        width = 2.0 ** -(resolution + 1)
        lo = -spread * 2.0**top_scale
        span = 2 * spread * 2.0**top_scale
        positions = set()
        atoms = []
        for _ in range(n_atoms):
            k = int(rng.integers(0, int(span / width / 2))) * 2 + 1
            x = lo + k * width
            if x in positions:
                continue
            positions.add(x)
            atoms.append((x, float(rng.integers(1, 2**8)) / 2.0**6))
        base = base.plus(
            StepAtomicMeasure(resolution, {}, atoms)
        )
    return base


def random_weight_pair(
    rng: np.random.Generator,
    p: float = 2.0,
    resolution: int = 6,
    doubling: bool = True,
    atoms_in_omega: int = 0,
) -> WeightPair:
    """Random sigma (doubling unless disabled) and omega, no shared atoms."""
    gap = 0.0 if doubling else 0.25
    sigma = random_measure(rng, resolution, n_blocks=1, gap_prob=gap)
    omega = random_measure(
        rng, resolution, n_blocks=1, gap_prob=0.3, n_atoms=atoms_in_omega
    )
    return WeightPair(sigma=sigma, omega=omega, p=p)


def random_step_function(
    rng: np.random.Generator,
    measure: StepAtomicMeasure,
    sup_bound: float = 8.0,
    signed: bool = False,
    fill: float = 0.7,
) -> StepFunction:
    """Step density over the measure's cells, dyadic values within bound."""
    quantum = sup_bound / 16.0
    vals: dict[int, float] = {}
    for k in measure.cells:
        if rng.random() > fill:
            continue
        v = float(rng.integers(1, 17)) * quantum
        if signed and rng.random() < 0.5:
            v = -v
        vals[k] = v
    if not vals and measure.cells:
        k = sorted(measure.cells)[0]
        vals[k] = quantum
    return StepFunction(measure.resolution, vals)


def random_interval(
    rng: np.random.Generator, window: Interval, lattice_scale: int | None = None
) -> Interval:
    """Random subinterval; lattice_scale pins endpoints to a dyadic grid."""
    if lattice_scale is None:
        a, b = sorted(rng.uniform(window.left, window.right, 2))
        while not b > a:
            a, b = sorted(rng.uniform(window.left, window.right, 2))
        return Interval(float(a), float(b))
    width = 2.0**lattice_scale
    k0 = math.ceil(window.left / width)
    k1 = math.floor(window.right / width)
    if k1 - k0 < 2:
        raise ValueError("window too small for this lattice")
    i, j = sorted(rng.choice(np.arange(k0, k1 + 1), size=2, replace=False))
    return Interval(i * width, j * width)


def random_partition(
    rng: np.random.Generator,
    root: DyadicInterval,
    max_depth: int = 5,
    split_prob: float = 0.6,
    keep_prob: float = 0.85,
) -> list[DyadicInterval]:
    """Random stopping-time family of disjoint subcubes of the root."""
    leaves: list[DyadicInterval] = []
    stack = [(root, 0)]
    while stack:
        cube, d = stack.pop()
        if d < max_depth and rng.random() < split_prob:
            stack.extend((c, d + 1) for c in cube.children())
        else:
            leaves.append(cube)
    kept = [c for c in leaves if rng.random() < keep_prob]
    if not kept:
        kept = [leaves[0]]
    return sorted(kept, key=lambda c: c.left_fraction())

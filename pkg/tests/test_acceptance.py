"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and the measured constants.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from tws import conditions as cond
from tws import corpus
from tws import decompositions as dec
from tws import operators as ops
from tws.checks import summability_constant, verify_cz
from tws.dyadic import SHIFTS, besicovitch_maximal, locate, max_overlap
from tws.measures import Interval, WeightPair
from tws.poisson import poisson_std

SEED = 20260808


def verdict(n, ok, detail):
    print(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def test_criterion_01_measure_additivity():
    """10^5 random interval splits, bit-level additivity, < 5 s."""
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    splits = 0
    exact = 0
    for _ in range(50):
        mu = corpus.random_measure(rng, resolution=6, n_atoms=2)
        lo, hi = mu.support_bounds()
        width = 2.0**-mu.resolution
        k0, k1 = math.floor(lo / width) - 2, math.ceil(hi / width) + 2
        draws = rng.integers(k0, k1 + 1, size=(2000, 3))
        for row in draws:
            a, m, b = np.sort(row)
            if a == m or m == b:
                continue
            a, m, b = a * width, m * width, b * width
            splits += 1
            if mu.mass_ab(a, b) == mu.mass_ab(a, m) + mu.mass_ab(m, b):
                exact += 1
    dt = time.perf_counter() - t0
    verdict(
        1,
        exact == splits and splits >= 90_000 and dt < 5.0,
        f"{exact}/{splits} splits bit-exact in {dt:.1f}s",
    )


def test_criterion_02_analytic_constants():
    """Lebesgue pair on [-2^10, 2^10]: joint average 1 (1e-9), tail 2 (2%)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    leb = corpus.lebesgue_on(-1024.0, 1024.0)
    w = WeightPair(leb, leb, 2.0)
    fam = cond.interval_family(w, depth=12, n_random=2000, rng=rng)
    ap = cond.ap_constant(w, fam)
    s_rep, _ = cond.strengthened_ap(w, fam[:: max(1, len(fam) // 300)])
    dt = time.perf_counter() - t0
    ok = abs(ap.estimate - 1.0) <= 1e-9 and abs(s_rep.estimate - 2.0) <= 0.04 and dt < 30.0
    verdict(
        2,
        ok,
        f"joint average {ap.estimate:.12f}, tail-weighted {s_rep.estimate:.4f} "
        f"in {dt:.1f}s",
    )


def test_criterion_03_geometric_tail():
    """P(q, atom inside) = (4/3) m / |q| to 1e-12 vs 60-term sums, 10^3 cases."""
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        a, b = sorted(rng.uniform(-8.0, 8.0, 2))
        if not b > a:
            continue
        q = Interval(float(a), float(b))
        x = float(rng.uniform(a, b))
        m = float(rng.integers(1, 64)) / 8.0
        nu = corpus.dirac(x, m)
        v = poisson_std(q, nu)
        closed = (4.0 / 3.0) * m / q.length()
        direct = sum(
            2.0**-l * nu.mass(q.dilate(2.0**l)) / (q.length() * 2.0**l)
            for l in range(60)
        )
        worst = max(worst, abs(v - closed) / closed, abs(v - direct) / direct)
    dt = time.perf_counter() - t0
    verdict(3, worst <= 1e-12 and dt < 5.0, f"worst rel dev {worst:.2e} in {dt:.1f}s")


def _superlevel_instances(rng, n_measures, budget):
    """(nu, profile, levels) triples with data-driven level choices."""
    out = []
    for _ in range(n_measures):
        nu = corpus.random_measure(rng, resolution=4, n_atoms=1, spread=2)
        lo, hi = nu.support_bounds()
        prof = dec.mesh_profile(nu, budget=budget, window=(lo - 2.0, hi + 2.0))
        vals = sorted(v for v in prof[2] if v > 0)
        if not vals:
            continue
        k0 = math.floor(math.log2(vals[int(0.55 * len(vals))]))
        out.append((nu, prof, [k0, k0 + 1, k0 + 2, k0 + 3]))
    return out


def test_criterion_04_whitney_suite():
    """100 superlevel sets: all five Whitney properties, overlap <= 64."""
    rng = np.random.default_rng(SEED + 4)
    budget = ops.SearchBudget(points_per_decade=5, refine_iters=6)
    t0 = time.perf_counter()
    built = 0
    worst_overlap = 0
    for nu, prof, levels in _superlevel_instances(rng, 25, budget):
        wds = []
        for k in levels:
            om = dec.superlevel_set(nu, k, profile=prof)
            if om.is_empty():
                continue
            wd = dec.whitney(om, level=k)
            info = wd.verify()  # disjoint cover + both Whitney halves + crowd
            worst_overlap = max(worst_overlap, info["overlap_constant"])
            wds.append(wd)
            built += 1
        assert dec.nested_property_violations(wds) == []
    dt = time.perf_counter() - t0
    verdict(
        4,
        built >= 100 and worst_overlap <= 64 and dt < 120.0,
        f"{built} decompositions, overlap constant {worst_overlap} in {dt:.1f}s",
    )


def test_criterion_05_cz_suite():
    """100 stopping-cube splits: mean zero, bounds, exact identity, sums.

    The good-part bound is gamma^{t+2} on stopping children (their averages
    exceed gamma^{t+1} by maximality; doubling caps them one power higher)
    and gamma^{t+1} off them; see the decisions ledger for the constant.
    """
    rng = np.random.default_rng(SEED + 5)
    t0 = time.perf_counter()
    done = 0
    while done < 100:
        sigma = corpus.cascade_measure(rng, resolution=5)
        f = corpus.random_step_function(rng, sigma, signed=bool(rng.integers(0, 2)))
        gamma = max(2.0, cond.doubling_gamma(sigma))
        alpha = SHIFTS[int(rng.integers(0, 3))]
        t = dec.first_height(f, sigma, gamma) + int(rng.integers(0, 2))
        dz = dec.cz_split(f, sigma, gamma, t, alpha)
        info = verify_cz(dz)
        assert info["identity_ok"], "split identity failed"
        assert info["bound_children_ok"], "child average bound failed"
        assert info["bound_uncovered_ok"], "uncovered bound failed"
        assert info["mean_zero_residual"] <= 1e-12 * max(info["total_mass"], 1.0)
        measured, bound = summability_constant(f, sigma, gamma, 2.0, alpha)
        assert measured <= bound * (1 + 1e-9)
        done += 1
    dt = time.perf_counter() - t0
    verdict(5, done == 100 and dt < 120.0, f"{done} splits verified in {dt:.1f}s")


def test_criterion_06_maximum_principle():
    """50 instances: localized-excess constant finite, < 20% mesh drift."""
    rng = np.random.default_rng(SEED + 6)
    budget = ops.SearchBudget(points_per_decade=5, refine_iters=8)
    t0 = time.perf_counter()
    base_cs = []
    fine_cs = []
    count = 0
    while count < 50:
        nu = corpus.random_measure(rng, resolution=4, n_atoms=1, spread=2)
        lo, hi = nu.support_bounds()
        win = (lo - 1.5, hi + 1.5)
        ms = -(nu.resolution + 2)
        prof = dec.mesh_profile(nu, ms, budget, window=win)
        vals = sorted(v for v in prof[2] if v > 0)
        if not vals:
            continue
        k = math.floor(math.log2(vals[int(0.7 * len(vals))]))
        pair = []
        # cubes no smaller than four base-mesh cells in both runs, so the
        # families are mesh-resolved and comparable
        for m, pad in ((ms, -2), (ms - 1, -3)):
            p = dec.mesh_profile(nu, m, budget, window=win)
            om = dec.superlevel_set(nu, k, profile=p)
            if om.is_empty():
                pair.append(0.0)
                continue
            wd = dec.whitney(om, level=k, depth_pad=pad)
            rep = dec.max_principle_check(nu, wd, samples_per_cube=4, budget=budget)
            assert not rep["flagged"]
            assert math.isfinite(rep["constant"])
            pair.append(rep["constant"])
        base_cs.append(pair[0])
        fine_cs.append(pair[1])
        count += 1
    c_base, c_fine = max(base_cs), max(fine_cs)
    drift = abs(c_base - c_fine) / max(c_base, c_fine, 1e-30)
    dt = time.perf_counter() - t0
    verdict(
        6,
        count == 50 and drift < 0.20 and dt < 300.0,
        f"constant {c_base:.3f} vs refined {c_fine:.3f} (drift {drift:.3f}) "
        f"in {dt:.1f}s",
    )


def test_criterion_07_level_estimate():
    """Hard: level bound with the explicit constant p, slack >= -1e-6."""
    rng = np.random.default_rng(SEED + 7)
    t0 = time.perf_counter()
    worst_slack = math.inf
    checked = 0
    for _ in range(200):
        base_sigma = corpus.cascade_measure(rng, resolution=5)
        base_omega = corpus.random_measure(rng, resolution=5, gap_prob=0.3, n_atoms=1)
        root = locate(0, float(rng.uniform(-2, 2)), int(rng.integers(0, 3)))
        pieces = corpus.random_partition(rng, root, max_depth=4)
        for p in (1.25, 1.5, 2.0):
            w = WeightPair(base_sigma, base_omega, p)
            for ell in range(13):
                lhs, rhs, apv = cond.ell_level_terms(w, pieces, ell)
                bound = p * 2.0 ** (-p * ell) * apv**p * rhs
                if bound > 0:
                    worst_slack = min(worst_slack, (bound - lhs) / bound)
                else:
                    assert lhs <= 1e-30
                checked += 1
    dt = time.perf_counter() - t0
    verdict(
        7,
        worst_slack >= -1e-6 and dt < 180.0,
        f"{checked} level checks, worst slack {worst_slack:.3e} in {dt:.1f}s",
    )


def test_criterion_08_increment_bound():
    """Hard: tail functional <= 2|i| inf increment quotient, slack >= -1e-9."""
    rng = np.random.default_rng(SEED + 8)
    t0 = time.perf_counter()
    done = 0
    worst = math.inf
    while done < 200:
        c = float(rng.uniform(-2, 2))
        h = float(rng.uniform(0.25, 2.0))
        i = Interval(c - h, c + h)
        nu = corpus.random_measure(rng, resolution=5, spread=3, n_atoms=1)
        pad = h / 8.0
        nu = nu.restrict_outside(i.left - pad, i.right + pad)
        if nu.is_zero():
            continue
        val, bound = cond.increment_bound_terms(nu, i)
        if bound > 0:
            worst = min(worst, (bound - val) / bound)
        assert val <= bound * (1 + 1e-9) + 1e-30
        done += 1
    dt = time.perf_counter() - t0
    verdict(8, done == 200 and dt < 60.0, f"worst slack {worst:.3e} in {dt:.1f}s")


def test_criterion_09_covering_overlap():
    """Maximal dilates at factor 3 overlap at most 3, 100 families."""
    rng = np.random.default_rng(SEED + 9)
    t0 = time.perf_counter()
    worst = 0
    for _ in range(100):
        alpha = SHIFTS[int(rng.integers(0, 3))]
        cubes = [
            locate(alpha, float(rng.uniform(-8, 8)), int(rng.integers(-6, 4)))
            for _ in range(16)
        ]
        kept = besicovitch_maximal(cubes, 3)
        worst = max(worst, max_overlap([c.dilate_fractions(3) for c in kept]))
    dt = time.perf_counter() - t0
    verdict(9, worst <= 3 and dt < 30.0, f"max overlap {worst} in {dt:.1f}s")


def test_criterion_10_domination():
    """Maximal function <= C times the truncation supremum; C stable."""
    rng = np.random.default_rng(SEED + 10)
    b1 = ops.SearchBudget(points_per_decade=5, refine_iters=10)
    b2 = b1.scaled(2.0)
    t0 = time.perf_counter()
    cs1, cs2 = [], []
    for _ in range(50):
        nu = corpus.random_measure(rng, resolution=5, n_atoms=1, spread=3)
        lo, hi = nu.support_bounds()
        c1 = c2 = 0.0
        pts = 0
        while pts < 100:
            x = float(rng.uniform(lo - 2, hi + 2))
            if nu.atom_at(x) > 0:
                continue
            pts += 1
            m = ops.maximal_fn(nu, x)
            if m == 0:
                continue
            t1v = ops.t_natural(nu, x, b1)
            t2v = ops.t_natural(nu, x, b2)
            assert t1v > 0 and t2v > 0
            c1 = max(c1, m / t1v)
            c2 = max(c2, m / t2v)
        cs1.append(c1)
        cs2.append(c2)
    corpus_c1, corpus_c2 = max(cs1), max(cs2)
    drift = abs(corpus_c1 - corpus_c2) / max(corpus_c1, corpus_c2)
    dt = time.perf_counter() - t0
    verdict(
        10,
        math.isfinite(corpus_c1) and drift < 0.10 and dt < 300.0,
        f"constant {corpus_c1:.4f}, budget-doubling drift {drift:.4f} in {dt:.1f}s",
    )


def test_criterion_11_kernel_lower_bound():
    """Hard: 1/(x-y) >= s_q(x) s_q(y) / |q| for y < x, 10^5 samples."""
    rng = np.random.default_rng(SEED + 11)
    t0 = time.perf_counter()
    n = 100_000
    a = rng.uniform(-8.0, 8.0, n)
    b = rng.uniform(-8.0, 8.0, n)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keep = hi - lo > 1e-9
    lo, hi = lo[keep], hi[keep]
    h = hi - lo
    c = 0.5 * (lo + hi)
    y = rng.uniform(-40.0, 40.0, lo.size)
    x = rng.uniform(-40.0, 40.0, lo.size)
    y, x = np.minimum(x, y), np.maximum(x, y)
    keep = x > y
    lo, hi, h, c, x, y = lo[keep], hi[keep], h[keep], c[keep], x[keep], y[keep]
    lhs = 1.0 / (x - y)
    rhs = (h / (h + np.abs(x - c))) * (h / (h + np.abs(y - c))) / h
    ok = bool(np.all(lhs >= rhs))
    dt = time.perf_counter() - t0
    verdict(11, ok and lo.size > 90_000 and dt < 5.0,
            f"{lo.size} samples, exact pointwise bound in {dt:.1f}s")


def test_criterion_12_determinism(tmp_path):
    """Two `tws check all` runs with one seed are byte-identical."""
    t0 = time.perf_counter()
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"seed": 7, "budgets": {"check_scale": 0.3}}))
    root = Path(__file__).resolve().parent.parent
    outs = []
    for name in ("a", "b"):
        res = subprocess.run(
            [
                sys.executable, "-m", "tws.cli", "check", "all",
                "--config", str(cfg), "--out", str(tmp_path / name),
            ],
            capture_output=True,
            text=True,
            cwd=str(root),
            env={"PYTHONPATH": "src", "PATH": "/usr/bin:/bin"},
        )
        assert res.returncode == 0, res.stdout + res.stderr
        outs.append((tmp_path / name / "check_all.json").read_bytes())
    dt = time.perf_counter() - t0
    verdict(12, outs[0] == outs[1], f"byte-identical reports in {dt:.1f}s")

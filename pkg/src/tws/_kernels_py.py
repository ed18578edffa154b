"""Pure-Python fallback for the hot evaluation kernels.

This module mirrors the compiled extension ``tws._kernels`` operation for
operation; the float arithmetic is written in the same order so the two
backends agree to the last bits on identical inputs.  Selected automatically
by ``tws.backend`` when the extension is not built.

Kernels:

* smooth two-sided truncations of the Hilbert kernel evaluated against a
  segment+atom measure (plateau by exact logarithms, cutoff ramps by
  adaptive Simpson with the cutoff knots as panel boundaries),
* the supremum search over truncation parameters (log-spaced grid crossed
  with eccentricity ratios, then a golden-section pass per coordinate),
* the exact Hardy-Littlewood maximal function via breakpoint scan,
* the power tail-kernel integral over density segments.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right

RTOL = 1e-9
MAX_DEPTH = 40
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def zeta(v: float) -> float:
    """Smooth step: 0 below 1/2, 1 above 1, cubic smoothstep between."""
    if v <= 0.5:
        return 0.0
    if v >= 1.0:
        return 1.0
    q = 2.0 * v - 1.0
    return q * q * (3.0 - 2.0 * q)


def eta(v: float) -> float:
    """Smooth cap: 1 below 1, 0 above 2, cubic smoothstep between."""
    if v <= 1.0:
        return 1.0
    if v >= 2.0:
        return 0.0
    q = v - 1.0
    return 1.0 - q * q * (3.0 - 2.0 * q)


# integrand codes for the adaptive Simpson driver
_F_ZETA = 0  # zeta(u/p1) / u
_F_ETA = 1  # eta(u/p1) / u
_F_POWER = 2  # (p2 / (p2 + |u - p1|))^p3


def _f(code: int, p1: float, p2: float, p3: float, u: float) -> float:
    if code == _F_ZETA:
        return zeta(u / p1) / u
    if code == _F_ETA:
        return eta(u / p1) / u
    return (p2 / (p2 + abs(u - p1))) ** p3


def _asimp(code, p1, p2, p3, a, b, rtol, worst):
    """Adaptive Simpson on [a, b]; worst is a 1-cell list recording the

    largest unresolved relative error ratio at the depth cap."""
    fa = _f(code, p1, p2, p3, a)
    fb = _f(code, p1, p2, p3, b)
    m = 0.5 * (a + b)
    fm = _f(code, p1, p2, p3, m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _asimp_rec(code, p1, p2, p3, a, fa, m, fm, b, fb, whole, rtol, 0, worst)


def _asimp_rec(code, p1, p2, p3, a, fa, m, fm, b, fb, whole, rtol, depth, worst):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = _f(code, p1, p2, p3, lm)
    frm = _f(code, p1, p2, p3, rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    scale = abs(left + right) + 1e-300
    if abs(err) <= 15.0 * rtol * scale or depth >= MAX_DEPTH:
        if depth >= MAX_DEPTH and abs(err) > 15.0 * rtol * scale:
            ratio = abs(err) / scale / 15.0 / rtol
            if ratio > worst[0]:
                worst[0] = ratio
        return left + right + err / 15.0
    return _asimp_rec(
        code, p1, p2, p3, a, fa, lm, flm, m, fm, left, rtol, depth + 1, worst
    ) + _asimp_rec(code, p1, p2, p3, m, fm, rm, frm, b, fb, right, rtol, depth + 1, worst)


def _ramp_antideriv(code: int, p: float, u: float) -> float:
    """Antiderivative of zeta(u/p)/u (code 0) or eta(u/p)/u (code 1).

    On the ramp, zeta(u/e) = -16(u/e)^3 + 36(u/e)^2 - 24(u/e) + 5 and
    eta(u/R) = 2(u/R)^3 - 9(u/R)^2 + 12(u/R) - 4, so dividing by u leaves a
    polynomial plus a constant multiple of 1/u.
    """
    v = u / p
    if code == _F_ZETA:
        return ((-16.0 / 3.0 * v + 18.0) * v - 24.0) * v + 5.0 * math.log(u)
    return ((2.0 / 3.0 * v - 4.5) * v + 12.0) * v - 4.0 * math.log(u)


def power_tail_segments(seg_l, seg_r, seg_w, c, h, e, rtol):
    """(value, worst_ratio): ∫ (h/(h+|y-c|))^e over the density segments."""
    worst = [0.0]
    total = 0.0
    n = len(seg_l)
    for i in range(n):
        l = float(seg_l[i])
        r = float(seg_r[i])
        w = float(seg_w[i])
        if w == 0.0:
            continue
        # split at the kink y = c
        if l < c < r:
            total += w * _asimp(_F_POWER, c, h, e, l, c, rtol, worst)
            total += w * _asimp(_F_POWER, c, h, e, c, r, rtol, worst)
        else:
            total += w * _asimp(_F_POWER, c, h, e, l, r, rtol, worst)
    return total, worst[0]


# ----------------------------------------------------------------------
# one-sided distance profiles for the truncated Hilbert evaluation
# ----------------------------------------------------------------------
class _SideProfile:
    """Distances u > 0 from the evaluation point on one side.

    Density segments become u-ranges with prefix log-integrals so plateau
    contributions ∫ du/u are answered by two lookups; atoms carry prefix
    sums of m/u.
    """

    __slots__ = ("lo", "hi", "w", "prelog", "au", "am", "pream")

    def __init__(self, segs, atoms):
        segs.sort()
        atoms.sort()
        self.lo = [s[0] for s in segs]
        self.hi = [s[1] for s in segs]
        self.w = [s[2] for s in segs]
        self.au = [a[0] for a in atoms]
        self.am = [a[1] for a in atoms]
        prelog = [0.0]
        acc = 0.0
        for i in range(len(segs)):
            if self.lo[i] > 0.0:
                acc += self.w[i] * math.log(self.hi[i] / self.lo[i])
            prelog.append(acc)
        self.prelog = prelog
        pream = [0.0]
        acc = 0.0
        for i in range(len(atoms)):
            acc += self.am[i] / self.au[i]
            pream.append(acc)
        self.pream = pream

    def plateau(self, a: float, b: float) -> float:
        """∫_{[a,b)} du/u against the profile (weight identically 1)."""
        if b <= a:
            return 0.0
        total = 0.0
        lo, hi, w = self.lo, self.hi, self.w
        n = len(lo)
        i0 = bisect_right(hi, a)
        i1 = bisect_left(lo, b)
        if i0 < i1:
            first_full = i0
            last_full = i1
            if lo[i0] < a:
                top = hi[i0] if hi[i0] < b else b
                total += w[i0] * math.log(top / a)
                first_full = i0 + 1
            if first_full < i1 and hi[i1 - 1] > b:
                bot = lo[i1 - 1] if lo[i1 - 1] > a else a
                total += w[i1 - 1] * math.log(b / bot)
                last_full = i1 - 1
            if first_full < last_full:
                total += self.prelog[last_full] - self.prelog[first_full]
        j0 = bisect_left(self.au, a)
        j1 = bisect_left(self.au, b)
        total += self.pream[j1] - self.pream[j0]
        return total

    def ramp(self, code: int, p: float, a: float, b: float, rtol: float) -> float:
        """∫_{[a,b)} f(u)/u against the profile for a cutoff ramp f.

        The cubic-smoothstep ramps divided by u have elementary
        antiderivatives (polynomial plus log), evaluated per overlapping
        segment; atoms contribute pointwise.
        """
        if b <= a:
            return 0.0
        total = 0.0
        lo, hi, w = self.lo, self.hi, self.w
        i0 = bisect_right(hi, a)
        i1 = bisect_left(lo, b)
        for i in range(i0, i1):
            aa = lo[i] if lo[i] > a else a
            bb = hi[i] if hi[i] < b else b
            if aa < bb:
                total += w[i] * (
                    _ramp_antideriv(code, p, bb) - _ramp_antideriv(code, p, aa)
                )
        j0 = bisect_left(self.au, a)
        j1 = bisect_left(self.au, b)
        for j in range(j0, j1):
            u = self.au[j]
            if code == _F_ZETA:
                total += self.am[j] * zeta(u / p) / u
            else:
                total += self.am[j] * eta(u / p) / u
        return total

    def side_value(self, e: float, r: float, rtol: float) -> float:
        v = self.ramp(_F_ZETA, e, 0.5 * e, e, rtol)
        v += self.plateau(e, r)
        v += self.ramp(_F_ETA, r, r, 2.0 * r, rtol)
        return v


def _build_profiles(seg_l, seg_r, seg_w, at_x, at_m, x):
    left_segs = []
    right_segs = []
    n = len(seg_l)
    for i in range(n):
        l = float(seg_l[i])
        r = float(seg_r[i])
        w = float(seg_w[i])
        if l < x:
            top = r if r < x else x
            left_segs.append((x - top, x - l, w))
        if r > x:
            bot = l if l > x else x
            right_segs.append((bot - x, r - x, w))
    left_atoms = []
    right_atoms = []
    for j in range(len(at_x)):
        ax = float(at_x[j])
        am = float(at_m[j])
        if ax < x:
            left_atoms.append((x - ax, am))
        elif ax > x:
            right_atoms.append((ax - x, am))
        # an atom exactly at x never contributes: the cutoff vanishes at 0
    return _SideProfile(left_segs, left_atoms), _SideProfile(right_segs, right_atoms)


def _trunc_from_profiles(left, right, e1, e2, r, rtol):
    return left.side_value(e1, r, rtol) - right.side_value(e2, r, rtol)


def trunc_value(seg_l, seg_r, seg_w, at_x, at_m, x, e1, e2, r, rtol=RTOL):
    """Two-sided smoothly truncated Hilbert evaluation at x."""
    left, rightp = _build_profiles(seg_l, seg_r, seg_w, at_x, at_m, x)
    return _trunc_from_profiles(left, rightp, e1, e2, r, rtol)


def _golden(fun, a, b, iters):
    """Golden-section maximization on [a, b]; returns (best_t, best_val)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = fun(c)
    fd = fun(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    if fc > fd:
        return c, fc
    return d, fd


def sup_search(
    seg_l,
    seg_r,
    seg_w,
    at_x,
    at_m,
    x,
    lo,
    hi,
    npts,
    ratios,
    refine_iters,
    extras,
    centered_branch,
    pin_ratio=False,
    rtol=RTOL,
):
    """Lower approximation of the truncation supremum at x.

    Grid of npts log-spaced scales for the right cutoff and the cap, crossed
    with the eccentricity ratios; one golden-section pass per coordinate
    around the argmax.  When ``centered_branch`` is set the centered
    (ratio 1) argmax is refined with the ratio pinned as well, so the
    centered search value is always dominated.  ``extras`` is a flat list of
    explicit (e1, e2, R) candidates that are always evaluated.

    Returns (value, e1, e2, R) of the best candidate found.
    """
    left, right = _build_profiles(seg_l, seg_r, seg_w, at_x, at_m, x)
    if not left.lo and not left.au and not right.lo and not right.au:
        return 0.0, 0.0, 0.0, 0.0
    if not (hi > lo > 0.0):
        lo = max(lo, 1e-300)
        hi = max(hi, 2.0 * lo)

    def value(e1, e2, r):
        if e1 <= 0.0 or e2 <= 0.0:
            return -1.0
        m = e1 if e1 > e2 else e2
        if r <= m:
            return -1.0
        return abs(_trunc_from_profiles(left, right, e1, e2, r, rtol))

    lln = math.log(lo)
    step = (math.log(hi) - lln) / (npts - 1) if npts > 1 else 0.0
    grid = [math.exp(lln + i * step) for i in range(npts)]
    r_top = 4.0 * hi

    best = -1.0
    be1 = be2 = br = 0.0
    cbest = -1.0
    ce = cr = 0.0
    for ratio in ratios:
        for e2 in grid:
            e1 = ratio * e2
            emax = e1 if e1 > e2 else e2
            for r in grid:
                if r <= emax:
                    continue
                v = value(e1, e2, r)
                if v > best:
                    best, be1, be2, br = v, e1, e2, r
                if ratio == 1.0 and v > cbest:
                    cbest, ce, cr = v, e2, r
            v = value(e1, e2, r_top)
            if v > best:
                best, be1, be2, br = v, e1, e2, r_top
            if ratio == 1.0 and v > cbest:
                cbest, ce, cr = v, e2, r_top

    if best < 0.0:
        return 0.0, 0.0, 0.0, 0.0

    win = step if step > 0.0 else 0.5 * math.log(10.0)

    def refine_triple(e1, e2, r, pinned):
        # coordinate passes in log scale: right cutoff, ratio band, cap
        le2, lr = math.log(e2), math.log(r)
        lratio = math.log(e1 / e2)
        t, _ = _golden(
            lambda s: value(math.exp(lratio + s), math.exp(s), math.exp(lr)),
            le2 - win,
            le2 + win,
            refine_iters,
        )
        le2 = t
        if not pinned:
            a = max(math.log(0.25), lratio - win)
            b = min(math.log(4.0), lratio + win)
            t, _ = _golden(
                lambda s: value(math.exp(s + le2), math.exp(le2), math.exp(lr)),
                a,
                b,
                refine_iters,
            )
            lratio = t
        t, _ = _golden(
            lambda s: value(math.exp(lratio + le2), math.exp(le2), math.exp(s)),
            lr - win,
            lr + win,
            refine_iters,
        )
        lr = t
        e1n = math.exp(lratio + le2)
        e2n = math.exp(le2)
        rn = math.exp(lr)
        return value(e1n, e2n, rn), e1n, e2n, rn

    if refine_iters > 0:
        v, e1n, e2n, rn = refine_triple(be1, be2, br, pin_ratio)
        if v > best:
            best, be1, be2, br = v, e1n, e2n, rn
        if centered_branch and cbest > 0.0:
            v, e1n, e2n, rn = refine_triple(ce, ce, cr, True)
            if v > best:
                best, be1, be2, br = v, e1n, e2n, rn

    for i in range(0, len(extras), 3):
        e1 = float(extras[i])
        e2 = float(extras[i + 1])
        r = float(extras[i + 2])
        v = value(e1, e2, r)
        if v > best:
            best, be1, be2, br = v, e1, e2, r
    return best, be1, be2, br


def maximal_value(seg_l, seg_r, seg_w, at_x, at_m, x):
    """Exact noncentered maximal function of an unsigned measure at x.

    The average over [a, b) is monotone in each endpoint between
    breakpoints, so the supremum over intervals containing x is attained in
    the closure of the family with endpoints at segment edges, atom
    positions and x itself; closed right ends (atom included) are extra
    candidates realizing right limits.
    """
    n = len(seg_l)
    na = len(at_x)
    if n == 0 and na == 0:
        return 0.0
    for j in range(na):
        if float(at_x[j]) == x and float(at_m[j]) != 0.0:
            return math.inf
    bps = set()
    for i in range(n):
        bps.add(float(seg_l[i]))
        bps.add(float(seg_r[i]))
    for j in range(na):
        bps.add(float(at_x[j]))
    bps.add(float(x))
    bp = sorted(bps)
    m = len(bp)
    # cumulative mass strictly before bp[i], and the atom sitting at bp[i];
    # one merged sweep over segments and atoms (both sorted)
    pref = [0.0] * m
    at_here = [0.0] * m
    acc = 0.0
    si = 0
    aj = 0
    for i in range(m):
        t = bp[i]
        while si < n and float(seg_r[si]) <= t:
            acc += float(seg_w[si]) * (float(seg_r[si]) - float(seg_l[si]))
            si += 1
        while aj < na and float(at_x[aj]) < t:
            acc += float(at_m[aj])
            aj += 1
        pref_i = acc
        if si < n and float(seg_l[si]) < t:
            pref_i += float(seg_w[si]) * (t - float(seg_l[si]))
        if aj < na and float(at_x[aj]) == t:
            at_here[i] = float(at_m[aj])
        pref[i] = pref_i
    ix = bp.index(float(x))
    best = 0.0
    for i in range(0, ix + 1):
        pa = pref[i]
        ba = bp[i]
        for j in range(ix, m):
            bb = bp[j]
            if bb <= ba:
                continue
            inv = 1.0 / (bb - ba)
            v = (pref[j] - pa) * inv
            if v > best:
                best = v
            v = (pref[j] - pa + at_here[j]) * inv
            if v > best:
                best = v
    return best

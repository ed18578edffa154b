# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evaluation kernels: smooth truncated Hilbert transforms against
segment+atom measures, the truncation-parameter supremum search, the exact
maximal function, and power tail-kernel integrals.

Mirror of tws._kernels_py (same algorithms, same float operation order).
"""

from libc.math cimport fabs, log, exp, sqrt, pow, INFINITY
from libc.stdlib cimport malloc, free, qsort

cdef double RTOL = 1e-9
cdef int MAX_DEPTH = 40
cdef double INVPHI = (sqrt(5.0) - 1.0) / 2.0

cdef int F_ZETA = 0
cdef int F_ETA = 1
cdef int F_POWER = 2


cdef inline double zeta_c(double v) nogil:
    cdef double q
    if v <= 0.5:
        return 0.0
    if v >= 1.0:
        return 1.0
    q = 2.0 * v - 1.0
    return q * q * (3.0 - 2.0 * q)


cdef inline double eta_c(double v) nogil:
    cdef double q
    if v <= 1.0:
        return 1.0
    if v >= 2.0:
        return 0.0
    q = v - 1.0
    return 1.0 - q * q * (3.0 - 2.0 * q)


def zeta(double v):
    return zeta_c(v)


def eta(double v):
    return eta_c(v)


cdef double f_eval(int code, double p1, double p2, double p3, double u) nogil:
    if code == F_ZETA:
        return zeta_c(u / p1) / u
    if code == F_ETA:
        return eta_c(u / p1) / u
    return pow(p2 / (p2 + fabs(u - p1)), p3)


cdef double asimp_rec(int code, double p1, double p2, double p3,
                      double a, double fa, double m, double fm,
                      double b, double fb, double whole,
                      double rtol, int depth, double* worst) nogil:
    cdef double lm = 0.5 * (a + m)
    cdef double rm = 0.5 * (m + b)
    cdef double flm = f_eval(code, p1, p2, p3, lm)
    cdef double frm = f_eval(code, p1, p2, p3, rm)
    cdef double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    cdef double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    cdef double err = left + right - whole
    cdef double scale = fabs(left + right) + 1e-300
    cdef double ratio
    if fabs(err) <= 15.0 * rtol * scale or depth >= MAX_DEPTH:
        if depth >= MAX_DEPTH and fabs(err) > 15.0 * rtol * scale:
            ratio = fabs(err) / scale / 15.0 / rtol
            if ratio > worst[0]:
                worst[0] = ratio
        return left + right + err / 15.0
    return asimp_rec(code, p1, p2, p3, a, fa, lm, flm, m, fm, left,
                     rtol, depth + 1, worst) + \
        asimp_rec(code, p1, p2, p3, m, fm, rm, frm, b, fb, right,
                  rtol, depth + 1, worst)


cdef double asimp(int code, double p1, double p2, double p3,
                  double a, double b, double rtol, double* worst) nogil:
    cdef double fa = f_eval(code, p1, p2, p3, a)
    cdef double fb = f_eval(code, p1, p2, p3, b)
    cdef double m = 0.5 * (a + b)
    cdef double fm = f_eval(code, p1, p2, p3, m)
    cdef double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return asimp_rec(code, p1, p2, p3, a, fa, m, fm, b, fb, whole, rtol, 0, worst)


def power_tail_segments(double[::1] seg_l, double[::1] seg_r, double[::1] seg_w,
                        double c, double h, double e, double rtol):
    """(value, worst_ratio): ∫ (h/(h+|y-c|))^e over the density segments."""
    cdef double worst = 0.0
    cdef double total = 0.0
    cdef Py_ssize_t i, n = seg_l.shape[0]
    cdef double l, r, w
    for i in range(n):
        l = seg_l[i]
        r = seg_r[i]
        w = seg_w[i]
        if w == 0.0:
            continue
        if l < c < r:
            total += w * asimp(F_POWER, c, h, e, l, c, rtol, &worst)
            total += w * asimp(F_POWER, c, h, e, c, r, rtol, &worst)
        else:
            total += w * asimp(F_POWER, c, h, e, l, r, rtol, &worst)
    return total, worst


# ----------------------------------------------------------------------
# one-sided distance profiles
# ----------------------------------------------------------------------
cdef struct Profile:
    int n
    double* lo
    double* hi
    double* w
    double* prelog
    int na
    double* au
    double* am
    double* pream


cdef void free_profile(Profile* p) nogil:
    if p.lo != NULL:
        free(p.lo)
    if p.au != NULL:
        free(p.au)


cdef int alloc_profile(Profile* p, int n, int na) nogil:
    p.n = n
    p.na = na
    p.lo = NULL
    p.au = NULL
    p.lo = <double*> malloc(sizeof(double) * (3 * n + n + 1) if n > 0 else sizeof(double))
    if p.lo == NULL:
        return -1
    p.hi = p.lo + n
    p.w = p.lo + 2 * n
    p.prelog = p.lo + 3 * n
    p.au = <double*> malloc(sizeof(double) * (2 * na + na + 1) if na > 0 else sizeof(double))
    if p.au == NULL:
        return -1
    p.am = p.au + na
    p.pream = p.au + 2 * na
    return 0


cdef int upper_bound(double* arr, int n, double v) nogil:
    # first index i with arr[i] > v
    cdef int lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef int lower_bound(double* arr, int n, double v) nogil:
    # first index i with arr[i] >= v
    cdef int lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef void finish_profile(Profile* p) nogil:
    # prefix arrays; segments and atoms are already sorted by distance
    cdef int i
    cdef double acc = 0.0
    p.prelog[0] = 0.0
    for i in range(p.n):
        if p.lo[i] > 0.0:
            acc += p.w[i] * log(p.hi[i] / p.lo[i])
        p.prelog[i + 1] = acc
    acc = 0.0
    p.pream[0] = 0.0
    for i in range(p.na):
        acc += p.am[i] / p.au[i]
        p.pream[i + 1] = acc


cdef double plateau(Profile* p, double a, double b) nogil:
    if b <= a:
        return 0.0
    cdef double total = 0.0
    cdef int i0 = upper_bound(p.hi, p.n, a)
    cdef int i1 = lower_bound(p.lo, p.n, b)
    cdef int first_full, last_full
    cdef double top, bot
    if i0 < i1:
        first_full = i0
        last_full = i1
        if p.lo[i0] < a:
            top = p.hi[i0] if p.hi[i0] < b else b
            total += p.w[i0] * log(top / a)
            first_full = i0 + 1
        if first_full < i1 and p.hi[i1 - 1] > b:
            bot = p.lo[i1 - 1] if p.lo[i1 - 1] > a else a
            total += p.w[i1 - 1] * log(b / bot)
            last_full = i1 - 1
        if first_full < last_full:
            total += p.prelog[last_full] - p.prelog[first_full]
    cdef int j0 = lower_bound(p.au, p.na, a)
    cdef int j1 = lower_bound(p.au, p.na, b)
    total += p.pream[j1] - p.pream[j0]
    return total


cdef inline double ramp_antideriv(int code, double p, double u) nogil:
    # antiderivative of zeta(u/p)/u resp. eta(u/p)/u on the ramp; the cubic
    # smoothstep divided by u integrates to a polynomial plus a log
    cdef double v = u / p
    if code == F_ZETA:
        return ((-16.0 / 3.0 * v + 18.0) * v - 24.0) * v + 5.0 * log(u)
    return ((2.0 / 3.0 * v - 4.5) * v + 12.0) * v - 4.0 * log(u)


cdef double ramp(Profile* p, int code, double par, double a, double b,
                 double rtol) nogil:
    if b <= a:
        return 0.0
    cdef double total = 0.0
    cdef int i0 = upper_bound(p.hi, p.n, a)
    cdef int i1 = lower_bound(p.lo, p.n, b)
    cdef double aa, bb, u
    cdef int i, j
    for i in range(i0, i1):
        aa = p.lo[i] if p.lo[i] > a else a
        bb = p.hi[i] if p.hi[i] < b else b
        if aa < bb:
            total += p.w[i] * (
                ramp_antideriv(code, par, bb) - ramp_antideriv(code, par, aa)
            )
    cdef int j0 = lower_bound(p.au, p.na, a)
    cdef int j1 = lower_bound(p.au, p.na, b)
    for j in range(j0, j1):
        u = p.au[j]
        if code == F_ZETA:
            total += p.am[j] * zeta_c(u / par) / u
        else:
            total += p.am[j] * eta_c(u / par) / u
    return total


cdef double side_value(Profile* p, double e, double r, double rtol) nogil:
    cdef double v = ramp(p, F_ZETA, e, 0.5 * e, e, rtol)
    v += plateau(p, e, r)
    v += ramp(p, F_ETA, r, r, 2.0 * r, rtol)
    return v


cdef double trunc_from_profiles(Profile* left, Profile* right,
                                double e1, double e2, double r,
                                double rtol) nogil:
    return side_value(left, e1, r, rtol) - side_value(right, e2, r, rtol)


cdef int cmp_double(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const double*> pa)[0]
    cdef double b = (<const double*> pb)[0]
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


cdef int build_profiles(double[::1] seg_l, double[::1] seg_r, double[::1] seg_w,
                        double[::1] at_x, double[::1] at_m, double x,
                        Profile* left, Profile* right) nogil:
    # left side distances decrease as the segment index grows, so fill the
    # left profile in reverse segment order to keep it sorted by distance
    cdef int n = <int> seg_l.shape[0]
    cdef int na = <int> at_x.shape[0]
    cdef int nl = 0, nr = 0, nal = 0, nar = 0
    cdef int i
    cdef double l, r, w, top, bot, ax
    for i in range(n):
        if seg_l[i] < x:
            nl += 1
        if seg_r[i] > x:
            nr += 1
    for i in range(na):
        if at_x[i] < x:
            nal += 1
        elif at_x[i] > x:
            nar += 1
    if alloc_profile(left, nl, nal) != 0:
        return -1
    if alloc_profile(right, nr, nar) != 0:
        return -1
    cdef int k = 0
    for i in range(n - 1, -1, -1):
        l = seg_l[i]
        r = seg_r[i]
        w = seg_w[i]
        if l < x:
            top = r if r < x else x
            left.lo[k] = x - top
            left.hi[k] = x - l
            left.w[k] = w
            k += 1
    k = 0
    for i in range(n):
        l = seg_l[i]
        r = seg_r[i]
        w = seg_w[i]
        if r > x:
            bot = l if l > x else x
            right.lo[k] = bot - x
            right.hi[k] = r - x
            right.w[k] = w
            k += 1
    k = 0
    for i in range(na - 1, -1, -1):
        ax = at_x[i]
        if ax < x:
            left.au[k] = x - ax
            left.am[k] = at_m[i]
            k += 1
    k = 0
    for i in range(na):
        ax = at_x[i]
        if ax > x:
            right.au[k] = ax - x
            right.am[k] = at_m[i]
            k += 1
    finish_profile(left)
    finish_profile(right)
    return 0


def trunc_value(double[::1] seg_l, double[::1] seg_r, double[::1] seg_w,
                double[::1] at_x, double[::1] at_m, double x,
                double e1, double e2, double r, double rtol=RTOL):
    """Two-sided smoothly truncated Hilbert evaluation at x."""
    cdef Profile left, right
    left.lo = NULL
    left.au = NULL
    right.lo = NULL
    right.au = NULL
    cdef double out
    if build_profiles(seg_l, seg_r, seg_w, at_x, at_m, x, &left, &right) != 0:
        free_profile(&left)
        free_profile(&right)
        raise MemoryError()
    out = trunc_from_profiles(&left, &right, e1, e2, r, rtol)
    free_profile(&left)
    free_profile(&right)
    return out


cdef double value_of(Profile* left, Profile* right, double e1, double e2,
                     double r, double rtol) nogil:
    cdef double m
    if e1 <= 0.0 or e2 <= 0.0:
        return -1.0
    m = e1 if e1 > e2 else e2
    if r <= m:
        return -1.0
    return fabs(trunc_from_profiles(left, right, e1, e2, r, rtol))


cdef void golden_coord(Profile* left, Profile* right, int coord,
                       double lratio, double le2, double lr,
                       double a, double b, int iters, double rtol,
                       double* out_t, double* out_f) nogil:
    cdef double c = b - INVPHI * (b - a)
    cdef double d = a + INVPHI * (b - a)
    cdef double fc = coord_value(left, right, coord, lratio, le2, lr, c, rtol)
    cdef double fd = coord_value(left, right, coord, lratio, le2, lr, d, rtol)
    cdef int it
    for it in range(iters):
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            fc = coord_value(left, right, coord, lratio, le2, lr, c, rtol)
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = coord_value(left, right, coord, lratio, le2, lr, d, rtol)
    if fc > fd:
        out_t[0] = c
        out_f[0] = fc
    else:
        out_t[0] = d
        out_f[0] = fd


cdef double coord_value(Profile* left, Profile* right, int coord,
                        double lratio, double le2, double lr, double s,
                        double rtol) nogil:
    if coord == 0:
        return value_of(left, right, exp(lratio + s), exp(s), exp(lr), rtol)
    if coord == 1:
        return value_of(left, right, exp(s + le2), exp(le2), exp(lr), rtol)
    return value_of(left, right, exp(lratio + le2), exp(le2), exp(s), rtol)


cdef void refine_triple(Profile* left, Profile* right,
                        double e1, double e2, double r,
                        bint pinned, double win, int iters, double rtol,
                        double* out) nogil:
    cdef double le2 = log(e2)
    cdef double lr = log(r)
    cdef double lratio = log(e1 / e2)
    cdef double t, f, a, b
    golden_coord(left, right, 0, lratio, le2, lr, le2 - win, le2 + win,
                 iters, rtol, &t, &f)
    le2 = t
    if not pinned:
        a = lratio - win
        if a < log(0.25):
            a = log(0.25)
        b = lratio + win
        if b > log(4.0):
            b = log(4.0)
        golden_coord(left, right, 1, lratio, le2, lr, a, b, iters, rtol, &t, &f)
        lratio = t
    golden_coord(left, right, 2, lratio, le2, lr, lr - win, lr + win,
                 iters, rtol, &t, &f)
    lr = t
    cdef double e1n = exp(lratio + le2)
    cdef double e2n = exp(le2)
    cdef double rn = exp(lr)
    out[0] = value_of(left, right, e1n, e2n, rn, rtol)
    out[1] = e1n
    out[2] = e2n
    out[3] = rn


def sup_search(double[::1] seg_l, double[::1] seg_r, double[::1] seg_w,
               double[::1] at_x, double[::1] at_m, double x,
               double lo, double hi, int npts, double[::1] ratios,
               int refine_iters, double[::1] extras, bint centered_branch,
               bint pin_ratio=False, double rtol=RTOL):
    """Lower approximation of the truncation supremum at x; see the pure

    backend for the full contract.  Returns (value, e1, e2, R)."""
    cdef Profile left, right
    left.lo = NULL
    left.au = NULL
    right.lo = NULL
    right.au = NULL
    if build_profiles(seg_l, seg_r, seg_w, at_x, at_m, x, &left, &right) != 0:
        free_profile(&left)
        free_profile(&right)
        raise MemoryError()
    if left.n == 0 and left.na == 0 and right.n == 0 and right.na == 0:
        free_profile(&left)
        free_profile(&right)
        return 0.0, 0.0, 0.0, 0.0
    if not (hi > lo > 0.0):
        lo = lo if lo > 1e-300 else 1e-300
        hi = hi if hi > 2.0 * lo else 2.0 * lo

    cdef double lln = log(lo)
    cdef double step = (log(hi) - lln) / (npts - 1) if npts > 1 else 0.0
    cdef double* grid = <double*> malloc(sizeof(double) * npts)
    if grid == NULL:
        free_profile(&left)
        free_profile(&right)
        raise MemoryError()
    cdef int i, j, k
    for i in range(npts):
        grid[i] = exp(lln + i * step)
    cdef double r_top = 4.0 * hi

    cdef double best = -1.0
    cdef double be1 = 0.0, be2 = 0.0, br = 0.0
    cdef double cbest = -1.0
    cdef double ce = 0.0, cr = 0.0
    cdef double ratio, e1, e2, emax, r, v
    cdef int nratios = <int> ratios.shape[0]
    with nogil:
        for k in range(nratios):
            ratio = ratios[k]
            for i in range(npts):
                e2 = grid[i]
                e1 = ratio * e2
                emax = e1 if e1 > e2 else e2
                for j in range(npts):
                    r = grid[j]
                    if r <= emax:
                        continue
                    v = value_of(&left, &right, e1, e2, r, rtol)
                    if v > best:
                        best = v
                        be1 = e1
                        be2 = e2
                        br = r
                    if ratio == 1.0 and v > cbest:
                        cbest = v
                        ce = e2
                        cr = r
                v = value_of(&left, &right, e1, e2, r_top, rtol)
                if v > best:
                    best = v
                    be1 = e1
                    be2 = e2
                    br = r_top
                if ratio == 1.0 and v > cbest:
                    cbest = v
                    ce = e2
                    cr = r_top
    free(grid)
    if best < 0.0:
        free_profile(&left)
        free_profile(&right)
        return 0.0, 0.0, 0.0, 0.0

    cdef double win = step if step > 0.0 else 0.5 * log(10.0)
    cdef double out[4]
    if refine_iters > 0:
        refine_triple(&left, &right, be1, be2, br, pin_ratio, win,
                      refine_iters, rtol, out)
        if out[0] > best:
            best = out[0]
            be1 = out[1]
            be2 = out[2]
            br = out[3]
        if centered_branch and cbest > 0.0:
            refine_triple(&left, &right, ce, ce, cr, True, win,
                          refine_iters, rtol, out)
            if out[0] > best:
                best = out[0]
                be1 = out[1]
                be2 = out[2]
                br = out[3]

    cdef int nx = <int> extras.shape[0]
    for i in range(0, nx, 3):
        e1 = extras[i]
        e2 = extras[i + 1]
        r = extras[i + 2]
        v = value_of(&left, &right, e1, e2, r, rtol)
        if v > best:
            best = v
            be1 = e1
            be2 = e2
            br = r
    free_profile(&left)
    free_profile(&right)
    return best, be1, be2, br


def maximal_value(double[::1] seg_l, double[::1] seg_r, double[::1] seg_w,
                  double[::1] at_x, double[::1] at_m, double x):
    """Exact noncentered maximal function of an unsigned measure at x."""
    cdef int n = <int> seg_l.shape[0]
    cdef int na = <int> at_x.shape[0]
    if n == 0 and na == 0:
        return 0.0
    cdef int i, j
    for j in range(na):
        if at_x[j] == x and at_m[j] != 0.0:
            return INFINITY
    cdef int mcap = 2 * n + na + 1
    cdef double* raw = <double*> malloc(sizeof(double) * mcap)
    if raw == NULL:
        raise MemoryError()
    cdef int m = 0
    for i in range(n):
        raw[m] = seg_l[i]
        m += 1
        raw[m] = seg_r[i]
        m += 1
    for j in range(na):
        raw[m] = at_x[j]
        m += 1
    raw[m] = x
    m += 1
    qsort(raw, m, sizeof(double), cmp_double)
    # dedupe in place
    cdef int mm = 0
    for i in range(m):
        if mm == 0 or raw[i] != raw[mm - 1]:
            raw[mm] = raw[i]
            mm += 1
    m = mm
    cdef double* pref = <double*> malloc(sizeof(double) * m)
    cdef double* at_here = <double*> malloc(sizeof(double) * m)
    if pref == NULL or at_here == NULL:
        free(raw)
        if pref != NULL:
            free(pref)
        if at_here != NULL:
            free(at_here)
        raise MemoryError()
    cdef double acc = 0.0
    cdef int si = 0, aj = 0
    cdef double t, pref_i
    for i in range(m):
        t = raw[i]
        at_here[i] = 0.0
        while si < n and seg_r[si] <= t:
            acc += seg_w[si] * (seg_r[si] - seg_l[si])
            si += 1
        while aj < na and at_x[aj] < t:
            acc += at_m[aj]
            aj += 1
        pref_i = acc
        if si < n and seg_l[si] < t:
            pref_i += seg_w[si] * (t - seg_l[si])
        if aj < na and at_x[aj] == t:
            at_here[i] = at_m[aj]
        pref[i] = pref_i
    cdef int ix = lower_bound(raw, m, x)
    cdef double best = 0.0
    cdef double pa, ba, bb, inv, v
    for i in range(ix + 1):
        pa = pref[i]
        ba = raw[i]
        for j in range(ix, m):
            bb = raw[j]
            if bb <= ba:
                continue
            inv = 1.0 / (bb - ba)
            v = (pref[j] - pa) * inv
            if v > best:
                best = v
            v = (pref[j] - pa + at_here[j]) * inv
            if v > best:
                best = v
    free(raw)
    free(pref)
    free(at_here)
    return best

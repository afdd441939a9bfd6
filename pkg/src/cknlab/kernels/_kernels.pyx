# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid-minimizer kernels; see ``_fallback.py`` for the reference version."""
import numpy as np

from libc.math cimport pow, log, fabs, isfinite, INFINITY
from libc.stdlib cimport malloc, free

cdef enum:
    MAX_EXPAND = 40


def segment_terms(u, frac, weight, gcoef, double r, double q, double p, bint with_q=True):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[:, ::1] fr = np.ascontiguousarray(frac, dtype=np.float64)
    cdef double[:, ::1] wt = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[::1] gc = np.ascontiguousarray(gcoef, dtype=np.float64)
    cdef Py_ssize_t N = gc.shape[0], i
    out_r = np.empty(N)
    out_q = np.empty(N)
    out_g = np.empty(N)
    cdef double[::1] sr = out_r, sq = out_q, sg = out_g
    cdef double tri[3]
    for i in range(N):
        _segment(uv[i], uv[i + 1], &fr[i, 0], &wt[i, 0], fr.shape[1], r, q, p, gc[i],
                 with_q, tri)
        sr[i] = tri[0]
        sq[i] = tri[1]
        sg[i] = tri[2]
    return out_r, out_q, out_g


cdef inline void _segment(double a, double b, const double* frow, const double* wrow,
                          Py_ssize_t M, double r, double q, double p, double g,
                          bint with_q, double* out) noexcept nogil:
    cdef double sr = 0.0, sq = 0.0, diff = b - a, x, w
    cdef Py_ssize_t k
    for k in range(M):
        x = a + diff * frow[k]
        w = wrow[k]
        if x > 0.0 and w != 0.0:
            sr += w * pow(x, r)
            if with_q:
                sq += w * pow(x, q)
    out[0] = sr
    out[1] = sq
    out[2] = pow(fabs(diff), p) * g


cdef inline double _objective(double tr, double tq, double tg,
                              double wr, double wq, double wg) noexcept nogil:
    cdef double out
    if tr <= 0.0 or tg <= 0.0 or (wq != 0.0 and tq <= 0.0):
        return INFINITY
    out = wg * log(tg) - wr * log(tr)
    if wq != 0.0:
        out += wq * log(tq)
    return out


cdef inline bint _vertex(double x0, double f0, double x1, double f1, double x2, double f2,
                         double* out) noexcept nogil:
    cdef double d1 = (x1 - x0) * (f1 - f2)
    cdef double d2 = (x1 - x2) * (f1 - f0)
    cdef double den = 2.0 * (d1 - d2)
    if den == 0.0 or not isfinite(den):
        return False
    out[0] = x1 - ((x1 - x0) * d1 - (x1 - x2) * d2) / den
    return True


cdef struct Ctx:
    double* vals
    double* cache      # 3 per segment
    const double* frac
    const double* weight
    const double* g
    Py_ssize_t M
    double r, q, p, wr, wq, wg
    bint with_q
    double tr, tq, tg
    double old_r, old_q, old_g
    Py_ssize_t j, half, k_lo, k_hi, s_lo, s_hi
    double* v          # trial values for knots s_lo..s_hi
    double* segs       # trial segment triples


cdef double _trial(Ctx* c, double tau) noexcept nogil:
    cdef Py_ssize_t k, i, off
    cdef double d, x, nr = 0.0, nq = 0.0, ng = 0.0
    for k in range(c.s_lo, c.s_hi + 1):
        c.v[k - c.s_lo] = c.vals[k]
    for k in range(c.k_lo, c.k_hi + 1):
        d = 1.0 - fabs(<double>(k - c.j)) / c.half
        x = c.v[k - c.s_lo] + tau * d
        c.v[k - c.s_lo] = x if x > 0.0 else 0.0
    for i in range(c.s_lo, c.s_hi):
        off = 3 * (i - c.s_lo)
        _segment(c.v[i - c.s_lo], c.v[i - c.s_lo + 1], c.frac + i * c.M, c.weight + i * c.M,
                 c.M, c.r, c.q, c.p, c.g[i], c.with_q, c.segs + off)
        nr += c.segs[off]
        nq += c.segs[off + 1]
        ng += c.segs[off + 2]
    return _objective(c.tr - c.old_r + nr, c.tq - c.old_q + nq, c.tg - c.old_g + ng,
                      c.wr, c.wq, c.wg)


cdef inline void _keep(Ctx* c, double* bv, double* bs) noexcept nogil:
    cdef Py_ssize_t k, n = c.s_hi - c.s_lo
    for k in range(n + 1):
        bv[k] = c.v[k]
    for k in range(3 * n):
        bs[k] = c.segs[k]


cdef void _totals(Ctx* c, Py_ssize_t N) noexcept nogil:
    cdef Py_ssize_t i
    c.tr = 0.0
    c.tq = 0.0
    c.tg = 0.0
    for i in range(N):
        c.tr += c.cache[3 * i]
        c.tq += c.cache[3 * i + 1]
        c.tg += c.cache[3 * i + 2]


def cd_sweep(double[::1] u, frac, weight, gcoef, double r, double q, double p,
             double wr, double wq, double wg, double[:, ::1] steps, levels, double min_step):
    cdef double[:, ::1] fr = np.ascontiguousarray(frac, dtype=np.float64)
    cdef double[:, ::1] wt = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[::1] gc = np.ascontiguousarray(gcoef, dtype=np.float64)
    cdef Py_ssize_t K = u.shape[0], N = K - 1, i, k, li, n_lev = len(levels), L
    cdef long[::1] lev = np.ascontiguousarray(levels, dtype=np.int_)
    cdef double[::1] cache_arr = np.empty(3 * N)
    cdef Ctx c
    cdef double fcur, delta, sign, f1, t_prev, f_prev, t1, t2, f2, tv, fv, best_f, best_t
    cdef double px[3]
    cdef double pf[3]
    cdef double tmpx, tmpf
    cdef bint found, have
    cdef Py_ssize_t evals = 0, it, si, a_, b_, jj
    cdef Py_ssize_t width = 2 * (1 << (max(levels) if n_lev else 0)) + 2
    cdef double* bv = <double*> malloc(width * sizeof(double))
    cdef double* bs = <double*> malloc(3 * width * sizeof(double))
    cdef double* vbuf = <double*> malloc(width * sizeof(double))
    cdef double* sbuf = <double*> malloc(3 * width * sizeof(double))
    if not bv or not bs or not vbuf or not sbuf:
        free(bv); free(bs); free(vbuf); free(sbuf)
        raise MemoryError()
    c.vals = &u[0]
    c.cache = &cache_arr[0]
    c.frac = &fr[0, 0]
    c.weight = &wt[0, 0]
    c.g = &gc[0]
    c.M = fr.shape[1]
    c.r = r; c.q = q; c.p = p
    c.wr = wr; c.wq = wq; c.wg = wg
    c.with_q = wq != 0.0
    c.v = vbuf
    c.segs = sbuf
    try:
        with nogil:
            for i in range(N):
                _segment(u[i], u[i + 1], c.frac + i * c.M, c.weight + i * c.M, c.M,
                         r, q, p, c.g[i], c.with_q, c.cache + 3 * i)
            _totals(&c, N)
            fcur = _objective(c.tr, c.tq, c.tg, wr, wq, wg)
            for li in range(n_lev):
                L = lev[li]
                c.half = 1 << L
                jj = -c.half
                while jj + c.half < K - 1:
                    jj += c.half
                    c.j = jj
                    c.k_lo = c.j - c.half if c.j > c.half else 0
                    c.k_hi = c.j + c.half if c.j + c.half < K - 2 else K - 2
                    c.s_lo = c.k_lo
                    c.s_hi = c.j + c.half if c.j + c.half < N else N
                    c.old_r = 0.0; c.old_q = 0.0; c.old_g = 0.0
                    for i in range(c.s_lo, c.s_hi):
                        c.old_r += c.cache[3 * i]
                        c.old_q += c.cache[3 * i + 1]
                        c.old_g += c.cache[3 * i + 2]
                    delta = steps[li, c.j]
                    if delta < min_step:
                        delta = min_step
                    best_f = fcur
                    best_t = 0.0
                    found = False
                    px[0] = 0.0; pf[0] = fcur
                    for si in range(2):
                        sign = 1.0 if si == 0 else -1.0
                        f1 = _trial(&c, sign * delta)
                        evals += 1
                        px[si + 1] = sign * delta; pf[si + 1] = f1
                        if f1 < fcur:
                            found = True
                            best_f = f1; best_t = sign * delta
                            _keep(&c, bv, bs)
                            t_prev = 0.0; f_prev = fcur
                            t1 = sign * delta
                            t2 = t1; f2 = f1
                            for it in range(MAX_EXPAND):
                                t2 = 2.0 * t1
                                f2 = _trial(&c, t2)
                                evals += 1
                                if f2 < best_f:
                                    t_prev = t1; f_prev = best_f
                                    best_f = f2; best_t = t2
                                    _keep(&c, bv, bs)
                                    t1 = t2
                                else:
                                    break
                            px[0] = t_prev; pf[0] = f_prev
                            px[1] = t1; pf[1] = best_f
                            px[2] = t2; pf[2] = f2
                            break
                    if not found:
                        # sort the three points by abscissa
                        for a_ in range(2):
                            for b_ in range(2 - a_):
                                if px[b_] > px[b_ + 1]:
                                    tmpx = px[b_]; px[b_] = px[b_ + 1]; px[b_ + 1] = tmpx
                                    tmpf = pf[b_]; pf[b_] = pf[b_ + 1]; pf[b_ + 1] = tmpf
                    have = _vertex(px[0], pf[0], px[1], pf[1], px[2], pf[2], &tv)
                    if have and isfinite(tv) and tv != best_t:
                        fv = _trial(&c, tv)
                        evals += 1
                        if fv < best_f:
                            found = True
                            best_f = fv; best_t = tv
                            _keep(&c, bv, bs)
                    if not found:
                        steps[li, c.j] = 0.25 * delta
                        continue
                    for k in range(c.s_lo, c.s_hi + 1):
                        u[k] = bv[k - c.s_lo]
                    for i in range(c.s_lo, c.s_hi):
                        for k in range(3):
                            if k == 0:
                                c.tr += bs[3 * (i - c.s_lo)] - c.cache[3 * i]
                            elif k == 1:
                                c.tq += bs[3 * (i - c.s_lo) + 1] - c.cache[3 * i + 1]
                            else:
                                c.tg += bs[3 * (i - c.s_lo) + 2] - c.cache[3 * i + 2]
                            c.cache[3 * i + k] = bs[3 * (i - c.s_lo) + k]
                    fcur = best_f
                    steps[li, c.j] = fabs(best_t) if fabs(best_t) > min_step else min_step
            _totals(&c, N)
            fcur = _objective(c.tr, c.tq, c.tg, wr, wq, wg)
    finally:
        free(bv); free(bs); free(vbuf); free(sbuf)
    return fcur, evals

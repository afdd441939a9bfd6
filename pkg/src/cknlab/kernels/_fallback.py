"""Pure-Python implementation of the grid-minimizer kernels.

Mirrors ``_kernels.pyx`` line for line so the two can be compared directly;
used when the compiled module is unavailable or ``CKN_FORCE_PYTHON`` is set.
"""
from __future__ import annotations

import math

import numpy as np

_MAX_EXPAND = 40


def segment_terms(u, frac, weight, gcoef, r, q, p, with_q=True):
    """Per-segment r-, q- and gradient sums for nodal values ``u``."""
    u = np.asarray(u, dtype=float)
    left = u[:-1, None]
    right = u[1:, None]
    x = np.maximum(left + (right - left) * frac, 0.0)
    sr = np.sum(weight * x**r, axis=1)
    sq = np.sum(weight * x**q, axis=1) if with_q else np.zeros(gcoef.size)
    sg = np.abs(u[1:] - u[:-1]) ** p * gcoef
    return sr, sq, sg


def _segment(a, b, frow, wrow, r, q, p, g, with_q):
    sr = sq = 0.0
    diff = b - a
    for f, w in zip(frow, wrow):
        x = a + diff * f
        if x > 0.0 and w != 0.0:
            sr += w * x**r
            if with_q:
                sq += w * x**q
    return sr, sq, abs(diff) ** p * g


def _totals(cache):
    tr = tq = tg = 0.0
    for c in cache:
        tr += c[0]
        tq += c[1]
        tg += c[2]
    return tr, tq, tg


def _objective(tr, tq, tg, wr, wq, wg):
    if tr <= 0.0 or tg <= 0.0 or (wq != 0.0 and tq <= 0.0):
        return math.inf
    out = wg * math.log(tg) - wr * math.log(tr)
    if wq != 0.0:
        out += wq * math.log(tq)
    return out


def _vertex(x0, f0, x1, f1, x2, f2):
    """Abscissa of the parabola through three points, or None if degenerate."""
    d1 = (x1 - x0) * (f1 - f2)
    d2 = (x1 - x2) * (f1 - f0)
    den = 2.0 * (d1 - d2)
    if den == 0.0 or not math.isfinite(den):
        return None
    return x1 - ((x1 - x0) * d1 - (x1 - x2) * d2) / den


def cd_sweep(u, frac, weight, gcoef, r, q, p, wr, wq, wg, steps, levels, min_step):
    """One sweep of hierarchical coordinate descent; updates ``u`` and ``steps``.

    For each level ``L`` in ``levels`` the search directions are hat functions
    of half-width ``2**L`` knots centred on every ``2**L``-th knot; each gets a
    bracketing line search with a parabolic refinement, and a move is kept only
    if it lowers the objective. Values are clamped at zero and the last knot
    stays at zero. Returns ``(objective, evaluations)``.
    """
    frac = frac.tolist()
    weight = weight.tolist()
    g = gcoef.tolist()
    vals = u.tolist()
    K = len(vals)
    N = K - 1
    with_q = wq != 0.0
    cache = [_segment(vals[i], vals[i + 1], frac[i], weight[i], r, q, p, g[i], with_q)
             for i in range(N)]
    tr, tq, tg = _totals(cache)
    fcur = _objective(tr, tq, tg, wr, wq, wg)
    evals = 0

    for li, L in enumerate(levels):
        half = 1 << L
        for j in range(0, K - 1, half):
            k_lo = max(j - half, 0)
            k_hi = min(j + half, K - 2)  # last knot never moves
            s_lo = max(j - half, 0)
            s_hi = min(j + half, N)
            old_r = old_q = old_g = 0.0
            for i in range(s_lo, s_hi):
                old_r += cache[i][0]
                old_q += cache[i][1]
                old_g += cache[i][2]
            base = vals[s_lo:s_hi + 1]

            def trial(tau):
                v = list(base)
                for k in range(k_lo, k_hi + 1):
                    d = 1.0 - abs(k - j) / half
                    x = v[k - s_lo] + tau * d
                    v[k - s_lo] = x if x > 0.0 else 0.0
                nr = nq = ng = 0.0
                segs = []
                for i in range(s_lo, s_hi):
                    c = _segment(v[i - s_lo], v[i - s_lo + 1], frac[i], weight[i],
                                 r, q, p, g[i], with_q)
                    segs.append(c)
                    nr += c[0]
                    nq += c[1]
                    ng += c[2]
                f = _objective(tr - old_r + nr, tq - old_q + nq, tg - old_g + ng, wr, wq, wg)
                return f, v, segs

            delta = steps[li, j]
            if delta < min_step:
                delta = min_step
            best = (fcur, None, None, 0.0)
            pts = [(0.0, fcur)]
            for sign in (1.0, -1.0):
                f1, v1, c1 = trial(sign * delta)
                evals += 1
                pts.append((sign * delta, f1))
                if f1 < fcur:
                    best = (f1, v1, c1, sign * delta)
                    t_prev, f_prev = 0.0, fcur
                    t1 = sign * delta
                    for _ in range(_MAX_EXPAND):
                        t2 = 2.0 * t1
                        f2, v2, c2 = trial(t2)
                        evals += 1
                        if f2 < best[0]:
                            t_prev, f_prev = t1, best[0]
                            best = (f2, v2, c2, t2)
                            t1 = t2
                        else:
                            break
                    pts = [(t_prev, f_prev), (t1, best[0]), (t2, f2)]
                    break
            if best[1] is None:
                pts.sort()
            tv = _vertex(pts[0][0], pts[0][1], pts[1][0], pts[1][1], pts[2][0], pts[2][1])
            if tv is not None and math.isfinite(tv) and tv != best[3]:
                fv, vv, cv = trial(tv)
                evals += 1
                if fv < best[0]:
                    best = (fv, vv, cv, tv)
            if best[1] is None:
                steps[li, j] = 0.25 * delta
                continue
            fnew, v, segs, tau = best
            for k in range(s_lo, s_hi + 1):
                vals[k] = v[k - s_lo]
            for i in range(s_lo, s_hi):
                c = segs[i - s_lo]
                tr += c[0] - cache[i][0]
                tq += c[1] - cache[i][1]
                tg += c[2] - cache[i][2]
                cache[i] = c
            fcur = fnew
            steps[li, j] = abs(tau) if abs(tau) > min_step else min_step

    u[:] = vals
    # drop the incremental drift before reporting
    tr, tq, tg = _totals(cache)
    return _objective(tr, tq, tg, wr, wq, wg), evals

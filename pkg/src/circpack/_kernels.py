"""Compiled penalty evaluation and L-BFGS polish for the packing energy.

Same algorithm as :func:`circpack.minimizer.minimize`, specialised to the
penalty so the whole inner loop runs without the interpreter.  Status codes
follow ``STATUS_NAMES``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

STATUS_NAMES = ("converged_grad", "converged_energy", "max_iters", "line_search_failed")


@njit(cache=True)
def penalty_grad(x, radii, strip, width, dim, g):
    """Energy into the return value, gradient into ``g``; also max depth and singular flag."""
    n = radii.shape[0]
    for k in range(2 * n):
        g[k] = 0.0
    energy = 0.0
    worst = 0.0
    singular = False
    for i in range(n):
        xi = x[2 * i]
        yi = x[2 * i + 1]
        ri = radii[i]
        for j in range(i + 1, n):
            dx = xi - x[2 * j]
            dy = yi - x[2 * j + 1]
            dist = math.sqrt(dx * dx + dy * dy)
            o = ri + radii[j] - dist
            if o > 0.0:
                energy += o * o
                if o > worst:
                    worst = o
                if dist == 0.0:
                    singular = True
                    ux = 1.0
                    uy = 0.0
                else:
                    ux = dx / dist
                    uy = dy / dist
                fx = -2.0 * o * ux
                fy = -2.0 * o * uy
                g[2 * i] += fx
                g[2 * i + 1] += fy
                g[2 * j] -= fx
                g[2 * j + 1] -= fy
    for i in range(n):
        xi = x[2 * i]
        yi = x[2 * i + 1]
        ri = radii[i]
        if strip:
            ox = ri + abs(xi) - 0.5 * dim
            if ox > 0.0:
                energy += ox * ox
                if ox > worst:
                    worst = ox
                if xi > 0.0:
                    g[2 * i] += 2.0 * ox
                elif xi < 0.0:
                    g[2 * i] -= 2.0 * ox
            oy = ri + abs(yi) - 0.5 * width
            if oy > 0.0:
                energy += oy * oy
                if oy > worst:
                    worst = oy
                if yi > 0.0:
                    g[2 * i + 1] += 2.0 * oy
                elif yi < 0.0:
                    g[2 * i + 1] -= 2.0 * oy
        else:
            rho = math.sqrt(xi * xi + yi * yi)
            o = ri + rho - dim
            if o > 0.0:
                energy += o * o
                if o > worst:
                    worst = o
                if rho > 0.0:
                    g[2 * i] += 2.0 * o * xi / rho
                    g[2 * i + 1] += 2.0 * o * yi / rho
    return energy, worst, singular


@njit(cache=True)
def _cubic_min(x1, f1, g1, x2, f2, g2, lo, hi):
    mid = 0.5 * (lo + hi)
    if not (math.isfinite(f1) and math.isfinite(f2) and math.isfinite(g1) and math.isfinite(g2)):
        return mid
    if x1 == x2:
        return mid
    d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2)
    disc = d1 * d1 - g1 * g2
    if disc < 0.0:
        return mid
    d2 = math.sqrt(disc)
    if x1 <= x2:
        den = g2 - g1 + 2.0 * d2
        if den == 0.0:
            return mid
        t = x2 - (x2 - x1) * ((g2 + d2 - d1) / den)
    else:
        den = g1 - g2 + 2.0 * d2
        if den == 0.0:
            return mid
        t = x1 - (x1 - x2) * ((g1 + d2 - d1) / den)
    if not math.isfinite(t):
        return mid
    return min(max(t, lo), hi)


@njit(cache=True)
def _eval(x, t, d, xt, gt, radii, strip, width, dim):
    for k in range(x.shape[0]):
        xt[k] = x[k] + t * d[k]
    f, _, _ = penalty_grad(xt, radii, strip, width, dim, gt)
    gtd = 0.0
    for k in range(x.shape[0]):
        gtd += gt[k] * d[k]
    if not math.isfinite(f) or not math.isfinite(gtd):
        return math.inf, math.nan
    return f, gtd


@njit(cache=True)
def _line_search(x, t, d, f, g, gtd, radii, strip, width, dim, c1, c2, max_evals, refine):
    """Strong-Wolfe search; returns (t, f_t, g_t, ok)."""
    n = x.shape[0]
    xt = np.empty(n)
    g_new = np.empty(n)
    d_scale = 0.0
    for k in range(n):
        d_scale = max(d_scale, abs(d[k]))
    f_new, gtd_new = _eval(x, t, d, xt, g_new, radii, strip, width, dim)
    evals = 1
    t_prev = 0.0
    f_prev = f
    g_prev = g.copy()
    gtd_prev = gtd
    bracketed = False
    ta = 0.0
    fa = 0.0
    ga = np.empty(n)
    gtda = 0.0
    tb = 0.0
    fb = 0.0
    gb = np.empty(n)
    gtdb = 0.0

    while evals < max_evals:
        if f_new > f + c1 * t * gtd or (evals > 1 and f_new >= f_prev) or not math.isfinite(f_new):
            bracketed = True
            break
        if abs(gtd_new) <= -c2 * gtd:
            if refine > 0.0 and abs(gtd_new) > -refine * gtd:
                ts = _cubic_min(t_prev, f_prev, gtd_prev, t, f_new, gtd_new, 0.0, 10.0 * t)
                if ts > 0.0 and abs(ts - t) > 1e-3 * t:
                    g_s = np.empty(n)
                    f_s, gtd_s = _eval(x, ts, d, xt, g_s, radii, strip, width, dim)
                    if (math.isfinite(f_s) and f_s < f_new and f_s <= f + c1 * ts * gtd
                            and abs(gtd_s) <= -c2 * gtd):
                        return ts, f_s, g_s, True
            return t, f_new, g_new, True
        if gtd_new >= 0.0:
            bracketed = True
            break
        lo = t + 0.01 * (t - t_prev)
        hi = t * 10.0
        t_next = _cubic_min(t_prev, f_prev, gtd_prev, t, f_new, gtd_new, lo, hi)
        t_prev = t
        f_prev = f_new
        g_prev = g_new.copy()
        gtd_prev = gtd_new
        t = t_next
        f_new, gtd_new = _eval(x, t, d, xt, g_new, radii, strip, width, dim)
        evals += 1

    if not bracketed:
        if math.isfinite(f_new) and f_new <= f + c1 * t * gtd:
            return t, f_new, g_new, False
        if t_prev > 0.0:
            return t_prev, f_prev, g_prev, False
        return 0.0, f, g, False

    ta, fa, gtda = t_prev, f_prev, gtd_prev
    ga[:] = g_prev
    tb, fb, gtdb = t, f_new, gtd_new
    gb[:] = g_new
    insufficient = False
    while evals < max_evals:
        if abs(tb - ta) * d_scale < 1e-16:
            break
        bmin = min(ta, tb)
        bmax = max(ta, tb)
        t = _cubic_min(ta, fa, gtda, tb, fb, gtdb, bmin, bmax)
        eps = 0.1 * (bmax - bmin)
        if min(bmax - t, t - bmin) < eps:
            if insufficient or t >= bmax or t <= bmin:
                if abs(t - bmax) < abs(t - bmin):
                    t = bmax - eps
                else:
                    t = bmin + eps
                insufficient = False
            else:
                insufficient = True
        else:
            insufficient = False
        f_new, gtd_new = _eval(x, t, d, xt, g_new, radii, strip, width, dim)
        evals += 1
        # (ta, fa) is kept as the lower end of the bracket
        if fa > fb:
            ta, tb = tb, ta
            fa, fb = fb, fa
            gtda, gtdb = gtdb, gtda
            tmp = ga.copy()
            ga[:] = gb
            gb[:] = tmp
        if f_new > f + c1 * t * gtd or f_new >= fa or not math.isfinite(f_new):
            tb, fb, gtdb = t, f_new, gtd_new
            gb[:] = g_new
        else:
            if abs(gtd_new) <= -c2 * gtd:
                return t, f_new, g_new.copy(), True
            if gtd_new * (tb - ta) >= 0.0:
                tb, fb, gtdb = ta, fa, gtda
                gb[:] = ga
            ta, fa, gtda = t, f_new, gtd_new
            ga[:] = g_new
        if fa > fb:
            ta, tb = tb, ta
            fa, fb = fb, fa
            gtda, gtdb = gtdb, gtda
            tmp = ga.copy()
            ga[:] = gb
            gb[:] = tmp

    if ta > 0.0 and fa < f:
        return ta, fa, ga, False
    return 0.0, f, g, False


@njit(cache=True)
def lbfgs_penalty(x0, radii, strip, width, dim, memory, max_iters, grad_tol, energy_tol,
                  c1, c2, max_evals, refine):
    n = x0.shape[0]
    x = x0.copy()
    g = np.empty(n)
    f, _, _ = penalty_grad(x, radii, strip, width, dim, g)
    S = np.zeros((memory, n))
    Y = np.zeros((memory, n))
    rho = np.zeros(memory)
    alpha = np.zeros(memory)
    count = 0
    head = 0
    gamma = 1.0
    status = 2
    it = 0
    d = np.empty(n)
    while True:
        gmax = 0.0
        gsum = 0.0
        for k in range(n):
            a = abs(g[k])
            gsum += a
            if a > gmax:
                gmax = a
        if gmax <= grad_tol:
            status = 0
            break
        if f <= energy_tol:
            status = 1
            break
        if it >= max_iters:
            status = 2
            break

        for k in range(n):
            d[k] = -g[k]
        for c in range(count):
            idx = (head - 1 - c) % memory
            a = 0.0
            for k in range(n):
                a += S[idx, k] * d[k]
            a *= rho[idx]
            alpha[idx] = a
            for k in range(n):
                d[k] -= a * Y[idx, k]
        for k in range(n):
            d[k] *= gamma
        for c in range(count - 1, -1, -1):
            idx = (head - 1 - c) % memory
            b = 0.0
            for k in range(n):
                b += Y[idx, k] * d[k]
            b *= rho[idx]
            for k in range(n):
                d[k] += (alpha[idx] - b) * S[idx, k]
        gtd = 0.0
        for k in range(n):
            gtd += g[k] * d[k]
        if not (gtd < 0.0):
            count = 0
            gtd = 0.0
            for k in range(n):
                d[k] = -g[k]
                gtd -= g[k] * g[k]

        t0 = 1.0 if count > 0 else min(1.0, 1.0 / gsum)
        t, f_new, g_new, ok = _line_search(x, t0, d, f, g, gtd, radii, strip, width, dim,
                                           c1, c2, max_evals, refine)
        it += 1
        if t == 0.0:
            if count > 0:
                count = 0
                gamma = 1.0
                continue
            status = 3
            break
        ys = 0.0
        ss = 0.0
        yy = 0.0
        for k in range(n):
            s = t * d[k]
            y = g_new[k] - g[k]
            S[head, k] = s
            Y[head, k] = y
            ys += y * s
            ss += s * s
            yy += y * y
            x[k] += s
        f = f_new
        g = g_new.copy()
        if not ok:
            status = 3
            break
        if ys > 1e-12 * ss:
            rho[head] = 1.0 / ys
            head = (head + 1) % memory
            if count < memory:
                count += 1
            gamma = ys / yy
    return x, f, status, it

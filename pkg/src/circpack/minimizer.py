"""Limited-memory BFGS with a strong-Wolfe line search.

The penalty energy is a sum of squared hinges, so it is C1 but not C2; the
quasi-Newton model is only approximate across activation boundaries.  In
practice this is fine and matches how the packing heuristics use it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._kernels import lbfgs_penalty
from .model import Instance, Layout
from .penalty import Penalty

Objective = Callable[[np.ndarray], "tuple[float, np.ndarray]"]

CONVERGED_GRAD = "converged_grad"
CONVERGED_ENERGY = "converged_energy"
MAX_ITERS = "max_iters"
LINE_SEARCH_FAILED = "line_search_failed"


class NonFiniteObjective(ArithmeticError):
    pass


@dataclass(frozen=True)
class MinimizerConfig:
    memory: int = 7
    max_iters: int = 500
    grad_tol: float = 1e-10
    energy_tol: float = 1e-22
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_evals: int = 25
    # re-interpolate accepted steps whose slope ratio exceeds this (0 disables)
    refine_slope: float = 0.01

    def __post_init__(self) -> None:
        if not (0 < self.wolfe_c1 < self.wolfe_c2 < 1):
            raise ValueError("need 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")

    def with_iters(self, max_iters: int) -> MinimizerConfig:
        return replace(self, max_iters=max_iters)


FULL_BUDGET = MinimizerConfig()
SCREEN_BUDGET = MinimizerConfig(max_iters=50)


@dataclass(eq=False)
class MinimizeResult:
    x: np.ndarray
    value: float
    status: str
    iterations: int
    grad: np.ndarray
    evaluations: int


def _cubic_min(x1, f1, g1, x2, f2, g2, lo=None, hi=None):
    """Minimiser of the cubic through two points with slopes, clamped to [lo, hi]."""
    if lo is None:
        lo, hi = (x1, x2) if x1 <= x2 else (x2, x1)
    vals = (x1, f1, g1, x2, f2, g2)
    if not all(math.isfinite(v) for v in vals) or x1 == x2:
        return 0.5 * (lo + hi)
    d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2)
    disc = d1 * d1 - g1 * g2
    if disc < 0:
        return 0.5 * (lo + hi)
    d2 = math.sqrt(disc)
    if x1 <= x2:
        den = g2 - g1 + 2.0 * d2
        t = x2 - (x2 - x1) * ((g2 + d2 - d1) / den) if den != 0 else 0.5 * (lo + hi)
    else:
        den = g1 - g2 + 2.0 * d2
        t = x1 - (x1 - x2) * ((g1 + d2 - d1) / den) if den != 0 else 0.5 * (lo + hi)
    if not math.isfinite(t):
        return 0.5 * (lo + hi)
    return min(max(t, lo), hi)


class _Counter:
    def __init__(self, fun: Objective):
        self.fun = fun
        self.count = 0

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self.count += 1
        f, g = self.fun(x)
        f = float(f)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            return math.inf, np.full_like(x, np.nan)
        return f, g


def _refine(fun, x, d, f, gtd, t0, f0, g0, t, f_t, g_t, gtd_t, c1, c2):
    """One interpolation step past an acceptable point; exact on quadratics."""
    ts = _cubic_min(t0, f0, g0, t, f_t, gtd_t, 0.0, 10.0 * t)
    if ts <= 0 or abs(ts - t) <= 1e-3 * t:
        return t, f_t, g_t, True
    f_s, g_s = fun(x + ts * d)
    if math.isfinite(f_s) and f_s < f_t and f_s <= f + c1 * ts * gtd:
        if abs(float(g_s @ d)) <= -c2 * gtd:
            return ts, f_s, g_s, True
    return t, f_t, g_t, True


def _strong_wolfe(fun, x, t, d, f, g, gtd, c1, c2, max_evals, refine=0.0):
    """Bracketing + zoom line search (Nocedal & Wright, Alg. 3.5/3.6).

    Returns ``(t, f_t, g_t, ok)``; when ``ok`` is False, ``t`` is the lowest
    point seen (possibly 0).
    """
    d_scale = float(np.abs(d).max())
    f_new, g_new = fun(x + t * d)
    gtd_new = float(g_new @ d) if math.isfinite(f_new) else math.nan
    evals = 1
    t_prev, f_prev, g_prev, gtd_prev = 0.0, f, g, gtd
    bracket = None

    while evals < max_evals:
        if f_new > f + c1 * t * gtd or (evals > 1 and f_new >= f_prev) or not math.isfinite(f_new):
            bracket = [(t_prev, f_prev, g_prev, gtd_prev), (t, f_new, g_new, gtd_new)]
            break
        if abs(gtd_new) <= -c2 * gtd:
            if refine and abs(gtd_new) > -refine * gtd:
                return _refine(fun, x, d, f, gtd, t_prev, f_prev, gtd_prev, t, f_new, g_new, gtd_new, c1, c2)
            return t, f_new, g_new, True
        if gtd_new >= 0:
            bracket = [(t_prev, f_prev, g_prev, gtd_prev), (t, f_new, g_new, gtd_new)]
            break
        lo = t + 0.01 * (t - t_prev)
        hi = t * 10.0
        t_next = _cubic_min(t_prev, f_prev, gtd_prev, t, f_new, gtd_new, lo, hi)
        t_prev, f_prev, g_prev, gtd_prev = t, f_new, g_new, gtd_new
        t = t_next
        f_new, g_new = fun(x + t * d)
        gtd_new = float(g_new @ d) if math.isfinite(f_new) else math.nan
        evals += 1

    if bracket is None:
        # ran out of evaluations while still extrapolating
        if f_new <= f + c1 * t * gtd and math.isfinite(f_new):
            return t, f_new, g_new, False
        return (t_prev, f_prev, g_prev, False) if t_prev > 0 else (0.0, f, g, False)

    low, high = (0, 1) if bracket[0][1] <= bracket[1][1] else (1, 0)
    insufficient = False
    while evals < max_evals:
        (ta, fa, _, ga), (tb, fb, _, gb) = bracket
        if abs(tb - ta) * d_scale < 1e-16:
            break
        t = _cubic_min(ta, fa, ga, tb, fb, gb)
        bmax, bmin = max(ta, tb), min(ta, tb)
        eps = 0.1 * (bmax - bmin)
        if min(bmax - t, t - bmin) < eps:
            if insufficient or t >= bmax or t <= bmin:
                t = bmax - eps if abs(t - bmax) < abs(t - bmin) else bmin + eps
                insufficient = False
            else:
                insufficient = True
        else:
            insufficient = False
        f_new, g_new = fun(x + t * d)
        gtd_new = float(g_new @ d) if math.isfinite(f_new) else math.nan
        evals += 1
        if f_new > f + c1 * t * gtd or f_new >= bracket[low][1] or not math.isfinite(f_new):
            bracket[high] = (t, f_new, g_new, gtd_new)
        else:
            if abs(gtd_new) <= -c2 * gtd:
                return t, f_new, g_new, True
            if gtd_new * (bracket[high][0] - bracket[low][0]) >= 0:
                bracket[high] = bracket[low]
            bracket[low] = (t, f_new, g_new, gtd_new)
        low, high = (0, 1) if bracket[0][1] <= bracket[1][1] else (1, 0)

    t, f_low, g_low, _ = bracket[low]
    if t > 0 and f_low < f:
        return t, f_low, g_low, False
    return 0.0, f, g, False


def minimize(
    objective: Objective,
    start: np.ndarray,
    cfg: MinimizerConfig = FULL_BUDGET,
    callback: Callable[[np.ndarray, float], None] | None = None,
) -> MinimizeResult:
    fun = _Counter(objective)
    x = np.array(start, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty start point")
    f, g = fun(x)
    if not math.isfinite(f):
        raise NonFiniteObjective("non-finite objective")
    hist: deque[tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=cfg.memory)
    gamma = 1.0
    status = MAX_ITERS
    it = 0
    while True:
        if float(np.abs(g).max()) <= cfg.grad_tol:
            status = CONVERGED_GRAD
            break
        if f <= cfg.energy_tol:
            status = CONVERGED_ENERGY
            break
        if it >= cfg.max_iters:
            status = MAX_ITERS
            break

        # two-loop recursion
        q = -g
        alphas = []
        for s, y, rho in reversed(hist):
            a = rho * float(s @ q)
            alphas.append(a)
            q = q - a * y
        q = q * gamma
        for (s, y, rho), a in zip(hist, reversed(alphas)):
            b = rho * float(y @ q)
            q = q + (a - b) * s
        d = q
        gtd = float(g @ d)
        if not (gtd < 0):
            hist.clear()
            d = -g
            gtd = -float(g @ g)

        t0 = 1.0 if hist else min(1.0, 1.0 / float(np.abs(g).sum()))
        t, f_new, g_new, ok = _strong_wolfe(
            fun, x, t0, d, f, g, gtd, cfg.wolfe_c1, cfg.wolfe_c2, cfg.max_line_evals, cfg.refine_slope
        )
        it += 1
        if t == 0.0:
            if hist:
                # stale curvature pairs; retry once along steepest descent
                hist.clear()
                gamma = 1.0
                continue
            status = LINE_SEARCH_FAILED
            break
        s = t * d
        y = g_new - g
        x = x + s
        f, g = f_new, g_new
        if callback is not None:
            callback(x, f)
        if not ok:
            status = LINE_SEARCH_FAILED
            break
        ys = float(y @ s)
        if ys > 1e-12 * float(s @ s):
            hist.append((s, y, 1.0 / ys))
            gamma = ys / float(y @ y)
    return MinimizeResult(x, f, status, it, g, fun.count)


def polish(
    inst: Instance,
    lay: Layout,
    cfg: MinimizerConfig = FULL_BUDGET,
    penalty: Penalty | None = None,
) -> Layout:
    """Minimise the penalty over all centres at the layout's fixed dimension."""
    pen = penalty if penalty is not None else Penalty.for_instance(inst)
    centers = polish_centers(pen, lay.centers, lay.dimension, cfg)
    return Layout(centers, lay.dimension)


def polish_centers(
    pen: Penalty, centers: np.ndarray, dimension: float, cfg: MinimizerConfig
) -> np.ndarray:
    x, _, _, _ = lbfgs_penalty(
        np.ascontiguousarray(centers, dtype=float).ravel(), pen.radii, pen.strip, pen.width,
        float(dimension), cfg.memory, cfg.max_iters, cfg.grad_tol, cfg.energy_tol,
        cfg.wolfe_c1, cfg.wolfe_c2, cfg.max_line_evals, cfg.refine_slope,
    )
    return x.reshape(-1, 2)

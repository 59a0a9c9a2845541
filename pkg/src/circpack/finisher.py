"""Post-processing: bisect the open dimension, inflate to exact feasibility, round up.

The bisection treats a probe as feasible at the solver tolerance; the inflation
loop then demands exact feasibility in floating point (every depth, computed
as written, is <= 0).  Reported dimensions are rounded up to a fixed number of
decimals and re-checked at the rounded value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal

import numpy as np

from .minimizer import MinimizerConfig, polish
from .model import DEFAULT_EPS, Instance, Layout, is_feasible, is_strictly_feasible, max_violation
from .penalty import Penalty
from .tabu import TabuConfig, tabu_search

log = logging.getLogger(__name__)

# no early exit on small energy: inflation must reach depths of exactly zero
EXACT_BUDGET = MinimizerConfig(max_iters=2000, grad_tol=0.0, energy_tol=0.0)


class FinishError(RuntimeError):
    pass


@dataclass(frozen=True)
class FinishConfig:
    bracket_c: float = 1.0
    bisect_tol: float = 1e-4
    inflate_step: float = 1e-5
    report_decimals: int = 4
    probe_stall_limit: int = 5
    max_doublings: int = 4
    max_inflations: int = 10_000
    snap: bool = True

    def __post_init__(self) -> None:
        if not (self.bisect_tol > 0 and self.inflate_step > 0 and self.bracket_c > 0):
            raise ValueError("bracket_c, bisect_tol and inflate_step must be positive")


def _quantize(value: float, decimals: int, rounding: str) -> float:
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(float(value))).quantize(q, rounding=rounding))


def ceil_decimals(value: float, decimals: int = 4) -> float:
    v = _quantize(value, decimals, ROUND_CEILING)
    step = 10.0 ** -decimals
    while v < value:
        v = _quantize(v + step, decimals, ROUND_CEILING)
    return v


def round_report(
    dimension: float, lay: Layout | None = None, inst: Instance | None = None, decimals: int = 4
) -> float:
    """Smallest ``decimals``-place value >= ``dimension`` at which ``lay`` is exactly feasible."""
    v = ceil_decimals(dimension, decimals)
    if lay is None or inst is None:
        return v
    step = 10.0 ** -decimals
    for _ in range(10_000):
        if is_strictly_feasible(inst, Layout(lay.centers, v)):
            return v
        v = _quantize(v + step, decimals, ROUND_CEILING)
    raise FinishError(f"layout not feasible near dimension {dimension}")


def tight_dimension(inst: Instance, centers: np.ndarray) -> float:
    """Smallest dimension at which the containment constraints hold exactly."""
    r = inst.radii
    if inst.is_strip:
        return 2.0 * float(np.max(r + np.abs(centers[:, 0])))
    return float(np.max(r + np.sqrt(centers[:, 0] * centers[:, 0] + centers[:, 1] * centers[:, 1])))


def _canonical(inst: Instance, centers: np.ndarray) -> np.ndarray:
    # discs are rotation invariant: put the largest off-centre circle on the +x axis
    if inst.is_strip:
        return centers
    rho = np.hypot(centers[:, 0], centers[:, 1])
    k = int(np.argmax(rho > 1e-12)) if np.any(rho > 1e-12) else -1
    if k < 0:
        return centers
    cos, sin = centers[k] / rho[k]
    rot = np.array([[cos, sin], [-sin, cos]])
    out = centers @ rot.T
    out[k] = (rho[k], 0.0)
    return out


def _snap(inst: Instance, lay: Layout, target: float) -> Layout | None:
    """Try to certify a layout at ``target`` by rounding a polished copy's coordinates."""
    cand = polish(inst, Layout(lay.centers, target), EXACT_BUDGET)
    if not is_feasible(inst, cand, 1e-8):
        return None
    base = _canonical(inst, cand.centers)
    for digits in (12, 10, 8, 6, 5, 4, 3):
        c = np.round(base, digits) + 0.0
        snapped = Layout(c, target)
        if is_strictly_feasible(inst, snapped):
            return snapped
    return None


def _inflate(inst: Instance, lay: Layout, cfg: FinishConfig) -> Layout:
    pen = Penalty.for_instance(inst)
    cur = polish(inst, lay, EXACT_BUDGET, pen)
    steps = 0
    while not is_strictly_feasible(inst, cur):
        if steps >= cfg.max_inflations:
            raise FinishError(
                f"no exactly feasible layout after {steps} inflation steps "
                f"(dimension {cur.dimension:.6f}, violation {max_violation(inst, cur):.3e})"
            )
        steps += 1
        cur = polish(inst, Layout(cur.centers, cur.dimension + cfg.inflate_step), EXACT_BUDGET, pen)
    log.debug("inflation took %d steps", steps)
    return cur


def post_process(
    inst: Instance,
    lay: Layout,
    cfg: FinishConfig | None = None,
    tabu: TabuConfig | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[Layout, float]:
    """Shrink the open dimension of ``lay`` as far as the probes allow.

    Returns an exactly feasible layout whose ``dimension`` is the reported
    (rounded-up) value, and that value.
    """
    cfg = cfg or FinishConfig()
    tabu = replace(tabu or TabuConfig(), stall_limit=cfg.probe_stall_limit)
    rng = rng if rng is not None else np.random.default_rng(0)
    eps = tabu.feasibility_eps if tabu.feasibility_eps is not None else DEFAULT_EPS
    d0 = lay.dimension

    c = cfg.bracket_c
    for attempt in range(cfg.max_doublings + 1):
        upper = d0 + c
        up_lay = tabu_search(inst, Layout(lay.centers, upper), tabu, rng)
        if is_feasible(inst, up_lay, eps):
            break
        log.info("upper bracket %.6f infeasible; widening", upper)
        c *= 2.0
    else:
        raise FinishError(
            f"upper bracket {upper:.6f} still infeasible after {cfg.max_doublings} doublings"
        )
    lower = max(d0 - cfg.bracket_c, 0.0)

    x = up_lay.centers
    best_up = up_lay
    while upper - lower >= cfg.bisect_tol:
        mid = 0.5 * (upper + lower)
        probe = tabu_search(inst, Layout(x, mid), tabu, rng)
        x = probe.centers
        if is_feasible(inst, probe, eps):
            upper, best_up = mid, probe
        else:
            lower = mid

    final = _inflate(inst, best_up, cfg)
    tight = tight_dimension(inst, final.centers)
    if tight < final.dimension:
        final = Layout(final.centers, tight)

    reported = round_report(final.dimension, final, inst, cfg.report_decimals)
    if cfg.snap:
        below = _quantize(final.dimension, cfg.report_decimals, ROUND_FLOOR)
        if below < reported and below > 0:
            snapped = _snap(inst, final, below)
            if snapped is not None:
                final, reported = snapped, below
    out = Layout(final.centers, reported)
    if not is_strictly_feasible(inst, out):
        raise FinishError("final layout failed exact feasibility check")
    return out, reported

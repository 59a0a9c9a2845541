"""Swap-neighbourhood tabu search over circle positions.

Neighbours swap two circles that are close in the radius ordering (at most two
ranks apart, different radii) and then re-run the continuous minimiser.  Each
swapped circle becomes tabu for ``T + U{0..round(N/8)}`` iterations; a tabu
swap is still admitted when it beats the best energy seen in the current call.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .minimizer import FULL_BUDGET, SCREEN_BUDGET, MinimizerConfig, polish
from .model import DEFAULT_EPS, Instance, Layout
from .penalty import Penalty

TraceSink = Callable[[dict], None]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


class SwapMove(NamedTuple):
    i: int
    j: int


@dataclass
class TabuState:
    tenure_expiry: np.ndarray
    cur_iter: int = 0
    T: int = 2
    tenure_spread: int = 0

    @classmethod
    def fresh(cls, n: int, T: int = 2) -> TabuState:
        return cls(np.zeros(n, dtype=np.int64), 0, T, round_half_up(n / 8))

    def is_free(self, k: int) -> bool:
        return self.tenure_expiry[k] < self.cur_iter

    def update(self, move: SwapMove, rng: np.random.Generator) -> None:
        for k in move:
            self.tenure_expiry[k] = (
                self.cur_iter + self.T + int(rng.integers(0, self.tenure_spread + 1))
            )


@dataclass(frozen=True)
class TabuConfig:
    stall_limit: int = 20
    T: int = 2
    neighbor_budget: MinimizerConfig = SCREEN_BUDGET
    polish_budget: MinimizerConfig = FULL_BUDGET
    feasibility_eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if self.stall_limit < 1:
            raise ValueError("stall_limit must be >= 1")
        if self.T < 0:
            raise ValueError("T must be >= 0")


class Neighbor(NamedTuple):
    move: SwapMove
    layout: Layout
    energy: float
    max_depth: float
    aspirated: bool


def enumerate_moves(inst: Instance, limit: int | None = None) -> list[SwapMove]:
    """Admissible swaps in lexicographic order; ``limit`` restricts to the first indices."""
    r = inst.radii
    n = inst.n if limit is None else limit
    return [
        SwapMove(i, j)
        for i in range(n)
        for j in (i + 1, i + 2)
        if j < n and r[i] != r[j]
    ]


def apply_swap(lay: Layout, m: SwapMove) -> Layout:
    c = lay.centers.copy()
    c[[m.i, m.j]] = c[[m.j, m.i]]
    return Layout(c, lay.dimension)


def neighborhood(
    inst: Instance,
    lay: Layout,
    state: TabuState,
    best_energy: float,
    cfg: TabuConfig,
    moves: list[SwapMove] | None = None,
    penalty: Penalty | None = None,
) -> list[Neighbor]:
    pen = penalty if penalty is not None else Penalty.for_instance(inst)
    out = []
    for m in enumerate_moves(inst) if moves is None else moves:
        cand = polish(inst, apply_swap(lay, m), cfg.neighbor_budget, pen)
        e, _, depth = pen(cand.centers.ravel(), cand.dimension)
        free = state.is_free(m.i) and state.is_free(m.j)
        if free or e < best_energy:
            out.append(Neighbor(m, cand, e, depth, not free))
    return out


@dataclass
class TabuStats:
    iterations: int = 0
    best_energy: float = math.inf
    history: list = field(default_factory=list)


def tabu_search(
    inst: Instance,
    lay: Layout,
    cfg: TabuConfig,
    rng: np.random.Generator,
    deadline: float | None = None,
    trace: TraceSink | None = None,
    stats: TabuStats | None = None,
) -> Layout:
    """Run one tabu search from ``lay`` and return the best layout it visited.

    Tenures are reset on every call.  The search stops on (numerical)
    feasibility, after ``stall_limit`` iterations without improving the best
    energy, when no neighbour is admissible, or at ``deadline`` (a
    ``time.monotonic()`` timestamp).
    """
    pen = Penalty.for_instance(inst)
    cur = polish(inst, lay, cfg.polish_budget, pen)
    cur_e, _, cur_depth = pen(cur.centers.ravel(), cur.dimension)
    stats = stats if stats is not None else TabuStats()
    stats.best_energy = cur_e
    if cur_depth <= cfg.feasibility_eps:
        return cur

    moves = enumerate_moves(inst)
    state = TabuState.fresh(inst.n, cfg.T)
    best, best_e = cur, cur_e
    stall = 0
    while moves and stall < cfg.stall_limit:
        if deadline is not None and time.monotonic() >= deadline:
            break
        state.cur_iter += 1
        nbrs = neighborhood(inst, cur, state, best_e, cfg, moves, pen)
        if not nbrs:
            break
        # min() keeps the first of equal energies, i.e. the lowest lexicographic move
        pick = min(nbrs, key=lambda nb: nb.energy)
        cur, cur_e = pick.layout, pick.energy
        state.update(pick.move, rng)
        stats.iterations += 1
        if cur_e < best_e:
            best, best_e = cur, cur_e
            stall = 0
        else:
            stall += 1
        stats.history.append((state.cur_iter, pick.move, cur_e, best_e, pick.aspirated))
        if trace is not None:
            trace({
                "phase": "tabu",
                "iteration": state.cur_iter,
                "move": [int(pick.move.i), int(pick.move.j)],
                "energy": cur_e,
                "best_energy": best_e,
            })
        if pick.max_depth <= cfg.feasibility_eps:
            break

    out = polish(inst, best, cfg.polish_budget, pen)
    stats.best_energy = pen(out.centers.ravel(), out.dimension)[0]
    return out

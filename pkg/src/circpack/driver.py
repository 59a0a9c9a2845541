"""Iterated tabu search: random start, tabu search, perturb/accept rounds, restarts."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .finisher import FinishConfig, post_process
from .model import Instance, InstanceError, Layout, random_layout
from .penalty import evaluate
from .perturb import PerturbConfig, accept, perturb
from .tabu import TabuConfig, TabuStats, TraceSink, tabu_search

log = logging.getLogger(__name__)

ITS = "its"
MULTISTART_TS = "multistart_ts"
DENSITY = 0.85


@dataclass(frozen=True)
class SolverParams:
    target_dimension: float | None = None
    time_budget: float = 60.0
    seed: int = 0
    tabu: TabuConfig = field(default_factory=TabuConfig)
    perturb: PerturbConfig = field(default_factory=PerturbConfig)
    ablation_mode: str = ITS
    # optional hard cap on tabu launches, for budgets that do not depend on the clock
    max_ts_launches: int | None = None

    def __post_init__(self) -> None:
        if not (self.time_budget > 0):
            raise ValueError("time budget must be positive")
        if self.ablation_mode not in (ITS, MULTISTART_TS):
            raise ValueError(f"unknown mode {self.ablation_mode!r}")
        if self.target_dimension is not None and not (self.target_dimension > 0):
            raise ValueError("target dimension must be positive")


@dataclass(eq=False)
class RunResult:
    best_layout: Layout
    best_energy: float
    feasible: bool
    ts_launch_count: int
    perturbation_count: int
    restart_count: int
    elapsed: float

    def same_outcome(self, other: RunResult) -> bool:
        """Equality on everything except wall-clock time."""
        return (
            self.best_layout.same_as(other.best_layout)
            and self.best_energy == other.best_energy
            and self.feasible == other.feasible
            and self.ts_launch_count == other.ts_launch_count
            and self.perturbation_count == other.perturbation_count
            and self.restart_count == other.restart_count
        )


def default_dimension(inst: Instance) -> float:
    """Starting dimension when no best-known value is supplied (density 0.85 guess)."""
    r = inst.radii
    if inst.is_strip:
        return max(float(np.sum(math.pi * r * r)) / (DENSITY * inst.width), 2.0 * r[0])
    return max(math.sqrt(float(np.sum(r * r)) / DENSITY), 2.0 * r[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.uint64(seed % 2**64))


def solve(inst: Instance, params: SolverParams, trace: TraceSink | None = None) -> RunResult:
    if inst.is_strip and inst.width < 2.0 * inst.radii[0]:
        raise InstanceError("instance infeasible by width")
    rng = _rng(params.seed)
    dim = params.target_dimension if params.target_dimension is not None else default_dimension(inst)
    eps = params.tabu.feasibility_eps
    start = time.monotonic()
    deadline = start + params.time_budget
    ts_count = perturb_count = restarts = 0
    best: Layout | None = None
    best_e = math.inf
    feasible = False

    def emit(phase: str, iteration: int, energy: float) -> None:
        if trace is not None:
            trace({"phase": phase, "iteration": iteration, "energy": energy,
                   "elapsed": round(time.monotonic() - start, 6)})

    def out_of_time() -> bool:
        if params.max_ts_launches is not None and ts_count >= params.max_ts_launches:
            return True
        return time.monotonic() >= deadline

    def run_ts(lay: Layout) -> tuple[Layout, float, float]:
        nonlocal ts_count, best, best_e
        ts_count += 1
        st = TabuStats()
        res = tabu_search(inst, lay, params.tabu, rng, deadline, trace, st)
        rep = evaluate(inst, res)
        if rep.energy < best_e or rep.max_depth <= params.tabu.feasibility_eps:
            best, best_e = res, rep.energy
        emit("ts", ts_count, rep.energy)
        return res, rep.energy, rep.max_depth

    while True:
        lay, e, depth = run_ts(random_layout(inst, dim, rng))
        if depth <= eps:
            feasible = True
            break
        if params.ablation_mode == ITS:
            stall = 0
            while stall < params.perturb.accept_stall_limit and not out_of_time():
                cand = perturb(inst, lay, params.perturb, rng)
                perturb_count += 1
                cand, cand_e, cand_depth = run_ts(cand)
                if accept(e, cand_e):
                    lay, e, depth = cand, cand_e, cand_depth
                    stall = 0
                    emit("accept", perturb_count, e)
                else:
                    stall += 1
                if depth <= eps:
                    feasible = True
                    break
            if feasible:
                break
        if out_of_time():
            break
        restarts += 1
        emit("restart", restarts, best_e)

    return RunResult(best, best_e, feasible, ts_count, perturb_count, restarts,
                     time.monotonic() - start)


def solve_and_finish(
    inst: Instance,
    params: SolverParams,
    finish: FinishConfig | None = None,
    trace: TraceSink | None = None,
) -> tuple[RunResult, Layout, float]:
    """Solve, then post-process the best layout whatever the solve outcome."""
    result = solve(inst, params, trace)
    rng = _rng(params.seed ^ 0x5EED)
    lay, dim = post_process(inst, result.best_layout, finish or FinishConfig(), params.tabu, rng)
    if trace is not None:
        trace({"phase": "finish", "iteration": 0, "energy": 0.0, "dimension": dim})
    return result, lay, dim

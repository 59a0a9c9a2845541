"""Acceptance suite: one recorded PASS/FAIL line per criterion.

Criterion 9 (ITS vs repeated tabu search, ~100 min) only runs with
CIRCPACK_ABLATION=1; its per-run table goes to CIRCPACK_ABLATION_CSV if set.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from circpack import bench
from circpack.driver import ITS, MULTISTART_TS, SolverParams, solve_and_finish
from circpack.finisher import round_report
from circpack.io import format_solution, svg_document
from circpack.minimizer import CONVERGED_GRAD, MinimizerConfig, minimize
from circpack.model import Disc, Strip, is_strictly_feasible, make_instance
from circpack.penalty import Penalty
from circpack.tabu import SwapMove, TabuState, enumerate_moves
from oracles import finite_diff_grad, kink_margin, naive_energy


def _random_case(rng, n):
    radii = rng.uniform(0.2, 2.0, n)
    if rng.random() < 0.5:
        container = Strip(2 * radii.max() + rng.uniform(0, 6))
        dim = rng.uniform(0.3, 1.5) * math.pi * np.sum(radii**2) / container.width
        half = (0.6 * dim, 0.6 * container.width)
    else:
        container = Disc()
        dim = rng.uniform(0.5, 1.2) * math.sqrt(np.sum(radii**2))
        half = (1.1 * dim, 1.1 * dim)
    centers = rng.uniform(-1, 1, (n, 2)) * half
    return make_instance(radii, container), centers, dim


def test_c1_penalty_matches_naive_resummation(criterion):
    rng = np.random.default_rng(1)
    Penalty(np.ones(2), Strip(2)).energy(np.zeros((2, 2)), 1.0)  # compile outside the timer
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        inst, centers, dim = _random_case(rng, int(rng.integers(2, 31)))
        got = Penalty.for_instance(inst).energy(centers, dim)
        want = naive_energy(inst.radii, centers, inst.container.kind, inst.width, dim)
        if got != want:
            worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-14 and elapsed < 5.0
    criterion(1, "penalty = naive re-summation on 1000 layouts", ok,
              f"max rel err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def _kink_free_cases(rng, count, margin=1e-4):
    out = []
    while len(out) < count:
        inst, centers, dim = _random_case(rng, int(rng.integers(2, 13)))
        if kink_margin(inst.radii, centers, inst.container.kind, inst.width, dim) >= margin:
            out.append((inst, centers, dim))
    return out


def test_c2_gradient_vs_central_differences(criterion):
    rng = np.random.default_rng(2)
    cases = _kink_free_cases(rng, 200)
    worst = 0.0
    t0 = time.perf_counter()
    for inst, centers, dim in cases:
        pen = Penalty.for_instance(inst)
        _, grad, _ = pen(centers.ravel(), dim)
        fd = finite_diff_grad(
            lambda x: naive_energy(inst.radii, x.reshape(-1, 2), inst.container.kind, inst.width, dim),
            centers.ravel(), h=1e-6,
        )
        scale = np.maximum(np.abs(grad), np.abs(fd))
        nz = scale > 0
        if nz.any():
            worst = max(worst, float(np.max(np.abs(grad - fd)[nz] / scale[nz])))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 10.0
    criterion(2, "analytic gradient vs central differences on 200 kink-free layouts", ok,
              f"max componentwise rel err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_c3_minimizer_sanity(criterion):
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.normal(size=(100, 100)))
    A = q @ np.diag(np.logspace(0, 2, 100)) @ q.T
    xstar = rng.normal(size=100)

    def quad(x):
        d = x - xstar
        return 0.5 * float(d @ A @ d), A @ d

    def rosen(x):
        a, b = x
        f = (1 - a) ** 2 + 100 * (b - a * a) ** 2
        return f, np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])

    t0 = time.perf_counter()
    rq = minimize(quad, np.zeros(100), MinimizerConfig(max_iters=150, grad_tol=1e-8, energy_tol=0.0))
    rr = minimize(rosen, np.array([-1.2, 1.0]), MinimizerConfig(max_iters=500, grad_tol=1e-10, energy_tol=0.0))
    elapsed = time.perf_counter() - t0
    gq = float(np.abs(rq.grad).max())
    dr = float(np.abs(rr.x - 1.0).max())
    ok = rq.status == CONVERGED_GRAD and gq <= 1e-8 and rq.iterations <= 150 and dr <= 1e-6 and elapsed < 2.0
    criterion(3, "quadratic-100 and Rosenbrock", ok,
              f"quad |g|={gq:.1e} in {rq.iterations} it, rosen err {dr:.1e}, {elapsed:.2f}s")
    assert ok


def test_c4_neighbourhood_matches_brute_force(criterion):
    rng = np.random.default_rng(4)
    mismatches = 0
    trials = 0
    for n in range(2, 9):
        for _ in range(50):
            base = rng.choice(np.arange(1, 12), size=n, replace=False).astype(float)
            for radii in (base, np.round(rng.uniform(1, 3, n), 0)):
                inst = make_instance(radii, Strip(2 * radii.max()))
                r = inst.radii
                want = [SwapMove(i, j) for i in range(n) for j in range(i + 1, n)
                        if j - i <= 2 and r[i] != r[j]]
                trials += 1
                mismatches += enumerate_moves(inst) != want
    ok = mismatches == 0
    criterion(4, "enumerate_moves equals brute force for N <= 8", ok, f"{trials} instances")
    assert ok


def test_c5_tenure_law(criterion):
    n, updates = 40, 100_000
    state = TabuState.fresh(n, T=2)
    rng = np.random.default_rng(5)
    counts = np.zeros(6, dtype=np.int64)
    bad = 0
    for _ in range(updates):
        state.cur_iter += 1
        i = int(rng.integers(0, n - 1))
        move = SwapMove(i, i + 1)
        state.update(move, rng)
        for k in move:
            off = int(state.tenure_expiry[k]) - state.cur_iter
            if not 2 <= off <= 7:
                bad += 1
            else:
                counts[off - 2] += 1
    total = counts.sum()
    p = 1 / 6
    sigma = math.sqrt(total * p * (1 - p))
    zmax = float(np.max(np.abs(counts - total * p)) / sigma)
    ok = bad == 0 and zmax <= 3.0
    criterion(5, "tenure offsets in [2, 7] and uniform", ok, f"max |z| = {zmax:.2f}, out of range {bad}")
    assert ok


ANALYTIC = [
    ("1 circle, W=2", [1.0], Strip(2), 2.0),
    ("2 circles, W=2", [1.0, 1.0], Strip(2), 4.0),
    ("2 circles, W=4", [1.0, 1.0], Strip(4), 2.0),
    ("3 circles, W=2", [1.0, 1.0, 1.0], Strip(2), 6.0),
    ("disc, 1 circle", [1.0], Disc(), 1.0),
    ("disc, 2 circles", [1.0, 1.0], Disc(), 2.0),
]


def test_c6_analytic_optima(criterion):
    failures = []
    for label, radii, container, want in ANALYTIC:
        inst = make_instance(radii, container)
        for seed in range(5):
            res, lay, dim = solve_and_finish(inst, SolverParams(time_budget=10.0, seed=seed))
            # the default target may sit below the optimum; the finisher's certified value is what counts
            if not (is_strictly_feasible(inst, lay) and f"{dim:.4f}" == f"{want:.4f}"):
                failures.append(f"{label} seed {seed}: {dim:.4f}")
    ok = not failures
    criterion(6, "analytic optima over 5 seeds", ok, "; ".join(failures) or "30/30 exact")
    assert ok


def test_c7_rounding_rule(criterion):
    got = round_report(math.sqrt(2))
    ok = f"{got:.4f}" == "1.4143"
    criterion(7, "sqrt(2) reports as 1.4143", ok, f"got {got:.4f}")
    assert ok


def test_c8_determinism(criterion):
    rng = np.random.default_rng(8)
    inst = make_instance(rng.uniform(1, 3, 10), Strip(8.0))
    params = SolverParams(time_budget=1e6, seed=11, max_ts_launches=4)
    outs = []
    for _ in range(2):
        res, lay, _ = solve_and_finish(inst, params)
        outs.append((res, format_solution(inst, lay, res.feasible).encode(),
                     svg_document(inst, lay).encode()))
    (ra, sa, va), (rb, sb, vb) = outs
    ok = ra.same_outcome(rb) and sa == sb and va == vb
    criterion(8, "identical inputs give identical result, solution and SVG bytes", ok,
              f"ts launches {ra.ts_launch_count}, perturbations {ra.perturbation_count}")
    assert ok


def ablation_corpus(k=10, n=20):
    out = []
    for i in range(k):
        r = np.random.default_rng(1000 + i).uniform(1, 5, n)
        out.append(make_instance(r, Strip(4 * r.max()), name=f"rand{i:02d}"))
    return out


@pytest.mark.slow
@pytest.mark.ablation
@pytest.mark.skipif(os.environ.get("CIRCPACK_ABLATION") != "1", reason="set CIRCPACK_ABLATION=1 (about 100 min)")
def test_c9_ablation_direction(criterion):
    budget = float(os.environ.get("CIRCPACK_ABLATION_BUDGET", "60"))
    rows = []
    for inst in ablation_corpus():
        for mode in (ITS, MULTISTART_TS):
            for seed in range(5):
                res, lay, dim = solve_and_finish(inst, SolverParams(time_budget=budget, seed=seed,
                                                                    ablation_mode=mode))
                rows.append(dict(instance=inst.name, n=inst.n, width=f"{inst.width:g}", mode=mode,
                                 seed=seed, dimension=f"{dim:.4f}", feasible=int(res.feasible),
                                 ts_launches=res.ts_launch_count,
                                 perturbations=res.perturbation_count,
                                 restarts=res.restart_count, elapsed=f"{res.elapsed:.2f}"))
    if os.environ.get("CIRCPACK_ABLATION_CSV"):
        bench.write_csv(rows, Path(os.environ["CIRCPACK_ABLATION_CSV"]))
    med = bench.mode_medians(rows)
    ok = med[ITS] <= med[MULTISTART_TS]
    criterion(9, "median dimension its <= multistart_ts", ok,
              f"its {med[ITS]:.4f} vs multistart_ts {med[MULTISTART_TS]:.4f}, {budget:g}s budget")
    assert ok

"""Structured perturbation: strip the small circles, shuffle similar large ones, reinsert."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .minimizer import SCREEN_BUDGET, MinimizerConfig, polish_centers
from .model import Instance, Layout, sample_position
from .penalty import Penalty
from .tabu import round_half_up

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerturbConfig:
    swap_num: int | None = None  # None: round(N/3), at least 1
    reinsert_trials: int | None = None  # None: N
    large_threshold_factor: float = 0.5
    accept_stall_limit: int = 10
    budget: MinimizerConfig = SCREEN_BUDGET

    def resolved(self, n: int) -> PerturbConfig:
        return replace(
            self,
            swap_num=self.swap_num if self.swap_num is not None else max(1, round_half_up(n / 3)),
            reinsert_trials=self.reinsert_trials if self.reinsert_trials is not None else n,
        )


def classify(inst: Instance, factor: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Split indices into circles larger than ``factor`` times the mean radius and the rest."""
    if not factor > 0:
        raise ValueError("factor must be positive")
    r = inst.radii
    is_large = r > factor * (r.sum() / len(r))
    idx = np.arange(len(r))
    return idx[is_large], idx[~is_large]


def accept(old_energy: float, new_energy: float) -> bool:
    return new_energy < old_energy


def _large_pairs(inst: Instance, large: np.ndarray) -> list[tuple[int, int]]:
    r = inst.radii
    members = set(large.tolist())
    return [
        (i, j)
        for i in sorted(members)
        for j in (i + 1, i + 2)
        if j in members and r[i] != r[j]
    ]


def perturb(
    inst: Instance,
    lay: Layout,
    cfg: PerturbConfig,
    rng: np.random.Generator,
    record: list | None = None,
) -> Layout:
    """Return a reconstructed layout at the same dimension.

    ``record``, when given, receives one ``(circle, trial_energies, kept)``
    tuple per reinserted small circle.
    """
    cfg = cfg.resolved(inst.n)
    dim = lay.dimension
    large, small = classify(inst, cfg.large_threshold_factor)
    centers = lay.centers.copy()

    pairs = _large_pairs(inst, large)
    if not pairs:
        log.debug("no admissible pair among %d large circles; swap step skipped", len(large))
    else:
        pen_large = Penalty.for_instance(inst, large)
        pos = {k: p for p, k in enumerate(large.tolist())}
        sub = centers[large]
        for _ in range(cfg.swap_num):
            i, j = pairs[int(rng.integers(len(pairs)))]
            a, b = pos[i], pos[j]
            sub[[a, b]] = sub[[b, a]]
            sub = polish_centers(pen_large, sub, dim, cfg.budget)
        centers[large] = sub

    placed = list(large.tolist())
    for k in small.tolist():
        placed.append(k)
        idx = np.array(placed)
        pen = Penalty.for_instance(inst, idx)
        base = centers[idx].copy()
        best_c, best_e = None, np.inf
        energies = []
        for _ in range(cfg.reinsert_trials):
            base[-1] = sample_position(inst, k, dim, rng)
            trial = polish_centers(pen, base, dim, cfg.budget)
            e = pen.energy(trial, dim)
            energies.append(e)
            if e < best_e:
                best_c, best_e = trial, e
        centers[idx] = best_c
        if record is not None:
            record.append((k, energies, int(np.argmin(energies))))

    return Layout(centers, dim)

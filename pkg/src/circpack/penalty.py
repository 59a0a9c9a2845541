"""Overlap depths and the squared-depth penalty energy with its gradient."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import penalty_grad
from .model import ContainerSpec, Instance, Layout


@dataclass(eq=False)
class PenaltyReport:
    energy: float
    grad: np.ndarray
    max_depth: float
    singular: bool = False


def pair_depth(ci: tuple[tuple[float, float], float], cj: tuple[tuple[float, float], float]) -> float:
    (xi, yi), ri = ci
    (xj, yj), rj = cj
    dx, dy = xi - xj, yi - yj
    return max(0.0, ri + rj - math.sqrt(dx * dx + dy * dy))


def border_depths(
    c: tuple[tuple[float, float], float], container: ContainerSpec, dimension: float
) -> tuple[float, float]:
    (x, y), r = c
    if not container.is_strip:
        raise ValueError("border_depths applies to strip containers; use disc_border_depth")
    return max(0.0, r + abs(x) - 0.5 * dimension), max(0.0, r + abs(y) - 0.5 * container.width)


def disc_border_depth(c: tuple[tuple[float, float], float], radius: float) -> float:
    (x, y), r = c
    return max(0.0, r + math.sqrt(x * x + y * y) - radius)


class Penalty:
    """Vectorised energy/gradient evaluator for a fixed set of radii.

    Direct O(N^2) pair loop, compiled; no spatial grid.
    """

    def __init__(self, radii: np.ndarray, container: ContainerSpec):
        self.radii = np.ascontiguousarray(radii, dtype=float)
        self.n = len(self.radii)
        self.strip = container.is_strip
        self.width = float(container.width) if container.is_strip else 0.0
        self.singular = False

    @classmethod
    def for_instance(cls, inst: Instance, subset: np.ndarray | None = None) -> Penalty:
        radii = inst.radii if subset is None else inst.radii[subset]
        return cls(radii, inst.container)

    def __call__(self, flat: np.ndarray, dimension: float) -> tuple[float, np.ndarray, float]:
        """Return ``(energy, flat_grad, max_depth)`` for centres packed as x0,y0,x1,y1,..."""
        grad = np.empty(2 * self.n)
        energy, worst, self.singular = penalty_grad(
            np.ascontiguousarray(flat, dtype=float), self.radii, self.strip, self.width,
            float(dimension), grad,
        )
        return energy, grad, worst

    def energy(self, centers: np.ndarray, dimension: float) -> float:
        return self(np.ascontiguousarray(centers, dtype=float).ravel(), dimension)[0]


def evaluate(inst: Instance, lay: Layout) -> PenaltyReport:
    pen = Penalty.for_instance(inst)
    energy, grad, worst = pen(lay.centers.ravel(), lay.dimension)
    return PenaltyReport(energy, grad.reshape(-1, 2), worst, pen.singular)


def energy_of(inst: Instance, lay: Layout) -> float:
    return evaluate(inst, lay).energy

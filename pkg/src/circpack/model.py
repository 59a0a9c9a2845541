"""Problem and solution representations for circle packing in a strip or disc.

Coordinates are centred on the container: a strip of width ``W`` and length
``L`` spans ``[-L/2, L/2] x [-W/2, W/2]``; a disc of radius ``R`` is centred
at the origin.  Circles are always stored in descending-radius order; the
permutation back to the caller's input order is kept on the instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DEFAULT_EPS = 1e-10


class InstanceError(ValueError):
    """Raised for invalid or unreadable problem instances."""


@dataclass(frozen=True)
class ContainerSpec:
    kind: str
    width: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("strip", "disc"):
            raise InstanceError(f"unknown container kind {self.kind!r}")
        if self.kind == "strip":
            if self.width is None or not (self.width > 0):
                raise InstanceError("strip width must be positive")
        elif self.width is not None:
            raise InstanceError("disc container takes no width")

    @property
    def is_strip(self) -> bool:
        return self.kind == "strip"

    def describe(self) -> str:
        return f"strip {self.width:g}" if self.is_strip else "disc"


def Strip(width: float) -> ContainerSpec:
    return ContainerSpec("strip", float(width))


def Disc() -> ContainerSpec:
    return ContainerSpec("disc")


@dataclass(frozen=True)
class FeasibilityTolerance:
    eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if not (self.eps >= 0):
            raise ValueError("eps must be nonnegative")


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem data.

    ``radii`` is sorted descending; ``order[k]`` is the input position of the
    k-th sorted circle.
    """

    radii: np.ndarray
    order: np.ndarray
    container: ContainerSpec
    name: str = "instance"

    @property
    def n(self) -> int:
        return len(self.radii)

    @property
    def width(self) -> float | None:
        return self.container.width

    @property
    def is_strip(self) -> bool:
        return self.container.is_strip

    def to_input_order(self, centers: np.ndarray) -> np.ndarray:
        out = np.empty_like(centers)
        out[self.order] = centers
        return out

    def from_input_order(self, centers: np.ndarray) -> np.ndarray:
        return np.asarray(centers, dtype=float)[self.order]

    def input_radii(self) -> np.ndarray:
        return self.to_input_order(self.radii[:, None])[:, 0]


@dataclass(eq=False)
class Layout:
    centers: np.ndarray
    dimension: float

    def __post_init__(self) -> None:
        self.centers = np.array(self.centers, dtype=float).reshape(-1, 2)
        self.dimension = float(self.dimension)
        if not (self.dimension > 0):
            raise ValueError("layout dimension must be positive")

    def copy(self) -> Layout:
        return Layout(self.centers.copy(), self.dimension)

    def with_dimension(self, dimension: float) -> Layout:
        return Layout(self.centers.copy(), dimension)

    def same_as(self, other: Layout) -> bool:
        return self.dimension == other.dimension and np.array_equal(self.centers, other.centers)


def make_instance(
    radii: Sequence[float], container: ContainerSpec, name: str = "instance"
) -> Instance:
    r = np.asarray(radii, dtype=float).ravel()
    if r.size == 0:
        raise InstanceError("no radii given")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise InstanceError("radii must be positive and finite")
    order = np.argsort(-r, kind="stable")
    r_sorted = r[order]
    if container.is_strip and container.width < 2.0 * r_sorted[0]:
        raise InstanceError("instance infeasible by width")
    r_sorted.flags.writeable = False
    order.flags.writeable = False
    return Instance(r_sorted, order, container, name)


def _depths(inst: Instance, lay: Layout) -> tuple[np.ndarray, np.ndarray]:
    """Pair and border overlap depths, computed literally from the constraints."""
    c = lay.centers
    r = inst.radii
    iu, ju = np.triu_indices(inst.n, 1)
    dx = c[iu, 0] - c[ju, 0]
    dy = c[iu, 1] - c[ju, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    pair = r[iu] + r[ju] - dist
    if inst.is_strip:
        bx = r + np.abs(c[:, 0]) - 0.5 * lay.dimension
        by = r + np.abs(c[:, 1]) - 0.5 * inst.width
        border = np.concatenate([bx, by])
    else:
        border = r + np.sqrt(c[:, 0] * c[:, 0] + c[:, 1] * c[:, 1]) - lay.dimension
    return pair, border


def max_violation(inst: Instance, lay: Layout) -> float:
    pair, border = _depths(inst, lay)
    worst = 0.0
    if pair.size:
        worst = max(worst, float(pair.max()))
    return max(worst, float(border.max()))


def is_feasible(
    inst: Instance, lay: Layout, tol: FeasibilityTolerance | float = DEFAULT_EPS
) -> bool:
    eps = tol.eps if isinstance(tol, FeasibilityTolerance) else float(tol)
    return max_violation(inst, lay) <= eps


def is_strictly_feasible(inst: Instance, lay: Layout) -> bool:
    return max_violation(inst, lay) <= 0.0


def _pull_inside(values: np.ndarray, radii: np.ndarray, half: float) -> np.ndarray:
    # |v| + r <= half must hold in floating point, not just in exact arithmetic
    v = values.copy()
    for _ in range(8):
        bad = np.abs(v) + radii > half
        if not bad.any():
            break
        v[bad] = np.nextafter(v[bad], 0.0)
    return v


def sample_position(
    inst: Instance, k: int, dimension: float, rng: np.random.Generator
) -> np.ndarray:
    """Uniform position for circle ``k`` such that it lies inside the container."""
    r = inst.radii[k : k + 1]
    return _sample(inst, r, dimension, rng)[0]


def _sample(
    inst: Instance, r: np.ndarray, dimension: float, rng: np.random.Generator
) -> np.ndarray:
    n = len(r)
    out = np.zeros((n, 2))
    if inst.is_strip:
        hx = np.maximum(0.0, 0.5 * dimension - r)
        hy = np.maximum(0.0, 0.5 * inst.width - r)
        out[:, 0] = rng.uniform(-1.0, 1.0, n) * hx
        out[:, 1] = rng.uniform(-1.0, 1.0, n) * hy
        out[:, 0] = np.where(hx > 0, _pull_inside(out[:, 0], r, 0.5 * dimension), 0.0)
        out[:, 1] = np.where(hy > 0, _pull_inside(out[:, 1], r, 0.5 * inst.width), 0.0)
    else:
        rho = np.maximum(0.0, dimension - r) * np.sqrt(rng.uniform(0.0, 1.0, n))
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        out[:, 0] = rho * np.cos(theta)
        out[:, 1] = rho * np.sin(theta)
        for _ in range(8):
            bad = np.sqrt(out[:, 0] * out[:, 0] + out[:, 1] * out[:, 1]) + r > dimension
            if not bad.any():
                break
            inside = (dimension - r[bad]) > 0
            out[bad] *= np.where(inside, 1.0 - 1e-15, 0.0)[:, None]
    return out


def random_layout(inst: Instance, dimension: float, rng: np.random.Generator) -> Layout:
    if not (dimension > 0):
        raise ValueError("dimension must be positive")
    return Layout(_sample(inst, inst.radii, dimension, rng), dimension)


def parse_instance(text: str, name: str = "instance") -> Instance:
    """Parse the plain-text instance format.

    First meaningful line is ``strip W`` or ``disc``; each following one holds
    a radius.  ``#`` starts a comment and blank lines are skipped.
    """
    container: ContainerSpec | None = None
    radii: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if container is None:
            parts = line.split()
            try:
                if parts[0].lower() == "strip" and len(parts) == 2:
                    container = Strip(float(parts[1]))
                elif parts[0].lower() == "disc" and len(parts) == 1:
                    container = Disc()
                else:
                    raise InstanceError("expected 'strip W' or 'disc'")
            except (ValueError, InstanceError) as exc:
                raise InstanceError(f"line {lineno}: bad container header {line!r}: {exc}") from None
            continue
        try:
            value = float(line)
        except ValueError:
            raise InstanceError(f"line {lineno}: not a number: {line!r}") from None
        if not (math.isfinite(value) and value > 0):
            raise InstanceError(f"line {lineno}: radius must be positive: {line!r}")
        radii.append(value)
    if container is None:
        raise InstanceError("missing container header")
    if not radii:
        raise InstanceError("no radii given")
    return make_instance(radii, container, name)


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_instance(text, name=path.stem)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None


def format_instance(inst: Instance) -> str:
    lines = [inst.container.describe()]
    lines += [repr(float(r)) for r in inst.input_radii()]
    return "\n".join(lines) + "\n"

"""Solution files and SVG rendering.

Solution file layout::

    dimension <value>
    feasible <0|1>
    <x> <y>            # one line per circle, in the instance's input order

Coordinates are written as the shortest plain decimal that reads back to the
same double, so a written layout re-validates exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Instance, Layout


class SolutionFormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return np.format_float_positional(float(x) + 0.0, unique=True, trim="-")


@dataclass(eq=False)
class Solution:
    dimension: float
    feasible: bool
    centers: np.ndarray  # input order

    def layout(self, inst: Instance) -> Layout:
        if len(self.centers) != inst.n:
            raise SolutionFormatError(
                f"solution has {len(self.centers)} circles, instance has {inst.n}"
            )
        return Layout(inst.from_input_order(self.centers), self.dimension)


def format_solution(inst: Instance, lay: Layout, feasible: bool) -> str:
    lines = [f"dimension {fmt(lay.dimension)}", f"feasible {int(bool(feasible))}"]
    for x, y in inst.to_input_order(lay.centers):
        lines.append(f"{fmt(x)} {fmt(y)}")
    return "\n".join(lines) + "\n"


def write_solution(path: str | Path, inst: Instance, lay: Layout, feasible: bool) -> None:
    Path(path).write_text(format_solution(inst, lay, feasible))


def parse_solution(text: str) -> Solution:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise SolutionFormatError("solution needs dimension and feasible lines")
    try:
        key, val = lines[0].split()
        if key != "dimension":
            raise ValueError
        dimension = float(val)
        key, flag = lines[1].split()
        if key != "feasible" or flag not in ("0", "1"):
            raise ValueError
    except ValueError:
        raise SolutionFormatError("bad solution header") from None
    centers = []
    for lineno, ln in enumerate(lines[2:], start=3):
        parts = ln.split()
        if len(parts) != 2:
            raise SolutionFormatError(f"line {lineno}: expected 'x y'")
        try:
            centers.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise SolutionFormatError(f"line {lineno}: not a number") from None
    return Solution(dimension, flag == "1", np.array(centers, dtype=float).reshape(-1, 2))


def read_solution(path: str | Path) -> Solution:
    return parse_solution(Path(path).read_text())


def _n(x: float) -> str:
    return f"{x:.6f}".rstrip("0").rstrip(".") if x != 0 else "0"


def svg_document(inst: Instance, lay: Layout, labels: bool = False, scale: float = 20.0) -> str:
    """Container outline plus every circle, drawn to scale (y axis pointing up)."""
    if inst.is_strip:
        half_w, half_h = 0.5 * lay.dimension, 0.5 * inst.width
    else:
        half_w = half_h = lay.dimension
    pad = 0.05 * max(half_w, half_h)
    vx, vy = -half_w - pad, -half_h - pad
    vw, vh = 2 * (half_w + pad), 2 * (half_h + pad)
    stroke = _n(0.003 * max(vw, vh))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(vw * scale)}" height="{_n(vh * scale)}" '
        f'viewBox="{_n(vx)} {_n(vy)} {_n(vw)} {_n(vh)}">',
        '<g transform="scale(1,-1)">',
    ]
    if inst.is_strip:
        out.append(
            f'<rect x="{_n(-half_w)}" y="{_n(-half_h)}" width="{_n(2 * half_w)}" '
            f'height="{_n(2 * half_h)}" fill="none" stroke="black" stroke-width="{stroke}"/>'
        )
    else:
        out.append(
            f'<circle class="container" cx="0" cy="0" r="{_n(lay.dimension)}" fill="none" '
            f'stroke="black" stroke-width="{stroke}"/>'
        )
    for k, ((x, y), r) in enumerate(zip(lay.centers, inst.radii)):
        out.append(
            f'<circle cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" fill="#9ecae1" '
            f'stroke="#08519c" stroke-width="{stroke}"/>'
        )
    out.append("</g>")
    if labels:
        size = _n(0.6 * float(inst.radii[-1]))
        for k, (x, y) in enumerate(lay.centers):
            out.append(
                f'<text x="{_n(x)}" y="{_n(-y)}" font-size="{size}" text-anchor="middle" '
                f'dominant-baseline="central">{k + 1}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(inst: Instance, solution_path: str | Path, out_path: str | Path,
               labels: bool = False) -> None:
    sol = read_solution(solution_path)
    Path(out_path).write_text(svg_document(inst, sol.layout(inst), labels))

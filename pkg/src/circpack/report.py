"""Matplotlib figures for layouts and benchmark tables."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable, Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from .model import Instance, Layout  # noqa: E402

MODE_COLORS = {"its": "#1f77b4", "multistart_ts": "#d62728"}


def plot_layout(inst: Instance, lay: Layout, path: str | Path, title: str | None = None,
                labels: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(8, 8 * _aspect(inst, lay)))
    if inst.is_strip:
        ax.add_patch(Rectangle((-lay.dimension / 2, -inst.width / 2), lay.dimension, inst.width,
                               fill=False, lw=1.2, color="k"))
        ax.set_xlim(-lay.dimension / 2 * 1.03, lay.dimension / 2 * 1.03)
        ax.set_ylim(-inst.width / 2 * 1.08, inst.width / 2 * 1.08)
    else:
        ax.add_patch(Circle((0, 0), lay.dimension, fill=False, lw=1.2, color="k"))
        lim = lay.dimension * 1.05
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
    cmap = plt.get_cmap("viridis")
    rmin, rmax = float(inst.radii.min()), float(inst.radii.max())
    for k, ((x, y), r) in enumerate(zip(lay.centers, inst.radii)):
        shade = 0.5 if rmax == rmin else (r - rmin) / (rmax - rmin)
        ax.add_patch(Circle((x, y), r, facecolor=cmap(0.25 + 0.6 * shade), edgecolor="k",
                            lw=0.6, alpha=0.85))
        if labels:
            ax.text(x, y, str(k + 1), ha="center", va="center", fontsize=7)
    ax.set_aspect("equal")
    ax.set_title(title or f"{inst.name}: {'L' if inst.is_strip else 'R'} = {lay.dimension:.4f}")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _aspect(inst: Instance, lay: Layout) -> float:
    if not inst.is_strip:
        return 1.0
    return min(1.0, max(0.25, inst.width / lay.dimension + 0.1))


def plot_bench(rows: Iterable[Mapping], path: str | Path) -> Path:
    """Final dimension per instance, one marker per seed, one colour per mode."""
    by_mode: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    names: list[str] = []
    for row in rows:
        if row.get("error"):
            continue
        name = row["instance"]
        if name not in names:
            names.append(name)
        by_mode[row["mode"]][name].append(float(row["dimension"]))
    fig, ax = plt.subplots(figsize=(max(6, 0.7 * len(names) + 2), 4))
    modes = sorted(by_mode)
    width = 0.8 / max(1, len(modes))
    for m, mode in enumerate(modes):
        for i, name in enumerate(names):
            vals = by_mode[mode].get(name, [])
            xs = [i - 0.4 + width * (m + 0.5)] * len(vals)
            ax.scatter(xs, vals, s=14, color=MODE_COLORS.get(mode, "gray"),
                       label=mode if i == 0 else None, alpha=0.8)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("final dimension")
    if modes:
        ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

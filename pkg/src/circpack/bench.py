"""Benchmark harness: run a directory of instances under one or both search modes."""

from __future__ import annotations

import csv
import io as _io
import statistics
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .driver import ITS, MULTISTART_TS, SolverParams, solve_and_finish
from .model import InstanceError, is_strictly_feasible, load_instance

# stable contract: do not reorder
CSV_COLUMNS = (
    "instance", "n", "width", "mode", "seed", "target", "dimension", "feasible",
    "ts_launches", "perturbations", "restarts", "elapsed", "error",
)


@dataclass(frozen=True)
class Job:
    path: str
    mode: str
    seed: int
    time_budget: float
    target: float | None = None
    max_ts_launches: int | None = None


def load_targets(path: str | Path) -> dict[str, float]:
    """``name value`` per line; ``#`` comments allowed."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstanceError(f"{path}:{lineno}: expected 'name value'")
        out[parts[0]] = float(parts[1])
    return out


def list_corpus(corpus_dir: str | Path) -> list[Path]:
    return sorted(p for p in Path(corpus_dir).iterdir() if p.is_file() and p.suffix == ".txt")


def run_job(job: Job) -> dict:
    row = {k: "" for k in CSV_COLUMNS}
    row.update(instance=Path(job.path).stem, mode=job.mode, seed=job.seed,
               target="" if job.target is None else f"{job.target:.4f}")
    start = time.monotonic()
    try:
        inst = load_instance(job.path)
        row.update(n=inst.n, width=f"{inst.width:g}" if inst.is_strip else "disc")
        params = SolverParams(target_dimension=job.target, time_budget=job.time_budget,
                              seed=job.seed, ablation_mode=job.mode,
                              max_ts_launches=job.max_ts_launches)
        res, lay, dim = solve_and_finish(inst, params)
        row.update(
            dimension=f"{dim:.4f}",
            feasible=int(res.feasible and is_strictly_feasible(inst, lay)),
            ts_launches=res.ts_launch_count,
            perturbations=res.perturbation_count,
            restarts=res.restart_count,
        )
    except Exception as exc:  # recorded per row; the harness keeps going
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["feasible"] = 0
        traceback.print_exc()
    row["elapsed"] = f"{time.monotonic() - start:.2f}"
    return row


def run_bench(
    corpus_dir: str | Path,
    modes: Sequence[str] = (ITS,),
    seeds: Sequence[int] = (0,),
    time_budget: float = 60.0,
    targets: dict[str, float] | None = None,
    jobs: int = 1,
    max_ts_launches: int | None = None,
) -> list[dict]:
    targets = targets or {}
    work = [
        Job(str(p), mode, seed, time_budget, targets.get(p.stem), max_ts_launches)
        for p in list_corpus(corpus_dir)
        for mode in modes
        for seed in seeds
    ]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(run_job, work))
    return [run_job(j) for j in work]


def write_csv(rows: Iterable[dict], path: str | Path | None = None) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: row.get(k, "") for k in CSV_COLUMNS})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def format_table(rows: Sequence[dict]) -> str:
    cols = ("instance", "n", "width", "mode", "seed", "dimension", "ts_launches", "elapsed", "feasible")
    heads = ("Instance", "N", "W", "Mode", "Seed", "L", "TS", "t_total", "Feas")
    cells = [heads] + [tuple(str(r.get(c, "")) for c in cols) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    for r in rows:
        if r.get("error"):
            lines.append(f"! {r['instance']} ({r['mode']}, seed {r['seed']}): {r['error']}")
    return "\n".join(lines)


def mode_medians(rows: Iterable[dict]) -> dict[str, float]:
    """Per mode: median over instances of the per-instance median final dimension."""
    per: dict[str, dict[str, list[float]]] = {}
    for r in rows:
        if r.get("error") or r.get("dimension") in ("", None):
            continue
        per.setdefault(r["mode"], {}).setdefault(r["instance"], []).append(float(r["dimension"]))
    return {
        mode: statistics.median(statistics.median(v) for v in insts.values())
        for mode, insts in per.items()
    }


MODES = {"its": ITS, "multistart-ts": MULTISTART_TS, "multistart_ts": MULTISTART_TS}

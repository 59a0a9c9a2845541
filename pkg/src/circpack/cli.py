"""Command-line front end.

    circpack run --instance FILE [--time-limit 60s] [--seed 0] [--out sol.txt] [--svg fig.svg]
    circpack bench CORPUS_DIR [--mode its|multistart-ts|both] [--seeds 0,1,2] [--csv out.csv]
    circpack render SOLUTION --instance FILE --out fig.svg

``run`` is the default subcommand, so ``circpack --instance FILE`` also works.
Exit codes: 0 feasible, 1 input error, 2 search ended abortive.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench as benchmod
from .driver import ITS, MULTISTART_TS, SolverParams, solve_and_finish
from .finisher import FinishError
from .io import SolutionFormatError, format_solution, read_solution, svg_document
from .model import ContainerSpec, Disc, InstanceError, Strip, is_strictly_feasible, load_instance, make_instance

EXIT_OK, EXIT_INPUT, EXIT_ABORTIVE = 0, 1, 2
_UNITS = {"": 1.0, "s": 1.0, "m": 60.0, "h": 3600.0}


def parse_duration(text: str) -> float:
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*([smh]?)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad duration {text!r} (use e.g. 30s, 5m, 2h)")
    value = float(m.group(1)) * _UNITS[m.group(2)]
    if value <= 0:
        raise argparse.ArgumentTypeError("duration must be positive")
    return value


def parse_seeds(text: str) -> list[int]:
    if re.fullmatch(r"\d+", text):
        return list(range(int(text)))
    return [int(s) for s in text.split(",") if s.strip()]


@dataclass
class SolutionRecord:
    instance: str
    n: int
    width: str
    dimension: str
    seed: int
    elapsed: float
    ts_launch_count: int
    perturbation_count: int
    feasible: bool
    centers: np.ndarray

    def summary(self) -> str:
        return (
            f"instance={self.instance} N={self.n} W={self.width} L={self.dimension} "
            f"feasible={int(self.feasible)} seed={self.seed} elapsed={self.elapsed:.2f}s "
            f"ts={self.ts_launch_count} perturbations={self.perturbation_count}"
        )


def _override_container(inst, container: str | None, width: float | None):
    if container is None and width is None:
        return inst
    kind = container or ("strip" if inst.is_strip else "disc")
    spec: ContainerSpec
    if kind == "strip":
        w = width if width is not None else inst.width
        if w is None:
            raise InstanceError("--width is required for a strip container")
        spec = Strip(w)
    else:
        spec = Disc()
    return make_instance(inst.input_radii(), spec, inst.name)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        inst = _override_container(load_instance(args.instance), args.container, args.width)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    params = SolverParams(
        target_dimension=args.target_length,
        time_budget=args.time_limit,
        seed=args.seed,
        ablation_mode=benchmod.MODES[args.mode],
    )
    trace_fh = open(args.trace, "w") if args.trace else None

    def sink(event: dict) -> None:
        trace_fh.write(json.dumps(event, sort_keys=True) + "\n")

    try:
        res, lay, dim = solve_and_finish(inst, params, trace=sink if trace_fh else None)
    except FinishError as exc:
        print(f"error: post-processing failed: {exc}", file=sys.stderr)
        return EXIT_ABORTIVE
    finally:
        if trace_fh:
            trace_fh.close()

    exact = is_strictly_feasible(inst, lay)
    rec = SolutionRecord(
        inst.name, inst.n, f"{inst.width:g}" if inst.is_strip else "disc", f"{dim:.4f}",
        args.seed, res.elapsed, res.ts_launch_count, res.perturbation_count, exact,
        inst.to_input_order(lay.centers),
    )
    text = format_solution(inst, lay, exact)
    if args.out:
        Path(args.out).write_text(text)
    if args.svg:
        Path(args.svg).write_text(svg_document(inst, lay, labels=args.labels))
    if args.plot:
        from .report import plot_layout

        plot_layout(inst, lay, args.plot, labels=args.labels)
    status = "" if res.feasible else " (target not reached; post-processed best layout)"
    print(rec.summary() + status)
    return EXIT_OK if (res.feasible and exact) else EXIT_ABORTIVE


def cmd_bench(args: argparse.Namespace) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        print(f"error: {corpus} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    try:
        targets = benchmod.load_targets(args.targets) if args.targets else None
    except (OSError, InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    modes = [ITS, MULTISTART_TS] if args.mode == "both" else [benchmod.MODES[args.mode]]
    rows = benchmod.run_bench(corpus, modes, args.seeds, args.time_limit, targets, args.jobs)
    print(benchmod.format_table(rows))
    medians = benchmod.mode_medians(rows)
    for mode, med in sorted(medians.items()):
        print(f"median[{mode}] = {med:.4f}")
    benchmod.write_csv(rows, args.csv)
    if args.figure and rows:
        from .report import plot_bench

        plot_bench(rows, args.figure)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    try:
        inst = load_instance(args.instance)
        sol = read_solution(args.solution)
        lay = sol.layout(inst)
    except (InstanceError, SolutionFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    Path(args.out).write_text(svg_document(inst, lay, labels=args.labels))
    if args.plot:
        from .report import plot_layout

        plot_layout(inst, lay, args.plot, labels=args.labels)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circpack", description="Iterated tabu search for circle packing")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--container", choices=("strip", "disc"))
    r.add_argument("--width", type=float)
    r.add_argument("--target-length", type=float, help="pre-set dimension (L or R)")
    r.add_argument("--time-limit", type=parse_duration, default=60.0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--mode", choices=("its", "multistart-ts"), default="its")
    r.add_argument("--out", help="solution file")
    r.add_argument("--svg", help="SVG rendering of the final layout")
    r.add_argument("--plot", help="PNG rendering via matplotlib")
    r.add_argument("--labels", action="store_true", help="label circles by radius rank")
    r.add_argument("--trace", help="JSON-lines progress log")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run a directory of instances")
    b.add_argument("corpus")
    b.add_argument("--mode", choices=("its", "multistart-ts", "both"), default="its")
    b.add_argument("--seeds", type=parse_seeds, default=[0], help="count (5) or list (0,3,7)")
    b.add_argument("--time-limit", type=parse_duration, default=60.0)
    b.add_argument("--targets", help="file of 'name dimension' lines")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--csv", help="write the results table as CSV")
    b.add_argument("--figure", help="PNG chart of final dimensions")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("render", help="draw a solution file as SVG")
    v.add_argument("solution")
    v.add_argument("--instance", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--plot", help="also write a PNG via matplotlib")
    v.add_argument("--labels", action="store_true")
    v.set_defaults(func=cmd_render)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("-") and argv[0] not in ("-h", "--help", "-v", "--verbose"):
        argv.insert(0, "run")
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

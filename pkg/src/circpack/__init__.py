"""Iterated tabu search for packing circles into a strip (or a disc) of minimum size."""

from .driver import ITS, MULTISTART_TS, RunResult, SolverParams, default_dimension, solve, solve_and_finish
from .finisher import FinishConfig, post_process, round_report
from .model import (
    ContainerSpec,
    Disc,
    Instance,
    InstanceError,
    Layout,
    Strip,
    is_feasible,
    is_strictly_feasible,
    load_instance,
    make_instance,
    parse_instance,
    random_layout,
)
from .penalty import evaluate

__all__ = [
    "ITS", "MULTISTART_TS", "RunResult", "SolverParams", "default_dimension", "solve",
    "solve_and_finish", "FinishConfig", "post_process", "round_report", "ContainerSpec", "Disc",
    "Instance", "InstanceError", "Layout", "Strip", "is_feasible", "is_strictly_feasible",
    "load_instance", "make_instance", "parse_instance", "random_layout", "evaluate",
]

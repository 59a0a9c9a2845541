import csv
import io
import json

import numpy as np
import pytest

from circpack import bench
from circpack.cli import main, parse_duration, parse_seeds
from circpack.io import (
    SolutionFormatError, format_solution, parse_solution, read_solution, render_svg, svg_document,
    write_solution,
)
from circpack.model import Disc, Layout, Strip, make_instance


def _write(path, text):
    path.write_text(text)
    return path


def test_solution_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    inst = make_instance(rng.uniform(0.1, 3, 17), Strip(7))
    lay = Layout(rng.normal(size=(17, 2)) * 1e3, 123.456789012345)
    path = tmp_path / "s.txt"
    write_solution(path, inst, lay, True)
    sol = read_solution(path)
    back = sol.layout(inst)
    assert sol.feasible and back.same_as(lay)


def test_negative_zero_is_written_plainly():
    inst = make_instance([1], Strip(2))
    assert "-0" not in format_solution(inst, Layout([[-0.0, 0.0]], 2), True)


@pytest.mark.parametrize("text", ["", "dimension 2\n", "dim 2\nfeasible 1\n", "dimension 2\nfeasible 3\n",
                                  "dimension 2\nfeasible 1\n1\n", "dimension 2\nfeasible 1\n1 x\n"])
def test_malformed_solutions(text):
    with pytest.raises(SolutionFormatError):
        parse_solution(text)


def test_solution_instance_mismatch():
    sol = parse_solution("dimension 2\nfeasible 1\n0 0\n1 1\n")
    with pytest.raises(SolutionFormatError, match="2 circles"):
        sol.layout(make_instance([1], Strip(2)))


def test_svg_single_circle_in_rectangle():
    inst = make_instance([1], Strip(2))
    svg = svg_document(inst, Layout([[0, 0]], 2))
    assert svg.count("<circle") == 1 and svg.count("<rect") == 1


def test_svg_is_byte_identical():
    rng = np.random.default_rng(1)
    inst = make_instance(rng.uniform(0.5, 1.5, 6), Strip(4))
    lay = Layout(rng.normal(size=(6, 2)), 9)
    assert svg_document(inst, lay, labels=True) == svg_document(inst, lay, labels=True)


def test_svg_disc_container():
    inst = make_instance([1, 1], Disc())
    svg = svg_document(inst, Layout([[-1, 0], [1, 0]], 2))
    assert 'class="container"' in svg and "<rect" not in svg
    assert svg.count("<circle") == 3


def test_render_svg_function(tmp_path):
    inst = make_instance([1], Strip(2))
    sol = _write(tmp_path / "s.txt", format_solution(inst, Layout([[0, 0]], 2), True))
    render_svg(inst, sol, tmp_path / "o.svg")
    assert (tmp_path / "o.svg").read_text().count("<circle") == 1


def test_duration_and_seed_parsing():
    assert parse_duration("5s") == 5 and parse_duration("2m") == 120 and parse_duration("1.5h") == 5400
    assert parse_duration("7") == 7
    assert parse_seeds("3") == [0, 1, 2] and parse_seeds("4,9") == [4, 9]


def test_cli_run_single_circle(tmp_path, capsys):
    inst = _write(tmp_path / "one.txt", "strip 2\n1\n")
    out, svg, trace = tmp_path / "one.sol", tmp_path / "one.svg", tmp_path / "t.jsonl"
    code = main(["--instance", str(inst), "--seed", "1", "--time-limit", "5s",
                 "--out", str(out), "--svg", str(svg), "--trace", str(trace)])
    assert code == 0
    summary = capsys.readouterr().out
    assert "L=2.0000" in summary and "feasible=1" in summary
    assert read_solution(out).dimension == 2.0
    assert svg.read_text().count("<circle") == 1
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert events[-1]["phase"] == "finish" and events[-1]["dimension"] == 2.0


def test_cli_run_plot(tmp_path):
    inst = _write(tmp_path / "two.txt", "disc\n1\n1\n")
    png = tmp_path / "two.png"
    assert main(["run", "--instance", str(inst), "--time-limit", "5", "--plot", str(png), "--labels"]) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_cli_missing_file(tmp_path, capsys):
    assert main(["--instance", str(tmp_path / "none.txt")]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_cli_malformed_file(tmp_path, capsys):
    inst = _write(tmp_path / "bad.txt", "strip 2\n1\nbanana\n")
    assert main(["--instance", str(inst)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_cli_unreachable_target_exits_2(tmp_path, capsys):
    inst = _write(tmp_path / "two.txt", "strip 2\n1\n1\n")
    code = main(["--instance", str(inst), "--target-length", "3.5", "--time-limit", "1s"])
    assert code == 2
    assert "L=4.0000" in capsys.readouterr().out


def test_cli_render(tmp_path):
    inst = _write(tmp_path / "one.txt", "strip 2\n1\n")
    sol = _write(tmp_path / "one.sol", "dimension 2\nfeasible 1\n0 0\n")
    out = tmp_path / "r.svg"
    assert main(["render", str(sol), "--instance", str(inst), "--out", str(out)]) == 0
    assert out.read_text().count("<circle") == 1
    bad = _write(tmp_path / "two.sol", "dimension 2\nfeasible 1\n0 0\n1 1\n")
    assert main(["render", str(bad), "--instance", str(inst), "--out", str(out)]) == 1


def test_cli_bench(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    _write(corpus / "a.txt", "strip 2\n1\n")
    _write(corpus / "b.txt", "strip 4\n1\n1\n")
    _write(corpus / "c.txt", "disc\n1\n")
    targets = _write(tmp_path / "targets.txt", "a 2\nb 2  # stacked\nc 1\n")
    csv_path, fig = tmp_path / "out.csv", tmp_path / "out.png"
    code = main(["bench", str(corpus), "--seeds", "1", "--time-limit", "5s", "--targets", str(targets),
                 "--csv", str(csv_path), "--figure", str(fig)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert len(rows) == 3
    assert tuple(rows[0]) == bench.CSV_COLUMNS
    assert all(r["feasible"] == "1" and not r["error"] for r in rows)
    assert {r["instance"]: r["dimension"] for r in rows} == {"a": "2.0000", "b": "2.0000", "c": "1.0000"}
    assert fig.read_bytes()[:4] == b"\x89PNG"
    assert "median[its]" in capsys.readouterr().out


def test_cli_bench_empty_corpus(tmp_path):
    csv_path = tmp_path / "out.csv"
    assert main(["bench", str(tmp_path), "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().strip() == ",".join(bench.CSV_COLUMNS)


def test_cli_bench_not_a_directory(tmp_path):
    assert main(["bench", str(tmp_path / "missing")]) == 1


def test_bench_records_errors(tmp_path):
    _write(tmp_path / "bad.txt", "strip 1\n1\n")
    rows = bench.run_bench(tmp_path, time_budget=1)
    assert len(rows) == 1 and "infeasible by width" in rows[0]["error"] and rows[0]["feasible"] == 0


def test_mode_medians():
    rows = [dict(mode="its", instance="a", dimension="1"), dict(mode="its", instance="a", dimension="3"),
            dict(mode="its", instance="b", dimension="10"),
            dict(mode="multistart_ts", instance="a", dimension="4", error="")]
    assert bench.mode_medians(rows) == {"its": 6.0, "multistart_ts": 4.0}

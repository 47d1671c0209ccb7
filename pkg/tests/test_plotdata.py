"""Tests for CSV plot data."""

from online_supervisor.harness import BatchSummary, RunRecord
from online_supervisor.plotdata import SUMMARY_COLUMNS, TRACE_COLUMNS, emit_plot_data


def three_step_record(seed: int = 1) -> RunRecord:
    return RunRecord(
        seed=seed,
        a=-1.0,
        b=3.0,
        steps=3,
        accepted=True,
        rank_trace=[3, 3, 1, 0],
        level_trace=[3.0, 2.0, 1.0, 0.0],
        pattern_sizes=[2, 1, 1],
        events=["n", "c1", "c2"],
        states=[("x", 0), ("x", 0), ("y", 0), ("z", 0)],
        label_trace=[[], [], [], []],
        legal_count=2,
        neutral_count=1,
        neutral_steps=[0],
    )


def summary(a: float) -> BatchSummary:
    return BatchSummary(
        a=a, b=30.0, runs=10, mean_steps=40.0, std_steps=2.5, mean_pattern_size=1.5, std_pattern_size=0.25,
        accepted_count=10,
    )


def test_trace_csv(tmp_path):
    path = emit_plot_data([three_step_record()], tmp_path / "trace.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert lines[1:] == ["0,1,0,3,3.0", "0,1,1,3,2.0", "0,1,2,1,1.0", "0,1,3,0,0.0"]


def test_trace_csv_keeps_runs_apart(tmp_path):
    path = emit_plot_data([three_step_record(5), three_step_record(9)], tmp_path / "traces.csv")
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    assert len(rows) == 8
    assert {(run, seed) for run, seed, *_ in rows} == {("0", "5"), ("1", "9")}
    assert len({(run, k) for run, _, k, *_ in rows}) == 8


def test_summary_csv(tmp_path):
    path = emit_plot_data([summary(a) for a in (-0.25, -0.5, -1.0, -2.0)], tmp_path / "summary.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    assert len(lines) == 5
    assert lines[1] == "-0.25,30.0,40.0,2.5,1.5,0.25"


def test_empty_input_writes_header_only(tmp_path):
    path = emit_plot_data([], tmp_path / "empty.csv")
    assert path.read_text() == ",".join(TRACE_COLUMNS) + "\n"
    path = emit_plot_data([], tmp_path / "empty_summary.csv", kind="summary")
    assert path.read_text() == ",".join(SUMMARY_COLUMNS) + "\n"


def test_output_is_byte_stable(tmp_path):
    first = emit_plot_data([three_step_record()], tmp_path / "a.csv").read_bytes()
    second = emit_plot_data([three_step_record()], tmp_path / "b.csv").read_bytes()
    assert first == second
    assert b"\r" not in first

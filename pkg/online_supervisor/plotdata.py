"""CSV output for rank traces and batch summaries."""

import csv
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

from .harness import BatchSummary, RunRecord

TRACE_COLUMNS = ["run", "seed", "k", "rank", "level"]
SUMMARY_COLUMNS = ["a", "b", "mean_steps", "std_steps", "mean_pattern_size", "std_pattern_size"]


def write_trace_csv(records: Sequence[RunRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for run, record in enumerate(records):
            for k, (rank, level) in enumerate(zip(record.rank_trace, record.level_trace)):
                writer.writerow([run, record.seed, k, rank, level])


def write_summary_csv(summaries: Sequence[BatchSummary], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for summary in summaries:
            writer.writerow([getattr(summary, column) for column in SUMMARY_COLUMNS])


def emit_plot_data(
    items: Sequence[Union[RunRecord, BatchSummary]],
    path: Union[str, Path],
    kind: Optional[Literal["trace", "summary"]] = None,
) -> Path:
    """
    Write run traces or batch summaries as CSV.

    Args:
        items: RunRecords (one trace row per visited state, tagged with the
            record's position and seed) or BatchSummaries
        path: Output file
        kind: "trace" or "summary"; inferred from the items when omitted,
            and "trace" for an empty list

    Returns:
        The path written
    """
    if kind is None:
        kind = "summary" if items and isinstance(items[0], BatchSummary) else "trace"
    if kind == "trace":
        write_trace_csv(items, path)
    elif kind == "summary":
        write_summary_csv(items, path)
    else:
        raise ValueError(f"unknown plot data kind '{kind}'")
    return Path(path)

"""Text tables and figure rendering for experiment results."""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .patterns import AccuracyTable, Axis, Simultaneity
from .session import RunSummary

_SIMULT_LABELS = {
    Simultaneity.SINGLE: "single",
    Simultaneity.LOWER_MULTIPLE: "2-5 motors",
    Simultaneity.HIGHER_MULTIPLE: ">5 motors",
}
_AXIS_LABELS = {
    Axis.SINGLE_AXIS: "single axis",
    Axis.MULTI_AXIS: "multi axis",
}


def format_run_summary(summary: RunSummary) -> str:
    """Table of per-person times with average-seconds and percentage rows.

    The percentage row is computed from the unrounded means
    (round(100 * mean_k / mean_1)), never copied from elsewhere; quoted
    summaries of the same data that used a different convention may
    disagree with it.
    """
    n_runs = len(summary.means)
    header = [""] + [f"run {k + 1}" for k in range(n_runs)]
    rows = [header]
    for i, person in enumerate(summary.per_person):
        rows.append([f"person{i + 1} [sec]"] + [f"{t:g}" for t in person])
    rows.append(["average time [sec]"] + [str(s) for s in summary.seconds_row])
    rows.append(["average time [%]"] + [str(p) for p in summary.percent_row])
    widths = [max(len(r[c]) for r in rows) for c in range(n_runs + 1)]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths))
             for row in rows]
    lines.append("")
    lines.append("note: the percentage row is round(100*mean_k/mean_1) on "
                 "unrounded means.")
    return "\n".join(lines) + "\n"


def _format_group_table(title: str, labels: dict, groups: dict) -> List[str]:
    lines = [title,
             f"{'group':>12}  {'n':>4}  {'correct':>8}  {'partial':>8}  "
             f"{'wrong':>8}"]
    for key, label in labels.items():
        if key not in groups:
            continue
        g = groups[key]
        lines.append(f"{label:>12}  {g.count:>4}  {g.correct_pct:>7.1f}%  "
                     f"{g.partial_pct:>7.1f}%  {g.wrong_pct:>7.1f}%")
    return lines


def format_accuracy_table(table: AccuracyTable) -> str:
    lines = _format_group_table("accuracy by simultaneity class:",
                                _SIMULT_LABELS, table.by_simultaneity)
    lines.append("")
    lines += _format_group_table("accuracy by axis class:",
                                 _AXIS_LABELS, table.by_axis)
    return "\n".join(lines) + "\n"


def _grouped_bars(ax, labels: List[str], groups, title: str):
    x = range(len(labels))
    width = 0.25
    correct = [g.correct_pct for g in groups]
    partial = [g.partial_pct for g in groups]
    wrong = [g.wrong_pct for g in groups]
    ax.bar([i - width for i in x], correct, width, label="correct",
           color="#2a7e43")
    ax.bar(list(x), partial, width, label="partially correct",
           color="#e0a800")
    ax.bar([i + width for i in x], wrong, width, label="wrong",
           color="#b4342c")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel("share of trials [%]")
    ax.set_ylim(0, 105)
    ax.set_title(title)
    ax.legend()


def render_accuracy_figures(table: AccuracyTable, outdir: Path) -> List[Path]:
    """One bar chart per grouping; returns the written file paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    for fname, labels_map, groups, title in (
        ("accuracy_by_simultaneity.png", _SIMULT_LABELS,
         table.by_simultaneity, "Pattern accuracy by simultaneous motors"),
        ("accuracy_by_axis.png", _AXIS_LABELS,
         table.by_axis, "Pattern accuracy by movement axis"),
    ):
        present = [(labels_map[k], groups[k]) for k in labels_map
                   if k in groups]
        if not present:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        _grouped_bars(ax, [p[0] for p in present], [p[1] for p in present],
                      title)
        fig.tight_layout()
        path = outdir / fname
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def render_run_times_figure(summary: RunSummary, outdir: Path) -> Path:
    """Per-run average completion times with individual runs overlaid."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    runs = range(1, len(summary.means) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    for person in summary.per_person:
        ax.plot(list(runs), person, color="#7fa8d0", alpha=0.6, marker="o",
                markersize=3, linewidth=1)
    ax.plot(list(runs), summary.means, color="#1f4e79", marker="o",
            linewidth=2.5, label="average")
    ax.set_xticks(list(runs))
    ax.set_xlabel("run")
    ax.set_ylabel("completion time [s]")
    ax.set_title("Route completion times per run")
    ax.legend()
    fig.tight_layout()
    path = outdir / "run_times.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_delimited_summary(summary: Optional[RunSummary],
                            table: Optional[AccuracyTable],
                            outdir: Path) -> List[Path]:
    """CSV companions to the figures."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if summary is not None:
        path = outdir / "run_summary.csv"
        n = len(summary.means)
        rows = ["row," + ",".join(f"run{k + 1}" for k in range(n))]
        for i, person in enumerate(summary.per_person):
            rows.append(f"person{i + 1}," + ",".join(f"{t:g}" for t in person))
        rows.append("average_sec," + ",".join(map(str, summary.seconds_row)))
        rows.append("average_pct," + ",".join(map(str, summary.percent_row)))
        path.write_text("\n".join(rows) + "\n")
        written.append(path)
    if table is not None:
        path = outdir / "accuracy.csv"
        rows = ["grouping,group,count,correct_pct,partial_pct,wrong_pct"]
        for k, g in table.by_simultaneity.items():
            rows.append(f"simultaneity,{k.value},{g.count},{g.correct_pct},"
                        f"{g.partial_pct},{g.wrong_pct}")
        for k, g in table.by_axis.items():
            rows.append(f"axis,{k.value},{g.count},{g.correct_pct},"
                        f"{g.partial_pct},{g.wrong_pct}")
        path.write_text("\n".join(rows) + "\n")
        written.append(path)
    return written


__all__ = [
    "format_accuracy_table", "format_run_summary",
    "render_accuracy_figures", "render_run_times_figure",
    "write_delimited_summary",
]

#!/usr/bin/env python3
"""Render the three standard charts from a bench CSV.

Reads only the persisted CSV (the one cross-tool interface; the engine
package is deliberately not imported) and writes three images:

    exec_time.<fmt>     grouped bars, mapper vs reducer milliseconds
    ram_usage.<fmt>     grouped bars, mapper vs reducer megabytes
    workload_pct.<fmt>  100%-stacked bars of the map/reduce split

Charts plot the CSV values exactly: no smoothing, no interpolation.
Rendering is deterministic for a given CSV and format.

Usage:
    python3 render_plots.py --in bench.csv --out charts --format png

Exit codes: 0 rendered, 2 schema mismatch or bad arguments, 1 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "render-plots"

import matplotlib.pyplot as plt

EXPECTED_HEADER = (
    "func_num,avg_map_ms,avg_reduce_ms,avg_map_mem_mb,avg_reduce_mem_mb,"
    "map_pct,reduce_pct,wall_clock_ms"
)

WORKLOAD_NOTE = (
    "workload % = each phase's share of (mean mapper time + mean reducer time)"
)

MAP_COLOR = "#4878cf"
REDUCE_COLOR = "#ee854a"


class SchemaMismatch(Exception):
    """The input file does not carry the bench CSV header."""


@dataclass(frozen=True)
class BenchRow:
    func_num: int
    avg_map_ms: float
    avg_reduce_ms: float
    avg_map_mem_mb: float
    avg_reduce_mem_mb: float
    map_pct: float
    reduce_pct: float
    wall_clock_ms: float


@dataclass(frozen=True)
class ChartSpec:
    csv_path: Path
    out_dir: Path
    format: str = "png"  # png or svg


def load_rows(path: Path) -> list[BenchRow]:
    lines = [line for line in path.read_text().splitlines() if line]
    if not lines or lines[0] != EXPECTED_HEADER:
        raise SchemaMismatch(f"{path}: expected header {EXPECTED_HEADER!r}")
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != 8:
            raise SchemaMismatch(f"{path}: expected 8 fields, got {len(fields)}")
        try:
            rows.append(BenchRow(int(fields[0]), *(float(f) for f in fields[1:])))
        except ValueError as exc:
            raise SchemaMismatch(f"{path}: {exc}") from exc
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    return rows


def _new_figure() -> tuple[plt.Figure, plt.Axes]:
    fig, ax = plt.subplots(figsize=(8.0, 4.5), dpi=120)
    ax.grid(axis="y", linewidth=0.4, alpha=0.5)
    ax.set_axisbelow(True)
    return fig, ax


def _grouped_bars(ax, rows, map_values, reduce_values):
    positions = range(len(rows))
    width = 0.38
    ax.bar(
        [p - width / 2 for p in positions], map_values, width,
        label="Mapper", color=MAP_COLOR,
    )
    ax.bar(
        [p + width / 2 for p in positions], reduce_values, width,
        label="Reducer", color=REDUCE_COLOR,
    )
    ax.set_xticks(list(positions), [str(r.func_num) for r in rows])
    ax.set_xlabel("Number of MapReduce functions")
    ax.legend()


def build_exec_time_figure(rows: list[BenchRow]) -> plt.Figure:
    fig, ax = _new_figure()
    _grouped_bars(ax, rows, [r.avg_map_ms for r in rows], [r.avg_reduce_ms for r in rows])
    ax.set_ylabel("Average execution time (ms)")
    ax.set_title("Average Execution Time of MapReduce Functions")
    fig.tight_layout()
    return fig


def build_ram_usage_figure(rows: list[BenchRow]) -> plt.Figure:
    fig, ax = _new_figure()
    _grouped_bars(
        ax, rows, [r.avg_map_mem_mb for r in rows], [r.avg_reduce_mem_mb for r in rows]
    )
    ax.set_ylabel("Average RAM usage (MB)")
    ax.set_title("Average RAM Usage of Functions")
    fig.tight_layout()
    return fig


def build_workload_figure(rows: list[BenchRow]) -> plt.Figure:
    fig, ax = _new_figure()
    positions = range(len(rows))
    map_pct = [r.map_pct for r in rows]
    reduce_pct = [r.reduce_pct for r in rows]
    ax.bar(positions, map_pct, 0.6, label="Mapper", color=MAP_COLOR)
    ax.bar(positions, reduce_pct, 0.6, bottom=map_pct, label="Reducer", color=REDUCE_COLOR)
    ax.set_xticks(list(positions), [str(r.func_num) for r in rows])
    ax.set_xlabel("Number of MapReduce functions")
    ax.set_ylabel("Workload share (%)")
    ax.set_ylim(0, 100)
    ax.set_title("Workload Percentage of MapReduce Functions")
    ax.legend(loc="lower right")
    fig.text(0.5, 0.012, WORKLOAD_NOTE, ha="center", fontsize=7, style="italic")
    fig.tight_layout(rect=(0, 0.04, 1, 1))
    return fig


BUILDERS = {
    "exec_time": build_exec_time_figure,
    "ram_usage": build_ram_usage_figure,
    "workload_pct": build_workload_figure,
}


def render_charts(spec: ChartSpec) -> list[Path]:
    """Write the three chart files; returns their paths."""
    rows = load_rows(spec.csv_path)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    metadata = {"Date": None} if spec.format == "svg" else None
    for name, build in BUILDERS.items():
        fig = build(rows)
        path = spec.out_dir / f"{name}.{spec.format}"
        fig.savefig(path, format=spec.format, metadata=metadata)
        plt.close(fig)
        written.append(path)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_plots",
        description="Render execution-time, RAM, and workload charts from a bench CSV.",
    )
    parser.add_argument("--in", dest="csv_path", required=True, type=Path)
    parser.add_argument("--out", dest="out_dir", required=True, type=Path)
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)

    try:
        written = render_charts(ChartSpec(args.csv_path, args.out_dir, args.format))
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

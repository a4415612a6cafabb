"""Scaling experiment harness: sweep function counts, aggregate, report.

A sweep generates one corpus into a fresh store, then for each function
count runs one discarded warm-up job followed by the timed repeats.
Per-point metrics are the medians over repeats (timing noise on shared
desktops is heavy-tailed), and the workload percentages are computed
from those medians. Points run strictly sequentially so they do not
contend for cores.

The persisted CSV is the one interchange format downstream tools
consume; its header is fixed and checked on load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median

from .corpus import CorpusSpec, generate_corpus
from .mapreduce import JOBS_BUCKET
from .object_store import MemoryObjectStore, ObjectStore
from .orchestrator import JobConfig, JobError, JobMetrics, compute_workload_pct, run_job
from .runtime import FunctionRuntime
from .wordcount import register_wordcount

CSV_HEADER = (
    "func_num,avg_map_ms,avg_reduce_ms,avg_map_mem_mb,avg_reduce_mem_mb,"
    "map_pct,reduce_pct,wall_clock_ms"
)

CROSS_CSV_HEADER = (
    "num_mappers,num_reducers,avg_map_ms,avg_reduce_ms,avg_map_mem_mb,"
    "avg_reduce_mem_mb,map_pct,reduce_pct,wall_clock_ms"
)

WORKLOAD_PCT_NOTE = (
    "workload %: each phase's share of (mean mapper time + mean reducer time)"
)

CORPUS_JOB_ID = "corpus"


class BenchError(Exception):
    pass


class JobFailed(BenchError):
    """A sweep repeat failed; carries which point died and why."""


class SchemaMismatch(BenchError):
    """A CSV file does not carry the expected bench header."""


@dataclass(frozen=True)
class SweepConfig:
    func_counts: tuple[int, ...] = (1, 2, 5, 10)
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    repeats: int = 3
    concurrency_cap: int | None = None  # None = fully parallel per point
    tie_mr: bool = True
    cpu_throttle: bool = False
    cold_start_ms: float = 0.0

    def __post_init__(self) -> None:
        counts = tuple(self.func_counts)
        if not counts or any(n < 1 for n in counts):
            raise ValueError("func_counts must be non-empty positive integers")
        if any(a >= b for a, b in zip(counts, counts[1:])):
            raise ValueError("func_counts must be strictly increasing")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.concurrency_cap is not None and self.concurrency_cap < 1:
            raise ValueError("concurrency_cap must be >= 1")
        object.__setattr__(self, "func_counts", counts)


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
class CrossBenchRow:
    num_mappers: int
    num_reducers: int
    avg_map_ms: float
    avg_reduce_ms: float
    avg_map_mem_mb: float
    avg_reduce_mem_mb: float
    map_pct: float
    reduce_pct: float
    wall_clock_ms: float


@dataclass(frozen=True)
class TrendVerdict:
    time_monotone_decreasing: bool
    mem_monotone_decreasing: bool
    diminishing_returns: bool
    details: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "time_monotone_decreasing": self.time_monotone_decreasing,
            "mem_monotone_decreasing": self.mem_monotone_decreasing,
            "diminishing_returns": self.diminishing_returns,
            "details": list(self.details),
        }


@dataclass
class SweepResult:
    rows: list[BenchRow]
    cross_rows: list[CrossBenchRow]
    verdict: TrendVerdict
    samples: dict[tuple[int, int], list[JobMetrics]]


def trend_verdict(rows: list[BenchRow]) -> TrendVerdict:
    """Directional reading of the rows; pure so it can be recomputed from
    the persisted CSV. With fewer than two adjacent pairs the diminishing-
    returns comparison has nothing to compare and reports true."""
    pairs = list(zip(rows, rows[1:]))
    details = tuple(
        {
            "from_func_num": a.func_num,
            "to_func_num": b.func_num,
            "map_ms_delta": a.avg_map_ms - b.avg_map_ms,
            "reduce_ms_delta": a.avg_reduce_ms - b.avg_reduce_ms,
            "map_mem_delta": a.avg_map_mem_mb - b.avg_map_mem_mb,
            "reduce_mem_delta": a.avg_reduce_mem_mb - b.avg_reduce_mem_mb,
        }
        for a, b in pairs
    )
    time_mono = all(
        a.avg_map_ms > b.avg_map_ms and a.avg_reduce_ms > b.avg_reduce_ms for a, b in pairs
    )
    mem_mono = all(
        a.avg_map_mem_mb > b.avg_map_mem_mb and a.avg_reduce_mem_mb > b.avg_reduce_mem_mb
        for a, b in pairs
    )
    if len(pairs) < 2:
        diminishing = True
    else:
        first = pairs[0][0].avg_map_ms - pairs[0][1].avg_map_ms
        last = pairs[-1][0].avg_map_ms - pairs[-1][1].avg_map_ms
        diminishing = first > last
    return TrendVerdict(time_mono, mem_mono, diminishing, details)


def run_sweep(
    config: SweepConfig,
    store: ObjectStore | None = None,
    out_dir: str | os.PathLike[str] | None = None,
) -> SweepResult:
    """Run the whole sweep; optionally persist CSV + verdict to out_dir.

    The store must be fresh: sweep points must not alias keys from
    earlier runs.
    """
    store = store if store is not None else MemoryObjectStore()
    if store.list(JOBS_BUCKET, ""):
        raise ValueError("sweep needs a fresh store (jobs bucket is not empty)")

    runtime = FunctionRuntime(
        store, cold_start_ms=config.cold_start_ms, cpu_throttle=config.cpu_throttle
    )
    register_wordcount(runtime)
    manifest, _total = generate_corpus(config.corpus, store, CORPUS_JOB_ID)
    manifest = tuple(manifest)

    if config.tie_mr:
        points = [(n, n) for n in config.func_counts]
    else:
        points = [(m, r) for m in config.func_counts for r in config.func_counts]

    samples: dict[tuple[int, int], list[JobMetrics]] = {}
    for m, r in points:
        samples[(m, r)] = _run_point(config, runtime, store, manifest, m, r)

    rows: list[BenchRow] = []
    cross_rows: list[CrossBenchRow] = []
    for (m, r), metrics in samples.items():
        agg = _aggregate(metrics)
        if config.tie_mr:
            rows.append(BenchRow(func_num=m, **agg))
        else:
            cross_rows.append(CrossBenchRow(num_mappers=m, num_reducers=r, **agg))

    verdict = trend_verdict(rows) if config.tie_mr else TrendVerdict(True, True, True, ())
    result = SweepResult(rows=rows, cross_rows=cross_rows, verdict=verdict, samples=samples)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if config.tie_mr:
            emit_csv(rows, out / "bench.csv")
        else:
            emit_cross_csv(cross_rows, out / "bench_cross.csv")
        (out / "trend.json").write_text(json.dumps(verdict.to_dict(), indent=2) + "\n")
    return result


def _run_point(
    config: SweepConfig,
    runtime: FunctionRuntime,
    store: ObjectStore,
    manifest: tuple,
    num_mappers: int,
    num_reducers: int,
) -> list[JobMetrics]:
    cap = config.concurrency_cap or max(num_mappers, num_reducers)
    collected: list[JobMetrics] = []
    for rep in range(-1, config.repeats):
        label = "warm" if rep < 0 else f"rep{rep}"
        job_id = f"run-m{num_mappers:03d}-r{num_reducers:03d}-{label}"
        job = JobConfig(
            job_id=job_id,
            num_mappers=num_mappers,
            num_reducers=num_reducers,
            concurrency_cap=cap,
            manifest=manifest,
        )
        try:
            metrics = run_job(job, runtime, store)
        except JobError as exc:
            raise JobFailed(
                f"point (M={num_mappers}, R={num_reducers}) {label}: {exc}"
            ) from exc
        if rep >= 0:
            collected.append(metrics)
    return collected


def _aggregate(metrics: list[JobMetrics]) -> dict:
    avg_map_ms = median(m.avg_map_ms for m in metrics)
    avg_reduce_ms = median(m.avg_reduce_ms for m in metrics)
    map_pct, reduce_pct = compute_workload_pct(avg_map_ms, avg_reduce_ms)
    return {
        "avg_map_ms": avg_map_ms,
        "avg_reduce_ms": avg_reduce_ms,
        "avg_map_mem_mb": median(m.avg_map_mem_mb for m in metrics),
        "avg_reduce_mem_mb": median(m.avg_reduce_mem_mb for m in metrics),
        "map_pct": map_pct,
        "reduce_pct": reduce_pct,
        "wall_clock_ms": median(m.wall_clock_ms for m in metrics),
    }


def emit_csv(rows: list[BenchRow], path: str | os.PathLike[str]) -> None:
    """Write the bench CSV: fixed header, floats at 2 decimal places."""
    if not rows:
        raise ValueError("no rows to emit")
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.func_num},{r.avg_map_ms:.2f},{r.avg_reduce_ms:.2f},"
            f"{r.avg_map_mem_mb:.2f},{r.avg_reduce_mem_mb:.2f},"
            f"{r.map_pct:.2f},{r.reduce_pct:.2f},{r.wall_clock_ms:.2f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def emit_cross_csv(rows: list[CrossBenchRow], path: str | os.PathLike[str]) -> None:
    if not rows:
        raise ValueError("no rows to emit")
    lines = [CROSS_CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.num_mappers},{r.num_reducers},{r.avg_map_ms:.2f},{r.avg_reduce_ms:.2f},"
            f"{r.avg_map_mem_mb:.2f},{r.avg_reduce_mem_mb:.2f},"
            f"{r.map_pct:.2f},{r.reduce_pct:.2f},{r.wall_clock_ms:.2f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_rows(path: str | os.PathLike[str]) -> list[BenchRow]:
    """Parse a bench CSV back into rows, refusing any other schema."""
    text = Path(path).read_text()
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != CSV_HEADER:
        raise SchemaMismatch(f"{path}: expected header {CSV_HEADER!r}")
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != 8:
            raise SchemaMismatch(f"{path}: expected 8 fields, got {len(fields)}: {line!r}")
        try:
            rows.append(BenchRow(int(fields[0]), *(float(f) for f in fields[1:])))
        except ValueError as exc:
            raise SchemaMismatch(f"{path}: {exc}") from exc
    return rows


_TABLE_HEADERS = (
    "Func Num",
    "Mapper Time /ms",
    "Reducer Time /ms",
    "Mapper RAM /MB",
    "Reducer RAM /MB",
)


def render_table(rows: list[BenchRow]) -> str:
    """Fixed-width text table: function count, per-phase time, per-phase
    RAM, all at 2 decimals. Every line renders to the same width."""
    if not rows:
        raise ValueError("no rows to render")
    body = [
        (
            str(r.func_num),
            f"{r.avg_map_ms:.2f}",
            f"{r.avg_reduce_ms:.2f}",
            f"{r.avg_map_mem_mb:.2f}",
            f"{r.avg_reduce_mem_mb:.2f}",
        )
        for r in rows
    ]
    widths = [
        max(len(header), *(len(line[col]) for line in body))
        for col, header in enumerate(_TABLE_HEADERS)
    ]
    lines = ["  ".join(h.rjust(w) for h, w in zip(_TABLE_HEADERS, widths))]
    for line in body:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(line, widths)))
    return "\n".join(lines) + "\n"

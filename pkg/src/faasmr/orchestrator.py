"""Job driver: the local client that triggers functions and collects results.

One job = one map batch, a strict barrier, one reduce batch, then a
client-side merge of the reducer part files into ``out/result.tsv``.
Reducers only ever start after every mapper has succeeded; a failed
phase fails the whole job (retries are a harness policy, not a job one).

Per job the driver leaves two log objects under the job prefix:
``logs/invocations.jsonl`` (one record per invocation) and
``logs/job-metrics.json`` (aggregates plus the config).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from statistics import fmean

from . import mapreduce
from .mapreduce import ReduceTaskParams
from .object_store import ObjectKey, ObjectStore
from .runtime import FunctionRuntime, InvocationRecord, InvocationStatus, records_to_jsonl
from .wordcount import MAP_FUNCTION, REDUCE_FUNCTION


class JobError(Exception):
    pass


class MapPhaseFailed(JobError):
    pass


class ReducePhaseFailed(JobError):
    pass


class DegenerateJob(JobError):
    """Both phase averages are zero; workload shares are undefined."""


def compute_workload_pct(avg_map_ms: float, avg_reduce_ms: float) -> tuple[float, float]:
    """Each phase's share of the summed per-phase average times, in
    percent rounded to 2 decimals.

    This is the simplest split consistent with a two-way usage-time
    ratio; it is a definition of this harness, and reports carry a note
    saying so.
    """
    if avg_map_ms < 0 or avg_reduce_ms < 0:
        raise ValueError("phase averages must be non-negative")
    total = avg_map_ms + avg_reduce_ms
    if total == 0:
        raise DegenerateJob("both phase averages are zero")
    return round(100.0 * avg_map_ms / total, 2), round(100.0 * avg_reduce_ms / total, 2)


@dataclass(frozen=True)
class JobConfig:
    job_id: str
    num_mappers: int
    num_reducers: int
    concurrency_cap: int
    manifest: tuple[ObjectKey, ...]
    cleanup_intermediates: bool = False

    def __post_init__(self) -> None:
        if self.num_mappers < 1 or self.num_reducers < 1:
            raise ValueError("num_mappers and num_reducers must be >= 1")
        if self.concurrency_cap < 1:
            raise ValueError("concurrency_cap must be >= 1")
        if not self.job_id:
            raise ValueError("job_id must be non-empty")

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "num_mappers": self.num_mappers,
            "num_reducers": self.num_reducers,
            "concurrency_cap": self.concurrency_cap,
            "manifest": [key.key for key in self.manifest],
            "cleanup_intermediates": self.cleanup_intermediates,
        }


@dataclass
class JobMetrics:
    job_id: str
    map_records: list[InvocationRecord]
    reduce_records: list[InvocationRecord]
    avg_map_ms: float
    avg_reduce_ms: float
    avg_map_mem_mb: float
    avg_reduce_mem_mb: float
    map_pct: float
    reduce_pct: float
    wall_clock_ms: float
    config: JobConfig = field(repr=False, default=None)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "config": self.config.to_dict() if self.config else None,
            "avg_map_ms": self.avg_map_ms,
            "avg_reduce_ms": self.avg_reduce_ms,
            "avg_map_mem_mb": self.avg_map_mem_mb,
            "avg_reduce_mem_mb": self.avg_reduce_mem_mb,
            "map_pct": self.map_pct,
            "reduce_pct": self.reduce_pct,
            "wall_clock_ms": self.wall_clock_ms,
            "map_invocations": [r.to_log_dict() for r in self.map_records],
            "reduce_invocations": [r.to_log_dict() for r in self.reduce_records],
        }


def _log_key(job_id: str) -> ObjectKey:
    return ObjectKey(mapreduce.JOBS_BUCKET, f"{job_id}/logs/invocations.jsonl")


def _metrics_key(job_id: str) -> ObjectKey:
    return ObjectKey(mapreduce.JOBS_BUCKET, f"{job_id}/logs/job-metrics.json")


def _failures(records: list[InvocationRecord]) -> list[str]:
    return [
        f"{r.function_name}[{r.invocation_id}]: {r.status.value}"
        + (f" ({r.error})" if r.error else "")
        for r in records
        if r.status is not InvocationStatus.SUCCEEDED
    ]


def run_job(config: JobConfig, runtime: FunctionRuntime, store: ObjectStore) -> JobMetrics:
    """Execute one full job and return its metrics.

    Raises MapPhaseFailed / ReducePhaseFailed if any invocation of the
    phase did not succeed; the invocation log is still written so the
    failure can be inspected.
    """
    t0 = time.perf_counter()

    map_tasks = mapreduce.plan_map_tasks(
        config.manifest, config.num_mappers, config.num_reducers, config.job_id
    )
    map_records = runtime.invoke_batch(
        [(MAP_FUNCTION, task) for task in map_tasks], config.concurrency_cap
    )
    map_failures = _failures(map_records)
    if map_failures:
        store.put(_log_key(config.job_id), records_to_jsonl(map_records))
        raise MapPhaseFailed("; ".join(map_failures))

    reduce_tasks = [
        ReduceTaskParams(r, config.num_mappers, config.job_id)
        for r in range(config.num_reducers)
    ]
    reduce_records = runtime.invoke_batch(
        [(REDUCE_FUNCTION, task) for task in reduce_tasks], config.concurrency_cap
    )
    reduce_failures = _failures(reduce_records)
    if reduce_failures:
        store.put(_log_key(config.job_id), records_to_jsonl(map_records + reduce_records))
        raise ReducePhaseFailed("; ".join(reduce_failures))

    _merge_parts(config, store)

    if config.cleanup_intermediates:
        store.delete_prefix(mapreduce.JOBS_BUCKET, f"{config.job_id}/int/")

    wall_ms = (time.perf_counter() - t0) * 1000.0

    avg_map_ms = fmean(r.exec_time_ms for r in map_records)
    avg_reduce_ms = fmean(r.exec_time_ms for r in reduce_records)
    map_pct, reduce_pct = compute_workload_pct(avg_map_ms, avg_reduce_ms)
    metrics = JobMetrics(
        job_id=config.job_id,
        map_records=map_records,
        reduce_records=reduce_records,
        avg_map_ms=avg_map_ms,
        avg_reduce_ms=avg_reduce_ms,
        avg_map_mem_mb=fmean(r.peak_modeled_mem_mb for r in map_records),
        avg_reduce_mem_mb=fmean(r.peak_modeled_mem_mb for r in reduce_records),
        map_pct=map_pct,
        reduce_pct=reduce_pct,
        wall_clock_ms=wall_ms,
        config=config,
    )

    store.put(_log_key(config.job_id), records_to_jsonl(map_records + reduce_records))
    store.put(
        _metrics_key(config.job_id),
        json.dumps(metrics.to_dict(), sort_keys=True, indent=2).encode(),
    )
    return metrics


def _merge_parts(config: JobConfig, store: ObjectStore) -> None:
    """Concatenate the reducer part files and re-sort globally by word.

    Hash partitioning interleaves word ranges across parts, so plain
    concatenation would not be sorted.
    """
    entries: list[mapreduce.KeyCount] = []
    for r in range(config.num_reducers):
        entries.extend(mapreduce.read_counts(mapreduce.output_part_key(config.job_id, r), store))
    entries.sort(key=lambda entry: entry[0].encode("utf-8"))
    store.put(mapreduce.result_key(config.job_id), mapreduce.format_counts(entries))

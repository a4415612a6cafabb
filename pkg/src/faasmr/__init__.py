"""Serverless-MapReduce word counting on a local FaaS emulator.

The pieces mirror the architecture they emulate: an object store all
data flows through, a function runtime that invokes metered handlers, a
MapReduce core whose shuffle lives entirely in the store, the word-count
workload, an orchestrating client, and a benchmark harness that sweeps
function counts.
"""

from .bench import (
    BenchRow,
    CrossBenchRow,
    SweepConfig,
    SweepResult,
    TrendVerdict,
    emit_csv,
    load_rows,
    render_table,
    run_sweep,
    trend_verdict,
)
from .corpus import CorpusSpec, generate_corpus, splitmix64
from .mapreduce import (
    MapTaskParams,
    ReduceTaskParams,
    fnv1a64,
    partition_of,
    plan_map_tasks,
    read_counts,
    run_map_task,
    run_reduce_task,
)
from .object_store import (
    FilesystemObjectStore,
    InvalidKey,
    MemoryObjectStore,
    ObjectKey,
    ObjectNotFound,
    ObjectStore,
)
from .orchestrator import JobConfig, JobMetrics, compute_workload_pct, run_job
from .runtime import (
    FunctionRuntime,
    FunctionSpec,
    InvocationRecord,
    InvocationStatus,
    MemoryMeter,
)
from .wordcount import register_wordcount, token_counts, tokenize

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "CorpusSpec",
    "CrossBenchRow",
    "FilesystemObjectStore",
    "FunctionRuntime",
    "FunctionSpec",
    "InvalidKey",
    "InvocationRecord",
    "InvocationStatus",
    "JobConfig",
    "JobMetrics",
    "MapTaskParams",
    "MemoryMeter",
    "MemoryObjectStore",
    "ObjectKey",
    "ObjectNotFound",
    "ObjectStore",
    "ReduceTaskParams",
    "SweepConfig",
    "SweepResult",
    "TrendVerdict",
    "compute_workload_pct",
    "emit_csv",
    "fnv1a64",
    "generate_corpus",
    "load_rows",
    "partition_of",
    "plan_map_tasks",
    "read_counts",
    "render_table",
    "run_job",
    "run_map_task",
    "run_reduce_task",
    "run_sweep",
    "splitmix64",
    "token_counts",
    "tokenize",
    "trend_verdict",
]

"""Command line surface: gen, run, bench, report.

Exit codes: 0 success, 1 job or sweep failure, 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import mapreduce
from .bench import SchemaMismatch, SweepConfig, load_rows, render_table, run_sweep
from .corpus import CorpusSpec, generate_corpus
from .object_store import FilesystemObjectStore, MemoryObjectStore, ObjectNotFound
from .orchestrator import JobConfig, JobError, run_job
from .runtime import FunctionRuntime
from .wordcount import register_wordcount

RUN_JOB_ID = "run"


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _func_counts(text: str) -> tuple[int, ...]:
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not counts or any(n < 1 for n in counts):
        raise argparse.ArgumentTypeError("counts must be positive integers")
    if any(a >= b for a, b in zip(counts, counts[1:])):
        raise argparse.ArgumentTypeError("counts must be strictly increasing")
    return counts


def _add_corpus_args(parser: argparse.ArgumentParser, files: int, words: int) -> None:
    parser.add_argument("--files", type=_positive_int, default=files)
    parser.add_argument("--words-per-file", type=_positive_int, default=words)
    parser.add_argument("--vocab", type=_positive_int, default=10_000)
    parser.add_argument("--zipf", type=_non_negative_float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--line-width", type=_positive_int, default=16)


def _corpus_spec(args: argparse.Namespace, skew: float = 1.0) -> CorpusSpec:
    return CorpusSpec(
        num_files=args.files,
        words_per_file=args.words_per_file,
        vocab_size=args.vocab,
        zipf_s=args.zipf,
        seed=args.seed & ((1 << 64) - 1),
        line_width=args.line_width,
        skew=skew,
    )


def _make_store(kind: str, out: Path):
    if kind == "fs":
        return FilesystemObjectStore(out / "store")
    return MemoryObjectStore()


def _export(store, key, path: Path) -> None:
    try:
        path.write_bytes(store.get(key))
    except ObjectNotFound:
        pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faasmr",
        description="Serverless-MapReduce word counting with a scaling benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a corpus into a filesystem store")
    _add_corpus_args(gen, files=50, words=50_000)
    gen.add_argument("--skew", type=_non_negative_float, default=1.0)
    gen.add_argument("--job-id", default="corpus")
    gen.add_argument("--out", required=True, type=Path)

    run = sub.add_parser("run", help="run one word-count job over a generated corpus")
    run.add_argument("--mappers", type=_positive_int, required=True)
    run.add_argument("--reducers", type=_positive_int, required=True)
    _add_corpus_args(run, files=10, words=10_000)
    run.add_argument("--store", choices=("mem", "fs"), default="mem")
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--cleanup", action="store_true", help="delete intermediates after the job")
    run.add_argument("--concurrency", type=_positive_int, default=None)
    run.add_argument("--timeout-ms", type=_positive_int, default=600_000)
    run.add_argument("--cpu-throttle", action="store_true")
    run.add_argument("--cold-start", type=_non_negative_float, default=0.0, metavar="MS")

    bench = sub.add_parser("bench", help="sweep function counts and emit the bench CSV")
    bench.add_argument("--func-counts", type=_func_counts, default=(1, 2, 5, 10))
    bench.add_argument("--repeats", type=_positive_int, default=3)
    _add_corpus_args(bench, files=50, words=50_000)
    bench.add_argument("--store", choices=("mem", "fs"), default="mem")
    bench.add_argument("--out", required=True, type=Path)
    bench.add_argument("--cross", action="store_true", help="sweep mappers x reducers independently")
    bench.add_argument("--cpu-throttle", action="store_true")
    bench.add_argument("--cold-start", type=_non_negative_float, default=0.0, metavar="MS")
    bench.add_argument("--concurrency", type=_positive_int, default=None)

    report = sub.add_parser("report", help="render the table and trend verdict from a bench CSV")
    report.add_argument("--in", dest="in_dir", required=True, type=Path)

    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    store = FilesystemObjectStore(args.out)
    spec = _corpus_spec(args, skew=args.skew)
    manifest, total = generate_corpus(spec, store, args.job_id)
    print(f"wrote {len(manifest)} files ({total} words) under {args.out}/jobs/{args.job_id}/in/")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    store = _make_store(args.store, args.out)
    runtime = FunctionRuntime(store, cold_start_ms=args.cold_start, cpu_throttle=args.cpu_throttle)
    register_wordcount(runtime, timeout_ms=args.timeout_ms)
    manifest, total = generate_corpus(_corpus_spec(args), store, RUN_JOB_ID)

    config = JobConfig(
        job_id=RUN_JOB_ID,
        num_mappers=args.mappers,
        num_reducers=args.reducers,
        concurrency_cap=args.concurrency or max(args.mappers, args.reducers),
        manifest=tuple(manifest),
        cleanup_intermediates=args.cleanup,
    )
    try:
        metrics = run_job(config, runtime, store)
    except JobError as exc:
        _export(store, mapreduce.ObjectKey(mapreduce.JOBS_BUCKET, f"{RUN_JOB_ID}/logs/invocations.jsonl"),
                args.out / "invocations.jsonl")
        print(f"job failed: {exc}", file=sys.stderr)
        return 1

    _export(store, mapreduce.result_key(RUN_JOB_ID), args.out / "result.tsv")
    _export(store, mapreduce.ObjectKey(mapreduce.JOBS_BUCKET, f"{RUN_JOB_ID}/logs/invocations.jsonl"),
            args.out / "invocations.jsonl")
    _export(store, mapreduce.ObjectKey(mapreduce.JOBS_BUCKET, f"{RUN_JOB_ID}/logs/job-metrics.json"),
            args.out / "job-metrics.json")
    print(
        f"job ok: {total} words, M={args.mappers} R={args.reducers}, "
        f"map {metrics.avg_map_ms:.2f} ms, reduce {metrics.avg_reduce_ms:.2f} ms, "
        f"wall {metrics.wall_clock_ms:.2f} ms"
    )
    print(f"result: {args.out / 'result.tsv'}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    store = _make_store(args.store, args.out)
    config = SweepConfig(
        func_counts=args.func_counts,
        corpus=_corpus_spec(args),
        repeats=args.repeats,
        concurrency_cap=args.concurrency,
        tie_mr=not args.cross,
        cpu_throttle=args.cpu_throttle,
        cold_start_ms=args.cold_start,
    )
    try:
        result = run_sweep(config, store=store, out_dir=args.out)
    except bench_mod.JobFailed as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return 1

    if result.rows:
        print(render_table(result.rows), end="")
        _print_verdict(result.verdict)
    else:
        print(f"wrote {args.out / 'bench_cross.csv'} ({len(result.cross_rows)} points)")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    csv_path = args.in_dir / "bench.csv"
    try:
        rows = load_rows(csv_path)
    except (OSError, SchemaMismatch) as exc:
        print(f"cannot read bench CSV: {exc}", file=sys.stderr)
        return 2
    print(render_table(rows), end="")
    _print_verdict(bench_mod.trend_verdict(rows))
    return 0


def _print_verdict(verdict) -> None:
    print()
    print(f"execution time strictly decreasing: {verdict.time_monotone_decreasing}")
    print(f"memory usage strictly decreasing:   {verdict.mem_monotone_decreasing}")
    print(f"diminishing returns (map time):     {verdict.diminishing_returns}")
    print(f"note: {bench_mod.WORKLOAD_PCT_NOTE}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "run": _cmd_run,
        "bench": _cmd_bench,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

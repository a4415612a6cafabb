"""Job driver tests: phases, barrier, merge, metrics, failure policy."""

import json
import time
from statistics import fmean

import pytest

from faasmr.corpus import CorpusSpec, generate_corpus
from faasmr.mapreduce import (
    JOBS_BUCKET,
    input_key,
    result_key,
    run_map_task,
)
from faasmr.object_store import MemoryObjectStore, ObjectKey
from faasmr.orchestrator import (
    DegenerateJob,
    JobConfig,
    MapPhaseFailed,
    ReducePhaseFailed,
    compute_workload_pct,
    run_job,
)
from faasmr.runtime import FunctionRuntime, FunctionSpec
from faasmr.wordcount import register_wordcount, token_counts, wc_reduce_handler


def _plain_map_handler(params, store, meter):
    return json.dumps(run_map_task(params, token_counts, store, meter)).encode()


def setup_job(files, num_mappers, num_reducers, job_id="j", **runtime_kwargs):
    store = MemoryObjectStore()
    runtime = FunctionRuntime(store, **runtime_kwargs)
    register_wordcount(runtime)
    manifest = []
    for i, body in enumerate(files):
        key = input_key(job_id, i)
        store.put(key, body)
        manifest.append(key)
    config = JobConfig(
        job_id, num_mappers, num_reducers, max(num_mappers, num_reducers), tuple(manifest)
    )
    return store, runtime, config


class TestRunJob:
    def test_minimal_job(self):
        store, runtime, config = setup_job([b"a b a"], 1, 1)
        metrics = run_job(config, runtime, store)
        assert store.get(result_key("j")) == b"a\t2\nb\t1\n"
        assert len(metrics.map_records) == 1
        assert len(metrics.reduce_records) == 1

    def test_record_counts_match_config(self):
        store, runtime, config = setup_job([b"a b c d e f"] * 4, 3, 4)
        metrics = run_job(config, runtime, store)
        assert len(metrics.map_records) == 3
        assert len(metrics.reduce_records) == 4

    def test_averages_are_arithmetic_means(self):
        store, runtime, config = setup_job([b"x y z"] * 5, 2, 3)
        metrics = run_job(config, runtime, store)
        assert metrics.avg_map_ms == fmean(r.exec_time_ms for r in metrics.map_records)
        assert metrics.avg_reduce_ms == fmean(r.exec_time_ms for r in metrics.reduce_records)
        assert metrics.avg_map_mem_mb == fmean(
            r.peak_modeled_mem_mb for r in metrics.map_records
        )

    def test_phase_barrier_in_timestamps(self):
        store, runtime, config = setup_job([b"p q r s"] * 6, 3, 3)
        metrics = run_job(config, runtime, store)
        latest_map_end = max(r.ended_at for r in metrics.map_records)
        earliest_reduce_start = min(r.started_at for r in metrics.reduce_records)
        assert earliest_reduce_start >= latest_map_end

    def test_result_identical_across_configs(self):
        spec = CorpusSpec(num_files=5, words_per_file=400, vocab_size=80, seed=21)
        results = set()
        for m, r in [(1, 1), (2, 5), (5, 2), (4, 4)]:
            store = MemoryObjectStore()
            runtime = FunctionRuntime(store)
            register_wordcount(runtime)
            manifest, _ = generate_corpus(spec, store, "j")
            config = JobConfig("j", m, r, max(m, r), tuple(manifest))
            run_job(config, runtime, store)
            results.add(store.get(result_key("j")))
        assert len(results) == 1

    def test_cleanup_intermediates(self):
        store, runtime, config = setup_job([b"a b"], 2, 2)
        config = JobConfig(
            config.job_id, 2, 2, 2, config.manifest, cleanup_intermediates=True
        )
        run_job(config, runtime, store)
        assert store.list(JOBS_BUCKET, "j/int/") == []
        assert store.get(result_key("j")) == b"a\t1\nb\t1\n"

    def test_logs_written_with_all_records(self):
        store, runtime, config = setup_job([b"m n"] * 3, 2, 2)
        run_job(config, runtime, store)
        log = store.get(ObjectKey(JOBS_BUCKET, "j/logs/invocations.jsonl"))
        entries = [json.loads(line) for line in log.decode().splitlines()]
        assert len(entries) == 4
        assert {e["kind"] for e in entries} == {"mapper", "reducer"}
        metrics_doc = json.loads(store.get(ObjectKey(JOBS_BUCKET, "j/logs/job-metrics.json")))
        assert metrics_doc["config"]["num_mappers"] == 2
        assert metrics_doc["map_pct"] + metrics_doc["reduce_pct"] == pytest.approx(100, abs=0.011)


class TestFailurePolicy:
    def register_faulty_pair(self, runtime, sleep_index):
        """wc-map that stalls past its timeout only for one mapper index."""

        def faulty_map(params, store, meter):
            if params.index == sleep_index:
                time.sleep(0.08)
                meter.checkpoint()
            payload = run_map_task(params, token_counts, store, meter)
            return json.dumps(payload).encode()

        runtime.register(FunctionSpec("wc-map", "mapper", timeout_ms=40), faulty_map)
        runtime.register(FunctionSpec("wc-reduce", "reducer"), wc_reduce_handler)

    def test_single_mapper_timeout_fails_map_phase(self):
        store = MemoryObjectStore()
        runtime = FunctionRuntime(store)
        self.register_faulty_pair(runtime, sleep_index=1)
        manifest = []
        for i in range(3):
            key = input_key("j", i)
            store.put(key, b"some words here")
            manifest.append(key)
        config = JobConfig("j", 3, 2, 3, tuple(manifest))
        with pytest.raises(MapPhaseFailed) as excinfo:
            run_job(config, runtime, store)
        assert "Timeout" in str(excinfo.value)

        log = store.get(ObjectKey(JOBS_BUCKET, "j/logs/invocations.jsonl"))
        entries = [json.loads(line) for line in log.decode().splitlines()]
        assert len(entries) == 3  # mappers only
        assert all(e["kind"] == "mapper" for e in entries)
        assert store.list(JOBS_BUCKET, "j/out/") == []

    def test_reduce_phase_failure_detected(self):
        def broken_reduce(params, store, meter):
            if params.reducer_index == 1:
                raise RuntimeError("disk melted")
            return wc_reduce_handler(params, store, meter)

        store = MemoryObjectStore()
        runtime = FunctionRuntime(store)
        runtime.register(FunctionSpec("wc-map", "mapper"), _plain_map_handler)
        runtime.register(FunctionSpec("wc-reduce", "reducer"), broken_reduce)
        key = input_key("j", 0)
        store.put(key, b"a b c")
        config = JobConfig("j", 1, 2, 2, (key,))
        with pytest.raises(ReducePhaseFailed) as excinfo:
            run_job(config, runtime, store)
        assert "disk melted" in str(excinfo.value)
        log = store.get(ObjectKey(JOBS_BUCKET, "j/logs/invocations.jsonl"))
        entries = [json.loads(line) for line in log.decode().splitlines()]
        assert sum(e["kind"] == "reducer" for e in entries) == 2
        assert store.list(JOBS_BUCKET, "j/out/result.tsv") == []


class TestWorkloadPct:
    def test_table_row_split(self):
        assert compute_workload_pct(40816.58, 51624.64) == (44.15, 55.85)

    def test_symmetry(self):
        assert compute_workload_pct(123.4, 123.4) == (50.0, 50.0)

    def test_one_sided(self):
        assert compute_workload_pct(99.0, 0.0) == (100.0, 0.0)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateJob):
            compute_workload_pct(0.0, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            compute_workload_pct(-1.0, 5.0)

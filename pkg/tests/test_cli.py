"""CLI surface tests: subcommands, artifacts, exit codes (0/1/2)."""

import json
import re
import subprocess
import sys
from collections import Counter

import pytest

from faasmr.cli import main


def test_gen_writes_corpus_and_manifest(tmp_path):
    out = tmp_path / "corpus"
    code = main([
        "gen", "--files", "3", "--words-per-file", "50", "--vocab", "20",
        "--seed", "4", "--out", str(out),
    ])
    assert code == 0
    assert (out / "jobs" / "corpus" / "in" / "f00000.txt").exists()
    manifest = (out / "jobs" / "corpus" / "manifest.txt").read_text().splitlines()
    assert manifest == [f"corpus/in/f{i:05d}.txt" for i in range(3)]


def test_run_produces_expected_result(tmp_path):
    out = tmp_path / "job"
    code = main([
        "run", "--mappers", "2", "--reducers", "2", "--files", "3",
        "--words-per-file", "200", "--vocab", "30", "--seed", "8",
        "--store", "fs", "--out", str(out),
    ])
    assert code == 0
    result = (out / "result.tsv").read_text()

    counts = Counter()
    for i in range(3):
        body = (out / "store" / "jobs" / "run" / "in" / f"f{i:05d}.txt").read_text()
        counts.update(t.lower() for t in re.findall(r"[^\W_]+", body))
    expected = "".join(
        f"{w}\t{c}\n" for w, c in sorted(counts.items(), key=lambda e: e[0].encode())
    )
    assert result == expected
    assert (out / "job-metrics.json").exists()
    assert (out / "invocations.jsonl").exists()


def test_run_with_cleanup_removes_intermediates(tmp_path):
    out = tmp_path / "job"
    code = main([
        "run", "--mappers", "2", "--reducers", "2", "--files", "2",
        "--words-per-file", "100", "--vocab", "10", "--seed", "1",
        "--store", "fs", "--out", str(out), "--cleanup",
    ])
    assert code == 0
    assert not (out / "store" / "jobs" / "run" / "int").exists()


def test_forced_timeout_exits_nonzero_and_skips_reducers(tmp_path, capsys):
    out = tmp_path / "job"
    code = main([
        "run", "--mappers", "2", "--reducers", "2", "--files", "2",
        "--words-per-file", "30000", "--vocab", "500", "--seed", "2",
        "--out", str(out), "--timeout-ms", "1",
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "Timeout" in err
    entries = [
        json.loads(line)
        for line in (out / "invocations.jsonl").read_text().splitlines()
    ]
    assert entries and all(e["kind"] == "mapper" for e in entries)
    assert not (out / "result.tsv").exists()


def test_bench_then_report_roundtrip(tmp_path, capsys):
    out = tmp_path / "bench"
    code = main([
        "bench", "--func-counts", "1,2", "--repeats", "1", "--files", "4",
        "--words-per-file", "400", "--vocab", "50", "--seed", "6",
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "bench.csv").exists()
    assert (out / "trend.json").exists()
    capsys.readouterr()

    assert main(["report", "--in", str(out)]) == 0
    shown = capsys.readouterr().out
    assert "Func Num" in shown
    assert "workload %" in shown


def test_report_missing_csv_exits_two(tmp_path):
    assert main(["report", "--in", str(tmp_path)]) == 2


def test_report_schema_mismatch_exits_two(tmp_path):
    (tmp_path / "bench.csv").write_text("wrong,header\n1,2\n")
    assert main(["report", "--in", str(tmp_path)]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--mappers", "0", "--reducers", "1", "--out", "x"],
        ["bench", "--func-counts", "2,1", "--out", "x"],
        ["bench", "--func-counts", "0", "--out", "x"],
        ["gen", "--files", "-3", "--out", "x"],
        ["frobnicate"],
    ],
)
def test_invalid_arguments_exit_two(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


def test_console_script_exit_codes(tmp_path):
    ok = subprocess.run(
        [sys.executable, "-m", "faasmr.cli", "run", "--mappers", "1", "--reducers", "1",
         "--files", "2", "--words-per-file", "50", "--vocab", "10", "--seed", "1",
         "--out", str(tmp_path / "a")],
        capture_output=True, text=True,
    )
    assert ok.returncode == 0, ok.stderr

    failed = subprocess.run(
        [sys.executable, "-m", "faasmr.cli", "run", "--mappers", "1", "--reducers", "1",
         "--files", "2", "--words-per-file", "30000", "--vocab", "500", "--seed", "1",
         "--out", str(tmp_path / "b"), "--timeout-ms", "1"],
        capture_output=True, text=True,
    )
    assert failed.returncode == 1

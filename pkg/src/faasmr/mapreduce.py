"""MapReduce data path: task planning, partitioning, shuffle files, merge.

Mappers and reducers never talk to each other directly; every byte of
intermediate data goes through the object store. A mapper combines its
counts locally, splits them into one sorted partition per reducer, and
writes each partition to a canonical key. A reducer reads its partition
from every mapper and merges by summing.

Canonical keys inside the ``jobs`` bucket:

    input:        ``<job_id>/in/f<NNNNN>.txt``
    intermediate: ``<job_id>/int/m<m>/p<r>.tsv``
    output:       ``<job_id>/out/part-<r>.tsv`` and ``<job_id>/out/result.tsv``

The partition hash is FNV-1a (64 bit) over the word's UTF-8 bytes, so
any implementation on any host routes a given word identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .object_store import ObjectKey, ObjectNotFound, ObjectStore
from .runtime import MemoryMeter

JOBS_BUCKET = "jobs"

FNV_OFFSET_BASIS = 14695981039346656037
FNV_PRIME = 1099511628211
_U64_MASK = (1 << 64) - 1

# Modeled per-entry overhead of an in-memory count table, on top of the
# word's own bytes (hash cell, count, bookkeeping).
TABLE_ENTRY_OVERHEAD_BYTES = 16

KeyCount = tuple[str, int]


class MapReduceError(Exception):
    pass


class EmptyManifest(MapReduceError):
    pass


class MissingPartition(MapReduceError):
    """An expected intermediate object is absent: a mapper failure leaked
    past the phase barrier."""


class CountParseError(MapReduceError):
    """An intermediate or output file does not parse as word TAB count."""


# --- canonical keys -------------------------------------------------------

def input_key(job_id: str, index: int) -> ObjectKey:
    return ObjectKey(JOBS_BUCKET, f"{job_id}/in/f{index:05d}.txt")


def manifest_key(job_id: str) -> ObjectKey:
    return ObjectKey(JOBS_BUCKET, f"{job_id}/manifest.txt")


def intermediate_key(job_id: str, mapper_index: int, reducer_index: int) -> ObjectKey:
    return ObjectKey(JOBS_BUCKET, f"{job_id}/int/m{mapper_index}/p{reducer_index}.tsv")


def output_part_key(job_id: str, reducer_index: int) -> ObjectKey:
    return ObjectKey(JOBS_BUCKET, f"{job_id}/out/part-{reducer_index}.tsv")


def result_key(job_id: str) -> ObjectKey:
    return ObjectKey(JOBS_BUCKET, f"{job_id}/out/result.tsv")


# --- partitioning ---------------------------------------------------------

def fnv1a64(data: bytes) -> int:
    """FNV-1a hash of ``data``, 64-bit wrapping arithmetic."""
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _U64_MASK
    return h


def partition_of(word: str, num_reducers: int) -> int:
    """Reducer index a word routes to; stable across runs and hosts."""
    if num_reducers < 1:
        raise ValueError("num_reducers must be >= 1")
    if not word:
        raise ValueError("word must be non-empty")
    return fnv1a64(word.encode("utf-8")) % num_reducers


def _partition_indices(encoded: list[bytes], num_reducers: int) -> list[int]:
    """Vectorized FNV-1a mod num_reducers over many words at once.

    Matches partition_of word for word. Words holding NUL bytes cannot
    ride in numpy's fixed-width byte rows, so those fall back to the
    scalar hash (tokens never contain NUL; this is belt and braces).
    """
    if not encoded:
        return []
    if any(b"\x00" in w for w in encoded):
        return [fnv1a64(w) % num_reducers for w in encoded]
    arr = np.array(encoded, dtype=np.bytes_)
    width = arr.dtype.itemsize
    mat = arr.view(np.uint8).reshape(len(encoded), width)
    lengths = np.array([len(w) for w in encoded], dtype=np.int64)
    h = np.full(len(encoded), FNV_OFFSET_BASIS, dtype=np.uint64)
    prime = np.uint64(FNV_PRIME)
    for col in range(width):
        active = lengths > col
        if not active.any():
            break
        h[active] = (h[active] ^ mat[active, col].astype(np.uint64)) * prime
    return (h % np.uint64(num_reducers)).astype(np.int64).tolist()


# --- task parameters ------------------------------------------------------

@dataclass(frozen=True)
class MapTaskParams:
    """One mapper's share of the job, expressed as the full input manifest
    plus this mapper's ordinal: the mapper owns every file whose manifest
    position is congruent to its index modulo the mapper count."""

    file_ids: tuple[ObjectKey, ...]
    num_files: int
    index: int
    num_mappers: int
    num_reducers: int
    job_id: str

    def assigned_files(self) -> list[ObjectKey]:
        return [self.file_ids[k] for k in range(self.num_files) if k % self.num_mappers == self.index]


@dataclass(frozen=True)
class ReduceTaskParams:
    reducer_index: int
    num_mappers: int
    job_id: str


def plan_map_tasks(
    manifest: Iterable[ObjectKey],
    num_mappers: int,
    num_reducers: int,
    job_id: str,
) -> list[MapTaskParams]:
    """Split the manifest across mappers so every file is owned exactly once.

    More mappers than files is fine; the extra mappers simply own nothing.
    """
    files = tuple(manifest)
    if not files:
        raise EmptyManifest("manifest has no input files")
    if num_mappers < 1 or num_reducers < 1:
        raise ValueError("num_mappers and num_reducers must be >= 1")
    if len(set(files)) != len(files):
        raise ValueError("manifest keys must be distinct")
    return [
        MapTaskParams(
            file_ids=files,
            num_files=len(files),
            index=i,
            num_mappers=num_mappers,
            num_reducers=num_reducers,
            job_id=job_id,
        )
        for i in range(num_mappers)
    ]


# --- count file format ----------------------------------------------------

def format_counts(entries: Iterable[KeyCount]) -> bytes:
    """Serialize entries as ``word<TAB>count`` lines, one per entry."""
    parts = []
    for word, count in entries:
        if not word or "\t" in word or "\n" in word:
            raise ValueError(f"unwritable word: {word!r}")
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count} for {word!r}")
        parts.append(f"{word}\t{count}\n")
    return "".join(parts).encode("utf-8")


def parse_counts(data: bytes) -> list[KeyCount]:
    """Inverse of format_counts; raises CountParseError on any bad line."""
    entries: list[KeyCount] = []
    if not data:
        return entries
    for lineno, line in enumerate(data.split(b"\n")[:-1], start=1):
        word_bytes, sep, count_bytes = line.partition(b"\t")
        if not sep or not word_bytes:
            raise CountParseError(f"line {lineno}: expected word<TAB>count, got {line!r}")
        try:
            word = word_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CountParseError(f"line {lineno}: {exc}") from exc
        if not count_bytes.isdigit():
            raise CountParseError(f"line {lineno}: bad count {count_bytes!r}")
        count = int(count_bytes)
        if count < 1:
            raise CountParseError(f"line {lineno}: count must be >= 1, got {count}")
        entries.append((word, count))
    if not data.endswith(b"\n"):
        raise CountParseError("missing trailing newline")
    return entries


def read_counts(key: ObjectKey, store: ObjectStore) -> list[KeyCount]:
    return parse_counts(store.get(key))


class _ScalarPathRequired(Exception):
    """Payload cannot ride in fixed-width byte rows (NUL bytes, or counts
    too wide for int64); the caller must merge it the scalar way."""


def _parse_counts_arrays(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized strict parse: (word bytes array, int64 count array).

    Accepts and rejects exactly what parse_counts does on the payloads it
    supports; raises _ScalarPathRequired for the rest.
    """
    if not data:
        return np.empty(0, dtype="S1"), np.empty(0, dtype=np.int64)
    if b"\x00" in data:
        raise _ScalarPathRequired
    arr = np.frombuffer(data, dtype=np.uint8)
    if arr[-1] != 10:
        raise CountParseError("missing trailing newline")
    try:
        data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CountParseError(str(exc)) from exc

    line_ends = np.flatnonzero(arr == 10)
    line_starts = np.empty_like(line_ends)
    line_starts[0] = 0
    line_starts[1:] = line_ends[:-1] + 1
    tabs = np.flatnonzero(arr == 9)
    # exactly one tab per line, in line order
    if tabs.size != line_ends.size or not np.array_equal(
        np.searchsorted(line_ends, tabs), np.arange(line_ends.size)
    ):
        raise CountParseError("expected exactly one word<TAB>count per line")

    word_lengths = tabs - line_starts
    count_starts = tabs + 1
    count_lengths = line_ends - count_starts
    if (word_lengths < 1).any() or (count_lengths < 1).any():
        raise CountParseError("empty word or count field")

    is_digit = (arr >= 48) & (arr <= 57)
    digit_cumsum = np.concatenate(([0], np.cumsum(is_digit, dtype=np.int64)))
    if not np.array_equal(
        digit_cumsum[line_ends] - digit_cumsum[count_starts], count_lengths
    ):
        raise CountParseError("counts must be decimal digits")
    if int(count_lengths.max()) > 18:  # keep the digit fold inside int64
        raise _ScalarPathRequired

    counts = np.zeros(line_ends.size, dtype=np.int64)
    digit_width = int(count_lengths.max())
    gather = count_starts[:, None] + np.arange(digit_width)[None, :]
    np.minimum(gather, arr.size - 1, out=gather)
    digits = (arr[gather].astype(np.int64) - 48)
    for col in range(digit_width):
        active = count_lengths > col
        counts[active] = counts[active] * 10 + digits[active, col]
    if (counts < 1).any():
        raise CountParseError("count must be >= 1")

    word_width = int(word_lengths.max())
    gather = line_starts[:, None] + np.arange(word_width)[None, :]
    np.minimum(gather, arr.size - 1, out=gather)
    rows = np.where(np.arange(word_width)[None, :] < word_lengths[:, None], arr[gather], 0)
    words = np.ascontiguousarray(rows.astype(np.uint8)).view(f"S{word_width}").ravel()
    return words, counts


def _sorted_by_bytes(words: Iterable[str]) -> list[str]:
    return sorted(words, key=lambda w: w.encode("utf-8"))


# --- tasks ----------------------------------------------------------------

CountExtractor = Callable[[bytes], tuple[dict[str, int], int]]


def run_map_task(
    params: MapTaskParams,
    extract_counts: CountExtractor,
    store: ObjectStore,
    meter: MemoryMeter,
) -> dict[str, int]:
    """Read this mapper's files, combine counts, write one partition per
    reducer (empty partitions included, so absence always means failure).

    Metering covers the input buffers, the combined working buffer, the
    count table (word bytes + fixed per-entry overhead) and each outgoing
    partition buffer.
    """
    assigned = params.assigned_files()
    buffers: list[bytes] = []
    for key in assigned:
        meter.checkpoint()
        data = store.get(key)
        meter.alloc(len(data))
        buffers.append(data)

    joined = b"\n".join(buffers)
    meter.alloc(len(joined))
    for data in buffers:
        meter.free(len(data))
    buffers.clear()

    counts, tokens_seen = extract_counts(joined)
    table_bytes = sum(len(w.encode("utf-8")) + TABLE_ENTRY_OVERHEAD_BYTES for w in counts)
    meter.alloc(table_bytes)
    meter.free(len(joined))
    del joined

    words = _sorted_by_bytes(counts)
    encoded = [w.encode("utf-8") for w in words]
    routes = _partition_indices(encoded, params.num_reducers)
    partitions: list[list[KeyCount]] = [[] for _ in range(params.num_reducers)]
    for word, route in zip(words, routes):
        partitions[route].append((word, counts[word]))

    for r, entries in enumerate(partitions):
        meter.checkpoint()
        payload = format_counts(entries)
        meter.alloc(len(payload))
        store.put(intermediate_key(params.job_id, params.index, r), payload)
        meter.free(len(payload))

    meter.free(table_bytes)
    return {"files_processed": len(assigned), "tokens_seen": tokens_seen}


def run_reduce_task(
    params: ReduceTaskParams,
    store: ObjectStore,
    meter: MemoryMeter,
) -> dict[str, int]:
    """Merge this reducer's partition from every mapper into one sorted
    output object. All partitions must already exist (phase barrier)."""
    payloads: list[bytes] = []
    for m in range(params.num_mappers):
        meter.checkpoint()
        key = intermediate_key(params.job_id, m, params.reducer_index)
        try:
            data = store.get(key)
        except ObjectNotFound as exc:
            raise MissingPartition(f"{key.bucket}/{key.key}") from exc
        meter.alloc(len(data))
        payloads.append(data)

    entries = _merge_payloads(payloads)
    for data in payloads:
        meter.free(len(data))
    payloads.clear()

    table_bytes = sum(len(w.encode("utf-8")) + TABLE_ENTRY_OVERHEAD_BYTES for w, _ in entries)
    meter.alloc(table_bytes)

    payload = format_counts(entries)
    meter.alloc(len(payload))
    store.put(output_part_key(params.job_id, params.reducer_index), payload)
    meter.free(len(payload))
    meter.free(table_bytes)

    return {
        "words_out": len(entries),
        "total_count": sum(count for _, count in entries),
    }


def _merge_payloads(payloads: list[bytes]) -> list[KeyCount]:
    """Sum counts word-wise across payloads; result sorted byte-wise.

    The payloads are concatenated and parsed in one vectorized pass: one
    task making a handful of numpy calls over one large buffer scales
    across threads, where hundreds of tiny calls would serialize on the
    interpreter lock. Concatenation is line-faithful because every
    payload is required to be newline-terminated first.
    """
    for data in payloads:
        if data and not data.endswith(b"\n"):
            raise CountParseError("missing trailing newline")
    combined = b"".join(payloads)
    try:
        words, counts = _parse_counts_arrays(combined)
    except _ScalarPathRequired:
        merged: dict[str, int] = {}
        for data in payloads:
            for word, count in parse_counts(data):
                merged[word] = merged.get(word, 0) + count
        return [(w, merged[w]) for w in _sorted_by_bytes(merged)]

    if words.size == 0:
        return []
    unique, inverse = np.unique(words, return_inverse=True)
    sums = np.zeros(unique.size, dtype=np.int64)
    np.add.at(sums, inverse, counts)
    return [
        (word.decode("utf-8"), int(count))
        for word, count in zip(unique.tolist(), sums.tolist())
    ]

"""The word-frequency workload: tokenizer plus the map/reduce handlers.

A word is a maximal run of alphanumeric characters, lowercased; digits
count as word characters, underscores do not. Bytes are interpreted as
UTF-8 and invalid sequences act as separators. For ASCII input the
output is byte-exact regardless of which counting path runs.

``token_counts`` is the handler-facing entry point: it produces combined
counts directly, taking a vectorized route for ASCII data (the common
case by far) so that large mappers spend their time outside the
interpreter lock.
"""

from __future__ import annotations

import json
import re
from collections import Counter

import numpy as np

from . import mapreduce
from .mapreduce import MapTaskParams, ReduceTaskParams
from .object_store import ObjectStore
from .runtime import FunctionRuntime, FunctionSpec, MemoryMeter

MAP_FUNCTION = "wc-map"
REDUCE_FUNCTION = "wc-reduce"

# \w minus underscore == alphanumeric per str.isalnum
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(data: bytes) -> list[str]:
    """All tokens of ``data`` in reading order, lowercased."""
    text = data.decode("utf-8", errors="replace")
    return [token.lower() for token in _WORD_RE.findall(text)]


def token_counts(data: bytes) -> tuple[dict[str, int], int]:
    """Combined word counts plus the total token count of ``data``.

    Equivalent to ``Counter(tokenize(data))`` for every input.
    """
    if not data:
        return {}, 0
    if data.isascii():
        return _ascii_token_counts(data)
    tokens = tokenize(data)
    return dict(Counter(tokens)), len(tokens)


def _ascii_token_counts(data: bytes) -> tuple[dict[str, int], int]:
    arr = np.frombuffer(data, dtype=np.uint8)
    upper = (arr >= 65) & (arr <= 90)
    lowered = np.where(upper, arr | 0x20, arr)
    alnum = ((lowered >= 97) & (lowered <= 122)) | ((arr >= 48) & (arr <= 57))

    edges = np.diff(alnum.astype(np.int8), prepend=np.int8(0), append=np.int8(0))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    total = int(starts.size)
    if total == 0:
        return {}, 0

    lengths = ends - starts
    width = int(lengths.max())
    gather = starts[:, None] + np.arange(width)[None, :]
    np.minimum(gather, arr.size - 1, out=gather)
    rows = np.where(np.arange(width)[None, :] < lengths[:, None], lowered[gather], 0)
    flat = np.ascontiguousarray(rows.astype(np.uint8)).view(f"S{width}").ravel()

    words, counts = np.unique(flat, return_counts=True)
    table = dict(zip((w.decode("ascii") for w in words.tolist()), counts.tolist()))
    return table, total


def wc_map_handler(params: MapTaskParams, store: ObjectStore, meter: MemoryMeter) -> bytes:
    payload = mapreduce.run_map_task(params, token_counts, store, meter)
    return json.dumps(payload).encode()


def wc_reduce_handler(params: ReduceTaskParams, store: ObjectStore, meter: MemoryMeter) -> bytes:
    payload = mapreduce.run_reduce_task(params, store, meter)
    return json.dumps(payload).encode()


def register_wordcount(
    runtime: FunctionRuntime,
    cpu_share: float = 0.35,
    memory_limit_mb: int = 512,
    timeout_ms: int = 600_000,
) -> None:
    """Register the wc-map / wc-reduce pair on a runtime."""
    runtime.register(
        FunctionSpec(MAP_FUNCTION, "mapper", cpu_share, memory_limit_mb, timeout_ms),
        wc_map_handler,
    )
    runtime.register(
        FunctionSpec(REDUCE_FUNCTION, "reducer", cpu_share, memory_limit_mb, timeout_ms),
        wc_reduce_handler,
    )

"""Deterministic seeded corpus generation.

Stands in for the experiment's input documents: a configurable number of
files, each holding a fixed number of words drawn from a Zipf
distribution over a synthetic vocabulary (``w0000`` .. ``w9999`` by
default). Randomness comes from SplitMix64 driven by pure 64-bit integer
arithmetic, so the same spec yields byte-identical files on any host.

Sampling is inverse-CDF: the normalized weights 1/k^s are accumulated
into a cumulative table once, each 64-bit draw becomes a uniform in
[0, 1), and the word is the first cumulative bin at or above it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mapreduce import input_key, manifest_key
from .object_store import ObjectKey, ObjectStore

_U64_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4B58F
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (next_state, output)."""
    state = (state + _GOLDEN) & _U64_MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _U64_MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _U64_MASK
    return state, z ^ (z >> 31)


def splitmix64_block(state: int, count: int) -> np.ndarray:
    """The next ``count`` SplitMix64 outputs from ``state``, vectorized.

    Bit-identical to iterating :func:`splitmix64` ``count`` times.
    """
    steps = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(state & _U64_MASK) + steps * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class CorpusSpec:
    """Everything that determines the corpus bytes.

    ``skew`` scales file i's word count by skew**i for uneven-load
    experiments; 1.0 keeps every file the same size.
    """

    num_files: int = 50
    words_per_file: int = 50_000
    vocab_size: int = 10_000
    zipf_s: float = 1.0
    seed: int = 0
    line_width: int = 16
    skew: float = 1.0

    def __post_init__(self) -> None:
        if self.num_files < 1 or self.words_per_file < 1:
            raise ValueError("num_files and words_per_file must be positive")
        if self.vocab_size < 1 or self.line_width < 1:
            raise ValueError("vocab_size and line_width must be positive")
        if self.zipf_s < 0:
            raise ValueError("zipf_s must be >= 0")
        if not 0 <= self.seed <= _U64_MASK:
            raise ValueError("seed must fit in 64 bits")
        if self.skew <= 0:
            raise ValueError("skew must be positive")

    def file_word_count(self, index: int) -> int:
        if self.skew == 1.0:
            return self.words_per_file
        return max(1, int(round(self.words_per_file * self.skew**index)))


def zipf_cumulative(vocab_size: int, s: float) -> np.ndarray:
    """Normalized cumulative Zipf weights; the last bin is ~1.0."""
    weights = 1.0 / np.arange(1, vocab_size + 1, dtype=np.float64) ** s
    return np.cumsum(weights / weights.sum())


def _vocabulary(vocab_size: int) -> np.ndarray:
    width = len(str(vocab_size - 1))
    return np.array(
        [f"w{k:0{width}d}".encode() for k in range(vocab_size)],
        dtype=f"S{width + 1}",
    )


def generate_file(spec: CorpusSpec, index: int, cumulative: np.ndarray, vocab: np.ndarray) -> bytes:
    """Bytes of file ``index``: space-separated words, a newline every
    ``line_width`` words, final line newline-terminated."""
    _, file_seed = splitmix64(spec.seed ^ index)
    nwords = spec.file_word_count(index)
    draws = splitmix64_block(file_seed, nwords)
    uniforms = draws.astype(np.float64) / 2.0**64
    picks = np.searchsorted(cumulative, uniforms, side="left")
    np.minimum(picks, len(vocab) - 1, out=picks)
    words = vocab[picks].tolist()

    lines = [
        b" ".join(words[i : i + spec.line_width])
        for i in range(0, nwords, spec.line_width)
    ]
    return b"\n".join(lines) + b"\n"


def generate_corpus(
    spec: CorpusSpec, store: ObjectStore, job_id: str
) -> tuple[list[ObjectKey], int]:
    """Write the corpus and its manifest; returns (manifest, total tokens).

    The total is exact by construction: every generated word is a single
    alphanumeric run, so tokenization is lossless over these files.
    """
    cumulative = zipf_cumulative(spec.vocab_size, spec.zipf_s)
    vocab = _vocabulary(spec.vocab_size)

    manifest: list[ObjectKey] = []
    total_tokens = 0
    for i in range(spec.num_files):
        key = input_key(job_id, i)
        store.put(key, generate_file(spec, i, cumulative, vocab))
        manifest.append(key)
        total_tokens += spec.file_word_count(i)

    listing = "".join(key.key + "\n" for key in manifest)
    store.put(manifest_key(job_id), listing.encode())
    return manifest, total_tokens

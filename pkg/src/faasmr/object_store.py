"""Emulated object storage through which all job files flow.

Two interchangeable backends share one interface: an in-memory store for
fast tests and a filesystem store that lays objects out as plain files
under ``<root>/<bucket>/<key>``. Both are safe for concurrent use and
overwrite atomically (readers never observe a torn blob).
"""

from __future__ import annotations

import errno
import os
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path


class StoreError(Exception):
    pass


class InvalidKey(StoreError):
    """Key or bucket name violates the allowed syntax."""


class ObjectNotFound(StoreError):
    """No object exists under the requested key."""


class StorageFull(StoreError):
    """Backend ran out of space while writing."""


_KEY_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/-_.")
_BUCKET_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789-")


@dataclass(frozen=True)
class ObjectKey:
    """Bucket plus slash-separated path naming at most one object."""

    bucket: str
    key: str

    def __post_init__(self) -> None:
        validate_bucket(self.bucket)
        validate_key(self.key)


@dataclass(frozen=True)
class ObjectRecord:
    key: ObjectKey
    data: bytes
    size: int
    created_at: float


def validate_bucket(bucket: str) -> None:
    if not bucket or not set(bucket) <= _BUCKET_CHARS or bucket[0] == "-":
        raise InvalidKey(f"invalid bucket name: {bucket!r}")


def validate_key(key: str) -> None:
    if not key:
        raise InvalidKey("empty key")
    if not set(key) <= _KEY_CHARS:
        raise InvalidKey(f"key contains forbidden characters: {key!r}")
    if key.startswith("/"):
        raise InvalidKey(f"key must not start with '/': {key!r}")
    # Path-unsafe segments would escape the filesystem layout.
    for segment in key.split("/"):
        if segment in ("", ".", ".."):
            raise InvalidKey(f"key has unsafe path segment: {key!r}")


class ObjectStore:
    """Interface shared by both backends."""

    def put(self, key: ObjectKey, data: bytes) -> None:
        raise NotImplementedError

    def get(self, key: ObjectKey) -> bytes:
        raise NotImplementedError

    def list(self, bucket: str, prefix: str = "") -> list[ObjectKey]:
        raise NotImplementedError

    def delete_prefix(self, bucket: str, prefix: str) -> int:
        raise NotImplementedError


class MemoryObjectStore(ObjectStore):
    """Dict-backed store; puts/gets are linearizable under one lock."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._objects: dict[tuple[str, str], ObjectRecord] = {}

    def put(self, key: ObjectKey, data: bytes) -> None:
        if not isinstance(data, bytes):
            data = bytes(data)
        record = ObjectRecord(key, data, len(data), time.monotonic())
        with self._lock:
            self._objects[(key.bucket, key.key)] = record

    def get(self, key: ObjectKey) -> bytes:
        with self._lock:
            record = self._objects.get((key.bucket, key.key))
        if record is None:
            raise ObjectNotFound(f"{key.bucket}/{key.key}")
        return record.data

    def list(self, bucket: str, prefix: str = "") -> list[ObjectKey]:
        with self._lock:
            names = [k for b, k in self._objects if b == bucket and k.startswith(prefix)]
        names.sort()
        return [ObjectKey(bucket, name) for name in names]

    def delete_prefix(self, bucket: str, prefix: str) -> int:
        with self._lock:
            doomed = [
                pair for pair in self._objects
                if pair[0] == bucket and pair[1].startswith(prefix)
            ]
            for pair in doomed:
                del self._objects[pair]
        return len(doomed)


class FilesystemObjectStore(ObjectStore):
    """One file per object under ``<root>/<bucket>/<key>``.

    Overwrites go through a temp file in ``<root>/.tmp`` followed by
    ``os.replace``, so concurrent readers see either the old or the new
    blob in full. Object bytes are stored verbatim, no sidecar metadata.
    """

    def __init__(self, root: str | os.PathLike[str]) -> None:
        self.root = Path(root)
        self._tmp = self.root / ".tmp"
        self._tmp.mkdir(parents=True, exist_ok=True)

    def _path(self, key: ObjectKey) -> Path:
        return self.root / key.bucket / key.key

    def put(self, key: ObjectKey, data: bytes) -> None:
        path = self._path(key)
        tmp_path = self._tmp / f"{uuid.uuid4().hex}.part"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(tmp_path, "wb") as fh:
                fh.write(data)
            os.replace(tmp_path, path)
        except OSError as exc:
            tmp_path.unlink(missing_ok=True)
            if exc.errno == errno.ENOSPC:
                raise StorageFull(str(exc)) from exc
            raise

    def get(self, key: ObjectKey) -> bytes:
        try:
            return self._path(key).read_bytes()
        except FileNotFoundError:
            raise ObjectNotFound(f"{key.bucket}/{key.key}") from None

    def list(self, bucket: str, prefix: str = "") -> list[ObjectKey]:
        validate_bucket(bucket)
        bucket_dir = self.root / bucket
        if not bucket_dir.is_dir():
            return []
        names = []
        for dirpath, _dirnames, filenames in os.walk(bucket_dir):
            rel = os.path.relpath(dirpath, bucket_dir)
            for name in filenames:
                key = name if rel == "." else f"{rel}/{name}".replace(os.sep, "/")
                if key.startswith(prefix):
                    names.append(key)
        names.sort()
        return [ObjectKey(bucket, name) for name in names]

    def delete_prefix(self, bucket: str, prefix: str) -> int:
        count = 0
        for key in self.list(bucket, prefix):
            try:
                self._path(key).unlink()
                count += 1
            except FileNotFoundError:
                pass
        self._prune_empty_dirs(self.root / bucket)
        return count

    def _prune_empty_dirs(self, bucket_dir: Path) -> None:
        if not bucket_dir.is_dir():
            return
        for dirpath, _dirnames, filenames in os.walk(bucket_dir, topdown=False):
            if dirpath == str(bucket_dir):
                continue
            if not filenames and not os.listdir(dirpath):
                os.rmdir(dirpath)

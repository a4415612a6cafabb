"""Local emulation of the function-compute platform.

Registered functions are invoked on demand, individually or as a batch
with a bounded degree of parallelism. Every invocation is metered: wall
clock execution time plus a modeled peak memory figure that handlers
declare through a :class:`MemoryMeter` as they grow and shrink buffers.
Modeled (rather than OS-sampled) memory keeps the reported numbers
deterministic for a deterministic workload.

Timeouts are cooperative: handlers call ``meter.checkpoint()`` at file
boundaries, and a handler that returns late is still classified as a
timeout by the driver.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

DEFAULT_CPU_SHARE = 0.35
DEFAULT_MEMORY_LIMIT_MB = 512
DEFAULT_TIMEOUT_MS = 600_000


class RuntimeError_(Exception):
    pass


class DuplicateFunction(RuntimeError_):
    pass


class UnknownFunction(RuntimeError_):
    pass


class InvalidFunctionSpec(RuntimeError_):
    pass


class UnderflowFree(RuntimeError_):
    """More bytes freed than are currently allocated."""


class MemoryLimitExceeded(RuntimeError_):
    """Modeled allocation crossed the function's memory limit."""


class InvocationTimeout(RuntimeError_):
    """Raised at a cooperative checkpoint once the deadline has passed."""


class InvocationStatus(str, Enum):
    SUCCEEDED = "Succeeded"
    TIMEOUT = "Timeout"
    MEMORY_EXCEEDED = "MemoryExceeded"
    FAILED = "Failed"


@dataclass(frozen=True)
class FunctionSpec:
    """A registered function and its resource configuration."""

    name: str
    kind: str  # "mapper" or "reducer"
    cpu_share: float = DEFAULT_CPU_SHARE
    memory_limit_mb: int = DEFAULT_MEMORY_LIMIT_MB
    timeout_ms: int = DEFAULT_TIMEOUT_MS

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidFunctionSpec("function name must be non-empty")
        if self.kind not in ("mapper", "reducer"):
            raise InvalidFunctionSpec(f"kind must be mapper or reducer, got {self.kind!r}")
        if not 0 < self.cpu_share <= 1:
            raise InvalidFunctionSpec(f"cpu_share must be in (0, 1], got {self.cpu_share}")
        if self.memory_limit_mb <= 0:
            raise InvalidFunctionSpec("memory_limit_mb must be positive")
        if self.timeout_ms <= 0:
            raise InvalidFunctionSpec("timeout_ms must be positive")


class MemoryMeter:
    """Tracks one invocation's modeled buffer bytes.

    ``peak_bytes`` never decreases; ``checkpoint()`` doubles as the
    cooperative cancellation signal. A meter belongs to exactly one
    invocation and must not be shared.
    """

    def __init__(self, limit_bytes: int | None = None, deadline: float | None = None):
        self.current_bytes = 0
        self.peak_bytes = 0
        self._limit_bytes = limit_bytes
        self._deadline = deadline

    def alloc(self, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("alloc expects a non-negative byte count")
        self.current_bytes += nbytes
        if self.current_bytes > self.peak_bytes:
            self.peak_bytes = self.current_bytes
        if self._limit_bytes is not None and self.current_bytes > self._limit_bytes:
            raise MemoryLimitExceeded(
                f"modeled memory {self.current_bytes} B exceeds limit {self._limit_bytes} B"
            )

    def free(self, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("free expects a non-negative byte count")
        if nbytes > self.current_bytes:
            raise UnderflowFree(
                f"freeing {nbytes} B with only {self.current_bytes} B allocated"
            )
        self.current_bytes -= nbytes

    def checkpoint(self) -> None:
        if self._deadline is not None and time.perf_counter() > self._deadline:
            raise InvocationTimeout("deadline exceeded")

    @property
    def peak_mb(self) -> float:
        return self.peak_bytes / 2**20


Handler = Callable[[Any, Any, MemoryMeter], bytes]


@dataclass
class InvocationRecord:
    """Metered outcome of one function invocation."""

    invocation_id: str
    function_name: str
    kind: str
    params: Any
    started_at: float
    ended_at: float
    exec_time_ms: float
    peak_modeled_mem_mb: float
    status: InvocationStatus
    error: str | None = None
    payload: bytes = b""

    def to_log_dict(self) -> dict[str, Any]:
        entry = {
            "invocation_id": self.invocation_id,
            "function_name": self.function_name,
            "kind": self.kind,
            "status": self.status.value,
            "exec_time_ms": self.exec_time_ms,
            "peak_modeled_mem_mb": self.peak_modeled_mem_mb,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
        }
        if self.error is not None:
            entry["error"] = self.error
        return entry


def records_to_jsonl(records: list[InvocationRecord]) -> bytes:
    lines = [json.dumps(r.to_log_dict(), sort_keys=True) for r in records]
    return ("\n".join(lines) + "\n").encode() if lines else b""


@dataclass
class _Registration:
    spec: FunctionSpec
    handler: Handler
    invoked_once: bool = field(default=False)


class FunctionRuntime:
    """Registers functions and executes invocations with metering.

    ``cold_start_ms`` adds a fixed latency to the first invocation of
    each function; ``cpu_throttle`` pads each invocation's wall time so
    it behaves like a ``cpu_share`` fraction of one vCPU. Both default
    off. The runtime itself may be shared across threads.
    """

    def __init__(self, store: Any, cold_start_ms: float = 0.0, cpu_throttle: bool = False):
        self.store = store
        self.cold_start_ms = cold_start_ms
        self.cpu_throttle = cpu_throttle
        self._functions: dict[str, _Registration] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def register(self, spec: FunctionSpec, handler: Handler) -> None:
        with self._lock:
            if spec.name in self._functions:
                raise DuplicateFunction(spec.name)
            self._functions[spec.name] = _Registration(spec, handler)

    def registered(self, name: str) -> FunctionSpec:
        with self._lock:
            reg = self._functions.get(name)
        if reg is None:
            raise UnknownFunction(name)
        return reg.spec

    def invoke(self, function_name: str, params: Any) -> InvocationRecord:
        with self._lock:
            reg = self._functions.get(function_name)
            if reg is None:
                raise UnknownFunction(function_name)
            invocation_id = self._next_id_locked()
            cold = not reg.invoked_once
            reg.invoked_once = True
        return self._run(reg, invocation_id, params, cold)

    def invoke_batch(
        self,
        invocations: list[tuple[str, Any]],
        concurrency_cap: int,
    ) -> list[InvocationRecord]:
        """Run all invocations, at most ``concurrency_cap`` at a time.

        Results come back in request order; a registration miss becomes a
        Failed record rather than an exception so the rest of the batch
        still runs.
        """
        if concurrency_cap < 1:
            raise ValueError("concurrency_cap must be >= 1")
        if not invocations:
            return []

        prepared: list[tuple[_Registration | None, str, Any, bool]] = []
        with self._lock:
            for name, params in invocations:
                reg = self._functions.get(name)
                invocation_id = self._next_id_locked()
                if reg is None:
                    prepared.append((None, invocation_id, (name, params), False))
                else:
                    cold = not reg.invoked_once
                    reg.invoked_once = True
                    prepared.append((reg, invocation_id, params, cold))

        results: list[InvocationRecord | None] = [None] * len(prepared)
        with ThreadPoolExecutor(max_workers=concurrency_cap) as pool:
            futures = []
            for i, (reg, invocation_id, params, cold) in enumerate(prepared):
                if reg is None:
                    name, raw_params = params
                    results[i] = self._unknown_record(invocation_id, name, raw_params)
                    continue
                futures.append((i, pool.submit(self._run, reg, invocation_id, params, cold)))
            for i, fut in futures:
                results[i] = fut.result()
        return results  # type: ignore[return-value]

    def _next_id_locked(self) -> str:
        self._counter += 1
        return f"inv-{self._counter:06d}"

    def _unknown_record(self, invocation_id: str, name: str, params: Any) -> InvocationRecord:
        now = time.perf_counter()
        return InvocationRecord(
            invocation_id=invocation_id,
            function_name=name,
            kind="unknown",
            params=params,
            started_at=now,
            ended_at=now,
            exec_time_ms=0.0,
            peak_modeled_mem_mb=0.0,
            status=InvocationStatus.FAILED,
            error=f"unknown function: {name}",
        )

    def _run(
        self, reg: _Registration, invocation_id: str, params: Any, cold: bool
    ) -> InvocationRecord:
        spec = reg.spec
        started = time.perf_counter()
        deadline = started + spec.timeout_ms / 1000.0
        meter = MemoryMeter(limit_bytes=spec.memory_limit_mb * 2**20, deadline=deadline)

        if cold and self.cold_start_ms > 0:
            time.sleep(self.cold_start_ms / 1000.0)

        cpu_start = time.thread_time()
        payload = b""
        error: str | None = None
        try:
            payload = reg.handler(params, self.store, meter)
            status = InvocationStatus.SUCCEEDED
        except InvocationTimeout:
            status = InvocationStatus.TIMEOUT
        except MemoryLimitExceeded as exc:
            status = InvocationStatus.MEMORY_EXCEEDED
            error = str(exc)
        except Exception as exc:  # handler bug or missing input
            status = InvocationStatus.FAILED
            error = f"{type(exc).__name__}: {exc}"

        if self.cpu_throttle:
            cpu_used = time.thread_time() - cpu_start
            target = started + cpu_used / spec.cpu_share
            pad = target - time.perf_counter()
            if pad > 0:
                time.sleep(pad)

        ended = time.perf_counter()
        exec_ms = (ended - started) * 1000.0
        # Hard backstop: a handler that ran past its deadline without
        # checking the cancellation signal is still a timeout.
        if status is InvocationStatus.SUCCEEDED and exec_ms > spec.timeout_ms:
            status = InvocationStatus.TIMEOUT
            payload = b""

        return InvocationRecord(
            invocation_id=invocation_id,
            function_name=spec.name,
            kind=spec.kind,
            params=params,
            started_at=started,
            ended_at=ended,
            exec_time_ms=exec_ms,
            peak_modeled_mem_mb=meter.peak_mb,
            status=status,
            error=error,
            payload=payload if isinstance(payload, bytes) else b"",
        )

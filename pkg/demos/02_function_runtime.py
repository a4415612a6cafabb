"""Tour of the function-compute emulator.

Functions are registered once with a resource spec (the reference
configuration is 0.35 vCPU and 512 MB per function), then invoked on
demand. Each invocation is metered: wall-clock time plus modeled peak
memory that the handler declares through its meter as buffers come and
go. Batches run with a concurrency cap and return records in request
order.

Run:  python3 demos/02_function_runtime.py
"""

import time

from faasmr import FunctionRuntime, FunctionSpec, MemoryObjectStore

store = MemoryObjectStore()
runtime = FunctionRuntime(store)


def summarize(params, store, meter):
    data = b"x" * params["nbytes"]
    meter.alloc(len(data))          # declare the working buffer
    time.sleep(params["sleep_s"])   # stand-in for real work
    meter.free(len(data))
    return f"handled {params['nbytes']} bytes".encode()


runtime.register(FunctionSpec("summarize", kind="mapper"), summarize)

record = runtime.invoke("summarize", {"nbytes": 1 << 20, "sleep_s": 0.01})
print(f"single invocation: {record.status.value}, "
      f"{record.exec_time_ms:.1f} ms, peak {record.peak_modeled_mem_mb:.2f} MB")

# A batch with a cap: at most 4 handlers in flight at any instant,
# results in the same order as the requests.
batch = [("summarize", {"nbytes": 1 << 18, "sleep_s": 0.03}) for _ in range(8)]
t0 = time.perf_counter()
records = runtime.invoke_batch(batch, concurrency_cap=4)
wall_ms = (time.perf_counter() - t0) * 1000
serial_ms = sum(r.exec_time_ms for r in records)
print(f"batch of 8 at cap 4: wall {wall_ms:.0f} ms vs serial sum {serial_ms:.0f} ms")

# Timeouts are outcomes, not crashes: the record says what happened.
runtime.register(
    FunctionSpec("sluggish", kind="mapper", timeout_ms=20),
    lambda p, s, m: time.sleep(0.05) or b"",
)
print("past deadline:", runtime.invoke("sluggish", None).status.value)

# So are modeled-memory blowups.
runtime.register(
    FunctionSpec("hungry", kind="mapper", memory_limit_mb=64),
    lambda p, s, m: m.alloc(65 << 20) or b"",
)
print("over the limit:", runtime.invoke("hungry", None).status.value)

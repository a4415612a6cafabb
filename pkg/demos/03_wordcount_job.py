"""One complete word-count job, end to end.

The client plans mapper tasks over the input manifest (each file owned
by exactly one mapper), fires the map batch, waits for every mapper to
succeed, fires the reduce batch, and merges the reducer part files into
one globally sorted result. Mappers and reducers never talk directly;
the shuffle is entirely object-store reads and writes.

Run:  python3 demos/03_wordcount_job.py
"""

from faasmr import (
    FunctionRuntime,
    JobConfig,
    MemoryObjectStore,
    ObjectKey,
    register_wordcount,
    run_job,
)
from faasmr.mapreduce import result_key

store = MemoryObjectStore()
runtime = FunctionRuntime(store)
register_wordcount(runtime)  # the wc-map / wc-reduce pair

documents = [
    b"To be, or not to be: that is the question.",
    b"Whether 'tis nobler in the mind to suffer",
    b"The slings and arrows of outrageous fortune,",
    b"Or to take arms against a sea of troubles.",
]
manifest = []
for i, body in enumerate(documents):
    key = ObjectKey("jobs", f"hamlet/in/f{i:05d}.txt")
    store.put(key, body)
    manifest.append(key)

config = JobConfig(
    job_id="hamlet",
    num_mappers=2,
    num_reducers=2,
    concurrency_cap=2,
    manifest=tuple(manifest),
)
metrics = run_job(config, runtime, store)

print("shuffle objects:")
for key in store.list("jobs", "hamlet/int/"):
    print("   ", key.key)

print("\ntop of result.tsv:")
for line in store.get(result_key("hamlet")).decode().splitlines()[:8]:
    print("   ", line)

print(f"\nmap avg {metrics.avg_map_ms:.2f} ms over {len(metrics.map_records)} mappers, "
      f"reduce avg {metrics.avg_reduce_ms:.2f} ms over {len(metrics.reduce_records)} reducers")
print(f"workload split: {metrics.map_pct:.2f}% map / {metrics.reduce_pct:.2f}% reduce "
      f"(share of summed phase averages)")
print(f"wall clock: {metrics.wall_clock_ms:.1f} ms")

"""A miniature scaling sweep.

The harness generates a seeded Zipf corpus once, then for each function
count runs a discarded warm-up plus timed repeats with mappers and
reducers tied (M = R = n), aggregates medians, and reads off the trends:
does execution time keep falling as functions are added, and are the
returns diminishing?

This demo uses a toy corpus so it finishes in seconds. The reference
experiment (50 files x 50,000 words, counts 1/2/5/10, 3 repeats) runs
via the CLI:

    faasmr bench --func-counts 1,2,5,10 --repeats 3 --files 50 \
        --words-per-file 50000 --seed 42 --cpu-throttle --out bench-out

Run:  python3 demos/04_scaling_benchmark.py
"""

from faasmr import CorpusSpec, SweepConfig, render_table, run_sweep

config = SweepConfig(
    func_counts=(1, 2, 4),
    corpus=CorpusSpec(num_files=8, words_per_file=5000, vocab_size=1000, seed=7),
    repeats=2,
)
result = run_sweep(config)

print(render_table(result.rows))
print("modeled memory per mapper, by function count:")
for row in result.rows:
    bar = "#" * max(1, round(row.avg_map_mem_mb * 200))
    print(f"  n={row.func_num:<2d} {row.avg_map_mem_mb:8.4f} MB  {bar}")

verdict = result.verdict
print("\ntrends over this sweep:")
print("  execution time strictly decreasing:", verdict.time_monotone_decreasing)
print("  modeled memory strictly decreasing:", verdict.mem_monotone_decreasing)
print("  diminishing returns on map time:   ", verdict.diminishing_returns)
print("\n(memory is modeled from declared buffers, so it is exactly")
print(" reproducible; timings on a busy laptop will wobble at this scale)")

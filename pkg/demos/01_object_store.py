"""Tour of the emulated object store.

Everything a job touches lives in here: inputs, the shuffle's
intermediate files, outputs, logs. Two backends share one interface; the
in-memory one is what the benchmarks use, the filesystem one lays each
object out as a plain file you can poke at with regular tools.

Run:  python3 demos/01_object_store.py
"""

import tempfile
from pathlib import Path

from faasmr import FilesystemObjectStore, MemoryObjectStore, ObjectKey, ObjectNotFound

store = MemoryObjectStore()

# Objects are addressed by (bucket, slash-separated key).
key = ObjectKey("jobs", "demo/in/f00000.txt")
store.put(key, b"a b a")
print("read-your-writes:", store.get(key))

# Overwrite is atomic and last-writer-wins.
store.put(key, b"replaced")
print("after overwrite:  ", store.get(key))

# Listing is prefix-based and always byte-wise sorted.
for name in ["demo/int/m1/p0.tsv", "demo/int/m0/p0.tsv", "demo/out/part-0.tsv"]:
    store.put(ObjectKey("jobs", name), b"")
print("intermediates:    ", [k.key for k in store.list("jobs", "demo/int/")])

# Cleanup between experiments is a prefix delete.
removed = store.delete_prefix("jobs", "demo/int/")
print("removed:          ", removed)

# Missing keys raise, they do not return placeholders.
try:
    store.get(ObjectKey("jobs", "demo/never-written"))
except ObjectNotFound as exc:
    print("missing object:   ", exc)

# The filesystem backend maps keys to real paths under <root>/<bucket>/.
with tempfile.TemporaryDirectory() as root:
    fs_store = FilesystemObjectStore(root)
    fs_store.put(ObjectKey("jobs", "demo/in/f00000.txt"), b"on disk")
    path = Path(root) / "jobs" / "demo" / "in" / "f00000.txt"
    print("fs layout:        ", path.relative_to(root), "->", path.read_bytes())

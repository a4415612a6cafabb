import pytest

from faasmr.object_store import FilesystemObjectStore, MemoryObjectStore


@pytest.fixture(params=["mem", "fs"])
def store(request, tmp_path):
    """A fresh store of each backend; both must behave identically."""
    if request.param == "mem":
        return MemoryObjectStore()
    return FilesystemObjectStore(tmp_path / "store")


@pytest.fixture
def mem_store():
    return MemoryObjectStore()

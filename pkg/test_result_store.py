#!/usr/bin/env python3
"""
Test result store operations.
"""

import tempfile

import pytest

from models.result import ResultDocument, document_base, make_document_id
from store.result_store import ResultStore


def test_result_store():
    """Test save, load, versions, lineage and lookup."""

    store = ResultStore(results_dir=tempfile.mkdtemp())

    # Test 1: Save document
    print("Test 1: Save document")
    witness_id = make_document_id("witness", "demo")
    document = ResultDocument(
        document_id=witness_id,
        kind="witness",
        content={"mode": "dtmc", "threshold": "1/4", "feasible": "yes", "size": "3"},
        stats={"latency_ms": 2},
    )
    path = store.save_document(document)
    assert path.exists()
    print(f"  ✅ Saved {document.document_id}")

    # Test 2: Load document
    print("\nTest 2: Load document")
    loaded = store.load_document(witness_id)
    assert loaded == document
    assert loaded.render().startswith("mode: dtmc\nthreshold: 1/4\n")
    print(f"  ✅ Loaded {loaded.document_id} unchanged")

    # Test 3: Attempt to overwrite (should fail)
    print("\nTest 3: Attempt overwrite (should fail)")
    with pytest.raises(FileExistsError):
        store.save_document(document)
    print("  ✅ Correctly blocked overwrite")

    # Test 4: Versions
    print("\nTest 4: Next version")
    base = document_base("witness", "demo")
    assert store.next_version(base) == 2
    second = ResultDocument(document_id=f"{base}_v2", kind="witness",
                            content={"feasible": "no"}, derived_from=[witness_id], version=2)
    store.save_document(second)
    assert store.list_versions(base) == [witness_id, second.document_id]
    assert store.next_version(base) == 3
    print(f"  ✅ {len(store.list_versions(base))} versions, next is v3")

    # Test 5: Lineage and lookup
    print("\nTest 5: Lineage and find")
    assert [d.document_id for d in store.lineage(second.document_id)] == [second.document_id, witness_id]
    assert store.find("witness", "demo").document_id == second.document_id
    assert store.find("baseline", "demo") is None
    print("  ✅ Lineage follows derived_from, find returns the latest version")

    # Test 6: Load non-existent document (should fail)
    print("\nTest 6: Load non-existent document (should fail)")
    with pytest.raises(FileNotFoundError):
        store.load_document("witness_19700101_none_v1")
    print("  ✅ Correctly raised error")

    print("\n✅ All result store tests passed")


if __name__ == '__main__':
    test_result_store()

import pytest
from hypothesis import given, strategies as st

from forge.bundle.digest import compute_digest
from forge.errors import UnknownDigest
from forge.registry.blobstore import BlobStore


@pytest.fixture
def blobs(tmp_path):
    return BlobStore(tmp_path)


def test_put_get_round_trip(blobs):
    digest = blobs.put(b"model weights")
    assert blobs.get(digest) == b"model weights"
    assert digest == compute_digest(b"model weights")


def test_put_is_idempotent_one_copy(blobs):
    first = blobs.put(b"same bytes")
    second = blobs.put(b"same bytes")
    assert first == second
    stored = [p for p in blobs.root.rglob("*") if p.is_file()]
    assert len(stored) == 1


def test_get_unknown(blobs):
    with pytest.raises(UnknownDigest):
        blobs.get("0" * 64)


def test_two_level_fanout_layout(blobs):
    digest = blobs.put(b"layout probe")
    expected = blobs.root / digest.hex[:2] / digest.hex
    assert expected.is_file()


def test_corruption_detected_on_read(blobs):
    digest = blobs.put(b"pristine")
    path = blobs.root / digest.hex[:2] / digest.hex
    path.write_bytes(b"tampered")
    with pytest.raises(UnknownDigest):
        blobs.get(digest)


@given(st.binary(max_size=4096))
def test_round_trip_property(data):
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        store = BlobStore(tmp)
        assert store.get(store.put(data)) == data

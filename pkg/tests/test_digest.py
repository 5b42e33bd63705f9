import pytest
from hypothesis import given, strategies as st

from forge.bundle.digest import Digest, compute_digest

from oracles import sha256_hex

# pinned against the independent RFC implementation in oracles.py
EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
ABC_SHA256 = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_empty_input_pinned():
    assert compute_digest(b"").hex == EMPTY_SHA256
    assert sha256_hex(b"") == EMPTY_SHA256


def test_abc_pinned():
    assert compute_digest(b"abc").hex == ABC_SHA256
    assert sha256_hex(b"abc") == ABC_SHA256


def test_determinism():
    data = b"some model weights"
    assert compute_digest(data) == compute_digest(bytes(data))


@given(st.binary(max_size=2048))
def test_matches_independent_oracle(data):
    assert compute_digest(data).hex == sha256_hex(data)


def test_digest_renders_as_bare_hex():
    digest = compute_digest(b"x")
    assert str(digest) == digest.hex
    assert len(digest.hex) == 64
    assert set(digest.hex) <= set("0123456789abcdef")


@pytest.mark.parametrize(
    "bad",
    ["", "abc", "Z" * 64, EMPTY_SHA256.upper(), EMPTY_SHA256 + "00"],
)
def test_rejects_malformed_hex(bad):
    with pytest.raises(ValueError):
        Digest(bad)

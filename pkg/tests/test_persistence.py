import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bitorder import persistence as ps
from bitorder.core import EmbeddingMatrix, Vocabulary
from bitorder.errors import FormatError


@given(st.integers(1, 1000), st.sampled_from([1, 63, 64, 65, 128]), st.integers(0, 2**31))
def test_round_trip_bytes(n, d, seed):
    B = EmbeddingMatrix.random(n, d, np.random.default_rng(seed))
    data = ps.to_bytes(B)
    assert len(data) == 24 + 8 * n * -(-d // 64)
    assert ps.from_bytes(data) == B


def test_header_layout():
    B = EmbeddingMatrix.from_bits([[1, 0, 1]])
    data = ps.to_bytes(B)
    assert data[:4] == b"BNDR"
    assert struct.unpack("<IQQ", data[4:24]) == (1, 1, 3)
    assert int.from_bytes(data[24:], "little") == 0b101


def test_file_round_trip_with_vocab(tmp_path):
    B = EmbeddingMatrix.random(3, 70, np.random.default_rng(0))
    v = Vocabulary(["ä", "b c", "d"])
    path = tmp_path / "m.bnd"
    ps.save_embedding(path, B, v)
    assert path.stat().st_size == ps.file_size(3, 70) == 24 + 8 * 3 * 2
    B2, v2 = ps.load_embedding(path)
    assert B2 == B and v2.names == v.names
    (tmp_path / "m.vocab").unlink()
    assert ps.load_embedding(path)[1] is None
    with pytest.raises(FormatError):
        ps.load_embedding(path, require_vocab=True)


def test_payload_accounting():
    # 82,114 concepts at 128 bits: 16 bytes per row
    assert ps.file_size(82_114, 128) - 24 == 82_114 * 16


@pytest.mark.parametrize("mutate", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:4] + struct.pack("<I", 2) + b[8:],
    lambda b: b[:-8],
    lambda b: b + b"\0",
    lambda b: b[:10],
    lambda b: b[:24] + (1 << 40).to_bytes(8, "little") + b[32:],
])
def test_rejects_malformed(mutate):
    data = ps.to_bytes(EmbeddingMatrix.from_bits(np.ones((2, 5))))
    with pytest.raises(FormatError):
        ps.from_bytes(mutate(data))


def test_manifest(tmp_path):
    ps.write_manifest(tmp_path / "m.json", {"config": {"d": 8}})
    rec = ps.read_manifest(tmp_path / "m.json")
    assert rec["config"] == {"d": 8} and rec["tool_version"]

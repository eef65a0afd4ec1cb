import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simkit.snapshot import (FORMAT_VERSION, MAGIC, CorruptPayloadError,
                             NotASnapshotError, SerializeError, SnapshotError,
                             TruncatedStreamError, U8, UnsupportedVersionError,
                             deserialize, read_snapshot, serialize,
                             write_snapshot)


def hand_header(payload: bytes) -> bytes:
    return (b"TCSNAP01"
            + struct.pack("<I", 1)
            + struct.pack("<Q", len(payload))
            + struct.pack("<I", zlib.crc32(payload)))


def test_empty_record_golden():
    data = serialize({})
    assert data == b"TCSNAP01" + struct.pack("<I", 1) + struct.pack("<Q", 0) \
        + struct.pack("<I", 0)
    assert struct.unpack("<I", data[20:24])[0] == 0x00000000
    assert deserialize(data) == {}


def test_steps_record_matches_hand_encoding():
    # field assembled by hand from the format definition
    payload = (struct.pack("<H", 5) + b"steps"
               + struct.pack("<B", 2)           # i64 type code
               + struct.pack("<q", 5))
    expected = hand_header(payload) + payload
    assert serialize({"steps": 5}) == expected


def test_all_types_roundtrip_bitwise():
    rec = {
        "flag": U8(7),
        "steps": -123456789,
        "time": 0.1 + 0.2,
        "data": np.array([1.5, -0.0, 2.0 ** -1074, np.inf]),
        "blob": b"\x00\xff<binary>",
        "inner": {"a": 1, "b": {"c": 2.5}},
    }
    out = deserialize(serialize(rec))
    assert out["flag"] == 7 and isinstance(out["flag"], U8)
    assert out["steps"] == rec["steps"]
    assert struct.pack("<d", out["time"]) == struct.pack("<d", rec["time"])
    assert out["data"].tobytes() == rec["data"].tobytes()
    assert out["blob"] == rec["blob"]
    assert out["inner"]["b"]["c"] == 2.5
    # determinism: same value, same bytes
    assert serialize(rec) == serialize(deserialize(serialize(rec)))


def test_field_order_preserved():
    a = serialize({"x": 1, "y": 2})
    b = serialize({"y": 2, "x": 1})
    assert a != b
    assert list(deserialize(a)) == ["x", "y"]


scalars = st.one_of(
    st.integers(min_value=-(2 ** 63), max_value=2 ** 63 - 1),
    st.floats(allow_nan=False),
    st.binary(max_size=64),
    st.builds(U8, st.integers(0, 255)),
    st.builds(lambda xs: np.array(xs, dtype=np.float64),
              st.lists(st.floats(allow_nan=False), max_size=8)),
)
records = st.recursive(
    st.dictionaries(st.text(min_size=1, max_size=8), scalars, max_size=5),
    lambda children: st.dictionaries(st.text(min_size=1, max_size=8),
                                     st.one_of(scalars, children), max_size=5),
    max_leaves=20)


def assert_equal_record(a, b):
    assert list(a) == list(b)
    for k in a:
        if isinstance(a[k], np.ndarray):
            assert a[k].tobytes() == b[k].tobytes()
        elif isinstance(a[k], dict):
            assert_equal_record(a[k], b[k])
        elif isinstance(a[k], float):
            assert struct.pack("<d", a[k]) == struct.pack("<d", b[k])
        else:
            assert a[k] == b[k]


@given(records)
@settings(max_examples=150, deadline=None)
def test_roundtrip_property(rec):
    assert_equal_record(deserialize(serialize(rec)), rec)


def test_error_bad_magic():
    with pytest.raises(NotASnapshotError):
        deserialize(b"NOTSNAP0" + b"\x00" * 16)


def test_error_version():
    data = bytearray(serialize({"steps": 5}))
    data[8] = 99
    with pytest.raises(UnsupportedVersionError) as ei:
        deserialize(bytes(data))
    assert "99" in str(ei.value)


def test_error_checksum_single_bit_flip():
    data = bytearray(serialize({"steps": 5}))
    data[-1] ^= 0x01
    with pytest.raises(CorruptPayloadError):
        deserialize(bytes(data))


def test_error_truncated():
    data = serialize({"steps": 5})
    with pytest.raises(TruncatedStreamError) as ei:
        deserialize(data[:-3])
    assert ei.value.offset == len(data) - 3
    assert "offset" in str(ei.value)
    with pytest.raises(TruncatedStreamError):
        deserialize(data[:4])


def test_error_trailing_garbage():
    with pytest.raises(CorruptPayloadError):
        deserialize(serialize({"steps": 5}) + b"xx")


def test_error_bad_type_code_with_valid_checksum():
    payload = struct.pack("<H", 1) + b"k" + struct.pack("<B", 42)
    with pytest.raises(CorruptPayloadError) as ei:
        deserialize(hand_header(payload) + payload)
    assert "type code" in str(ei.value)


def test_error_truncated_field_with_valid_checksum():
    payload = struct.pack("<H", 1) + b"k" + struct.pack("<B", 2) + b"\x01\x02"
    with pytest.raises(TruncatedStreamError):
        deserialize(hand_header(payload) + payload)


def test_error_duplicate_key_with_valid_checksum():
    one = struct.pack("<H", 1) + b"k" + struct.pack("<BB", 1, 0)
    payload = one + one
    with pytest.raises(CorruptPayloadError) as ei:
        deserialize(hand_header(payload) + payload)
    assert "duplicate" in str(ei.value)


def test_error_huge_array_count_is_truncation_not_meltdown():
    payload = (struct.pack("<H", 1) + b"k" + struct.pack("<B", 4)
               + struct.pack("<Q", 2 ** 60))
    with pytest.raises(TruncatedStreamError):
        deserialize(hand_header(payload) + payload)


def test_bitflip_fuzz_always_defined_error():
    base = serialize({
        "steps": 7,
        "pos": np.arange(16, dtype=np.float64),
        "nested": {"label": b"abc", "f": 1.25},
    })
    rng = np.random.default_rng(2024)
    crashes = 0
    for _ in range(2000):
        data = bytearray(base)
        for _ in range(rng.integers(1, 4)):
            data[rng.integers(0, len(data))] ^= int(rng.integers(1, 256))
        try:
            deserialize(bytes(data))
        except SnapshotError:
            pass
        except Exception:
            crashes += 1
    assert crashes == 0


@given(st.binary(max_size=256))
@settings(max_examples=300, deadline=None)
def test_random_bytes_never_crash(data):
    try:
        deserialize(data)
    except SnapshotError:
        pass


def test_serialize_rejects_unsupported_types_naming_key():
    with pytest.raises(SerializeError) as ei:
        serialize({"weird": object()})
    assert "weird" in str(ei.value)
    with pytest.raises(SerializeError) as ei:
        serialize({"f32": np.zeros(3, dtype=np.float32)})
    assert "f32" in str(ei.value)
    with pytest.raises(SerializeError):
        serialize({"b": True})
    with pytest.raises(SerializeError):
        serialize({"big": 2 ** 64})


def test_write_read_snapshot(tmp_path):
    rec = {"steps": 50, "pos": np.linspace(0, 1, 7)}
    path = tmp_path / "state.tcsnap"
    write_snapshot(rec, path)
    assert path.read_bytes() == serialize(rec)
    assert not (tmp_path / "state.tcsnap.tmp").exists()
    assert_equal_record(read_snapshot(path), rec)


def test_read_snapshot_missing_path_names_path(tmp_path):
    missing = tmp_path / "nope.tcsnap"
    with pytest.raises(SnapshotError) as ei:
        read_snapshot(missing)
    assert "nope.tcsnap" in str(ei.value)

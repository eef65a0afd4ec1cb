"""Bit-exact binary marshaling of simulation state into versioned,
checksummed snapshot streams.

Wire format (all integers and floats little-endian):

    header:  magic "TCSNAP01" (8 bytes)
             format_version   u32
             payload_length   u64
             checksum         u32  (CRC32 of payload, poly 0xEDB88320)
    payload: sequence of tagged fields
    field:   key_len u16, key bytes (UTF-8), type_code u8, value

    type codes: 1 u8 | 2 i64 | 3 f64 (raw IEEE-754 bits) | 4 f64-array
                (u64 count + raw doubles) | 5 bytes (u64 length + raw)
                | 6 nested (u64 byte length + sub-payload)

Values map to Python as: int -> i64, float -> f64, U8 -> u8,
numpy float64 array -> f64-array (flattened), bytes -> bytes,
dict -> nested.  Keys are unique within one nesting level and fields are
emitted in insertion order, so equal states serialize to identical bytes.
"""

import os
import struct
import zlib

import numpy as np

MAGIC = b"TCSNAP01"
FORMAT_VERSION = 1
SNAPSHOT_EXTENSION = ".tcsnap"

TYPE_U8 = 1
TYPE_I64 = 2
TYPE_F64 = 3
TYPE_F64_ARRAY = 4
TYPE_BYTES = 5
TYPE_NESTED = 6

_I64_MIN = -(1 << 63)
_I64_MAX = (1 << 63) - 1


class SnapshotError(Exception):
    pass


class SerializeError(SnapshotError):
    pass


class NotASnapshotError(SnapshotError):
    pass


class UnsupportedVersionError(SnapshotError):
    pass


class CorruptPayloadError(SnapshotError):
    pass


class TruncatedStreamError(SnapshotError):
    def __init__(self, offset):
        super().__init__(f"unexpected end of stream at offset {offset}")
        self.offset = offset


class U8(int):
    """Marks an int for single-byte serialization."""

    def __new__(cls, value):
        if not 0 <= int(value) <= 255:
            raise ValueError(f"u8 out of range: {value}")
        return super().__new__(cls, value)


def encode_fields(record: dict) -> bytes:
    out = bytearray()
    seen = set()
    for key, value in record.items():
        if not isinstance(key, str):
            raise SerializeError(f"field key must be str, got {type(key).__name__}")
        if key in seen:
            raise SerializeError(f"duplicate field key {key!r}")
        seen.add(key)
        kb = key.encode("utf-8")
        if len(kb) > 0xFFFF:
            raise SerializeError(f"field key too long: {key!r}")
        out += struct.pack("<H", len(kb))
        out += kb
        out += _encode_value(key, value)
    return bytes(out)


def _encode_value(key, value) -> bytes:
    if isinstance(value, U8):
        return struct.pack("<BB", TYPE_U8, int(value))
    if isinstance(value, bool):
        raise SerializeError(f"unsupported field type for key {key!r}: bool")
    if isinstance(value, int):
        if not _I64_MIN <= value <= _I64_MAX:
            raise SerializeError(f"integer out of i64 range for key {key!r}")
        return struct.pack("<Bq", TYPE_I64, value)
    if isinstance(value, float):
        return struct.pack("<Bd", TYPE_F64, value)
    if isinstance(value, np.ndarray):
        if value.dtype != np.float64:
            raise SerializeError(
                f"unsupported array dtype for key {key!r}: {value.dtype}")
        flat = np.ascontiguousarray(value).reshape(-1)
        return struct.pack("<BQ", TYPE_F64_ARRAY, flat.size) + flat.tobytes()
    if isinstance(value, (bytes, bytearray)):
        b = bytes(value)
        return struct.pack("<BQ", TYPE_BYTES, len(b)) + b
    if isinstance(value, dict):
        sub = encode_fields(value)
        return struct.pack("<BQ", TYPE_NESTED, len(sub)) + sub
    raise SerializeError(
        f"unsupported field type for key {key!r}: {type(value).__name__}")


def serialize(record: dict) -> bytes:
    payload = encode_fields(record)
    header = MAGIC + struct.pack("<IQI", FORMAT_VERSION, len(payload),
                                 zlib.crc32(payload))
    return header + payload


class _Cursor:
    __slots__ = ("data", "pos")

    def __init__(self, data, pos=0):
        self.data = data
        self.pos = pos

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedStreamError(len(self.data))
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_fields(payload: bytes) -> dict:
    cur = _Cursor(payload)
    record = {}
    while cur.pos < len(payload):
        (key_len,) = cur.unpack("<H")
        try:
            key = cur.take(key_len).decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptPayloadError(
                f"field key at offset {cur.pos - key_len} is not valid UTF-8")
        if key in record:
            raise CorruptPayloadError(f"duplicate field key {key!r}")
        (type_code,) = cur.unpack("<B")
        if type_code == TYPE_U8:
            (v,) = cur.unpack("<B")
            record[key] = U8(v)
        elif type_code == TYPE_I64:
            (v,) = cur.unpack("<q")
            record[key] = v
        elif type_code == TYPE_F64:
            (v,) = cur.unpack("<d")
            record[key] = v
        elif type_code == TYPE_F64_ARRAY:
            (count,) = cur.unpack("<Q")
            if count > (len(cur.data) - cur.pos) // 8:
                raise TruncatedStreamError(len(cur.data))
            raw = cur.take(count * 8)
            record[key] = np.frombuffer(raw, dtype="<f8").copy()
        elif type_code == TYPE_BYTES:
            (length,) = cur.unpack("<Q")
            record[key] = bytes(cur.take(length))
        elif type_code == TYPE_NESTED:
            (length,) = cur.unpack("<Q")
            record[key] = decode_fields(bytes(cur.take(length)))
        else:
            raise CorruptPayloadError(
                f"invalid type code {type_code} at offset {cur.pos - 1}")
    return record


def deserialize(data: bytes) -> dict:
    """Inverse of serialize; safe on arbitrary byte input."""
    cur = _Cursor(data)
    magic = bytes(cur.take(len(MAGIC)))
    if magic != MAGIC:
        raise NotASnapshotError("not a snapshot: bad magic")
    version, payload_length, checksum = cur.unpack("<IQI")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    payload = bytes(cur.take(payload_length))
    if cur.pos != len(data):
        raise CorruptPayloadError(
            f"{len(data) - cur.pos} trailing bytes after payload")
    if zlib.crc32(payload) != checksum:
        raise CorruptPayloadError("corrupt payload: checksum mismatch")
    return decode_fields(payload)


def write_snapshot(record: dict, path) -> None:
    """Serialize to `path` atomically (temp file + rename)."""
    data = serialize(record)
    path = os.fspath(path)
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except OSError as e:
        raise SnapshotError(f"cannot write snapshot {path}: {e}") from e


def read_snapshot(path) -> dict:
    path = os.fspath(path)
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise SnapshotError(f"cannot read snapshot {path}: {e}") from e
    return deserialize(data)

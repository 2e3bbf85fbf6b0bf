"""Binary record files.

Layout (all integers little-endian)::

    "ROFC" | version u8 | count u32 | record*

    record  := user_id str16 | kind u8 | payload
    str16   := u16 byte length | UTF-8 bytes
    bits    := u32 bit length | ceil(len/8) bytes, MSB-first within a byte

    device payload := seed bits (256) | created_at i64
    server payload := dim u32 | bits_per_component u8 | range_halfwidth f64
                      | truncation_len u32 | codec str16 | hd bits
                      | key digest (32 raw bytes) | revoked u8

Concurrent writers to one path are not supported.
"""

from __future__ import annotations

import dataclasses
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .commitment import DIGEST_BYTES, HelperData
from .errors import FormatError, VersionError
from .protocol import FORMAT_VERSION, DeviceRecord, ServerRecord
from .quantizer import QuantizerConfig

MAGIC = b"ROFC"
KIND_DEVICE = 0
KIND_SERVER = 1


def _str16(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string too long for record format")
    return struct.pack("<H", len(raw)) + raw


def _bits(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    return struct.pack("<I", bits.size) + np.packbits(bits).tobytes()


def _encode_record(rec) -> bytes:
    if isinstance(rec, DeviceRecord):
        seed_bits = np.unpackbits(np.frombuffer(rec.seed, dtype=np.uint8))
        payload = _bits(seed_bits) + struct.pack("<q", rec.created_at)
        kind = KIND_DEVICE
    elif isinstance(rec, ServerRecord):
        q = rec.quantizer
        payload = (
            struct.pack("<IBdI", rec.dim, q.bits_per_component, q.range_halfwidth, rec.truncation_len)
            + _str16(rec.helper.codec)
            + _bits(rec.helper.hd_bits)
            + rec.helper.key_digest
            + struct.pack("<B", int(rec.revoked))
        )
        kind = KIND_SERVER
    else:
        raise TypeError(f"cannot serialize {type(rec).__name__}")
    return _str16(rec.user_id) + struct.pack("<B", kind) + payload


def dumps(records) -> bytes:
    records = list(records)
    out = [MAGIC, struct.pack("<BI", FORMAT_VERSION, len(records))]
    out.extend(_encode_record(r) for r in records)
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated record file at byte {self.pos}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def str16(self) -> str:
        (n,) = self.unpack("<H")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError("invalid UTF-8 in record") from exc

    def bits(self) -> np.ndarray:
        (n,) = self.unpack("<I")
        raw = np.frombuffer(self.take((n + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw)[:n]


def _decode_record(r: _Reader):
    user_id = r.str16()
    (kind,) = r.unpack("<B")
    if kind == KIND_DEVICE:
        seed_bits = r.bits()
        if seed_bits.size % 8:
            raise FormatError("seed is not a whole number of bytes")
        (created_at,) = r.unpack("<q")
        try:
            return DeviceRecord(user_id, np.packbits(seed_bits).tobytes(), created_at)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
    if kind == KIND_SERVER:
        dim, q, halfwidth, trunc = r.unpack("<IBdI")
        codec = r.str16()
        hd_bits = r.bits()
        digest = r.take(DIGEST_BYTES)
        (revoked,) = r.unpack("<B")
        try:
            helper = HelperData(hd_bits, codec, digest)
            quantizer = QuantizerConfig(q, halfwidth)
        except ValueError as exc:
            raise FormatError(f"invalid server record: {exc}") from exc
        if trunc != hd_bits.size:
            raise FormatError("truncation length disagrees with helper data")
        return ServerRecord(user_id, helper, dim, quantizer, trunc, FORMAT_VERSION, bool(revoked))
    raise FormatError(f"unknown record kind {kind}")


def loads(data: bytes) -> list:
    r = _Reader(bytes(data))
    if r.take(len(MAGIC)) != MAGIC:
        raise FormatError("bad magic, not a record file")
    (version,) = r.unpack("<B")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"record file version {version} is not supported "
            f"(max supported version is {FORMAT_VERSION})"
        )
    (count,) = r.unpack("<I")
    records = [_decode_record(r) for _ in range(count)]
    if r.pos != len(r.data):
        raise FormatError(f"{len(r.data) - r.pos} trailing bytes after last record")
    return records


def save_records(records, path) -> None:
    """Write records atomically (temp file + rename)."""
    path = Path(path)
    data = dumps(records)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_records(path) -> list:
    return loads(Path(path).read_bytes())


class RecordStore:
    """In-memory view of one record file.

    Device records are replaced on re-enrollment. Server records are kept
    and the previous active one is flagged ``revoked``.
    """

    def __init__(self, records=()):
        self.records = list(records)

    @classmethod
    def open(cls, path) -> "RecordStore":
        path = Path(path)
        if not path.exists():
            return cls()
        return cls(load_records(path))

    def save(self, path) -> None:
        save_records(self.records, path)

    def __len__(self):
        return len(self.records)

    def device(self, user_id):
        for rec in reversed(self.records):
            if isinstance(rec, DeviceRecord) and rec.user_id == user_id:
                return rec
        return None

    def server(self, user_id):
        """The active (non-revoked) server record for ``user_id``, if any."""
        for rec in reversed(self.records):
            if isinstance(rec, ServerRecord) and rec.user_id == user_id and not rec.revoked:
                return rec
        return None

    def put_device(self, rec: DeviceRecord) -> None:
        self.records = [
            r for r in self.records if not (isinstance(r, DeviceRecord) and r.user_id == rec.user_id)
        ]
        self.records.append(rec)

    def put_server(self, rec: ServerRecord) -> None:
        updated = []
        for r in self.records:
            if isinstance(r, ServerRecord) and r.user_id == rec.user_id and not r.revoked:
                r = dataclasses.replace(r, revoked=True)
            updated.append(r)
        updated.append(rec)
        self.records = updated

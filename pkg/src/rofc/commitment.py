"""Fuzzy commitment: bind a key to a bit template via ``encode(K) XOR template``."""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

import numpy as np

from .ecc import Codec, as_bits
from .errors import DecodeFailure, LengthError, RecoverFailure

DIGEST_BYTES = 32


def pack_bits(bits) -> bytes:
    """Pack bits big-endian within each byte, zero padded at the end."""
    return np.packbits(as_bits(bits), axis=-1).tobytes()


def key_digest(key) -> bytes:
    """SHA-256 over the bit length (u32 LE) followed by the packed key bits."""
    bits = as_bits(key, what="key")
    return hashlib.sha256(len(bits).to_bytes(4, "little") + pack_bits(bits)).digest()


@dataclass(frozen=True, eq=False)
class HelperData:
    """Public output of :func:`commit`: offset bits, codec name and ``hash(K)``."""

    hd_bits: np.ndarray
    codec: str
    key_digest: bytes

    def __post_init__(self):
        bits = as_bits(self.hd_bits, what="helper data").copy()
        bits.setflags(write=False)
        object.__setattr__(self, "hd_bits", bits)
        if len(self.key_digest) != DIGEST_BYTES:
            raise LengthError(f"key digest must be {DIGEST_BYTES} bytes")
        # validates the name and that hd_bits is a codeword length for it
        self.codec_obj()

    def codec_obj(self) -> Codec:
        return Codec.from_codeword_length(self.codec, self.hd_bits.size)

    def __eq__(self, other):
        if not isinstance(other, HelperData):
            return NotImplemented
        return (
            self.codec == other.codec
            and self.key_digest == other.key_digest
            and np.array_equal(self.hd_bits, other.hd_bits)
        )

    __hash__ = None


def commit(template, key, codec: Codec) -> HelperData:
    template = as_bits(template, codec.n, "template")
    key = as_bits(key, codec.k, "key")
    return HelperData(codec.encode(key) ^ template, codec.name, key_digest(key))


def recover(query, hd: HelperData):
    """Decode ``hd_bits XOR query`` into a candidate key ``K'``.

    Returns ``(candidate, corrected_bits)``. The candidate is returned even
    if it is wrong; only :func:`verify` decides.

    Raises:
      RecoverFailure: when the codec reports an uncorrectable pattern.
    """
    codec = hd.codec_obj()
    query = as_bits(query, codec.n, "query")
    try:
        return codec.decode(hd.hd_bits ^ query)
    except DecodeFailure as exc:
        raise RecoverFailure(str(exc)) from exc


def verify(candidate, hd: HelperData) -> bool:
    codec = hd.codec_obj()
    candidate = as_bits(candidate, codec.k, "candidate key")
    return hmac.compare_digest(key_digest(candidate), hd.key_digest)


def key_digests(keys) -> list:
    """:func:`key_digest` for every row of a 2-D key batch."""
    keys = as_bits(keys, what="key batch")
    prefix = keys.shape[-1].to_bytes(4, "little")
    packed = np.packbits(keys, axis=-1)
    return [hashlib.sha256(prefix + row.tobytes()).digest() for row in packed]

"""Binary error-correcting codes for the fuzzy commitment.

Three families, addressed by a short canonical name:

``rep<m>``
    Repetition code, each message bit repeated ``m`` (odd) times and
    decoded by majority vote.
``ham74``
    Hamming(7,4), bit layout ``p1 p2 d1 p4 d2 d3 d4`` so a non-zero
    syndrome is the 1-based position of the flipped bit.
``ham74+rep<m>``
    Hamming(7,4) outer code, then every coded bit repeated ``m`` times
    contiguously (coded bit ``i`` occupies positions ``i*m .. i*m+m-1``).
    Decoding runs majority first, then the syndrome decoder.

Codecs work on uint8 arrays of 0/1 and accept a batch axis in front.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import LengthError

# rows: parity checks for p1, p2, p4 over positions 1..7
_H = np.array(
    [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)
# generator rows for d1..d4
_G = np.array(
    [
        [1, 1, 1, 0, 0, 0, 0],
        [1, 0, 0, 1, 1, 0, 0],
        [0, 1, 0, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)
_DATA_POS = np.array([2, 4, 5, 6])
_SYNDROME_WEIGHTS = np.array([1, 2, 4])


def _build_syndrome_table() -> np.ndarray:
    table = np.zeros((8, 7), dtype=np.uint8)
    for pos in range(7):
        e = np.zeros(7, dtype=np.uint8)
        e[pos] = 1
        s = int((_H @ e % 2) @ _SYNDROME_WEIGHTS)
        table[s] = e
    return table


# syndrome -> error pattern; every syndrome is correctable (perfect code)
_SYNDROME_TABLE = _build_syndrome_table()

_NAME_RE = re.compile(r"^(?:rep(?P<rep>\d+)|ham74(?:\+rep(?P<inner>\d+))?)$")


def as_bits(bits, length=None, what="bit-string") -> np.ndarray:
    """Coerce to a uint8 0/1 array, optionally checking the trailing length."""
    arr = np.asarray(bits)
    if arr.ndim == 0:
        raise LengthError(f"{what} must be a sequence of bits")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{what} may only contain 0 and 1")
    arr = arr.astype(np.uint8, copy=False)
    if length is not None and arr.shape[-1] != length:
        raise LengthError(f"{what} has length {arr.shape[-1]}, expected {length}")
    return arr


def hamming74_encode(msg: np.ndarray) -> np.ndarray:
    blocks = msg.reshape(msg.shape[:-1] + (-1, 4))
    code = (blocks.astype(np.int64) @ _G) % 2
    return code.reshape(msg.shape[:-1] + (-1,)).astype(np.uint8)


def hamming74_decode(word: np.ndarray) -> np.ndarray:
    blocks = word.reshape(word.shape[:-1] + (-1, 7))
    syndrome = ((blocks.astype(np.int64) @ _H.T) % 2) @ _SYNDROME_WEIGHTS
    fixed = blocks ^ _SYNDROME_TABLE[syndrome]
    return fixed[..., _DATA_POS].reshape(word.shape[:-1] + (-1,))


def repeat_bits(bits: np.ndarray, m: int) -> np.ndarray:
    return np.repeat(bits, m, axis=-1)


def majority(word: np.ndarray, m: int) -> np.ndarray:
    groups = word.reshape(word.shape[:-1] + (-1, m))
    return (groups.sum(axis=-1, dtype=np.int64) > m // 2).astype(np.uint8)


@dataclass(frozen=True)
class Codec:
    """A concrete code: family, repetition factor ``m`` and message length ``k``.

    ``kind`` is ``"rep"``, ``"ham74"`` or ``"concat"``; ``m`` is 1 for plain
    Hamming.
    """

    kind: str
    k: int
    m: int = 1

    def __post_init__(self):
        if self.kind not in ("rep", "ham74", "concat"):
            raise ValueError(f"unknown codec kind {self.kind!r}")
        if self.m < 1 or self.m % 2 == 0:
            raise ValueError(f"repetition factor must be odd and positive, got {self.m}")
        if self.kind == "ham74" and self.m != 1:
            raise ValueError("plain ham74 has no repetition factor")
        if self.k < 1:
            raise ValueError("message length must be positive")
        if self.kind != "rep" and self.k % 4:
            raise ValueError(f"Hamming codecs need k divisible by 4, got {self.k}")

    @classmethod
    def parse(cls, name: str, k: int) -> "Codec":
        """Build a codec from its canonical name and a message length."""
        match = _NAME_RE.match(name.strip())
        if not match:
            raise ValueError(f"unrecognised codec name {name!r}")
        if match["rep"] is not None:
            return cls("rep", k, int(match["rep"]))
        inner = match["inner"]
        if inner is None or int(inner) == 1:
            return cls("ham74", k)
        return cls("concat", k, int(inner))

    @classmethod
    def fit(cls, name: str, max_n: int) -> "Codec":
        """Largest-``k`` codec of family ``name`` whose codeword fits ``max_n`` bits."""
        unit = cls.parse(name, 4)
        per_unit = unit.n  # codeword bits per 4 message bits (or per bit for rep)
        if unit.kind == "rep":
            k = max_n // unit.m
        else:
            k = 4 * (max_n // per_unit)
        if k < 1:
            raise LengthError(f"codec {name!r} does not fit in {max_n} bits")
        return cls(unit.kind, k, unit.m)

    @classmethod
    def from_codeword_length(cls, name: str, n: int) -> "Codec":
        codec = cls.fit(name, n)
        if codec.n != n:
            raise LengthError(f"{n} is not a codeword length of {name!r}")
        return codec

    @property
    def name(self) -> str:
        if self.kind == "rep":
            return f"rep{self.m}"
        if self.kind == "ham74":
            return "ham74"
        return f"ham74+rep{self.m}"

    @property
    def n(self) -> int:
        if self.kind == "rep":
            return self.k * self.m
        return 7 * (self.k // 4) * self.m

    @property
    def radius(self) -> int:
        """Number of arbitrary bit errors that are always corrected."""
        if self.kind == "rep":
            return (self.m - 1) // 2
        if self.kind == "ham74":
            return 1
        # two inner groups must fail to break a Hamming block
        return 2 * ((self.m + 1) // 2) - 1

    def __str__(self):
        return self.name

    def encode(self, message) -> np.ndarray:
        msg = as_bits(message, self.k, "message")
        if self.kind == "rep":
            return repeat_bits(msg, self.m)
        code = hamming74_encode(msg)
        return repeat_bits(code, self.m) if self.kind == "concat" else code

    def decode(self, word):
        """Return ``(message, corrected)`` for a received word (or batch).

        ``corrected`` is the Hamming distance between the word and the
        re-encoded message, i.e. how many bits the decoder flipped.
        """
        word = as_bits(word, self.n, "codeword")
        if self.kind == "rep":
            msg = majority(word, self.m)
        elif self.kind == "ham74":
            msg = hamming74_decode(word)
        else:
            msg = hamming74_decode(majority(word, self.m))
        corrected = (self.encode(msg) ^ word).sum(axis=-1)
        if corrected.ndim == 0:
            corrected = int(corrected)
        return msg, corrected

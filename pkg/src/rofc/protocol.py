"""Enrollment and authentication across a device record and a server record.

The device keeps only the projection seed ``K_M``. The server keeps the
helper data (which embeds ``hash(K)``) plus the public parameters needed
to rebuild the template pipeline:

    feature - 0.5 -> project(seed) -> binarize -> truncate to codec.n
"""

from __future__ import annotations

import enum
import secrets
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import commitment
from .ecc import Codec, as_bits
from .errors import DimensionError, LengthError, RecoverFailure
from .quantizer import QuantizerConfig, binarize, default_reference
from .rop import SEED_BYTES, check_dim, derive_params, project

FORMAT_VERSION = 1
FEATURE_CENTER = 0.5


class FailureReason(enum.Enum):
    DECODE_FAILURE = "decode_failure"
    DIGEST_MISMATCH = "digest_mismatch"
    RECORD_MISSING = "record_missing"
    DIMENSION_MISMATCH = "dimension_mismatch"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DeviceRecord:
    user_id: str
    seed: bytes
    created_at: int = 0

    def __post_init__(self):
        if len(self.seed) != SEED_BYTES:
            raise LengthError(f"seed must be {SEED_BYTES} bytes")


@dataclass(frozen=True)
class ServerRecord:
    user_id: str
    helper: commitment.HelperData
    dim: int
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    truncation_len: int = 0
    version: int = FORMAT_VERSION
    revoked: bool = False

    def codec(self) -> Codec:
        return self.helper.codec_obj()


@dataclass(frozen=True)
class AuthDecision:
    accepted: bool
    corrected_bits: Optional[int] = None
    failure_reason: Optional[FailureReason] = None

    def __post_init__(self):
        if self.accepted and self.failure_reason is not None:
            raise ValueError("an accepted decision carries no failure reason")


def new_seed() -> bytes:
    return secrets.token_bytes(SEED_BYTES)


def generate_key(k: int) -> np.ndarray:
    """Uniform random ``k``-bit key from the OS CSPRNG."""
    raw = np.frombuffer(secrets.token_bytes((k + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw)[:k]


def _feature(x, dim=None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("a feature vector must be one-dimensional")
    check_dim(x.size)
    if dim is not None and x.size != dim:
        raise DimensionError(f"feature has dimension {x.size}, expected {dim}")
    if not np.isfinite(x).all():
        raise ValueError("feature contains non-finite values")
    return x


def cancelable_template(feature, seed: bytes, cfg: QuantizerConfig) -> np.ndarray:
    """Full bit template of ``feature`` (or a batch) under the seed's projection."""
    feature = np.asarray(feature, dtype=np.float64)
    params = derive_params(seed, feature.shape[-1])
    y = project(feature - FEATURE_CENTER, params)
    return binarize(y, cfg, reference=default_reference(params))


def enroll(
    user_id: str,
    feature,
    seed: bytes,
    key,
    codec: Codec,
    cfg: QuantizerConfig = QuantizerConfig(),
    dim: Optional[int] = None,
    created_at: Optional[int] = None,
):
    """Enroll one user and return ``(DeviceRecord, ServerRecord)``.

    Raises:
      DimensionError: odd dimension, or ``dim`` given and not matched.
      LengthError: key length differs from ``codec.k`` or the codec needs
        more bits than the template provides.
    """
    x = _feature(feature, dim)
    key = as_bits(key, codec.k, "key")
    available = cfg.output_length(x.size)
    if codec.n > available:
        raise LengthError(f"codec {codec} needs {codec.n} bits, template has {available}")
    bits = cancelable_template(x, seed, cfg)[: codec.n]
    helper = commitment.commit(bits, key, codec)
    if created_at is None:
        created_at = int(time.time())
    device = DeviceRecord(user_id, bytes(seed), int(created_at))
    server = ServerRecord(
        user_id=user_id,
        helper=helper,
        dim=x.size,
        quantizer=QuantizerConfig(cfg.bits_per_component, cfg.range_halfwidth),
        truncation_len=codec.n,
    )
    return device, server


def authenticate(query, dev: Optional[DeviceRecord], srv: Optional[ServerRecord]) -> AuthDecision:
    """Rebuild the query template and try to release the enrolled key.

    Never raises for bad input; every failure is reported as a reason.
    """
    if dev is None or srv is None or srv.revoked or dev.user_id != srv.user_id:
        return AuthDecision(False, failure_reason=FailureReason.RECORD_MISSING)
    try:
        x = _feature(query, srv.dim)
    except (DimensionError, ValueError):
        return AuthDecision(False, failure_reason=FailureReason.DIMENSION_MISMATCH)
    bits = cancelable_template(x, dev.seed, srv.quantizer)[: srv.truncation_len]
    try:
        candidate, corrected = commitment.recover(bits, srv.helper)
    except RecoverFailure:
        return AuthDecision(False, failure_reason=FailureReason.DECODE_FAILURE)
    if commitment.verify(candidate, srv.helper):
        return AuthDecision(True, corrected_bits=corrected)
    return AuthDecision(False, corrected_bits=corrected, failure_reason=FailureReason.DIGEST_MISMATCH)


def revoke_and_reissue(user_id, feature, new_seed, new_key, codec, cfg=QuantizerConfig(), **kwargs):
    """Enroll again with fresh secrets.

    Superseding the old server record is the store's job (see
    :meth:`rofc.store.RecordStore.put_server`).
    """
    return enroll(user_id, feature, new_seed, new_key, codec, cfg, **kwargs)

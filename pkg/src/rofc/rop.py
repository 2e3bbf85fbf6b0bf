"""Random orthonormal projection built from 2x2 rotation blocks.

The projection matrix is block diagonal, each block being

    [[ cos t,  sin t],
     [-sin t,  cos t]]

so applying it costs O(dim) and never needs the full matrix. Parameters
(the angles and the translation vector) are regenerated from a 32-byte
seed, which is the only thing a device has to keep.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

SEED_BYTES = 32
TWO_PI = 2.0 * math.pi
# largest double strictly below 2*pi; keeps angles in [0, 2*pi)
_MAX_ANGLE = math.nextafter(TWO_PI, 0.0)
_PARAM_DOMAIN = b"rofc/projection-params/v1"


@dataclass(frozen=True, eq=False)
class ProjectionParams:
    """Angles ``theta_1..theta_n`` and translation ``b`` for a 2n-dim projection."""

    angles: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64).reshape(-1)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if angles.size == 0:
            raise DimensionError("at least one rotation block is required")
        if translation.size != 2 * angles.size:
            raise DimensionError(
                f"translation has length {translation.size}, expected {2 * angles.size}"
            )
        angles.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "translation", translation)

    @property
    def dim(self) -> int:
        return self.translation.size

    def __eq__(self, other):
        if not isinstance(other, ProjectionParams):
            return NotImplemented
        return np.array_equal(self.angles, other.angles) and np.array_equal(
            self.translation, other.translation
        )

    __hash__ = None


def check_dim(dim) -> int:
    if isinstance(dim, bool) or int(dim) != dim:
        raise DimensionError(f"dimension must be an integer, got {dim!r}")
    dim = int(dim)
    if dim < 2 or dim % 2:
        raise DimensionError(f"dimension must be a positive even integer, got {dim}")
    return dim


def _uniform_stream(seed: bytes, dim: int, count: int) -> np.ndarray:
    """``count`` doubles in [0, 1) from SHAKE-256 keyed by (seed, dim)."""
    xof = hashlib.shake_256(_PARAM_DOMAIN + dim.to_bytes(4, "little") + seed)
    words = np.frombuffer(xof.digest(8 * count), dtype="<u8")
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


def derive_params(seed: bytes, dim: int) -> ProjectionParams:
    """Deterministically expand a 32-byte seed into projection parameters.

    Angles are uniform in [0, 2*pi) and translation components uniform in
    [0, 1). The same (seed, dim) always yields the same parameters.

    Raises:
      DimensionError: if ``dim`` is odd, zero or negative.
    """
    dim = check_dim(dim)
    seed = bytes(seed)
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
    n = dim // 2
    u = _uniform_stream(seed, dim, n + dim)
    angles = np.minimum(u[:n] * TWO_PI, _MAX_ANGLE)
    return ProjectionParams(angles=angles, translation=u[n:])


def project(x, params: ProjectionParams) -> np.ndarray:
    """Apply ``y = A x + b`` blockwise.

    ``x`` may be a single vector or a batch with the feature axis last.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] != params.dim:
        got = x.shape[-1] if x.ndim else 0
        raise DimensionError(f"feature has dimension {got}, params expect {params.dim}")
    c = np.cos(params.angles)
    s = np.sin(params.angles)
    odd = x[..., 0::2]
    even = x[..., 1::2]
    y = np.empty(np.broadcast_shapes(x.shape, (params.dim,)), dtype=np.float64)
    y[..., 0::2] = c * odd + s * even
    y[..., 1::2] = -s * odd + c * even
    y += params.translation
    return y

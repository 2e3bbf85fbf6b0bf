"""Turn projected real vectors into fixed-length bit templates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError
from .rop import ProjectionParams


@dataclass(frozen=True)
class QuantizerConfig:
    """How each component of a projected vector becomes bits.

    With ``bits_per_component == 1`` a component maps to ``1`` iff it is at
    or above its reference. With more bits, the offset from the reference is
    clamped to ``[-range_halfwidth, range_halfwidth]``, split into
    ``2**bits_per_component`` equal buckets and written as a Gray code
    (most significant bit first).

    ``reference`` of ``None`` means "use :func:`default_reference`".
    """

    bits_per_component: int = 1
    range_halfwidth: float = 0.5
    reference: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.bits_per_component) != self.bits_per_component or self.bits_per_component < 1:
            raise ValueError("bits_per_component must be a positive integer")
        if not self.range_halfwidth > 0:
            raise ValueError("range_halfwidth must be positive")

    def output_length(self, dim: int) -> int:
        return dim * self.bits_per_component


def default_reference(params: ProjectionParams) -> np.ndarray:
    """Thresholds equal to the translation, so bits are signs of ``A x``."""
    return params.translation


def gray_code(levels) -> np.ndarray:
    levels = np.asarray(levels)
    return levels ^ (levels >> 1)


def binarize(y, cfg: QuantizerConfig, reference=None) -> np.ndarray:
    """Quantize ``y`` (vector or batch, feature axis last) into uint8 bits.

    ``reference`` overrides ``cfg.reference``; one of the two must be set.
    The result has ``dim * cfg.bits_per_component`` bits per vector.
    """
    y = np.asarray(y, dtype=np.float64)
    tau = cfg.reference if reference is None else reference
    if tau is None:
        raise ValueError("no reference thresholds given")
    tau = np.asarray(tau, dtype=np.float64)
    if y.ndim == 0 or y.shape[-1] != tau.shape[-1]:
        raise DimensionError(
            f"vector has dimension {y.shape[-1] if y.ndim else 0}, "
            f"reference has {tau.shape[-1]}"
        )
    d = y - tau
    q = cfg.bits_per_component
    if q == 1:
        return (d >= 0).astype(np.uint8)

    r = cfg.range_halfwidth
    n_levels = 1 << q
    scaled = (np.clip(d, -r, r) + r) / (2 * r) * n_levels
    levels = np.minimum(np.floor(scaled).astype(np.int64), n_levels - 1)
    codes = gray_code(levels)
    shifts = np.arange(q - 1, -1, -1)
    bits = (codes[..., None] >> shifts) & 1
    return bits.reshape(d.shape[:-1] + (d.shape[-1] * q,)).astype(np.uint8)

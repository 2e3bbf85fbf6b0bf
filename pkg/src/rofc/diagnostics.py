"""Test and diagnostics helpers. Not needed on the enrollment path."""

import numpy as np

from .rop import ProjectionParams


def materialize_matrix(params: ProjectionParams) -> np.ndarray:
    """Build the dense block-diagonal rotation matrix for ``params``."""
    dim = params.dim
    a = np.zeros((dim, dim))
    c = np.cos(params.angles)
    s = np.sin(params.angles)
    i = np.arange(0, dim, 2)
    a[i, i] = c
    a[i, i + 1] = s
    a[i + 1, i] = -s
    a[i + 1, i + 1] = c
    return a

"""Deterministic pairwise summation.

The tree is fixed by the array length alone: the last axis is zero-padded to
the next power of two and adjacent pairs are added level by level. Padding
with zeros is exact, so the result of a row depends only on that row's values,
never on how many rows are reduced together or on which worker does it.
"""

from __future__ import annotations

import numpy as np


def pairwise_sum(values, axis: int = -1) -> np.ndarray | float:
    """Sum along ``axis`` with a fixed binary tree over the canonical order.

    Rounding error grows like ``log2(n)`` instead of ``n``.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim == 0:
        return float(x)
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    if n == 0:
        out = np.zeros(x.shape[:-1])
        return float(out) if out.ndim == 0 else out
    width = 1 << (n - 1).bit_length()
    if width != n:
        pad = [(0, 0)] * (x.ndim - 1) + [(0, width - n)]
        x = np.pad(x, pad)
    while x.shape[-1] > 1:
        x = x[..., 0::2] + x[..., 1::2]
    out = x[..., 0]
    return float(out) if out.ndim == 0 else out

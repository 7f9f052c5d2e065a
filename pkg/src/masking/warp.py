"""Mask map warping along optical flow.

Both warps return ``(warped, holes)``. A hole is a pixel that received no
sample: out-of-bounds neighbours contribute exactly zero, and every in-bounds
value of a floored map is at least the marker, so ``warped == 0`` is exact.
"""

import numpy as np

from src.domain.errors import ShapeMismatchError
from src.domain.models import BoolArray, FlowField, MaskMap


def _check(mask: MaskMap, flow: FlowField) -> None:
    if mask.ndim != 2 or mask.shape != flow.shape:
        raise ShapeMismatchError(f"Mask map {mask.shape} does not match flow {flow.shape}")


def _bilinear_corners(y: np.ndarray, x: np.ndarray):
    """Yield (row, col, weight) for the four bilinear neighbours of each (y, x)."""
    y0 = np.floor(y)
    x0 = np.floor(x)
    fy = y - y0
    fx = x - x0
    y0 = y0.astype(np.int64)
    x0 = x0.astype(np.int64)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            yield y0 + dy, x0 + dx, wy * wx


def backward_warp(mask: MaskMap, flow: FlowField) -> tuple[MaskMap, BoolArray]:
    """Sample `mask` at p + flow(p) with zero-padded bilinear interpolation."""
    _check(mask, flow)
    h, w = mask.shape
    rows, cols = np.indices((h, w), dtype=np.float64)
    out = np.zeros((h, w))
    for yy, xx, weight in _bilinear_corners(rows + flow.v, cols + flow.u):
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        values = mask[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)]
        out += weight * np.where(inside, values, 0.0)
    return out, out == 0.0


def forward_warp(mask: MaskMap, flow: FlowField) -> tuple[MaskMap, BoolArray]:
    """Splat every pixel to p + flow(p); collisions resolve to the weighted average."""
    _check(mask, flow)
    h, w = mask.shape
    rows, cols = np.indices((h, w), dtype=np.float64)
    weight_sum = np.zeros((h, w))
    value_sum = np.zeros((h, w))
    for yy, xx, weight in _bilinear_corners(rows + flow.v, cols + flow.u):
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w) & (weight > 0)
        np.add.at(weight_sum, (yy[inside], xx[inside]), weight[inside])
        np.add.at(value_sum, (yy[inside], xx[inside]), weight[inside] * mask[inside])
    holes = weight_sum == 0.0
    out = np.divide(value_sum, weight_sum, out=np.zeros((h, w)), where=~holes)
    return out, holes

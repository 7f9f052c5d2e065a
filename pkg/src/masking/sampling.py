"""Token-level pooling and top-k visible token selection."""

import numpy as np

from src.domain.errors import ShapeMismatchError
from src.domain.models import (
    TOKEN_SIZE,
    TUBELET,
    FloatArray,
    MaskVolume,
    SamplingLevel,
    TokenMask,
    visible_count,
)


CELLS_PER_TOKEN = TUBELET * TOKEN_SIZE * TOKEN_SIZE


def pool_tokens(volume: MaskVolume) -> FloatArray:
    """Average-pool a [T, H, W] volume with a 2x16x16 kernel.

    Each token's 512 values are gathered into one contiguous row before the
    sum, so equal blocks always reduce to bit-identical scores.
    """
    t, h, w = volume.data.shape
    if t % TUBELET or h % TOKEN_SIZE or w % TOKEN_SIZE:
        raise ShapeMismatchError(f"Volume {volume.data.shape} is not divisible by (2, 16, 16)")
    grid = (t // TUBELET, h // TOKEN_SIZE, w // TOKEN_SIZE)
    blocks = volume.data.reshape(grid[0], TUBELET, grid[1], TOKEN_SIZE, grid[2], TOKEN_SIZE)
    blocks = np.ascontiguousarray(blocks.transpose(0, 2, 4, 1, 3, 5)).reshape(*grid, CELLS_PER_TOKEN)
    return blocks.sum(axis=-1) / CELLS_PER_TOKEN


def top_k(scores: FloatArray, k: int) -> np.ndarray:
    """Flat indices of the k largest scores; ties go to the lowest index."""
    order = np.argsort(-scores.ravel(), kind="stable")
    return order[:k]


def sample_tokens(volume: MaskVolume, ratio: float, mode: SamplingLevel) -> TokenMask:
    """Mark the highest-scoring tokens visible, per slice or over the whole clip."""
    scores = pool_tokens(volume)
    slices, rows, cols = scores.shape
    per_slice = visible_count(ratio, rows * cols)
    visible = np.zeros(scores.shape, dtype=bool)
    if mode is SamplingLevel.FRAME_LEVEL:
        for s in range(slices):
            visible[s].ravel()[top_k(scores[s], per_slice)] = True
    else:
        visible.ravel()[top_k(scores, slices * per_slice)] = True
    return TokenMask(visible)

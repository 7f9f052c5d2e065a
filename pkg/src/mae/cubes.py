"""Clip <-> cube partitioning and per-cube target normalisation."""

import numpy as np

from src.domain.errors import InvalidInputError, ShapeMismatchError
from src.domain.models import CUBE_DIM, TOKEN_SIZE, TUBELET, FloatArray, TokenMask, VideoClip


# [N, 1536] flattened cubes, row-major over (slice, row, col); each cube is
# laid out as (frame-in-slice, channel, y, x).
Cubes = FloatArray


def cubify(clip: VideoClip) -> Cubes:
    """Split a clip into non-overlapping 2x16x16x3 cubes."""
    t, c, h, w = clip.frames.shape
    slices, rows, cols = clip.token_grid
    blocks = clip.frames.reshape(slices, TUBELET, c, rows, TOKEN_SIZE, cols, TOKEN_SIZE)
    return blocks.transpose(0, 3, 5, 1, 2, 4, 6).reshape(slices * rows * cols, CUBE_DIM)


def decubify(cubes: Cubes, dims: tuple[int, int, int]) -> VideoClip:
    """Reassemble cubes into a clip of `dims` = (T, H, W)."""
    t, h, w = dims
    if t % TUBELET or h % TOKEN_SIZE or w % TOKEN_SIZE:
        raise InvalidInputError(f"Clip dims {dims} are not divisible by (2, 16, 16)")
    slices, rows, cols = t // TUBELET, h // TOKEN_SIZE, w // TOKEN_SIZE
    if cubes.shape != (slices * rows * cols, CUBE_DIM):
        raise ShapeMismatchError(
            f"Expected {slices * rows * cols} cubes of {CUBE_DIM} values, got {cubes.shape}"
        )
    blocks = cubes.reshape(slices, rows, cols, TUBELET, 3, TOKEN_SIZE, TOKEN_SIZE)
    return VideoClip(blocks.transpose(0, 3, 4, 1, 5, 2, 6).reshape(t, 3, h, w))


def normalize_cubes(cubes: Cubes, eps: float) -> Cubes:
    """(C - mean) / sqrt(var + eps) per cube."""
    mean = cubes.mean(axis=-1, keepdims=True)
    var = cubes.var(axis=-1, keepdims=True)
    return (cubes - mean) / np.sqrt(var + eps)


def reconstruct_clip(clip: VideoClip, mask: TokenMask, predictions: Cubes, eps: float) -> VideoClip:
    """Visible cubes from `clip`; masked cubes from `predictions`.

    Predictions live in normalised cube space and are mapped back with each
    masked cube's own mean and variance, then clipped to [0, 1].
    """
    cubes = cubify(clip)
    if predictions.shape != cubes.shape:
        raise ShapeMismatchError(f"Expected predictions of shape {cubes.shape}, got {predictions.shape}")
    masked = mask.masked_indices
    mean = cubes[masked].mean(axis=-1, keepdims=True)
    std = np.sqrt(cubes[masked].var(axis=-1, keepdims=True) + eps)
    merged = cubes.copy()
    merged[masked] = predictions[masked] * std + mean
    return decubify(np.clip(merged, 0.0, 1.0), (clip.num_frames, clip.height, clip.width))

"""Base-frame selection and initial mask maps."""

from typing import Optional, Sequence

import numpy as np

from src.core.rng import Rng, rng_uniform_indices
from src.domain.errors import InvalidInputError
from src.domain.models import (
    EPS_MARKER,
    TOKEN_SIZE,
    BaseFrameMode,
    FloatArray,
    MaskMap,
    visible_count,
)


def choose_base_frame(num_frames: int, mode: BaseFrameMode, rng: Rng) -> int:
    """Pick the 1-based base frame: first -> 1, middle -> floor(T/2), random -> uniform."""
    if num_frames < 2:
        raise InvalidInputError(f"Need at least 2 frames, got {num_frames}")
    if mode is BaseFrameMode.FIRST:
        return 1
    if mode is BaseFrameMode.MIDDLE:
        return num_frames // 2
    return rng.integers(1, num_frames + 1)


def _check_grid(height: int, width: int) -> tuple[int, int]:
    if height <= 0 or width <= 0 or height % TOKEN_SIZE or width % TOKEN_SIZE:
        raise InvalidInputError(f"Map size must be positive multiples of 16, got {height}x{width}")
    return height // TOKEN_SIZE, width // TOKEN_SIZE


def token_center(token: int, tokens_per_row: int) -> tuple[float, float]:
    """Pixel (row, col) midpoint of a row-major token index."""
    r, c = divmod(token, tokens_per_row)
    return TOKEN_SIZE * r + 7.5, TOKEN_SIZE * c + 7.5


def mixture_density(
    rows: FloatArray,
    cols: FloatArray,
    centers: Sequence[tuple[float, float]],
    sigma: tuple[float, float],
) -> FloatArray:
    """Unnormalised Gaussian mixture evaluated on the grid rows x cols.

    `sigma` is (sigma_x, sigma_y). Returns an array of shape (len(rows), len(cols)).
    """
    sigma_x, sigma_y = sigma
    cy = np.array([c[0] for c in centers], dtype=np.float64)[:, None]
    cx = np.array([c[1] for c in centers], dtype=np.float64)[:, None]
    gy = np.exp(-((np.asarray(rows)[None, :] - cy) ** 2) / (2 * sigma_y**2))
    gx = np.exp(-((np.asarray(cols)[None, :] - cx) ** 2) / (2 * sigma_x**2))
    return gy.T @ gx


def init_mask_gmm(
    height: int,
    width: int,
    ratio: float,
    sigma: tuple[float, float],
    rng: Rng,
    centers: Optional[Sequence[int]] = None,
) -> MaskMap:
    """Mixed-Gaussian initial map centred on N_v hat random token midpoints.

    `centers` may name the token indices explicitly instead of drawing them.
    """
    h_tokens, w_tokens = _check_grid(height, width)
    n_visible = visible_count(ratio, h_tokens * w_tokens)
    if n_visible == 0:
        raise InvalidInputError(
            f"Ratio {ratio} leaves no visible token on a {h_tokens}x{w_tokens} grid"
        )
    if centers is None:
        centers = rng_uniform_indices(rng, h_tokens * w_tokens, n_visible)
    points = [token_center(int(t), w_tokens) for t in centers]
    density = mixture_density(
        np.arange(height, dtype=np.float64),
        np.arange(width, dtype=np.float64),
        points,
        sigma,
    )
    return np.maximum(density, EPS_MARKER)


def init_mask_binary(
    height: int,
    width: int,
    ratio: float,
    level: str,
    rng: Rng,
) -> MaskMap:
    """Binary random initial map at token or pixel granularity (zeros lifted to the marker)."""
    h_tokens, w_tokens = _check_grid(height, width)
    mask = np.full((height, width), EPS_MARKER)
    if level == "token":
        count = visible_count(ratio, h_tokens * w_tokens)
        for token in rng_uniform_indices(rng, h_tokens * w_tokens, count):
            r, c = divmod(token, w_tokens)
            mask[r * TOKEN_SIZE : (r + 1) * TOKEN_SIZE, c * TOKEN_SIZE : (c + 1) * TOKEN_SIZE] = 1.0
    elif level == "pixel":
        count = visible_count(ratio, height * width)
        mask.ravel()[rng_uniform_indices(rng, height * width, count)] = 1.0
    else:
        raise InvalidInputError(f"Binary init level must be 'token' or 'pixel', got {level!r}")
    return mask

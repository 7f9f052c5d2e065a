"""Pyramidal Horn-Schunck optical flow.

Coarse-to-fine: each level is initialised with the upsampled flow of the level
below, the destination frame is warped towards the source with that flow, and
the increment is solved with Jacobi fixed-point iterations on the linearised
brightness constancy + smoothness energy.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy import ndimage

from src.domain.errors import InvalidInputError, ShapeMismatchError
from src.domain.models import FloatArray, FlowField


logger = logging.getLogger(__name__)

# Weighted neighbourhood average of the classical Horn-Schunck scheme.
HS_KERNEL = np.array(
    [
        [1 / 12, 1 / 6, 1 / 12],
        [1 / 6, 0.0, 1 / 6],
        [1 / 12, 1 / 6, 1 / 12],
    ]
)

# Intensities are solved on a 0..255 scale so alpha keeps its usual meaning.
INTENSITY_SCALE = 255.0


# Largest reliable per-frame displacement, as a share of the shorter side.
CAPTURE_FRACTION = 1 / 16


def capture_range(height: int, width: int) -> float:
    """Per-frame displacement (px) the default pyramid recovers on this canvas.

    64x64 covers 4 px, 128x128 covers 8 px. Larger motion on a small canvas
    leaves too few coarse pixels to lock onto.
    """
    return min(height, width) * CAPTURE_FRACTION


@dataclass(frozen=True)
class HornSchunckConfig:
    """Estimator parameters."""

    levels: int = 4
    downscale: int = 2
    iterations: int = 100
    alpha: float = 15.0
    warps: int = 2
    presmooth: float = 1.0
    min_size: int = 8

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise InvalidInputError(f"Pyramid levels must be >= 1, got {self.levels}")
        if self.downscale < 2:
            raise InvalidInputError(f"Downscale factor must be >= 2, got {self.downscale}")
        if self.iterations < 1 or self.warps < 1:
            raise InvalidInputError("Iterations and warps must be >= 1")
        if self.alpha <= 0:
            raise InvalidInputError(f"Smoothness weight must be > 0, got {self.alpha}")
        if self.presmooth < 0:
            raise InvalidInputError("Pre-smoothing sigma must be >= 0")

    def coarsest_shape(self, height: int, width: int) -> tuple[int, int]:
        factor = self.downscale ** (self.levels - 1)
        return height // factor, width // factor


def to_gray(frame: FloatArray) -> FloatArray:
    """Channel-mean grayscale of a [3, H, W] frame."""
    return frame.mean(axis=0)


def warp_image(image: FloatArray, u: FloatArray, v: FloatArray) -> FloatArray:
    """Sample `image` at p + (u, v) with bilinear weights and replicated edges."""
    rows, cols = np.indices(image.shape, dtype=np.float64)
    return ndimage.map_coordinates(image, [rows + v, cols + u], order=1, mode="nearest")


def _downsample(image: FloatArray, factor: int) -> FloatArray:
    h, w = image.shape[0] // factor, image.shape[1] // factor
    cropped = image[: h * factor, : w * factor]
    return cropped.reshape(h, factor, w, factor).mean(axis=(1, 3))


def _resize_flow(
    u: FloatArray, v: FloatArray, shape: tuple[int, int]
) -> tuple[FloatArray, FloatArray]:
    """Resample a coarse flow onto a finer grid, rescaling the vectors."""
    sy = shape[0] / u.shape[0]
    sx = shape[1] / u.shape[1]
    rows, cols = np.indices(shape, dtype=np.float64)
    coords = [(rows + 0.5) / sy - 0.5, (cols + 0.5) / sx - 0.5]
    u_fine = ndimage.map_coordinates(u, coords, order=1, mode="nearest") * sx
    v_fine = ndimage.map_coordinates(v, coords, order=1, mode="nearest") * sy
    return u_fine, v_fine


def _solve_level(
    src: FloatArray,
    dst: FloatArray,
    u: FloatArray,
    v: FloatArray,
    cfg: HornSchunckConfig,
) -> tuple[FloatArray, FloatArray]:
    alpha2 = cfg.alpha**2
    grad_src_y, grad_src_x = np.gradient(src)
    for _ in range(cfg.warps):
        warped = warp_image(dst, u, v)
        grad_w_y, grad_w_x = np.gradient(warped)
        ix = 0.5 * (grad_src_x + grad_w_x)
        iy = 0.5 * (grad_src_y + grad_w_y)
        it = warped - src
        denom = alpha2 + ix**2 + iy**2
        u0, v0 = u, v
        for _ in range(cfg.iterations):
            u_bar = ndimage.convolve(u, HS_KERNEL, mode="nearest")
            v_bar = ndimage.convolve(v, HS_KERNEL, mode="nearest")
            residual = (it + ix * (u_bar - u0) + iy * (v_bar - v0)) / denom
            u = u_bar - ix * residual
            v = v_bar - iy * residual
    return u, v


def estimate_flow(
    src: FloatArray,
    dst: FloatArray,
    cfg: HornSchunckConfig = HornSchunckConfig(),
) -> FlowField:
    """Estimate the flow from `src` to `dst` (both [3, H, W])."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 3 or src.shape[0] != 3:
        raise ShapeMismatchError(f"Frames must share a [3, H, W] shape, got {src.shape} and {dst.shape}")
    height, width = src.shape[1:]
    coarse_h, coarse_w = cfg.coarsest_shape(height, width)
    if min(coarse_h, coarse_w) < cfg.min_size:
        raise InvalidInputError(
            f"{cfg.levels} pyramid levels on {height}x{width} leave a "
            f"{coarse_h}x{coarse_w} coarsest level (< {cfg.min_size})"
        )

    gray_src = to_gray(src) * INTENSITY_SCALE
    gray_dst = to_gray(dst) * INTENSITY_SCALE
    if np.ptp(gray_src) == 0 and np.ptp(gray_dst) == 0:
        return FlowField.zeros(height, width)
    if cfg.presmooth > 0:
        gray_src = ndimage.gaussian_filter(gray_src, cfg.presmooth, mode="nearest")
        gray_dst = ndimage.gaussian_filter(gray_dst, cfg.presmooth, mode="nearest")

    pyramid = [(gray_src, gray_dst)]
    for _ in range(cfg.levels - 1):
        s, d = pyramid[-1]
        pyramid.append((_downsample(s, cfg.downscale), _downsample(d, cfg.downscale)))

    u = np.zeros(pyramid[-1][0].shape)
    v = np.zeros_like(u)
    for level in range(cfg.levels - 1, -1, -1):
        s, d = pyramid[level]
        if u.shape != s.shape:
            u, v = _resize_flow(u, v, s.shape)
        u, v = _solve_level(s, d, u, v, cfg)
        logger.debug(f"Level {level} ({s.shape[0]}x{s.shape[1]}): mean |flow| {np.hypot(u, v).mean():.4f}")

    return FlowField(np.stack([u, v]))


def endpoint_error(estimated: FlowField, truth: FlowField, margin: int = 0) -> float:
    """Mean endpoint error over the interior that excludes `margin` border pixels."""
    if estimated.shape != truth.shape:
        raise ShapeMismatchError(f"Flow shapes differ: {estimated.shape} vs {truth.shape}")
    h, w = estimated.shape
    if 2 * margin >= min(h, w):
        raise InvalidInputError(f"Margin {margin} leaves no interior in {h}x{w}")
    diff = estimated.data - truth.data
    epe = np.hypot(diff[0], diff[1])
    return float(epe[margin : h - margin, margin : w - margin].mean())

"""Progressive construction of the masking volume around the base frame."""

from typing import Optional
import logging

import numpy as np

from src.core.rng import Rng
from src.domain.errors import InvalidInputError, ShapeMismatchError
from src.domain.models import (
    EPS_MARKER,
    FlowField,
    FlowSet,
    MaskConfig,
    MaskInit,
    MaskMap,
    MaskVolume,
    WarpDirection,
)
from src.masking.fill import FillContext, fill_holes
from src.masking.init_maps import init_mask_binary, init_mask_gmm
from src.masking.warp import backward_warp, forward_warp


logger = logging.getLogger(__name__)

# Child stream keys under the volume stream.
INIT_STREAM = 0
FILL_STREAM = 1
NOISE_STREAM = 2


def initial_map(height: int, width: int, cfg: MaskConfig, rng: Rng) -> MaskMap:
    """Initial base-frame map for the configured initialisation."""
    if cfg.init is MaskInit.GMM:
        return init_mask_gmm(height, width, cfg.ratio, cfg.sigma, rng)
    level = "token" if cfg.init is MaskInit.TOKEN_RANDOM else "pixel"
    return init_mask_binary(height, width, cfg.ratio, level, rng)


def _propagate(source: MaskMap, flow: FlowField, direction: WarpDirection):
    if direction is WarpDirection.BACKWARD:
        return backward_warp(source, flow)
    # The stored field points towards the base; splatting outward uses its negation.
    return forward_warp(source, FlowField(-flow.data))


def build_mask_volume(
    num_frames: int,
    height: int,
    width: int,
    flows: FlowSet,
    cfg: MaskConfig,
    rng: Rng,
    initial: Optional[MaskMap] = None,
) -> MaskVolume:
    """Warp the base map outward frame by frame, filling holes after each step.

    Frame i < b is built from frame i+1 with the flow i -> i+1, frame i > b
    from frame i-1 with the flow i -> i-1. Frame b is the initial map itself.
    """
    if flows.num_frames != num_frames:
        raise InvalidInputError(
            f"FlowSet covers {flows.num_frames} frames, clip has {num_frames}"
        )
    if flows.shape is not None and flows.shape != (height, width):
        raise ShapeMismatchError(
            f"Flows are {flows.shape[0]}x{flows.shape[1]}, clip is {height}x{width}"
        )
    base = flows.base_index
    if initial is None:
        initial = initial_map(height, width, cfg, rng.split(INIT_STREAM))
    elif initial.shape != (height, width):
        raise ShapeMismatchError(f"Initial map is {initial.shape}, clip is {height}x{width}")
    if np.min(initial) < EPS_MARKER:
        raise InvalidInputError("Initial map values must be floored at the hole marker")

    volume = np.empty((num_frames, height, width))
    volume[base - 1] = initial

    order = list(range(base - 1, 0, -1)) + list(range(base + 1, num_frames + 1))
    for frame in order:
        neighbour = flows.target(frame)
        source = volume[neighbour - 1]
        warped, holes = _propagate(source, flows.field_for(frame), cfg.warp)
        context = FillContext(
            base_map=volume[base - 1],
            ratio=cfg.ratio,
            rng=rng.split(FILL_STREAM, frame),
            previous_map=None if neighbour == base else source,
        )
        volume[frame - 1] = fill_holes(warped, holes, cfg.fill, context)
        logger.debug(f"Frame {frame} from {neighbour}: {int(holes.sum())} hole pixels")

    if cfg.noise_std > 0 and num_frames > 1:
        _expose(volume, base, cfg.noise_std, rng.split(NOISE_STREAM))

    return MaskVolume(volume, base_index=base)


def _expose(volume: np.ndarray, base: int, std: float, rng: Rng) -> None:
    """Perturb one non-base frame with Gaussian noise, clamped at the marker."""
    candidates = [i for i in range(1, volume.shape[0] + 1) if i != base]
    frame = candidates[rng.integers(0, len(candidates))]
    noisy = volume[frame - 1] + rng.normal(volume.shape[1:], std)
    volume[frame - 1] = np.maximum(noisy, EPS_MARKER)
    logger.debug(f"Added noise (std {std}) to frame {frame}")

"""Strategy dispatch: tube, random and motion-guided token masks."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.rng import Rng
from src.domain.errors import InvalidInputError, MissingFlowError
from src.domain.models import (
    FlowSet,
    MaskConfig,
    MaskStrategy,
    MaskVolume,
    SamplingLevel,
    TokenMask,
    VideoClip,
    visible_count,
)
from src.masking.init_maps import choose_base_frame
from src.masking.sampling import sample_tokens
from src.masking.volume import build_mask_volume


# Stream keys under a clip's Rng. The base frame stream is shared with callers
# that must build a FlowSet before generating.
BASE_STREAM = 0
TUBE_STREAM = 1
RANDOM_STREAM = 2
VOLUME_STREAM = 3


@dataclass(frozen=True)
class MaskResult:
    """A token mask plus the volume and flows it came from (motion-guided only)."""

    mask: TokenMask
    volume: Optional[MaskVolume] = None
    flows: Optional[FlowSet] = None

    @property
    def base_index(self) -> Optional[int]:
        return self.volume.base_index if self.volume is not None else None


def resolve_base_frame(num_frames: int, cfg: MaskConfig, rng: Rng) -> int:
    """Base frame generate() will use for this clip stream."""
    return choose_base_frame(num_frames, cfg.base_frame, rng.split(BASE_STREAM))


def tube_mask(grid: tuple[int, int, int], ratio: float, rng: Rng) -> TokenMask:
    """One random spatial pattern replicated over every temporal slice."""
    slices, rows, cols = grid
    pattern = np.zeros(rows * cols, dtype=bool)
    pattern[rng.uniform_indices(rows * cols, visible_count(ratio, rows * cols))] = True
    return TokenMask(np.broadcast_to(pattern.reshape(rows, cols), grid))


def random_mask(
    grid: tuple[int, int, int], ratio: float, mode: SamplingLevel, rng: Rng
) -> TokenMask:
    """Uniformly random visible tokens, per slice or over the whole clip."""
    slices, rows, cols = grid
    per_slice = visible_count(ratio, rows * cols)
    visible = np.zeros(grid, dtype=bool)
    if mode is SamplingLevel.FRAME_LEVEL:
        for s in range(slices):
            visible[s].ravel()[rng.split(s).uniform_indices(rows * cols, per_slice)] = True
    else:
        visible.ravel()[rng.uniform_indices(visible.size, slices * per_slice)] = True
    return TokenMask(visible)


def generate_with_volume(
    clip: VideoClip,
    flows: Optional[FlowSet],
    cfg: MaskConfig,
    rng: Rng,
) -> MaskResult:
    """Generate a token mask for `clip`, keeping the motion-guided volume."""
    grid = clip.token_grid
    if cfg.strategy is MaskStrategy.TUBE:
        return MaskResult(tube_mask(grid, cfg.ratio, rng.split(TUBE_STREAM)))
    if cfg.strategy is MaskStrategy.RANDOM:
        return MaskResult(random_mask(grid, cfg.ratio, cfg.sample, rng.split(RANDOM_STREAM)))

    if flows is None:
        raise MissingFlowError("motion_guided masking needs a flow set")
    base = resolve_base_frame(clip.num_frames, cfg, rng)
    if flows.base_index != base:
        raise InvalidInputError(
            f"FlowSet is built around frame {flows.base_index}, configuration selects frame {base}"
        )
    volume = build_mask_volume(
        clip.num_frames,
        clip.height,
        clip.width,
        flows,
        cfg,
        rng.split(VOLUME_STREAM),
    )
    return MaskResult(sample_tokens(volume, cfg.ratio, cfg.sample), volume, flows)


def generate(
    clip: VideoClip,
    flows: Optional[FlowSet],
    cfg: MaskConfig,
    rng: Rng,
) -> TokenMask:
    """Generate a token mask for `clip` with the configured strategy.

    With all-zero flows a motion_guided mask is constant across slices like a
    tube mask, but the two are not the same mask: the GMM centres and the tube
    pattern come from different streams of `rng`, and top-k over the pooled
    GMM map only reproduces the centre tokens when centres lie at least three
    sigma apart.
    """
    return generate_with_volume(clip, flows, cfg, rng).mask

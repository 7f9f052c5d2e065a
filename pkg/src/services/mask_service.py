"""Mask generation service: flow acquisition plus strategy dispatch."""

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence
import logging

from src.core.rng import Rng
from src.domain.errors import InvalidInputError, MissingFlowError
from src.domain.models import FlowSet, MaskConfig, MaskStrategy, TokenMask, VideoClip
from src.domain.protocols import FlowSource
from src.flow.flow_set import build_flow_set
from src.masking.strategies import MaskResult, generate_with_volume, resolve_base_frame


logger = logging.getLogger(__name__)


class MaskService:
    """Generates token masks, fetching flows from a FlowSource when needed."""

    def __init__(self, flow_source: Optional[FlowSource] = None, max_workers: int = 1) -> None:
        """Initialize mask service.

        Args:
            flow_source: Default source of flows for motion-guided masking
            max_workers: Threads used to collect the flows of one clip
        """
        self._flow_source = flow_source
        self._max_workers = max_workers

    @staticmethod
    def clip_rng(cfg: MaskConfig, clip_index: int = 0, step: Optional[int] = None) -> Rng:
        """Stream for one clip (and optionally one training step)."""
        rng = Rng(cfg.seed).split(clip_index)
        return rng if step is None else rng.split(step)

    def flows_for(
        self,
        clip: VideoClip,
        cfg: MaskConfig,
        rng: Rng,
        flow_source: Optional[FlowSource] = None,
    ) -> FlowSet:
        """Build the flow set around the base frame `cfg` selects for this stream."""
        source = flow_source or self._flow_source
        if source is None:
            raise MissingFlowError("motion_guided masking needs flows but no flow source is configured")
        base = resolve_base_frame(clip.num_frames, cfg, rng)
        return build_flow_set(clip, base, source, self._max_workers)

    def generate_result(
        self,
        clip: VideoClip,
        cfg: MaskConfig,
        flows: Optional[FlowSet] = None,
        clip_index: int = 0,
        step: Optional[int] = None,
        flow_source: Optional[FlowSource] = None,
    ) -> MaskResult:
        """Generate a mask and keep the volume it came from."""
        rng = self.clip_rng(cfg, clip_index, step)
        if cfg.strategy is MaskStrategy.MOTION_GUIDED and flows is None:
            flows = self.flows_for(clip, cfg, rng, flow_source)
        result = generate_with_volume(clip, flows, cfg, rng)
        logger.debug(
            f"Clip {clip_index}: {cfg.strategy.value} mask with "
            f"{result.mask.num_visible}/{result.mask.num_tokens} visible tokens"
        )
        return result

    def generate(
        self,
        clip: VideoClip,
        flows: Optional[FlowSet],
        cfg: MaskConfig,
        clip_index: int = 0,
        step: Optional[int] = None,
    ) -> TokenMask:
        """Generate a token mask for one clip."""
        return self.generate_result(clip, cfg, flows, clip_index, step).mask

    def generate_batch(
        self,
        clips: Sequence[VideoClip],
        cfg: MaskConfig,
        flows: Optional[Sequence[Optional[FlowSet]]] = None,
        jobs: int = 1,
    ) -> list[MaskResult]:
        """Generate masks for many clips; clip i always uses stream i."""
        flow_list = list(flows) if flows is not None else [None] * len(clips)
        if len(flow_list) != len(clips):
            raise InvalidInputError(f"Got {len(flow_list)} flow sets for {len(clips)} clips")

        def run(index: int) -> MaskResult:
            return self.generate_result(clips[index], cfg, flow_list[index], clip_index=index)

        if jobs > 1 and len(clips) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run, range(len(clips))))
        else:
            results = [run(i) for i in range(len(clips))]
        logger.info(f"Generated {len(results)} {cfg.strategy.value} masks")
        return results

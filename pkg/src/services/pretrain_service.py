"""Toy MAE pre-training with masks drawn fresh every step."""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

from src.domain.errors import InvalidInputError
from src.domain.models import FlowSet, MaeConfig, MaskConfig, MaskStrategy, TokenMask, VideoClip
from src.domain.protocols import FlowSource
from src.mae.model import ToyMAE
from src.mae.trainer import TrainingHistory, train
from src.masking.strategies import resolve_base_frame
from src.services.mask_service import MaskService


logger = logging.getLogger(__name__)


@dataclass
class PretrainResult:
    """Trained model and its loss curve."""

    model: ToyMAE
    history: TrainingHistory


class PretrainService:
    """Service for running toy pre-training on a set of clips."""

    def __init__(self, mask_service: MaskService) -> None:
        self._mask_service = mask_service

    def pretrain(
        self,
        clips: Sequence[VideoClip],
        mask_config: MaskConfig,
        mae_config: MaeConfig,
        flow_sources: Optional[Sequence[Optional[FlowSource]]] = None,
        model: Optional[ToyMAE] = None,
    ) -> PretrainResult:
        """Train a ToyMAE on `clips`.

        Args:
            clips: Training clips
            mask_config: Masking strategy; its seed drives every mask
            mae_config: Model and optimiser settings
            flow_sources: Optional per-clip flow sources for motion-guided masking;
                entries that are None fall back to the service's default source
            model: Continue training this model instead of a fresh one
        """
        if not clips:
            raise InvalidInputError("Pre-training needs at least one clip")
        sources = list(flow_sources) if flow_sources is not None else [None] * len(clips)
        if len(sources) != len(clips):
            raise InvalidInputError(f"Got {len(sources)} flow sources for {len(clips)} clips")

        flow_cache: dict[tuple[int, int], FlowSet] = {}

        def masks(index: int, step: int) -> TokenMask:
            clip = clips[index]
            if mask_config.strategy is not MaskStrategy.MOTION_GUIDED:
                return self._mask_service.generate(clip, None, mask_config, index, step)
            rng = MaskService.clip_rng(mask_config, index, step)
            base = resolve_base_frame(clip.num_frames, mask_config, rng)
            if (index, base) not in flow_cache:
                flow_cache[(index, base)] = self._mask_service.flows_for(
                    clip, mask_config, rng, sources[index]
                )
            return self._mask_service.generate(clip, flow_cache[(index, base)], mask_config, index, step)

        if mask_config.strategy is MaskStrategy.MOTION_GUIDED:
            # Surface missing flows before any training happens.
            for index in range(len(clips)):
                masks(index, 0)

        model = model or ToyMAE(mae_config)
        logger.info(
            f"Pre-training on {len(clips)} clips with {mask_config.strategy.value} masks "
            f"({model.num_parameters()} parameters)"
        )
        history = train(model, clips, masks)
        return PretrainResult(model=model, history=history)

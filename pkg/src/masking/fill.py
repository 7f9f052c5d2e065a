"""Hole filling after a warp step."""

from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from src.core.rng import Rng
from src.domain.errors import ShapeMismatchError
from src.domain.models import EPS_MARKER, BoolArray, HoleFill, MaskMap


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FillContext:
    """What a fill strategy may draw on: the base map, the last map, the ratio and a stream."""

    base_map: MaskMap
    ratio: float
    rng: Rng
    previous_map: Optional[MaskMap] = None


def fill_holes(
    warped: MaskMap,
    holes: BoolArray,
    strategy: HoleFill,
    context: FillContext,
) -> MaskMap:
    """Return a copy of `warped` with every hole pixel replaced per `strategy`."""
    if warped.shape != holes.shape or warped.shape != context.base_map.shape:
        raise ShapeMismatchError(
            f"Fill inputs disagree: map {warped.shape}, holes {holes.shape}, "
            f"base {context.base_map.shape}"
        )
    out = np.array(warped, dtype=np.float64, copy=True)
    if not holes.any():
        return out

    if strategy is HoleFill.PREVIOUS_MAP and context.previous_map is None:
        logger.warning("previous_map fill has no earlier map on the first warp step, using tube fill")
        strategy = HoleFill.TUBE

    if strategy is HoleFill.TUBE:
        out[holes] = context.base_map[holes]
    elif strategy is HoleFill.PREVIOUS_MAP:
        out[holes] = context.previous_map[holes]
    elif strategy is HoleFill.VISIBLE:
        out[holes] = 1.0
    elif strategy is HoleFill.INVISIBLE:
        out[holes] = EPS_MARKER
    elif strategy is HoleFill.RANDOM:
        draws = context.rng.bernoulli(1.0 - context.ratio, int(holes.sum()))
        out[holes] = np.where(draws, 1.0, EPS_MARKER)
    return out

"""Central finite-difference check of ToyMAE gradients."""

from typing import Optional
import logging

import numpy as np

from src.core.rng import Rng
from src.domain.models import TokenMask, VideoClip
from src.mae.model import ToyMAE


logger = logging.getLogger(__name__)


def gradient_check(
    model: ToyMAE,
    clip: VideoClip,
    mask: TokenMask,
    step: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
    floor: float = 1e-6,
) -> dict[str, float]:
    """Relative error between analytic and numeric gradients, per parameter.

    Each checked entry scores |a - n| / max(|a|, |n|, floor); a parameter
    reports its worst entry. `floor` keeps near-zero entries from turning
    round-off into large ratios. `max_entries` samples that many entries per
    parameter instead of checking every one.
    """
    _, analytic = model.loss_and_gradients(clip, mask)
    rng = Rng(seed)
    errors: dict[str, float] = {}
    for index, (name, values) in enumerate(model.params.items()):
        flat = values.reshape(-1)
        if max_entries is None or max_entries >= flat.size:
            entries = range(flat.size)
        else:
            entries = sorted(rng.split(index).uniform_indices(flat.size, max_entries))
        numeric = []
        expected = []
        for entry in entries:
            original = flat[entry]
            flat[entry] = original + step
            plus = model.forward(clip, mask).loss
            flat[entry] = original - step
            minus = model.forward(clip, mask).loss
            flat[entry] = original
            numeric.append((plus - minus) / (2 * step))
            expected.append(analytic[name].reshape(-1)[entry])
        numeric_arr = np.array(numeric)
        expected_arr = np.array(expected)
        scale = np.maximum(np.maximum(np.abs(numeric_arr), np.abs(expected_arr)), floor)
        errors[name] = float((np.abs(numeric_arr - expected_arr) / scale).max())
        logger.debug(f"{name}: relative error {errors[name]:.3e} over {len(numeric)} entries")
    return errors

"""SGD training loop for ToyMAE."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence
import logging
import math

from src.domain.errors import InvalidInputError, TrainingDivergedError
from src.domain.models import TokenMask, VideoClip
from src.mae.model import ToyMAE


logger = logging.getLogger(__name__)

# (clip index, step) -> fresh token mask for that clip at that step.
MaskProvider = Callable[[int, int], TokenMask]


@dataclass
class TrainingHistory:
    """Per-step mean batch loss, measured before the step's update."""

    losses: list[float] = field(default_factory=list)

    def tail_mean(self, fraction: float = 0.2) -> float:
        """Mean loss over the final `fraction` of steps."""
        if not self.losses:
            raise InvalidInputError("No losses recorded")
        count = max(1, int(math.ceil(len(self.losses) * fraction)))
        tail = self.losses[-count:]
        return sum(tail) / len(tail)

    @property
    def final_loss(self) -> Optional[float]:
        return self.losses[-1] if self.losses else None


def batch_indices(step: int, batch_size: int, dataset_size: int) -> list[int]:
    """Clips used at `step`, cycling through the dataset in order."""
    start = step * batch_size
    return [(start + j) % dataset_size for j in range(batch_size)]


def train(
    model: ToyMAE,
    clips: Sequence[VideoClip],
    masks: MaskProvider,
    steps: Optional[int] = None,
    learning_rate: Optional[float] = None,
    batch_size: Optional[int] = None,
) -> TrainingHistory:
    """Run plain SGD, drawing a new mask per clip per step."""
    if not clips:
        raise InvalidInputError("Training needs at least one clip")
    steps = model.config.steps if steps is None else steps
    learning_rate = model.config.learning_rate if learning_rate is None else learning_rate
    batch_size = model.config.batch_size if batch_size is None else batch_size

    history = TrainingHistory()
    last_finite: Optional[int] = None
    for step in range(steps):
        total = 0.0
        summed: dict = {}
        indices = batch_indices(step, batch_size, len(clips))
        for index in indices:
            loss, grads = model.loss_and_gradients(clips[index], masks(index, step))
            total += loss
            for name, grad in grads.items():
                summed[name] = summed[name] + grad if name in summed else grad
        loss = total / len(indices)
        if not math.isfinite(loss):
            logger.error(f"Loss diverged at step {step} (last finite step: {last_finite})")
            raise TrainingDivergedError(step, last_finite)
        history.losses.append(loss)
        last_finite = step
        model.apply_gradients({k: v / len(indices) for k, v in summed.items()}, learning_rate)
        logger.debug(f"Step {step}: loss {loss:.6f}")

    if history.losses:
        logger.info(f"Trained {steps} steps, final loss {history.losses[-1]:.6f}")
    return history

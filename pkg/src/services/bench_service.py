"""Leakage benchmark: every strategy on identical synthetic clips and seeds."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence
import logging
import math

import numpy as np

from src.core.rng import Rng
from src.domain.errors import InvalidInputError
from src.domain.models import (
    TOKEN_SIZE,
    LeakageReport,
    MaeConfig,
    MaskConfig,
    SceneSpec,
    ScenePattern,
    StrategyRun,
    StrategySummary,
)
from src.mae.model import ToyMAE
from src.mae.trainer import train
from src.services.mask_service import MaskService
from src.synth.leakage import leakage_rate
from src.synth.scenes import Scene


logger = logging.getLogger(__name__)

# Fraction of the loss curve averaged into a run's final loss.
LOSS_TAIL = 0.2


@dataclass(frozen=True)
class BenchTask:
    """Everything one worker needs to evaluate one seed."""

    spec: SceneSpec
    configs: tuple[MaskConfig, ...]
    seed: int
    horizon: int = 1
    margin: int = 0
    train_steps: int = 0
    mae_config: Optional[MaeConfig] = None


def evaluate_seed(task: BenchTask) -> list[StrategyRun]:
    """Run every strategy on the scene generated for `task.seed`."""
    scene = Scene(task.spec, Rng(task.spec.texture_seed).split(task.seed))
    truth = scene.flow_set()
    service = MaskService(scene.flow_source())
    runs = []
    for cfg in task.configs:
        cfg = replace(cfg, seed=task.seed)
        mask = service.generate(scene.clip, None, cfg)
        leakage = leakage_rate(mask, truth, task.horizon, task.margin)
        final_loss = None
        if task.train_steps > 0:
            mae_config = replace(task.mae_config or MaeConfig(), seed=task.seed, steps=task.train_steps)
            model = ToyMAE(mae_config)
            history = train(
                model,
                [scene.clip],
                lambda index, step: service.generate(scene.clip, None, cfg, index, step),
            )
            final_loss = history.tail_mean(LOSS_TAIL)
        runs.append(StrategyRun(cfg.strategy.value, task.seed, leakage, final_loss))
    return runs


def _spread(values: Sequence[float]) -> tuple[float, float]:
    """Median and interquartile range."""
    q25, q50, q75 = np.percentile(np.asarray(values, dtype=np.float64), [25, 50, 75])
    return float(q50), float(q75 - q25)


def summarize(runs: Sequence[StrategyRun], strategies: Sequence[str]) -> list[StrategySummary]:
    """Aggregate runs per strategy; runs are sorted by seed first."""
    summaries = []
    for name in strategies:
        mine = sorted((r for r in runs if r.strategy == name), key=lambda r: r.seed)
        if not mine:
            continue
        rates = [r.leakage.rate for r in mine]
        median, iqr = _spread(rates)
        losses = [r.final_loss for r in mine if r.final_loss is not None]
        median_loss, loss_iqr = _spread(losses) if losses else (None, None)
        summaries.append(
            StrategySummary(
                strategy=name,
                median_rate=median,
                iqr=iqr,
                n_seeds=len(mine),
                masked_count=sum(r.leakage.masked for r in mine),
                rates=rates,
                median_loss=median_loss,
                loss_iqr=loss_iqr,
            )
        )
    return summaries


class BenchService:
    """Service for comparing masking strategies on synthetic motion."""

    def __init__(self, jobs: int = 1) -> None:
        self._jobs = jobs

    def compare_strategies(
        self,
        spec: SceneSpec,
        configs: Sequence[MaskConfig],
        seeds: Sequence[int],
        horizon: int = 1,
        margin: int = 0,
        train_steps: int = 0,
        mae_config: Optional[MaeConfig] = None,
    ) -> LeakageReport:
        """Leakage (and optionally final training loss) per strategy over `seeds`."""
        if not seeds:
            raise InvalidInputError("compare_strategies needs at least one seed")
        if not configs:
            raise InvalidInputError("compare_strategies needs at least one mask configuration")
        names = [c.strategy.value for c in configs]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"Strategies must be distinct, got {names}")

        tasks = [
            BenchTask(spec, tuple(configs), seed, horizon, margin, train_steps, mae_config)
            for seed in seeds
        ]
        if self._jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self._jobs) as pool:
                batches = list(pool.map(evaluate_seed, tasks))
        else:
            batches = [evaluate_seed(t) for t in tasks]
        runs = sorted((r for batch in batches for r in batch), key=lambda r: (r.strategy, r.seed))

        summaries = summarize(runs, names)
        for s in summaries:
            logger.info(
                f"{spec.pattern.value} speed {spec.speed:g}: {s.strategy} median leakage "
                f"{s.median_rate:.4f} (IQR {s.iqr:.4f}, {s.n_seeds} seeds)"
            )
        return LeakageReport(spec=spec, summaries=summaries, runs=runs)

    def run_suite(
        self,
        specs: Sequence[SceneSpec],
        configs: Sequence[MaskConfig],
        seeds: Sequence[int],
        **kwargs,
    ) -> list[LeakageReport]:
        return [self.compare_strategies(spec, configs, seeds, **kwargs) for spec in specs]


def _fit_width(width: int, spec_frames: int, speed: int, object_size: int) -> int:
    """Smallest multiple of 16 >= width that keeps a moving object on canvas."""
    needed = max(width, (spec_frames - 1) * speed + object_size)
    return int(math.ceil(needed / TOKEN_SIZE) * TOKEN_SIZE)


def default_suite(
    speeds: Sequence[int],
    patterns: Sequence[ScenePattern],
    frames: int = 16,
    height: int = 128,
    width: int = 128,
    object_size: int = 24,
    texture_seed: int = 0,
) -> list[SceneSpec]:
    """Scene grid: every pattern at every horizontal speed.

    Object patterns get a canvas widened as needed to keep objects in view.
    """
    specs = []
    for pattern in patterns:
        for speed in speeds:
            canvas = width
            if pattern in (ScenePattern.TRANSLATING_SQUARE, ScenePattern.TWO_OBJECTS):
                canvas = _fit_width(width, frames, speed, object_size)
            specs.append(
                SceneSpec(
                    pattern=pattern,
                    velocity=(speed, 0),
                    texture_seed=texture_seed,
                    frames=frames,
                    height=height,
                    width=canvas,
                    object_size=object_size,
                )
            )
    return specs


def strategy_configs(base: MaskConfig, strategies: Sequence[str]) -> list[MaskConfig]:
    """One MaskConfig per strategy name, sharing every other field of `base`."""
    return [replace(base, strategy=name) for name in strategies]

"""Service layer implementations."""

from .mask_service import MaskService
from .pretrain_service import PretrainResult, PretrainService
from .bench_service import BenchService, BenchTask, default_suite, evaluate_seed, strategy_configs

__all__ = [
    "MaskService",
    "PretrainResult",
    "PretrainService",
    "BenchService",
    "BenchTask",
    "default_suite",
    "evaluate_seed",
    "strategy_configs",
]

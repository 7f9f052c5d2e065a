"""Domain models and protocols."""

from .errors import (
    MgmaskError,
    FormatError,
    BadMagicError,
    UnsupportedVersionError,
    SizeMismatchError,
    NonFiniteError,
    InvalidInputError,
    ShapeMismatchError,
    MissingFlowError,
    SceneError,
    NumericError,
    TrainingDivergedError,
)
from .models import (
    EPS_MARKER,
    TOKEN_SIZE,
    TUBELET,
    CUBE_DIM,
    Tensor,
    VideoClip,
    FlowField,
    FlowSet,
    MaskVolume,
    TokenMask,
    MaskConfig,
    MaeConfig,
    SceneSpec,
    BaseFrameMode,
    MaskInit,
    WarpDirection,
    HoleFill,
    SamplingLevel,
    MaskStrategy,
    ScenePattern,
    Background,
    LeakageEntry,
    StrategyRun,
    StrategySummary,
    LeakageReport,
    visible_count,
)
from .protocols import FlowSource

__all__ = [
    "MgmaskError",
    "FormatError",
    "BadMagicError",
    "UnsupportedVersionError",
    "SizeMismatchError",
    "NonFiniteError",
    "InvalidInputError",
    "ShapeMismatchError",
    "MissingFlowError",
    "SceneError",
    "NumericError",
    "TrainingDivergedError",
    "EPS_MARKER",
    "TOKEN_SIZE",
    "TUBELET",
    "CUBE_DIM",
    "Tensor",
    "VideoClip",
    "FlowField",
    "FlowSet",
    "MaskVolume",
    "TokenMask",
    "MaskConfig",
    "MaeConfig",
    "SceneSpec",
    "BaseFrameMode",
    "MaskInit",
    "WarpDirection",
    "HoleFill",
    "SamplingLevel",
    "MaskStrategy",
    "ScenePattern",
    "Background",
    "LeakageEntry",
    "StrategyRun",
    "StrategySummary",
    "LeakageReport",
    "visible_count",
    "FlowSource",
]

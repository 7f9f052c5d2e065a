"""Domain models for the motion guided masking pipeline."""

from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Mapping, Optional

import numpy as np
import numpy.typing as npt

from src.domain.errors import InvalidInputError, NumericError, ShapeMismatchError


FloatArray = npt.NDArray[np.float64]
BoolArray = npt.NDArray[np.bool_]

# A MaskMap is a plain [H, W] float64 array of visibility scores.
MaskMap = FloatArray

EPS_MARKER = 1e-8
TOKEN_SIZE = 16
TUBELET = 2
CUBE_DIM = TUBELET * TOKEN_SIZE * TOKEN_SIZE * 3


def _readonly(values: npt.ArrayLike, dtype: type = np.float64) -> np.ndarray:
    """Copy values into a read-only array of the given dtype."""
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


def _require_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{what} contains non-finite values")


class BaseFrameMode(Enum):
    """Which frame seeds the masking volume."""

    FIRST = "first"
    MIDDLE = "middle"
    RANDOM = "random"


class MaskInit(Enum):
    """Initial mask map generator for the base frame."""

    GMM = "gmm"
    TOKEN_RANDOM = "token_random"
    PIXEL_RANDOM = "pixel_random"


class WarpDirection(Enum):
    """Warping method used to propagate mask maps."""

    BACKWARD = "backward"
    FORWARD = "forward"


class HoleFill(Enum):
    """How warping holes are filled."""

    TUBE = "tube"
    RANDOM = "random"
    VISIBLE = "visible"
    INVISIBLE = "invisible"
    PREVIOUS_MAP = "previous_map"


class SamplingLevel(Enum):
    """Scope of the top-k visible token selection."""

    FRAME_LEVEL = "frame_level"
    CLIP_LEVEL = "clip_level"


class MaskStrategy(Enum):
    """Top-level masking strategy."""

    MOTION_GUIDED = "motion_guided"
    TUBE = "tube"
    RANDOM = "random"


class ScenePattern(Enum):
    """Synthetic scene content."""

    TRANSLATING_TEXTURE = "translating_texture"
    TRANSLATING_SQUARE = "translating_square"
    TWO_OBJECTS = "two_objects"
    STATIC = "static"


class Background(Enum):
    """Synthetic scene background."""

    CONSTANT = "constant"
    NOISE = "noise"


@dataclass(frozen=True, eq=False)
class Tensor:
    """Dense float64 array with row-major layout."""

    data: FloatArray

    def __post_init__(self) -> None:
        array = _readonly(self.data)
        if array.ndim == 0 or any(d <= 0 for d in array.shape):
            raise InvalidInputError(f"Tensor extents must be positive, got {array.shape}")
        _require_finite(array, "Tensor")
        object.__setattr__(self, "data", array)

    @classmethod
    def from_values(cls, dims: list[int], values: npt.ArrayLike) -> "Tensor":
        """Build a tensor from extents and a flat row-major value list."""
        flat = np.asarray(values, dtype=np.float64).ravel()
        if math.prod(dims) != flat.size:
            raise ShapeMismatchError(
                f"dims {dims} need {math.prod(dims)} values, got {flat.size}"
            )
        return cls(flat.reshape(dims))

    @property
    def dims(self) -> list[int]:
        return list(self.data.shape)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class VideoClip:
    """A [T, 3, H, W] clip with pixel values in [0, 1]."""

    frames: FloatArray

    def __post_init__(self) -> None:
        array = _readonly(self.frames)
        if array.ndim != 4 or array.shape[1] != 3:
            raise ShapeMismatchError(f"Clip must be [T, 3, H, W], got {array.shape}")
        t, _, h, w = array.shape
        if t < TUBELET or t % TUBELET != 0:
            raise InvalidInputError(f"Clip frame count must be even and >= 2, got {t}")
        if h % TOKEN_SIZE != 0 or w % TOKEN_SIZE != 0 or h == 0 or w == 0:
            raise InvalidInputError(f"Clip height and width must be multiples of 16, got {h}x{w}")
        _require_finite(array, "VideoClip")
        if array.min() < 0.0 or array.max() > 1.0:
            raise InvalidInputError("Clip pixel values must lie in [0, 1]")
        object.__setattr__(self, "frames", array)

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[2])

    @property
    def width(self) -> int:
        return int(self.frames.shape[3])

    @property
    def token_grid(self) -> tuple[int, int, int]:
        """Token grid extents [T/2, H/16, W/16]."""
        return (
            self.num_frames // TUBELET,
            self.height // TOKEN_SIZE,
            self.width // TOKEN_SIZE,
        )

    def frame(self, index: int) -> FloatArray:
        """Return frame `index` (1-based) as a [3, H, W] array."""
        if not 1 <= index <= self.num_frames:
            raise InvalidInputError(f"Frame index {index} outside [1, {self.num_frames}]")
        return self.frames[index - 1]

    def to_tensor(self) -> Tensor:
        return Tensor(self.frames)

    @classmethod
    def from_tensor(cls, tensor: Tensor) -> "VideoClip":
        return cls(tensor.data)


@dataclass(frozen=True, eq=False)
class FlowField:
    """Dense [2, H, W] displacement field in pixels.

    Channel 0 is horizontal (u), channel 1 vertical (v). The flow from frame i
    to frame j at pixel p points to p + flow(p) in frame j.
    """

    data: FloatArray

    def __post_init__(self) -> None:
        array = _readonly(self.data)
        if array.ndim != 3 or array.shape[0] != 2:
            raise ShapeMismatchError(f"Flow must be [2, H, W], got {array.shape}")
        _require_finite(array, "FlowField")
        object.__setattr__(self, "data", array)

    @property
    def u(self) -> FloatArray:
        return self.data[0]

    @property
    def v(self) -> FloatArray:
        return self.data[1]

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.data.shape[1]), int(self.data.shape[2])

    def mean_magnitude(self) -> float:
        return float(np.mean(np.hypot(self.data[0], self.data[1])))

    @classmethod
    def zeros(cls, height: int, width: int) -> "FlowField":
        return cls(np.zeros((2, height, width)))

    @classmethod
    def constant(cls, height: int, width: int, u: float, v: float) -> "FlowField":
        data = np.empty((2, height, width))
        data[0] = u
        data[1] = v
        return cls(data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FlowField):
            return NotImplemented
        return np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class FlowSet:
    """Flows pointing towards the base frame, keyed by 1-based source frame.

    For i < base_index the field is the flow i -> i+1; for i > base_index it
    is the flow i -> i-1.
    """

    base_index: int
    num_frames: int
    fields: Mapping[int, FlowField]

    def __post_init__(self) -> None:
        if not 1 <= self.base_index <= self.num_frames:
            raise InvalidInputError(
                f"Base index {self.base_index} outside [1, {self.num_frames}]"
            )
        expected = set(range(1, self.num_frames + 1)) - {self.base_index}
        if set(self.fields) != expected:
            raise InvalidInputError(
                f"FlowSet needs fields for frames {sorted(expected)}, got {sorted(self.fields)}"
            )
        shapes = {f.shape for f in self.fields.values()}
        if len(shapes) > 1:
            raise ShapeMismatchError(f"FlowSet fields disagree in shape: {shapes}")
        object.__setattr__(self, "fields", dict(sorted(self.fields.items())))

    def target(self, index: int) -> int:
        """Frame the flow stored at `index` points to."""
        return index + 1 if index < self.base_index else index - 1

    def pairs(self) -> list[tuple[int, int]]:
        """All (source, target) pairs, ordered by source frame."""
        return [(i, self.target(i)) for i in self.fields]

    def field_for(self, index: int) -> FlowField:
        return self.fields[index]

    @property
    def shape(self) -> Optional[tuple[int, int]]:
        for f in self.fields.values():
            return f.shape
        return None

    @staticmethod
    def required_pairs(num_frames: int, base_index: int) -> list[tuple[int, int]]:
        """The (i, j) pairs a FlowSet for this clip length and base needs."""
        pairs = [(i, i + 1) for i in range(1, base_index)]
        pairs += [(i, i - 1) for i in range(base_index + 1, num_frames + 1)]
        return pairs

    @classmethod
    def zeros(cls, num_frames: int, base_index: int, height: int, width: int) -> "FlowSet":
        zero = FlowField.zeros(height, width)
        fields = {i: zero for i, _ in cls.required_pairs(num_frames, base_index)}
        return cls(base_index=base_index, num_frames=num_frames, fields=fields)


@dataclass(frozen=True)
class MaskConfig:
    """Masking configuration; every ablation axis is selectable."""

    ratio: float = 0.9
    base_frame: BaseFrameMode = BaseFrameMode.MIDDLE
    init: MaskInit = MaskInit.GMM
    sigma: tuple[float, float] = (16.0, 16.0)
    warp: WarpDirection = WarpDirection.BACKWARD
    fill: HoleFill = HoleFill.TUBE
    sample: SamplingLevel = SamplingLevel.FRAME_LEVEL
    strategy: MaskStrategy = MaskStrategy.MOTION_GUIDED
    seed: int = 0
    noise_std: float = 0.0

    def __post_init__(self) -> None:
        coerce = {
            "base_frame": BaseFrameMode,
            "init": MaskInit,
            "warp": WarpDirection,
            "fill": HoleFill,
            "sample": SamplingLevel,
            "strategy": MaskStrategy,
        }
        for name, enum_type in coerce.items():
            value = getattr(self, name)
            if not isinstance(value, enum_type):
                try:
                    object.__setattr__(self, name, enum_type(value))
                except ValueError:
                    choices = ", ".join(m.value for m in enum_type)
                    raise InvalidInputError(f"Invalid {name}: {value!r} (choose from {choices})")
        if not 0.0 < self.ratio < 1.0:
            raise InvalidInputError(f"Masking ratio must lie in (0, 1), got {self.ratio}")
        sigma = tuple(float(s) for s in self.sigma)
        if len(sigma) != 2 or min(sigma) <= 0:
            raise InvalidInputError(f"Sigma components must be positive, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)
        if self.noise_std < 0:
            raise InvalidInputError(f"Noise std must be >= 0, got {self.noise_std}")

    def visible_per_slice(self, spatial_tokens: int) -> int:
        """N_v hat: visible tokens per temporal slice."""
        return visible_count(self.ratio, spatial_tokens)


def visible_count(ratio: float, tokens: int) -> int:
    """floor((1 - ratio) * tokens), robust to the representation error of 1 - ratio."""
    return int(math.floor((1.0 - ratio) * tokens + 1e-9))


@dataclass(frozen=True, eq=False)
class MaskVolume:
    """[T, H, W] per-frame visibility scores built around a base frame."""

    data: FloatArray
    base_index: int

    def __post_init__(self) -> None:
        array = _readonly(self.data)
        if array.ndim != 3:
            raise ShapeMismatchError(f"Mask volume must be [T, H, W], got {array.shape}")
        _require_finite(array, "MaskVolume")
        if array.min() < 0:
            raise NumericError("Mask volume contains negative scores")
        object.__setattr__(self, "data", array)

    @property
    def base_map(self) -> MaskMap:
        return self.data[self.base_index - 1]

    def to_tensor(self) -> Tensor:
        return Tensor(self.data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskVolume):
            return NotImplemented
        return self.base_index == other.base_index and np.array_equal(self.data, other.data)


@dataclass(frozen=True, eq=False)
class TokenMask:
    """[T/2, H/16, W/16] visibility decisions; True means visible."""

    visible: BoolArray

    def __post_init__(self) -> None:
        array = _readonly(self.visible, dtype=np.bool_)
        if array.ndim != 3:
            raise ShapeMismatchError(f"Token mask must be 3-D, got {array.shape}")
        object.__setattr__(self, "visible", array)

    @property
    def grid(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.visible.shape)  # type: ignore[return-value]

    @property
    def num_tokens(self) -> int:
        return int(self.visible.size)

    @property
    def num_visible(self) -> int:
        return int(self.visible.sum())

    @property
    def num_masked(self) -> int:
        return self.num_tokens - self.num_visible

    @property
    def visible_indices(self) -> npt.NDArray[np.int64]:
        """Flattened visible token indices in row-major order."""
        return np.flatnonzero(self.visible.ravel())

    @property
    def masked_indices(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(~self.visible.ravel())

    def per_slice_counts(self) -> list[int]:
        return [int(s.sum()) for s in self.visible]

    def slice_set(self, index: int) -> set[tuple[int, int]]:
        """Visible (row, col) positions of temporal slice `index` (0-based)."""
        rows, cols = np.nonzero(self.visible[index])
        return {(int(r), int(c)) for r, c in zip(rows, cols)}

    def to_tensor(self) -> Tensor:
        return Tensor(self.visible.astype(np.float64))

    @classmethod
    def from_tensor(cls, tensor: Tensor) -> "TokenMask":
        values = tensor.data
        if not np.all((values == 0.0) | (values == 1.0)):
            raise InvalidInputError("Token mask tensor must contain only 0 and 1")
        return cls(values == 1.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TokenMask):
            return NotImplemented
        return np.array_equal(self.visible, other.visible)


@dataclass(frozen=True)
class MaeConfig:
    """Toy masked autoencoder configuration."""

    embed_dim: int = 64
    depth: int = 3
    heads: int = 4
    decoder_dim: int = 32
    decoder_depth: int = 1
    mlp_ratio: int = 4
    ratio: float = 0.9
    norm_eps: float = 1e-6
    ln_eps: float = 1e-6
    init_std: float = 0.02
    learning_rate: float = 0.05
    steps: int = 100
    batch_size: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.embed_dim % self.heads != 0:
            raise InvalidInputError(
                f"embed_dim {self.embed_dim} must be divisible by heads {self.heads}"
            )
        if self.decoder_dim % self.heads != 0:
            raise InvalidInputError(
                f"decoder_dim {self.decoder_dim} must be divisible by heads {self.heads}"
            )
        if self.embed_dim % 2 or self.decoder_dim % 2:
            raise InvalidInputError("Embedding widths must be even for sinusoidal encodings")
        if min(self.depth, self.decoder_depth) < 0 or self.heads < 1:
            raise InvalidInputError("Depths must be >= 0 and heads >= 1")
        if not 0.0 < self.ratio < 1.0:
            raise InvalidInputError(f"Masking ratio must lie in (0, 1), got {self.ratio}")
        if self.learning_rate <= 0 or self.steps < 0 or self.batch_size < 1:
            raise InvalidInputError("learning_rate > 0, steps >= 0 and batch_size >= 1 required")


@dataclass(frozen=True)
class SceneSpec:
    """Synthetic scene description with integer per-frame velocities."""

    pattern: ScenePattern = ScenePattern.TRANSLATING_TEXTURE
    velocity: tuple[int, int] = (4, 0)
    texture_seed: int = 0
    frames: int = 16
    height: int = 128
    width: int = 128
    background: Background = Background.CONSTANT
    object_size: int = 24

    def __post_init__(self) -> None:
        if not isinstance(self.pattern, ScenePattern):
            object.__setattr__(self, "pattern", _coerce(ScenePattern, self.pattern, "pattern"))
        if not isinstance(self.background, Background):
            object.__setattr__(
                self, "background", _coerce(Background, self.background, "background")
            )
        vx, vy = self.velocity
        if int(vx) != vx or int(vy) != vy:
            raise InvalidInputError(f"Velocities must be integers, got {self.velocity}")
        object.__setattr__(self, "velocity", (int(vx), int(vy)))
        if self.frames < 2 or self.frames % 2:
            raise InvalidInputError(f"Scene frame count must be even and >= 2, got {self.frames}")
        if self.height % TOKEN_SIZE or self.width % TOKEN_SIZE or self.height <= 0 or self.width <= 0:
            raise InvalidInputError("Scene height and width must be positive multiples of 16")
        if self.object_size < 1:
            raise InvalidInputError("Object size must be >= 1")

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


def _coerce(enum_type: type[Enum], value: object, name: str) -> Enum:
    try:
        return enum_type(value)
    except ValueError:
        choices = ", ".join(m.value for m in enum_type)
        raise InvalidInputError(f"Invalid {name}: {value!r} (choose from {choices})")


@dataclass(frozen=True)
class LeakageEntry:
    """Leakage of one token mask against one flow set."""

    rate: float
    leaked: int
    masked: int
    per_slice: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class StrategyRun:
    """Outcome of one strategy on one seed."""

    strategy: str
    seed: int
    leakage: LeakageEntry
    final_loss: Optional[float] = None


@dataclass(frozen=True)
class StrategySummary:
    """Aggregate of one strategy across seeds."""

    strategy: str
    median_rate: float
    iqr: float
    n_seeds: int
    masked_count: int
    rates: list[float] = field(default_factory=list)
    median_loss: Optional[float] = None
    loss_iqr: Optional[float] = None


@dataclass(frozen=True)
class LeakageReport:
    """Per-strategy leakage summary for one scene spec."""

    spec: SceneSpec
    summaries: list[StrategySummary]
    runs: list[StrategyRun] = field(default_factory=list)

    def summary(self, strategy: str) -> StrategySummary:
        for s in self.summaries:
            if s.strategy == strategy:
                return s
        raise KeyError(strategy)

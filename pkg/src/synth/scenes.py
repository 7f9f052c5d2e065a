"""Synthetic clips with exactly known motion."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union
import logging

import numpy as np
from scipy import ndimage

from src.core.rng import Rng
from src.domain.errors import SceneError
from src.domain.models import Background, FlowField, FlowSet, SceneSpec, ScenePattern, VideoClip
from src.flow.flow_set import build_flow_set, write_flow_set
from src.flow.sources import InMemoryFlowSource
from src.formats.vten import write_vten


logger = logging.getLogger(__name__)

BACKGROUND_LEVEL = 0.5
TEXTURE_SMOOTHING = 2.0


@dataclass(frozen=True)
class MovingObject:
    """A textured rectangle translating at a constant integer velocity."""

    top: int
    left: int
    texture: np.ndarray
    velocity: tuple[int, int]

    @property
    def size(self) -> tuple[int, int]:
        return int(self.texture.shape[1]), int(self.texture.shape[2])

    def origin(self, frame: int) -> tuple[int, int]:
        """Top-left corner in 1-based frame `frame`."""
        vx, vy = self.velocity
        return self.top + (frame - 1) * vy, self.left + (frame - 1) * vx

    def footprint(self, frame: int, height: int, width: int) -> np.ndarray:
        y, x = self.origin(frame)
        h, w = self.size
        region = np.zeros((height, width), dtype=bool)
        region[y : y + h, x : x + w] = True
        return region


def texture(rng: Rng, height: int, width: int) -> np.ndarray:
    """Smooth random RGB texture in [0.1, 0.9], shape [3, H, W]."""
    noise = rng.uniform((3, height, width))
    smooth = ndimage.gaussian_filter(noise, sigma=(0, TEXTURE_SMOOTHING, TEXTURE_SMOOTHING), mode="wrap")
    low, high = smooth.min(), smooth.max()
    return 0.1 + 0.8 * (smooth - low) / max(high - low, 1e-12)


def _track_start(extent: int, size: int, velocity: int, frames: int, what: str) -> int:
    travel = (frames - 1) * abs(velocity)
    if travel + size > extent:
        raise SceneError(
            f"{what}: an object of size {size} moving {velocity} px/frame for "
            f"{frames} frames leaves a canvas of {extent} px"
        )
    start = (extent - travel - size) // 2
    return start + travel if velocity < 0 else start


class Scene:
    """A generated clip plus the ground-truth motion that produced it."""

    def __init__(self, spec: SceneSpec, rng: Rng) -> None:
        self.spec = spec
        self.objects: list[MovingObject] = []
        self._global_velocity: Optional[tuple[int, int]] = None
        self.clip = self._render(rng)

    def _background(self, rng: Rng) -> np.ndarray:
        spec = self.spec
        if spec.background is Background.NOISE:
            return texture(rng, spec.height, spec.width)
        return np.full((3, spec.height, spec.width), BACKGROUND_LEVEL)

    def _render(self, rng: Rng) -> VideoClip:
        spec = self.spec
        t, h, w = spec.frames, spec.height, spec.width
        frames = np.empty((t, 3, h, w))

        if spec.pattern in (ScenePattern.TRANSLATING_TEXTURE, ScenePattern.STATIC):
            vx, vy = spec.velocity if spec.pattern is ScenePattern.TRANSLATING_TEXTURE else (0, 0)
            self._global_velocity = (vx, vy)
            span_y, span_x = (t - 1) * abs(vy), (t - 1) * abs(vx)
            canvas = texture(rng.split(0), h + span_y, w + span_x)
            for frame in range(1, t + 1):
                # Content at p in frame 1 sits at p + (frame - 1) * v.
                y = span_y - (frame - 1) * vy if vy >= 0 else -(frame - 1) * vy
                x = span_x - (frame - 1) * vx if vx >= 0 else -(frame - 1) * vx
                frames[frame - 1] = canvas[:, y : y + h, x : x + w]
            return VideoClip(frames)

        size = spec.object_size
        vx, vy = spec.velocity
        if spec.pattern is ScenePattern.TRANSLATING_SQUARE:
            bands = [(0, h, (vx, vy))]
        else:
            half = h // 2
            bands = [(0, half, (vx, vy)), (half, h - half, (-vx, -vy))]
        for index, (band_top, band_height, (ox, oy)) in enumerate(bands):
            top = band_top + _track_start(band_height, size, oy, t, "vertical track")
            left = _track_start(w, size, ox, t, "horizontal track")
            patch = texture(rng.split(1, index), size, size)
            self.objects.append(MovingObject(top, left, patch, (ox, oy)))

        background = self._background(rng.split(2))
        for frame in range(1, t + 1):
            image = background.copy()
            for obj in self.objects:
                y, x = obj.origin(frame)
                image[:, y : y + size, x : x + size] = obj.texture
            frames[frame - 1] = image
        return VideoClip(frames)

    def true_flow(self, source: int, target: int) -> FlowField:
        """Exact flow from frame `source` to frame `target`."""
        h, w = self.spec.height, self.spec.width
        steps = target - source
        if self._global_velocity is not None:
            vx, vy = self._global_velocity
            return FlowField.constant(h, w, steps * vx, steps * vy)
        data = np.zeros((2, h, w))
        for obj in self.objects:
            region = obj.footprint(source, h, w)
            data[0][region] = steps * obj.velocity[0]
            data[1][region] = steps * obj.velocity[1]
        return FlowField(data)

    def flow_source(self) -> InMemoryFlowSource:
        """Ground-truth flows for every adjacent frame pair, both directions."""
        source = InMemoryFlowSource()
        for i in range(1, self.spec.frames):
            source.put(i, i + 1, self.true_flow(i, i + 1))
            source.put(i + 1, i, self.true_flow(i + 1, i))
        return source

    def flow_set(self, base_index: Optional[int] = None) -> FlowSet:
        base = self.spec.frames // 2 if base_index is None else base_index
        return build_flow_set(self.clip, base, self.flow_source())


def generate_scene(
    spec: SceneSpec,
    rng: Optional[Rng] = None,
    base_index: Optional[int] = None,
) -> tuple[VideoClip, FlowSet]:
    """Render `spec` and return the clip with its ground-truth flow set.

    The flow set is built around `base_index` (default: the middle frame).
    """
    scene = Scene(spec, rng if rng is not None else Rng(spec.texture_seed))
    logger.debug(f"Generated {spec.pattern.value} scene, velocity {spec.velocity}")
    return scene.clip, scene.flow_set(base_index)


def export_scene(clip: VideoClip, flows: FlowSet, directory: Union[str, Path]) -> Path:
    """Write ``clip.vten`` and a ``flows/`` directory of .flo files."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    write_vten(clip.to_tensor(), out / "clip.vten")
    write_flow_set(flows, out / "flows")
    return out

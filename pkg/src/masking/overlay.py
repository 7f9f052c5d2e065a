"""Render token masks, mask volumes, flows and reconstructions for inspection."""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from src.domain.errors import ShapeMismatchError
from src.domain.models import TOKEN_SIZE, TUBELET, FlowField, FlowSet, MaskVolume, TokenMask, VideoClip
from src.formats.ppm import write_ppm


logger = logging.getLogger(__name__)

# Masked tokens keep 30% of their brightness.
MASKED_GAIN = 0.3

# Displacement (pixels) drawn as black or white; zero is mid gray.
FLOW_RANGE = 8.0


def _gray(plane: np.ndarray) -> np.ndarray:
    """[H, W] values in [0, 1] as an [H, W, 3] uint8 image."""
    level = np.rint(np.clip(plane, 0.0, 1.0) * 255.0).astype(np.uint8)
    return np.repeat(level[:, :, None], 3, axis=2)


def _rgb(frame: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(frame, 0.0, 1.0).transpose(1, 2, 0) * 255.0).astype(np.uint8)


def render_overlays(clip: VideoClip, mask: TokenMask) -> list[np.ndarray]:
    """One [H, W, 3] uint8 image per frame with masked tokens darkened."""
    if mask.grid != clip.token_grid:
        raise ShapeMismatchError(f"Mask grid {mask.grid} does not match clip grid {clip.token_grid}")
    images = []
    for t in range(clip.num_frames):
        visible = mask.visible[t // TUBELET]
        gain = np.where(visible, 1.0, MASKED_GAIN)
        gain = np.repeat(np.repeat(gain, TOKEN_SIZE, axis=0), TOKEN_SIZE, axis=1)
        images.append(_rgb(clip.frames[t] * gain[None, :, :]))
    return images


def render_volume(volume: MaskVolume) -> list[np.ndarray]:
    """One gray image per frame, each frame scaled by its own peak score."""
    images = []
    for plane in volume.data:
        peak = float(plane.max())
        images.append(_gray(plane / peak if peak > 0 else plane))
    return images


def render_flow(field: FlowField) -> tuple[np.ndarray, np.ndarray]:
    """The u and v components as gray images; zero motion is mid gray."""
    return (
        _gray(0.5 + 0.5 * field.u / FLOW_RANGE),
        _gray(0.5 + 0.5 * field.v / FLOW_RANGE),
    )


def _write(images: list[np.ndarray], out: Path, stem: str) -> list[Path]:
    paths = []
    for t, image in enumerate(images, start=1):
        path = out / f"{stem}_{t:04d}.ppm"
        write_ppm(image, path)
        paths.append(path)
    return paths


def write_overlays(clip: VideoClip, mask: TokenMask, directory: Union[str, Path]) -> list[Path]:
    """Write rendered overlays as ``overlay_XXXX.ppm`` (1-based frame numbers)."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    return _write(render_overlays(clip, mask), out, "overlay")


def write_visualization(
    directory: Union[str, Path],
    clip: VideoClip,
    mask: TokenMask,
    volume: Optional[MaskVolume] = None,
    flows: Optional[FlowSet] = None,
    reconstruction: Optional[VideoClip] = None,
) -> list[Path]:
    """Write every available rendering of one masking run into `directory`.

    Files: ``overlay_XXXX``, ``volume_XXXX``, ``flow_u_XXXX``/``flow_v_XXXX``
    (numbered by the source frame of each pair) and ``recon_XXXX``.
    """
    out = Path(directory)
    paths = write_overlays(clip, mask, out)
    if volume is not None:
        paths += _write(render_volume(volume), out, "volume")
    if flows is not None:
        for source, _ in flows.pairs():
            u_image, v_image = render_flow(flows.field_for(source))
            for stem, image in (("flow_u", u_image), ("flow_v", v_image)):
                path = out / f"{stem}_{source:04d}.ppm"
                write_ppm(image, path)
                paths.append(path)
    if reconstruction is not None:
        if reconstruction.token_grid != clip.token_grid:
            raise ShapeMismatchError(
                f"Reconstruction grid {reconstruction.token_grid} does not match clip grid {clip.token_grid}"
            )
        paths += _write([_rgb(frame) for frame in reconstruction.frames], out, "recon")
    logger.info(f"Wrote {len(paths)} images to {out}")
    return paths

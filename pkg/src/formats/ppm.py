"""Binary PPM (P6) frame directories."""

from pathlib import Path
from typing import Union

import numpy as np
import numpy.typing as npt
from PIL import Image

from src.domain.errors import FormatError, InvalidInputError
from src.domain.models import VideoClip


PathLike = Union[str, Path]


def read_ppm(path: PathLike) -> npt.NDArray[np.float64]:
    """Read one P6 image as a [3, H, W] array scaled to [0, 1]."""
    try:
        with Image.open(path) as image:
            if image.format != "PPM":
                raise FormatError(f"{path} is not a PPM image")
            pixels = np.asarray(image.convert("RGB"), dtype=np.float64)
    except OSError as e:
        raise FormatError(f"Cannot decode {path}: {e}") from e
    return np.moveaxis(pixels / 255.0, -1, 0)


def write_ppm(pixels: npt.NDArray[np.uint8], path: PathLike) -> None:
    """Write an [H, W, 3] uint8 image as binary PPM."""
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8)).save(path, format="PPM")


def read_frame_dir(directory: PathLike) -> VideoClip:
    """Load every ``*.ppm`` in a directory, sorted by name, as a clip."""
    paths = sorted(Path(directory).glob("*.ppm"))
    if not paths:
        raise InvalidInputError(f"No .ppm frames found in {directory}")
    frames = [read_ppm(p) for p in paths]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise InvalidInputError(f"Frames in {directory} differ in size: {sorted(shapes)}")
    return VideoClip(np.stack(frames))


def write_frame_dir(clip: VideoClip, directory: PathLike) -> list[Path]:
    """Write each clip frame as ``frame_XXXX.ppm`` (1-based)."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for index, frame in enumerate(clip.frames, start=1):
        path = out / f"frame_{index:04d}.ppm"
        pixels = np.round(np.moveaxis(frame, 0, -1) * 255.0).astype(np.uint8)
        write_ppm(pixels, path)
        written.append(path)
    return written

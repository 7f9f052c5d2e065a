"""Middlebury .flo codec.

Layout: f32 magic 202021.25, i32 width, i32 height, then height x width
interleaved (u, v) f32 pairs in row-major order, all little-endian.
"""

from pathlib import Path
from typing import Union

import numpy as np

from src.domain.errors import BadMagicError, NonFiniteError, NumericError, SizeMismatchError
from src.domain.models import FlowField


FLO_MAGIC = np.float32(202021.25)
HEADER_SIZE = 12

PathLike = Union[str, Path]


def encode_flo(flow: FlowField) -> bytes:
    """Serialize a flow field to .flo bytes."""
    height, width = flow.shape
    interleaved = np.moveaxis(flow.data, 0, -1).astype("<f4")
    if not np.all(np.isfinite(interleaved)):
        raise NumericError("Flow values overflow 32-bit floats")
    header = np.asarray([FLO_MAGIC], dtype="<f4").tobytes()
    header += np.asarray([width, height], dtype="<i4").tobytes()
    return header + interleaved.tobytes(order="C")


def decode_flo(raw: bytes) -> FlowField:
    """Parse .flo bytes into a flow field."""
    if len(raw) < HEADER_SIZE:
        raise SizeMismatchError("Truncated .flo header")
    magic = np.frombuffer(raw, dtype="<f4", count=1)[0]
    if magic != FLO_MAGIC:
        raise BadMagicError(f"Bad .flo magic {float(magic)!r}")
    width, height = (int(x) for x in np.frombuffer(raw, dtype="<i4", count=2, offset=4))
    if width <= 0 or height <= 0:
        raise SizeMismatchError(f"Invalid .flo extents {width}x{height}")
    expected = HEADER_SIZE + 8 * width * height
    if len(raw) != expected:
        raise SizeMismatchError(
            f".flo of {width}x{height} needs {expected} bytes, found {len(raw)}"
        )
    values = np.frombuffer(raw, dtype="<f4", offset=HEADER_SIZE).reshape(height, width, 2)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(".flo payload contains non-finite values")
    return FlowField(np.moveaxis(values.astype(np.float64), -1, 0))


def read_flo(path: PathLike) -> FlowField:
    """Read a flow field from a .flo file."""
    return decode_flo(Path(path).read_bytes())


def write_flo(flow: FlowField, path: PathLike) -> None:
    """Write a flow field to a .flo file."""
    Path(path).write_bytes(encode_flo(flow))


def flo_filename(source: int, target: int) -> str:
    """Directory naming for the flow source -> target (1-based)."""
    return f"flow_{source}_{target}.flo"

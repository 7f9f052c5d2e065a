"""VTEN binary tensor codec.

Layout: ASCII ``VTEN``, u32 version (1), u32 ndim, ndim x u32 extents, then
prod(extents) x f32 payload in row-major order. Everything little-endian,
no padding, no trailing bytes.
"""

from pathlib import Path
from typing import Union

import numpy as np

from src.domain.errors import (
    BadMagicError,
    NonFiniteError,
    NumericError,
    SizeMismatchError,
    UnsupportedVersionError,
)
from src.domain.models import Tensor


MAGIC = b"VTEN"
VERSION = 1

PathLike = Union[str, Path]


def encode_vten(tensor: Tensor) -> bytes:
    """Serialize a tensor to VTEN bytes."""
    dims = np.asarray(tensor.dims, dtype="<u4")
    payload = tensor.data.astype("<f4")
    if not np.all(np.isfinite(payload)):
        raise NumericError("Tensor values overflow 32-bit floats")
    header = MAGIC + np.asarray([VERSION, len(tensor.dims)], dtype="<u4").tobytes()
    return header + dims.tobytes() + payload.tobytes(order="C")


def decode_vten(raw: bytes) -> Tensor:
    """Parse VTEN bytes into a tensor."""
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise BadMagicError("Not a VTEN file (bad magic)")
    version, ndim = np.frombuffer(raw, dtype="<u4", count=2, offset=4)
    if version != VERSION:
        raise UnsupportedVersionError(f"Unsupported VTEN version {int(version)}")
    header_size = 12 + 4 * int(ndim)
    if ndim == 0 or len(raw) < header_size:
        raise SizeMismatchError(f"Truncated VTEN header (ndim={int(ndim)})")
    dims = [int(d) for d in np.frombuffer(raw, dtype="<u4", count=int(ndim), offset=12)]
    if any(d == 0 for d in dims):
        raise SizeMismatchError(f"VTEN extents must be positive, got {dims}")
    count = int(np.prod(dims, dtype=np.int64))
    payload_size = len(raw) - header_size
    if payload_size != 4 * count:
        raise SizeMismatchError(
            f"VTEN dims {dims} need {4 * count} payload bytes, found {payload_size}"
        )
    values = np.frombuffer(raw, dtype="<f4", count=count, offset=header_size)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("VTEN payload contains non-finite values")
    return Tensor(values.astype(np.float64).reshape(dims))


def read_vten(path: PathLike) -> Tensor:
    """Read a tensor from a VTEN file."""
    return decode_vten(Path(path).read_bytes())


def write_vten(tensor: Tensor, path: PathLike) -> None:
    """Write a tensor to a VTEN file."""
    Path(path).write_bytes(encode_vten(tensor))

"""Parameter checkpoints: one VTEN file per array plus a manifest."""

from pathlib import Path
from typing import Mapping, Union

import numpy as np

from src.domain.errors import FormatError
from src.domain.models import Tensor
from src.formats.vten import read_vten, write_vten


PathLike = Union[str, Path]
MANIFEST = "manifest.txt"


def save_checkpoint(params: Mapping[str, np.ndarray], directory: PathLike) -> Path:
    """Write ``<name>.vten`` per parameter and a ``name<TAB>dims<TAB>file`` manifest."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for name in sorted(params):
        array = params[name]
        filename = f"{name}.vten"
        write_vten(Tensor(array), out / filename)
        lines.append(f"{name}\t{','.join(str(d) for d in array.shape)}\t{filename}")
    manifest = out / MANIFEST
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_checkpoint(directory: PathLike) -> dict[str, np.ndarray]:
    """Read every parameter listed in the manifest, checking dims."""
    root = Path(directory)
    params: dict[str, np.ndarray] = {}
    for number, line in enumerate((root / MANIFEST).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"{MANIFEST} line {number}: expected 3 tab-separated fields")
        name, dims, filename = fields
        tensor = read_vten(root / filename)
        try:
            expected = [int(d) for d in dims.split(",")]
        except ValueError:
            raise FormatError(f"{MANIFEST} line {number}: bad dims {dims!r}") from None
        if tensor.dims != expected:
            raise FormatError(f"{filename} has dims {tensor.dims}, manifest says {expected}")
        params[name] = np.array(tensor.data)
    return params

"""Flow source implementations: online estimator, .flo directory, in-memory."""

from pathlib import Path
from typing import Mapping, Optional, Union
import logging

from src.domain.errors import MissingFlowError, ShapeMismatchError
from src.domain.models import FlowField, VideoClip
from src.formats.flo import flo_filename, read_flo
from src.flow.horn_schunck import HornSchunckConfig, estimate_flow


logger = logging.getLogger(__name__)


def _check_shape(flow: FlowField, clip: VideoClip, pair: tuple[int, int]) -> FlowField:
    if flow.shape != (clip.height, clip.width):
        raise ShapeMismatchError(
            f"Flow {pair[0]}->{pair[1]} is {flow.shape[0]}x{flow.shape[1]}, "
            f"clip is {clip.height}x{clip.width}"
        )
    return flow


class EstimatorFlowSource:
    """Computes flows on demand with the pyramidal Horn-Schunck estimator."""

    def __init__(self, config: Optional[HornSchunckConfig] = None) -> None:
        self._config = config or HornSchunckConfig()

    @property
    def name(self) -> str:
        return "estimate"

    @property
    def config(self) -> HornSchunckConfig:
        return self._config

    def flow(self, clip: VideoClip, source: int, target: int) -> FlowField:
        """Estimate the flow from frame `source` to frame `target`."""
        field = estimate_flow(clip.frame(source), clip.frame(target), self._config)
        logger.debug(f"Estimated flow {source}->{target}: mean |flow| {field.mean_magnitude():.4f}")
        return field


class FloDirectoryFlowSource:
    """Loads precomputed flows named ``flow_{i}_{j}.flo`` from a directory."""

    def __init__(self, directory: Union[str, Path]) -> None:
        self._directory = Path(directory)

    @property
    def name(self) -> str:
        return "load"

    @property
    def directory(self) -> Path:
        return self._directory

    def flow(self, clip: VideoClip, source: int, target: int) -> FlowField:
        """Read the flow from frame `source` to frame `target`."""
        path = self._directory / flo_filename(source, target)
        if not path.is_file():
            raise MissingFlowError(
                f"Missing flow file for pair {source}->{target}: {path}",
                pair=(source, target),
            )
        return _check_shape(read_flo(path), clip, (source, target))


class InMemoryFlowSource:
    """Serves flows from a dict keyed by (source, target); used for ground truth and tests."""

    def __init__(self, fields: Optional[Mapping[tuple[int, int], FlowField]] = None) -> None:
        self._fields: dict[tuple[int, int], FlowField] = dict(fields or {})

    @property
    def name(self) -> str:
        return "memory"

    def put(self, source: int, target: int, field: FlowField) -> None:
        self._fields[(source, target)] = field

    def flow(self, clip: VideoClip, source: int, target: int) -> FlowField:
        try:
            field = self._fields[(source, target)]
        except KeyError:
            raise MissingFlowError(
                f"No flow stored for pair {source}->{target}", pair=(source, target)
            ) from None
        return _check_shape(field, clip, (source, target))

"""Protocol definitions for dependency injection."""

from typing import Protocol, runtime_checkable

from src.domain.models import FlowField, VideoClip


@runtime_checkable
class FlowSource(Protocol):
    """Protocol for anything that can supply the flow between two frames."""

    def flow(self, clip: VideoClip, source: int, target: int) -> FlowField:
        """Return the flow from frame `source` to frame `target` (1-based)."""
        ...

    @property
    def name(self) -> str:
        """Short identifier used in logs and reports."""
        ...

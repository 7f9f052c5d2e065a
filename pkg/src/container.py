"""Dependency injection container."""

from dataclasses import dataclass
from pathlib import Path
from typing import TypeVar, Generic, Callable, Optional, Any

from src.domain.protocols import FlowSource


T = TypeVar("T")


class Provider(Generic[T]):
    """Lazy provider that creates instance on first access."""

    def __init__(self, factory: Callable[[], T]) -> None:
        self._factory = factory
        self._instance: Optional[T] = None

    def get(self) -> T:
        """Get the instance, creating it if necessary."""
        if self._instance is None:
            self._instance = self._factory()
        return self._instance

    def reset(self) -> None:
        """Reset the instance (for testing)."""
        self._instance = None

    def override(self, instance: T) -> None:
        """Override with a specific instance (for testing)."""
        self._instance = instance


@dataclass
class Container:
    """Dependency injection container.

    The estimator is only handed out on request (`--estimate`); services never
    fall back to it, so motion-guided masking without flows stays an error.
    """

    _estimator: Optional[Provider[FlowSource]] = None

    # Worker count shared by the services
    jobs: int = 1

    # Settings cache
    _settings: Optional[Any] = None

    @property
    def estimator(self) -> FlowSource:
        """Get the configured flow estimator."""
        if self._estimator is None:
            raise RuntimeError("Flow estimator not configured")
        return self._estimator.get()

    @property
    def has_estimator(self) -> bool:
        return self._estimator is not None

    def flow_source_for(self, flow_dir: Optional[Path] = None, estimate: bool = False) -> Optional[FlowSource]:
        """Precomputed flows in `flow_dir`, else the estimator if asked for, else None."""
        if flow_dir is not None:
            from src.flow.sources import FloDirectoryFlowSource

            return FloDirectoryFlowSource(flow_dir)
        return self.estimator if estimate else None

    @property
    def mask_service(self) -> Any:
        """Get MaskService instance."""
        from src.services.mask_service import MaskService

        return MaskService(max_workers=self.jobs)

    @property
    def pretrain_service(self) -> Any:
        """Get PretrainService instance."""
        from src.services.pretrain_service import PretrainService

        return PretrainService(mask_service=self.mask_service)

    @property
    def bench_service(self) -> Any:
        """Get BenchService instance."""
        from src.services.bench_service import BenchService

        return BenchService(jobs=self.jobs)

    @property
    def settings(self) -> Any:
        """Get application settings."""
        if self._settings is None:
            from src.config.settings import get_settings

            self._settings = get_settings()
        return self._settings

    def configure_estimator(self, factory: Callable[[], FlowSource]) -> "Container":
        """Configure the flow source behind `--estimate`."""
        self._estimator = Provider(factory)
        return self

    def configure_jobs(self, jobs: int) -> "Container":
        """Configure how many workers the services may use."""
        self.jobs = max(1, jobs)
        return self

    def reset(self) -> None:
        """Reset all providers (for testing)."""
        if self._estimator:
            self._estimator.reset()
        self._estimator = None
        self.jobs = 1
        self._settings = None


# Global container instance
container = Container()


def get_container() -> Container:
    """Get the global container instance."""
    return container


def reset_container() -> None:
    """Reset the global container (for testing)."""
    global container
    container.reset()
    container = Container()

"""Tests for dependency injection container."""

import pytest

from src.container import Container, Provider, get_container, reset_container
from src.domain.errors import MissingFlowError
from src.domain.models import MaskConfig
from src.flow.sources import FloDirectoryFlowSource, InMemoryFlowSource
from src.services.bench_service import BenchService
from src.services.mask_service import MaskService
from src.services.pretrain_service import PretrainService


class TestProvider:
    """Tests for Provider class."""

    def test_lazy_initialization(self):
        """Should not call factory until get() is called."""
        call_count = 0

        def factory():
            nonlocal call_count
            call_count += 1
            return InMemoryFlowSource()

        provider = Provider(factory)
        assert call_count == 0

        provider.get()
        provider.get()
        assert call_count == 1

    def test_reset_clears_instance(self):
        """Should create a new instance after reset()."""
        provider = Provider(InMemoryFlowSource)
        first = provider.get()
        provider.reset()
        assert provider.get() is not first

    def test_override(self):
        """Should return the overriding instance."""
        provider = Provider(InMemoryFlowSource)
        source = InMemoryFlowSource()
        provider.override(source)
        assert provider.get() is source


class TestContainer:
    """Tests for Container class."""

    def test_estimator_not_configured(self):
        """Should raise when no estimator is configured."""
        container = Container()
        assert not container.has_estimator
        with pytest.raises(RuntimeError, match="not configured"):
            _ = container.estimator

    def test_configure_estimator(self):
        """Should build the configured estimator once."""
        container = Container().configure_estimator(InMemoryFlowSource)
        assert container.has_estimator
        assert container.estimator is container.estimator

    def test_flow_source_for_directory(self, tmp_path):
        """Should prefer a flow directory over the estimator."""
        container = Container().configure_estimator(InMemoryFlowSource)
        source = container.flow_source_for(tmp_path, estimate=True)
        assert isinstance(source, FloDirectoryFlowSource)

    def test_flow_source_for_estimate(self):
        """Should hand out the estimator only when asked to."""
        container = Container().configure_estimator(InMemoryFlowSource)
        assert container.flow_source_for() is None
        assert container.flow_source_for(estimate=True) is container.estimator

    def test_services_never_default_to_estimator(self, small_clip):
        """Should keep motion-guided masking without flows an error."""
        container = Container().configure_estimator(InMemoryFlowSource)
        with pytest.raises(MissingFlowError):
            container.mask_service.generate(small_clip, None, MaskConfig(ratio=0.5))

    def test_services(self):
        """Should build services of the right types."""
        container = Container().configure_jobs(3)
        assert isinstance(container.mask_service, MaskService)
        assert isinstance(container.pretrain_service, PretrainService)
        assert isinstance(container.bench_service, BenchService)
        assert container.jobs == 3

    def test_jobs_at_least_one(self):
        """Should clamp the worker count to one."""
        assert Container().configure_jobs(0).jobs == 1

    def test_reset(self):
        """Should drop providers and settings."""
        container = Container().configure_estimator(InMemoryFlowSource).configure_jobs(4)
        _ = container.settings
        container.reset()
        assert not container.has_estimator
        assert container.jobs == 1


class TestGlobalContainer:
    """Tests for the global container."""

    def test_reset_container(self):
        """Should replace the global container."""
        first = get_container()
        first.configure_jobs(5)
        reset_container()
        assert get_container() is not first
        assert get_container().jobs == 1

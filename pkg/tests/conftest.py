"""Shared pytest fixtures."""

import numpy as np
import pytest

from src.config.settings import clear_settings_cache
from src.container import reset_container
from src.core.rng import Rng
from src.domain.models import FlowSet, SceneSpec, VideoClip
from src.synth.scenes import Scene


@pytest.fixture(autouse=True)
def fresh_container():
    """Start every test with an empty container and settings cache."""
    reset_container()
    clear_settings_cache()
    yield
    reset_container()
    clear_settings_cache()


@pytest.fixture
def small_clip() -> VideoClip:
    """A 4-frame 32x32 clip of uniform noise."""
    return VideoClip(Rng(7).uniform((4, 3, 32, 32)))


@pytest.fixture
def moving_scene() -> Scene:
    """8 frames of texture translating 8 px/frame to the right on 64x64."""
    spec = SceneSpec(velocity=(8, 0), frames=8, height=64, width=64, texture_seed=3)
    return Scene(spec, Rng(spec.texture_seed))


@pytest.fixture
def zero_flows():
    """Factory for all-zero flow sets."""

    def make(num_frames: int, base_index: int, height: int, width: int) -> FlowSet:
        return FlowSet.zeros(num_frames, base_index, height, width)

    return make


def constant_clip(num_frames: int, height: int, width: int, level: float = 0.5) -> VideoClip:
    return VideoClip(np.full((num_frames, 3, height, width), level))

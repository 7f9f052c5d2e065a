"""Configuration module."""

from .settings import (
    AppSettings,
    BenchSettings,
    FlowSettings,
    MaeSettings,
    MaskSettings,
    clear_settings_cache,
    get_settings,
)

__all__ = [
    "AppSettings",
    "BenchSettings",
    "FlowSettings",
    "MaeSettings",
    "MaskSettings",
    "clear_settings_cache",
    "get_settings",
]

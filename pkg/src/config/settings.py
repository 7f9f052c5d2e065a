"""Application settings using Pydantic."""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.domain.models import MaeConfig, MaskConfig, ScenePattern
from src.flow.horn_schunck import HornSchunckConfig


class FlowSettings(BaseSettings):
    """Optical flow estimator configuration."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MGMASK_FLOW_",
        extra="ignore",
    )

    levels: int = Field(default=4)
    downscale: int = Field(default=2)
    iterations: int = Field(default=100)
    alpha: float = Field(default=15.0)
    # Re-warps per pyramid level
    warps: int = Field(default=2)

    def to_config(self) -> HornSchunckConfig:
        return HornSchunckConfig(
            levels=self.levels,
            downscale=self.downscale,
            iterations=self.iterations,
            alpha=self.alpha,
            warps=self.warps,
        )


class MaskSettings(BaseSettings):
    """Mask generation defaults."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MGMASK_MASK_",
        extra="ignore",
    )

    ratio: float = Field(default=0.9)
    base_frame: str = Field(default="middle")
    init: str = Field(default="gmm")
    sigma_x: float = Field(default=16.0)
    sigma_y: float = Field(default=16.0)
    warp: str = Field(default="backward")
    fill: str = Field(default="tube")
    sample: str = Field(default="frame_level")
    strategy: str = Field(default="motion_guided")
    noise_std: float = Field(default=0.0)

    def to_config(self, seed: int = 0, **overrides) -> MaskConfig:
        """Validated MaskConfig; keyword overrides that are None are ignored."""
        values = {
            "ratio": self.ratio,
            "base_frame": self.base_frame,
            "init": self.init,
            "sigma": (self.sigma_x, self.sigma_y),
            "warp": self.warp,
            "fill": self.fill,
            "sample": self.sample,
            "strategy": self.strategy,
            "noise_std": self.noise_std,
            "seed": seed,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return MaskConfig(**values)


class MaeSettings(BaseSettings):
    """Toy MAE defaults."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MGMASK_MAE_",
        extra="ignore",
    )

    embed_dim: int = Field(default=64)
    depth: int = Field(default=3)
    heads: int = Field(default=4)
    decoder_dim: int = Field(default=32)
    decoder_depth: int = Field(default=1)
    norm_eps: float = Field(default=1e-6)
    learning_rate: float = Field(default=0.05)
    steps: int = Field(default=100)
    batch_size: int = Field(default=2)

    def to_config(self, seed: int = 0, ratio: float = 0.9, **overrides) -> MaeConfig:
        values = {
            "embed_dim": self.embed_dim,
            "depth": self.depth,
            "heads": self.heads,
            "decoder_dim": self.decoder_dim,
            "decoder_depth": self.decoder_depth,
            "norm_eps": self.norm_eps,
            "learning_rate": self.learning_rate,
            "steps": self.steps,
            "batch_size": self.batch_size,
            "ratio": ratio,
            "seed": seed,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return MaeConfig(**values)


class BenchSettings(BaseSettings):
    """Leakage benchmark defaults."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MGMASK_BENCH_",
        extra="ignore",
    )

    # Comma-separated px/frame speeds
    speeds: str = Field(default="0,4,8,16")
    # Comma-separated scene patterns
    patterns: str = Field(default="translating_texture,two_objects")
    # Comma-separated strategies
    strategies: str = Field(default="motion_guided,tube,random")
    seeds: int = Field(default=50)
    horizon: int = Field(default=1)
    margin: int = Field(default=0)
    frames: int = Field(default=16)
    height: int = Field(default=128)
    width: int = Field(default=128)
    object_size: int = Field(default=24)

    def get_speeds(self) -> list[int]:
        """Get list of benchmark speeds."""
        if not self.speeds:
            return []
        return [int(s.strip()) for s in self.speeds.split(",") if s.strip()]

    def get_patterns(self) -> list[ScenePattern]:
        """Get list of benchmark scene patterns."""
        if not self.patterns:
            return []
        return [ScenePattern(p.strip()) for p in self.patterns.split(",") if p.strip()]

    def get_strategies(self) -> list[str]:
        """Get list of strategies to compare."""
        if not self.strategies:
            return []
        return [s.strip() for s in self.strategies.split(",") if s.strip()]


class AppSettings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MGMASK_",
        extra="ignore",
    )

    seed: Optional[int] = Field(default=None)
    log_level: str = Field(default="WARNING")
    jobs: int = Field(default=1)

    # Nested settings - manually create to avoid env prefix issues
    @property
    def flow(self) -> FlowSettings:
        return FlowSettings()

    @property
    def mask(self) -> MaskSettings:
        return MaskSettings()

    @property
    def mae(self) -> MaeSettings:
        return MaeSettings()

    @property
    def bench(self) -> BenchSettings:
        return BenchSettings()

    def resolve_seed(self, flag: Optional[int]) -> int:
        """Explicit flag, else MGMASK_SEED, else 0."""
        if flag is not None:
            return flag
        return self.seed if self.seed is not None else 0


@lru_cache
def get_settings() -> AppSettings:
    """Get cached application settings."""
    return AppSettings()


def clear_settings_cache() -> None:
    """Clear the settings cache (useful for testing)."""
    get_settings.cache_clear()

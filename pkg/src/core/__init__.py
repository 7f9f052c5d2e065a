"""Tensor core: deterministic random streams."""

from .rng import Rng, rng_uniform_indices

__all__ = ["Rng", "rng_uniform_indices"]

"""Deterministic, splittable random number generation.

Every stream is a numpy ``Generator`` over the counter-based Philox bit
generator, keyed by a SeedSequence whose spawn key records the path of
``split`` calls. Child streams therefore depend only on (seed, path), never on
how many draws a sibling made or on which worker ran first.
"""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from src.domain.errors import InvalidInputError


@dataclass
class Rng:
    """Seeded random stream."""

    seed: int
    path: tuple[int, ...] = ()
    _generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidInputError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._generator = np.random.Generator(np.random.Philox(sequence))

    def split(self, *keys: int) -> "Rng":
        """Derive an independent child stream identified by `keys`."""
        return Rng(self.seed, self.path + tuple(int(k) for k in keys))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def uniform_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn uniformly from range(n)."""
        return rng_uniform_indices(self, n, k)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._generator.integers(low, high))

    def uniform(self, size: int | tuple[int, ...]) -> npt.NDArray[np.float64]:
        return self._generator.random(size)

    def normal(self, size: int | tuple[int, ...], std: float = 1.0) -> npt.NDArray[np.float64]:
        return self._generator.normal(0.0, std, size)

    def bernoulli(self, p: float, size: int | tuple[int, ...]) -> npt.NDArray[np.bool_]:
        return self._generator.random(size) < p


def rng_uniform_indices(rng: Rng, n: int, k: int) -> list[int]:
    """Draw k distinct indices uniformly from [0, n)."""
    if k < 0 or n < 0:
        raise InvalidInputError(f"Counts must be non-negative, got n={n}, k={k}")
    if k > n:
        raise InvalidInputError(f"Cannot draw {k} distinct indices from {n}")
    if k == 0:
        return []
    return [int(i) for i in rng.generator.choice(n, size=k, replace=False)]

# core/rng.py
"""
Deterministic, counter-based random number generation.

Rng wraps numpy's Generator on top of the Philox-4x64 bit generator. Philox is a
counter-based generator: its output is a pure function of (key, counter), and
numpy derives the key from the seed through SeedSequence. The stream is
therefore identical on every platform for the same seed and call sequence.

Seed splitting: Rng.spawn(n) derives n children through SeedSequence.spawn.
Child i of a parent seeded with s uses the SeedSequence(entropy=s,
spawn_key=(i,)); children are statistically independent of each other and of
the parent, and depend only on (s, i, number of earlier spawn calls).
"""
from typing import List, Optional, Sequence

import numpy as np

_SEED_MASK = (1 << 64) - 1


class Rng:
    """Single-owner random stream. Hand each parallel worker its own child."""

    def __init__(self, seed: int = 0, _sequence: Optional[np.random.SeedSequence] = None):
        """
        Args:
            seed: 64-bit unsigned seed (larger values are reduced modulo 2**64)
        """
        self.seed = int(seed) & _SEED_MASK
        self._sequence = _sequence if _sequence is not None else np.random.SeedSequence(self.seed)
        self._generator = np.random.Generator(np.random.Philox(self._sequence))

    @property
    def generator(self) -> np.random.Generator:
        """Underlying numpy Generator, for vectorized draws."""
        return self._generator

    def spawn(self, n: int) -> List["Rng"]:
        """Derive n independent child streams (see module docstring)."""
        return [Rng(self.seed, _sequence=child) for child in self._sequence.spawn(n)]

    def library_seed(self) -> int:
        """Draw a 32-bit seed for third-party APIs that take an integer random_state."""
        return int(self._generator.integers(0, 2**32 - 1, dtype=np.uint64))

    def random(self, size=None):
        return self._generator.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._generator.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._generator.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._generator.integers(low, high, size)

    def permutation(self, values: Sequence) -> list:
        """Uniform random permutation of a sequence, returned as a list."""
        order = self._generator.permutation(len(values))
        return [values[i] for i in order]

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"

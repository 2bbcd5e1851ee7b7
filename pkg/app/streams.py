"""
Seirkit Random Streams

Per-replica generators keyed by (master seed, replica index). The key feeds a
counter-based Philox bit generator, so a replica's numbers never depend on
which worker ran it or on how many other replicas exist.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ModelDefinitionError

_SEED_LIMIT = 2 ** 64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replica_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < _SEED_LIMIT:
            raise ModelDefinitionError(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.replica_index < 0:
            raise ModelDefinitionError(f"replica index must be >= 0, got {self.replica_index}")

    def key(self) -> np.ndarray:
        """128-bit Philox key hashed from the seed pair."""
        return np.random.SeedSequence([self.master_seed, self.replica_index]).generate_state(2, dtype=np.uint64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key()))

    def child(self, replica_index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, replica_index)

"""Reproducible Gaussian increments from a counter-based generator.

Every standard normal is a pure function of
``(seed, trajectory, step, component)``: the pair ``(seed, trajectory)``
keys a Philox-4x64 stream and the draw for ``(step, component)`` sits at
word ``step * width + component`` of that stream. Each 64-bit word maps to
one normal by inverse-CDF transform, so any block of steps can be
regenerated independently of chunking, ordering or parallel scheduling.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_WORDS_PER_BLOCK = 4


def stream_key(seed: int, trajectory: int = 0) -> np.ndarray:
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trajectory)])
    return seq.generate_state(2, dtype=np.uint64)


class NoiseStream:
    """Standard normal increments of shape ``(steps, width)`` for one trajectory."""

    def __init__(self, seed: int, trajectory: int, width: int):
        if width < 1:
            raise ValueError("width must be positive")
        self.seed = int(seed)
        self.trajectory = int(trajectory)
        self.width = int(width)
        self._key = stream_key(seed, trajectory)

    def _raw(self, first_word: int, count: int) -> np.ndarray:
        block, offset = divmod(first_word, _WORDS_PER_BLOCK)
        counter = np.array([block, 0, 0, 0], dtype=np.uint64)
        bg = np.random.Philox(key=self._key, counter=counter)
        return bg.random_raw(offset + count)[offset:]

    def normals(self, start_step: int, steps: int) -> np.ndarray:
        """Normals for steps ``start_step .. start_step + steps - 1``."""
        if steps <= 0:
            return np.empty((0, self.width))
        raw = self._raw(start_step * self.width, steps * self.width)
        # top 53 bits, shifted to the open interval (0, 1)
        u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)
        return ndtri(u).reshape(steps, self.width)

    def at(self, step: int) -> np.ndarray:
        return self.normals(step, 1)[0]

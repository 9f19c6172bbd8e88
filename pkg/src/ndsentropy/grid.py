"""Uniform discretization of the unit interval."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    """Cell centers p_i = (i + 0.5)/size of a uniform partition of [0, 1]."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 2:
            raise ConfigurationError(f"grid size must be an integer >= 2, got {self.size!r}")

    @property
    def spacing(self) -> float:
        return 1.0 / self.size

    @cached_property
    def centers(self) -> np.ndarray:
        c = (np.arange(self.size) + 0.5) / self.size
        c.flags.writeable = False
        return c

    def nearest_node(self, y: float) -> int:
        """Index of the cell containing y (ties between cells go to the upper cell)."""
        return min(self.size - 1, max(0, int(np.floor(y * self.size))))

    def ball_nodes(self, x: float, radius: float) -> np.ndarray:
        """Indices j with |p_j - x| < radius (strict inequality)."""
        lo, hi = self.window_bounds(x, radius)
        if hi < lo:
            return np.empty(0, dtype=np.int64)
        return np.arange(lo, hi + 1, dtype=np.int64)

    def window_bounds(self, y, radius):
        """Inclusive index range [lo, hi] of centers with |p_j - y| < radius.

        The inequality is strict; a 1e-12 coordinate snap keeps exact boundary
        ties (e.g. a neighbor at distance exactly ``radius``) excluded even
        when y carries float round-off.  Accepts scalars or arrays; the result
        is clipped to [0, size - 1].
        """
        n = self.size
        tie = n * 1e-12
        lo = np.floor(n * (np.asarray(y) - radius) - 0.5 + tie).astype(np.int64) + 1
        hi = np.ceil(n * (np.asarray(y) + radius) - 0.5 - tie).astype(np.int64) - 1
        return np.clip(lo, 0, n - 1), np.clip(hi, 0, n - 1)

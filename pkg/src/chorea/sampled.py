"""Grid-sampled N-body loops over one full period."""
from __future__ import annotations

import numpy as np

from .nbody import DISTANCE_FLOOR


class SampledLoop:
    """Positions of all bodies at M uniform nodes t_m = 2 pi m / M, shape (M, N, 3)."""

    def __init__(self, positions):
        pos = np.array(positions, dtype=float)
        if pos.ndim != 3 or pos.shape[-1] != 3:
            raise ValueError("positions must have shape (M, N, 3)")
        self.positions = pos

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def times(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.m) / self.m

    def min_distance(self) -> float:
        pos = self.positions
        diff = pos[:, :, None, :] - pos[:, None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        iu = np.triu_indices(self.n, 1)
        return float(dist[:, iu[0], iu[1]].min())

    def is_degenerate(self) -> bool:
        return self.min_distance() < DISTANCE_FLOOR

    def allclose(self, other: "SampledLoop", atol: float = 1e-12) -> bool:
        return self.positions.shape == other.positions.shape and bool(
            np.allclose(self.positions, other.positions, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"SampledLoop(M={self.m}, N={self.n})"

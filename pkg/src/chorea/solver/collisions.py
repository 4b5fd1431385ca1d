"""Pairwise-distance bookkeeping at the symmetric moments l*pi/N."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sampled import SampledLoop


@dataclass(frozen=True)
class NearCollision:
    node: int
    time: float
    pair: tuple[int, int]
    distance: float
    moment: int | None  # l when the node sits at l*pi/N


@dataclass(frozen=True)
class CollisionReport:
    moment_min_distance: tuple[float, ...]  # indexed by l = 0..2N-1
    moment_closest_pair: tuple[tuple[int, int], ...]
    candidates: tuple[NearCollision, ...] = field(default=())
    violations: tuple[NearCollision, ...] = field(default=())

    @property
    def empty(self) -> bool:
        return not self.candidates and not self.violations

    def as_dict(self) -> dict:
        def entry(c):
            return {"node": c.node, "time": c.time, "pair": list(c.pair),
                    "distance": c.distance, "moment": c.moment}
        return {
            "moment_min_distance": list(self.moment_min_distance),
            "moment_closest_pair": [list(p) for p in self.moment_closest_pair],
            "candidates": [entry(c) for c in self.candidates],
            "violations": [entry(c) for c in self.violations],
        }


def allowed_pairs(n: int, moment: int) -> set[tuple[int, int]]:
    """Pairs {a, b} that may collide at t = l*pi/N: a + b = -l (mod N)."""
    return {(a, b) for a in range(n) for b in range(a + 1, n) if (a + b + moment) % n == 0}


def pair_distances(sl: SampledLoop) -> tuple[np.ndarray, list[tuple[int, int]]]:
    pos = sl.positions
    iu = np.triu_indices(sl.n, 1)
    diff = pos[:, iu[0], :] - pos[:, iu[1], :]
    return np.linalg.norm(diff, axis=-1), list(zip(iu[0].tolist(), iu[1].tolist()))


def collision_monitor(sl: SampledLoop, threshold: float = 1e-4) -> CollisionReport:
    """Near-collisions (distance below ``threshold``) split into admissible candidates and violations.

    A candidate sits exactly at a moment l*pi/N and involves a pair allowed at
    that moment; anything else is a violation.
    """
    m, n = sl.m, sl.n
    if m % (2 * n):
        raise ValueError("grid must be a multiple of 2N")
    step = m // (2 * n)
    dist, pairs = pair_distances(sl)
    moment_nodes = step * np.arange(2 * n)
    at_moments = dist[moment_nodes]
    closest = at_moments.argmin(axis=1)
    candidates, violations = [], []
    for node, col in zip(*np.nonzero(dist < threshold)):
        node, col = int(node), int(col)
        moment = node // step if node % step == 0 else None
        hit = NearCollision(node, float(sl.times[node]), pairs[col], float(dist[node, col]), moment)
        if moment is not None and pairs[col] in allowed_pairs(n, moment):
            candidates.append(hit)
        else:
            violations.append(hit)
    return CollisionReport(
        tuple(float(v) for v in at_moments.min(axis=1)),
        tuple(pairs[c] for c in closest),
        tuple(candidates),
        tuple(violations),
    )

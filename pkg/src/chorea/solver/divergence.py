"""Escape to infinity along the rotating polygon family at integer frame velocity."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from ..loops import FourierLoop, synthesize_q0
from ..ngon import NGonLabel, build_rotating_ngon, ngon_loop
from ..topology import matching_ngon_labels
from .problem import Problem


@dataclass(frozen=True)
class Iterate:
    loop: FourierLoop
    action: float


@dataclass(frozen=True)
class DivergenceEvidence:
    label: NGonLabel
    shape_distance: float
    action_trace: tuple[float, ...]
    size_trace: tuple[float, ...]

    @property
    def growth(self) -> float:
        return self.size_trace[-1] / self.size_trace[0]


def integer_omega(omega: float) -> int | None:
    k = round(omega)
    return int(k) if abs(omega - k) < 1e-12 else None


def detector_label(p: Problem) -> NGonLabel | None:
    """The polygon the loop may escape along, or None when the problem is coercive."""
    k = integer_omega(p.omega)
    if k is None or not 1 <= k <= p.n - 1 or gcd(k, p.n) != 1:
        return None
    for label in matching_ngon_labels(p.xi):
        if label.k == k:
            return label
    return None


def loop_size(fl: FourierLoop, m: int) -> float:
    return float(np.max(np.linalg.norm(synthesize_q0(fl, m), axis=1)))


def normalized_shape_distance(fl: FourierLoop, label: NGonLabel, m: int) -> float:
    """sup_t | q/|q| - polygon/|polygon| | with |.| the sup-norm over the period."""
    q = synthesize_q0(fl, m)
    ref = synthesize_q0(ngon_loop(label, 1.0), m)
    q = q / np.max(np.linalg.norm(q, axis=1))
    ref = ref / np.max(np.linalg.norm(ref, axis=1))
    return float(np.max(np.linalg.norm(q - ref, axis=1)))


def shape_distance_to_ngon(fl: FourierLoop, label: NGonLabel, omega: float, m: int) -> float:
    """Relative sup distance to the rotating polygon at ``omega``; scale-free form at omega = k."""
    if omega == label.k:
        return normalized_shape_distance(fl, label, m)
    orbit = build_rotating_ngon(label, omega, sym=fl.sym)
    diff = synthesize_q0(fl, m) - synthesize_q0(orbit.loop, m)
    return float(np.max(np.linalg.norm(diff, axis=1)) / orbit.radius)


def divergence_detector(history: Sequence[Iterate], p: Problem) -> DivergenceEvidence | None:
    label = detector_label(p)
    if label is None or len(history) < 2:
        return None
    tol = p.tolerances
    actions = np.array([it.action for it in history])
    sizes = np.array([loop_size(it.loop, p.grid) for it in history])
    monotone = bool(np.all(np.diff(actions) <= 0.0))
    if sizes[-1] < tol.divergence_growth * sizes[0] or not monotone or actions[-1] >= tol.divergence_action:
        return None
    return DivergenceEvidence(
        label,
        normalized_shape_distance(history[-1].loop, label, p.grid),
        tuple(float(a) for a in actions),
        tuple(float(s) for s in sizes),
    )

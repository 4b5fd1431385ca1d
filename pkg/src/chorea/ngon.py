"""Regular N-gon central configurations and the rotating choreographies built on them."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import OmegaEqualsK
from .loops import FourierLoop
from .nbody import Configuration
from .symmetry import SymmetryClass


@dataclass(frozen=True)
class NGonLabel:
    """Polygon where body i+1 sits k vertices clockwise from body i; ``sign`` puts body 0 on the +/- x-axis."""

    n: int
    k: int
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not 1 <= self.k <= self.n - 1 or gcd(self.k, self.n) != 1:
            raise ValueError(f"k={self.k} is not coprime to N={self.n} in 1..N-1")

    def __str__(self):
        return f"N{self.n}k{self.k}{'+' if self.sign > 0 else '-'}"


def ngon_radius(n: int) -> float:
    """Radius R with R^3 = (1/4) sum_j csc(j pi/N): unit angular velocity balances gravity."""
    j = np.arange(1, n)
    return float((0.25 * np.sum(1.0 / np.sin(j * np.pi / n))) ** (1.0 / 3.0))


def build_ngon(label: NGonLabel) -> Configuration:
    i = np.arange(label.n)
    zeta = label.sign * ngon_radius(label.n) * np.exp(-2j * np.pi * label.k * i / label.n)
    return Configuration(zeta, np.zeros(label.n))


def ngon_scale(k: int, omega: float) -> float:
    if omega == k:
        raise OmegaEqualsK(f"omega equals k={k}: no rotating polygon of finite size")
    return abs(omega - k) ** (-2.0 / 3.0)


def ngon_loop(label: NGonLabel, scale: float, order: int | None = None,
              sym: SymmetryClass | None = None) -> FourierLoop:
    """Loop zeta_0(t) = scale * sign * R * e^{-i k t}."""
    order = max(order or label.k, label.k)
    sym = sym or SymmetryClass(label.n)
    amp = scale * label.sign * ngon_radius(label.n)
    a, b, c = np.zeros(order + 1), np.zeros(order), np.zeros(order + 1)
    a[label.k] = amp
    b[label.k - 1] = -amp
    return FourierLoop(a, b, c, sym)


@dataclass(frozen=True)
class NGonOrbit:
    label: NGonLabel
    omega: float
    radius: float
    loop: FourierLoop


def build_rotating_ngon(label: NGonLabel, omega: float, order: int | None = None,
                        sym: SymmetryClass | None = None) -> NGonOrbit:
    scale = ngon_scale(label.k, omega)
    loop = ngon_loop(label, scale, order, sym)
    return NGonOrbit(label, float(omega), scale * ngon_radius(label.n), loop)

"""Minimization problems: symmetry class, topological class, frame velocity, discretization."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import floor

import numpy as np

from ..action import default_fix_x_mean
from ..errors import ConfigError
from ..loops import FourierLoop, reflect_y, rotate_frame
from ..symmetry import Kind, SymmetryClass
from ..topology import SignPattern, hn_compatible, negate


@dataclass(frozen=True)
class Tolerances:
    grad_tol: float = 1e-8
    step_tol: float = 1e-12
    collision_dist: float = 1e-4
    max_iters: int = 20000
    # divergence protocol: loop size growth factor and action level that certify escape
    divergence_growth: float = 100.0
    divergence_action: float = 1e-4


@dataclass(frozen=True)
class Problem:
    sym: SymmetryClass
    xi: SignPattern
    omega: float
    order: int = 32
    grid: int | None = None
    fix_x_mean: bool | None = None
    fix_z_mean: bool = True
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        n = self.sym.n
        if self.grid is None:
            object.__setattr__(self, "grid", 128 * n)
        if self.fix_x_mean is None:
            object.__setattr__(self, "fix_x_mean", default_fix_x_mean(self.omega, n))
        if len(self.xi) != n - 1:
            raise ConfigError(f"xi has length {len(self.xi)}, expected N-1 = {n - 1}")
        if not self.fix_z_mean:
            raise ConfigError("fix_z_mean must be true")
        if self.grid % (2 * n):
            raise ConfigError(f"grid {self.grid} is not a multiple of 2N = {2 * n}")
        if self.grid <= 2 * self.order:
            raise ConfigError(f"grid {self.grid} must exceed twice the order {self.order}")
        if self.sym.kind is Kind.HN:
            if not hn_compatible(self.xi, n):
                raise ConfigError(f"xi {self.xi} is not compatible with the extended symmetry")
            if self.omega != 0.0 and not self.sym.rotating_allowed:
                raise ConfigError("extended symmetry with even N requires omega = 0")

    @property
    def n(self) -> int:
        return self.sym.n

    def in_range(self) -> bool:
        return 0.0 <= self.omega <= self.n

    def with_omega(self, omega: float) -> "Problem":
        return replace(self, omega=float(omega), fix_x_mean=default_fix_x_mean(omega, self.n))


@dataclass(frozen=True)
class OmegaReduction:
    """omega = reduced + 2*shift*N (after undoing conjugation when ``conjugate``)."""

    shift: int
    conjugate: bool

    def to_reduced(self, fl: FourierLoop, n: int) -> FourierLoop:
        out = rotate_frame(fl, 2 * self.shift * n) if self.shift else fl
        return reflect_y(out) if self.conjugate else out

    def from_reduced(self, fl: FourierLoop, n: int) -> FourierLoop:
        out = reflect_y(fl) if self.conjugate else fl
        return rotate_frame(out, -2 * self.shift * n) if self.shift else out


def reduce_problem(p: Problem) -> tuple[Problem, OmegaReduction]:
    """Map any omega into [0, N] using the 2N-periodicity and the y-reflection."""
    n = p.n
    shift = floor((p.omega + n) / (2 * n))
    omega = p.omega - 2 * shift * n
    xi = p.xi
    conjugate = omega < 0
    if conjugate:
        omega, xi = -omega, negate(xi)
    omega = float(np.clip(omega, 0.0, n))
    reduced = replace(p, omega=omega, xi=xi, fix_x_mean=default_fix_x_mean(omega, n))
    return reduced, OmegaReduction(shift, conjugate)

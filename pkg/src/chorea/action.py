"""Rotating-frame action of a choreography and its gradient in coefficient space."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CollisionSingularity, GridNotDivisible
from .loops import FourierLoop
from .nbody import DISTANCE_FLOOR
from .symmetry import SymmetryClass, coefficient_constraints

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ActionValue:
    total: float
    kinetic: float
    potential_integral: float
    omega: float

    @property
    def kinetic_part(self) -> float:
        return 0.5 * self.kinetic


@dataclass(frozen=True)
class Gradient:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b, self.c])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))


def default_fix_x_mean(omega: float, n: int) -> bool:
    return abs(omega) < 1e-12 or abs(omega - n) < 1e-12


@lru_cache(maxsize=64)
def _basis(order: int, m: int):
    t = TWO_PI * np.arange(m) / m
    phase = np.outer(t, np.arange(order + 1))
    cos = np.cos(phase)
    sin = np.sin(phase)[:, 1:]
    cos.setflags(write=False)
    sin.setflags(write=False)
    return cos, sin


class ActionFunctional:
    """A_omega on the flattened coefficient vector [a, b, c] of a fixed order and grid."""

    def __init__(self, sym: SymmetryClass, order: int, m: int, omega: float,
                 fix_x_mean: bool | None = None, fix_z_mean: bool = True,
                 floor: float = DISTANCE_FLOOR):
        if m % (2 * sym.n):
            raise GridNotDivisible(f"grid of {m} nodes is not a multiple of 2N={2 * sym.n}")
        if m <= 2 * order:
            raise ValueError(f"need M > 2F (M={m}, F={order})")
        self.sym, self.order, self.m, self.omega = sym, order, m, float(omega)
        self.floor = floor
        self.cos, self.sin = _basis(order, m)
        mask = coefficient_constraints(sym, order)
        free = np.concatenate([mask.a, mask.b, mask.c])
        if fix_x_mean is None:
            fix_x_mean = default_fix_x_mean(omega, sym.n)
        if fix_x_mean:
            free[0] = False
        if fix_z_mean:
            free[2 * order + 1] = False
        self.free = free
        k = np.arange(1, order + 1, dtype=float)
        self._wp = (self.omega + k) ** 2
        self._wm = (self.omega - k) ** 2
        self._kz = np.arange(order + 1, dtype=float) ** 2
        self.potential_enabled = True  # test hook: isolates the kinetic quadratic form

    @property
    def n(self) -> int:
        return self.sym.n

    def split(self, v):
        f = self.order
        return v[: f + 1], v[f + 1 : 2 * f + 1], v[2 * f + 1 :]

    def kinetic_norm(self, v) -> float:
        a, b, c = self.split(v)
        s, d = a[1:] + b, a[1:] - b
        horizontal = TWO_PI * (self.omega**2 * a[0] ** 2 + 0.25 * np.sum(self._wp * s**2 + self._wm * d**2))
        return self.n * (horizontal + np.pi * np.sum(self._kz * c**2))

    def kinetic_gradient(self, v) -> np.ndarray:
        """Gradient of half the kinetic norm."""
        a, b, c = self.split(v)
        s, d = a[1:] + b, a[1:] - b
        n = self.n
        ga = np.empty_like(a)
        ga[0] = n * TWO_PI * self.omega**2 * a[0]
        ga[1:] = 0.5 * n * np.pi * (self._wp * s + self._wm * d)
        gb = 0.5 * n * np.pi * (self._wp * s - self._wm * d)
        gc = n * np.pi * self._kz * c
        return np.concatenate([ga, gb, gc])

    def samples(self, v) -> np.ndarray:
        a, b, c = self.split(v)
        return np.stack([self.cos @ a, self.sin @ b, self.cos @ c], axis=-1)

    def _pairs(self, q):
        step = self.m // self.n
        for d in range(1, self.n):
            diff = q - np.roll(q, -d * step, axis=0)
            dist = np.sqrt(np.einsum("mk,mk->m", diff, diff))
            low = dist < self.floor
            if np.any(low):
                node = int(np.argmax(low))
                raise CollisionSingularity(
                    f"bodies 0 and {d} collide at node {node}", node=node, pair=(0, d)
                )
            yield d * step, diff, dist

    def potential_integral(self, v) -> float:
        if not self.potential_enabled:
            return 0.0
        q = self.samples(v)
        total = sum(float(np.sum(1.0 / dist)) for _, _, dist in self._pairs(q))
        return TWO_PI / self.m * 0.5 * self.n * total

    def value(self, v) -> ActionValue:
        v = np.asarray(v, dtype=float)
        kin = self.kinetic_norm(v)
        pot = self.potential_integral(v)
        return ActionValue(float(0.5 * kin + pot), float(kin), float(pot), self.omega)

    def value_and_grad(self, v) -> tuple[float, np.ndarray]:
        """Total action and its gradient with respect to the free coefficients (others zeroed)."""
        v = np.asarray(v, dtype=float)
        total = 0.5 * self.kinetic_norm(v)
        grad = self.kinetic_gradient(v)
        if self.potential_enabled:
            q = self.samples(v)
            gq = np.zeros_like(q)
            acc = 0.0
            for shift, diff, dist in self._pairs(q):
                acc += float(np.sum(1.0 / dist))
                w = diff / dist[:, None] ** 3
                gq -= w
                gq += np.roll(w, shift, axis=0)
            scale = TWO_PI / self.m * 0.5 * self.n
            total += scale * acc
            gq *= scale
            grad = grad + np.concatenate([self.cos.T @ gq[:, 0], self.sin.T @ gq[:, 1], self.cos.T @ gq[:, 2]])
        return total, np.where(self.free, grad, 0.0)


def _functional(fl: FourierLoop, omega: float, m: int, **kw) -> ActionFunctional:
    return ActionFunctional(fl.sym, fl.order, m, omega, **kw)


def action_omega(fl: FourierLoop, omega: float, m: int | None = None) -> ActionValue:
    m = m or 128 * fl.n
    return _functional(fl, omega, m).value(fl.vector())


def gradient_omega(fl: FourierLoop, omega: float, m: int | None = None,
                   fix_x_mean: bool | None = None, fix_z_mean: bool = True) -> Gradient:
    m = m or 128 * fl.n
    fun = _functional(fl, omega, m, fix_x_mean=fix_x_mean, fix_z_mean=fix_z_mean)
    _, g = fun.value_and_grad(fl.vector())
    return Gradient(*fun.split(g))

"""Dihedral symmetry groups acting on N-body loops and the constraints they induce."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GridNotClosed, GridNotDivisible
from .sampled import SampledLoop

TWO_PI = 2.0 * np.pi

R_XZ = np.diag([1.0, -1.0, 1.0])  # reflection through the xz-plane
R_X = np.diag([1.0, -1.0, -1.0])  # half-turn about the x-axis


class Kind(str, Enum):
    DN = "DN"
    HN = "HN"


@dataclass(frozen=True)
class SymmetryClass:
    n: int
    kind: Kind = Kind.DN

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two bodies")
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def rotating_allowed(self) -> bool:
        # the z-axis is a rotation axis of the extended group only for odd N
        return self.kind is Kind.DN or self.n % 2 == 1

    def generators(self) -> list["GroupElementAction"]:
        gens = [generator_g(self.n), generator_h(self.n)]
        if self.kind is Kind.HN:
            gens.append(generator_f(self.n))
        return gens


@dataclass(frozen=True)
class GroupElementAction:
    """Element acting by t -> time_sign*t + time_shift, a 3x3 map and a relabelling.

    ``index_map[i]`` is the image of body index i.
    """

    time_sign: int
    time_shift: float
    space_map: np.ndarray
    index_map: tuple[int, ...]

    def __post_init__(self):
        if self.time_sign not in (1, -1):
            raise ValueError("time_sign must be +1 or -1")
        rho = np.asarray(self.space_map, dtype=float)
        if not np.allclose(rho @ rho.T, np.eye(3), atol=1e-12):
            raise ValueError("space_map must be orthogonal")
        perm = tuple(int(i) for i in self.index_map)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("index_map must be a permutation")
        object.__setattr__(self, "space_map", rho)
        object.__setattr__(self, "index_map", perm)

    @property
    def n(self) -> int:
        return len(self.index_map)

    def time_map(self, t):
        return self.time_sign * np.asarray(t) + self.time_shift

    def inverse(self) -> "GroupElementAction":
        perm = np.empty(self.n, dtype=int)
        perm[list(self.index_map)] = np.arange(self.n)
        return GroupElementAction(
            self.time_sign,
            -self.time_sign * self.time_shift,
            self.space_map.T,
            tuple(perm),
        )

    def __matmul__(self, other: "GroupElementAction") -> "GroupElementAction":
        """Composition: apply ``other`` first, then ``self``."""
        return GroupElementAction(
            self.time_sign * other.time_sign,
            self.time_sign * other.time_shift + self.time_shift,
            self.space_map @ other.space_map,
            tuple(self.index_map[j] for j in other.index_map),
        )


def identity(n: int) -> GroupElementAction:
    return GroupElementAction(1, 0.0, np.eye(3), tuple(range(n)))


def generator_g(n: int) -> GroupElementAction:
    return GroupElementAction(1, -TWO_PI / n, np.eye(3), tuple((i + 1) % n for i in range(n)))


def _swap_product(n, pairs):
    perm = list(range(n))
    for i, j in pairs:
        perm[i], perm[j] = j, i
    return tuple(perm)


def generator_h(n: int) -> GroupElementAction:
    pairs = [(i, n - 1 - i) for i in range((n - 1) // 2 + 1) if i != n - 1 - i]
    return GroupElementAction(-1, TWO_PI / n, R_XZ, _swap_product(n, pairs))


def generator_f(n: int) -> GroupElementAction:
    if n % 2 == 0:
        half = n // 2
        return GroupElementAction(1, 0.0, R_X, _swap_product(n, [(i, half + i) for i in range(half)]))
    half = (n - 1) // 2
    pairs = [(i, half - i) for i in range(half // 2 + 1)]
    pairs += [(half + 1 + i, 2 * half - i) for i in range((half - 1) // 2 + 1)]
    pairs = [(i, j) for i, j in pairs if i != j]
    return GroupElementAction(-1, np.pi / n, R_X, _swap_product(n, pairs))


def _node_shift(shift: float, m: int) -> int:
    steps = shift * m / TWO_PI
    k = int(round(steps))
    if abs(steps - k) > 1e-9:
        raise GridNotClosed(f"time shift {shift!r} is not a multiple of the grid spacing")
    return k


def act(e: GroupElementAction, loop: SampledLoop) -> SampledLoop:
    """Transformed loop (e.q)_j(t) = rho q_{sigma^-1(j)}(tau^-1 t) on the grid."""
    pos = loop.positions
    m, n = pos.shape[:2]
    if n != e.n:
        raise ValueError("element and loop disagree on the number of bodies")
    inv = e.inverse()
    shift = _node_shift(inv.time_shift, m)
    src_nodes = (inv.time_sign * np.arange(m) + shift) % m
    src_bodies = np.array(inv.index_map)
    out = pos[src_nodes][:, src_bodies, :] @ e.space_map.T
    return SampledLoop(out)


def expand_choreography(q0, n: int) -> SampledLoop:
    """All bodies from the generating path: q_i(t) = q_0(t + 2 pi i / N)."""
    q0 = np.asarray(q0, dtype=float)
    m = q0.shape[0]
    if m % n:
        raise GridNotDivisible(f"grid of {m} nodes is not divisible by N={n}")
    step = m // n
    idx = (np.arange(m)[:, None] + step * np.arange(n)[None, :]) % m
    return SampledLoop(q0[idx])


@dataclass(frozen=True)
class BoundaryConstraint:
    """q_{body}(time) = space_map @ q_{partner}(partner_time)."""

    body: int
    time: float
    partner: int
    partner_time: float
    space_map: np.ndarray
    label: str

    def residual(self, path_at) -> float:
        lhs = path_at(self.time)[self.body]
        rhs = self.space_map @ path_at(self.partner_time)[self.partner]
        return float(np.max(np.abs(lhs - rhs)))


def boundary_conditions(sym: SymmetryClass) -> list[BoundaryConstraint]:
    """Relations between bodies at the ends of the fundamental domain [0, pi/N].

    Derived from the action of h (pairs at t=0 and t=pi/N, plus bodies fixed
    to the xz-plane); for the extended group the relations of f are appended.
    """
    n = sym.n
    end = np.pi / n
    out = []
    for i in range(1, n):
        j = n - i
        if i < j:
            out.append(BoundaryConstraint(i, 0.0, j, 0.0, R_XZ, f"q{i}(0)=Rxz q{j}(0)"))
    for i in range(n):
        j = n - 1 - i
        if i < j:
            out.append(BoundaryConstraint(i, end, j, end, R_XZ, f"q{i}(pi/N)=Rxz q{j}(pi/N)"))
    for i in range(n):
        if (n - i) % n == i:
            out.append(BoundaryConstraint(i, 0.0, i, 0.0, R_XZ, f"q{i}(0)=Rxz q{i}(0)"))
        if n - 1 - i == i:
            out.append(BoundaryConstraint(i, end, i, end, R_XZ, f"q{i}(pi/N)=Rxz q{i}(pi/N)"))
    if sym.kind is Kind.HN:
        f = generator_f(n)
        for i in range(n):
            j = f.index_map[i]
            if n % 2:
                out.append(BoundaryConstraint(i, 0.0, j, end, R_X, f"q{i}(0)=Rx q{j}(pi/N)"))
            elif i < j:
                out.append(BoundaryConstraint(i, 0.0, j, 0.0, R_X, f"q{i}(0)=Rx q{j}(0)"))
                out.append(BoundaryConstraint(i, end, j, end, R_X, f"q{i}(pi/N)=Rx q{j}(pi/N)"))
    return out


@dataclass(frozen=True)
class CoefficientMask:
    """Admissible harmonics of the generating body for a given order F.

    x_0 = sum a_k cos kt (k=0..F), y_0 = sum b_k sin kt (k=1..F),
    z_0 = sum c_k cos kt (k=0..F).  ``b[0]`` refers to harmonic 1.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def order(self) -> int:
        return self.a.size - 1

    def project(self, a, b, c):
        return (np.where(self.a, a, 0.0), np.where(self.b, b, 0.0), np.where(self.c, c, 0.0))


def coefficient_constraints(sym: SymmetryClass, order: int) -> CoefficientMask:
    if order < 1:
        raise ValueError("order must be at least 1")
    k = np.arange(order + 1)
    a = np.ones(order + 1, dtype=bool)
    b = np.ones(order, dtype=bool)
    c = np.ones(order + 1, dtype=bool)
    if sym.kind is Kind.HN:
        even = k % 2 == 0
        a = even.copy()
        c = ~even
        # odd N: q0(pi - t) = Rx q0(t); even N: q0(t + pi) = Rx q0(t)
        b = even[1:] if sym.n % 2 else ~even[1:]
    return CoefficientMask(a, b, c)

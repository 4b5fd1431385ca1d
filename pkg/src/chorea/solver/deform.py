"""Local deformations that separate colliding bodies along a fixed axis."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from ..errors import PreconditionViolated
from ..nbody import potential_array

E1 = np.array([1.0, 0.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SampledPath:
    """Positions and velocities of all bodies at quadrature nodes of [0, T].

    Nodes with zero weight (the endpoints) take part in precondition checks only.
    """

    times: np.ndarray
    weights: np.ndarray
    positions: np.ndarray  # (P, N, 3)
    velocities: np.ndarray
    omega: float = 0.0

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    @classmethod
    def from_function(cls, state: Callable[[float], tuple[np.ndarray, np.ndarray]], duration: float,
                      breakpoints=(), nodes_per_panel: int = 40, omega: float = 0.0) -> "SampledPath":
        """Gauss-Legendre panels in s with t = s^3 (resolves t^(2/3) collision arcs), split at breakpoints."""
        edges = sorted({0.0, duration, *(b for b in breakpoints if 0.0 < b < duration)})
        s_edges = np.cbrt(np.array(edges))
        x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        times, weights = [0.0], [0.0]
        for lo, hi in zip(s_edges[:-1], s_edges[1:]):
            s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            times.extend(s**3)
            weights.extend(0.5 * (hi - lo) * w * 3 * s**2)
        times.append(duration)
        weights.append(0.0)
        pos, vel = zip(*(state(t) for t in times))
        return cls(np.array(times), np.array(weights), np.array(pos, dtype=float),
                   np.array(vel, dtype=float), omega)

    def lagrangian(self) -> np.ndarray:
        """Rotating-frame Lagrangian at every node with positive weight (zero elsewhere)."""
        out = np.zeros(self.times.size)
        live = self.weights > 0
        pos, vel = self.positions[live], self.velocities[live]
        # inertial velocity of a rotating-frame path: v + omega * J q
        vx = vel[..., 0] - self.omega * pos[..., 1]
        vy = vel[..., 1] + self.omega * pos[..., 0]
        kin = 0.5 * np.sum(vx**2 + vy**2 + vel[..., 2] ** 2, axis=1)
        pot = np.array([potential_array(q) for q in pos])
        out[live] = kin + pot
        return out

    def action(self) -> float:
        return float(self.weights @ self.lagrangian())


class DeformationKind(str, Enum):
    DFM2 = "Dfm2"
    DFM4 = "Dfm4"


@dataclass(frozen=True)
class DeformationSpec:
    kind: DeformationKind
    epsilon: float
    tau: tuple[int, ...] | None = None
    lower: tuple[int, ...] = ()  # I_0: shifted down
    upper: tuple[int, ...] = ()  # I_1: shifted up
    pair: tuple[int, int] | None = None  # (j, k): j rises, k sinks
    axis: str = "e3"
    cluster: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DeformationKind(self.kind))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.axis not in ("e1", "e3"):
            raise ValueError("axis must be e1 or e3")
        if self.kind is DeformationKind.DFM2:
            if self.pair is None or self.pair[0] == self.pair[1]:
                raise ValueError("Dfm2 needs a pair of distinct bodies")
            if set(self.lower) & set(self.upper) or set(self.pair) & (set(self.lower) | set(self.upper)):
                raise ValueError("Dfm2 partition and pair must be disjoint")
            if not (self.lower or self.upper):
                raise ValueError("Dfm2 needs at least one body outside the pair")
        else:
            if self.tau is None or any(v not in (-1, 0, 1) for v in self.tau):
                raise ValueError("Dfm4 needs tau with entries in {-1, 0, 1}")
            if self.axis != "e3":
                raise ValueError("Dfm4 moves along e3 only")
            cluster = self.cluster if self.cluster is not None else tuple(i for i, v in enumerate(self.tau) if v)
            object.__setattr__(self, "cluster", tuple(cluster))
            if any(self.tau[i] for i in range(len(self.tau)) if i not in cluster):
                raise ValueError("tau must vanish outside the cluster")
            if len({self.tau[i] for i in cluster}) < 2:
                raise ValueError("tau must take two different values on the cluster")


def smoothstep_profile(t, epsilon: float):
    """f = 1 on [0, eps^2], cubic decrease to 0 on [eps^2, eps], 0 afterwards; returns (f, f')."""
    t = np.asarray(t, dtype=float)
    lo, hi = epsilon**2, epsilon
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    f = 1.0 - s * s * (3.0 - 2.0 * s)
    df = np.where((t > lo) & (t < hi), -6.0 * s * (1.0 - s) / (hi - lo), 0.0)
    return f, df


def _separated(path: SampledPath, spec: DeformationSpec, axis: int, tol: float) -> str | None:
    coord = path.positions[..., axis]
    j, k = spec.pair
    zj, zk = coord[:, j], coord[:, k]
    if abs(zj[0] - zk[0]) > tol:
        return f"bodies {j} and {k} do not collide at t=0"
    if zj[-1] <= zk[-1]:
        return f"body {j} does not end above body {k}"
    if np.any(zk > zk[0] + tol) or np.any(zk < zk[-1] - tol):
        return f"body {k} leaves [{zk[-1]}, {zk[0]}]"
    if np.any(zj < zj[0] - tol) or np.any(zj > zj[-1] + tol):
        return f"body {j} leaves [{zj[0]}, {zj[-1]}]"
    for i in spec.lower:
        if np.any(coord[:, i] > zk[-1] + tol):
            return f"lower body {i} rises above body {k}"
    for i in spec.upper:
        if np.any(coord[:, i] < zj[-1] - tol):
            return f"upper body {i} sinks below body {j}"
    return None


def _dfm2(path: SampledPath, spec: DeformationSpec, tol: float) -> SampledPath:
    axis = 0 if spec.axis == "e1" else 2
    if axis == 0 and path.omega != 0.0:
        raise PreconditionViolated("Dfm2 along e1 requires omega = 0")
    name = "x" if axis == 0 else "z"
    problem = _separated(path, spec, axis, tol)
    if problem:
        raise PreconditionViolated(f"path is not {name}-separated: {problem}")
    eps = spec.epsilon
    if eps >= path.duration:
        raise PreconditionViolated("epsilon must be smaller than the path duration")
    t = path.times
    bridge = np.where(t < eps, t * (2 * eps - t), eps**2)
    rate = np.where(t < eps, 2 * eps - 2 * t, 0.0)
    pos, vel = path.positions.copy(), path.velocities.copy()
    pos[:, list(spec.lower), axis] -= eps**2
    pos[:, list(spec.upper), axis] += eps**2
    j, k = spec.pair
    pos[:, j, axis] += bridge
    pos[:, k, axis] -= bridge
    vel[:, j, axis] += rate
    vel[:, k, axis] -= rate
    return SampledPath(t, path.weights, pos, vel, path.omega)


def _dfm4(path: SampledPath, spec: DeformationSpec, tol: float) -> SampledPath:
    if len(spec.tau) != path.n:
        raise PreconditionViolated("tau length differs from the number of bodies")
    z = path.positions[..., 2]
    if np.any(np.abs(z - z[0]) > tol):
        raise PreconditionViolated("path is not planar: some z_i is not constant")
    start = path.positions[0, list(spec.cluster)]
    if np.any(np.abs(start - start[0]) > tol):
        raise PreconditionViolated(f"bodies {list(spec.cluster)} do not form a cluster collision at t=0")
    eps = spec.epsilon
    if eps >= min(1.0, path.duration):
        raise PreconditionViolated("epsilon must be below min(1, T)")
    f, df = smoothstep_profile(path.times, eps)
    tau = np.array(spec.tau, dtype=float)
    pos, vel = path.positions.copy(), path.velocities.copy()
    pos[..., 2] += eps * f[:, None] * tau[None, :]
    vel[..., 2] += eps * df[:, None] * tau[None, :]
    return SampledPath(path.times, path.weights, pos, vel, path.omega)


def deform(path: SampledPath, spec: DeformationSpec, tol: float = 1e-9) -> SampledPath:
    scale = max(1.0, float(np.max(np.abs(path.positions))))
    if spec.kind is DeformationKind.DFM2:
        return _dfm2(path, spec, tol * scale)
    return _dfm4(path, spec, tol * scale)

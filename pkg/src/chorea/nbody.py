"""Equal-mass Newtonian N-body kernel: potential, forces, rotating-frame field."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollisionSingularity

DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class Configuration:
    """Positions of N unit masses, horizontal part as complex numbers."""

    zeta: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=complex).reshape(-1)
        z = np.asarray(self.z, dtype=float).reshape(-1)
        if zeta.shape != z.shape:
            raise ValueError("zeta and z must have the same length")
        if zeta.size < 2:
            raise ValueError("a configuration needs at least two bodies")
        if not (np.all(np.isfinite(zeta)) and np.all(np.isfinite(z))):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.zeta.size

    @property
    def positions(self) -> np.ndarray:
        return stack_xyz(self.zeta, self.z)

    @classmethod
    def from_positions(cls, pos) -> "Configuration":
        pos = np.asarray(pos, dtype=float)
        return cls(pos[:, 0] + 1j * pos[:, 1], pos[:, 2])


@dataclass(frozen=True)
class Velocity:
    dzeta: np.ndarray
    dz: np.ndarray

    def __post_init__(self):
        dzeta = np.asarray(self.dzeta, dtype=complex).reshape(-1)
        dz = np.asarray(self.dz, dtype=float).reshape(-1)
        if dzeta.shape != dz.shape:
            raise ValueError("dzeta and dz must have the same length")
        object.__setattr__(self, "dzeta", dzeta)
        object.__setattr__(self, "dz", dz)

    @property
    def vectors(self) -> np.ndarray:
        return stack_xyz(self.dzeta, self.dz)

    @classmethod
    def from_vectors(cls, vel) -> "Velocity":
        vel = np.asarray(vel, dtype=float)
        return cls(vel[:, 0] + 1j * vel[:, 1], vel[:, 2])


@dataclass(frozen=True)
class PairEnergy:
    pair: tuple[int, int]
    value: float

    def __post_init__(self):
        if self.pair[0] == self.pair[1]:
            raise ValueError("pair indices must differ")


def stack_xyz(zeta, z) -> np.ndarray:
    zeta = np.asarray(zeta)
    return np.stack([zeta.real, zeta.imag, np.asarray(z, dtype=float)], axis=-1)


def _pair_vectors(pos, floor):
    """Differences q_i - q_j and distances for all ordered pairs, shape (..., N, N, 3)."""
    diff = pos[..., :, None, :] - pos[..., None, :, :]
    dist = np.sqrt(np.einsum("...k,...k->...", diff, diff))
    n = pos.shape[-2]
    off = ~np.eye(n, dtype=bool)
    close = (dist < floor) & off
    if np.any(close):
        where = np.argwhere(close)[0]
        pair = (int(where[-2]), int(where[-1]))
        node = tuple(int(w) for w in where[:-2]) or None
        raise CollisionSingularity(
            f"bodies {pair} closer than {floor:g}", node=node, pair=pair
        )
    dist = np.where(off, dist, np.inf)
    return diff, dist


def potential_array(pos, floor: float = DISTANCE_FLOOR) -> np.ndarray:
    """Sum over pairs of 1/|q_i - q_j| for positions of shape (..., N, 3)."""
    pos = np.asarray(pos, dtype=float)
    _, dist = _pair_vectors(pos, floor)
    return 0.5 * np.sum(1.0 / dist, axis=(-2, -1))


def force_array(pos, floor: float = DISTANCE_FLOOR) -> np.ndarray:
    """Gradient of the potential with respect to every position, shape (..., N, 3)."""
    pos = np.asarray(pos, dtype=float)
    diff, dist = _pair_vectors(pos, floor)
    return -np.sum(diff / dist[..., None] ** 3, axis=-2)


def rotating_accel_array(pos, vel, omega: float, coriolis: str = "velocity",
                         floor: float = DISTANCE_FLOOR) -> np.ndarray:
    """Accelerations from the Euler-Lagrange equations of the rotating-frame Lagrangian.

    ``coriolis="position"`` evaluates the literal variant with the position in
    place of the velocity; it exists only for comparison diagnostics.
    """
    if coriolis not in ("velocity", "position"):
        raise ValueError("coriolis must be 'velocity' or 'position'")
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    acc = force_array(pos, floor)
    if omega == 0.0:
        return acc
    src = vel if coriolis == "velocity" else pos
    # -2 w J s for s = sx + i sy is (2 w sy, -2 w sx)
    acc[..., 0] += omega**2 * pos[..., 0] + 2.0 * omega * src[..., 1]
    acc[..., 1] += omega**2 * pos[..., 1] - 2.0 * omega * src[..., 0]
    return acc


def potential(c: Configuration, floor: float = DISTANCE_FLOOR) -> float:
    return float(potential_array(c.positions, floor))


def force(c: Configuration, floor: float = DISTANCE_FLOOR) -> np.ndarray:
    """Forces as an (N, 3) array; row i is dU/dq_i."""
    return force_array(c.positions, floor)


def rotating_accel(c: Configuration, v: Velocity, omega: float,
                   coriolis: str = "velocity") -> tuple[np.ndarray, np.ndarray]:
    acc = rotating_accel_array(c.positions, v.vectors, omega, coriolis)
    return acc[:, 0] + 1j * acc[:, 1], acc[:, 2]


def to_inertial(c: Configuration, t: float, omega: float) -> Configuration:
    return Configuration(np.exp(1j * omega * t) * c.zeta, c.z.copy())


def pair_energy(c: Configuration, v: Velocity, j: int, k: int) -> PairEnergy:
    if j == k:
        raise ValueError("pair indices must differ")
    pos, vel = c.positions, v.vectors
    d = np.linalg.norm(pos[j] - pos[k])
    if d < DISTANCE_FLOOR:
        raise CollisionSingularity(f"bodies {(j, k)} coincide", pair=(j, k))
    kin = 0.5 * (vel[j] @ vel[j] + vel[k] @ vel[k])
    return PairEnergy((j, k), float(kin - 1.0 / d))

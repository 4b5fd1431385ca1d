"""Post-hoc checks on computed loops: equations of motion, monotonicity, planarity, collisions."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import AmbiguousPairing, CollisionSingularity, DegenerateLoop, InsufficientSamples, NotIsolated
from .loops import FourierLoop, spectral_derivative, synthesize
from .nbody import Configuration, Velocity, force_array, pair_energy, rotating_accel_array
from .sampled import SampledLoop
from .solver.collisions import CollisionReport, collision_monitor

# (positions, velocities) of all bodies at time t, both (N, 3), inertial frame
Trajectory = Callable[[float], tuple[np.ndarray, np.ndarray]]

RICHARDSON_LEVELS = 7


def _as_sampled(loop) -> SampledLoop:
    if isinstance(loop, SampledLoop):
        return loop
    if isinstance(loop, FourierLoop):
        return synthesize(loop, 128 * loop.n)
    raise TypeError("expected a SampledLoop or FourierLoop")


# ---------------------------------------------------------------------------
# equations of motion


def eom_residual(loop, omega: float, coriolis: str = "velocity") -> float:
    """Max over nodes of |q'' - rotating acceleration|, relative to the largest acceleration."""
    sl = _as_sampled(loop)
    pos = sl.positions
    if sl.is_degenerate():
        raise CollisionSingularity("loop has a collision at a grid node")
    vel = spectral_derivative(pos, 1)
    acc = spectral_derivative(pos, 2)
    rhs = rotating_accel_array(pos, vel, omega, coriolis)
    scale = float(np.max(np.linalg.norm(rhs, axis=-1)))
    return float(np.max(np.linalg.norm(acc - rhs, axis=-1)) / scale)


def _rotating_rhs(omega: float, n: int):
    def rhs(_t, y):
        pos = y[: 3 * n].reshape(n, 3)
        vel = y[3 * n :].reshape(n, 3)
        return np.concatenate([vel.ravel(), rotating_accel_array(pos, vel, omega).ravel()])
    return rhs


def reintegration_error(loop, omega: float, rtol: float = 1e-12) -> float:
    """Integrate one period from the node-0 state; closing error relative to the loop diameter."""
    sl = _as_sampled(loop)
    pos = sl.positions
    vel = spectral_derivative(pos, 1)
    y0 = np.concatenate([pos[0].ravel(), vel[0].ravel()])
    sol = solve_ivp(_rotating_rhs(omega, sl.n), (0.0, 2 * np.pi), y0, method="DOP853", rtol=rtol, atol=rtol)
    end = sol.y[: 3 * sl.n, -1].reshape(sl.n, 3)
    return float(np.max(np.linalg.norm(end - pos[0], axis=-1)) / _diameter(pos[:, 0]))


# ---------------------------------------------------------------------------
# shape


class Monotonicity(str, Enum):
    CONSTANT_X = "ConstantX"
    CONSTANT_Z = "ConstantZ"
    STRICT_MONOTONE = "StrictMonotone"
    VIOLATED = "Violated"


def monotonicity_check(loop, which: str, rel_tol: float = 1e-6) -> Monotonicity:
    """Sign structure of x_0' or z_0' on the half period (0, pi)."""
    axis = {"x": 0, "z": 2}[which]
    sl = _as_sampled(loop)
    vel = spectral_derivative(sl.positions[:, 0, :], 1)
    scale = max(float(np.max(np.linalg.norm(vel, axis=-1))), 1e-300)
    d = vel[:, axis]
    tol = rel_tol * scale
    if np.max(np.abs(d)) < tol:
        return Monotonicity.CONSTANT_X if which == "x" else Monotonicity.CONSTANT_Z
    interior = d[1 : sl.m // 2]
    if np.all(interior > tol) or np.all(interior < -tol):
        return Monotonicity.STRICT_MONOTONE
    return Monotonicity.VIOLATED


def frame_shifted(sl: SampledLoop, k: int) -> SampledLoop:
    """Multiply every horizontal position by e^{ikt} (k = N maps the omega = N frame to the inertial one)."""
    pos = sl.positions.copy()
    phase = np.exp(1j * k * sl.times)[:, None]
    zeta = (pos[..., 0] + 1j * pos[..., 1]) * phase
    pos[..., 0], pos[..., 1] = zeta.real, zeta.imag
    return SampledLoop(pos)


def _diameter(points) -> float:
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


@dataclass(frozen=True)
class Planarity:
    normal: tuple[float, float, float]
    residual: float
    xz_symmetric: bool


def planarity_check(loop, tol: float = 1e-6) -> Planarity:
    """Best-fit plane through the curve of q_0; residual is max distance over diameter."""
    pts = _as_sampled(loop).positions[:, 0, :]
    diameter = _diameter(pts)
    if diameter < 1e-10:
        raise DegenerateLoop("loop diameter below 1e-10")
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal = vt[-1]
    residual = float(np.max(np.abs(centered @ normal)) / diameter)
    # the plane is mapped to itself by y -> -y iff its normal is along e_y or orthogonal to it
    ny = abs(normal[1])
    return Planarity(tuple(float(v) for v in normal), residual, bool(ny < tol or ny > 1 - tol))


# ---------------------------------------------------------------------------
# collisions


@dataclass(frozen=True)
class CollisionLocalFrame:
    """Pair (j, k) near a collision at t0: center, relative position of j, spherical coordinates.

    ``dt`` holds |t - t0| for every sample; all other arrays are aligned with it.
    """

    pair: tuple[int, int]
    side: str
    dt: np.ndarray
    r: np.ndarray
    phi: np.ndarray | None = None
    theta: np.ndarray | None = None
    phi_rate: np.ndarray | None = None
    theta_rate: np.ndarray | None = None
    energy: np.ndarray | None = None
    center: np.ndarray | None = None
    center_velocity: np.ndarray | None = None

    def __post_init__(self):
        if self.side not in ("before", "after"):
            raise ValueError("side must be 'before' or 'after'")
        if np.any(np.asarray(self.r) < 0):
            raise ValueError("r must be non-negative")
        if self.phi is not None and (np.any(self.phi < 0) or np.any(self.phi > np.pi)):
            raise ValueError("phi must lie in [0, pi]")

    @classmethod
    def from_trajectory(cls, traj: Trajectory, pair: tuple[int, int], t0: float, side: str,
                        h: float, levels: int = RICHARDSON_LEVELS) -> "CollisionLocalFrame":
        j, k = pair
        sign = -1.0 if side == "before" else 1.0
        dt = h * 0.5 ** np.arange(levels)
        rows = []
        for s in dt:
            pos, vel = traj(t0 + sign * s)
            pos, vel = np.asarray(pos, float), np.asarray(vel, float)
            qc, vc = 0.5 * (pos[j] + pos[k]), 0.5 * (vel[j] + vel[k])
            rel, drel = pos[j] - qc, vel[j] - vc
            r = float(np.linalg.norm(rel))
            rho2 = rel[0] ** 2 + rel[1] ** 2
            phi = float(np.arccos(np.clip(rel[2] / r, -1.0, 1.0)))
            theta = float(np.arctan2(rel[1], rel[0]))
            r_dot = float(rel @ drel) / r
            phi_rate = (rel[2] * r_dot - drel[2] * r) / (r * np.sqrt(rho2)) if rho2 > 0 else 0.0
            theta_rate = (rel[0] * drel[1] - rel[1] * drel[0]) / rho2 if rho2 > 0 else 0.0
            energy = pair_energy(Configuration.from_positions(pos), Velocity.from_vectors(vel), j, k).value
            rows.append((r, phi, theta, phi_rate, theta_rate, energy, qc, vc))
        r, phi, theta, phi_rate, theta_rate, energy, qc, vc = (np.array(col) for col in zip(*rows))
        return cls(tuple(pair), side, dt, r, phi, np.unwrap(theta), phi_rate, theta_rate, energy, qc, vc)


@dataclass(frozen=True)
class SundmanFit:
    exponent: float
    c1: float


def sundman_fit(frame: CollisionLocalFrame) -> SundmanFit:
    """Least-squares fit of log r against log |t - t0|."""
    dt, r = np.asarray(frame.dt, float), np.asarray(frame.r, float)
    if dt.size < 3 or np.any(dt <= 0) or np.any(r <= 0):
        raise InsufficientSamples("need at least three samples with positive r and |t - t0|")
    slope, intercept = np.polyfit(np.log(dt), np.log(r), 1)
    return SundmanFit(float(slope), float(np.exp(intercept)))


def richardson_limit(dt, values) -> float:
    """Neville extrapolation of values(dt) to dt = 0 (dyadic samples)."""
    x = np.asarray(dt, float)
    p = np.array(values, dtype=float)
    n = p.size
    for level in range(1, n):
        for i in range(n - level):
            # p[i] <- value at 0 of the interpolant through x[i..i+level]
            p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i])
    return float(p[0])


@dataclass(frozen=True)
class PairRegularizability:
    pair: tuple[int, int]
    delta_phi: float
    phi_rate: float  # max of the two one-sided limits in absolute value
    delta_theta: float  # wrapped to (-pi, pi]
    theta_rate: float
    delta_energy: float
    energy_scale: float
    center_jump: float
    center_velocity_jump: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _wrap(angle: float) -> float:
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


def regularizability_check(traj: Trajectory, t0: float, pairs: Sequence[tuple[int, int]],
                           h: float = 1e-2, tol: float = 1e-3,
                           levels: int = RICHARDSON_LEVELS) -> list[PairRegularizability]:
    """Matching of one-sided collision limits of the polar/azimuthal angles, their rates and pair energy.

    ``traj`` must be in the inertial frame.
    """
    seen: set[int] = set()
    for j, k in pairs:
        if j == k or {j, k} & seen:
            raise AmbiguousPairing(f"pairs {list(pairs)} share a body")
        seen |= {j, k}
    out = []
    for pair in pairs:
        before = CollisionLocalFrame.from_trajectory(traj, pair, t0, "before", h, levels)
        after = CollisionLocalFrame.from_trajectory(traj, pair, t0, "after", h, levels)
        for frame in (before, after):
            if not (np.all(np.diff(frame.r) < 0) and frame.r[-1] < 0.5 * frame.r[0]):
                raise NotIsolated(f"pair {pair} does not approach a collision on the {frame.side} side")
        pos, _ = traj(t0 + h * 0.5 ** (levels - 1))
        pos = np.asarray(pos, float)
        for i in range(pos.shape[0]):
            if i not in pair and np.linalg.norm(pos[i] - after.center[-1]) < 10.0 * after.r[-1]:
                raise AmbiguousPairing(f"body {i} takes part in the collision of pair {pair}")
        lim = {}
        for name in ("phi", "theta", "phi_rate", "theta_rate", "energy"):
            lim[name] = tuple(richardson_limit(f.dt, getattr(f, name)) for f in (before, after))
        qc = [richardson_limit(f.dt, f.center[:, i]) for f in (before, after) for i in range(3)]
        vc = [richardson_limit(f.dt, f.center_velocity[:, i]) for f in (before, after) for i in range(3)]
        d_phi = lim["phi"][1] - lim["phi"][0]
        d_theta = _wrap(lim["theta"][1] - lim["theta"][0])
        phi_rate = max(abs(v) for v in lim["phi_rate"])
        theta_rate = max(abs(v) for v in lim["theta_rate"])
        d_energy = lim["energy"][1] - lim["energy"][0]
        e_scale = max(1.0, abs(lim["energy"][0]), abs(lim["energy"][1]))
        c_jump = float(np.linalg.norm(np.subtract(qc[3:], qc[:3])))
        v_jump = float(np.linalg.norm(np.subtract(vc[3:], vc[:3])))
        passed = (abs(d_phi) < tol and phi_rate < tol and abs(d_theta) < tol and theta_rate < tol
                  and abs(d_energy) < tol * e_scale and c_jump < tol and v_jump < tol)
        out.append(PairRegularizability(tuple(pair), float(d_phi), float(phi_rate), float(d_theta),
                                        float(theta_rate), float(d_energy), float(e_scale),
                                        c_jump, v_jump, bool(passed)))
    return out


def _inertial_rhs(n: int):
    def rhs(_t, y):
        pos = y[: 3 * n].reshape(n, 3)
        return np.concatenate([y[3 * n :], force_array(pos).ravel()])
    return rhs


def refine_near_collision(positions, velocities, t_start: float, t0: float, pair: tuple[int, int],
                          h: float, levels: int = RICHARDSON_LEVELS, rtol: float = 1e-12) -> CollisionLocalFrame:
    """Integrate the inertial equations from a clean state toward the collision moment t0.

    The frame is sampled at |t - t0| = h 2^-m; requires 0 < h < |t_start - t0|.
    """
    positions = np.asarray(positions, float)
    velocities = np.asarray(velocities, float)
    n = positions.shape[0]
    gap = abs(t_start - t0)
    if not 0 < h < gap:
        raise InsufficientSamples("h must lie strictly between 0 and |t_start - t0|")
    sign = 1.0 if t_start > t0 else -1.0
    dt = h * 0.5 ** np.arange(levels)
    t_eval = t0 + sign * dt
    y0 = np.concatenate([positions.ravel(), velocities.ravel()])
    sol = solve_ivp(_inertial_rhs(n), (t_start, t_eval[-1]), y0, method="DOP853", rtol=rtol,
                    atol=rtol * 1e-3, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise InsufficientSamples(f"integration toward the collision failed: {sol.message}")
    states = {float(t): sol.y[:, i] for i, t in enumerate(sol.t)}

    def traj(t):
        y = states[float(t)]
        return y[: 3 * n].reshape(n, 3), y[3 * n :].reshape(n, 3)

    side = "after" if sign > 0 else "before"
    return CollisionLocalFrame.from_trajectory(traj, pair, t0, side, h, levels)


def inertial_state(fl: FourierLoop, t: float, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Inertial positions and velocities of every body of a rotating-frame choreography at time t."""
    times = t + 2 * np.pi * np.arange(fl.n) / fl.n
    q, dq = fl.evaluate(times), fl.evaluate(times, 1)
    c, s = np.cos(omega * t), np.sin(omega * t)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    # d/dt (R q) = R (q' + omega J q)
    dq_frame = dq + omega * np.stack([-q[:, 1], q[:, 0], np.zeros(fl.n)], axis=1)
    return q @ rot.T, dq_frame @ rot.T


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class DiagnosticsReport:
    eom_residual: float
    monotone_x: Monotonicity
    monotone_z: Monotonicity
    planarity: Planarity
    collision: CollisionReport
    min_distance_ratio: float
    reintegration_error: float | None = None
    eom_residual_position_coriolis: float | None = None
    sundman: SundmanFit | None = None
    regularizability: tuple[PairRegularizability, ...] | None = None

    def as_dict(self) -> dict:
        return {
            "eom_residual": self.eom_residual,
            "eom_residual_position_coriolis": self.eom_residual_position_coriolis,
            "monotone_x": self.monotone_x.value,
            "monotone_z": self.monotone_z.value,
            "planarity": {"normal": list(self.planarity.normal), "residual": self.planarity.residual,
                          "xz_symmetric": self.planarity.xz_symmetric},
            "collision": self.collision.as_dict(),
            "min_distance_ratio": self.min_distance_ratio,
            "reintegration_error": self.reintegration_error,
            "sundman": None if self.sundman is None else asdict(self.sundman),
            "regularizability": None if self.regularizability is None
            else [r.as_dict() for r in self.regularizability],
        }


def run_diagnostics(loop, omega: float, reintegrate: bool = True,
                    collision_threshold: float = 1e-4) -> DiagnosticsReport:
    """Full suite on a rotating-frame loop sampled on a uniform grid."""
    sl = _as_sampled(loop)
    collision = collision_monitor(sl, collision_threshold)
    # at omega = N the monotone structure lives in the non-rotating frame
    shape = frame_shifted(sl, sl.n) if omega == sl.n else sl
    ratio = sl.min_distance() / _diameter(sl.positions[:, 0])
    if sl.is_degenerate():
        nan = float("nan")
        return DiagnosticsReport(nan, monotonicity_check(shape, "x"), monotonicity_check(shape, "z"),
                                 planarity_check(sl), collision, ratio)
    return DiagnosticsReport(
        eom_residual(sl, omega),
        monotonicity_check(shape, "x"),
        monotonicity_check(shape, "z"),
        planarity_check(sl),
        collision,
        ratio,
        reintegration_error(sl, omega) if reintegrate else None,
        eom_residual(sl, omega, coriolis="position") if omega else None,
    )


def verdicts(report: DiagnosticsReport, eom_tol: float = 1e-5, closure_tol: float = 1e-4) -> dict[str, bool]:
    """Pass/fail summary of a report at the default thresholds."""
    out = {
        "eom": bool(report.eom_residual < eom_tol),
        "monotone_x": report.monotone_x is not Monotonicity.VIOLATED,
        "monotone_z": report.monotone_z is not Monotonicity.VIOLATED,
        "collision_free": report.collision.empty,
    }
    if report.reintegration_error is not None:
        out["reintegration"] = bool(report.reintegration_error < closure_tol)
    return out

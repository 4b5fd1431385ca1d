"""Fourier representation of the generating body and operations on loop space."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BoundaryMismatch, GridNotDivisible
from .nbody import potential_array
from .sampled import SampledLoop
from .symmetry import (
    R_XZ,
    CoefficientMask,
    SymmetryClass,
    boundary_conditions,
    coefficient_constraints,
    expand_choreography,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierLoop:
    """Generating body q_0 of a D_N-equivariant choreography.

    x_0(t) = sum_{k=0}^F a_k cos kt, y_0(t) = sum_{k=1}^F b_k sin kt,
    z_0(t) = sum_{k=0}^F c_k cos kt.  ``b`` has length F and ``b[k-1]``
    multiplies sin kt.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sym: SymmetryClass = field(compare=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        c = np.array(self.c, dtype=float)
        if not (a.ndim == b.ndim == c.ndim == 1) or a.size != b.size + 1 or c.size != a.size:
            raise ValueError("coefficient lengths must be F+1, F, F+1")
        if a.size < 2:
            raise ValueError("order must be at least 1")
        mask = self.mask
        if np.any(a[~mask.a]) or np.any(b[~mask.b]) or np.any(c[~mask.c]):
            raise ValueError(f"coefficients violate the {self.sym.kind.value} constraints")
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def order(self) -> int:
        return self.a.size - 1

    @property
    def n(self) -> int:
        return self.sym.n

    @property
    def mask(self) -> CoefficientMask:
        return coefficient_constraints(self.sym, self.a.size - 1)

    @classmethod
    def zeros(cls, sym: SymmetryClass, order: int) -> "FourierLoop":
        return cls(np.zeros(order + 1), np.zeros(order), np.zeros(order + 1), sym)

    @classmethod
    def projected(cls, a, b, c, sym: SymmetryClass) -> "FourierLoop":
        mask = coefficient_constraints(sym, len(a) - 1)
        return cls(*mask.project(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)), sym)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b, self.c])

    def with_vector(self, v) -> "FourierLoop":
        f = self.order
        v = np.asarray(v, dtype=float)
        return replace(self, a=v[: f + 1], b=v[f + 1 : 2 * f + 1], c=v[2 * f + 1 :])

    def scaled(self, factor: float) -> "FourierLoop":
        return replace(self, a=self.a * factor, b=self.b * factor, c=self.c * factor)

    def resized(self, order: int) -> "FourierLoop":
        """Truncate or zero-pad to a new order."""
        def fit(arr, size):
            out = np.zeros(size)
            keep = min(size, arr.size)
            out[:keep] = arr[:keep]
            return out
        return FourierLoop.projected(fit(self.a, order + 1), fit(self.b, order), fit(self.c, order + 1), self.sym)

    def evaluate(self, t, derivative: int = 0) -> np.ndarray:
        """q_0 (or its derivative) at times t, shape (len(t), 3)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k = np.arange(self.order + 1)
        phase = np.outer(t, k)
        cos, sin = np.cos(phase), np.sin(phase)
        kd = k.astype(float) ** derivative
        # d^p/dt^p cos = k^p cos(kt + p pi/2), sin likewise
        shift = derivative % 4
        cos_d = [cos, -sin, -cos, sin][shift] * kd
        sin_d = [sin, cos, -sin, -cos][shift] * kd
        x = cos_d @ self.a
        y = sin_d[:, 1:] @ self.b
        z = cos_d @ self.c
        return np.stack([x, y, z], axis=-1)

    def checkpoints(self) -> np.ndarray:
        """y_0(k pi / N) for k = 1..N-1."""
        t = np.pi * np.arange(1, self.n) / self.n
        return self.evaluate(t)[:, 1]


def _check_grid(m: int, n: int):
    if m % (2 * n):
        raise GridNotDivisible(f"grid of {m} nodes is not a multiple of 2N={2 * n}")


def grid_times(m: int) -> np.ndarray:
    return TWO_PI * np.arange(m) / m


def synthesize_q0(fl: FourierLoop, m: int, derivative: int = 0) -> np.ndarray:
    return fl.evaluate(grid_times(m), derivative)


def synthesize(fl: FourierLoop, m: int) -> SampledLoop:
    """All bodies on M uniform nodes, via exact trigonometric evaluation of q_0."""
    _check_grid(m, fl.n)
    return expand_choreography(synthesize_q0(fl, m), fl.n)


def analyze(samples, order: int, sym: SymmetryClass) -> FourierLoop:
    """Trigonometric interpolation of q_0 followed by projection onto the class subspace.

    ``samples`` is either a SampledLoop (body 0 is used) or an (M, 3) array.
    """
    q0 = samples.positions[:, 0, :] if isinstance(samples, SampledLoop) else np.asarray(samples, float)
    m = q0.shape[0]
    if m <= 2 * order:
        raise ValueError(f"need M > 2F (M={m}, F={order})")
    spec = np.fft.rfft(q0, axis=0) / m
    a = 2.0 * spec[: order + 1, 0].real
    c = 2.0 * spec[: order + 1, 2].real
    a[0] /= 2.0
    c[0] /= 2.0
    b = -2.0 * spec[1 : order + 1, 1].imag
    return FourierLoop.projected(a, b, c, sym)


def spectral_derivative(samples, order: int = 1) -> np.ndarray:
    """Derivative of 2pi-periodic samples along axis 0 by FFT (Nyquist mode dropped)."""
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[0]
    spec = np.fft.rfft(samples, axis=0)
    k = np.arange(spec.shape[0], dtype=float)
    if m % 2 == 0:
        k[-1] = 0.0
    factor = (1j * k) ** order
    spec = spec * factor.reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.fft.irfft(spec, n=m, axis=0)


def complex_modes(fl: FourierLoop) -> tuple[np.ndarray, np.ndarray]:
    """Fourier modes of zeta_0 = x_0 + i y_0, indexed -F..F, plus the z cosine modes.

    For a D_N loop the modes are real: zeta_k = (a_k + b_k)/2 and
    zeta_{-k} = (a_k - b_k)/2 for k >= 1, zeta_0 = a_0.
    """
    f = fl.order
    modes = np.zeros(2 * f + 1)
    modes[f] = fl.a[0]
    modes[f + 1 :] = 0.5 * (fl.a[1:] + fl.b)
    modes[:f][::-1] = 0.5 * (fl.a[1:] - fl.b)
    return modes, fl.c.copy()


def from_complex_modes(modes, c, sym: SymmetryClass) -> FourierLoop:
    modes = np.asarray(modes, dtype=float)
    f = (modes.size - 1) // 2
    pos, neg = modes[f + 1 :], modes[:f][::-1]
    a = np.concatenate([[modes[f]], pos + neg])
    b = pos - neg
    cc = np.zeros(f + 1)
    cc[: min(f + 1, len(c))] = np.asarray(c, float)[: f + 1]
    return FourierLoop.projected(a, b, cc, sym)


def rotate_frame(fl: FourierLoop, k: int) -> FourierLoop:
    """Loop multiplied by e^{i k t} in the horizontal plane (integer k keeps 2pi-periodicity)."""
    modes, c = complex_modes(fl)
    f = fl.order
    g = f + abs(k)
    out = np.zeros(2 * g + 1)
    # mode m moves to m + k
    out[g - f + k : g + f + k + 1] = modes
    return from_complex_modes(out, c, fl.sym)


def reflect_y(fl: FourierLoop) -> FourierLoop:
    return replace(fl, b=-fl.b)


def kinetic_weights(order: int, omega: float):
    """Per-mode weights (omega+m)^2 for m = -F..F and k^2 for the z cosines."""
    m = np.arange(-order, order + 1, dtype=float)
    return (omega + m) ** 2, np.arange(order + 1, dtype=float) ** 2


def kinetic_norm_omega(fl: FourierLoop, omega: float) -> float:
    """Integral over one period of sum_i |zeta_i' + i omega zeta_i|^2 + |z_i'|^2."""
    modes, c = complex_modes(fl)
    wz, wc = kinetic_weights(fl.order, omega)
    horizontal = TWO_PI * np.sum(wz * modes**2)
    # |z_hat_k|^2 = c_k^2 / 4 for k != 0, two modes each
    vertical = np.pi * np.sum(wc * c**2)
    return fl.n * (horizontal + vertical)


def chain_permutation(n: int) -> np.ndarray:
    """Inverse chain order: ``result[i]`` is the chain position of body i."""
    if n < 2:
        raise ValueError("n must be at least 2")
    half = (n - 1) // 2
    return np.array([2 * i if i <= half else 2 * (n - i) - 1 for i in range(n)])


# ---------------------------------------------------------------------------
# fundamental domain


@dataclass
class FundamentalPath:
    """All bodies on P+1 uniform nodes of [0, pi/N], positions and velocities (P+1, N, 3)."""

    positions: np.ndarray
    velocities: np.ndarray

    @property
    def n(self) -> int:
        return self.positions.shape[1]

    @property
    def nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, np.pi / self.n, self.nodes)

    @property
    def weights(self) -> np.ndarray:
        h = np.pi / self.n / (self.nodes - 1)
        w = np.full(self.nodes, h)
        w[0] = w[-1] = 0.5 * h
        return w

    def copy(self) -> "FundamentalPath":
        return FundamentalPath(self.positions.copy(), self.velocities.copy())


def fundamental_path(fl: FourierLoop, intervals: int) -> FundamentalPath:
    """Exact samples of every body on [0, pi/N] with ``intervals`` sub-intervals."""
    n = fl.n
    t = np.linspace(0.0, np.pi / n, intervals + 1)
    shifts = TWO_PI * np.arange(n) / n
    tt = (t[:, None] + shifts[None, :]).ravel()
    pos = fl.evaluate(tt).reshape(t.size, n, 3)
    vel = fl.evaluate(tt, 1).reshape(t.size, n, 3)
    return FundamentalPath(pos, vel)


def fundamental_from_sampled(loop: SampledLoop) -> FundamentalPath:
    """Restriction of a full-period loop to [0, pi/N], velocities by spectral differentiation."""
    _check_grid(loop.m, loop.n)
    vel = spectral_derivative(loop.positions)
    p = loop.m // (2 * loop.n)
    return FundamentalPath(loop.positions[: p + 1].copy(), vel[: p + 1].copy())


def full_period_q0(path: FundamentalPath) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild q_0 and its velocity on the 2N*P-node full-period grid."""
    n, p = path.n, path.nodes - 1
    m = 2 * n * p
    idx = np.arange(m)
    seg, off = idx // p, idx % p
    i_even = seg // 2
    body = np.where(seg % 2 == 0, i_even, n - 1 - i_even)
    node = np.where(seg % 2 == 0, off, p - off)
    pos = path.positions[node, body].copy()
    vel = path.velocities[node, body].copy()
    odd = seg % 2 == 1
    pos[odd] = pos[odd] @ R_XZ
    # time reversal flips the velocity, the reflection flips y
    vel[odd] = -(vel[odd] @ R_XZ)
    return pos, vel


def path_action(path: FundamentalPath, omega: float = 0.0) -> float:
    """Trapezoid action of the fundamental-domain path in the rotating frame."""
    pos, vel = path.positions, path.velocities
    w = path.weights
    u = vel.copy()
    u[..., 0] -= omega * pos[..., 1]
    u[..., 1] += omega * pos[..., 0]
    lag = 0.5 * np.sum(u**2, axis=(-2, -1)) + potential_array(pos)
    return float(w @ lag)


def body_kinetic_integrals(path: FundamentalPath) -> np.ndarray:
    return path.weights @ np.sum(path.velocities**2, axis=-1)


def check_boundary(path: FundamentalPath, sym: SymmetryClass | None = None, tol: float = 1e-8):
    """Raise BoundaryMismatch unless the path satisfies the end-point relations."""
    sym = sym or SymmetryClass(path.n)
    scale = max(1.0, float(np.max(np.abs(path.positions))))
    ends = {0.0: path.positions[0], np.pi / path.n: path.positions[-1]}
    for bc in boundary_conditions(SymmetryClass(sym.n)):
        r = bc.residual(lambda t: ends[t])
        if r > tol * scale:
            raise BoundaryMismatch(f"{bc.label} violated by {r:.3e}")


def _monotone_increments(coord, speed, h):
    """Per-interval integrals of |speed|, never smaller than the coordinate increment."""
    delta = np.abs(np.diff(coord, axis=0))
    lo, hi = speed[:-1], speed[1:]
    flips = lo * hi < 0
    with np.errstate(invalid="ignore", divide="ignore"):
        bent = 0.5 * h * (lo**2 + hi**2) / (np.abs(lo) + np.abs(hi))
    return np.where(flips, np.maximum(delta, bent), delta)


def _monotone_rearrange(path: FundamentalPath, axis: int) -> FundamentalPath:
    check_boundary(path)
    n, nodes = path.n, path.nodes
    h = np.pi / n / (nodes - 1)
    coord = path.positions[:, :, axis]
    speed = path.velocities[:, :, axis]
    cumulative = np.vstack([np.zeros(n), np.cumsum(_monotone_increments(coord, speed, h), axis=0)])
    order = np.argsort(chain_permutation(n))  # order[k] = body at chain position k

    new = np.empty_like(coord)
    new_speed = np.empty_like(speed)
    prev = None
    for k, body in enumerate(order):
        sign = 1.0 if k % 2 == 0 else -1.0
        track = sign * cumulative[:, body]
        if prev is not None:
            link = -1 if k % 2 == 1 else 0  # odd links meet at pi/N, even at 0
            track = track + (new[link, prev] - track[link])
        new[:, body] = track
        new_speed[:, body] = sign * np.abs(speed[:, body])
        prev = body
    # [z_0] over the full period is (1/pi) sum_i int_0^{pi/N} z_i
    mean = float(np.sum(path.weights @ new)) / np.pi
    new -= mean

    out = path.copy()
    out.positions[:, :, axis] = new
    out.velocities[:, :, axis] = new_speed
    return out


def monotone_rearrange_z(path: FundamentalPath) -> FundamentalPath:
    """Replace every z_i by signed cumulative integrals of |z_i'| chained across the boundary pairs."""
    return _monotone_rearrange(path, 2)


def monotone_rearrange_x(path: FundamentalPath) -> FundamentalPath:
    """x-analogue of :func:`monotone_rearrange_z`; only meaningful for omega = 0."""
    return _monotone_rearrange(path, 0)

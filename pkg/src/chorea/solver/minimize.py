"""Class-preserving descent for the rotating-frame action."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..action import ActionFunctional, ActionValue
from ..errors import CollisionSingularity, InfeasiblePattern
from ..loops import FourierLoop, synthesize
from ..symmetry import Kind, coefficient_constraints
from ..topology import classify, matching_ngon_labels
from .collisions import CollisionReport, collision_monitor
from .divergence import (
    DivergenceEvidence,
    Iterate,
    detector_label,
    divergence_detector,
    loop_size,
    shape_distance_to_ngon,
)
from .problem import Problem, reduce_problem

log = logging.getLogger(__name__)

NEAR_COLLISION_PATIENCE = 50
ARMIJO = 1e-4
MAX_HALVINGS = 60
LBFGS_MEMORY = 20


class Status(str, Enum):
    CONVERGED = "Converged"
    COLLISION_CANDIDATE = "CollisionCandidate"
    DIVERGING = "Diverging"
    ITER_LIMIT = "IterLimit"


@dataclass(frozen=True)
class MinimizerRecord:
    loop: FourierLoop
    action: ActionValue
    grad_norm: float
    status: Status
    iterations: int
    collision_report: CollisionReport | None = None
    shape_distance_to_ngon: float | None = None
    divergence: DivergenceEvidence | None = None
    action_trace: tuple[float, ...] = field(default=(), repr=False)


# ---------------------------------------------------------------------------
# seeds


def _sine_fit(p: Problem, harmonics: np.ndarray, amplitude: float) -> np.ndarray:
    n = p.n
    t = np.pi * np.arange(1, n) / n
    basis = np.sin(np.outer(t, harmonics))
    target = amplitude * np.array(p.xi.xi, dtype=float)
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    return coef


def initial_guess(p: Problem, amplitude: float = 1.0) -> FourierLoop:
    """Smallest sine interpolant realizing the sign pattern, with z_0 = -(amplitude/2) cos t."""
    order = p.order
    mask = coefficient_constraints(p.sym, order)
    allowed = np.flatnonzero(mask.b) + 1
    a, b, c = np.zeros(order + 1), np.zeros(order), np.zeros(order + 1)
    c[1] = -0.5 * amplitude
    if p.sym.kind is Kind.DN:
        a[1] = 0.2 * amplitude
    for r in range(1, len(allowed) + 1):
        harmonics = allowed[:r]
        coef = _sine_fit(p, harmonics, amplitude)
        trial = b.copy()
        trial[harmonics - 1] = coef
        fl = FourierLoop(a, trial, c, p.sym)
        y = np.abs(fl.checkpoints())
        if classify(fl) == p.xi and y.min() >= 0.2 * y.max():
            return fl
    raise InfeasiblePattern(f"no sine interpolant of order <= {order} realizes {p.xi} in {p.sym.kind.value}")


# ---------------------------------------------------------------------------
# descent


class _Objective:
    """Action restricted to free coefficients, in preconditioned coordinates u = w * v."""

    def __init__(self, p: Problem, template: FourierLoop):
        self.p = p
        self.fun = ActionFunctional(p.sym, p.order, p.grid, p.omega, p.fix_x_mean, p.fix_z_mean)
        self.template = template
        self.idx = np.flatnonzero(self.fun.free)
        f = p.order
        k = np.concatenate([np.arange(f + 1), np.arange(1, f + 1), np.arange(f + 1)]).astype(float)
        self.w = np.sqrt(p.n * np.pi * (1.0 + k**2))[self.idx]
        ck = np.pi * np.arange(1, p.n) / p.n
        self._check_basis = np.sin(np.outer(ck, np.arange(1, f + 1)))
        self._b = slice(f + 1, 2 * f + 1)

    def full(self, u) -> np.ndarray:
        v = np.zeros(self.fun.free.size)
        v[self.idx] = u / self.w
        return v

    def reduce(self, v) -> np.ndarray:
        return np.asarray(v)[self.idx] * self.w

    def loop(self, u) -> FourierLoop:
        return self.template.with_vector(self.full(u))

    def in_class(self, v) -> bool:
        y = self._check_basis @ v[self._b]
        if np.any(np.abs(y) < 1e-10):
            return False
        return tuple(np.where(y > 0, 1, -1)) == self.p.xi.xi

    def evaluate(self, u):
        """(value, gradient in u, raw gradient norm), or None if the trial leaves the class."""
        v = self.full(u)
        if not np.all(np.isfinite(v)) or not self.in_class(v):
            return None
        try:
            f, g = self.fun.value_and_grad(v)
        except CollisionSingularity:
            return None
        if not np.isfinite(f):
            return None
        graw = g[self.idx]
        return f, graw / self.w, float(np.linalg.norm(graw))

    def min_distance(self, u) -> float:
        q = self.fun.samples(self.full(u))
        step = self.fun.m // self.p.n
        return min(float(np.min(np.linalg.norm(q - np.roll(q, -d * step, axis=0), axis=1)))
                   for d in range(1, self.p.n))


def _two_loop(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _accepts(f0, g0dir, f1, gn0, gn1, alpha):
    if f1 <= f0 + ARMIJO * alpha * g0dir:
        return True
    # at roundoff level the action cannot resolve progress: use the gradient instead
    return f1 <= f0 + 8 * np.finfo(float).eps * abs(f0) and gn1 < gn0


def _newton_polish(obj: _Objective, u, state, iters: int = 8):
    """Newton steps on a finite-difference Hessian of the analytic gradient."""
    f, g, gn = state
    for _ in range(iters):
        if gn <= obj.p.tolerances.grad_tol:
            break
        dim = u.size
        h = 1e-6 * max(1.0, float(np.linalg.norm(u)) / np.sqrt(dim))
        hess = np.empty((dim, dim))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            plus, minus = obj.evaluate(u + e), obj.evaluate(u - e)
            if plus is None or minus is None:
                return u, (f, g, gn)
            hess[:, i] = (plus[1] - minus[1]) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        lam, vec = np.linalg.eigh(hess)
        cutoff = 1e-10 * np.max(np.abs(lam))
        inv = np.where(np.abs(lam) > cutoff, 1.0 / np.where(lam == 0, 1.0, lam), 0.0)
        step = -vec @ (inv * (vec.T @ g))
        for _ in range(30):
            trial = obj.evaluate(u + step)
            if trial is not None and (trial[2] < gn) and trial[0] <= f + 1e-12 * max(1.0, abs(f)):
                u, (f, g, gn) = u + step, trial
                break
            step *= 0.5
        else:
            break
    return u, (f, g, gn)


def minimize(p: Problem, start: FourierLoop) -> MinimizerRecord:
    if not p.in_range():
        reduced, red = reduce_problem(p)
        rec = minimize(reduced, red.to_reduced(start.resized(p.order), p.n).resized(p.order))
        lifted = red.from_reduced(rec.loop, p.n)
        fun = ActionFunctional(p.sym, lifted.order, _grid_for(lifted.order, p.n, p.grid), p.omega)
        return MinimizerRecord(lifted, fun.value(lifted.vector()), rec.grad_norm, rec.status, rec.iterations,
                               rec.collision_report, rec.shape_distance_to_ngon, rec.divergence, rec.action_trace)
    return _minimize_in_range(p, start)


def _grid_for(order: int, n: int, grid: int) -> int:
    step = 2 * n
    need = 2 * order + 1
    return max(grid, step * (need // step + 1))


def _minimize_in_range(p: Problem, start: FourierLoop) -> MinimizerRecord:
    tol = p.tolerances
    start = start.resized(p.order)
    obj = _Objective(p, start)
    if classify(start) != p.xi:
        raise ValueError(f"start loop is in class {classify(start)}, expected {p.xi}")
    u = obj.reduce(start.vector())
    state = obj.evaluate(u)
    if state is None:
        raise CollisionSingularity("start loop has a collision")
    f, g, gn = state

    label = detector_label(p)
    size0 = loop_size(start, p.grid) if label else 0.0
    history: list[Iterate] = [Iterate(start, f)]
    evidence = None
    trace = [f]
    pairs: deque = deque(maxlen=LBFGS_MEMORY)
    near = 0
    status = Status.ITER_LIMIT
    it = 0
    polished = False
    while it < tol.max_iters:
        grown = label is not None and loop_size(obj.loop(u), p.grid) > 2.0 * size0
        if gn <= tol.grad_tol and not grown:
            status = Status.CONVERGED
            break
        d = _two_loop(g, list(pairs)) if pairs else -g * min(1.0, 0.1 * max(1.0, np.linalg.norm(u)) / np.linalg.norm(g))
        slope = float(g @ d)
        if slope >= 0:
            pairs.clear()
            d = -g
            slope = float(g @ d)
        alpha, accepted = 1.0, None
        for _ in range(MAX_HALVINGS):
            trial = obj.evaluate(u + alpha * d)
            if trial is not None and _accepts(f, slope, trial[0], gn, trial[2], alpha):
                accepted = trial
                break
            alpha *= 0.5
        step_norm = alpha * float(np.linalg.norm(d))
        if accepted is None or step_norm < tol.step_tol * (1.0 + np.linalg.norm(u)):
            if polished or label is not None:
                break
            u, (f, g, gn) = _newton_polish(obj, u, (f, g, gn))
            polished = True
            pairs.clear()
            trace.append(f)
            continue
        s = alpha * d
        u_new = u + s
        f_new, g_new, gn_new = accepted
        y = g_new - g
        if s @ y > 1e-16 * (s @ s):
            pairs.append((s, y, 1.0 / (s @ y)))
        u, f, g, gn = u_new, f_new, g_new, gn_new
        it += 1
        trace.append(f)

        if obj.min_distance(u) < tol.collision_dist:
            near += 1
            if near >= NEAR_COLLISION_PATIENCE:
                status = Status.COLLISION_CANDIDATE
                break
        else:
            near = 0
        if label is not None and it % 10 == 0:
            history.append(Iterate(obj.loop(u), f))
            evidence = divergence_detector(history, p)
            if evidence is not None:
                status = Status.DIVERGING
                break
    else:
        status = Status.ITER_LIMIT

    if status is Status.ITER_LIMIT and gn <= tol.grad_tol and label is None:
        status = Status.CONVERGED
    if status is Status.ITER_LIMIT and obj.min_distance(u) < tol.collision_dist:
        status = Status.COLLISION_CANDIDATE
    loop = obj.loop(u)
    value = obj.fun.value(loop.vector())
    report = collision_monitor(synthesize(loop, p.grid), tol.collision_dist) if status is not Status.DIVERGING else None
    shape = None
    labels = matching_ngon_labels(p.xi)
    if labels:
        k_near = min(labels, key=lambda lab: abs(lab.k - p.omega))
        shape = shape_distance_to_ngon(loop, k_near, p.omega, p.grid)
    log.info("minimize N=%d xi=%s omega=%g: %s after %d iterations, action %.15g, |grad| %.3g",
             p.n, p.xi, p.omega, status.value, it, value.total, gn)
    return MinimizerRecord(loop, value, gn, status, it, report, shape, evidence, tuple(trace))


def solve(p: Problem, amplitude: float = 1.0) -> MinimizerRecord:
    return minimize(p, initial_guess(p, amplitude))

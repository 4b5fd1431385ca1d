"""Frame-velocity sweeps with warm starts, and the rotating polygon reference family."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DiagnosticsReport, run_diagnostics
from .loops import FourierLoop, synthesize, synthesize_q0
from .ngon import NGonLabel, NGonOrbit, build_ngon, build_rotating_ngon  # noqa: F401  (re-exported)
from .solver import MinimizerRecord, Problem, Status, initial_guess, minimize
from .topology import classify, xi_star

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Transition:
    lower: float
    upper: float
    reason: str


@dataclass(frozen=True)
class DualityCheck:
    action_at_n: float
    dual_action_at_zero: float
    relative_difference: float
    dual_status: Status


@dataclass
class FamilyRecord:
    template: Problem
    omega_grid: list[float]
    records: list[MinimizerRecord]
    transitions: list[Transition] = field(default_factory=list)
    diagnostics: dict[float, DiagnosticsReport] = field(default_factory=dict)
    duality: DualityCheck | None = None

    def record_at(self, omega: float) -> MinimizerRecord:
        return self.records[self.omega_grid.index(omega)]


def _warm_start(prev: FourierLoop, p: Problem) -> FourierLoop:
    loop = prev.resized(p.order)
    a, c = loop.a.copy(), loop.c.copy()
    c[0] = 0.0
    if p.fix_x_mean:
        a[0] = 0.0
    return FourierLoop(a, loop.b, c, loop.sym)


def _loop_distance(first: FourierLoop, second: FourierLoop, m: int) -> float:
    return float(np.max(np.linalg.norm(synthesize_q0(first, m) - synthesize_q0(second, m), axis=1)))


def duality_check(record_at_n: MinimizerRecord, template: Problem, amplitude: float = 1.0) -> DualityCheck:
    """Compare the omega = N action in class xi with a fresh omega = 0 solve in class xi*."""
    dual = template.with_omega(0.0)
    dual = Problem(dual.sym, xi_star(template.xi), 0.0, dual.order, dual.grid, tolerances=dual.tolerances)
    rec = minimize(dual, initial_guess(dual, amplitude))
    a_n, a_0 = record_at_n.action.total, rec.action.total
    return DualityCheck(a_n, a_0, abs(a_n - a_0) / abs(a_0), rec.status)


def sweep(template: Problem, grid, amplitude: float = 1.0, diagnose_endpoints: bool = True) -> FamilyRecord:
    grid = [float(w) for w in grid]
    n = template.n
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("omega grid must be strictly increasing")
    if grid and (grid[0] < 0 or grid[-1] > n):
        raise ValueError(f"omega grid must lie in [0, {n}]")
    records: list[MinimizerRecord] = []
    transitions: list[Transition] = []
    warm: FourierLoop | None = None
    for omega in grid:
        p = template.with_omega(omega)
        start = _warm_start(warm, p) if warm is not None and classify(warm) == p.xi else initial_guess(p, amplitude)
        rec = minimize(p, start)
        records.append(rec)
        if rec.status is Status.CONVERGED:
            warm = rec.loop
        log.info("sweep omega=%g: %s, action %.12g", omega, rec.status.value, rec.action.total)

    for w0, w1, r1 in zip(grid, grid[1:], records[1:]):
        if r1.status is Status.DIVERGING:
            transitions.append(Transition(w0, w1, "divergence"))
        elif r1.status is Status.COLLISION_CANDIDATE:
            transitions.append(Transition(w0, w1, "collision candidate"))
        elif r1.status is not Status.CONVERGED:
            transitions.append(Transition(w0, w1, r1.status.value))
    transitions += _continuity_gaps(grid, records, template.grid)

    family = FamilyRecord(template, grid, records, sorted(transitions, key=lambda t: t.lower))
    if diagnose_endpoints:
        for omega, rec in zip(grid, records):
            if omega in (0.0, float(n)) and rec.status is not Status.DIVERGING:
                family.diagnostics[omega] = run_diagnostics(synthesize(rec.loop, template.grid), omega)
        if grid and grid[-1] == float(n) and records[-1].status is Status.CONVERGED:
            family.duality = duality_check(records[-1], template, amplitude)
    return family


def _continuity_gaps(grid, records, m) -> list[Transition]:
    """Jumps between consecutive converged loops far above the typical rate of change."""
    steps = []
    for (w0, r0), (w1, r1) in zip(zip(grid, records), zip(grid[1:], records[1:])):
        if r0.status is Status.CONVERGED and r1.status is Status.CONVERGED:
            order = max(r0.loop.order, r1.loop.order)
            d = _loop_distance(r0.loop.resized(order), r1.loop.resized(order), m)
            steps.append((w0, w1, d / (w1 - w0)))
    if len(steps) < 2:
        return []
    lipschitz = float(np.median([rate for _, _, rate in steps]))
    return [Transition(w0, w1, "continuity gap") for w0, w1, rate in steps if rate > 10.0 * lipschitz]

"""Command-line driver: solve, sweep, verify."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .continuation import FamilyRecord, sweep
from .diagnostics import run_diagnostics, verdicts
from .errors import ChoreaError, ConfigError, InfeasiblePattern
from .io import _clean, read_trajectory_csv, record_dict, write_manifest, write_record_files
from .solver import Problem, Tolerances, initial_guess, minimize
from .symmetry import Kind, SymmetryClass
from .topology import SignPattern

log = logging.getLogger("chorea")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3


@dataclass
class RunConfig:
    n: int = 3
    sym: str = "dn"
    xi: list[str] = field(default_factory=lambda: ["+-"])
    omega: float | None = None
    grid: list[float] | None = None
    fourier_order: int = 32
    grid_points: int | None = None
    tolerances: dict = field(default_factory=dict)
    out: str = "out"
    amplitude: float = 1.0
    jobs: int = 1

    @classmethod
    def from_sources(cls, config_file: str | None, overrides: dict) -> "RunConfig":
        data = {}
        if config_file:
            try:
                data = json.loads(Path(config_file).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"config: cannot read {config_file}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config: top level must be an object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        if isinstance(data.get("xi"), str):
            data["xi"] = [data["xi"]]
        if isinstance(data.get("grid"), str):
            data["grid"] = parse_grid(data["grid"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def symmetry(self) -> SymmetryClass:
        try:
            return SymmetryClass(int(self.n), Kind(self.sym.upper()))
        except ValueError as exc:
            raise ConfigError(f"n/sym: {exc}") from exc

    def patterns(self) -> list[SignPattern]:
        out = []
        for text in self.xi:
            try:
                p = SignPattern.parse(text)
            except ValueError as exc:
                raise ConfigError(f"xi: {exc}") from exc
            if len(p) != self.n - 1:
                raise ConfigError(f"xi: pattern {text!r} has length {len(p)}, expected N-1 = {self.n - 1}")
            out.append(p)
        return out

    def tolerance_set(self) -> Tolerances:
        try:
            return Tolerances(**self.tolerances)
        except TypeError as exc:
            raise ConfigError(f"tolerances: {exc}") from exc

    def problem(self, xi: SignPattern, omega: float) -> Problem:
        try:
            return Problem(self.symmetry(), xi, float(omega), order=int(self.fourier_order),
                           grid=self.grid_points, tolerances=self.tolerance_set())
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"problem: {exc}") from exc

    def validate(self):
        if self.jobs < 1:
            raise ConfigError("jobs: must be at least 1")
        if self.fourier_order < 1:
            raise ConfigError("fourier_order: must be at least 1")
        for xi in self.patterns():
            for omega in ([self.omega] if self.omega is not None else []) + list(self.grid or []):
                self.problem(xi, omega)

    def as_dict(self) -> dict:
        return asdict(self)


def parse_grid(text: str) -> list[float]:
    """"start:stop:count" (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"grid: cannot parse {text!r}") from exc


def _record_entry(rec, omega, m, directory: Path, prefix: str = "") -> dict:
    sl, files = write_record_files(directory, rec, omega, m)
    entry = record_dict(rec, omega)
    report = run_diagnostics(sl, omega)
    entry["diagnostics"] = report.as_dict()
    entry["verdicts"] = verdicts(report)
    entry["files"] = [f"{prefix}{name}" for name in files]
    return entry


def cmd_solve(cfg: RunConfig) -> int:
    if cfg.omega is None:
        raise ConfigError("omega: required for solve")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (xi,) = cfg.patterns()[:1]
    p = cfg.problem(xi, cfg.omega)
    rec = minimize(p, initial_guess(p, cfg.amplitude))
    m = p.grid if rec.loop.order == p.order else 2 * p.n * (rec.loop.order // p.n + 1)
    entry = _record_entry(rec, cfg.omega, m, out)
    write_manifest(out / "manifest.json", {"config": cfg.as_dict(), "records": [entry],
                                           "files": entry["files"]})
    print(f"{rec.status.value}: action {rec.action.total!r}, |grad| {rec.grad_norm:.3e} -> {out}")
    return EXIT_OK


def _family_body(family: FamilyRecord, cfg: RunConfig, out: Path) -> dict:
    m = family.template.grid
    records, files = [], []
    for omega, rec in zip(family.omega_grid, family.records):
        sub = f"omega_{omega:.6f}"
        entry = _record_entry(rec, omega, m, out / sub, f"{sub}/")
        write_manifest(out / sub / "manifest.json", {"config": cfg.as_dict(), "records": [entry],
                                                     "files": [f.split("/")[-1] for f in entry["files"]]})
        files += entry["files"] + [f"{sub}/manifest.json"]
        records.append(entry)
    body = {
        "config": cfg.as_dict(),
        "xi": str(family.template.xi),
        "omega_grid": family.omega_grid,
        "records": records,
        "transitions": [asdict(t) for t in family.transitions],
        "endpoint_diagnostics": {repr(w): d.as_dict() for w, d in family.diagnostics.items()},
        "duality": None if family.duality is None else {
            "action_at_n": family.duality.action_at_n,
            "dual_action_at_zero": family.duality.dual_action_at_zero,
            "relative_difference": family.duality.relative_difference,
            "dual_status": family.duality.dual_status.value,
        },
        "files": files,
    }
    return body


def _run_family(cfg: RunConfig, xi_text: str, out: str) -> str:
    xi = SignPattern.parse(xi_text)
    template = cfg.problem(xi, cfg.grid[0])
    family = sweep(template, cfg.grid, cfg.amplitude)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    write_manifest(path / "family.json", _family_body(family, cfg, path))
    statuses = ", ".join(f"{w:g}:{r.status.value}" for w, r in zip(family.omega_grid, family.records))
    return f"{xi}: {statuses}"


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.grid:
        raise ConfigError("grid: required for sweep")
    patterns = [str(p) for p in cfg.patterns()]
    for p in patterns:
        initial_guess(cfg.problem(SignPattern.parse(p), cfg.grid[0]), cfg.amplitude)
    root = Path(cfg.out)
    targets = [str(root)] if len(patterns) == 1 else [str(root / f"xi_{p}") for p in patterns]
    if cfg.jobs > 1 and len(patterns) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            lines = list(pool.map(_run_family, [cfg] * len(patterns), patterns, targets))
    else:
        lines = [_run_family(cfg, p, t) for p, t in zip(patterns, targets)]
    for line in lines:
        print(line)
    return EXIT_OK


def cmd_verify(path: str, omega: float) -> int:
    sl = read_trajectory_csv(path)
    report = run_diagnostics(sl, omega)
    body = report.as_dict()
    body["verdicts"] = verdicts(report)
    print(json.dumps(_clean(body), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chorea", description="Simple choreographies of the equal-mass N-body problem in a rotating frame.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration; flags override its fields")
        p.add_argument("--n", type=int)
        p.add_argument("--sym", choices=["dn", "hn"])
        p.add_argument("--xi", action="append", help="sign pattern, e.g. +- or 1,-1 (repeat for several families)")
        p.add_argument("--fourier-order", dest="fourier_order", type=int)
        p.add_argument("--grid-points", dest="grid_points", type=int)
        p.add_argument("--amplitude", type=float)
        p.add_argument("--out")

    solve_p = sub.add_parser("solve", help="minimize the action at one frame velocity")
    common(solve_p)
    solve_p.add_argument("--omega", type=float)

    sweep_p = sub.add_parser("sweep", help="continuation over a grid of frame velocities")
    common(sweep_p)
    sweep_p.add_argument("--grid", help="start:stop:count or comma-separated values")
    sweep_p.add_argument("--jobs", type=int)

    verify_p = sub.add_parser("verify", help="diagnostics on a trajectory CSV")
    verify_p.add_argument("trajectory")
    verify_p.add_argument("--omega", type=float, default=0.0)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CHOREA_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.trajectory, args.omega)
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        cfg = RunConfig.from_sources(args.config, overrides)
        return cmd_solve(cfg) if args.command == "solve" else cmd_sweep(cfg)
    except InfeasiblePattern as exc:
        print(f"error: infeasible pattern: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChoreaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Trajectory CSV, JSON manifests and orbit plots."""
from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .loops import FourierLoop, synthesize
from .sampled import SampledLoop
from .solver import MinimizerRecord


def inertial_positions(sl: SampledLoop, omega: float) -> np.ndarray:
    pos = sl.positions.copy()
    phase = np.exp(1j * omega * sl.times)[:, None]
    zeta = (pos[..., 0] + 1j * pos[..., 1]) * phase
    pos[..., 0], pos[..., 1] = zeta.real, zeta.imag
    return pos


def csv_header(n: int) -> list[str]:
    cols = ["t"]
    for frame in ("inertial", "rotating"):
        cols += [f"{frame}_{axis}{i}" for i in range(n) for axis in "xyz"]
    return cols


def write_trajectory_csv(path, sl: SampledLoop, omega: float) -> Path:
    path = Path(path)
    inertial = inertial_positions(sl, omega).reshape(sl.m, -1)
    rotating = sl.positions.reshape(sl.m, -1)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(sl.n))
        for t, row_i, row_r in zip(sl.times, inertial, rotating):
            writer.writerow([repr(float(v)) for v in (t, *row_i, *row_r)])
    return path


def read_trajectory_csv(path) -> SampledLoop:
    """Rotating-frame positions from a trajectory file."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        cols = len(header) - 1
        if header[0] != "t" or cols % 6 or cols == 0:
            raise ValueError(f"unexpected header with {len(header)} columns")
        n = cols // 6
        if header != csv_header(n):
            raise ValueError("column names do not follow the trajectory layout")
        data = np.array([[float(v) for v in row] for row in body])
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot parse trajectory file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] == 0:
        raise ConfigError(f"trajectory file {path} has no samples")
    m = data.shape[0]
    t = data[:, 0]
    if not np.allclose(t, 2 * np.pi * np.arange(m) / m, rtol=0, atol=1e-12):
        raise ConfigError("trajectory times must be the uniform grid 2 pi m / M")
    return SampledLoop(data[:, 1 + 3 * n :].reshape(m, n, 3))


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def loop_dict(fl: FourierLoop) -> dict:
    return {"a": [float(v) for v in fl.a], "b": [float(v) for v in fl.b], "c": [float(v) for v in fl.c]}


def record_dict(rec: MinimizerRecord, omega: float) -> dict:
    out = {
        "omega": float(omega),
        "status": rec.status.value,
        "action": {"total": float(rec.action.total), "kinetic": float(rec.action.kinetic),
                   "potential_integral": float(rec.action.potential_integral)},
        "grad_norm": float(rec.grad_norm),
        "iterations": rec.iterations,
        "shape_distance_to_ngon": _finite(rec.shape_distance_to_ngon),
        "coefficients": loop_dict(rec.loop),
        "collision_report": None if rec.collision_report is None else rec.collision_report.as_dict(),
        "divergence": None,
    }
    if rec.divergence is not None:
        ev = rec.divergence
        out["divergence"] = {"label": str(ev.label), "shape_distance": ev.shape_distance,
                             "growth": ev.growth, "final_action": ev.action_trace[-1],
                             "action_trace": list(ev.action_trace), "size_trace": list(ev.size_trace)}
    return out


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_manifest(path, body: dict) -> Path:
    """Deterministic content under "manifest"; the timestamp sits outside it."""
    path = Path(path)
    doc = {"tool": "chorea", "version": __version__, "manifest": _clean(body),
           "generated_at": datetime.now(timezone.utc).isoformat()}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())


def write_orbit_svg(path, sl: SampledLoop, omega: float, title: str = "") -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    frames = (("rotating", sl.positions), ("inertial", inertial_positions(sl, omega)))
    fig, axes = plt.subplots(2, 2, figsize=(8, 8))
    for row, (name, pos) in zip(axes, frames):
        for ax, (i, j, label) in zip(row, ((0, 1, "xy"), (1, 2, "yz"))):
            closed = np.concatenate([pos[:, 0], pos[:1, 0]])
            ax.plot(closed[:, i], closed[:, j], lw=1.0, color="0.3")
            ax.plot(pos[0, :, i], pos[0, :, j], "o", ms=4)
            ax.set_aspect("equal", adjustable="datalim")
            ax.set_title(f"{name} {label}")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def write_record_files(directory, rec: MinimizerRecord, omega: float, m: int) -> tuple[SampledLoop, list[str]]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sl = synthesize(rec.loop, m)
    write_trajectory_csv(directory / "trajectory.csv", sl, omega)
    write_orbit_svg(directory / "orbit.svg", sl, omega, f"omega = {omega:g}, {rec.status.value}")
    return sl, ["trajectory.csv", "orbit.svg"]

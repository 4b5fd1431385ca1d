"""Topological classes given by the signs of y_0 at the checkpoints k pi / N."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .loops import FourierLoop, synthesize
from .ngon import NGonLabel, ngon_loop
from .sampled import SampledLoop

DEGENERATE_TOL = 1e-10


@dataclass(frozen=True)
class SignPattern:
    xi: tuple[int, ...]

    def __post_init__(self):
        xi = tuple(int(v) for v in self.xi)
        if not xi or any(v not in (1, -1) for v in xi):
            raise ValueError("sign pattern entries must be +1 or -1")
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return len(self.xi) + 1

    def __len__(self):
        return len(self.xi)

    def __iter__(self):
        return iter(self.xi)

    def __getitem__(self, i):
        return self.xi[i]

    def __str__(self):
        return "".join("+" if v > 0 else "-" for v in self.xi)

    @classmethod
    def parse(cls, text: str) -> "SignPattern":
        """Accept "+-+-" or "1,-1,1,-1" (unicode minus allowed)."""
        s = str(text).strip().replace("−", "-")
        if s and set(s) <= {"+", "-"}:
            vals = [1 if ch == "+" else -1 for ch in s]
        else:
            try:
                vals = [int(v) for v in s.split(",")]
            except ValueError:
                raise ValueError(f"cannot parse sign pattern {text!r}") from None
        return cls(tuple(vals))


class _Degenerate:
    """Some checkpoint of the loop lies on the xz-plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Degenerate"

    def __bool__(self):
        return False


Degenerate = _Degenerate()


def checkpoint_values(loop) -> np.ndarray:
    if isinstance(loop, FourierLoop):
        return loop.checkpoints()
    if isinstance(loop, SampledLoop):
        step = loop.m // (2 * loop.n)
        if step * 2 * loop.n != loop.m:
            raise ValueError("grid must be a multiple of 2N to read checkpoints")
        return loop.positions[step * np.arange(1, loop.n), 0, 1]
    raise TypeError("expected a FourierLoop or SampledLoop")


def classify(loop, tol: float = DEGENERATE_TOL):
    y = checkpoint_values(loop)
    if np.any(np.abs(y) < tol):
        return Degenerate
    return SignPattern(tuple(np.where(y > 0, 1, -1)))


def xi_star(p: SignPattern) -> SignPattern:
    # 1-based index i: odd entries flip
    return SignPattern(tuple(-v if i % 2 == 0 else v for i, v in enumerate(p.xi)))


def negate(p: SignPattern) -> SignPattern:
    return SignPattern(tuple(-v for v in p.xi))


def hn_compatible(p: SignPattern, n: int | None = None) -> bool:
    n = n or p.n
    if len(p) != n - 1:
        raise ValueError("pattern length must be N-1")
    target = 2 if n % 2 else 0
    return all(abs(p[i - 1] - p[n - i - 1]) == target for i in range(1, (n - 1) // 2 + 1))


def ngon_pattern(label: NGonLabel) -> SignPattern:
    m = 2 * label.n * 8
    result = classify(synthesize(ngon_loop(label, 1.0), m))
    if result is Degenerate:
        raise ValueError(f"{label} has a checkpoint on the xz-plane")
    return result


def ngon_labels(n: int) -> list[NGonLabel]:
    return [NGonLabel(n, k, s) for k in range(1, n) if gcd(k, n) == 1 for s in (1, -1)]


def matching_ngon_labels(p: SignPattern) -> list[NGonLabel]:
    return [lab for lab in ngon_labels(p.n) if ngon_pattern(lab) == p]

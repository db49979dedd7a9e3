"""Boundary circle dynamics: lifts, translation and rotation numbers.

The circle is ``R / 2 pi Z``; a lift ``phi`` satisfies
``phi(theta + 2 pi) = phi(theta) + 2 pi`` and translation numbers are
normalized by ``2 pi`` so that rigid rotation by ``alpha`` has translation
number ``alpha / (2 pi)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import LiftError
from .estimate import QmEstimate
from .geometry import MapWord

TWO_PI = 2 * np.pi
UNWRAP_SAMPLES = 1024
JUMP_THRESHOLD = np.pi / 2


def _wrap(a):
    """Reduce to (-pi, pi]."""
    return np.pi - np.remainder(np.pi - a, TWO_PI)


@dataclass(frozen=True, eq=False)
class CircleLift:
    """Strictly increasing ``phi: R -> R`` commuting with ``+ 2 pi``."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, theta):
        return self.func(np.asarray(theta, dtype=float))

    def compose(self, other: "CircleLift") -> "CircleLift":
        """``self o other``."""
        return CircleLift(lambda th: self.func(other.func(th)), f"{self.label}*{other.label}")

    def iterate(self, n: int) -> "CircleLift":
        if n < 0:
            raise ValueError("only forward iterates are supported")

        def fn(th):
            for _ in range(n):
                th = self.func(th)
            return th

        return CircleLift(fn, f"{self.label}^{n}")

    def shifted(self, branch: int) -> "CircleLift":
        """Same circle map, lift moved by ``2 pi * branch``."""
        return CircleLift(lambda th: self.func(th) + TWO_PI * branch, f"{self.label}{branch:+d}")

    def periodicity_residual(self, samples: int = 512) -> float:
        th = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        return float(np.max(np.abs(self(th + TWO_PI) - self(th) - TWO_PI)))

    def min_increment(self, samples: int = 512) -> float:
        th = np.linspace(0.0, TWO_PI, samples + 1)
        return float(np.min(np.diff(self(th))))

    def check(self, samples: int = 512, tol: float = 1e-9) -> None:
        per = self.periodicity_residual(samples)
        if per > tol:
            raise LiftError(f"lift {self.label!r} is not 2pi-equivariant (residual {per:.3e})")
        if self.min_increment(samples) <= 0.0:
            raise LiftError(f"lift {self.label!r} is not strictly increasing")


def rigid_lift(alpha: float) -> CircleLift:
    return CircleLift(lambda th: th + alpha, f"rot({alpha:g})")


def identity_lift() -> CircleLift:
    return CircleLift(lambda th: th + 0.0, "id")


def explicit_lift(func: Callable, label: str = "explicit", check: bool = True) -> CircleLift:
    lift = CircleLift(func, label)
    if check:
        lift.check()
    return lift


def _boundary_angles(g: MapWord, theta: np.ndarray) -> np.ndarray:
    pts = np.stack([np.cos(theta), np.sin(theta)], -1)
    img, _ = g.apply(pts)
    return np.arctan2(img[..., 1], img[..., 0])


def _refined_increment(g: MapWord, a: float, b: float, depth: int = 0) -> float:
    """Unwrapped angle change of the image between boundary angles a < b."""
    th = np.linspace(a, b, 17)
    steps = _wrap(np.diff(_boundary_angles(g, th)))
    if np.all(np.abs(steps) <= JUMP_THRESHOLD) or depth >= 8:
        return float(steps.sum())
    return sum(_refined_increment(g, th[i], th[i + 1], depth + 1) for i in range(16))


def boundary_lift(g: MapWord, branch: int = 0) -> CircleLift:
    """Lift of ``g`` restricted to the boundary, ``phi(0)`` in ``[0, 2 pi) + 2 pi branch``."""
    grid = np.linspace(0.0, TWO_PI, UNWRAP_SAMPLES + 1)
    raw = _boundary_angles(g, grid)
    inc = _wrap(np.diff(raw))
    for i in np.flatnonzero(np.abs(inc) > JUMP_THRESHOLD):
        inc[i] = _refined_increment(g, grid[i], grid[i + 1])
    if np.any(inc <= 0.0):
        raise LiftError("boundary restriction is not orientation preserving")
    total = inc.sum()
    if abs(total - TWO_PI) > 1e-6:
        raise LiftError(f"boundary restriction has degree {total / TWO_PI:.6f}, expected 1")
    phi0 = float(np.remainder(raw[0], TWO_PI)) + TWO_PI * branch
    if phi0 >= TWO_PI * (branch + 1):  # remainder can round up to 2 pi
        phi0 -= TWO_PI
    disp = phi0 + np.concatenate([[0.0], np.cumsum(inc)]) - grid
    disp[-1] = disp[0]

    def fn(theta):
        theta = np.asarray(theta, float)
        ref = theta + np.interp(np.remainder(theta, TWO_PI), grid, disp)
        ang = _boundary_angles(g, theta)
        return ang + TWO_PI * np.round((ref - ang) / TWO_PI)

    return CircleLift(fn, f"{g.label or 'map'}[{branch}]")


def boundary_lift_near(g: MapWord, value_at_zero: float) -> CircleLift:
    """Lift whose value at 0 is the one closest to ``value_at_zero``."""
    base = boundary_lift(g, 0)
    k = int(np.round((value_at_zero - float(base(0.0))) / TWO_PI))
    return base.shifted(k) if k else base


def translation_number(lift: CircleLift, n: int = 1024) -> QmEstimate:
    """``phi^n(0) / (2 pi n)``; off from the limit by less than ``1/n``."""
    if n < 1:
        raise ValueError("n must be positive")
    x = np.zeros(1)
    for _ in range(n):
        x = lift(x)
    return QmEstimate(float(x[0]) / (TWO_PI * n), 1.0 / n, {"n": n})


def mean_displacement(lift: CircleLift, n_theta: int = 128) -> float:
    """``(1 / 4 pi^2) int_0^{2 pi} (phi(theta) - theta) d theta`` (periodic rule)."""
    th = TWO_PI * np.arange(n_theta) / n_theta
    return float(np.mean(lift(th) - th) / TWO_PI)


def rotation_number_mod1(lift: CircleLift, n: int = 1024) -> float:
    v = translation_number(lift, n).value % 1.0
    return 0.0 if v > 1.0 - 1e-12 else v


def iterate_orbit(lift: CircleLift, theta, counts) -> dict[int, np.ndarray]:
    """``{n: phi^n(theta)}`` for every n in ``counts`` from a single forward orbit."""
    targets = sorted(set(int(n) for n in counts))
    out = {}
    x = np.array(theta, dtype=float)
    done = 0
    for n in targets:
        for _ in range(n - done):
            x = lift(x)
        done = n
        out[n] = x.copy()
    return out

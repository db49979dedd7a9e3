"""Primitive 1-forms, pullbacks and quadrature on the disk and along paths."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import SpecError
from .geometry import MapWord, Point, check_domain

#: Gauss-Legendre nodes per panel in composite path/time rules
PANEL_NODES = 4


@dataclass(frozen=True)
class Quadrature:
    n_r: int = 64
    n_theta: int = 128
    n_path: int = 64
    workers: int = 1

    def __post_init__(self):
        if self.n_r < 8 or self.n_theta < 16 or self.n_path < 16:
            raise ValueError(f"quadrature too coarse: {self}")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def doubled(self) -> "Quadrature":
        return Quadrature(2 * self.n_r, 2 * self.n_theta, 2 * self.n_path, self.workers)

    def disk_nodes(self):
        """(points (N, 2), weights (N,)) for the polar tensor rule."""
        return _disk_nodes(self.n_r, self.n_theta)

    def path_nodes(self):
        """(t nodes, weights) of the composite rule on [0, 1]."""
        return composite_gauss(self.n_path)


DEFAULT_QUAD = Quadrature()


@lru_cache(maxsize=32)
def _disk_nodes(n_r: int, n_theta: int):
    xg, wg = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (xg + 1.0)
    wr = 0.5 * wg * r
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    wt = np.full(n_theta, 2 * np.pi / n_theta)
    R, T = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([R * np.cos(T), R * np.sin(T)], -1).reshape(-1, 2)
    w = np.outer(wr, wt).reshape(-1)
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


@lru_cache(maxsize=32)
def composite_gauss(panels: int, a: float = 0.0, b: float = 1.0):
    xg, wg = np.polynomial.legendre.leggauss(PANEL_NODES)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * xg[None, :]).reshape(-1)
    w = (half[:, None] * wg[None, :]).reshape(-1)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def map_chunks(fn, pts: np.ndarray, workers: int):
    """Apply ``fn`` to contiguous chunks of ``pts``; results keep chunk order."""
    if workers <= 1 or len(pts) < 2 * workers:
        return [fn(pts)]
    chunks = np.array_split(pts, workers)
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, chunks))


# -- 1-forms ----------------------------------------------------------------

@dataclass(frozen=True)
class PrimitiveOneForm:
    """``eta = a dx + b dy`` with ``d eta = dx ^ dy``.

    Built as ``lambda + dF`` where ``lambda = (x dy - y dx)/2`` and ``F`` is a
    polynomial given by monomials ``(i, j, c)``.
    """

    exact_part: tuple[tuple[int, int, float], ...] = ()
    label: str = "lambda"

    def __call__(self, pts):
        """Covector components, shape ``(..., 2)``."""
        pts = np.asarray(pts, float)
        x, y = pts[..., 0], pts[..., 1]
        a = -0.5 * y
        b = 0.5 * x
        for i, j, c in self.exact_part:
            if i:
                a = a + c * i * x ** (i - 1) * y**j
            if j:
                b = b + c * j * x**i * y ** (j - 1)
        return np.stack([a, b], -1)

    def potential(self, pts):
        pts = np.asarray(pts, float)
        x, y = pts[..., 0], pts[..., 1]
        out = np.zeros(x.shape)
        for i, j, c in self.exact_part:
            out = out + c * x**i * y**j
        return out

    def d_residual(self, samples: int = 200, seed: int = 0, h: float = 1e-5) -> float:
        """Max |d eta - omega| by central differences at random interior points."""
        rng = np.random.default_rng(seed)
        r = 0.95 * np.sqrt(rng.uniform(size=samples))
        th = rng.uniform(0, 2 * np.pi, samples)
        p = np.stack([r * np.cos(th), r * np.sin(th)], -1)
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        db_dx = (self(p + ex)[:, 1] - self(p - ex)[:, 1]) / (2 * h)
        da_dy = (self(p + ey)[:, 0] - self(p - ey)[:, 0]) / (2 * h)
        return float(np.max(np.abs(db_dx - da_dy - 1.0)))

    def to_record(self):
        return {"label": self.label, "F": [list(m) for m in self.exact_part]}


LAMBDA = PrimitiveOneForm()


def lambda_plus_dF(kind: str = "xy", c: float = 0.5) -> PrimitiveOneForm:
    """``lambda + d(c x y)`` or ``lambda + d(c x^2)``."""
    if kind == "xy":
        return PrimitiveOneForm(((1, 1, c),), f"lambda+d({c:g}xy)")
    if kind == "x2":
        return PrimitiveOneForm(((2, 0, c),), f"lambda+d({c:g}x^2)")
    raise SpecError(f"unknown exact perturbation {kind!r}")


def form_from_label(label: str, c: float = 0.5, coeffs=None) -> PrimitiveOneForm:
    if coeffs:
        return PrimitiveOneForm(tuple((int(i), int(j), float(a)) for i, j, a in coeffs), "custom")
    if label in ("lambda", "λ"):
        return LAMBDA
    if label in ("xy", "x2"):
        return lambda_plus_dF(label, c)
    raise SpecError(f"unknown form {label!r}; use lambda, xy, x2 or give F coefficients")


# -- paths ---------------------------------------------------------------------

@dataclass(frozen=True)
class DiskPath:
    """Analytic path from an interior anchor to a point of the boundary circle.

    ``kind``: ``segment`` (straight line from ``anchor`` to the boundary point
    at angle ``angle``) or ``spiral`` (``t (cos(angle t), sin(angle t))``, from
    the origin).
    """

    kind: str = "segment"
    anchor: Point = Point(0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("segment", "spiral"):
            raise SpecError(f"unknown path kind {self.kind!r}")
        if self.kind == "spiral" and (self.anchor.x or self.anchor.y):
            raise SpecError("spiral paths start at the origin")
        if np.hypot(*self.anchor) >= 1.0:
            raise SpecError("path anchor must be interior")

    def __call__(self, t):
        t = np.asarray(t, float)[..., None]
        if self.kind == "segment":
            a = np.asarray(self.anchor)
            b = np.array([np.cos(self.angle), np.sin(self.angle)])
            return a + t * (b - a)
        ang = self.angle * t[..., 0]
        return t * np.stack([np.cos(ang), np.sin(ang)], -1)

    def derivative(self, t):
        t = np.asarray(t, float)
        if self.kind == "segment":
            a = np.asarray(self.anchor)
            b = np.array([np.cos(self.angle), np.sin(self.angle)])
            return np.broadcast_to(b - a, t.shape + (2,))
        ang = self.angle * t
        c, s = np.cos(ang), np.sin(ang)
        return np.stack([c - ang * s, s + ang * c], -1)

    @property
    def endpoint(self) -> Point:
        e = self(1.0)
        return Point(float(e[0]), float(e[1]))

    def to_record(self):
        return {"kind": self.kind, "anchor": list(self.anchor), "angle": self.angle}


RADIAL = DiskPath()
SPIRAL = DiskPath("spiral", angle=1.3)


def path_from_label(label: str) -> DiskPath:
    if label == "radial":
        return RADIAL
    if label == "spiral":
        return SPIRAL
    if label.startswith("radial@"):
        return DiskPath("segment", Point(0.0, 0.0), float(label.split("@", 1)[1]))
    raise SpecError(f"unknown path {label!r}; use radial, radial@<angle>, spiral")


# -- pullbacks and integrals ------------------------------------------------------

def pullback_at(g: MapWord, eta: PrimitiveOneForm, p) -> np.ndarray:
    """``(g* eta)_p = J(p)^T eta(g(p))``."""
    pts = np.asarray(p, float)
    check_domain(pts)
    q, jac = g.apply(pts)
    return pullback_from(q, jac, eta)


def pullback_from(q, jac, eta: PrimitiveOneForm) -> np.ndarray:
    """``J^T eta(q)``: components of the pulled-back form."""
    e = eta(q)
    e0, e1 = e[..., 0], e[..., 1]
    return np.stack([jac[..., 0, 0] * e0 + jac[..., 1, 0] * e1,
                     jac[..., 0, 1] * e0 + jac[..., 1, 1] * e1], -1)


def wedge_density(u, v):
    """Coefficient of ``u ^ v`` against ``dx ^ dy``."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def integrate_disk(density: Callable, q: Quadrature = DEFAULT_QUAD) -> float:
    """Polar tensor rule: Gauss-Legendre in r (weight r), uniform in theta."""
    pts, w = q.disk_nodes()
    parts = map_chunks(lambda chunk: np.asarray(density(chunk), float), pts, q.workers)
    vals = np.concatenate(parts)
    return float(np.dot(vals, w))


def integrate_path(field: Callable, path: DiskPath, q: Quadrature = DEFAULT_QUAD) -> float:
    """``int_0^1 field(gamma(t)) . gamma'(t) dt`` by composite Gauss-Legendre."""
    t, w = q.path_nodes()
    cov = np.asarray(field(path(t)), float)
    return float(np.dot(np.einsum("...i,...i->...", cov, path.derivative(t)), w))

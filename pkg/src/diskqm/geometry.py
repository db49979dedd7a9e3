"""Disk symplectomorphisms as composition words of analytic generators.

Points are numpy arrays of shape ``(..., 2)``; Jacobians have shape
``(..., 2, 2)``.  A :class:`MapWord` ``[L1, L2, L3]`` denotes ``L1 o L2 o L3``
and is evaluated right to left.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Union

import numpy as np

from . import _kernels
from .errors import DomainError
from .hamiltonian import PolyHamiltonian

EPS_GEOM = 1e-12
EPS_SYMP_CLOSED = 1e-8
EPS_SYMP_FLOW = 1e-6


class Point(NamedTuple):
    x: float
    y: float

    @property
    def r(self) -> float:
        return float(np.hypot(self.x, self.y))

    @property
    def theta(self) -> float:
        return float(np.arctan2(self.y, self.x))

    @classmethod
    def polar(cls, r: float, theta: float) -> "Point":
        return cls(r * np.cos(theta), r * np.sin(theta))


def _as_points(p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError(f"points must have trailing dimension 2, got {pts.shape}")
    return pts


def check_domain(pts: np.ndarray, eps: float = EPS_GEOM) -> None:
    r = np.hypot(pts[..., 0], pts[..., 1])
    if np.any(r > 1.0 + eps):
        raise DomainError(f"point outside the closed disk (|p| = {r.max():.15g})")


def rotation_matrix(alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def mat2_mul(a, b):
    """Stacked 2x2 product ``a @ b``, written out (much faster than matmul on tiny matrices)."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    a00, a01, a10, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    b00, b01, b10, b11 = b[..., 0, 0], b[..., 0, 1], b[..., 1, 0], b[..., 1, 1]
    out[..., 0, 0] = a00 * b00 + a01 * b10
    out[..., 0, 1] = a00 * b01 + a01 * b11
    out[..., 1, 0] = a10 * b00 + a11 * b10
    out[..., 1, 1] = a10 * b01 + a11 * b11
    return out


# -- radial profiles ----------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """``f(r) = sum_k coeffs[k] * r**(2k)``.

    Being a polynomial in ``r^2`` makes ``f'(0) = 0`` automatic and lets the
    twist Jacobian use ``f'(r)/r = 2 F'(r^2)`` without dividing by r.
    """

    coeffs: tuple[float, ...]
    label: str = ""

    def f(self, r):
        return self.f_of_u(np.asarray(r, float) ** 2)

    def f_of_u(self, u):
        """``f`` as a function of ``u = r^2``."""
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def fprime_over_r_of_u(self, u):
        return np.polynomial.polynomial.polyval(u, self._dcoeffs)

    @property
    def _dcoeffs(self):
        return [2.0 * k * c for k, c in enumerate(self.coeffs)][1:] or [0.0]

    def fprime(self, r):
        r = np.asarray(r, float)
        return r * self.fprime_over_r(r)

    def fprime_over_r(self, r):
        return self.fprime_over_r_of_u(np.asarray(r, float) ** 2)

    @property
    def f1(self) -> float:
        return float(sum(self.coeffs))

    def moment(self, power: int) -> float:
        """``int_0^1 r**power f'(r) dr`` in closed form."""
        return float(sum(2.0 * k * c / (power + 2 * k) for k, c in enumerate(self.coeffs) if k))

    def to_record(self):
        return self.label if self.label in PROFILES else {"u_coeffs": list(self.coeffs)}


PROFILES = {
    "r2": RadialProfile((0.0, 1.0), "r2"),
    "bump": RadialProfile((1.0, -2.0, 1.0), "bump"),
    "bump3": RadialProfile((1.0, -3.0, 3.0, -1.0), "bump3"),
    "r4": RadialProfile((0.0, 0.0, 1.0), "r4"),
}


def profile(spec: Union[str, RadialProfile, dict, list, tuple]) -> RadialProfile:
    from .errors import SpecError

    if isinstance(spec, RadialProfile):
        return spec
    if isinstance(spec, str):
        try:
            return PROFILES[spec]
        except KeyError:
            raise SpecError(f"unknown profile {spec!r}; known: {sorted(PROFILES)}") from None
    if isinstance(spec, dict):
        spec = spec.get("u_coeffs")
    try:
        coeffs = tuple(float(c) for c in spec)
    except (TypeError, ValueError):
        raise SpecError(f"profile must be a label or u_coeffs list, got {spec!r}") from None
    if not coeffs:
        raise SpecError("empty profile")
    return RadialProfile(coeffs, "")


# -- generators ---------------------------------------------------------------

class Generator:
    """A single letter.  Subclasses implement ``_apply(pts) -> (pts, jac)``."""

    fixes_origin: Optional[bool] = True
    boundary_identity: Optional[bool] = None
    closed_form = True

    def apply(self, pts: np.ndarray):
        raise NotImplementedError

    def inverse(self) -> "Generator":
        raise NotImplementedError


@dataclass(frozen=True)
class RigidRotation(Generator):
    alpha: float

    def apply(self, pts):
        R = rotation_matrix(self.alpha)
        out = pts @ R.T
        return out, np.broadcast_to(R, pts.shape[:-1] + (2, 2))

    def inverse(self):
        return RigidRotation(-self.alpha)

    @property
    def boundary_identity(self):
        return bool(np.isclose(np.remainder(self.alpha + np.pi, 2 * np.pi) - np.pi, 0.0, atol=1e-14))

    def to_record(self):
        return {"kind": "rotation", "alpha": self.alpha}


@dataclass(frozen=True)
class Twist(Generator):
    """``(r, theta) -> (r, theta + s f(r))``."""

    s: float
    profile: RadialProfile

    def apply(self, pts):
        x, y = pts[..., 0], pts[..., 1]
        u = x * x + y * y
        phi = self.s * self.profile.f_of_u(u)
        c, sn = np.cos(phi), np.sin(phi)
        out = np.stack([c * x - sn * y, sn * x + c * y], -1)
        # J = R_phi (I + (J0 p) grad(phi)^T),  J0 p = (-y, x)
        g = self.s * self.profile.fprime_over_r_of_u(u)
        gx, gy = g * x, g * y
        m00 = 1.0 - y * gx
        m01 = -y * gy
        m10 = x * gx
        m11 = 1.0 + x * gy
        jac = np.empty(pts.shape[:-1] + (2, 2))
        jac[..., 0, 0] = c * m00 - sn * m10
        jac[..., 0, 1] = c * m01 - sn * m11
        jac[..., 1, 0] = sn * m00 + c * m10
        jac[..., 1, 1] = sn * m01 + c * m11
        return out, jac

    def inverse(self):
        return Twist(-self.s, self.profile)

    @property
    def boundary_identity(self):
        a = self.s * self.profile.f1
        return bool(np.isclose(np.remainder(a + np.pi, 2 * np.pi) - np.pi, 0.0, atol=1e-14))

    def to_record(self):
        return {"kind": "twist", "s": self.s, "profile": self.profile.to_record()}


@dataclass(frozen=True, eq=False)
class FlowTime1(Generator):
    """Time-1 RK4 flow of a Hamiltonian vector field.

    Origin fixing and boundary identity are declared by the caller and
    validated by sampling the Hamiltonian gradient.
    """

    hamiltonian: PolyHamiltonian
    steps: int = 256
    declared_fixes_origin: Optional[bool] = None
    declared_boundary_identity: Optional[bool] = None
    closed_form = False

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be positive")
        self.hamiltonian.check_boundary_constant()
        if self.declared_fixes_origin and self.hamiltonian.origin_speed() > 1e-12:
            raise ValueError(f"{self.hamiltonian.label}: vector field does not vanish at the origin")
        if self.declared_boundary_identity and self.hamiltonian.boundary_speed() > 1e-12:
            raise ValueError(f"{self.hamiltonian.label}: vector field does not vanish on the boundary")

    @property
    def fixes_origin(self):
        return self.declared_fixes_origin

    @property
    def boundary_identity(self):
        return self.declared_boundary_identity

    @cached_property
    def _table(self):
        return self.hamiltonian.stage_table(self.steps)

    def apply(self, pts):
        table, ex, ey, maxdeg, h = self._table
        flat = np.ascontiguousarray(pts.reshape(-1, 2), dtype=float)
        out, jac = _kernels.rk4_flow(flat, table, ex, ey, maxdeg, h)
        # RK4 does not preserve the circle exactly; keep images in the disk
        r = np.hypot(out[:, 0], out[:, 1])
        over = r > 1.0
        if np.any(over):
            out[over] /= r[over, None]
        return out.reshape(pts.shape), jac.reshape(pts.shape[:-1] + (2, 2))

    def inverse(self):
        return FlowTime1(self.hamiltonian.reversed(), self.steps,
                         self.declared_fixes_origin, self.declared_boundary_identity)

    def to_record(self):
        return {"kind": "flow", "hamiltonian": self.hamiltonian.to_record(), "steps": self.steps,
                "fixes_origin": self.declared_fixes_origin,
                "boundary_identity": self.declared_boundary_identity}


# -- words ----------------------------------------------------------------------

def _and(a: Optional[bool], b: Optional[bool]) -> Optional[bool]:
    return True if (a is True and b is True) else None


@dataclass(frozen=True)
class MapWord:
    """Composition ``letters[0] o letters[1] o ... o letters[-1]``."""

    letters: tuple[Generator, ...] = ()
    fixes_origin: Optional[bool] = True
    boundary_identity: Optional[bool] = True
    label: str = field(default="", compare=False)

    @classmethod
    def of(cls, *letters: Generator, label: str = "") -> "MapWord":
        fo: Optional[bool] = True
        bi: Optional[bool] = True
        if len(letters) == 1:
            fo, bi = letters[0].fixes_origin, letters[0].boundary_identity
        else:
            for g in letters:
                fo = _and(fo, g.fixes_origin)
                bi = _and(bi, g.boundary_identity)
        return cls(tuple(letters), fo, bi, label)

    def __len__(self):
        return len(self.letters)

    @property
    def closed_form(self) -> bool:
        return all(g.closed_form for g in self.letters)

    def apply(self, pts: np.ndarray, jac: Optional[np.ndarray] = None):
        """Push points (and optionally an accumulated Jacobian) through the word."""
        for g in reversed(self.letters):
            pts, jl = g.apply(pts)
            jac = jl if jac is None else mat2_mul(jl, jac)
        if jac is None:
            jac = np.broadcast_to(np.eye(2), pts.shape[:-1] + (2, 2))
        return pts, jac

    def __call__(self, p):
        return eval_map(self, p)

    def __matmul__(self, other: "MapWord") -> "MapWord":
        return compose(self, other)

    def to_record(self) -> dict:
        return {"letters": [dict(g.to_record(), inverted=False) for g in self.letters]}


IDENTITY = MapWord()


def eval_map(g: MapWord, p) -> np.ndarray:
    pts = _as_points(p)
    check_domain(pts)
    out, _ = g.apply(pts)
    return out


def jacobian(g: MapWord, p) -> np.ndarray:
    pts = _as_points(p)
    check_domain(pts)
    _, jac = g.apply(pts)
    return np.array(jac)


def eval_with_jacobian(g: MapWord, p):
    pts = _as_points(p)
    check_domain(pts)
    return g.apply(pts)


def compose(a: MapWord, b: MapWord) -> MapWord:
    """Word for ``a o b``."""
    if not a.letters:
        return b
    if not b.letters:
        return a
    label = f"{a.label}*{b.label}" if a.label and b.label else ""
    return MapWord(a.letters + b.letters, _and(a.fixes_origin, b.fixes_origin),
                   _and(a.boundary_identity, b.boundary_identity), label)


def inverse(g: MapWord) -> MapWord:
    return MapWord(tuple(l.inverse() for l in reversed(g.letters)), g.fixes_origin,
                   g.boundary_identity, f"({g.label})^-1" if g.label else "")


def power(g: MapWord, n: int) -> MapWord:
    if n < 0:
        return power(inverse(g), -n)
    return MapWord(g.letters * n, g.fixes_origin, g.boundary_identity,
                   f"({g.label})^{n}" if g.label else "")


def rotation(alpha: float) -> MapWord:
    return MapWord.of(RigidRotation(alpha), label=f"rotation({alpha:g})")


def twist(s: float, prof="r2") -> MapWord:
    p = profile(prof)
    return MapWord.of(Twist(s, p), label=f"twist({s:g},{p.label})")


def flow(h: PolyHamiltonian, steps: int = 256, fixes_origin=None, boundary_identity=None) -> MapWord:
    if fixes_origin is None:
        fixes_origin = h.origin_speed() <= 1e-12
    if boundary_identity is None:
        boundary_identity = h.boundary_speed() <= 1e-12
    return MapWord.of(FlowTime1(h, steps, fixes_origin, boundary_identity), label=f"flow({h.label})")


# -- validation -----------------------------------------------------------------

@dataclass
class ValidationReport:
    max_det_residual: float
    max_boundary_escape: float
    origin_displacement: Optional[float]
    eps_symp: float

    @property
    def ok(self) -> bool:
        tol_b = 1e-9 if self.eps_symp == EPS_SYMP_CLOSED else 1e-6
        return (self.max_det_residual <= self.eps_symp
                and self.max_boundary_escape <= tol_b
                and (self.origin_displacement is None or self.origin_displacement <= 1e-9))


def validate(g: MapWord, samples: int = 256, seed: int = 0) -> ValidationReport:
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0.0, 1.0, samples))
    th = rng.uniform(0.0, 2 * np.pi, samples)
    inner = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    _, jac = g.apply(inner)
    det = np.linalg.det(jac) if samples else np.zeros(0)
    tb = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    bd = np.stack([np.cos(tb), np.sin(tb)], -1)
    img, _ = g.apply(bd)
    escape = np.abs(np.hypot(img[:, 0], img[:, 1]) - 1.0)
    od = None
    if g.fixes_origin:
        o, _ = g.apply(np.zeros((1, 2)))
        od = float(np.hypot(*o[0]))
    return ValidationReport(
        float(np.max(np.abs(det - 1.0), initial=0.0)),
        float(np.max(escape, initial=0.0)),
        od,
        EPS_SYMP_CLOSED if g.closed_form else EPS_SYMP_FLOW,
    )

"""Isotopies ``g_t`` (universal-cover elements) and the path functionals R, S.

Every isotopy carries a Hamiltonian ``H_t`` with ``X_t = (dH/dy, -dH/dx)``, so
``i_{X_t} omega = dH_t``.  R normalizes ``H_t`` to vanish on the boundary and
integrates over the disk; S normalizes it to vanish at the origin and reads it
on the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from .circle import (CircleLift, boundary_lift_near, mean_displacement, rigid_lift,
                     translation_number, TWO_PI)
from .errors import BoundaryConstancyError, EndpointNotIdentity, OriginNotFixed
from .forms import DEFAULT_QUAD, LAMBDA, RADIAL, DiskPath, Quadrature, composite_gauss
from .geometry import MapWord
from .hamiltonian import (PolyHamiltonian, rotation_hamiltonian, twist_hamiltonian)
from .quasimorphism import (DEFAULT_KMAX, IndependenceViolation, SigmaBase, TauBase,
                            homogenize, sigma, tau)
from . import _kernels

DEFAULT_T_STEPS = 32
DEFAULT_RK4_STEPS = 256
LEMMA_TOL = 1e-6
THEOREM_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class Isotopy:
    kind: str
    hamiltonian: object
    endpoint: MapWord
    lift: CircleLift
    fixes_origin: bool
    params: dict = field(default_factory=dict)
    steps: int = DEFAULT_RK4_STEPS

    @property
    def label(self) -> str:
        if self.kind == "product":
            a, b = self.params["factors"]
            return f"{a.label}*{b.label}"
        args = ",".join(f"{k}={getattr(v, 'label', v)}" for k, v in self.params.items())
        return f"{self.kind}({args})"

    def inverse_at(self, t: float, pts: np.ndarray) -> np.ndarray:
        """``g_t^{-1}(pts)``."""
        if self.kind == "rotation":
            out, _ = geo.RigidRotation(-t * self.params["alpha"]).apply(pts)
        elif self.kind == "twist":
            out, _ = geo.Twist(-t * self.params["s"], self.params["profile"]).apply(pts)
        elif self.kind == "hamiltonian":
            if t == 0.0:
                return np.array(pts, float)
            n = max(1, int(np.ceil(self.steps * t)))
            table, ex, ey, maxdeg, h = self.hamiltonian.stage_table(n, t, 0.0)
            flat = np.ascontiguousarray(np.reshape(pts, (-1, 2)), dtype=float)
            out, _ = _kernels.rk4_flow(flat, table, ex, ey, maxdeg, h)
            out = out.reshape(np.shape(pts))
        elif self.kind == "product":
            a, b = self.params["factors"]
            out = b.inverse_at(t, a.inverse_at(t, pts))
        else:
            raise ValueError(self.kind)
        return out

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "steps": self.steps}
        for k, v in self.params.items():
            if k == "profile":
                rec[k] = v.to_record()
            elif k != "factors":
                rec[k] = v
        if self.kind == "hamiltonian":
            rec["hamiltonian"] = self.hamiltonian.to_record()
        return rec


def rotation_path(alpha: float) -> Isotopy:
    """``g_t = R_{t alpha}``."""
    return Isotopy("rotation", rotation_hamiltonian(alpha), geo.rotation(alpha),
                   rigid_lift(alpha), True, {"alpha": alpha})


def twist_path(s: float, prof="r2") -> Isotopy:
    """``g_t = Twist(t s, f)``."""
    p = geo.profile(prof)
    return Isotopy("twist", twist_hamiltonian(s, p.coeffs), geo.twist(s, p),
                   rigid_lift(s * p.f1), True, {"s": s, "profile": p})


def _boundary_angle_flow(h: PolyHamiltonian, theta0: float, steps: int) -> float:
    """Lifted boundary angle at t = 1: d theta/dt = -(x H_x + y H_y) on the circle."""

    def rate(t, th):
        x, y = np.cos(th), np.sin(th)
        hx, hy = h.grad(t, x, y)
        return -float(x * hx + y * hy)

    th = theta0
    dt = 1.0 / steps
    for i in range(steps):
        t = i * dt
        k1 = rate(t, th)
        k2 = rate(t + dt / 2, th + dt / 2 * k1)
        k3 = rate(t + dt / 2, th + dt / 2 * k2)
        k4 = rate(t + dt, th + dt * k3)
        th += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return th


def flow_endpoint(h: PolyHamiltonian, steps: int = DEFAULT_RK4_STEPS) -> MapWord:
    """Time-1 map of ``X_t`` as a one-letter word (RK4 with ``steps`` steps)."""
    if steps < 16:
        raise ValueError("flow_endpoint needs at least 16 RK4 steps")
    h.check_boundary_constant()
    fixes = h.origin_speed() <= 1e-12
    end = geo.flow(h, steps, fixes_origin=fixes)
    return MapWord(end.letters, end.fixes_origin, end.boundary_identity, h.label)


def hamiltonian_path(h: PolyHamiltonian, steps: int = DEFAULT_RK4_STEPS) -> Isotopy:
    """Flow of ``X_t``; the endpoint is the RK4 time-1 map."""
    end = flow_endpoint(h, steps)
    fixes = bool(end.fixes_origin)
    lift = boundary_lift_near(end, _boundary_angle_flow(h, 0.0, steps))
    return Isotopy("hamiltonian", h, end, lift, fixes, {"label": h.label}, steps)


class ProductHamiltonian:
    """Generator ``H_t + K_t o g_t^{-1}`` of ``t -> g_t o h_t``."""

    def __init__(self, first: Isotopy, second: Isotopy):
        self.first = first
        self.second = second
        self.label = f"{first.label}*{second.label}"

    def value(self, t, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        pts = np.stack(np.broadcast_arrays(x, y), -1)
        back = self.first.inverse_at(float(t), pts)
        return (self.first.hamiltonian.value(t, x, y)
                + self.second.hamiltonian.value(t, back[..., 0], back[..., 1]))


def product_isotopy(a: Isotopy, b: Isotopy) -> Isotopy:
    """Pointwise product path ``t -> a_t o b_t``."""
    if a.kind in ("rotation", "twist") and b.kind in ("rotation", "twist"):
        # symmetric generators commute, so the product field is the plain sum
        ham = a.hamiltonian + b.hamiltonian
    else:
        ham = ProductHamiltonian(a, b)
    return Isotopy("product", ham, geo.compose(a.endpoint, b.endpoint), a.lift.compose(b.lift),
                   a.fixes_origin and b.fixes_origin, {"factors": (a, b)},
                   max(a.steps, b.steps))


# -- functionals -------------------------------------------------------------------

def _boundary_value(ham, t: float) -> float:
    v0 = float(ham.value(t, 1.0, 0.0))
    v1 = float(ham.value(t, 0.0, 1.0))
    if abs(v0 - v1) > 1e-8:
        raise BoundaryConstancyError(f"H_t not constant on the boundary at t={t}: {v0} vs {v1}")
    return v0


def r_functional(iso: Isotopy, q: Quadrature = DEFAULT_QUAD, t_steps: int = DEFAULT_T_STEPS) -> float:
    """``int_0^1 int_D f_{X_t} omega dt`` with ``f_{X_t} = 0`` on the boundary."""
    pts, w = q.disk_nodes()
    tn, tw = composite_gauss(t_steps)
    total = 0.0
    for t, wt in zip(tn, tw):
        vals = iso.hamiltonian.value(t, pts[:, 0], pts[:, 1]) - _boundary_value(iso.hamiltonian, t)
        total += wt * float(np.dot(vals, w))
    return total


def _s_along(iso: Isotopy, end, t_steps: int) -> float:
    tn, tw = composite_gauss(t_steps)
    total = 0.0
    for t, wt in zip(tn, tw):
        total += wt * float(iso.hamiltonian.value(t, end[0], end[1]) - iso.hamiltonian.value(t, 0.0, 0.0))
    return total


def s_functional(iso: Isotopy, path: DiskPath = RADIAL, q: Quadrature = DEFAULT_QUAD,
                 t_steps: int = DEFAULT_T_STEPS, check_path: bool = True) -> float:
    """``int_0^1 f_t(gamma(1)) dt`` with ``f_t(o) = 0``."""
    if not iso.fixes_origin:
        raise OriginNotFixed(f"S needs an origin-fixing isotopy, got {iso.label}")
    if (path.anchor.x, path.anchor.y) != (0.0, 0.0):
        raise OriginNotFixed("S is defined with paths starting at the origin")
    value = _s_along(iso, path.endpoint, t_steps)
    if check_path:
        alt = DiskPath("segment", path.anchor, path.angle + 2.0)
        other = _s_along(iso, alt.endpoint, t_steps)
        if abs(other - value) > 1e-8:
            raise IndependenceViolation(f"S depends on the path: {value!r} vs {other!r}")
    return value


# -- identity reports ---------------------------------------------------------------

@dataclass
class IdentityReport:
    name: str
    subject: str
    lhs: float
    rhs: float
    bound: float
    parts: dict = field(default_factory=dict)
    residual: Optional[float] = None
    # "le": pass iff residual <= bound; "gt": pass iff residual > bound
    relation: str = "le"

    def __post_init__(self):
        if self.residual is None:
            self.residual = abs(self.lhs - self.rhs)
        self.lhs, self.rhs = float(self.lhs), float(self.rhs)
        self.residual, self.bound = float(self.residual), float(self.bound)

    @property
    def passed(self) -> bool:
        if self.relation == "gt":
            return bool(self.residual > self.bound)
        return bool(self.residual <= self.bound)

    def line(self) -> str:
        parts = ", ".join(f"{k}={v:.3g}" for k, v in self.parts.items() if isinstance(v, float))
        status = "PASS" if self.passed else "FAIL"
        op = ">" if self.relation == "gt" else "<="
        return (f"{status} {self.name} [{self.subject}] residual={self.residual:.3e} "
                f"{op} bound={self.bound:.3e} ({parts})")

    def to_record(self) -> dict:
        return {"check": self.name, "subject": self.subject, "lhs": self.lhs, "rhs": self.rhs,
                "residual": self.residual, "relation": self.relation, "bound": self.bound,
                "passed": self.passed,
                "parts": {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                          for k, v in self.parts.items()}}


def verify_lemma_tau_R(iso: Isotopy, q: Quadrature = DEFAULT_QUAD,
                       t_steps: int = DEFAULT_T_STEPS, tol: float = LEMMA_TOL) -> IdentityReport:
    """``tau_lambda(g_1) + 2 R = pi^2 f(phi_1)`` (exact, quadrature-limited)."""
    tv = tau(LAMBDA, iso.endpoint, q)
    r = r_functional(iso, q, t_steps)
    md = mean_displacement(iso.lift, q.n_theta)
    return IdentityReport("lemma_tau_R", iso.label, tv + 2 * r, np.pi**2 * md, tol,
                          {"tau": tv, "R": r, "f": md, "quadrature": tol})


def verify_lemma_sigma_S(iso: Isotopy, q: Quadrature = DEFAULT_QUAD,
                         t_steps: int = DEFAULT_T_STEPS, tol: float = LEMMA_TOL) -> IdentityReport:
    """``sigma_{lambda,gamma}(g_1) - S = phi_1(0)/2`` for the x-axis path."""
    if not iso.fixes_origin:
        raise OriginNotFixed(f"{iso.label} does not fix the origin")
    sv = sigma(LAMBDA, RADIAL, iso.endpoint, q)
    s = s_functional(iso, RADIAL, q, t_steps)
    phi0 = float(iso.lift(0.0))
    return IdentityReport("lemma_sigma_S", iso.label, sv - s, phi0 / 2, tol,
                          {"sigma": sv, "S": s, "phi1(0)": phi0, "quadrature": tol})


def verify_thm_main1(iso: Isotopy, k_max: int = DEFAULT_KMAX, q: Quadrature = DEFAULT_QUAD,
                     n_rot: int = 1024, t_steps: int = DEFAULT_T_STEPS,
                     tol: float = THEOREM_TOL) -> IdentityReport:
    """``tau_bar(g_1) + 2 R = pi^2 rot~``."""
    tb = homogenize(TauBase(LAMBDA, q), iso.endpoint, k_max)
    r = r_functional(iso, q, t_steps)
    rot = translation_number(iso.lift, n_rot)
    # sampled D_hat/n, the stricter of the two homogenization bounds
    hb = tb.meta["sampled_bound"]
    bound = hb + np.pi**2 * rot.error_bound + tol
    return IdentityReport("theorem_tau_R_rot", iso.label, tb.value + 2 * r, np.pi**2 * rot.value,
                          bound, {"tau_bar": tb.value, "R": r, "rot": rot.value,
                                  "homogenization": hb,
                                  "rotation": np.pi**2 * rot.error_bound, "quadrature": tol,
                                  "n": float(tb.meta["n"])})


def _circle_distance(a: float) -> float:
    return abs((a + 0.5) % 1.0 - 0.5)


def verify_thm_mod1(iso: Isotopy, k_max: int = DEFAULT_KMAX, q: Quadrature = DEFAULT_QUAD,
                    n_rot: int = 1024, t_steps: int = DEFAULT_T_STEPS, loop: Optional[bool] = None,
                    tol: float = LEMMA_TOL) -> IdentityReport:
    """Loops: ``2R/pi^2`` is an integer.  Otherwise
    ``frac(tau_bar/pi^2) + frac(2R/pi^2) = rot mod 1``."""
    is_loop = geo.validate(iso.endpoint, 64).max_boundary_escape <= 1e-9 and _is_identity(iso.endpoint)
    if loop is None:
        loop = is_loop
    elif loop and not is_loop:
        raise EndpointNotIdentity(f"{iso.label} does not end at the identity")
    r = r_functional(iso, q, t_steps)
    if loop:
        x = 2 * r / np.pi**2
        return IdentityReport("theorem_mod1_loop", iso.label, x, float(np.round(x)), tol,
                              {"R": r, "2R/pi^2": x})
    tb = homogenize(TauBase(LAMBDA, q), iso.endpoint, k_max)
    rot = translation_number(iso.lift, n_rot)
    ut = (tb.value / np.pi**2) % 1.0
    ur = (2 * r / np.pi**2) % 1.0
    rm = rot.value % 1.0
    resid = _circle_distance(ut + ur - rm)
    hb = tb.meta["sampled_bound"] / np.pi**2
    bound = hb + rot.error_bound + tol
    return IdentityReport("theorem_mod1", iso.label, (ut + ur) % 1.0, rm, bound,
                          {"tau_mod1": ut, "R_mod1": ur, "rot_mod1": rm,
                           "homogenization": hb,
                           "rotation": rot.error_bound, "quadrature": tol}, residual=resid)


def _is_identity(g: MapWord, samples: int = 64, tol: float = 1e-9) -> bool:
    rng = np.random.default_rng(1)
    r = np.sqrt(rng.uniform(size=samples))
    th = rng.uniform(0, TWO_PI, samples)
    p = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    img, _ = g.apply(p)
    return float(np.max(np.abs(img - p))) <= tol


def verify_thm_main2(iso: Isotopy, k_max: int = DEFAULT_KMAX, q: Quadrature = DEFAULT_QUAD,
                     n_rot: int = 1024, t_steps: int = DEFAULT_T_STEPS,
                     tol: float = THEOREM_TOL) -> IdentityReport:
    """``sigma_bar(g_1) - S = pi rot~`` on the origin stabilizer."""
    if not iso.fixes_origin:
        raise OriginNotFixed(f"{iso.label} does not fix the origin")
    sb = homogenize(SigmaBase(LAMBDA, RADIAL, q), iso.endpoint, k_max)
    s = s_functional(iso, RADIAL, q, t_steps)
    rot = translation_number(iso.lift, n_rot)
    hb = sb.meta["sampled_bound"]
    bound = hb + np.pi * rot.error_bound + tol
    return IdentityReport("theorem_sigma_S_rot", iso.label, sb.value - s, np.pi * rot.value, bound,
                          {"sigma_bar": sb.value, "S": s, "rot": rot.value,
                           "homogenization": hb, "rotation": np.pi * rot.error_bound,
                           "quadrature": tol, "n": float(sb.meta["n"])})


def s_is_homomorphism(a: Isotopy, b: Isotopy, t_steps: int = DEFAULT_T_STEPS,
                      tol: float = LEMMA_TOL) -> IdentityReport:
    if not (a.fixes_origin and b.fixes_origin):
        raise OriginNotFixed("S is defined on origin-fixing isotopies")
    prod = product_isotopy(a, b)
    sp = s_functional(prod, t_steps=t_steps)
    sa = s_functional(a, t_steps=t_steps)
    sb = s_functional(b, t_steps=t_steps)
    return IdentityReport("S_homomorphism", prod.label, sp, sa + sb, tol,
                          {"S(product)": sp, "S(a)": sa, "S(b)": sb})


def r_is_homomorphism(a: Isotopy, b: Isotopy, q: Quadrature = DEFAULT_QUAD,
                      t_steps: int = DEFAULT_T_STEPS, tol: float = 2e-8) -> IdentityReport:
    prod = product_isotopy(a, b)
    rp = r_functional(prod, q, t_steps)
    ra = r_functional(a, q, t_steps)
    rb = r_functional(b, q, t_steps)
    return IdentityReport("R_homomorphism", prod.label, rp, ra + rb, tol,
                          {"R(product)": rp, "R(a)": ra, "R(b)": rb})

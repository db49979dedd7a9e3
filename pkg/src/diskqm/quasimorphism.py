"""Group functionals on Symp(D) and its origin stabilizer.

``tau_eta(g) = int_D g*eta ^ eta`` and ``sigma_{eta,gamma}(g) = int_gamma
g*eta - eta`` are quasi-morphisms; on the subgroups fixing the boundary
pointwise they restrict to the Calabi invariant and the real flux.
Homogenization runs along the doubling schedule ``n = 2^k``.

Coboundary convention: ``delta phi(g, h) = phi(g) + phi(h) - phi(gh)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import geometry as geo
from .circle import CircleLift, boundary_lift, rotation_number_mod1, TWO_PI
from .errors import (AnchorNotFixed, BoundaryIdentityRequired, DiskQmError, OriginNotFixed)
from .estimate import QmEstimate
from .forms import (DEFAULT_QUAD, LAMBDA, RADIAL, SPIRAL, DiskPath, PrimitiveOneForm,
                    Quadrature, lambda_plus_dF, map_chunks, pullback_from, wedge_density)
from .geometry import MapWord

DEFAULT_KMAX = 10
ETA_CHECK_TOL = 1e-6
ANCHOR_TOL = 1e-8
HOMOG_FLOOR = 1e-10


class IndependenceViolation(DiskQmError):
    """Two choices that must agree (eta, gamma) gave different values."""


# -- bases --------------------------------------------------------------------

class TauBase:
    """``g -> tau_eta(g)`` with a fixed primitive and quadrature."""

    name = "tau"

    def __init__(self, eta: PrimitiveOneForm = LAMBDA, quad: Quadrature = DEFAULT_QUAD):
        self.eta = eta
        self.quad = quad
        # tau_lambda = pi^2 f - 2R with R additive and |delta f| < 1
        self.defect_bound = np.pi**2 if eta == LAMBDA else None

    def __repr__(self):
        return f"TauBase({self.eta.label})"

    def compose(self, a, b):
        return geo.compose(a, b)

    def __call__(self, g: MapWord) -> float:
        return float(self.power_sequence(g, 1)[1])

    def power_sequence(self, g: MapWord, n_max: int) -> np.ndarray:
        """``[tau(g^0), tau(g^1), ..., tau(g^n_max)]`` from one orbit of the nodes."""
        pts, w = self.quad.disk_nodes()
        eta = self.eta

        def run(idx):
            p0 = pts[idx]
            eta0 = eta(p0)
            wc = w[idx]
            img, jac = p0, np.broadcast_to(np.eye(2), p0.shape[:-1] + (2, 2))
            out = np.zeros(n_max + 1)
            for m in range(1, n_max + 1):
                img, jac = g.apply(img, jac)
                out[m] = np.dot(wedge_density(pullback_from(img, jac, eta), eta0), wc)
            return out

        parts = map_chunks(run, np.arange(len(pts)), self.quad.workers)
        return np.sum(np.array(parts), axis=0)


def _fixes_point(g: MapWord, a, tol: float = ANCHOR_TOL) -> bool:
    img, _ = g.apply(np.asarray([a], float))
    return float(np.hypot(*(img[0] - np.asarray(a)))) <= tol


class SigmaBase:
    """``g -> sigma_{eta, gamma}(g)`` on the stabilizer of ``gamma(0)``."""

    name = "sigma"

    def __init__(self, eta: PrimitiveOneForm = LAMBDA, path: DiskPath = RADIAL,
                 quad: Quadrature = DEFAULT_QUAD):
        self.eta = eta
        self.path = path
        self.quad = quad
        # sigma - S = (phi(0) - 0)/2 up to rotating the segment, and |delta| < pi
        radial = path.kind == "segment" and (path.anchor.x, path.anchor.y) == (0.0, 0.0)
        self.defect_bound = np.pi if eta == LAMBDA and radial else None

    def __repr__(self):
        return f"SigmaBase({self.eta.label}, {self.path.kind}@{self.path.angle:g})"

    def compose(self, a, b):
        return geo.compose(a, b)

    def check(self, g: MapWord) -> None:
        anchor = self.path.anchor
        if (anchor.x, anchor.y) == (0.0, 0.0) and g.fixes_origin is True:
            return
        if not _fixes_point(g, anchor):
            raise AnchorNotFixed(f"map does not fix the path anchor {tuple(anchor)}")

    def __call__(self, g: MapWord) -> float:
        return float(self.power_sequence(g, 1)[1])

    def power_sequence(self, g: MapWord, n_max: int) -> np.ndarray:
        self.check(g)
        t, w = self.quad.path_nodes()
        p0 = self.path(t)
        vel = self.path.derivative(t)
        base = np.einsum("ni,ni->n", self.eta(p0), vel)
        img, jac = p0, np.broadcast_to(np.eye(2), p0.shape[:-1] + (2, 2))
        out = np.zeros(n_max + 1)
        for m in range(1, n_max + 1):
            img, jac = g.apply(img, jac)
            pulled = np.einsum("ni,ni->n", pullback_from(img, jac, self.eta), vel)
            out[m] = np.dot(pulled - base, w)
        return out


class MeanDisplacementBase:
    """``phi -> (1/4 pi^2) int (phi(theta) - theta) d theta`` on circle lifts."""

    name = "mean_displacement"

    def __init__(self, n_theta: int = 128):
        self.n_theta = n_theta
        self.defect_bound = 1.0

    def __repr__(self):
        return f"MeanDisplacementBase({self.n_theta})"

    def compose(self, a: CircleLift, b: CircleLift) -> CircleLift:
        return a.compose(b)

    def __call__(self, lift: CircleLift) -> float:
        return float(self.power_sequence(lift, 1)[1])

    def power_sequence(self, lift: CircleLift, n_max: int) -> np.ndarray:
        th = TWO_PI * np.arange(self.n_theta) / self.n_theta
        x = th
        out = np.zeros(n_max + 1)
        for m in range(1, n_max + 1):
            x = lift(x)
            out[m] = np.mean(x - th) / TWO_PI
        return out


Base = Union[TauBase, SigmaBase, MeanDisplacementBase]


# -- plain functionals ----------------------------------------------------------

def tau(eta: PrimitiveOneForm, g: MapWord, q: Quadrature = DEFAULT_QUAD) -> float:
    return TauBase(eta, q)(g)


def sigma(eta: PrimitiveOneForm, path: DiskPath, g: MapWord, q: Quadrature = DEFAULT_QUAD) -> float:
    return SigmaBase(eta, path, q)(g)


def _require_rel(g: MapWord) -> None:
    if g.boundary_identity is not True:
        raise BoundaryIdentityRequired("boundary_identity required: map must fix the boundary pointwise")


def calabi(g: MapWord, q: Quadrature = DEFAULT_QUAD, alt_eta: Optional[PrimitiveOneForm] = None) -> float:
    _require_rel(g)
    value = tau(LAMBDA, g, q)
    alt = tau(alt_eta or lambda_plus_dF("xy", 0.5), g, q)
    if abs(alt - value) > ETA_CHECK_TOL:
        raise IndependenceViolation(f"Calabi depends on eta: {value!r} vs {alt!r}")
    return value


def flux(g: MapWord, path: DiskPath = RADIAL, q: Quadrature = DEFAULT_QUAD) -> float:
    _require_rel(g)
    value = sigma(LAMBDA, path, g, q)
    if (path.anchor.x, path.anchor.y) == (0.0, 0.0):
        alt_path = SPIRAL if path != SPIRAL else RADIAL
    else:
        alt_path = DiskPath("segment", path.anchor, path.angle + 2.0)
    alt = sigma(lambda_plus_dF("x2", 0.5), alt_path, g, q)
    if abs(alt - value) > ETA_CHECK_TOL:
        raise IndependenceViolation(f"flux depends on (eta, gamma): {value!r} vs {alt!r}")
    return value


# -- homogenization and defects ---------------------------------------------------

def cyclic_defect(values: np.ndarray) -> float:
    """``max |v(a+b) - v(a) - v(b)|`` over ``a, b >= 1``, ``a + b <= n``."""
    n = len(values) - 1
    worst = 0.0
    for a in range(1, n // 2 + 1):
        b = np.arange(a, n - a + 1)
        worst = max(worst, float(np.max(np.abs(values[a + b] - values[a] - values[b]))))
    return worst


def homogenize(base: Base, g, k_max: int = DEFAULT_KMAX,
               sample: Optional["GroupSample"] = None, floor: float = HOMOG_FLOOR) -> QmEstimate:
    """``base(g^n)/n`` at ``n = 2^k_max`` with error bound ``D/n + floor``.

    ``D_hat`` is the defect sampled over all pairs ``(g^a, g^b)`` with
    ``a + b <= n`` (and over ``sample`` if given); it is a lower estimate of
    the true defect.  When the base knows an analytic defect bound, ``D`` is
    the larger of the two; otherwise the bound is heuristic.  Quadrature
    error of the iterates shows up only through ``D_hat``.  ``meta
    ["sampled_bound"]`` is ``D_hat/n + floor`` alone.  ``floor`` absorbs
    rounding where the sampled defect is exactly zero.
    """
    n = 2**k_max
    vals = base.power_sequence(g, n)
    d_hat = cyclic_defect(vals)
    if sample is not None:
        d_hat = max(d_hat, defect_estimate(base, sample))
    known = getattr(base, "defect_bound", None)
    d = max(d_hat, known) if known is not None else d_hat
    return QmEstimate(
        float(vals[n]) / n,
        d / n + floor,
        {
            "n": n,
            "base": repr(base),
            "defect_estimate": d_hat,
            "defect_bound": known,
            "sampled_bound": d_hat / n + floor,
            "sequence": [(2**k, float(vals[2**k]) / 2**k) for k in range(k_max + 1)],
            "heuristic": known is None,
        },
    )


@dataclass
class GroupSample:
    """Elements plus index pairs for defect and coboundary probes."""

    elements: list
    pairs: list[tuple[int, int]]
    seed: int = 0
    family: str = ""


def defect_estimate(base: Base, sample: GroupSample) -> float:
    """Max sampled ``|base(gh) - base(g) - base(h)|``; a lower bound on the defect."""
    cache: dict[int, float] = {}

    def val(i):
        if i not in cache:
            cache[i] = base(sample.elements[i])
        return cache[i]

    worst = 0.0
    for i, j in sample.pairs:
        gh = base.compose(sample.elements[i], sample.elements[j])
        worst = max(worst, abs(base(gh) - val(i) - val(j)))
    return worst


def coboundary(base: Base, g, h) -> float:
    return base(g) + base(h) - base(base.compose(g, h))


def hom_difference(g: MapWord, k_max: int = DEFAULT_KMAX, q: Quadrature = DEFAULT_QUAD,
                   path: DiskPath = RADIAL) -> QmEstimate:
    """``tau_bar - pi sigma_bar`` on the origin stabilizer."""
    if g.fixes_origin is not True and not _fixes_point(g, (0.0, 0.0)):
        raise OriginNotFixed("hom_difference needs an origin-fixing map")
    t = homogenize(TauBase(LAMBDA, q), g, k_max)
    s = homogenize(SigmaBase(LAMBDA, path, q), g, k_max)
    out = t - s.scaled(np.pi)
    return QmEstimate(out.value, out.error_bound,
                      {"tau_bar": t.value, "sigma_bar": s.value,
                       "tau_bound": t.error_bound, "sigma_bound": s.error_bound, "n": t.meta["n"],
                       "sampled_bound": t.meta["sampled_bound"] + np.pi * s.meta["sampled_bound"]})


def mod1_reductions(g: MapWord, k_max: int = DEFAULT_KMAX, q: Quadrature = DEFAULT_QUAD,
                    n_rot: int = 1024) -> tuple[float, float]:
    tb = homogenize(TauBase(LAMBDA, q), g, k_max).value
    ut = (tb / np.pi**2) % 1.0
    if ut > 1.0 - 1e-12:
        ut = 0.0
    return float(ut), rotation_number_mod1(boundary_lift(g, 0), n_rot)


# -- random samples -----------------------------------------------------------------

def random_word(rng: np.random.Generator, family: str, length: int = 3,
                flow_steps: int = 32) -> MapWord:
    """Seeded random word.

    Families: ``rel`` (boundary identity, origin fixing), ``origin`` (origin
    fixing), ``rel_twists`` (commuting twists with f(1) = 0),
    ``symmetric`` (rotations and twists).
    """
    from .hamiltonian import rel_hamiltonian, shear_hamiltonian, wobble_hamiltonian

    letters = []
    for _ in range(length):
        c = rng.integers(3)
        if family == "rel_twists" or (family == "rel" and c < 2):
            prof = geo.PROFILES["bump" if rng.integers(2) else "bump3"]
            letters.append(geo.Twist(float(rng.uniform(-2, 2)), prof))
        elif family == "rel":
            h = rel_hamiltonian(float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1)))
            letters.append(geo.FlowTime1(h, flow_steps, True, True))
        elif family in ("origin", "symmetric"):
            if c == 0:
                letters.append(geo.RigidRotation(float(rng.uniform(-np.pi, np.pi))))
            elif c == 1 or family == "symmetric":
                prof = geo.PROFILES[("r2", "bump", "r4")[rng.integers(3)]]
                letters.append(geo.Twist(float(rng.uniform(-1.5, 1.5)), prof))
            elif rng.integers(2):
                h = wobble_hamiltonian(float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-0.15, 0.15)))
                letters.append(geo.FlowTime1(h, flow_steps, True, False))
            else:
                # |c| < alpha/2 keeps the origin elliptic; strongly hyperbolic words grow
                # Jacobians exponentially and no fixed quadrature resolves tau(g^n)
                alpha = float(rng.uniform(0.8, 1.5)) * (1 if rng.integers(2) else -1)
                h = shear_hamiltonian(alpha, float(rng.uniform(-0.15, 0.15)))
                letters.append(geo.FlowTime1(h, flow_steps, True, False))
        else:
            raise ValueError(f"unknown family {family!r}")
    return MapWord.of(*letters, label=f"{family}-word")


def random_sample(family: str, n_pairs: int = 20, seed: int = 0, length: int = 2,
                  flow_steps: int = 32) -> GroupSample:
    rng = np.random.default_rng(seed)
    elements = [random_word(rng, family, length, flow_steps) for _ in range(2 * n_pairs)]
    pairs = [(2 * i, 2 * i + 1) for i in range(n_pairs)]
    return GroupSample(elements, pairs, seed, family)


def random_lift_sample(n_pairs: int = 50, seed: int = 0) -> GroupSample:
    """Lifts ``theta + a + b sin(k theta + c)`` with ``|b k| < 1``."""
    rng = np.random.default_rng(seed)
    elements = []
    for _ in range(2 * n_pairs):
        a = float(rng.uniform(-10, 10))
        k = int(rng.integers(1, 4))
        b = float(rng.uniform(-0.95, 0.95)) / k
        c = float(rng.uniform(0, TWO_PI))
        elements.append(CircleLift(lambda th, a=a, b=b, k=k, c=c: th + a + b * np.sin(k * th + c),
                                   f"sin({a:.2f},{b:.2f},{k})"))
    pairs = [(2 * i, 2 * i + 1) for i in range(n_pairs)]
    return GroupSample(elements, pairs, seed, "lifts")

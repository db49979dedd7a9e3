"""Time-dependent polynomial Hamiltonians on the disk.

A Hamiltonian is a finite sum ``sum_k c_k(t) * P_k(x, y)`` where each ``c_k``
is a :class:`TimeFactor` and each ``P_k`` a sparse polynomial given as
monomials ``(i, j, coeff)`` for ``coeff * x**i * y**j``.  The vector field is
``X = (dH/dy, -dH/dx)`` so that ``i_X (dx ^ dy) = dH``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BoundaryConstancyError, SpecError

Monomial = tuple[int, int, float]

#: derivative rows used by the flow kernel
DERIV_ORDER = ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


@dataclass(frozen=True)
class TimeFactor:
    """``sum_j poly[j] t**j + sum amp*cos(omega*t + phase)``."""

    poly: tuple[float, ...] = (1.0,)
    cosines: tuple[tuple[float, float, float], ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = P.polyval(t, self.poly) if self.poly else np.zeros_like(t)
        for amp, omega, phase in self.cosines:
            val = val + amp * np.cos(omega * t + phase)
        return val

    def reversed(self) -> "TimeFactor":
        """Factor for ``t -> 1 - t``."""
        # p(1 - t) via binomial expansion
        out = np.zeros(len(self.poly))
        for j, a in enumerate(self.poly):
            for k in range(j + 1):
                out[k] += a * comb(j, k) * (-1.0) ** k
        cos = tuple((amp, -omega, omega + phase) for amp, omega, phase in self.cosines)
        return TimeFactor(tuple(float(v) for v in out), cos)

    def scaled(self, c: float) -> "TimeFactor":
        return TimeFactor(
            tuple(c * a for a in self.poly),
            tuple((c * amp, om, ph) for amp, om, ph in self.cosines),
        )

    def to_record(self) -> dict:
        rec = {"poly": list(self.poly)}
        if self.cosines:
            rec["cos"] = [list(c) for c in self.cosines]
        return rec

    @classmethod
    def from_record(cls, rec) -> "TimeFactor":
        if rec is None:
            return cls()
        if isinstance(rec, (int, float)):
            return cls((float(rec),))
        try:
            poly = tuple(float(a) for a in rec.get("poly", ()))
            cos = tuple(tuple(float(v) for v in c) for c in rec.get("cos", ()))
        except (TypeError, ValueError, AttributeError) as exc:
            raise SpecError(f"bad time factor {rec!r}") from exc
        if any(len(c) != 3 for c in cos):
            raise SpecError("cos terms are [amp, omega, phase]")
        return cls(poly, cos)


def _derive(monos: tuple[Monomial, ...], dx: int, dy: int) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for i, j, c in monos:
        if i < dx or j < dy:
            continue
        coef = c
        for k in range(dx):
            coef *= i - k
        for k in range(dy):
            coef *= j - k
        key = (i - dx, j - dy)
        out[key] = out.get(key, 0.0) + coef
    return out


def radial_monomials(u_coeffs, scale: float = 1.0) -> tuple[Monomial, ...]:
    """Expand ``scale * sum_k u_coeffs[k] * (x^2 + y^2)**k`` into monomials."""
    acc: dict[tuple[int, int], float] = {}
    for k, a in enumerate(u_coeffs):
        if a == 0:
            continue
        for m in range(k + 1):
            key = (2 * m, 2 * (k - m))
            acc[key] = acc.get(key, 0.0) + scale * a * comb(k, m)
    return tuple((i, j, c) for (i, j), c in sorted(acc.items()) if c != 0.0)


def multiply_monomials(a, b) -> tuple[Monomial, ...]:
    acc: dict[tuple[int, int], float] = {}
    for i1, j1, c1 in a:
        for i2, j2, c2 in b:
            key = (i1 + i2, j1 + j2)
            acc[key] = acc.get(key, 0.0) + c1 * c2
    return tuple((i, j, c) for (i, j), c in sorted(acc.items()) if c != 0.0)


@dataclass(frozen=True)
class Term:
    time: TimeFactor
    monomials: tuple[Monomial, ...]


@dataclass(frozen=True)
class PolyHamiltonian:
    """Sum of separable terms; immutable, hashable by identity of its terms."""

    terms: tuple[Term, ...]
    label: str = "H"

    # -- evaluation ---------------------------------------------------------
    @cached_property
    def _derived(self) -> dict:
        """``{(dx, dy): [[(i, j, a), ...] per term]}`` filled on demand."""
        return {}

    def _eval(self, t, x, y, dx: int, dy: int):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if (dx, dy) not in self._derived:
            self._derived[(dx, dy)] = [sorted((i, j, a) for (i, j), a in
                                              _derive(tm.monomials, dx, dy).items())
                                       for tm in self.terms]
        per_term = self._derived[(dx, dy)]
        out = np.zeros(np.broadcast(x, y).shape)
        xp, yp = [np.ones_like(x)], [np.ones_like(y)]
        for term, mons in zip(self.terms, per_term):
            c = float(term.time(t))
            if c == 0.0 or not mons:
                continue
            acc = 0.0
            for i, j, a in mons:
                while len(xp) <= i:
                    xp.append(xp[-1] * x)
                while len(yp) <= j:
                    yp.append(yp[-1] * y)
                acc = acc + a * (xp[i] * yp[j])
            out = out + c * acc
        return out

    def value(self, t, x, y):
        return self._eval(t, x, y, 0, 0)

    def grad(self, t, x, y):
        return self._eval(t, x, y, 1, 0), self._eval(t, x, y, 0, 1)

    def hessian(self, t, x, y):
        return (self._eval(t, x, y, 2, 0), self._eval(t, x, y, 1, 1),
                self._eval(t, x, y, 0, 2))

    def vector_field(self, t, x, y):
        hx, hy = self.grad(t, x, y)
        return hy, -hx

    # -- algebra ------------------------------------------------------------
    def reversed(self) -> "PolyHamiltonian":
        """``K(t, p) = -H(1 - t, p)``: its time-1 flow inverts that of H."""
        return PolyHamiltonian(
            tuple(Term(tm.time.reversed().scaled(-1.0), tm.monomials) for tm in self.terms),
            label=f"rev({self.label})",
        )

    def __add__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        return PolyHamiltonian(self.terms + other.terms, f"{self.label}+{other.label}")

    @property
    def degree(self) -> int:
        return max((i + j for tm in self.terms for i, j, _ in tm.monomials), default=0)

    # -- kernel tables ------------------------------------------------------
    @cached_property
    def _basis(self):
        keys: set[tuple[int, int]] = set()
        per_term = []
        for tm in self.terms:
            rows = [_derive(tm.monomials, dx, dy) for dx, dy in DERIV_ORDER]
            per_term.append(rows)
            for r in rows:
                keys.update(r)
        keys_sorted = sorted(keys) or [(0, 0)]
        index = {k: m for m, k in enumerate(keys_sorted)}
        coef = np.zeros((len(self.terms), len(DERIV_ORDER), len(keys_sorted)))
        for t_idx, rows in enumerate(per_term):
            for r_idx, row in enumerate(rows):
                for k, a in row.items():
                    coef[t_idx, r_idx, index[k]] = a
        ex = np.array([k[0] for k in keys_sorted], dtype=np.int64)
        ey = np.array([k[1] for k in keys_sorted], dtype=np.int64)
        maxdeg = int(max(ex.max(), ey.max(), 1))
        return coef, ex, ey, maxdeg

    def stage_table(self, steps: int, t0: float = 0.0, t1: float = 1.0):
        """Coefficient table (steps, 3, 5, M) at RK4 stage times."""
        coef, ex, ey, maxdeg = self._basis
        h = (t1 - t0) / steps
        starts = t0 + h * np.arange(steps)
        times = np.stack([starts, starts + 0.5 * h, starts + h], axis=1)
        factors = np.stack([np.broadcast_to(tm.time(times), times.shape)
                            for tm in self.terms], axis=-1)
        table = np.einsum("sqk,krm->sqrm", factors, coef)
        return np.ascontiguousarray(table), ex, ey, maxdeg, h

    # -- validation ---------------------------------------------------------
    def boundary_spread(self, n_t: int = 17, n_theta: int = 64) -> float:
        """Max over t of the spatial oscillation of H on the unit circle."""
        th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
        worst = 0.0
        for t in np.linspace(0.0, 1.0, n_t):
            v = self.value(t, np.cos(th), np.sin(th))
            worst = max(worst, float(v.max() - v.min()))
        return worst

    def check_boundary_constant(self, tol: float = 1e-8) -> None:
        spread = self.boundary_spread()
        if spread > tol:
            raise BoundaryConstancyError(
                f"{self.label}: H varies by {spread:.3e} on the boundary; "
                "its vector field is not tangent to the boundary"
            )

    def origin_speed(self, n_t: int = 17) -> float:
        worst = 0.0
        for t in np.linspace(0.0, 1.0, n_t):
            hx, hy = self.grad(t, 0.0, 0.0)
            worst = max(worst, float(np.hypot(hx, hy)))
        return worst

    def boundary_speed(self, n_t: int = 17, n_theta: int = 64) -> float:
        th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
        worst = 0.0
        for t in np.linspace(0.0, 1.0, n_t):
            hx, hy = self.grad(t, np.cos(th), np.sin(th))
            worst = max(worst, float(np.hypot(hx, hy).max()))
        return worst

    # -- serialization ------------------------------------------------------
    def to_record(self) -> dict:
        return {
            "label": self.label,
            "terms": [
                {"time": tm.time.to_record(), "monomials": [list(m) for m in tm.monomials]}
                for tm in self.terms
            ],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "PolyHamiltonian":
        if not isinstance(rec, dict) or "terms" not in rec:
            raise SpecError("hamiltonian record needs a 'terms' list")
        terms = []
        for trec in rec["terms"]:
            time = TimeFactor.from_record(trec.get("time"))
            if "radial" in trec:
                monos = radial_monomials([float(a) for a in trec["radial"]])
                if "monomials" in trec:
                    monos = multiply_monomials(monos, _parse_monos(trec["monomials"]))
            elif "monomials" in trec:
                monos = _parse_monos(trec["monomials"])
            else:
                raise SpecError("term needs 'monomials' and/or 'radial'")
            terms.append(Term(time, monos))
        return cls(tuple(terms), label=str(rec.get("label", "H")))


def _parse_monos(raw) -> tuple[Monomial, ...]:
    try:
        monos = tuple((int(i), int(j), float(c)) for i, j, c in raw)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"monomials must be [i, j, coeff] triples, got {raw!r}") from exc
    if any(i < 0 or j < 0 for i, j, _ in monos):
        raise SpecError("negative exponent in monomial")
    return monos


# -- built-in Hamiltonians -----------------------------------------------------

def rotation_hamiltonian(alpha: float) -> PolyHamiltonian:
    """``H = -alpha r^2 / 2``; generates rotation by ``alpha * t``."""
    return PolyHamiltonian((Term(TimeFactor(), radial_monomials([0.0, -alpha / 2])),),
                           label=f"rot({alpha:g})")


def twist_hamiltonian(s: float, u_coeffs) -> PolyHamiltonian:
    """Generator of ``t -> Twist(t*s, f)`` for ``f = sum c_k r^{2k}``.

    Angular speed ``s f(r)`` needs ``dH/dr = -s r f(r)``, so
    ``H = -(s/2) sum c_k u^{k+1}/(k+1)`` with ``u = r^2``.
    """
    h_u = [0.0] + [-0.5 * s * c / (k + 1) for k, c in enumerate(u_coeffs)]
    return PolyHamiltonian((Term(TimeFactor(), radial_monomials(h_u)),), label=f"twist({s:g})")


def bump_hamiltonian(amplitude: float = 0.25) -> PolyHamiltonian:
    """``amplitude * (1 - r^2)^2``, autonomous and rotationally symmetric."""
    return PolyHamiltonian((Term(TimeFactor(), radial_monomials([1.0, -2.0, 1.0], amplitude)),),
                           label="bump")


def wobble_hamiltonian(alpha: float = 1.0, eps: float = 0.15, drift: float = 0.0,
                       omega: float = 2 * np.pi) -> PolyHamiltonian:
    """Rotation by ``alpha`` plus non-symmetric, time-dependent perturbations.

    ``-alpha r^2/2 + eps cos(omega t) (1 - r^2) x y + eps (1 - r^2)^2 y^2 / 2
    + drift (1 - t) (1 - r^2) x``.  Constant on the boundary for every t; the
    origin is fixed iff ``drift == 0``.
    """
    one_minus_u = radial_monomials([1.0, -1.0])
    terms = [
        Term(TimeFactor(), radial_monomials([0.0, -alpha / 2])),
        Term(TimeFactor((), ((eps, omega, 0.0),)), multiply_monomials(one_minus_u, ((1, 1, 1.0),))),
        Term(TimeFactor((eps / 2,)),
             multiply_monomials(radial_monomials([1.0, -2.0, 1.0]), ((0, 2, 1.0),))),
    ]
    if drift:
        terms.append(Term(TimeFactor((drift, -drift)), multiply_monomials(one_minus_u, ((1, 0, 1.0),))))
    return PolyHamiltonian(tuple(terms), label="wobble" if not drift else "wobble-drift")


def rel_hamiltonian(amplitude: float = 1.0, eps: float = 0.5) -> PolyHamiltonian:
    """Gradient vanishes on the boundary: the flow is the identity there.

    ``(1 - r^2)^2 * (amplitude/4 + eps * x * y) * (1 + t)``.
    """
    base = radial_monomials([1.0, -2.0, 1.0])
    monos = multiply_monomials(base, ((0, 0, amplitude / 4), (1, 1, eps)))
    return PolyHamiltonian((Term(TimeFactor((1.0, 1.0)), monos),), label="rel")


def shear_hamiltonian(alpha: float = 1.2, c: float = 0.25, eps: float = 0.2,
                      omega: float = 2 * np.pi) -> PolyHamiltonian:
    """``-alpha r^2/2 + c (1 + eps sin(omega t)) (1 - r^2)(x^2 - y^2)``.

    Fixes the origin, but the boundary moves with angular speed
    ``alpha + 2 c (1 + eps sin(omega t)) cos(2 theta)``, so the boundary map
    is not a rigid rotation when ``c != 0``.
    """
    quad = multiply_monomials(radial_monomials([1.0, -1.0]), ((2, 0, c), (0, 2, -c)))
    terms = (
        Term(TimeFactor(), radial_monomials([0.0, -alpha / 2])),
        Term(TimeFactor((1.0,)), quad),
        Term(TimeFactor((), ((eps, omega, -np.pi / 2),)), quad),
    )
    return PolyHamiltonian(terms, label="shear")


BUILTIN_HAMILTONIANS = {
    "shear": shear_hamiltonian,
    "bump": bump_hamiltonian,
    "wobble": wobble_hamiltonian,
    "rel": rel_hamiltonian,
}

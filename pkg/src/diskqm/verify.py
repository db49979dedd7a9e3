"""Named verification suites over the built-in battery plus seeded random words.

Every check is an :class:`IdentityReport`: a measured residual against an
allowed bound, with the bound's pieces listed in ``parts``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import geometry as geo
from .circle import TWO_PI, boundary_lift, mean_displacement, translation_number
from .forms import (LAMBDA, RADIAL, SPIRAL, Quadrature, lambda_plus_dF)
from .hamiltonian import (bump_hamiltonian, rel_hamiltonian, shear_hamiltonian,
                          wobble_hamiltonian)
from .isotopy import (IdentityReport, hamiltonian_path, r_functional, r_is_homomorphism,
                      rotation_path, s_functional, s_is_homomorphism, twist_path,
                      verify_lemma_sigma_S, verify_lemma_tau_R, verify_thm_main1,
                      verify_thm_main2, verify_thm_mod1)
from .quasimorphism import (MeanDisplacementBase, SigmaBase, TauBase, calabi, coboundary,
                            flux, hom_difference, homogenize, random_lift_sample,
                            random_sample, sigma, tau)

#: allowed additivity defect of the mean displacement on lifts (4 pi / (2 pi) integrated)
F_DEFECT_BOUND = 2.0
HOM_TOL = 2e-6
SURJ_TOL = 1e-5
NONVACUOUS = 1e-3
QUAD_DOUBLING_TOL = 1e-8
COBOUNDARY_RK4_STEPS = 128


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by ``compute``, ``verify`` and ``sweep``.

    ``quad`` is the base rule.  Homogenized Hamiltonian flows run on ``hquad``
    (half the base resolution) with ``homog_steps`` RK4 steps.  The
    additivity pairs of ``theorem3`` and the flow map of ``mod1`` use
    ``short_quad`` (a quarter); they and the flow map of ``independence``
    stop at ``n = 2^k_max_short``.  See the README for why.
    """

    quad: Quadrature = Quadrature()
    k_max: int = 10
    k_max_short: int = 8
    rk4_steps: int = 256
    homog_steps: int = 32
    t_steps: int = 32
    n_rot: int = 1024
    seed: int = 0
    workers: int = 1
    fmt: str = "jsonl"

    def __post_init__(self):
        for name in ("k_max", "k_max_short", "rk4_steps", "homog_steps", "t_steps", "n_rot", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.fmt not in ("jsonl", "csv", "text"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.quad.workers != self.workers:
            object.__setattr__(self, "quad", replace(self.quad, workers=self.workers))

    @property
    def hquad(self) -> Quadrature:
        # iterated flows wind the path many times, so the path rule gets finer
        q = self.quad
        return Quadrature(max(8, q.n_r // 2), max(16, q.n_theta // 2), 4 * q.n_path, self.workers)

    @property
    def short_quad(self) -> Quadrature:
        q = self.quad
        return Quadrature(max(8, q.n_r // 4), max(16, q.n_theta // 4), max(16, q.n_path // 4),
                          self.workers)


# -- batteries ---------------------------------------------------------------------

def symmetric_battery():
    return [rotation_path(0.9), rotation_path(-2.5), twist_path(1.3, "r2"),
            twist_path(-0.7, "bump"), twist_path(0.8, "r4")]


def flow_battery(steps: int):
    """Hamiltonian paths: non-symmetric ones (one moving the origin, one with a
    non-rigid boundary map), a symmetric bump and a boundary-fixing one."""
    return [hamiltonian_path(wobble_hamiltonian(), steps),
            hamiltonian_path(wobble_hamiltonian(drift=0.3), steps),
            hamiltonian_path(shear_hamiltonian(), steps),
            hamiltonian_path(bump_hamiltonian(), steps),
            hamiltonian_path(rel_hamiltonian(), steps)]


# -- suites ----------------------------------------------------------------------------

def suite_lemmas(cfg: RunConfig) -> list[IdentityReport]:
    out = []
    isos = [rotation_path(0.0)] + symmetric_battery() + flow_battery(cfg.rk4_steps)
    for iso in isos:
        out.append(verify_lemma_tau_R(iso, cfg.quad, cfg.t_steps))
        if iso.fixes_origin:
            out.append(verify_lemma_sigma_S(iso, cfg.quad, cfg.t_steps))
    # Cal(h_1) = -2R on boundary-fixing paths
    for iso in isos:
        if iso.endpoint.boundary_identity:
            c = calabi(iso.endpoint, cfg.quad)
            r = r_functional(iso, cfg.quad, cfg.t_steps)
            out.append(IdentityReport("calabi_minus_2R", iso.label, c, -2 * r, HOM_TOL,
                                      {"Cal": c, "R": r}))
    a, b = rotation_path(0.9), rotation_path(-0.4)
    s, t = twist_path(1.1, "bump"), twist_path(-0.6, "bump")
    w = hamiltonian_path(wobble_hamiltonian(), cfg.rk4_steps)
    for x, y in ((a, b), (s, t), (rotation_path(0.0), s)):
        out.append(r_is_homomorphism(x, y, cfg.quad, cfg.t_steps))
    for x, y in ((a, b), (s, t), (rotation_path(0.0), w), (a, w)):
        out.append(s_is_homomorphism(x, y, cfg.t_steps))
    return out


def suite_theorem1(cfg: RunConfig) -> list[IdentityReport]:
    out = [verify_thm_main1(iso, cfg.k_max, cfg.quad, cfg.n_rot, cfg.t_steps)
           for iso in symmetric_battery()]
    for iso in flow_battery(cfg.homog_steps)[:4]:
        out.append(verify_thm_main1(iso, cfg.k_max, cfg.hquad, cfg.n_rot, cfg.t_steps))
    return out


def suite_theorem2(cfg: RunConfig) -> list[IdentityReport]:
    out = [verify_thm_main2(iso, cfg.k_max, cfg.quad, cfg.n_rot, cfg.t_steps)
           for iso in symmetric_battery()]
    for iso in flow_battery(cfg.homog_steps):
        if iso.fixes_origin:
            out.append(verify_thm_main2(iso, cfg.k_max, cfg.hquad, cfg.n_rot, cfg.t_steps))
    return out


def suite_mod1(cfg: RunConfig) -> list[IdentityReport]:
    out = [verify_thm_mod1(rotation_path(a), cfg.k_max, cfg.quad, cfg.n_rot, cfg.t_steps, loop=True)
           for a in (0.0, TWO_PI, 2 * TWO_PI, -TWO_PI)]
    for iso in symmetric_battery()[:3]:
        out.append(verify_thm_mod1(iso, cfg.k_max, cfg.quad, cfg.n_rot, cfg.t_steps, loop=False))
    w = hamiltonian_path(wobble_hamiltonian(), cfg.homog_steps)
    out.append(verify_thm_mod1(w, cfg.k_max_short, cfg.short_quad, cfg.n_rot, cfg.t_steps, loop=False))
    return out


def additivity_checks(cfg: RunConfig, n_pairs: int = 20) -> list[IdentityReport]:
    """``tau_bar - pi sigma_bar`` is additive on seeded pairs fixing the origin."""
    sample = random_sample("origin", n_pairs, cfg.seed, length=2, flow_steps=cfg.homog_steps)
    q, k = cfg.short_quad, cfg.k_max_short
    out = []
    for idx, (i, j) in enumerate(sample.pairs):
        g, h = sample.elements[i], sample.elements[j]
        a = hom_difference(g, k, q)
        b = hom_difference(h, k, q)
        ab = hom_difference(geo.compose(g, h), k, q)
        out.append(IdentityReport("hom_additivity", f"pair{idx}(seed={cfg.seed})", ab.value,
                                  a.value + b.value, ab.error_bound + a.error_bound + b.error_bound,
                                  {"phi(gh)": ab.value, "phi(g)": a.value, "phi(h)": b.value,
                                   "bound(gh)": ab.error_bound, "bound(g)": a.error_bound,
                                   "bound(h)": b.error_bound}))
    return out


def surjectivity_checks(cfg: RunConfig) -> list[IdentityReport]:
    out = []
    for s in (1.0, -2.0):
        e = hom_difference(geo.twist(s, "bump"), cfg.k_max, cfg.quad)
        out.append(IdentityReport("hom_twist_bump", f"twist({s:g},bump)", e.value, s * np.pi / 12,
                                  SURJ_TOL, {"tau_bar": e.meta["tau_bar"],
                                             "sigma_bar": e.meta["sigma_bar"],
                                             "homogenization": e.error_bound}))
    # -2R - pi S on a twist in r^2 gives -s pi / 12
    e = hom_difference(geo.twist(1.5, "r2"), cfg.k_max, cfg.quad)
    out.append(IdentityReport("hom_twist_r2", "twist(1.5,r2)", e.value, -1.5 * np.pi / 12, SURJ_TOL,
                              {"homogenization": e.error_bound}))
    e = hom_difference(geo.rotation(0.9), cfg.k_max, cfg.quad)
    out.append(IdentityReport("hom_rotation", "rotation(0.9)", e.value, 0.0, SURJ_TOL,
                              {"homogenization": e.error_bound}))
    return out


def suite_theorem3(cfg: RunConfig) -> list[IdentityReport]:
    return surjectivity_checks(cfg) + additivity_checks(cfg)


def shear_pairs(cfg: RunConfig, steps: int):
    """Pairs whose boundary maps are far from rigid, so coboundaries are not tiny."""
    g = geo.flow(shear_hamiltonian(0.4, 0.4), steps)
    h = geo.flow(shear_hamiltonian(-0.7, -0.45, omega=3.0), steps)
    return [(g, h), (g, geo.compose(geo.rotation(1.0), h))]


def suite_defects(cfg: RunConfig) -> list[IdentityReport]:
    out = []
    lifts = random_lift_sample(50, cfg.seed)
    md = MeanDisplacementBase(cfg.quad.n_theta)
    worst_f = worst_rot = 0.0
    for i, j in lifts.pairs:
        worst_f = max(worst_f, abs(coboundary(md, lifts.elements[i], lifts.elements[j])))
        a, b = lifts.elements[i], lifts.elements[j]
        rab = translation_number(a.compose(b), cfg.n_rot).value
        ra = translation_number(a, cfg.n_rot).value
        rb = translation_number(b, cfg.n_rot).value
        worst_rot = max(worst_rot, abs(rab - ra - rb))
    out.append(IdentityReport("f_defect", f"50 lift pairs (seed={cfg.seed})", worst_f, 0.0,
                              F_DEFECT_BOUND, {"max": worst_f}))
    disk = random_sample("origin", 10, cfg.seed + 2, length=2, flow_steps=cfg.homog_steps)
    pairs = [(disk.elements[i], disk.elements[j]) for i, j in disk.pairs]
    pairs += shear_pairs(cfg, cfg.homog_steps)
    worst_disk = 0.0
    for idx, (g, h) in enumerate(pairs):
        # the defect does not depend on the chosen branches
        lg = boundary_lift(g, idx % 3 - 1)
        lh = boundary_lift(h, (idx + 1) % 3 - 1)
        worst_disk = max(worst_disk, abs(coboundary(md, lg, lh)))
    out.append(IdentityReport("f_defect", f"{len(pairs)} boundary-lift pairs", worst_disk,
                              0.0, F_DEFECT_BOUND, {"max": worst_disk}))

    rel = random_sample("rel", 5, cfg.seed, length=2, flow_steps=cfg.homog_steps)
    tb = TauBase(LAMBDA, cfg.quad)
    sb = SigmaBase(LAMBDA, RADIAL, cfg.quad)
    for idx, (i, j) in enumerate(rel.pairs):
        g, h = rel.elements[i], rel.elements[j]
        d = coboundary(tb, g, h)
        out.append(IdentityReport("calabi_defect", f"rel pair{idx}", d, 0.0, HOM_TOL, {"delta": d}))
        d = coboundary(sb, g, h)
        out.append(IdentityReport("flux_defect", f"rel pair{idx}", d, 0.0, HOM_TOL, {"delta": d}))

    # delta tau depends only on the boundary restrictions; the identity holds
    # for exactly symplectic maps, so these words use finer RK4 and quadrature
    steps = COBOUNDARY_RK4_STEPS
    ks = random_sample("rel", 3, cfg.seed + 3, length=2, flow_steps=steps).elements
    orig = random_sample("origin", 1, cfg.seed + 1, length=2, flow_steps=steps).elements
    pairs = shear_pairs(cfg, steps) + [(orig[0], orig[1])]
    tb = TauBase(LAMBDA, cfg.quad.doubled())
    for idx, (g, h) in enumerate(pairs):
        k1, k2 = ks[2 * idx], ks[2 * idx + 1]
        d0 = coboundary(tb, g, h)
        d1 = coboundary(tb, geo.compose(g, k1), geo.compose(k2, h))
        out.append(IdentityReport("coboundary_boundary_dependence", f"pair{idx}", d0, d1, HOM_TOL,
                                  {"delta(g,h)": d0, "delta(gk,kh)": d1}))
    return out


def suite_independence(cfg: RunConfig) -> list[IdentityReport]:
    out = []
    eta_f = lambda_plus_dF("xy", 0.5)
    maps = [(geo.rotation(0.9), cfg.quad, cfg.k_max), (geo.twist(1.3, "r2"), cfg.quad, cfg.k_max),
            (geo.flow(wobble_hamiltonian(), cfg.homog_steps), cfg.hquad, cfg.k_max_short)]
    raw_gap = 0.0
    for g, q, k in maps:
        a = homogenize(TauBase(LAMBDA, q), g, k)
        b = homogenize(TauBase(eta_f, q), g, k)
        raw = abs(tau(eta_f, g, q) - tau(LAMBDA, g, q))
        raw_gap = max(raw_gap, raw)
        out.append(IdentityReport("tau_bar_eta_independence", g.label or "flow", b.value, a.value,
                                  a.error_bound + b.error_bound,
                                  {"tau_bar_lambda": a.value, "tau_bar_F": b.value, "raw_gap": raw}))
    out.append(IdentityReport("tau_raw_gap_nonvacuous", "battery", raw_gap, 0.0, NONVACUOUS,
                              {"max_raw_gap": raw_gap}, relation="gt"))
    choices = [(LAMBDA, RADIAL), (LAMBDA, SPIRAL), (lambda_plus_dF("x2", 0.5), RADIAL),
               (lambda_plus_dF("x2", 0.5), SPIRAL)]
    for g, q, k in maps:
        ests = [homogenize(SigmaBase(eta, path, q), g, k) for eta, path in choices]
        ref = ests[0]
        for (eta, path), e in zip(choices[1:], ests[1:]):
            out.append(IdentityReport("sigma_bar_independence",
                                      f"{g.label or 'flow'} {eta.label}/{path.kind}", e.value,
                                      ref.value, e.error_bound + ref.error_bound,
                                      {"ref": ref.value, "alt": e.value}))
    for g in (geo.twist(0.9, "bump"), geo.twist(-1.4, "bump3")):
        a = tau(LAMBDA, g, cfg.quad)
        b = tau(eta_f, g, cfg.quad)
        out.append(IdentityReport("calabi_eta_independence", g.label, b, a, HOM_TOL, {"Cal": a}))
        a = sigma(LAMBDA, RADIAL, g, cfg.quad)
        b = sigma(lambda_plus_dF("x2", 0.5), SPIRAL, g, cfg.quad)
        out.append(IdentityReport("flux_path_independence", g.label, b, a, HOM_TOL, {"Flux": a}))
    return out


# -- numerics hygiene ----------------------------------------------------------------

def rk4_ratios(h, steps=(32, 64, 128, 256), ref_steps: int = 2048, samples: int = 64, seed: int = 0):
    """Endpoint errors at each step count and their successive ratios."""
    rng = np.random.default_rng(seed)
    r = 0.95 * np.sqrt(rng.uniform(size=samples))
    th = rng.uniform(0, TWO_PI, samples)
    p = np.stack([r * np.cos(th), r * np.sin(th)], -1)
    ref, _ = geo.flow(h, ref_steps).apply(p)
    errs = [float(np.max(np.abs(geo.flow(h, n).apply(p)[0] - ref))) for n in steps]
    return errs, [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]


def oracle_values(q: Quadrature, t_steps: int) -> dict[str, float]:
    """Every closed-form oracle quantity, computed numerically on ``q``."""
    rot, tr2, tb = rotation_path(0.9), twist_path(1.3, "r2"), twist_path(-0.7, "bump")
    return {
        "tau(rotation)": tau(LAMBDA, rot.endpoint, q),
        "tau(twist r2)": tau(LAMBDA, tr2.endpoint, q),
        "tau(twist bump)": tau(LAMBDA, tb.endpoint, q),
        "sigma(twist r2)": sigma(LAMBDA, RADIAL, tr2.endpoint, q),
        "flux(twist bump)": flux(tb.endpoint, RADIAL, q),
        "R(rotation)": r_functional(rot, q, t_steps),
        "R(twist r2)": r_functional(tr2, q, t_steps),
        "S(rotation)": s_functional(rot, RADIAL, q, t_steps),
        "S(twist r2)": s_functional(tr2, RADIAL, q, t_steps),
        "f(twist r2)": mean_displacement(tr2.lift, q.n_theta),
    }


def suite_numerics(cfg: RunConfig) -> list[IdentityReport]:
    out = []
    for h in (wobble_hamiltonian(), wobble_hamiltonian(drift=0.3), shear_hamiltonian(),
              bump_hamiltonian()):
        errs, ratios = rk4_ratios(h)
        for n, ratio, err in zip((32, 64, 128), ratios, errs):
            # pass iff 12 <= ratio <= 20: residual is the distance from 16, bound 4
            out.append(IdentityReport("rk4_order_ratio", f"{h.label} {n}->{2 * n}", ratio, 16.0, 4.0,
                                      {"ratio": ratio, "err": err}))
    base = oracle_values(cfg.quad, cfg.t_steps)
    fine = oracle_values(cfg.quad.doubled(), 2 * cfg.t_steps)
    for k in base:
        out.append(IdentityReport("quadrature_doubling", k, fine[k], base[k], QUAD_DOUBLING_TOL,
                                  {"value": base[k]}))
    return out


SUITES: dict[str, Callable[[RunConfig], list[IdentityReport]]] = {
    "lemmas": suite_lemmas,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "mod1": suite_mod1,
    "theorem3": suite_theorem3,
    "defects": suite_defects,
    "independence": suite_independence,
    "numerics": suite_numerics,
}


def run_suite(name: str, cfg: RunConfig) -> list[IdentityReport]:
    if name == "all":
        return [r for key in SUITES for r in SUITES[key](cfg)]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg)

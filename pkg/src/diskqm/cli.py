"""``diskqm`` command line: compute, verify, sweep.

Exit codes: 0 success, 1 failing check or numerical error, 2 spec/usage
error, 3 precondition violation.
"""
from __future__ import annotations

import argparse
import copy
import csv
import inspect
import io
import json
import logging
import sys
import time

import numpy as np

from . import __version__, specfile
from . import geometry as geo
from .circle import boundary_lift, translation_number
from .errors import DiskQmError, DomainError, LiftError, PreconditionError, SpecError
from .forms import Quadrature, form_from_label, path_from_label
from .hamiltonian import BUILTIN_HAMILTONIANS
from .isotopy import Isotopy, r_functional, s_functional
from .quasimorphism import (SigmaBase, TauBase, calabi, flux, hom_difference, homogenize,
                            sigma, tau)
from .verify import SUITES, RunConfig, run_suite

log = logging.getLogger("diskqm")

INVARIANTS = ("tau", "sigma", "calabi", "flux", "rot", "tau_bar", "sigma_bar", "R", "S",
              "hom_difference")
#: invariants whose value is exact up to quadrature; their bound is a doubling estimate
QUADRATURE_ONLY = ("tau", "sigma", "calabi", "flux", "R", "S")

EXIT_OK, EXIT_FAIL, EXIT_SPEC, EXIT_PRECONDITION = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("numerics")
    g.add_argument("--quad-nr", type=int, default=64, help="radial Gauss nodes (default 64)")
    g.add_argument("--quad-ntheta", type=int, default=128, help="angular nodes (default 128)")
    g.add_argument("--quad-npath", type=int, default=64, help="path/time panels (default 64)")
    g.add_argument("--kmax", type=int, default=10, help="homogenize at n = 2^kmax (default 10)")
    g.add_argument("--rk4-steps", type=int, default=256, help="RK4 steps for flows (default 256)")
    g.add_argument("--t-steps", type=int, default=32, help="time panels for R and S (default 32)")
    g.add_argument("--n-rot", type=int, default=1024, help="iterations for translation numbers")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--format", choices=("jsonl", "csv"), default=None)
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="diskqm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"diskqm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="one invariant of a spec file")
    c.add_argument("invariant", choices=INVARIANTS)
    c.add_argument("spec", help="JSON map or isotopy spec")
    _add_choice_flags(c)

    v = sub.add_parser("verify", parents=[common], help="run a named suite")
    v.add_argument("suite", choices=sorted(SUITES) + ["all"])

    s = sub.add_parser("sweep", parents=[common], help="invariant over a parameter range")
    s.add_argument("invariant", choices=INVARIANTS)
    s.add_argument("spec")
    s.add_argument("--param", required=True, help="parameter name, e.g. s, alpha, eps")
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--step", type=float, required=True)
    s.add_argument("--letter", type=int, default=0, help="letter index in a map spec")
    _add_choice_flags(s)
    return p


def _add_choice_flags(p):
    p.add_argument("--form", default="lambda", help="lambda, xy or x2 (lambda + d(c xy) etc.)")
    p.add_argument("--form-c", type=float, default=0.5)
    p.add_argument("--form-coeffs", default=None,
                   help='custom F as JSON [[i, j, c], ...]; eta = lambda + dF')
    p.add_argument("--path", default="radial", help="radial, radial@<angle> or spiral")
    p.add_argument("--branch", type=int, default=0, help="lift branch for rot on maps")


def config_from_args(args) -> RunConfig:
    try:
        q = Quadrature(args.quad_nr, args.quad_ntheta, args.quad_npath, args.workers)
        return RunConfig(quad=q, k_max=args.kmax, k_max_short=min(8, args.kmax), rk4_steps=args.rk4_steps, t_steps=args.t_steps,
                         n_rot=args.n_rot, seed=args.seed, workers=args.workers,
                         fmt=args.format or "jsonl")
    except ValueError as exc:
        raise SpecError(f"bad configuration: {exc}") from None


# -- compute ---------------------------------------------------------------------

def _form(args):
    coeffs = None
    if args.form_coeffs:
        try:
            coeffs = json.loads(args.form_coeffs)
        except json.JSONDecodeError:
            raise SpecError(f"--form-coeffs is not JSON: {args.form_coeffs!r}") from None
    return form_from_label(args.form, args.form_c, coeffs)


def _endpoint(obj) -> geo.MapWord:
    return obj.endpoint if isinstance(obj, Isotopy) else obj


def _evaluate(invariant: str, obj, args, cfg: RunConfig, q: Quadrature, t_steps: int):
    """(value, error_bound or None, meta)."""
    g = _endpoint(obj)
    if invariant == "tau":
        return tau(_form(args), g, q), None, {}
    if invariant == "sigma":
        return sigma(_form(args), path_from_label(args.path), g, q), None, {}
    if invariant == "calabi":
        return calabi(g, q), None, {}
    if invariant == "flux":
        return flux(g, path_from_label(args.path), q), None, {}
    if invariant in ("R", "S"):
        if not isinstance(obj, Isotopy):
            raise SpecError(f"{invariant} is a path functional: give an isotopy spec")
        if invariant == "R":
            return r_functional(obj, q, t_steps), None, {}
        return s_functional(obj, path_from_label(args.path), q, t_steps), None, {}
    if invariant == "rot":
        lift = obj.lift if isinstance(obj, Isotopy) else boundary_lift(g, args.branch)
        e = translation_number(lift, cfg.n_rot)
        return e.value, e.error_bound, e.meta
    if invariant == "tau_bar":
        e = homogenize(TauBase(_form(args), q), g, cfg.k_max)
    elif invariant == "sigma_bar":
        e = homogenize(SigmaBase(_form(args), path_from_label(args.path), q), g, cfg.k_max)
    elif invariant == "hom_difference":
        e = hom_difference(g, cfg.k_max, q, path_from_label(args.path))
    else:  # pragma: no cover - argparse restricts the choices
        raise SpecError(f"unknown invariant {invariant!r}")
    meta = {k: v for k, v in e.meta.items() if k != "sequence"}
    return e.value, e.error_bound, meta


def compute_record(invariant: str, rec, args, cfg: RunConfig) -> dict:
    obj = specfile.parse_record(rec, cfg.rk4_steps)
    t_steps = specfile.t_steps_of(rec, cfg.t_steps)
    value, bound, meta = _evaluate(invariant, obj, args, cfg, cfg.quad, t_steps)
    if invariant in QUADRATURE_ONLY:
        fine, _, _ = _evaluate(invariant, obj, args, cfg, cfg.quad.doubled(), 2 * t_steps)
        bound = abs(fine - value)
        meta = {"error_kind": "quadrature doubling", "refined_value": fine}
    inputs = {"quad": [cfg.quad.n_r, cfg.quad.n_theta, cfg.quad.n_path], "k_max": cfg.k_max,
              "rk4_steps": cfg.rk4_steps, "t_steps": t_steps, "n_rot": cfg.n_rot}
    if invariant in ("tau", "sigma", "tau_bar", "sigma_bar"):
        inputs["form"] = _form(args).label
    if invariant in ("sigma", "flux", "S", "sigma_bar", "hom_difference"):
        inputs["path"] = args.path
    if invariant == "rot" and not isinstance(obj, Isotopy):
        inputs["branch"] = args.branch
    return {"invariant": invariant, "subject": getattr(obj, "label", ""), "inputs": inputs,
            "value": float(value), "error_bound": float(bound), "meta": _plain(meta)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def cmd_compute(args, cfg: RunConfig, out) -> int:
    rec = specfile.load_record(args.spec)
    result = compute_record(args.invariant, rec, args, cfg)
    result["inputs"]["spec"] = args.spec
    if (args.format or "jsonl") == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["invariant", "spec", "value", "error_bound"])
        w.writerow([result["invariant"], args.spec, repr(result["value"]), repr(result["error_bound"])])
    else:
        out.write(json.dumps(result) + "\n")
    return EXIT_OK


# -- verify ------------------------------------------------------------------------

def cmd_verify(args, cfg: RunConfig, out) -> int:
    t0 = time.perf_counter()
    reports = run_suite(args.suite, cfg)
    log.info("suite %s: %d checks in %.1fs", args.suite, len(reports), time.perf_counter() - t0)
    if args.format == "jsonl":
        for r in reports:
            out.write(json.dumps(_plain(r.to_record())) + "\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["check", "subject", "residual", "bound", "passed"])
        for r in reports:
            w.writerow([r.name, r.subject, repr(r.residual), repr(r.bound), r.passed])
    else:
        for r in reports:
            out.write(r.line() + "\n")
        n_fail = sum(not r.passed for r in reports)
        out.write(f"{args.suite}: {len(reports) - n_fail}/{len(reports)} checks passed\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# -- sweep --------------------------------------------------------------------------

def sweep_values(start: float, stop: float, step: float) -> np.ndarray:
    if step == 0 or (stop - start) / step < -1e-12:
        raise SpecError("sweep range is empty: check --start, --stop and --step signs")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _param_slot(rec, param: str, letter: int):
    """The dict that holds ``param`` for this spec (a letter, isotopy or H args)."""
    if specfile.is_isotopy_record(rec):
        target = rec.get("isotopy", rec)
    else:
        inner = rec.get("map", rec) if isinstance(rec, dict) else rec
        letters = inner.get("letters") if isinstance(inner, dict) else inner
        if not isinstance(letters, list) or not -len(letters) <= letter < len(letters):
            raise SpecError(f"map spec has no letter {letter}")
        target = letters[letter]
    kind = target.get("kind")
    own = {"rotation": ("alpha",), "twist": ("s",), "flow": ("steps",), "hamiltonian": ("steps",)}
    if param in own.get(kind, ()):
        return target
    ham = target.get("hamiltonian")
    if isinstance(ham, str):
        ham = target["hamiltonian"] = {"builtin": ham}
    if isinstance(ham, dict) and "builtin" in ham:
        names = inspect.signature(BUILTIN_HAMILTONIANS[ham["builtin"]]).parameters
        if param in names:
            return ham.setdefault("args", {})
    raise SpecError(f"parameter {param!r} does not belong to spec kind {kind!r}")


def cmd_sweep(args, cfg: RunConfig, out) -> int:
    base = specfile.load_record(args.spec)
    _param_slot(copy.deepcopy(base), args.param, args.letter)
    rows = []
    for v in sweep_values(args.start, args.stop, args.step):
        rec = copy.deepcopy(base)
        slot = _param_slot(rec, args.param, args.letter)
        slot[args.param] = int(round(v)) if args.param == "steps" else float(v)
        r = compute_record(args.invariant, rec, args, cfg)
        rows.append((float(v), r["value"], r["error_bound"]))
    if args.format == "jsonl":
        for p, val, b in rows:
            out.write(json.dumps({"param": p, "value": val, "error_bound": b}) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([args.param, "value", "error_bound"])
        for p, val, b in rows:
            w.writerow([repr(p), repr(val), repr(b)])
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg, out)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (PreconditionError, DomainError, LiftError) as exc:
        print(f"precondition violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DiskQmError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_FAIL


def run(argv) -> tuple[int, str]:
    """In-process invocation returning (exit code, stdout text)."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())

"""JSON map-spec and isotopy-spec records.

Map spec::

    {"letters": [
        {"kind": "rotation", "alpha": 1.0},
        {"kind": "twist", "s": 1.0, "profile": "r2", "inverted": true},
        {"kind": "flow", "hamiltonian": {"builtin": "wobble", "args": {"eps": 0.1}},
         "steps": 256}
    ]}

A bare list of letters is accepted too.  Letters compose like a word: the
last letter acts first.

Isotopy spec::

    {"kind": "rotation", "alpha": 1.0}
    {"kind": "twist", "s": 1.0, "profile": "bump"}
    {"kind": "hamiltonian", "hamiltonian": {...}, "steps": 256, "t_steps": 32}

A file may hold either record directly or under ``"map"`` / ``"isotopy"``.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from . import geometry as geo
from .errors import SpecError
from .hamiltonian import BUILTIN_HAMILTONIANS, PolyHamiltonian
from .isotopy import Isotopy, hamiltonian_path, rotation_path, twist_path


def _num(rec: dict, key: str, default=None) -> float:
    if key not in rec:
        if default is None:
            raise SpecError(f"{rec.get('kind', 'record')}: missing parameter {key!r}")
        return default
    try:
        return float(rec[key])
    except (TypeError, ValueError):
        raise SpecError(f"parameter {key!r} must be a number, got {rec[key]!r}") from None


def parse_hamiltonian(rec) -> PolyHamiltonian:
    if isinstance(rec, str):
        rec = {"builtin": rec}
    if not isinstance(rec, dict):
        raise SpecError(f"hamiltonian must be an object or builtin name, got {rec!r}")
    if "builtin" in rec:
        name = rec["builtin"]
        if name not in BUILTIN_HAMILTONIANS:
            raise SpecError(f"unknown builtin hamiltonian {name!r}; known: {sorted(BUILTIN_HAMILTONIANS)}")
        try:
            return BUILTIN_HAMILTONIANS[name](**rec.get("args", {}))
        except TypeError as exc:
            raise SpecError(f"bad arguments for {name!r}: {exc}") from None
    return PolyHamiltonian.from_record(rec)


def parse_letter(rec: dict, default_steps: int = 256) -> geo.Generator:
    if not isinstance(rec, dict) or "kind" not in rec:
        raise SpecError(f"letter needs a 'kind', got {rec!r}")
    kind = rec["kind"]
    if kind == "rotation":
        g = geo.RigidRotation(_num(rec, "alpha"))
    elif kind == "twist":
        g = geo.Twist(_num(rec, "s"), geo.profile(rec.get("profile", "r2")))
    elif kind == "flow":
        h = parse_hamiltonian(rec.get("hamiltonian"))
        steps = int(_num(rec, "steps", default_steps))
        fo = rec.get("fixes_origin")
        bi = rec.get("boundary_identity")
        try:
            w = geo.flow(h, steps, fixes_origin=fo, boundary_identity=bi)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        g = w.letters[0]
    else:
        raise SpecError(f"unknown letter kind {kind!r}; use rotation, twist or flow")
    return g.inverse() if rec.get("inverted", False) else g


def parse_map(rec, default_steps: int = 256) -> geo.MapWord:
    if isinstance(rec, dict) and "map" in rec:
        rec = rec["map"]
    letters = rec.get("letters") if isinstance(rec, dict) else rec
    if not isinstance(letters, list):
        raise SpecError("map spec needs a 'letters' list")
    label = rec.get("label", "") if isinstance(rec, dict) else ""
    parsed = [parse_letter(l, default_steps) for l in letters]
    return geo.MapWord.of(*parsed, label=label or "*".join(_letter_label(l) for l in letters))


def _letter_label(rec: dict) -> str:
    inv = "^-1" if rec.get("inverted") else ""
    kind = rec["kind"]
    if kind == "rotation":
        return f"rotation({rec['alpha']:g}){inv}"
    if kind == "twist":
        return f"twist({rec['s']:g},{rec.get('profile', 'r2')}){inv}"
    h = rec.get("hamiltonian")
    name = h if isinstance(h, str) else (h.get("builtin") or h.get("label") or "H")
    return f"flow({name}){inv}"


def parse_isotopy(rec, default_steps: int = 256) -> Isotopy:
    if isinstance(rec, dict) and "isotopy" in rec:
        rec = rec["isotopy"]
    if not isinstance(rec, dict) or "kind" not in rec:
        raise SpecError("isotopy spec needs a 'kind'")
    kind = rec["kind"]
    if kind == "rotation":
        return rotation_path(_num(rec, "alpha"))
    if kind == "twist":
        return twist_path(_num(rec, "s"), rec.get("profile", "r2"))
    if kind == "hamiltonian":
        steps = int(_num(rec, "steps", default_steps))
        try:
            return hamiltonian_path(parse_hamiltonian(rec.get("hamiltonian")), steps)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    raise SpecError(f"unknown isotopy kind {kind!r}; use rotation, twist or hamiltonian")


def is_isotopy_record(rec) -> bool:
    if isinstance(rec, dict) and "isotopy" in rec:
        return True
    return isinstance(rec, dict) and rec.get("kind") in ("rotation", "twist", "hamiltonian") \
        and "letters" not in rec


def load_record(path: Union[str, Path]):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load(path, default_steps: int = 256) -> Union[geo.MapWord, Isotopy]:
    rec = load_record(path)
    return parse_record(rec, default_steps)


def parse_record(rec, default_steps: int = 256):
    if is_isotopy_record(rec):
        return parse_isotopy(rec, default_steps)
    return parse_map(rec, default_steps)


def t_steps_of(rec, default: int) -> int:
    if isinstance(rec, dict):
        inner = rec.get("isotopy", rec)
        if isinstance(inner, dict) and "t_steps" in inner:
            return int(inner["t_steps"])
    return default

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import disk_points
from diskqm import geometry as geo
from diskqm.errors import BoundaryConstancyError, DomainError, SpecError
from diskqm.hamiltonian import (PolyHamiltonian, Term, TimeFactor, bump_hamiltonian,
                                rel_hamiltonian, rotation_hamiltonian, shear_hamiltonian,
                                wobble_hamiltonian)

angles = st.floats(-10, 10, allow_nan=False)
strengths = st.floats(-3, 3, allow_nan=False)
profiles = st.sampled_from(sorted(geo.PROFILES))


def fd_jacobian(g, p, h=1e-6):
    cols = []
    for e in (np.array([h, 0.0]), np.array([0.0, h])):
        cols.append((geo.eval_map(g, p + e) - geo.eval_map(g, p - e)) / (2 * h))
    return np.stack(cols, -1)


def test_rotation_closed_form():
    p = np.array([[0.5, 0.0], [0.0, -0.25]])
    out = geo.rotation(np.pi / 2)(p)
    assert np.allclose(out, [[0.0, 0.5], [0.25, 0.0]], atol=1e-15)


def test_twist_moves_angle_by_s_f():
    p = np.array([[0.6, 0.0]])
    out = geo.twist(2.0, "r2")(p)[0]
    assert np.hypot(*out) == pytest.approx(0.6, abs=1e-15)
    assert np.arctan2(out[1], out[0]) == pytest.approx(2.0 * 0.36, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(s=strengths, prof=profiles, seed=st.integers(0, 1000))
def test_twist_jacobian_matches_finite_differences(s, prof, seed):
    rng = np.random.default_rng(seed)
    p = disk_points(rng, 8, 0.95)
    g = geo.twist(s, prof)
    assert np.allclose(geo.jacobian(g, p), fd_jacobian(g, p), atol=2e-7)


@settings(max_examples=30, deadline=None)
@given(a=angles, s=strengths, prof=profiles)
def test_closed_form_letters_are_symplectic(a, s, prof):
    rep = geo.validate(geo.compose(geo.rotation(a), geo.twist(s, prof)), samples=64)
    assert rep.max_det_residual <= geo.EPS_SYMP_CLOSED
    assert rep.max_boundary_escape <= 1e-12
    assert rep.ok


@settings(max_examples=25, deadline=None)
@given(a=angles, s=strengths, t=strengths, prof=profiles, seed=st.integers(0, 100))
def test_group_laws_on_closed_forms(a, s, t, prof, seed):
    rng = np.random.default_rng(seed)
    p = disk_points(rng, 16)
    f, g, h = geo.rotation(a), geo.twist(s, prof), geo.twist(t, "bump")
    left = geo.compose(geo.compose(f, g), h)(p)
    right = geo.compose(f, geo.compose(g, h))(p)
    assert np.allclose(left, right, atol=1e-13)
    w = geo.compose(f, geo.compose(g, h))
    assert np.allclose(geo.compose(w, geo.inverse(w))(p), p, atol=1e-12)
    assert np.allclose(geo.power(g, 3)(p), g(g(g(p))), atol=1e-13)
    assert np.allclose(geo.power(g, -2)(geo.power(g, 2)(p)), p, atol=1e-12)


def test_chain_rule_for_words(rng):
    p = disk_points(rng, 10, 0.9)
    w = geo.rotation(0.3) @ geo.twist(1.1, "bump") @ geo.flow(wobble_hamiltonian(), 64)
    assert np.allclose(geo.jacobian(w, p), fd_jacobian(w, p), atol=1e-6)


def test_outside_disk_is_rejected():
    with pytest.raises(DomainError):
        geo.eval_map(geo.rotation(1.0), [[0.8, 0.8]])
    geo.eval_map(geo.rotation(1.0), [[1.0, 0.0]])  # the boundary itself is fine


def test_flags_are_tristate():
    assert geo.twist(1.0, "bump").boundary_identity is True
    assert geo.twist(1.0, "r2").boundary_identity is False
    w = geo.compose(geo.twist(1.0, "bump"), geo.twist(1.0, "r2"))
    assert w.boundary_identity is None  # unknown, not asserted false
    assert w.fixes_origin is True
    assert geo.rotation(2 * np.pi).boundary_identity is True


def test_zero_hamiltonian_gives_identity(rng):
    zero = PolyHamiltonian((Term(TimeFactor(), ((0, 0, 0.0),)),), "zero")
    p = disk_points(rng, 20)
    assert np.array_equal(geo.flow(zero, 32)(p), p)


@pytest.mark.parametrize("alpha", [0.7, -2.0, 3.0])
def test_rotation_hamiltonian_flow_equals_rotation(alpha, rng):
    p = disk_points(rng, 50)
    a = geo.flow(rotation_hamiltonian(alpha), 256)(p)
    b = geo.rotation(alpha)(p)
    assert np.max(np.abs(a - b)) <= 1e-8


def test_flow_det_residual_and_fourth_order_decay():
    rep = geo.validate(geo.flow(bump_hamiltonian(), 200))
    assert rep.max_det_residual <= 1e-6
    assert rep.ok
    dets = [geo.validate(geo.flow(wobble_hamiltonian(), n)).max_det_residual for n in (16, 32, 64)]
    for coarse, fine in zip(dets, dets[1:]):
        assert 12 <= coarse / fine <= 20


def test_flow_preserves_disk_and_origin():
    for h in (wobble_hamiltonian(), shear_hamiltonian(), rel_hamiltonian()):
        rep = geo.validate(geo.flow(h, 64))
        assert rep.max_boundary_escape <= 1e-6
        assert rep.origin_displacement <= 1e-12


def test_rel_flow_fixes_the_boundary():
    th = np.linspace(0, 2 * np.pi, 50)
    b = np.stack([np.cos(th), np.sin(th)], -1)
    g = geo.flow(rel_hamiltonian(), 64)
    assert g.boundary_identity is True
    assert np.max(np.abs(g(b) - b)) <= 1e-14


def test_flow_inverse_is_fourth_order(rng):
    p = disk_points(rng, 30)
    h = wobble_hamiltonian(drift=0.3)
    errs = []
    for n in (32, 64):
        g = geo.flow(h, n)
        errs.append(np.max(np.abs(geo.inverse(g)(g(p)) - p)))
    assert errs[1] < 1e-7
    assert errs[0] / errs[1] > 12


def test_flow_declarations_are_checked():
    with pytest.raises(ValueError, match="origin"):
        geo.flow(wobble_hamiltonian(drift=0.3), 32, fixes_origin=True)
    with pytest.raises(ValueError, match="boundary"):
        geo.flow(wobble_hamiltonian(), 32, boundary_identity=True)
    bad = PolyHamiltonian((Term(TimeFactor(), ((1, 0, 1.0),)),), "x")
    with pytest.raises(BoundaryConstancyError):
        geo.flow(bad, 32)


def test_profiles():
    assert geo.profile("bump").f1 == 0.0
    assert geo.profile([0, 1]).f(0.5) == pytest.approx(0.25)
    # moment(4) = int r^4 f'(r) dr: 2/6 for r^2, -1/6 for (1 - r^2)^2
    assert geo.profile("r2").moment(4) == pytest.approx(1 / 3)
    assert geo.profile("bump").moment(4) == pytest.approx(-1 / 6)
    with pytest.raises(SpecError):
        geo.profile("nope")
    with pytest.raises(SpecError):
        geo.profile([])

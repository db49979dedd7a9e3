import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diskqm import geometry as geo
from diskqm.circle import (TWO_PI, boundary_lift, boundary_lift_near, explicit_lift,
                           identity_lift, iterate_orbit, mean_displacement, rigid_lift,
                           rotation_number_mod1, translation_number)
from diskqm.errors import LiftError
from diskqm.hamiltonian import shear_hamiltonian, wobble_hamiltonian
from diskqm.quasimorphism import MeanDisplacementBase, coboundary


def sine_lift(a, b, k=1, c=0.0):
    return explicit_lift(lambda th: th + a + b * np.sin(k * th + c), "sine")


@pytest.mark.parametrize("alpha", [0.0, 0.4, -2.2, 7.5])
def test_rigid_translation_number(alpha):
    est = translation_number(rigid_lift(alpha))
    assert est.value == pytest.approx(alpha / TWO_PI, abs=1e-13)
    assert est.error_bound == 1 / 1024
    assert mean_displacement(rigid_lift(alpha)) == pytest.approx(alpha / TWO_PI, abs=1e-14)


def test_fixed_point_gives_zero_rotation():
    # theta + 0.3 sin(theta) fixes 0 and pi
    assert translation_number(sine_lift(0.0, 0.3)).value == pytest.approx(0.0, abs=1e-12)


def test_explicit_lift_checks():
    with pytest.raises(LiftError):
        explicit_lift(lambda th: th + 1.5 * np.sin(th))  # not monotone
    with pytest.raises(LiftError):
        explicit_lift(lambda th: 2 * th)  # degree 2
    identity_lift().check()


@pytest.mark.parametrize("branch", [-2, 0, 1, 3])
def test_boundary_lift_of_rotation(branch):
    lift = boundary_lift(geo.rotation(1.0), branch)
    th = np.linspace(-3, 9, 25)
    assert np.allclose(lift(th), th + 1.0 + TWO_PI * branch, atol=1e-12)
    assert 2 * np.pi * branch <= lift(0.0) < 2 * np.pi * (branch + 1)


def test_boundary_lift_of_bump_twist_is_identity():
    lift = boundary_lift(geo.twist(2.5, "bump"))
    th = np.linspace(0, TWO_PI, 33)
    assert np.allclose(lift(th), th, atol=1e-12)


def test_boundary_lift_large_rotation_wraps_into_range():
    lift = boundary_lift(geo.rotation(-0.5))
    assert lift(0.0) == pytest.approx(TWO_PI - 0.5)
    near = boundary_lift_near(geo.rotation(-0.5), -0.4)
    assert near(0.0) == pytest.approx(-0.5)


def test_boundary_lift_of_shear_is_a_lift():
    lift = boundary_lift(geo.flow(shear_hamiltonian(), 64))
    lift.check()
    assert lift.min_increment() > 0
    # non-rigid: displacement is not constant
    th = np.linspace(0, TWO_PI, 64, endpoint=False)
    assert np.ptp(lift(th) - th) > 0.05


@settings(max_examples=20, deadline=None)
@given(branch=st.integers(-3, 3), alpha=st.floats(-3, 3))
def test_branch_shifts_translation_number_by_an_integer(branch, alpha):
    g = geo.compose(geo.rotation(alpha), geo.twist(0.4, "r2"))
    r0 = translation_number(boundary_lift(g, 0), 256).value
    rb = translation_number(boundary_lift(g, branch), 256).value
    assert rb - r0 == pytest.approx(branch, abs=1e-12)
    assert rotation_number_mod1(boundary_lift(g, branch), 256) == pytest.approx(
        rotation_number_mod1(boundary_lift(g, 0), 256), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10), b=st.floats(-0.9, 0.9), c=st.floats(-10, 10),
       d=st.floats(-0.45, 0.45))
def test_mean_displacement_defect_is_bounded(a, b, c, d):
    f = sine_lift(a, b)
    g = sine_lift(c, d, 2, 0.3)
    assert abs(coboundary(MeanDisplacementBase(), f, g)) <= 1.0 + 1e-12


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-0.9, 0.9), n=st.integers(1, 5))
def test_translation_number_is_homogeneous(a, b, n):
    f = sine_lift(a, b)
    rn = translation_number(f.iterate(n), 512).value
    r1 = translation_number(f, 512 * n).value
    assert rn == pytest.approx(n * r1, abs=2.0 / 512)


def test_iterate_orbit_matches_iteration():
    f = sine_lift(0.7, 0.5)
    orb = iterate_orbit(f, [0.0, 1.0], [1, 3, 8])
    x = np.array([0.0, 1.0])
    for _ in range(8):
        x = f(x)
    assert np.array_equal(orb[8], x)
    assert np.allclose(orb[3], f.iterate(3)(np.array([0.0, 1.0])))


def test_drifting_flow_still_has_a_boundary_lift():
    lift = boundary_lift(geo.flow(wobble_hamiltonian(drift=0.3), 64))
    lift.check()
    assert translation_number(lift, 256).error_bound == 1 / 256

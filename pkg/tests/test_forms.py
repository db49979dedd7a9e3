import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import disk_points
from diskqm import geometry as geo
from diskqm.errors import SpecError
from diskqm.forms import (LAMBDA, RADIAL, SPIRAL, DiskPath, Quadrature, composite_gauss,
                          form_from_label, integrate_disk, integrate_path, lambda_plus_dF,
                          path_from_label, pullback_at, wedge_density)
from diskqm.geometry import Point
from diskqm.hamiltonian import wobble_hamiltonian


@pytest.mark.parametrize("eta", [LAMBDA, lambda_plus_dF("xy"), lambda_plus_dF("x2", 1.7),
                                 form_from_label("custom", coeffs=[[3, 1, 0.2], [0, 4, -1.0]])])
def test_forms_are_primitives_of_area(eta):
    assert eta.d_residual() <= 1e-6


def test_lambda_in_polar_form(rng):
    p = disk_points(rng, 10)
    x, y = p[:, 0], p[:, 1]
    assert np.allclose(LAMBDA(p), np.stack([-y / 2, x / 2], -1))


def test_disk_rule_integrates_polynomials():
    q = Quadrature()
    assert integrate_disk(lambda p: np.ones(len(p)), q) == pytest.approx(np.pi, abs=1e-13)
    r2 = lambda p: p[:, 0] ** 2 + p[:, 1] ** 2
    assert integrate_disk(r2, q) == pytest.approx(np.pi / 2, abs=1e-13)
    assert integrate_disk(lambda p: p[:, 0] ** 4 * p[:, 1] ** 2, q) == pytest.approx(np.pi / 64, abs=1e-13)
    assert abs(integrate_disk(lambda p: p[:, 0] ** 3, q)) < 1e-15


def test_disk_rule_doubling_on_twist_integrand():
    g = geo.twist(1.3, "bump")

    def dens(p):
        q, jac = g.apply(p)
        return wedge_density(np.einsum("...ji,...j->...i", jac, LAMBDA(q)), LAMBDA(p))

    q = Quadrature()
    assert abs(integrate_disk(dens, q) - integrate_disk(dens, q.doubled())) <= 1e-8


def test_workers_are_deterministic():
    g = geo.flow(wobble_hamiltonian(), 32)

    def dens(p):
        q, jac = g.apply(p)
        return wedge_density(np.einsum("...ji,...j->...i", jac, LAMBDA(q)), LAMBDA(p))

    one = integrate_disk(dens, Quadrature(16, 32, 16, workers=1))
    three_a = integrate_disk(dens, Quadrature(16, 32, 16, workers=3))
    three_b = integrate_disk(dens, Quadrature(16, 32, 16, workers=3))
    assert three_a == three_b
    assert three_a == pytest.approx(one, abs=1e-13)


def test_composite_gauss_is_exact_for_cubics_per_panel():
    t, w = composite_gauss(8)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.dot(t**7, w) == pytest.approx(1 / 8, abs=1e-15)


def test_quadrature_rejects_coarse_rules():
    with pytest.raises(ValueError):
        Quadrature(4, 64, 64)
    with pytest.raises(ValueError):
        Quadrature(workers=0)


@pytest.mark.parametrize("path", [RADIAL, SPIRAL, DiskPath("segment", Point(0.2, -0.1), 2.0)])
def test_path_derivative(path):
    t = np.linspace(0.05, 0.95, 7)
    h = 1e-6
    fd = (path(t + h) - path(t - h)) / (2 * h)
    assert np.allclose(path.derivative(t), fd, atol=1e-8)
    assert np.hypot(*path.endpoint) == pytest.approx(1.0)


def test_lambda_vanishes_on_radial_segments():
    # lambda = r^2 dtheta / 2 kills radial directions
    assert integrate_path(LAMBDA, path_from_label("radial@1.1")) == pytest.approx(0.0, abs=1e-16)


def test_exact_part_integrates_to_potential_difference():
    eta = lambda_plus_dF("x2", 0.5)
    val = integrate_path(eta, SPIRAL) - integrate_path(LAMBDA, SPIRAL)
    e = np.asarray(SPIRAL.endpoint)
    assert val == pytest.approx(eta.potential(e) - eta.potential(np.zeros(2)), abs=1e-13)


@settings(max_examples=20, deadline=None)
@given(s=st.floats(-2, 2), seed=st.integers(0, 100))
def test_pullback_matches_finite_difference(s, seed):
    rng = np.random.default_rng(seed)
    p = disk_points(rng, 5, 0.9)
    g = geo.twist(s, "r2")
    eta = lambda_plus_dF("xy")
    h = 1e-6
    for k, e in enumerate((np.array([h, 0.0]), np.array([0.0, h]))):
        # (g* eta)(e_k) = eta_{g(p)}(dg e_k)
        dg = (geo.eval_map(g, p + e) - geo.eval_map(g, p - e)) / (2 * h)
        ref = np.einsum("ni,ni->n", eta(geo.eval_map(g, p)), dg)
        assert np.allclose(pullback_at(g, eta, p)[:, k], ref, atol=1e-7)


def test_labels():
    assert form_from_label("lambda") is LAMBDA
    assert path_from_label("spiral") is SPIRAL
    with pytest.raises(SpecError):
        form_from_label("nope")
    with pytest.raises(SpecError):
        path_from_label("zigzag")
    with pytest.raises(SpecError):
        DiskPath("spiral", Point(0.1, 0.0))
    with pytest.raises(SpecError):
        DiskPath("segment", Point(1.0, 0.0))

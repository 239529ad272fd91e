import math

import numpy as np
import pytest

from minrep import quadrature as qd
from minrep.geometry import Signature
from minrep.specfun import unit_sphere_area


def test_gauss_legendre_exactness():
    x, w = qd.gauss_legendre(6, 0.0, 2.0)
    for k in range(12):
        assert np.sum(w * x ** k) == pytest.approx(2.0 ** (k + 1) / (k + 1), rel=1e-13)


@pytest.mark.parametrize("d", [0, 1, 2, 3, 4])
def test_sphere_rule_moments(d):
    r = qd.sphere_rule(d, 8)
    area = unit_sphere_area(d + 1)
    assert r.weights.sum() == pytest.approx(area, rel=1e-13)
    np.testing.assert_allclose(np.linalg.norm(r.nodes, axis=1), 1.0, atol=1e-14)
    if d >= 1:
        # int x_j^2 = area / (d + 1) for every coordinate
        for j in range(d + 1):
            assert r.integrate(r.nodes[:, j] ** 2).real == pytest.approx(area / (d + 1), rel=1e-12)


def test_sphere_rule_axis():
    r0 = qd.sphere_rule(2, 6, axis=0)
    r2 = qd.sphere_rule(2, 6, axis=-1)
    np.testing.assert_allclose(np.sort(r0.nodes[:, 0]), np.sort(r2.nodes[:, 2]))


@pytest.mark.parametrize("pq", [(3, 3), (4, 2), (4, 4), (5, 3)])
def test_cone_gaussian_integral(pq):
    # int_C e^{-|zeta|^2} dmu = 1/2 vol * int s^{n-3} e^{-2 s^2} ds
    sig = Signature(*pq)
    n = sig.n
    rule = qd.cone_rule(sig, 96, 6, 1e-6, 8.0)
    val = qd.cone_integrate(rule, lambda z: np.exp(-np.sum(z ** 2, -1)))
    exact = 0.5 * qd.cone_volume_factor(sig) * 0.5 * 2 ** (-(n - 2) / 2) * math.gamma((n - 2) / 2)
    assert val.real == pytest.approx(exact, rel=1e-10)


def test_cone_integrate_reports_bad_node():
    sig = Signature(3, 3)
    rule = qd.cone_rule(sig, 16, 4)
    with pytest.raises(qd.QuadratureError, match="non-finite"):
        qd.cone_integrate(rule, lambda z: np.where(z[..., 0] > 0.5, np.nan, 1.0))


def test_fourier_1d_gaussian():
    from minrep.flat_model import gaussian_factor
    g = gaussian_factor(0.3, 0.6)
    xi = np.linspace(-8, 8, 17)
    np.testing.assert_allclose(qd.fourier_1d(g, xi), g.fourier(xi), atol=1e-12)


def test_refinement_helpers():
    sig = Signature(4, 2)
    rule = qd.cone_rule(sig, 32, 8)
    assert rule.refined().shape[0] == 64
    assert rule.with_radial(n=40).shape[0] == 40
    # the returned value comes from the refined rule; |fine - base| bounds its error
    val, err = qd.cone_integrate_with_error(rule, lambda z: np.exp(-np.sum(z ** 2, -1)))
    n = sig.n
    exact = 0.5 * qd.cone_volume_factor(sig) * 0.5 * 2 ** (-(n - 2) / 2) * math.gamma((n - 2) / 2)
    assert abs(val - exact) <= err

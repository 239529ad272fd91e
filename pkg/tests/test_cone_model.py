import numpy as np
import pytest

from minrep import cone_model as co
from minrep import geometry as geo
from minrep import quadrature as qd
from minrep import specfun as sf
from minrep.geometry import Signature


@pytest.mark.parametrize("pq", [(3, 3), (4, 2)])
def test_bessel_vector_synthesizes_f0(pq):
    sig = Signature(*pq)
    rule = qd.cone_rule(sig, 96, 24, 1e-7, 22.0)
    z = np.random.default_rng(3).uniform(-1.5, 1.5, size=(6, sig.n))
    f = qd.inverse_synthesis(rule, co.psi_0(sig), z)
    ref = sf.constants(sig).synthesis_const_derived * sf.generating_f0(sig, z)
    np.testing.assert_allclose(f, ref, rtol=1e-8, atol=1e-12)


def test_inner_product_hermitian_positive():
    sig = Signature(4, 2)
    rule = qd.cone_rule(sig, 64, 12, 1e-4, 10.0)
    g = lambda s: s ** 2 * np.exp(-(s - 1) ** 2)
    f1 = co.radial_function(sig, g).times_plane_wave([0.2, -0.1, 0.3, 0.4])
    f2 = co.radial_function(sig, lambda s: np.exp(-s ** 2)).times_plane_wave([0.0, 0.5, 0.0, -0.2])
    a, b = co.l2c_inner(rule, f1, f2), co.l2c_inner(rule, f2, f1)
    assert a == pytest.approx(np.conj(b), rel=1e-12)
    assert co.l2c_inner(rule, f1, f1).real > 0
    assert abs(co.l2c_inner(rule, f1, f1).imag) < 1e-12
    # factorized and pointwise evaluation agree
    h = co.ConeFunction(sig, func=lambda z: f2(z))
    assert co.l2c_inner(rule, f1, h) == pytest.approx(a, rel=1e-11)


def test_divergence_detected():
    sig = Signature(4, 2)
    rule = qd.cone_rule(sig, 16, 6, 1e-9, 5.0)
    # |phi|^2 s^{n-3} ~ s^{-5}: the truncated integral is dominated by the first nodes
    bad = co.radial_function(sig, lambda s: s ** -3.0)
    with pytest.raises(co.DivergenceError):
        co.l2c_inner(rule, bad, bad, check=True)
    good = co.radial_function(sig, lambda s: np.exp(-s ** 2))
    rule = qd.cone_rule(sig, 48, 6, 1e-6, 8.0)
    assert co.l2c_norm(rule, good, check=True) > 0


def test_classify_pmax():
    sig = Signature(4, 4)
    assert co.classify_pmax(sig, geo.GroupElement(np.eye(sig.dim))).kind == "identity"
    assert co.classify_pmax(sig, geo.m0(sig)).kind == "sign"
    el = co.classify_pmax(sig, geo.dilation(sig, 0.3))
    assert el.kind == "dilation" and el.t == pytest.approx(0.3)
    a = np.array([0.1, -0.2, 0.3, 0.0, 0.5, 0.7])
    el = co.classify_pmax(sig, geo.nbar(sig, a))
    assert el.kind == "translation"
    np.testing.assert_allclose(el.a, a)
    assert co.classify_pmax(sig, geo.boost(sig, 1, sig.n, 0.4)).kind == "levi"
    X = [b for b in geo.basis_elements(sig) if b.name == "N1"][0]
    with pytest.raises(co.UnsupportedElement):
        co.classify_pmax(sig, geo.group_exp(X, 0.2))


def test_dilation_is_unitary():
    sig = Signature(3, 3)
    rule = qd.cone_rule(sig, 128, 16, 1e-3, 14.0)
    f = co.radial_function(sig, lambda s: s ** 2 * np.exp(-(s - 1) ** 2)).times_plane_wave([0.3, 0, 0, 0.1])
    g = co.pmax_action(sig, geo.dilation(sig, 0.7), f)
    assert co.l2c_norm(rule, g) == pytest.approx(co.l2c_norm(rule, f), rel=1e-9)


def test_translation_multiplies_plane_wave():
    sig = Signature(3, 3)
    a = np.array([0.2, 0.1, -0.3, 0.4])
    psi = co.psi_0(sig)
    out = co.pmax_action(sig, geo.nbar(sig, a), psi)
    z = np.array([[0.6, 0.8, 1.0, 0.0]])
    assert out(z)[0] == pytest.approx(np.exp(2j * z[0] @ a) * psi(z)[0])


def test_euclidean_radius_option():
    sig = Signature(3, 3)
    z = np.array([[0.6, 0.8, 1.0, 0.0]])
    assert co.psi_0(sig, radius="euclidean")(z)[0] == pytest.approx(co._bessel_profile(sig, np.sqrt(2.0)))
    with pytest.raises(ValueError):
        co.psi_0(sig, radius="taxicab")


def test_poly_plane_wave_algebra():
    f = co.PolyPlaneWave.monomial(2, (1, 2), 3.0, b=(0.5, 0.0))
    z = np.array([0.3, -0.7])
    d = f.diff(0)
    # d/dz0 of 3 z0 z1^2 e^{0.5 i z0}
    ref = 3 * z[1] ** 2 * np.exp(0.5j * z[0]) * (1 + 0.5j * z[0])
    assert d(z) == pytest.approx(ref)
    assert f.mul(1)(z) == pytest.approx(z[1] * f(z))
    assert (f - f).norm() == 0
    with pytest.raises(ValueError):
        f + co.PolyPlaneWave.constant(2)


def test_nbar_acts_by_multiplication():
    sig = Signature(3, 3)
    f = co.PolyPlaneWave.constant(sig.n, b=(0.1, 0.2, 0.0, -0.3))
    for j in range(sig.n):
        X = [b for b in geo.basis_elements(sig) if b.name == f"Nbar{j + 1}"][0]
        out = co.dpi_hat(sig, 1.0, X, f)
        assert (out - f.mul(j).scale(2j)).norm() < 1e-15

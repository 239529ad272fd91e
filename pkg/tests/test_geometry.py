import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minrep import geometry as geo
from minrep.geometry import Signature, SignatureError

SIGS = [(3, 3), (4, 2), (2, 4), (4, 4), (5, 3), (6, 2)]


@pytest.mark.parametrize("p,q", [(2, 3), (2, 2), (1, 3), (3, 1)])
def test_invalid_signatures(p, q):
    with pytest.raises(SignatureError):
        Signature(p, q)


def test_eps_and_split():
    sig = Signature(4, 2)
    assert sig.n == 4
    assert list(sig.eps) == [1, 1, 1, -1]
    zp, zpp = sig.split(np.arange(4.0))
    assert zp.shape == (3,) and zpp.shape == (1,)
    assert sig.swapped() == Signature(2, 4)


def points(n):
    return st.lists(st.floats(-3, 3), min_size=n, max_size=n).map(np.array)


@pytest.mark.parametrize("p,q", SIGS)
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_iota_null_and_inverse(p, q, data):
    sig = Signature(p, q)
    z = data.draw(points(sig.n))
    v = geo.iota(sig, z)
    assert abs(geo.bracket_pq(sig, v, v)) < 1e-9 * (1 + np.sum(v * v))
    assert geo.mu(v) == pytest.approx(1.0)
    np.testing.assert_allclose(geo.iota_inv(sig, v), z, atol=1e-12)


@pytest.mark.parametrize("p,q", SIGS)
def test_psi_lands_on_M_and_inverts(p, q):
    sig = Signature(p, q)
    z = np.random.default_rng(0).uniform(-2, 2, size=(20, sig.n))
    u = geo.psi_map(sig, z)
    for row in u:
        assert geo.on_M(sig, row)
    np.testing.assert_allclose(geo.psi_inv(sig, u), z, atol=1e-12)


@pytest.mark.parametrize("p,q", SIGS)
def test_tau_forms_agree(p, q):
    sig = Signature(p, q)
    z = np.random.default_rng(1).uniform(-3, 3, size=(50, sig.n))
    t1, t2, t3 = (geo.tau(sig, z, form=k) for k in (1, 2, 3))
    np.testing.assert_allclose(t1, t3, rtol=1e-12)
    np.testing.assert_allclose(t2, t3, rtol=1e-12)


@pytest.mark.parametrize("p,q", SIGS)
def test_generators_preserve_form(p, q):
    sig = Signature(p, q)
    for X in geo.basis_elements(sig):
        assert X.residual(sig) < 1e-14
        assert geo.group_exp(X, 0.37).residual(sig) < 1e-12
    assert len(geo.basis_elements(sig)) == sig.dim * (sig.dim - 1) // 2


def test_structure_constants_closed():
    C, res = geo.structure_constants(Signature(3, 3))
    assert res < 1e-12
    # antisymmetry
    np.testing.assert_allclose(C, -np.transpose(C, (1, 0, 2)))


def test_flat_action_of_translation_and_dilation():
    sig = Signature(3, 3)
    z = np.array([0.1, 0.2, -0.3, 0.4])
    a = np.array([0.5, 0.0, -0.25, 1.0])
    w, m = geo.flat_action(sig, geo.nbar(sig, a), z)
    np.testing.assert_allclose(w, z + 2 * a, atol=1e-14)
    assert m == pytest.approx(1.0)
    w, m = geo.flat_action(sig, geo.dilation(sig, 0.5), z)
    np.testing.assert_allclose(w, np.exp(-0.5) * z, atol=1e-14)
    assert m == pytest.approx(np.exp(0.5))


def test_flat_action_point_at_infinity():
    sig = Signature(3, 3)
    g = geo.m0(sig)  # -I: mu = -1, fine
    geo.flat_action(sig, g, np.zeros(4))
    # reflecting the first coordinate sends the origin to infinity
    flip = geo.GroupElement(np.diag([-1.0, 1, 1, 1, 1, 1]))
    with pytest.raises(geo.PointAtInfinity):
        geo.flat_action(sig, flip, np.zeros(4))


@pytest.mark.parametrize("p,q", SIGS)
def test_metric_conformality(p, q):
    sig = Signature(p, q)
    z = np.random.default_rng(2).uniform(-0.7, 0.7, size=sig.n)
    G = geo.pullback_metric_psi(sig, z)
    np.testing.assert_allclose(G, geo.tau(sig, z) ** -2 * geo.flat_metric(sig), atol=1e-8)
    g = geo.boost(sig, 1, sig.n, 0.4)
    _, m = geo.flat_action(sig, g, z)
    G = geo.pullback_metric_action(sig, g, z)
    np.testing.assert_allclose(G, m ** -2 * geo.flat_metric(sig), atol=1e-8)

import numpy as np
import pytest

from minrep import compact_model as cm
from minrep import specfun as sf
from minrep.geometry import Signature

SIGS = [(3, 3), (4, 2), (4, 4), (5, 3), (6, 2)]


def test_sphere_laplacian_eigenvalues():
    sig = Signature(4, 2)
    # x0 x1 is a degree-2 harmonic on S^3: eigenvalue -2 (2 + 2) = -8
    F = cm.CompactFunction(sig, poly={(1, 1, 0, 0, 0, 0): 1.0})
    L = cm.sphere_laplacian(F, 0)
    assert L.poly == {(1, 1, 0, 0, 0, 0): -8}
    # y0^2 on S^1 is (1 + cos 2t)/2: Laplacian -2 cos 2t = -2 (y0^2 - y1^2)
    G = cm.CompactFunction(sig, poly={(0, 0, 0, 0, 2, 0): 1.0})
    u = cm.random_points_M(sig, np.random.default_rng(0), 5)
    ref = -2 * (u[:, 4] ** 2 - u[:, 5] ** 2)
    np.testing.assert_allclose(cm.sphere_laplacian(G, 1)(u), ref, atol=1e-13)


@pytest.mark.parametrize("pq", SIGS)
def test_F0_in_yamabe_kernel(pq):
    sig = Signature(*pq)
    F = cm.polynomial_F0(sig)
    assert cm.F0_fit_residual(sig) < 1e-12
    Y = cm.yamabe_M(sig, F)
    assert max((abs(v) for v in Y.poly.values()), default=0.0) < 1e-10
    u = cm.random_points_M(sig, np.random.default_rng(1), 10)
    assert F.parity_residual(u) < 1e-12


def test_yamabe_needs_polynomial():
    sig = Signature(3, 3)
    F = cm.CompactFunction(sig, func=lambda u: u[..., 0])
    with pytest.raises(cm.BandLimitError):
        cm.yamabe_M(sig, F)
    with pytest.raises(ValueError):
        cm.CompactFunction(sig)


@pytest.mark.parametrize("pq", [(3, 3), (4, 2), (5, 3)])
def test_f0_is_a_single_ktype(pq):
    sig = Signature(*pq)
    lam = (sig.n - 2) / 2
    F = cm.twisted_pullback_inv(sig, lam, sf.eps_sign(sig), lambda z: sf.generating_f0(sig, z))
    E = cm.zonal_expansion(sig, F, a_max=4, nodes=32)
    assert E.residual < 1e-10
    total = sum(E.component_norm2(*k) for k in E.coeffs)
    a0, b0 = 0, (sig.p - sig.q) // 2
    assert E.admissible(a0, b0)
    assert E.component_norm2(a0, b0) == pytest.approx(total, rel=1e-10)


@pytest.mark.parametrize("pq", [(3, 3), (4, 2)])
def test_twisted_pullback_roundtrip(pq):
    sig = Signature(*pq)
    lam = (sig.n - 2) / 2
    f = lambda z: np.exp(-np.sum(np.asarray(z) ** 2, axis=-1))
    F = cm.twisted_pullback_inv(sig, lam, 1, f)
    z = np.random.default_rng(2).uniform(-1, 1, size=(7, sig.n))
    np.testing.assert_allclose(cm.twisted_pullback(sig, lam, F)(z), f(z), rtol=1e-12)


def test_equator_raises():
    sig = Signature(3, 3)
    F = cm.twisted_pullback_inv(sig, 1.0, 1, lambda z: np.ones(np.shape(z)[:-1]))
    u = np.zeros(sig.dim)
    u[1] = 1.0
    u[sig.p] = 1.0  # u_0 = u_last = 0
    with pytest.raises(cm.EquatorError):
        F(u)


def test_inner_M_rejects_inadmissible_components():
    sig = Signature(3, 3)
    F = cm.CompactFunction(sig, func=lambda u: u[..., 0] + 0.0 * u[..., -1])
    E = cm.zonal_expansion(sig, F, a_max=2, nodes=16)
    with pytest.raises(ValueError, match="inadmissible"):
        cm.inner_M(sig, E, E)


def test_zonal_expansion_recovers_coefficients():
    sig = Signature(4, 4)
    c = {(1, 1): 0.7, (2, 2): -0.3}
    F = lambda u: sum(v * cm.gegenbauer(4, a, u[..., 0]) * cm.gegenbauer(4, b, u[..., -1]) for (a, b), v in c.items())
    E = cm.zonal_expansion(sig, F, a_max=3, nodes=12)
    for k, v in E.coeffs.items():
        assert v == pytest.approx(c.get(k, 0.0), abs=1e-13)
    # weights a + 1 for p = 4
    norm = cm.inner_M(sig, E, E).real
    assert norm == pytest.approx(2 * E.component_norm2(1, 1) + 3 * E.component_norm2(2, 2), rel=1e-13)


def test_weights():
    sig = Signature(5, 3)
    for a in range(4):
        b = a + 1
        assert cm.ktype_weight(sig, a, "x") == cm.ktype_weight(sig, b, "y")
        assert cm.pseudo_diff_weight(sig, a) == pytest.approx(cm.ktype_weight(sig, a))


@pytest.mark.parametrize("pq", SIGS + [(2, 4)])
def test_kernel_boundary_value(pq):
    sig = Signature(*pq)
    y = np.array([-2.0, -0.3, 0.5, 1.7])
    assert cm.kernel_boundary_residual(sig, y) < 1e-12
    with pytest.raises(ValueError):
        cm.kernel_psi(-1.0, 1, np.array([0.0, 1.0]))


def test_constant_function_norm():
    # p = q, F = 1 is the (0, 0) K-type with weight (q - 2)/2
    sig = Signature(4, 4)
    E = cm.zonal_expansion(sig, lambda u: np.ones(u.shape[:-1]), a_max=2, nodes=8)
    ref = (sig.q - 2) / 2 * sf.unit_sphere_area(4) ** 2
    assert cm.inner_M(sig, E, E).real == pytest.approx(ref, rel=1e-12)

import csv

import numpy as np
import pytest

from minrep import cone_model as co
from minrep import flat_model as fm
from minrep import quadrature as qd
from minrep import specfun as sf
from minrep.geometry import Signature

SMALL_GRID = fm.HyperplaneGrid(48, 24, 6.0)


def gaussian(n, sigma=1.0, center=None):
    center = np.zeros(n) if center is None else center
    return fm.test_function(n, [1.0], [center], [[sigma] * n])


@pytest.mark.parametrize("pq", [(3, 3), (4, 2), (2, 4)])
def test_cone_data_routes_agree(pq):
    sig = Signature(*pq)
    phi = fm.random_test_function(sig, np.random.default_rng(5))
    rule = qd.cone_rule(sig, 24, 6, 1e-3, 6.0)
    a = fm.cone_data(sig, phi, "quadrature").samples(rule)
    b = fm.cone_data(sig, phi, "closed").samples(rule)
    np.testing.assert_allclose(a, b, atol=1e-11 * np.max(np.abs(b)))


def test_inner_N_two_routes():
    sig = Signature(3, 3)
    rule = qd.cone_rule(sig, 64, 16, 1e-6, 30.0)
    phi = fm.random_test_function(sig, np.random.default_rng(1))
    r = fm.inner_N(sig, rule, phi, phi)
    assert r.rel_diff < 1e-5
    assert r.cone.real > 0 and abs(r.cone.imag) < 1e-12 * r.cone.real


def test_inner_N_literal_synthesis():
    sig = Signature(3, 3)
    phi = gaussian(sig.n, center=np.array([0.1, -0.2, 0.0, 0.3]))
    rule = qd.cone_rule(sig, 48, 12, 1e-6, 9.0)
    ref = fm.inner_N(sig, rule, phi, phi).position
    direct = fm.inner_N_direct(sig, rule, phi, phi, z_nodes=12, half_width=5.0)
    assert abs(direct - ref) < 5e-3 * abs(ref)


def test_dilated_test_function():
    phi = gaussian(4, 0.5, np.array([0.2, 0.0, -0.1, 0.4]))
    d = fm.dilate_test_function(phi, 0.3, 1.0)
    z = np.array([[0.1, 0.2, 0.3, -0.4]])
    assert d(z)[0] == pytest.approx(np.exp(0.3) * phi(np.exp(0.3) * z)[0], rel=1e-12)


def test_f0_solves_wave_equation():
    sig = Signature(4, 2)
    f = lambda z: sf.generating_f0(sig, z)
    _, res, orders = fm.box_orders(sig, f, np.array([0.3, -0.2, 0.1, 0.5]), h0=0.2, levels=3)
    assert np.all(orders > 1.8)
    assert res[-1] < 1e-3


@pytest.fixture(scope="module")
def bump_solution():
    sig = Signature(3, 3)
    bump = fm.BlockBump(sig)
    return fm.FlatSolution(sig, bump.cone_function(), bump.rule())


@pytest.mark.parametrize("i", [1, 4])
def test_cauchy_data_restricts_solution(bump_solution, i):
    f = bump_solution
    cd = fm.cauchy_data(f, i, SMALL_GRID)
    pts = cd.points(f.sig).reshape(-1, f.sig.n)[::97][:8]
    assert np.all(pts[:, i - 1] == 0)
    vals = cd.value.reshape(-1)[::97][:8]
    scale = np.max(np.abs(cd.value))
    np.testing.assert_allclose(f(pts), vals, atol=1e-4 * scale)


def test_split_pm(bump_solution):
    f = bump_solution
    rule = f.rule
    fp, fmn = fm.split_pm(f, 1)
    z = np.random.default_rng(0).uniform(-1, 1, size=(4, f.sig.n))
    np.testing.assert_allclose(fp(z) + fmn(z), f(z), atol=1e-15)
    n2 = lambda h: co.l2c_inner(rule, h.cone_data, h.cone_data).real
    assert n2(fp) + n2(fmn) == pytest.approx(n2(f), rel=1e-12)


def test_hyperplane_precondition(bump_solution):
    with pytest.raises(fm.PreconditionError):
        fm.cauchy_data(bump_solution, 2, SMALL_GRID)
    sig = bump_solution.sig
    plain = fm.FlatSolution(sig, co.psi_0(sig), qd.cone_rule(sig, 16, 6))
    with pytest.raises(fm.PreconditionError):
        fm.cauchy_data(plain, 1, SMALL_GRID)
    with pytest.raises(fm.PreconditionError):
        fm.time_axis(sig)


def test_conserved_quantity_translation_invariant():
    sig = Signature(4, 2)
    bump = fm.BlockBump(sig)
    rule, phi = bump.rule(), bump.cone_function()
    e0 = fm.conserved_quantity(sig, rule, phi, 1)
    assert e0 > 0
    assert fm.conserved_quantity(sig, rule, phi, 1, t=0.8) == pytest.approx(e0, rel=1e-12)
    zero = phi.scaled(0.0)
    assert fm.conserved_quantity(sig, rule, zero, 2) == 0.0


def test_time_axis():
    assert fm.time_axis(Signature(4, 2)) == 4
    assert fm.time_axis(Signature(2, 4)) == 1


def test_csv_headers(tmp_path, bump_solution):
    f = bump_solution
    path = tmp_path / "f.csv"
    f.to_csv(np.zeros((2, 4)), path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["z1", "z2", "z3", "z4", "re", "im"] and len(rows) == 3
    path = tmp_path / "cd.csv"
    fm.cauchy_data(f, 1, fm.HyperplaneGrid(16, 4, 3.0)).to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["R", "P", "X", "re_f", "im_f", "re_df", "im_df"] and len(rows) == 1 + 4 ** 3


def test_smooth_bump():
    x = np.array([-1.5, -1.0, 0.0, 0.5, 1.0])
    v = fm.smooth_bump(x)
    assert v[0] == v[1] == v[4] == 0 and v[2] == 1
    assert 0 < v[3] < 1

"""Solutions of the ultrahyperbolic equation box f = 0 on R^{p-1,q-1}.

Every solution here is synthesized from cone data,

    f(z) = (2 pi)^{-n} int_C phi(zeta) e^{-i z.zeta} dmu(zeta),

so the Green kernel only ever appears through its Fourier image, the
delta measure on the cone.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from .cone_model import ConeFunction, l2c_inner
from .geometry import Signature
from .quadrature import (ConeRule, Factor1D, RadialRule, SeparableFunction, cone_integrate_factored,
                         fourier_1d, gauss_legendre, inverse_synthesis, sphere_rule)
from .specfun import sphere_fourier, unit_sphere_area


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Test functions: sums of separable Gaussians


GAUSS_HALF_WIDTH = 9.0  # in units of sigma; the tail beyond is below 3e-18


def gaussian_factor(center: float, sigma: float) -> Factor1D:
    c, s = float(center), float(sigma)

    def g(x):
        return np.exp(-0.5 * ((np.asarray(x) - c) / s) ** 2)

    def ft(xi):
        xi = np.asarray(xi, dtype=float)
        return s * math.sqrt(2 * math.pi) * np.exp(1j * c * xi - 0.5 * (s * xi) ** 2)

    return Factor1D(g, c - GAUSS_HALF_WIDTH * s, c + GAUSS_HALF_WIDTH * s, ft)


def test_function(n: int, coefs, centers, sigmas) -> SeparableFunction:
    """sum_t coefs[t] prod_j exp(-(z_j - centers[t, j])^2 / (2 sigmas[t, j]^2)).

    Gaussians are treated as compactly supported on their 9-sigma boxes.
    """
    centers, sigmas = np.atleast_2d(centers), np.atleast_2d(sigmas)
    terms = tuple(
        (complex(c), tuple(gaussian_factor(centers[t, j], sigmas[t, j]) for j in range(n)))
        for t, c in enumerate(np.atleast_1d(coefs)))
    return SeparableFunction(n, terms)


def random_test_function(sig: Signature, rng: np.random.Generator, n_terms: int = 2) -> SeparableFunction:
    n = sig.n
    coefs = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    centers = rng.uniform(-0.8, 0.8, size=(n_terms, n))
    sigmas = rng.uniform(0.45, 0.8, size=(n_terms, n))
    return test_function(n, coefs, centers, sigmas)


def _gauss_params(phi: SeparableFunction):
    """Recover (coef, centers, sigmas) from a Gaussian test function."""
    out = []
    for c, facs in phi.terms:
        centers = np.array([(g.lo + g.hi) / 2 for g in facs])
        sigmas = np.array([(g.hi - g.lo) / (2 * GAUSS_HALF_WIDTH) for g in facs])
        out.append((c, centers, sigmas))
    return out


def dilate_test_function(phi: SeparableFunction, t: float, lam: float) -> SeparableFunction:
    """z -> e^{lam t} phi(e^t z)."""
    n = phi.n
    pars = _gauss_params(phi)
    return test_function(n, [c * math.exp(lam * t) for c, _, _ in pars],
                         [cen * math.exp(-t) for _, cen, _ in pars],
                         [sg * math.exp(-t) for _, _, sg in pars])


def cone_data(sig: Signature, phi: SeparableFunction, route: str = "quadrature",
              nodes: int = 96) -> ConeFunction:
    """(F phi)|_C as a separable cone function.

    route="quadrature" uses Gauss-Legendre on each support interval,
    route="closed" the factors' closed-form transforms.
    """
    p1 = sig.p - 1

    def transform(g, xi):
        if route == "closed":
            if g.fourier is None:
                raise ValueError("factor has no closed-form transform")
            return g.fourier(xi)
        return fourier_1d(g, xi, nodes)

    terms = []
    for c, facs in phi.terms:
        def A(s, w, facs=facs, c=c):
            out = c
            for j in range(p1):
                out = out * transform(facs[j], s * w[..., j])
            return out

        def B(s, w, facs=facs):
            out = 1.0
            for j in range(sig.q - 1):
                out = out * transform(facs[p1 + j], s * w[..., j])
            return out
        terms.append((A, B))
    return ConeFunction(sig, terms=tuple(terms), label=f"F(phi)|C [{route}]")


# ---------------------------------------------------------------------------
# Solutions


@dataclass(frozen=True)
class FlatSolution:
    """f = F^{-1} T phi, evaluated by cone quadrature with a point cache."""
    sig: Signature
    cone_data: ConeFunction
    rule: ConeRule
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        pts = z.reshape(-1, self.sig.n)
        keys = [p.tobytes() for p in pts]
        todo = [i for i, k in enumerate(keys) if k not in self.cache]
        if todo:
            vals = np.atleast_1d(inverse_synthesis(self.rule, self.cone_data, pts[todo]))
            for i, v in zip(todo, vals):
                self.cache[keys[i]] = v
        out = np.array([self.cache[k] for k in keys])
        return out[0] if z.ndim == 1 else out.reshape(z.shape[:-1])

    def box(self, z, h: float) -> complex:
        """Central-difference d'Alembertian sum_j eps_j d_j^2 f at z."""
        return fd_box(self.sig, self, z, h)

    def to_csv(self, points, path) -> None:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        vals = self(pts) if len(pts) else np.zeros(0)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"z{j + 1}" for j in range(self.sig.n)] + ["re", "im"])
            for z, v in zip(pts, np.atleast_1d(vals)):
                w.writerow([f"{x:.17g}" for x in z] + [f"{v.real:.17g}", f"{v.imag:.17g}"])


def fd_box(sig: Signature, f, z, h: float):
    z = np.asarray(z, dtype=float)
    n = sig.n
    shifts = np.concatenate([np.zeros((1, n)), h * np.eye(n), -h * np.eye(n)])
    v = np.asarray(f(z[None] + shifts))
    return np.sum(sig.eps * (v[1: n + 1] + v[n + 1:] - 2 * v[0])) / h ** 2


def box_orders(sig: Signature, f, z, h0: float = 0.2, levels: int = 3):
    """Residuals of fd_box at h0, h0/2, ... and the observed orders between levels."""
    hs = h0 / 2 ** np.arange(levels)
    res = np.array([abs(fd_box(sig, f, z, h)) for h in hs])
    orders = np.log2(res[:-1] / res[1:])
    return hs, res, orders


@dataclass(frozen=True)
class GreenKernel:
    """Symbolic Green kernel: a constant times (h - conj h)/(2 pi i) with h = (P + i0)^{1 - n/2}.

    Only its Fourier transform, the measure delta(Q), is ever used.
    """
    sig: Signature

    def describe(self) -> str:
        n = self.sig.n
        return (f"E0 = (1/(2 pi i)) (-E + conj E), E ~ (P(z) + i0)^{{{1 - n / 2:g}}}; "
                f"F E0 = delta(Q) on R^{n}")


def s_transform(sig: Signature, rule: ConeRule, phi: SeparableFunction, route: str = "quadrature") -> FlatSolution:
    """S phi = F^{-1}((F phi) delta(Q)) as a synthesized solution."""
    return FlatSolution(sig, cone_data(sig, phi, route), rule)


# ---------------------------------------------------------------------------
# The form ( , )_N


@dataclass(frozen=True)
class NResult:
    position: complex
    cone: complex

    @property
    def rel_diff(self) -> float:
        return float(abs(self.position - self.cone) / max(abs(self.cone), 1e-300))


def inner_N(sig: Signature, rule: ConeRule, phi1: SeparableFunction, phi2: SeparableFunction,
            z_nodes: int = 48) -> NResult:
    """(f1, f2)_N computed twice.

    position: int phi1(z) conj(S phi2)(z) dz, a tensor Gauss-Legendre sum over
    the box of phi1 against S phi2 synthesized from quadrature cone data; the
    finite sum is evaluated in factorized order.
    cone: (2 pi)^{-n} <F phi1, F phi2>_{L^2(C)} with closed-form transforms.
    """
    pos_left = cone_data(sig, phi1, "quadrature", nodes=z_nodes)
    pos_right = cone_data(sig, phi2, "quadrature")
    position = l2c_inner(rule, pos_left, pos_right) / (2 * math.pi) ** sig.n
    cone = l2c_inner(rule, cone_data(sig, phi1, "closed"), cone_data(sig, phi2, "closed")) / (2 * math.pi) ** sig.n
    return NResult(complex(position), complex(cone))


def inner_N_direct(sig: Signature, rule: ConeRule, phi1: SeparableFunction, phi2: SeparableFunction,
                   z_nodes: int = 10, half_width: float | None = None) -> complex:
    """Position side by literal synthesis of S phi2 on the tensor grid (small n only).

    half_width (in Gaussian widths) shrinks the integration box of phi1;
    the default keeps its full support box.
    """
    lo, hi = phi1.box
    if half_width is not None:
        pars = _gauss_params(phi1)
        lo = np.min([cen - half_width * sg for _, cen, sg in pars], axis=0)
        hi = np.max([cen + half_width * sg for _, cen, sg in pars], axis=0)
    grids = [gauss_legendre(z_nodes, lo[j], hi[j]) for j in range(sig.n)]
    pts = np.stack(np.meshgrid(*[g[0] for g in grids], indexing="ij"), axis=-1).reshape(-1, sig.n)
    w = np.ones(1)
    for g in grids:
        w = np.multiply.outer(w, g[1]).ravel()
    f2 = inverse_synthesis(rule, cone_data(sig, phi2, "quadrature"), pts, batch=256)
    return complex(np.sum(w * phi1(pts) * np.conj(f2)))


# ---------------------------------------------------------------------------
# Block bumps on the cone and their Cauchy data


def smooth_bump(x):
    """exp(1 - 1/(1 - x^2)) on |x| < 1, zero outside; equals 1 at 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
    return out


@dataclass(frozen=True)
class BlockBump:
    """phi(zeta) = R(s) a(w_1) b(w'_last) with Gaussian factors.

    R is a Gaussian of width s_w around s_c; a and b are sums of two
    Gaussians of width ang_w centered at +-ang_c, weighted by (a_plus,
    a_minus) and (b_plus, b_minus).  On S^0 the weights are the values at
    +-1.  The angular factors are below `leak()` at w = 0, so the data are
    numerically supported in both charts C^{(1)} and C^{(n)}.
    """
    sig: Signature
    a: tuple = (1.0, 0.5)
    b: tuple = (1.0, -0.7)
    s_c: float = 2.0
    s_w: float = 0.2
    ang_c: float = 0.65
    ang_w: float = 0.1
    cutoff: float = 8.0  # support radius in units of the width

    def radial(self, s):
        return np.exp(-0.5 * ((np.asarray(s) - self.s_c) / self.s_w) ** 2)

    def _ang(self, x, wts, dim):
        x = np.asarray(x, dtype=float)
        if dim == 0:
            return np.where(x > 0, wts[0], wts[1]).astype(complex)
        g = lambda y: np.exp(-0.5 * (y / self.ang_w) ** 2)
        return wts[0] * g(x - self.ang_c) + wts[1] * g(x + self.ang_c)

    def value(self, s, x1, xn):
        sig = self.sig
        return self.radial(s) * self._ang(x1, self.a, sig.p - 2) * self._ang(xn, self.b, sig.q - 2)

    def cone_function(self) -> ConeFunction:
        sig = self.sig
        A = lambda s, w: self.radial(s) * self._ang(w[..., 0], self.a, sig.p - 2)
        B = lambda s, w: self._ang(w[..., -1], self.b, sig.q - 2) + 0.0 * s
        return ConeFunction(sig, terms=((A, B),), label="block-bump", meta=self)

    @property
    def s_range(self) -> tuple[float, float]:
        return max(self.s_c - self.cutoff * self.s_w, 1e-3), self.s_c + self.cutoff * self.s_w

    def leak(self) -> float:
        """Angular factor at w = 0 relative to its peak."""
        return math.exp(-0.5 * (self.ang_c / self.ang_w) ** 2) * 2

    def rule(self, n_radial: int = 64, n_first: int = 128, n_polar: int = 12) -> ConeRule:
        """Cone rule concentrated on the bump's radial and angular support."""
        sig = self.sig
        lo, hi = self.s_range
        return ConeRule(sig, RadialRule(lo, hi, n_radial),
                        sphere_rule(sig.p - 2, n_polar, n_first=n_first, axis=0),
                        sphere_rule(sig.q - 2, n_polar, n_first=n_first, axis=-1), n_polar)


def _chart(sig: Signature, i: int):
    """Block dimensions (d_r, d_rho) of the hyperplane chart for axis i in {1, n}."""
    if i not in (1, sig.n):
        raise PreconditionError("hyperplane charts are implemented for i = 1 and i = n")
    return sig.p - 2, sig.q - 2


def _chart_values(bump: BlockBump, i: int, r, rho, x, sign: int):
    """phi at the chart point over (r, rho, x) on the sheet sign(zeta_i) = sign, and sqrt(Q^(i))."""
    sig = bump.sig
    with np.errstate(invalid="ignore", divide="ignore"):
        if i == 1:
            s = np.sqrt(rho ** 2 + x ** 2)
            q = s ** 2 - r ** 2
            root = np.sqrt(np.maximum(q, 0.0))
            x1, xn = sign * root / s, x / s
        else:
            s = np.sqrt(x ** 2 + r ** 2)
            q = s ** 2 - rho ** 2
            root = np.sqrt(np.maximum(q, 0.0))
            x1, xn = x / s, sign * root / s
        ok = (q > 0) & (s > 0)
        v = np.where(ok, bump.value(np.where(ok, s, 1.0), np.where(ok, x1, 0.0), np.where(ok, xn, 0.0)), 0.0)
    return v, np.where(ok, root, 1.0)


@dataclass(frozen=True)
class HyperplaneGrid:
    """Tensor Gauss-Legendre grids: data side (r, rho, x) and hyperplane side (R, P, X)."""
    data_nodes: int = 96
    plane_nodes: int = 150
    plane_extent: float = 50.0


@dataclass(frozen=True)
class CauchyData:
    i: int
    R: np.ndarray
    P: np.ndarray
    X: np.ndarray
    weights: np.ndarray  # hyperplane measure on the (R, P, X) grid
    f_plus: np.ndarray
    f_minus: np.ndarray
    df_plus: np.ndarray
    df_minus: np.ndarray
    grad_sq: np.ndarray | None = None  # |grad f|^2 along the hyperplane

    @property
    def value(self):
        return self.f_plus + self.f_minus

    @property
    def normal_derivative(self):
        return self.df_plus + self.df_minus

    def points(self, sig: Signature) -> np.ndarray:
        """Flat points (z_i = 0) matching the grid, shape (nR, nP, nX, n)."""
        R, P, X = np.meshgrid(self.R, self.P, self.X, indexing="ij")
        z = np.zeros(R.shape + (sig.n,))
        if self.i == 1:
            if sig.p > 2:
                z[..., 1] = R
            if sig.q > 2:
                z[..., sig.p - 1] = P
            z[..., sig.n - 1] = X
        else:
            z[..., 0] = X
            if sig.p > 2:
                z[..., 1] = R
            if sig.q > 2:
                z[..., sig.p - 1] = P
        return z

    def to_csv(self, path) -> None:
        R, P, X = np.meshgrid(self.R, self.P, self.X, indexing="ij")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["R", "P", "X", "re_f", "im_f", "re_df", "im_df"])
            for vals in zip(R.ravel(), P.ravel(), X.ravel(), self.value.ravel(), self.normal_derivative.ravel()):
                w.writerow([f"{vals[0]:.10g}", f"{vals[1]:.10g}", f"{vals[2]:.10g}",
                            f"{vals[3].real:.10g}", f"{vals[3].imag:.10g}",
                            f"{vals[4].real:.10g}", f"{vals[4].imag:.10g}"])


def _radial_block(d: int, nodes: int, r_max: float, plane_nodes: int, extent: float, deriv=False):
    """Data nodes/weights, plane nodes/weights and the transform matrix for one block."""
    if d == 0:
        one = np.ones(1)
        return np.zeros(1), one, np.zeros(1), one, np.ones((1, 1)), np.zeros((1, 1))
    r, wr = gauss_legendre(nodes, 0.0, r_max)
    R, wR = gauss_legendre(plane_nodes, 0.0, extent)
    t = np.outer(R, r)
    nu = d / 2 - 1
    K = sphere_fourier(d, t) * r ** (d - 1)
    # d/dR of (2 pi)^{d/2} (rR)^{-nu} J_nu(rR) = -(2 pi)^{d/2} r (rR)^{-nu} J_{nu+1}(rR)
    with np.errstate(invalid="ignore", divide="ignore"):
        tt = np.where(t > 0, t, 1.0)
        dK = -(2 * np.pi) ** (d / 2) * r * tt ** (-nu) * sc.jv(nu + 1, tt)
    dK = np.where(t > 0, dK, 0.0) * r ** (d - 1)
    return r, wr, R, wR * unit_sphere_area(d) * R ** (d - 1), K, dK


def _line_block(nodes: int, x_max: float, plane_nodes: int, extent: float):
    x, wx = gauss_legendre(nodes, -x_max, x_max)
    X, wX = gauss_legendre(plane_nodes, -extent, extent)
    K = np.exp(-1j * np.outer(X, x))
    return x, wx, X, wX, K, -1j * x[None, :] * K


def _transform3(U, K1, K2, K3):
    """sum_{abc} K1[A,a] K2[B,b] K3[C,c] U[a,b,c]."""
    V = np.tensordot(K1, U, axes=(1, 0))
    V = np.tensordot(K2, V, axes=(1, 1)).transpose(1, 0, 2)
    return np.tensordot(V, K3, axes=(2, 1))


def _solution_bump(f) -> BlockBump:
    bump = getattr(f.cone_data, "meta", None) if hasattr(f, "cone_data") else getattr(f, "meta", None)
    if not isinstance(bump, BlockBump):
        raise PreconditionError("Cauchy data need block-bump cone data supported away from zeta_i = 0")
    return bump


def cauchy_data(f, i: int, grid: HyperplaneGrid = HyperplaneGrid(), gradient: bool = False) -> CauchyData:
    """f_+-|_{z_i=0} and d f_+-/dz_i |_{z_i=0} on the hyperplane grid.

    With zeta_i = +-sqrt(Q^(i)) on the two sheets,
      f_+-|_0 = (2 pi)^{-n} int phi_+- / (2 sqrt Q^(i)) e^{-i zhat.zetahat} dzetahat,
      d_i f_+-|_0 = -+(i/2) (2 pi)^{-n} int phi_+- e^{-i zhat.zetahat} dzetahat.
    The hyperplane is split into a radial block over the rest of zeta',
    a radial block over the rest of zeta'' and one line, so each integral
    is a product of Hankel-type transforms.
    """
    bump = _solution_bump(f)
    sig = bump.sig
    d_r, d_rho = _chart(sig, i)
    if bump.leak() > 1e-8:
        raise PreconditionError("cone data do not vanish near zeta_i = 0")
    smax = bump.s_range[1]
    g = grid
    r, wr, R, WR, Kr, dKr = _radial_block(d_r, g.data_nodes, smax, g.plane_nodes, g.plane_extent)
    rho, wrho, P, WP, Krho, dKrho = _radial_block(d_rho, g.data_nodes, smax, g.plane_nodes, g.plane_extent)
    x, wx, X, WX, Kx, dKx = _line_block(g.data_nodes, smax, g.plane_nodes, g.plane_extent)
    rr, pp, xx = np.meshgrid(r, rho, x, indexing="ij")
    wdata = wr[:, None, None] * wrho[None, :, None] * wx[None, None, :]
    norm = (2 * np.pi) ** (-sig.n)
    out = {}
    grad = 0.0
    for sign, tag in ((1, "plus"), (-1, "minus")):
        phi, root = _chart_values(bump, i, rr, pp, xx, sign)
        U = norm * wdata * phi / (2 * root)
        V = norm * wdata * phi * (-sign * 0.5j)
        out[f"f_{tag}"] = _transform3(U, Kr, Krho, Kx)
        out[f"df_{tag}"] = _transform3(V, Kr, Krho, Kx)
        if gradient:
            out[f"gR_{tag}"] = _transform3(U, dKr, Krho, Kx)
            out[f"gP_{tag}"] = _transform3(U, Kr, dKrho, Kx)
            out[f"gX_{tag}"] = _transform3(U, Kr, Krho, dKx)
    if gradient:
        grad = sum(np.abs(out[f"g{c}_plus"] + out[f"g{c}_minus"]) ** 2 for c in "RPX")
    W = WR[:, None, None] * WP[None, :, None] * WX[None, None, :]
    return CauchyData(i, R, P, X, W, out["f_plus"], out["f_minus"], out["df_plus"], out["df_minus"],
                      grad if gradient else None)


def split_pm(f: FlatSolution, i: int) -> tuple[FlatSolution, FlatSolution]:
    """f_+ and f_- from the cone data cut by the sign of zeta_i."""
    sig = f.sig
    bump = _solution_bump(f)
    col = i - 1
    if f.cone_data.separable:
        out = []
        for sign in (1, -1):
            terms = []
            for A, B in f.cone_data.terms:
                if col < sig.p - 1:
                    A2 = lambda s, w, A=A, sign=sign: A(s, w) * (sign * w[..., col] > 0)
                    terms.append((A2, B))
                else:
                    c2 = col - (sig.p - 1)
                    B2 = lambda s, w, B=B, sign=sign: B(s, w) * (sign * w[..., c2] > 0)
                    terms.append((A, B2))
            out.append(FlatSolution(sig, ConeFunction(sig, terms=tuple(terms), meta=bump), f.rule))
        return out[0], out[1]
    cut = lambda sign: ConeFunction(sig, func=lambda z: f.cone_data(z) * (sign * z[..., col] > 0), meta=bump)
    return FlatSolution(sig, cut(1), f.rule), FlatSolution(sig, cut(-1), f.rule)


@dataclass(frozen=True)
class WResult:
    value: float
    imag_residue: float


def inner_W(f, i: int, grid: HyperplaneGrid = HyperplaneGrid()) -> WResult:
    """(1/i) int (f_+ conj(d_i f_+) - f_- conj(d_i f_-)) over z_i = 0."""
    cd = cauchy_data(f, i, grid)
    total = np.sum(cd.weights * (cd.f_plus * np.conj(cd.df_plus) - cd.f_minus * np.conj(cd.df_minus))) / 1j
    return WResult(float(total.real), float(abs(total.imag)))


# ---------------------------------------------------------------------------
# Conserved quantities


def conserved_quantity(sig: Signature, rule: ConeRule, phi: ConeFunction, j: int, t: float = 0.0) -> float:
    """E_j = (2 pi)^{-n} int_C |zeta_j| |phi|^2 dmu for the solution translated by t along z_j."""
    col = j - 1
    shifted = phi.times_plane_wave(t * np.eye(sig.n)[col]) if t else phi
    fs = shifted.factor_samples(rule)
    s = rule.radial.nodes[:, None]
    if col < sig.p - 1:
        weight = (np.abs(s * rule.sphere1.nodes[None, :, col]), None)
    else:
        weight = (None, np.abs(s * rule.sphere2.nodes[None, :, col - sig.p + 1]))
    terms = []
    for a, b in fs:
        for c, d in fs:
            x, y = a * np.conj(c), b * np.conj(d)
            if weight[0] is not None:
                x = x * weight[0]
            else:
                y = y * weight[1]
            terms.append((x, y))
    return float(cone_integrate_factored(rule, terms).real) / (2 * np.pi) ** sig.n


def time_axis(sig: Signature) -> int:
    """The axis of the one-dimensional block when q = 2 or p = 2."""
    if sig.q == 2:
        return sig.n
    if sig.p == 2:
        return 1
    raise PreconditionError("energy is defined for q = 2 or p = 2 only")


def energy_position(f, grid: HyperplaneGrid = HyperplaneGrid()) -> float:
    """1/2 int (|d_t u|^2 + |grad u|^2) on the slice t = 0."""
    sig = _solution_bump(f).sig
    cd = cauchy_data(f, time_axis(sig), grid, gradient=True)
    return float(0.5 * np.sum(cd.weights * (np.abs(cd.normal_derivative) ** 2 + cd.grad_sq)))


def energy_cone(sig: Signature, rule: ConeRule, phi: ConeFunction) -> float:
    """(2 pi)^{-n-1}/2 int_C |zeta_t| |phi|^2 dmu, i.e. E_t / (4 pi)."""
    return conserved_quantity(sig, rule, phi, time_axis(sig)) / (4 * np.pi)

"""Quadrature rules: spheres, the half line, boxes, and the null cone.

Cone integrals use the polar form

    int_C phi dmu = 1/2 int_0^inf int_{S^{p-2}} int_{S^{q-2}} phi(s w, s w') s^{n-3} ds dw dw'

so a cone rule is a radial rule times two sphere rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc

from .geometry import Signature
from .specfun import unit_sphere_area


class QuadratureError(ArithmeticError):
    pass


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


# ---------------------------------------------------------------------------
# Spheres


@dataclass(frozen=True)
class SphereRule:
    """Product rule on S^dim embedded in R^{dim+1}."""
    dim: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    degree: int = 0

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, values) -> complex:
        return np.sum(np.asarray(values) * self.weights, axis=-1)


def sphere_rule(dim: int, n_polar: int = 16, n_first: int | None = None, axis: int = 0) -> SphereRule:
    """Gauss-Jacobi in each polar cosine and the trapezoid rule in the azimuth.

    With n_polar polar nodes and 2*n_polar azimuthal nodes the rule is exact
    for polynomials of degree <= 2*n_polar - 1.  `n_first` overrides the node
    count of the outermost polar cosine, and `axis` says which coordinate
    that cosine is (useful for integrands concentrated in one coordinate).
    S^0 is the pair {+1, -1} with unit weights.
    """
    if dim < 0:
        raise ValueError("sphere dimension must be >= 0")
    if dim == 0:
        return SphereRule(0, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]), degree=10**9)
    if dim == 1:
        m = 2 * (n_first or n_polar)
        th = 2 * np.pi * np.arange(m) / m
        nodes = np.stack([np.cos(th), np.sin(th)], axis=1)
        return SphereRule(1, _move_axis(nodes, axis), np.full(m, 2 * np.pi / m), degree=m - 1)
    # S^dim: first coordinate t with density (1-t^2)^{(dim-2)/2}, rest on S^{dim-1}
    k = n_first or n_polar
    alpha = (dim - 2) / 2.0
    if alpha == 0:
        t, wt = np.polynomial.legendre.leggauss(k)
    else:
        t, wt = sc.roots_jacobi(k, alpha, alpha)
    sub = sphere_rule(dim - 1, n_polar)
    r = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [np.repeat(t, sub.size)[:, None], (r[:, None, None] * sub.nodes[None]).reshape(-1, dim)], axis=1)
    weights = (wt[:, None] * sub.weights[None]).ravel()
    return SphereRule(dim, _move_axis(nodes, axis), weights, degree=min(2 * min(k, n_polar) - 1, sub.degree))


def _move_axis(nodes: np.ndarray, axis: int) -> np.ndarray:
    if axis % nodes.shape[1] == 0:
        return nodes
    return np.ascontiguousarray(np.moveaxis(nodes, 1, 0)[np.roll(np.arange(nodes.shape[1]), axis)].T)


# ---------------------------------------------------------------------------
# Half line


@dataclass(frozen=True)
class RadialRule:
    """Gauss-Legendre in u = log s on [log s_min, log s_max]."""
    s_min: float
    s_max: float
    n: int
    nodes: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if not (0 < self.s_min < self.s_max):
            raise ValueError("need 0 < s_min < s_max")
        u, w = gauss_legendre(self.n, math.log(self.s_min), math.log(self.s_max))
        s = np.exp(u)
        object.__setattr__(self, "nodes", s)
        object.__setattr__(self, "weights", w * s)

    def refined(self) -> "RadialRule":
        return RadialRule(self.s_min, self.s_max, 2 * self.n)


def radial_rule(n: int = 64, s_min: float = 1e-6, s_max: float = 20.0) -> RadialRule:
    return RadialRule(s_min, s_max, n)


# ---------------------------------------------------------------------------
# Cone


@dataclass(frozen=True)
class ConeRule:
    sig: Signature
    radial: RadialRule
    sphere1: SphereRule  # S^{p-2}
    sphere2: SphereRule  # S^{q-2}
    n_polar: int = 16

    @property
    def shape(self):
        return (self.radial.n, self.sphere1.size, self.sphere2.size)

    @property
    def radial_weights(self) -> np.ndarray:
        """Radial weights including the 1/2 s^{n-3} density."""
        s = self.radial.nodes
        return 0.5 * s ** (self.sig.n - 3) * self.radial.weights

    def points_at(self, k: int) -> np.ndarray:
        """Cone points for radial node k, shape (N1, N2, n)."""
        s = self.radial.nodes[k]
        a = np.broadcast_to(s * self.sphere1.nodes[:, None, :], self.shape[1:] + (self.sig.p - 1,))
        b = np.broadcast_to(s * self.sphere2.nodes[None, :, :], self.shape[1:] + (self.sig.q - 1,))
        return np.concatenate([a, b], axis=-1)

    def refined(self) -> "ConeRule":
        return cone_rule(self.sig, 2 * self.radial.n, 2 * self.n_polar,
                         self.radial.s_min, self.radial.s_max)

    def coarsened(self) -> "ConeRule":
        return cone_rule(self.sig, max(4, self.radial.n // 2), max(2, self.n_polar // 2),
                         self.radial.s_min, self.radial.s_max)

    def with_radial(self, n=None, s_min=None, s_max=None) -> "ConeRule":
        r = self.radial
        return replace(self, radial=RadialRule(s_min or r.s_min, s_max or r.s_max, n or r.n))


def cone_rule(sig: Signature, n_radial: int = 64, n_polar: int = 16,
              s_min: float = 1e-6, s_max: float = 20.0) -> ConeRule:
    return ConeRule(sig, RadialRule(s_min, s_max, n_radial), sphere_rule(sig.p - 2, n_polar),
                    sphere_rule(sig.q - 2, n_polar), n_polar)


def cone_volume_factor(sig: Signature) -> float:
    """vol(S^{p-2}) vol(S^{q-2}) with vol(S^0) = 2."""
    return unit_sphere_area(sig.p - 1) * unit_sphere_area(sig.q - 1)


def _samples(rule: ConeRule, f) -> np.ndarray:
    if callable(f) and not isinstance(f, np.ndarray):
        if hasattr(f, "samples"):
            return f.samples(rule)
        out = None
        for k in range(rule.radial.n):
            v = np.asarray(f(rule.points_at(k)))
            if out is None:
                out = np.empty(rule.shape, dtype=v.dtype)
            out[k] = v
        return out
    v = np.asarray(f)
    if v.shape != rule.shape:
        raise ValueError(f"samples have shape {v.shape}, rule expects {rule.shape}")
    return v


def _check_finite(rule: ConeRule, v: np.ndarray):
    bad = ~np.isfinite(v)
    if np.any(bad):
        k, i, j = np.argwhere(bad)[0]
        zeta = rule.points_at(k)[i, j]
        raise QuadratureError(f"non-finite integrand at s={rule.radial.nodes[k]:.6g}, zeta={zeta}")


def cone_integrate(rule: ConeRule, f) -> complex:
    """Integral over the cone of a callable on cone points (..., n) or of precomputed samples.

    Callables are evaluated one radial shell at a time, so the full sample
    array is never held in memory.
    """
    w1, w2 = rule.sphere1.weights, rule.sphere2.weights
    if callable(f) and not isinstance(f, np.ndarray) and not hasattr(f, "samples"):
        inner = np.empty(rule.radial.n, dtype=complex)
        for k in range(rule.radial.n):
            v = np.asarray(f(rule.points_at(k)))
            if not np.all(np.isfinite(v)):
                i, j = np.argwhere(~np.isfinite(v))[0]
                raise QuadratureError(f"non-finite integrand at s={rule.radial.nodes[k]:.6g}, "
                                      f"zeta={rule.points_at(k)[i, j]}")
            inner[k] = w1 @ v @ w2
    else:
        v = _samples(rule, f)
        _check_finite(rule, v)
        inner = np.einsum("kij,i,j->k", v, w1, w2)
    total = np.sum(inner * rule.radial_weights)
    return total.real if np.isrealobj(total) or total.imag == 0 else total


def cone_integrate_with_error(rule: ConeRule, f) -> tuple[complex, float]:
    """Value on the refined rule and |refined - base| as an error estimate."""
    base = cone_integrate(rule, f)
    fine = cone_integrate(rule.refined(), f)
    return fine, float(abs(fine - base))


def cone_integrate_factored(rule: ConeRule, terms) -> complex:
    """Integral of sum_t A_t(s, w) B_t(s, w') given samples (A (R, N1), B (R, N2)) per term."""
    total = 0.0
    w1, w2 = rule.sphere1.weights, rule.sphere2.weights
    for A, B in terms:
        total = total + np.sum(rule.radial_weights * (A @ w1) * (B @ w2))
    return total


# ---------------------------------------------------------------------------
# Functions on R^n given as sums of separable products


@dataclass(frozen=True)
class Factor1D:
    """One-dimensional factor g(x) on a support interval, with an optional closed-form Fourier transform."""
    func: Callable = field(repr=False)
    lo: float
    hi: float
    fourier: Callable | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SeparableFunction:
    """sum_t c_t prod_j g_{t,j}(z_j), compactly supported in a box."""
    n: int
    terms: tuple  # tuple of (coef, tuple of Factor1D)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = 0.0
        for c, facs in self.terms:
            v = c
            for j, g in enumerate(facs):
                v = v * g.func(z[..., j])
            out = out + v
        return out

    @property
    def box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.min([[g.lo for g in facs] for _, facs in self.terms], axis=0)
        hi = np.max([[g.hi for g in facs] for _, facs in self.terms], axis=0)
        return lo, hi

    def conj(self) -> "SeparableFunction":
        terms = tuple(
            (np.conj(c), tuple(Factor1D(lambda x, f=g.func: np.conj(f(x)), g.lo, g.hi) for g in facs))
            for c, facs in self.terms)
        return SeparableFunction(self.n, terms)


def fourier_1d(g: Factor1D, xi, nodes: int = 96) -> np.ndarray:
    """int g(x) e^{i x xi} dx by Gauss-Legendre on the support interval."""
    x, w = gauss_legendre(nodes, g.lo, g.hi)
    xi = np.asarray(xi, dtype=float)
    return np.exp(1j * xi[..., None] * x) @ (w * g.func(x))


def fourier_quad(sig: Signature, phi, zeta, nodes: int = 96) -> np.ndarray:
    """(F phi)(zeta) = int phi(z) e^{+i z.zeta} dz, with no 2 pi prefactor.

    Separable inputs are transformed coordinate by coordinate; a general
    callable needs a `box` attribute and is integrated by a tensor rule.
    """
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape[-1] != sig.n:
        raise ValueError("zeta has wrong dimension")
    if isinstance(phi, SeparableFunction):
        out = 0.0
        for c, facs in phi.terms:
            v = c
            for j, g in enumerate(facs):
                v = v * fourier_1d(g, zeta[..., j], nodes)
            out = out + v
        return np.asarray(out, dtype=complex)
    lo, hi = phi.box
    grids = [gauss_legendre(nodes, lo[j], hi[j]) for j in range(sig.n)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, sig.n)
    w = np.ones(1)
    for g in grids:
        w = np.multiply.outer(w, g[1])
    vals = phi(pts) * w.ravel()
    flat = zeta.reshape(-1, sig.n)
    out = np.array([np.sum(vals * np.exp(1j * pts @ zz)) for zz in flat])
    return out.reshape(zeta.shape[:-1])


def box_integrate(f, lo, hi, nodes: int = 24) -> complex:
    """Tensor Gauss-Legendre integral of a callable over a box (small dimensions only)."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    grids = [gauss_legendre(nodes, lo[j], hi[j]) for j in range(lo.size)]
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    pts = np.stack(mesh, axis=-1)
    w = np.ones(())
    for g in grids:
        w = np.multiply.outer(w, g[1])
    return np.sum(f(pts) * w)


# ---------------------------------------------------------------------------
# Synthesis of solutions from cone data


def _phase_factors(rule: ConeRule, z: np.ndarray):
    """exp(-i s z'.w) * w1 and exp(-i s z''.w') * w2 for a batch of points, shapes (Z, R, N1), (Z, R, N2)."""
    sig = rule.sig
    zp, zpp = z[:, : sig.p - 1], z[:, sig.p - 1:]
    s = rule.radial.nodes
    A = np.exp(-1j * s[None, :, None] * (zp @ rule.sphere1.nodes.T)[:, None, :]) * rule.sphere1.weights
    B = np.exp(-1j * s[None, :, None] * (zpp @ rule.sphere2.nodes.T)[:, None, :]) * rule.sphere2.weights
    return A, B


def inverse_synthesis(rule: ConeRule, phi, z, batch: int = 64) -> np.ndarray:
    """f(z) = (2 pi)^{-n} int_C phi(zeta) e^{-i z.zeta} dmu(zeta) at one point or a batch of points.

    Cone data exposing `factor_samples(rule)` (a list of (A, B) sample pairs)
    are contracted factor by factor, which keeps the cost linear in the
    sphere sizes.
    """
    sig = rule.sig
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    zz = z.reshape(-1, sig.n)
    rw = rule.radial_weights
    factored = getattr(phi, "factor_samples", None)
    terms = factored(rule) if factored is not None else None
    out = np.zeros(len(zz), dtype=complex)
    if terms is None:
        # one radial shell at a time, all probe points together
        A, B = _phase_factors(rule, zz)
        for k in range(rule.radial.n):
            v = np.asarray(phi(rule.points_at(k)))
            if not np.all(np.isfinite(v)):
                raise QuadratureError(f"non-finite cone data at s={rule.radial.nodes[k]:.6g}")
            out += rw[k] * np.einsum("zi,ij,zj->z", A[:, k], v, B[:, k])
    else:
        for start in range(0, len(zz), batch):
            chunk = zz[start: start + batch]
            A, B = _phase_factors(rule, chunk)
            acc = 0.0
            for Ta, Tb in terms:
                acc = acc + np.einsum("zki,ki->zk", A, Ta) * np.einsum("zkj,kj->zk", B, Tb)
            out[start: start + batch] = acc @ rw
    out *= (2 * np.pi) ** (-sig.n)
    return out[0] if single else out.reshape(z.shape[:-1])

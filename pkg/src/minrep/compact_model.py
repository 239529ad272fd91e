"""The compact picture on M = S^{p-1} x S^{q-1}.

A point of M is u = (x, y) with x in S^{p-1} (coordinates 0..p-1) and
y in S^{q-1} (coordinates p..p+q-1).  Functions are either polynomials on
R^{p+q} restricted to M, on which the sphere Laplacians act exactly, or
plain callables.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sc

from .geometry import (GroupElement, Signature, flat_action, iota, mu, psi_inv, psi_map, tau)
from .specfun import constants, delta_sign, eps_sign, generating_F0, gauss_2f1, unit_sphere_area


class BandLimitError(ValueError):
    pass


class EquatorError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Functions on M


def _key(e) -> tuple:
    return tuple(int(v) for v in e)


@dataclass(frozen=True)
class CompactFunction:
    """A function on M: a polynomial {exponent: coef} on R^{p+q}, or a callable on points u."""
    sig: Signature
    poly: dict | None = None
    func: Callable | None = field(default=None, repr=False)
    parity: int | None = None

    def __post_init__(self):
        if (self.poly is None) == (self.func is None):
            raise ValueError("give exactly one of poly or func")
        if self.poly is not None:
            clean = {_key(k): complex(v) for k, v in self.poly.items() if v != 0}
            object.__setattr__(self, "poly", clean)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.func is not None:
            return self.func(u)
        out = np.zeros(u.shape[:-1], dtype=complex)
        for k, c in self.poly.items():
            out = out + c * np.prod(u ** np.array(k), axis=-1)
        return out

    def parity_residual(self, u) -> float:
        eps = self.parity if self.parity is not None else 1
        u = np.asarray(u, dtype=float)
        return float(np.max(np.abs(self(-u) - eps * self(u))))

    def _poly_op(self, fn) -> "CompactFunction":
        if self.poly is None:
            raise BandLimitError("operator needs the polynomial representation")
        out: dict = {}
        for k, c in self.poly.items():
            for k2, c2 in fn(k).items():
                out[k2] = out.get(k2, 0) + c * c2
        return CompactFunction(self.sig, poly=out, parity=self.parity)

    def __add__(self, other):
        if self.poly is not None and other.poly is not None:
            out = dict(self.poly)
            for k, v in other.poly.items():
                out[k] = out.get(k, 0) + v
            return CompactFunction(self.sig, poly=out, parity=self.parity)
        return CompactFunction(self.sig, func=lambda u: self(u) + other(u), parity=self.parity)

    def scale(self, c):
        if self.poly is not None:
            return CompactFunction(self.sig, poly={k: c * v for k, v in self.poly.items()}, parity=self.parity)
        return CompactFunction(self.sig, func=lambda u: c * self(u), parity=self.parity)


def _block_laplacian(k: tuple, lo: int, hi: int) -> dict:
    """Euclidean Laplacian in coordinates lo..hi-1 of a monomial."""
    out = {}
    for j in range(lo, hi):
        if k[j] >= 2:
            kk = list(k)
            kk[j] -= 2
            out[tuple(kk)] = out.get(tuple(kk), 0) + k[j] * (k[j] - 1)
    return out


def sphere_laplacian(F: CompactFunction, block: int) -> CompactFunction:
    """Laplace-Beltrami operator of S^{p-1} (block 0) or S^{q-1} (block 1).

    For h homogeneous of degree k on R^d, Delta_S h = (Delta h - k(k+d-2) h) on the sphere.
    """
    p, q = F.sig.p, F.sig.q
    lo, hi = (0, p) if block == 0 else (p, p + q)
    d = hi - lo

    def fn(k):
        deg = sum(k[lo:hi])
        out = _block_laplacian(k, lo, hi)
        out[k] = out.get(k, 0) - deg * (deg + d - 2)
        return out
    return F._poly_op(fn)


def yamabe_M(sig: Signature, F: CompactFunction) -> CompactFunction:
    """Delta_{S^{p-1}} - Delta_{S^{q-1}} - ((p-2)/2)^2 + ((q-2)/2)^2, applied exactly."""
    if F.poly is None:
        raise BandLimitError("F must be given as a polynomial (band-limited)")
    shift = -((sig.p - 2) / 2) ** 2 + ((sig.q - 2) / 2) ** 2
    return sphere_laplacian(F, 0) + sphere_laplacian(F, 1).scale(-1) + F.scale(shift)


def random_polynomial(sig: Signature, rng: np.random.Generator, degree: int = 3, n_terms: int = 8,
                      parity: int | None = None) -> CompactFunction:
    d = sig.p + sig.q
    poly = {}
    while len(poly) < n_terms:
        k = [0] * d
        deg = int(rng.integers(0, degree + 1))
        if parity is not None and (-1) ** deg != parity:
            continue
        for _ in range(deg):
            k[int(rng.integers(0, d))] += 1
        poly[tuple(k)] = rng.normal()
    return CompactFunction(sig, poly=poly, parity=parity)


def polynomial_F0(sig: Signature) -> CompactFunction:
    """The generating function F0 as a polynomial in y_last.

    Values come from the hypergeometric evaluator and are interpolated at
    Chebyshev points by a polynomial of degree (p-q)/2; the interpolation
    error is returned as part of the fit check in `F0_fit_residual`.
    """
    deg = (sig.p - sig.q) // 2
    t = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    u = np.zeros((deg + 1, sig.dim))
    u[:, 0] = 1.0
    u[:, -1] = t
    u[:, sig.p] = np.sqrt(1 - t * t) if sig.q > 1 else 0.0
    vals = generating_F0(sig, u)
    coef = np.polynomial.polynomial.polyfit(t, vals, deg)
    poly = {}
    for j, c in enumerate(coef):
        k = [0] * sig.dim
        k[-1] = j
        poly[tuple(k)] = c
    return CompactFunction(sig, poly=poly, parity=eps_sign(sig))


def F0_fit_residual(sig: Signature, n_check: int = 41) -> float:
    F = polynomial_F0(sig)
    t = np.linspace(-1, 1, n_check)
    u = np.zeros((n_check, sig.dim))
    u[:, 0] = 1.0
    u[:, -1] = t
    u[:, sig.p] = np.sqrt(1 - t * t)
    return float(np.max(np.abs(F(u) - generating_F0(sig, u))))


def random_points_M(sig: Signature, rng: np.random.Generator, m: int) -> np.ndarray:
    x = rng.normal(size=(m, sig.p))
    y = rng.normal(size=(m, sig.q))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return np.concatenate([x, y], axis=1)


# ---------------------------------------------------------------------------
# Twisted pullbacks


def twisted_pullback(sig: Signature, lam: float, F) -> Callable:
    """Psi*_lam F: z -> tau(z)^{-lam} F(Psi(z))."""
    return lambda z: tau(sig, np.asarray(z, dtype=float)) ** (-lam) * F(psi_map(sig, z))


def twisted_pullback_inv(sig: Signature, lam: float, eps: int, f: Callable) -> CompactFunction:
    """F(u) = mu(u)^{-lam} f(Psi^{-1}(u)) on M_+, extended to M_- by F(-u) = eps F(u)."""
    def F(u):
        u = np.asarray(u, dtype=float)
        m = mu(u)
        if np.any(np.abs(m) < 1e-14):
            raise EquatorError("evaluation on the equator u_0 + u_{n+1} = 0")
        sgn = np.sign(m)
        uu = u * sgn[..., None]
        val = np.abs(m) ** (-lam) * f(psi_inv(sig, uu))
        return np.where(sgn > 0, val, eps * val)
    return CompactFunction(sig, func=F, parity=eps)


def compact_action(sig: Signature, lam: float, eps: int, g: GroupElement, F) -> Callable:
    """(g F)(u) = nu(v)^{-lam} F(v / nu(v)) with v = g^{-1} u and nu(v) = |v'|."""
    ginv = g.inverse(sig).mat

    def out(u):
        v = np.einsum("ij,...j->...i", ginv, np.asarray(u, dtype=float))
        nv = np.linalg.norm(v[..., : sig.p], axis=-1)
        return nv ** (-lam) * F(v / nv[..., None])
    return out


def flat_group_action(sig: Signature, lam: float, eps: int, g: GroupElement, f: Callable) -> Callable:
    """(g f)(z) = |m|^{-lam} f(L_{g^{-1}} z), times eps when m < 0, where m = mu(g^{-1} iota(z))."""
    ginv = g.inverse(sig)

    def out(z):
        w, m = flat_action(sig, ginv, z)
        val = np.abs(m) ** (-lam) * f(w)
        return np.where(m > 0, val, eps * val)
    return out


# ---------------------------------------------------------------------------
# Zonal K-type analysis


def _zonal_rule(d: int, n: int):
    """Nodes and weights for int_{S^{d-1}} g(x_axis) dx: Gauss-Jacobi with (1-t^2)^{(d-3)/2}."""
    alpha = (d - 3) / 2
    if d == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    t, w = sc.roots_jacobi(n, alpha, alpha)
    return t, w * unit_sphere_area(d - 1)


def gegenbauer(d: int, k: int, t):
    """Zonal harmonic profile of degree k on S^{d-1}: C_k^{(d-2)/2}, or T_k when d = 2."""
    if d == 2:
        return sc.eval_chebyt(k, t)
    return sc.eval_gegenbauer(k, (d - 2) / 2, t)


def zonal_point(sig: Signature, x0, yl) -> np.ndarray:
    """A point of M with first coordinate x0 and last coordinate yl."""
    x0, yl = np.broadcast_arrays(np.asarray(x0, float), np.asarray(yl, float))
    u = np.zeros(x0.shape + (sig.dim,))
    u[..., 0] = x0
    u[..., 1] = np.sqrt(np.clip(1 - x0 ** 2, 0, None))
    u[..., -1] = yl
    u[..., sig.p] = np.sqrt(np.clip(1 - yl ** 2, 0, None))
    return u


@dataclass(frozen=True)
class KTypeExpansion:
    """Coefficients of a zonal function G(x_0, y_last) in the products of zonal harmonics.

    coeffs[(a, b)] multiplies gegenbauer(p, a, x_0) * gegenbauer(q, b, y_last);
    norms2[(a, b)] is the squared L^2(M) norm of that product.
    """
    sig: Signature
    coeffs: dict
    norms2: dict
    residual: float = 0.0

    def component_norm2(self, a, b) -> float:
        return float(abs(self.coeffs.get((a, b), 0)) ** 2 * self.norms2[(a, b)])

    def admissible(self, a, b) -> bool:
        return a >= 0 and b >= 0 and 2 * a + self.sig.p == 2 * b + self.sig.q

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "b", "component_norm"])
            for (a, b) in sorted(self.coeffs):
                w.writerow([a, b, f"{math.sqrt(self.component_norm2(a, b)):.12g}"])


def zonal_expansion(sig: Signature, F, a_max: int = 6, nodes: int = 48) -> KTypeExpansion:
    """Project a function of (x_0, y_last) on products of zonal harmonics up to degree a_max in each factor.

    The node counts of the two factors differ by one so no node pair lies on
    the equator x_0 + y_last = 0 when p = q.
    """
    p, q = sig.p, sig.q
    tx, wx = _zonal_rule(p, nodes)
    ty, wy = _zonal_rule(q, nodes + 1)
    X, Y = np.meshgrid(tx, ty, indexing="ij")
    G = F(zonal_point(sig, X, Y))
    coeffs, norms2 = {}, {}
    recon = np.zeros_like(G, dtype=complex)
    b_max = a_max + max(0, (p - q) // 2)
    for a in range(a_max + 1):
        ca = gegenbauer(p, a, tx)
        na = np.sum(wx * ca * ca)
        for b in range(b_max + 1):
            cb = gegenbauer(q, b, ty)
            nb = np.sum(wy * cb * cb)
            c = (wx * ca) @ G @ (wy * cb) / (na * nb)
            coeffs[(a, b)] = c
            norms2[(a, b)] = float(na * nb)
            recon += c * np.outer(ca, cb)
    scale = np.sum(wx[:, None] * wy[None, :] * np.abs(G) ** 2)
    err = np.sum(wx[:, None] * wy[None, :] * np.abs(G - recon) ** 2)
    return KTypeExpansion(sig, coeffs, norms2, float(math.sqrt(err / max(scale, 1e-300))))


def ktype_weight(sig: Signature, a: int, side: str = "x") -> float:
    """Weight of the K-type (a, b) in the invariant norm: a + (p-2)/2 (equal to b + (q-2)/2)."""
    if side == "x":
        return a + (sig.p - 2) / 2
    return a + (sig.q - 2) / 2


def inner_M(sig: Signature, E1: KTypeExpansion, E2: KTypeExpansion, side: str = "x",
            tol: float = 1e-8, weight: Callable | None = None) -> complex:
    """sum over admissible (a, b) of weight * <F1_{a,b}, F2_{a,b}>_{L^2(M)}.

    Components at inadmissible indices must vanish to `tol` (relative);
    otherwise the inputs are not in the kernel of the Yamabe operator.
    `weight(a, b)` replaces the default K-type weight when given.
    """
    scale = max(sum(E1.component_norm2(*k) for k in E1.coeffs), 1e-300)
    total = 0.0
    for (a, b), c1 in E1.coeffs.items():
        c2 = E2.coeffs.get((a, b), 0)
        if not E1.admissible(a, b):
            if E1.component_norm2(a, b) > tol * scale:
                raise ValueError(f"component at inadmissible K-type ({a}, {b})")
            continue
        w = weight(a, b) if weight is not None else ktype_weight(sig, a if side == "x" else b, side)
        total = total + w * c1 * np.conj(c2) * E1.norms2[(a, b)]
    return total


def pseudo_diff_weight(sig: Signature, a: int) -> float:
    """(1/4 - Yamabe_{S^{p-1}})^{1/4} applied twice to H^a gives a + (p-2)/2."""
    lam = -a * (a + sig.p - 2) - ((sig.p - 2) / 2) ** 2 + 0.25
    return math.sqrt(math.sqrt(0.25 - lam)) ** 2


# ---------------------------------------------------------------------------
# The Knapp-Stein pairing through the Green transform


def knapp_stein_pair(sig: Signature, rule, phi1, phi2, z_nodes: int = 48) -> complex:
    """(F1, F2)_A = delta * 2 int (A psi1)(z) conj(psi2(z)) dz with A = 2 c2 S and psi_k = phi_k / c2.

    The vectors F_k are those whose Green transforms are f_k = S phi_k.  The
    integral is a tensor Gauss-Legendre sum over the box of psi2 against the
    synthesized S psi1, evaluated in factorized order.
    """
    from .cone_model import l2c_inner
    from .flat_model import cone_data
    C = constants(sig)
    # int (S phi1) conj(phi2) dz = (2 pi)^{-n} <F phi1, F phi2>_C with phi2 on the z-grid
    left = cone_data(sig, phi1, "quadrature")
    right = cone_data(sig, phi2, "quadrature", nodes=z_nodes)
    s_pair = l2c_inner(rule, left, right) / (2 * math.pi) ** sig.n
    return complex(C.delta * 2 * 2 * C.c2 * s_pair / C.c2 ** 2)


# ---------------------------------------------------------------------------
# The kernel psi_{nu, eps} and its boundary-value form at nu = 1 - n/2


def kernel_psi(nu: float, eps: int, y) -> np.ndarray:
    """|y|^nu chi_eps(sgn y) / Gamma((2 nu + 3 - eps)/4), with chi_+ = 1 and chi_- = sgn."""
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise ValueError("kernel evaluated at y = 0")
    chi = np.ones_like(y) if eps == 1 else np.sign(y)
    return np.abs(y) ** nu * chi * sc.rgamma((2 * nu + 3 - eps) / 4)


def boundary_value_form(sig: Signature, y) -> np.ndarray:
    """delta Gamma((n-1+eps)/4) / (2 pi i) * (h - conj h), h = e^{i pi (q-1)/2} (y + i0)^{1-n/2}."""
    y = np.asarray(y, dtype=float)
    n, e, d = sig.n, eps_sign(sig), delta_sign(sig)
    a = 1 - n / 2
    h = np.exp(1j * np.pi * (sig.q - 1) / 2) * np.abs(y) ** a * np.where(y > 0, 1.0, np.exp(1j * np.pi * a))
    return (d * math.gamma((n - 1 + e) / 4) / (2j * np.pi) * (h - np.conj(h))).real


def kernel_boundary_residual(sig: Signature, y) -> float:
    """max |psi_{1-n/2, eps}(y) - boundary_value_form(y)| off y = 0."""
    lhs = kernel_psi(1 - sig.n / 2, eps_sign(sig), y)
    return float(np.max(np.abs(lhs - boundary_value_form(sig, y))))

"""The L^2 model on the null cone C = {Q(zeta) = 0}.

Cone points are written zeta = (s w, s w') with w in S^{p-2}, w' in S^{q-2}
and s = |zeta'| = |zeta''| the cone radius.  Functions in the Bessel family
use s as their radial variable.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .geometry import (BasisSolver, GroupElement, LieAlgebraElement, Signature, basis_elements)
from .quadrature import ConeRule, cone_integrate, cone_integrate_factored, _samples
from .specfun import bessel_K, eps_sign


class UnsupportedElement(ValueError):
    pass


class DivergenceError(ArithmeticError):
    pass


def cone_polar(sig: Signature, zeta):
    """(s, w, w') for points on (or near) the cone; s is |zeta'|."""
    zeta = np.asarray(zeta, dtype=float)
    a, b = zeta[..., : sig.p - 1], zeta[..., sig.p - 1:]
    s = np.linalg.norm(a, axis=-1)
    sb = np.linalg.norm(b, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = a / s[..., None]
        w2 = b / sb[..., None]
    return s, w, w2


@dataclass(frozen=True)
class ConeFunction:
    """A function on C given as a callable on cone points, or as a sum of products.

    `terms` holds pairs (A, B) with A(s, w) and B(s, w') broadcasting over
    leading axes; the function is sum_t A_t(s, w) B_t(s, w').  Separable data
    make synthesis and inner products cost linear in the sphere sizes.
    """
    sig: Signature
    func: Callable | None = field(default=None, repr=False)
    terms: tuple = field(default=(), repr=False)
    label: str = ""
    meta: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.func is None and not self.terms:
            raise ValueError("ConeFunction needs func or terms")

    @property
    def separable(self) -> bool:
        return self.func is None

    def __call__(self, zeta) -> np.ndarray:
        if self.func is not None:
            return self.func(np.asarray(zeta, dtype=float))
        s, w, w2 = cone_polar(self.sig, zeta)
        return sum(A(s, w) * B(s, w2) for A, B in self.terms)

    def factor_samples(self, rule: ConeRule):
        if not self.separable:
            return None
        s = rule.radial.nodes[:, None]
        w1 = rule.sphere1.nodes[None]
        w2 = rule.sphere2.nodes[None]
        out = []
        for A, B in self.terms:
            a = np.broadcast_to(A(s, w1), rule.shape[:2])
            b = np.broadcast_to(B(s, w2), (rule.shape[0], rule.shape[2]))
            out.append((np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))
        return out

    def samples(self, rule: ConeRule) -> np.ndarray:
        fs = self.factor_samples(rule)
        if fs is not None:
            return sum(a[:, :, None] * b[:, None, :] for a, b in fs)
        out = np.empty(rule.shape, dtype=complex)
        for k in range(rule.radial.n):
            out[k] = self.func(rule.points_at(k))
        return out

    # algebra ----------------------------------------------------------

    def __add__(self, other: "ConeFunction") -> "ConeFunction":
        if self.separable and other.separable:
            return ConeFunction(self.sig, terms=self.terms + other.terms, label=f"{self.label}+{other.label}")
        return ConeFunction(self.sig, func=lambda z: self(z) + other(z), label=f"{self.label}+{other.label}")

    def scaled(self, c: complex) -> "ConeFunction":
        if self.separable:
            terms = tuple((lambda s, w, A=A: c * A(s, w), B) for A, B in self.terms)
            return ConeFunction(self.sig, terms=terms, label=self.label)
        return ConeFunction(self.sig, func=lambda z: c * self(z), label=self.label)

    def conj(self) -> "ConeFunction":
        if self.separable:
            terms = tuple((lambda s, w, A=A: np.conj(A(s, w)), lambda s, w, B=B: np.conj(B(s, w)))
                          for A, B in self.terms)
            return ConeFunction(self.sig, terms=terms, label=f"conj({self.label})")
        return ConeFunction(self.sig, func=lambda z: np.conj(self(z)), label=f"conj({self.label})")

    def times_plane_wave(self, b) -> "ConeFunction":
        """zeta -> e^{i b.zeta} phi(zeta)."""
        b = np.asarray(b, dtype=float)
        b1, b2 = b[: self.sig.p - 1], b[self.sig.p - 1:]
        if self.separable:
            terms = tuple(
                (lambda s, w, A=A: A(s, w) * np.exp(1j * s * (w @ b1)),
                 lambda s, w, B=B: B(s, w) * np.exp(1j * s * (w @ b2)))
                for A, B in self.terms)
            return ConeFunction(self.sig, terms=terms, label=self.label)
        return ConeFunction(self.sig, func=lambda z: np.exp(1j * (z @ b)) * self(z), label=self.label)

    def to_csv(self, rule: ConeRule, path) -> None:
        v = self.samples(rule)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "i", "j", "re", "im"])
            for k, s in enumerate(rule.radial.nodes):
                for i in range(rule.shape[1]):
                    for j in range(rule.shape[2]):
                        w.writerow([f"{s:.17g}", i, j, f"{v[k, i, j].real:.17g}", f"{v[k, i, j].imag:.17g}"])


def radial_function(sig: Signature, g: Callable, label: str = "") -> ConeFunction:
    """phi(zeta) = g(s)."""
    return ConeFunction(sig, terms=((lambda s, w: g(s) + 0.0 * w[..., 0], lambda s, w: 1.0 + 0.0 * w[..., 0]),),
                        label=label)


# ---------------------------------------------------------------------------
# Inner product


def _inner_factored(rule, f: ConeFunction, g: ConeFunction) -> complex:
    F, G = f.factor_samples(rule), g.factor_samples(rule)
    terms = [(a * np.conj(c), b * np.conj(d)) for a, b in F for c, d in G]
    return cone_integrate_factored(rule, terms)


def l2c_inner(rule: ConeRule, f: ConeFunction, g: ConeFunction, check: bool = False,
              rtol: float = 1e-6) -> complex:
    """<f, g> = int_C f conj(g) dmu.

    With check=True the radial rule is doubled and a disagreement beyond
    rtol (relative to the norms) raises DivergenceError.
    """
    def once(r):
        if f.separable and g.separable:
            return _inner_factored(r, f, g)
        return cone_integrate(r, lambda z: f(z) * np.conj(g(z)))
    val = once(rule)
    if check:
        fine = once(rule.with_radial(n=2 * rule.radial.n))
        scale = max(abs(val), abs(fine), 1e-300)
        if not np.isfinite(fine) or abs(fine - val) > rtol * scale:
            raise DivergenceError(f"inner product unstable under node doubling: {val} vs {fine}")
    return val


def l2c_norm(rule: ConeRule, f: ConeFunction, **kw) -> float:
    return float(np.sqrt(max(l2c_inner(rule, f, f, **kw).real, 0.0)))


# ---------------------------------------------------------------------------
# P̄max action


@dataclass(frozen=True)
class PmaxElement:
    kind: str  # "identity", "dilation", "levi", "sign", "translation"
    t: float = 0.0
    m: np.ndarray | None = field(default=None, repr=False)
    a: np.ndarray | None = field(default=None, repr=False)


def classify_pmax(sig: Signature, g: GroupElement, tol: float = 1e-12) -> PmaxElement:
    """Recognize e^{tE}, Levi blocks, m0 = -I and nbar_a among group matrices."""
    G = g.mat
    n1 = sig.n + 1
    eye = np.eye(sig.dim)
    if np.max(np.abs(G - eye)) <= tol:
        return PmaxElement("identity")
    if np.max(np.abs(G + eye)) <= tol:
        return PmaxElement("sign")
    mid = G[1:n1, 1:n1]
    corner = G[np.ix_([0, n1], [0, n1])]
    border = np.concatenate([G[0, 1:n1], G[n1, 1:n1], G[1:n1, 0], G[1:n1, n1]])
    if np.max(np.abs(border)) <= tol:
        if np.max(np.abs(mid - np.eye(sig.n))) <= tol:
            t = float(np.arcsinh(G[0, n1]))
            c, s = np.cosh(t), np.sinh(t)
            if np.max(np.abs(corner - np.array([[c, s], [s, c]]))) <= tol * max(1.0, c):
                return PmaxElement("dilation", t=t)
        if np.max(np.abs(corner - np.eye(2))) <= tol:
            m = mid.copy()
            D = np.diag(sig.eps)
            if np.max(np.abs(m.T @ D @ m - D)) <= 1e-10:
                return PmaxElement("levi", m=m)
    # nbar_a = I + A + A^2/2 with A = sum a_j Nbar_j: column 0 carries a
    if np.max(np.abs(mid - np.eye(sig.n))) <= tol:
        a = G[1:n1, 0]
        from .geometry import nbar
        if np.max(np.abs(nbar(sig, a).mat - G)) <= 1e-10 * max(1.0, np.max(np.abs(G))):
            return PmaxElement("translation", a=a.copy())
    raise UnsupportedElement("element is not e^{tE}, a Levi block, -I, or nbar_a")


def pmax_action(sig: Signature, element, psi: ConeFunction) -> ConeFunction:
    """pi(g) psi for g among the generator classes of P̄max.

    dilation: e^{-(n-2)t/2} psi(e^{-t} zeta); Levi m: psi(m^T zeta);
    m0: (-1)^{(p-q)/2} psi; nbar_a: e^{2i a.zeta} psi.
    """
    el = element if isinstance(element, PmaxElement) else classify_pmax(sig, element)
    if el.kind == "identity":
        return psi
    if el.kind == "sign":
        return psi.scaled(eps_sign(sig))
    if el.kind == "translation":
        return psi.times_plane_wave(2.0 * el.a)
    if el.kind == "dilation":
        t, n = el.t, sig.n
        c = np.exp(-(n - 2) * t / 2)
        if psi.separable:
            terms = tuple((lambda s, w, A=A: c * A(np.exp(-t) * s, w),
                           lambda s, w, B=B: B(np.exp(-t) * s, w)) for A, B in psi.terms)
            return ConeFunction(sig, terms=terms, label=f"dil({psi.label})")
        return ConeFunction(sig, func=lambda z: c * psi(np.exp(-t) * z), label=f"dil({psi.label})")
    if el.kind == "levi":
        mt = el.m.T
        return ConeFunction(sig, func=lambda z: psi(z @ mt.T), label=f"levi({psi.label})")
    raise UnsupportedElement(el.kind)


# ---------------------------------------------------------------------------
# Bessel vectors


def _bessel_profile(sig: Signature, r):
    nu = (sig.q - 3) / 2
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return r ** (-nu) * bessel_K(nu, 2 * r)


def cone_radius(sig: Signature, zeta, radius: str = "cone") -> np.ndarray:
    zeta = np.asarray(zeta, dtype=float)
    if radius == "cone":
        return np.linalg.norm(zeta[..., : sig.p - 1], axis=-1)
    if radius == "euclidean":
        return np.linalg.norm(zeta, axis=-1)
    raise ValueError("radius must be 'cone' or 'euclidean'")


def psi_bm(sig: Signature, b=None, m=None, radius: str = "cone") -> ConeFunction:
    """zeta -> e^{i<b,zeta>} r^{(3-q)/2} K_{(q-3)/2}(2r) with r the radius of m zeta.

    radius="cone" uses r = |(m zeta)'| (the default, under which the
    minimal K-type identity holds); "euclidean" uses |m zeta| itself.
    """
    b = np.zeros(sig.n) if b is None else np.asarray(b, dtype=float)
    mm = None if m is None else (m.mat if isinstance(m, GroupElement) else np.asarray(m, dtype=float))
    if mm is not None and mm.shape == (sig.dim, sig.dim):
        mm = mm[1: sig.n + 1, 1: sig.n + 1]
    if mm is not None:
        D = np.diag(sig.eps)
        if np.max(np.abs(mm.T @ D @ mm - D)) > 1e-10:
            raise ValueError("m does not preserve Q")
    scale = np.sqrt(2.0) if radius == "euclidean" else 1.0
    if mm is None:
        base = ConeFunction(sig, terms=((lambda s, w: _bessel_profile(sig, scale * s) + 0.0 * w[..., 0],
                                         lambda s, w: 1.0 + 0.0 * w[..., 0]),), label="psi0")
        cone_radius(sig, np.zeros((1, sig.n)), radius)  # validates the keyword
        return base.times_plane_wave(b) if np.any(b) else base

    def func(z):
        return np.exp(1j * (z @ b)) * _bessel_profile(sig, cone_radius(sig, z @ mm.T, radius))
    return ConeFunction(sig, func=func, label="psi_bm")


def psi_0(sig: Signature, radius: str = "cone") -> ConeFunction:
    return psi_bm(sig, radius=radius)


# ---------------------------------------------------------------------------
# Polynomials times plane waves


def _key(alpha) -> tuple:
    return tuple(int(a) for a in alpha)


@dataclass(frozen=True)
class PolyPlaneWave:
    """sum_alpha c_alpha zeta^alpha e^{i b.zeta}."""
    n: int
    coeffs: dict = field(default_factory=dict)
    b: tuple = ()

    def __post_init__(self):
        b = tuple(float(x) for x in (self.b if len(self.b) else np.zeros(self.n)))
        if len(b) != self.n:
            raise ValueError("frequency has wrong dimension")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "coeffs", {_key(k): complex(v) for k, v in self.coeffs.items() if v != 0})

    @classmethod
    def monomial(cls, n, alpha, c=1.0, b=()):
        return cls(n, {_key(alpha): c}, b)

    @classmethod
    def constant(cls, n, c=1.0, b=()):
        return cls(n, {(0,) * n: c}, b)

    def _new(self, coeffs):
        return PolyPlaneWave(self.n, coeffs, self.b)

    def _same_frequency(self, other):
        if self.b != other.b:
            raise ValueError("plane-wave frequencies differ")

    def __add__(self, other):
        self._same_frequency(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return self._new(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return self._new({k: c * v for k, v in self.coeffs.items()})

    __rmul__ = scale

    def mul(self, j: int):
        """Multiply by zeta_j (0-based)."""
        out = {}
        for k, v in self.coeffs.items():
            kk = list(k)
            kk[j] += 1
            out[tuple(kk)] = out.get(tuple(kk), 0) + v
        return self._new(out)

    def diff(self, j: int):
        """d/dzeta_j (0-based)."""
        out = {}
        bj = self.b[j]
        for k, v in self.coeffs.items():
            if k[j]:
                kk = list(k)
                kk[j] -= 1
                out[tuple(kk)] = out.get(tuple(kk), 0) + k[j] * v
            if bj:
                out[k] = out.get(k, 0) + 1j * bj * v
        return self._new(out)

    def euler(self):
        out = self.scale(0)
        for j in range(self.n):
            out = out + self.diff(j).mul(j)
        return out

    def box(self, eps):
        out = self.scale(0)
        for j in range(self.n):
            out = out + self.diff(j).diff(j).scale(float(eps[j]))
        return out

    def norm(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        val = 0.0
        for k, v in self.coeffs.items():
            val = val + v * np.prod(zeta ** np.array(k), axis=-1)
        return val * np.exp(1j * (zeta @ np.array(self.b)))


# ---------------------------------------------------------------------------
# Lie algebra action on the Fourier side


@lru_cache(maxsize=None)
def _solver(sig: Signature) -> BasisSolver:
    return BasisSolver(sig)


@lru_cache(maxsize=None)
def _basis(sig: Signature) -> tuple:
    return tuple(basis_elements(sig))


def _basis_coords(sig: Signature, X: LieAlgebraElement, tol: float = 1e-10):
    c, res = _solver(sig).coordinates(X)
    if res > tol:
        raise UnsupportedElement(f"element outside the spanned algebra (residual {res:.2e})")
    return c


def _apply_basis(sig, lam, name, f: PolyPlaneWave) -> PolyPlaneWave:
    n, eps = sig.n, sig.eps
    if name == "E":
        return f.scale(lam - n) - f.euler()
    kind, idx = name[:1], name[1:]
    if name.startswith("Nbar"):
        j = int(name[4:]) - 1
        return f.mul(j).scale(2j)
    if kind == "N":
        j = int(idx) - 1
        dj = f.diff(j)
        return (dj.scale((lam - n) * eps[j]) - dj.euler().scale(eps[j]) + f.box(eps).mul(j).scale(0.5)).scale(1j)
    if kind == "M":
        a, b = (int(x) - 1 for x in idx.split(","))
        c = -eps[a] * eps[b]
        # X = E_ab + c E_ba acts by sum_{ij} X_ij zeta_i d_j
        return f.diff(b).mul(a) + f.diff(a).mul(b).scale(c)
    raise UnsupportedElement(name)


def dpi_hat(sig: Signature, lam: float, X: LieAlgebraElement, f: PolyPlaneWave, eps: int | None = None):
    """The Fourier-side operator of X applied to f.

    Nbar_j -> 2i zeta_j, E -> lambda - n - E_zeta,
    N_j -> i((lambda - n) eps_j d_j - eps_j E_zeta d_j + zeta_j box / 2),
    and the o(p-1,q-1) block acts by the vector field sum X_ij zeta_i d_j.
    The parity `eps` of the representation is accepted and has no effect.
    """
    del eps
    basis = _basis(sig)
    if X.name and X.name in {b.name for b in basis}:
        return _apply_basis(sig, lam, X.name, f)
    c = _basis_coords(sig, X)
    out = f.scale(0)
    for ci, B in zip(c, basis):
        if abs(ci) > 1e-15:
            out = out + _apply_basis(sig, lam, B.name, f).scale(ci)
    return out


# ---------------------------------------------------------------------------
# Flat-side operators as Weyl-algebra elements


@dataclass(frozen=True)
class WeylOperator:
    """sum c z^beta d^gamma with z to the left of the derivatives."""
    n: int
    terms: dict = field(default_factory=dict)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return WeylOperator(self.n, {k: v for k, v in out.items() if v != 0})

    def scale(self, c):
        return WeylOperator(self.n, {k: c * v for k, v in self.terms.items()})

    @classmethod
    def term(cls, n, beta, gamma, c=1.0):
        return cls(n, {(_key(beta), _key(gamma)): c})

    def apply_fourier(self, g: PolyPlaneWave) -> PolyPlaneWave:
        """Image on the Fourier side: z_j -> -i d/dzeta_j, d/dz_j -> -i zeta_j."""
        out = g.scale(0)
        for (beta, gamma), c in self.terms.items():
            h = g
            for j, k in enumerate(gamma):
                for _ in range(k):
                    h = h.mul(j).scale(-1j)
            for j, k in enumerate(beta):
                for _ in range(k):
                    h = h.diff(j).scale(-1j)
            out = out + h.scale(c)
        return out

    def apply_poly(self, f: dict) -> dict:
        """Apply to a polynomial {alpha: c} in z."""
        out: dict = {}
        for (beta, gamma), c in self.terms.items():
            for alpha, v in f.items():
                if any(a < g for a, g in zip(alpha, gamma)):
                    continue
                coef = c * v
                for a, g in zip(alpha, gamma):
                    for r in range(g):
                        coef *= a - r
                new = tuple(a - g + b for a, g, b in zip(alpha, gamma, beta))
                out[new] = out.get(new, 0) + coef
        return {k: v for k, v in out.items() if v != 0}


def flat_dpi(sig: Signature, lam: float, X: LieAlgebraElement) -> WeylOperator:
    """Flat-picture operator of X on functions of z.

    With omega = -Y_{0,n+1} - 1/2 sum_j (Y_{0j} + Y_{n+1,j}) z_j and
    v_i = (Y_{i0} + Y_{i,n+1}) + P/4 (Y_{i,n+1} - Y_{i0}) + sum_j Y_ij z_j,
    the operator is -lambda omega - omega E_z - sum_i v_i d_i.
    """
    n, eps, Y = sig.n, sig.eps, X.mat
    n1 = n + 1
    zero = (0,) * n

    def e(j):
        k = [0] * n
        k[j] = 1
        return tuple(k)

    def add(d, beta, gamma, c):
        if c:
            key = (tuple(beta), tuple(gamma))
            d[key] = d.get(key, 0) + c

    terms: dict = {}
    # omega as a polynomial {beta: c}
    omega = {zero: -Y[0, n1]}
    for j in range(n):
        omega[e(j)] = omega.get(e(j), 0) - 0.5 * (Y[0, j + 1] + Y[n1, j + 1])
    for beta, c in omega.items():
        add(terms, beta, zero, -lam * c)
        for i in range(n):
            add(terms, np.add(beta, e(i)), e(i), -c)
    for i in range(n):
        add(terms, zero, e(i), -(Y[i + 1, 0] + Y[i + 1, n1]))
        cP = 0.25 * (Y[i + 1, n1] - Y[i + 1, 0])
        for j in range(n):
            add(terms, 2 * np.array(e(j)), e(i), -cP * eps[j])
            add(terms, e(j), e(i), -Y[i + 1, j + 1])
    terms = {(tuple(int(x) for x in b), tuple(int(x) for x in g)): v for (b, g), v in terms.items() if v != 0}
    return WeylOperator(n, terms)


def fourier_duality_check(sig: Signature, lam: float, X: LieAlgebraElement, f: PolyPlaneWave) -> float:
    """Coefficient residual between dpi_hat(X) f and the Fourier image of the flat operator."""
    lhs = dpi_hat(sig, lam, X, f)
    rhs = flat_dpi(sig, lam, X).apply_fourier(f)
    return (lhs - rhs).norm()


def commutator_residual(sig: Signature, lam: float, X, Y, f: PolyPlaneWave) -> float:
    from .geometry import bracket
    a = dpi_hat(sig, lam, X, dpi_hat(sig, lam, Y, f))
    b = dpi_hat(sig, lam, Y, dpi_hat(sig, lam, X, f))
    c = dpi_hat(sig, lam, bracket(X, Y), f)
    return (a - b - c).norm()

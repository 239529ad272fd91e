"""Special functions and normalising constants.

Bessel functions come from scipy.special.  The Gauss 2F1 series with its
continuations, the Appell F4 double series and the Bailey Hankel-integral
check are written out here because the library needs explicit control of
branches and truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import special as sc

from .geometry import Signature, tau

SAFETY = 10.0


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bessel


def _positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("argument must be positive")
    return x


def bessel_K(nu, x):
    return sc.kv(nu, _positive(x))


def bessel_I(nu, x):
    return sc.iv(nu, np.asarray(x, dtype=float))


def bessel_J(nu, x):
    return sc.jv(nu, np.asarray(x, dtype=float))


def bessel_ode_residual(nu: float, x: float, h: float = 1e-3, kind: str = "K") -> float:
    """x^2 y'' + x y' - (x^2 + nu^2) y by central differences (O(h^2))."""
    f = {"K": bessel_K, "I": bessel_I}[kind]
    y0, yp, ym = f(nu, x), f(nu, x + h), f(nu, x - h)
    d2 = (yp - 2 * y0 + ym) / h**2
    d1 = (yp - ym) / (2 * h)
    return float(x * x * d2 + x * d1 - (x * x + nu * nu) * y0)


def unit_sphere_area(m: int) -> float:
    """Area of S^{m-1} in R^m (so m=1 gives 2 points)."""
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def sphere_fourier(m: int, t):
    """Integral of exp(i t <e, w>) over w in S^{m-1}; real and even in t."""
    t = np.asarray(t, dtype=float)
    if m == 1:
        return 2.0 * np.cos(t)
    nu_ = m / 2.0 - 1.0
    out = np.empty_like(t)
    small = np.abs(t) < 1e-8
    out[small] = unit_sphere_area(m)
    ts = np.abs(t[~small])
    out[~small] = (2 * np.pi) ** (m / 2) * ts ** (-nu_) * sc.jv(nu_, ts)
    return out


# ---------------------------------------------------------------------------
# Gauss 2F1


def _nonpos_int(a) -> bool:
    return float(a) <= 0 and float(a) == int(a)


def _series_2f1(a, b, c, x, tol=1e-16, max_terms=100000):
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    ax = np.max(np.abs(x)) if x.size else 0.0
    for k in range(max_terms):
        coef = (a + k) * (b + k) / ((c + k) * (k + 1))
        term = term * coef * x
        total = total + term
        if coef == 0:
            return total
        # ratio-test tail bound: |next| <= |term| * r / (1 - r)
        r = abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2))) * ax
        if r < 1:
            tail = SAFETY * np.max(np.abs(term)) * r / (1 - r)
            if tail <= tol * max(1.0, np.max(np.abs(total))):
                return total
    raise DomainError("2F1 series did not converge")


@dataclass(frozen=True)
class HyperResult:
    value: np.ndarray
    route: str


def gauss_2f1_route(a, b, c, x) -> HyperResult:
    """2F1(a,b;c;x) for real x < 1, reporting the continuation used.

    Routes: direct series on |x| <= 1/2; Pfaff on -1 <= x < -1/2; the
    x -> 1-x connection on 1/2 < x < 1; Pfaff followed by the connection
    for x < -1.  Terminating series are summed directly for any x.
    """
    if _nonpos_int(c):
        raise DomainError("c must not be a non-positive integer")
    x = np.asarray(x, dtype=float)
    if _nonpos_int(a) or _nonpos_int(b):
        return HyperResult(_series_2f1(a, b, c, x), "polynomial")
    if np.any(x >= 1):
        raise DomainError("2F1 requires x < 1 unless it terminates")
    out = np.empty_like(x)
    masks = {
        "series": np.abs(x) <= 0.5,
        "pfaff": (x >= -1) & (x < -0.5),
        "connection-1": x > 0.5,
        "pfaff+connection-1": x < -1,
    }
    used = []
    for route, m in masks.items():
        if not np.any(m):
            continue
        used.append(route)
        xm = x[m]
        if route == "series":
            out[m] = _series_2f1(a, b, c, xm)
        elif route == "pfaff":
            out[m] = (1 - xm) ** (-a) * _series_2f1(a, c - b, c, xm / (xm - 1))
        elif route == "connection-1":
            out[m] = _connection_at_one(a, b, c, np.sqrt(1 - xm))
        else:
            w = xm / (xm - 1)
            inner = _series_2f1(a, c - b, c, w) if _nonpos_int(c - b) else \
                _connection_at_one(a, c - b, c, np.sqrt(1 - w))
            out[m] = (1 - xm) ** (-a) * inner
    return HyperResult(out, "+".join(used) if used else "empty")


def gauss_2f1(a, b, c, x):
    return gauss_2f1_route(a, b, c, x).value


def _connection_at_one(a, b, c, w):
    """2F1(a,b;c;1-w^2) via the x -> 1-x connection, with (1-x)^{c-a-b} taken as w^{2(c-a-b)}.

    For c-a-b = 1/2 this keeps the sign of w, which selects the analytic
    continuation through x = 1 rather than its absolute value.
    """
    w = np.asarray(w, dtype=float)
    s = c - a - b
    if abs(s - round(s)) < 1e-12:
        raise DomainError("connection at x=1 needs c-a-b non-integral")
    y = w * w
    A, B = _connection_coeffs(a, b, c)
    out = np.zeros_like(w)
    if A != 0:
        out = out + A * _series_2f1(a, b, 1 - s, y)
    if B != 0:
        if abs(s - 0.5) < 1e-12:
            pw = w
        else:
            pw = np.abs(w) ** (2 * s)
        out = out + B * pw * _series_2f1(c - a, c - b, 1 + s, y)
    return out


def _connection_coeffs(a, b, c):
    s = c - a - b
    A = math.gamma(c) * math.gamma(s) * sc.rgamma(c - a) * sc.rgamma(c - b)
    B = math.gamma(c) * math.gamma(-s) * sc.rgamma(a) * sc.rgamma(b)
    return A, B


def gauss_2f1_signed(a, b, c, w):
    """Analytic continuation of x -> 2F1(a,b;c;x) along x = 1 - w^2, w real in [-1, 1].

    Equals 2F1(a,b;c;1-w^2) for w >= 0 and continues analytically to w < 0.
    Requires c - a - b = 1/2, where the continuation is even or odd in w
    whenever one connection coefficient vanishes.
    """
    if abs(c - a - b - 0.5) > 1e-12:
        raise DomainError("signed continuation implemented for c - a - b = 1/2")
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    near = np.abs(w) < math.sqrt(0.5)
    if np.any(near):
        out[near] = _connection_at_one(a, b, c, w[near])
    far = ~near
    if np.any(far):
        wf = w[far]
        val = gauss_2f1(a, b, c, 1.0 - wf * wf)
        A, B = _connection_coeffs(a, b, c)
        neg = wf < 0
        if np.any(neg):
            if A == 0:
                val = np.where(neg, -val, val)
            elif B != 0:
                raise DomainError("mixed-parity continuation for w < -1/sqrt(2) not supported")
        out[far] = val
    return out


def hyp2f1_ode_residual(a, b, c, x, h=1e-4) -> float:
    f = lambda t: gauss_2f1(a, b, c, np.array(t))
    y0, yp, ym = f(x), f(x + h), f(x - h)
    d2 = (yp - 2 * y0 + ym) / h**2
    d1 = (yp - ym) / (2 * h)
    return float(x * (1 - x) * d2 + (c - (a + b + 1) * x) * d1 - a * b * y0)


def quadratic_transform_residual(alpha, beta, z) -> float:
    """2F1(a,b;1+a-b;z) - (1-z)^{-a} 2F1(a/2, (a+1-2b)/2; 1+a-b; -4z/(1-z)^2)."""
    c = 1 + alpha - beta
    lhs = gauss_2f1(alpha, beta, c, np.array(z))
    zz = -4 * z / (1 - z) ** 2
    rhs = (1 - z) ** (-alpha) * gauss_2f1(alpha / 2, (alpha + 1 - 2 * beta) / 2, c, np.array(zz))
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Appell F4


def appell_f4(a, b, c, d, x, y, tol=1e-16, max_order=3000) -> float:
    """Double series sum (a)_{i+j}(b)_{i+j} / (i! j! (c)_i (d)_j) x^i y^j.

    Summed by anti-diagonals N = i + j; stops once a geometric bound on the
    remaining diagonals (ratio sqrt|x| + sqrt|y| squared, safety factor 10)
    falls below tol relative to the running sum.
    """
    if _nonpos_int(c) or _nonpos_int(d):
        raise DomainError("c, d must not be non-positive integers")
    rho = (math.sqrt(abs(x)) + math.sqrt(abs(y))) ** 2
    if rho >= 1:
        raise DomainError("F4 series needs sqrt|x| + sqrt|y| < 1")
    # row[i] holds the i-th term on the current diagonal: T(i, N-i)
    total = 1.0
    diag = np.array([1.0])
    for N in range(1, max_order):
        new = np.empty(N + 1)
        # T(i, j) from T(i, j-1) for i < N, and T(N, 0) from T(N-1, 0)
        i = np.arange(N)
        j = N - i
        new[:N] = diag * (a + N - 1) * (b + N - 1) * y / (j * (d + j - 1))
        new[N] = diag[-1] * (a + N - 1) * (b + N - 1) * x / (N * (c + N - 1))
        diag = new
        s = float(np.sum(diag))
        total += s
        bound = np.max(np.abs(diag))
        if bound == 0.0:
            break
        r = rho * (1.0 + (abs(a) + abs(b) + 2.0) / (N + 1))
        if r < 1 and SAFETY * bound * (N + 2) * r / (1 - r) <= tol * max(1.0, abs(total)):
            break
    else:
        raise DomainError("F4 series did not converge")
    return float(total)


def f4_recurrence_residual(a, b, c, d, x, y, h=1e-4) -> float:
    """F4 satisfies x(1-x)F_xx - y^2 F_yy - 2xyF_xy + [c-(a+b+1)x]F_x - (a+b+1)yF_y - abF = 0."""
    F = lambda u, v: appell_f4(a, b, c, d, u, v)
    f0 = F(x, y)
    fx = (F(x + h, y) - F(x - h, y)) / (2 * h)
    fy = (F(x, y + h) - F(x, y - h)) / (2 * h)
    fxx = (F(x + h, y) - 2 * f0 + F(x - h, y)) / h**2
    fyy = (F(x, y + h) - 2 * f0 + F(x, y - h)) / h**2
    fxy = (F(x + h, y + h) - F(x + h, y - h) - F(x - h, y + h) + F(x - h, y - h)) / (4 * h * h)
    return float(x * (1 - x) * fxx - y * y * fyy - 2 * x * y * fxy
                 + (c - (a + b + 1) * x) * fx - (a + b + 1) * y * fy - a * b * f0)


def f4_reduction_residual(alpha, beta, x, y) -> float:
    """F4(a,b;1+a-b,b; -X, -Y) vs (1-y)^a 2F1(a,b;1+a-b; -x(1-y)/(1-x))."""
    den = (1 - x) * (1 - y)
    lhs = appell_f4(alpha, beta, 1 + alpha - beta, beta, -x / den, -y / den)
    rhs = (1 - y) ** alpha * gauss_2f1(alpha, beta, 1 + alpha - beta, np.array(-x * (1 - y) / (1 - x)))
    return float(abs(lhs - rhs))


SKIP = None


def f4_reduction_check(sig: Signature, z):
    """Residual of the F4 -> tau-weighted 2F1 identity at a flat point, or SKIP outside the series domain."""
    p, q = sig.p, sig.q
    zp, zpp = sig.split(np.asarray(z, dtype=float))
    X, Y = float(zp @ zp) / 4, float(zpp @ zpp) / 4
    if math.sqrt(X) + math.sqrt(Y) >= 0.95:
        return SKIP
    lhs = appell_f4((p - 1) / 2, (p + q - 4) / 2, (p - 1) / 2, (q - 1) / 2, -X, -Y)
    t = float(tau(sig, z))
    rhs = t ** (-(p + q - 4) / 2) * float(
        gauss_2f1((q - p) / 4, (p + q - 4) / 4, (q - 1) / 2, np.array(4 * Y / t**2)))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Bailey's Hankel integral


def bailey_rhs(lam, mu, nu, rho, a, b, c) -> float:
    s = lam + mu + nu
    pre = (2 ** (lam - 2) * a**mu * b**nu * math.gamma((s - rho) / 2) * math.gamma((s + rho) / 2)
           / (c**s * math.gamma(mu + 1) * math.gamma(nu + 1)))
    return pre * appell_f4((s - rho) / 2, (s + rho) / 2, mu + 1, nu + 1, -(a / c) ** 2, -(b / c) ** 2)


def bailey_quadrature(lam, mu, nu, rho, a, b, c, panel_nodes=24) -> float:
    """Integral of t^{lam-1} J_mu(at) J_nu(bt) K_rho(ct) over (0, inf) by panelled Gauss-Legendre."""
    if c <= 0:
        raise DomainError("c must be positive")
    if lam + mu + nu - abs(rho) <= 0:
        raise DomainError("integrand not integrable at t = 0")
    # K_rho(ct) ~ e^{-ct}: stop where the envelope is below 1e-17 relative
    t_max = (40.0 + abs(lam) * math.log(40.0 / c + 2)) / c
    period = 2 * math.pi / max(a, b, 1e-3)
    width = min(period / 2, 1.0 / c, 0.5)
    # graded panels near zero absorb the algebraic endpoint behaviour
    edges = list(np.geomspace(1e-12, width, 30))
    edges = [0.0] + edges
    edges += list(np.arange(edges[-1] + width, t_max + width, width))
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    lo = np.array(edges[:-1])[:, None]
    hi = np.array(edges[1:])[:, None]
    t = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    wt = 0.5 * (hi - lo) * w[None, :]
    f = t ** (lam - 1) * sc.jv(mu, a * t) * sc.jv(nu, b * t) * sc.kv(rho, c * t)
    return float(np.sum(f * wt))


def bailey_hankel_check(lam, mu, nu, rho, a, b, c) -> float:
    if math.sqrt(a * a / (c * c)) + math.sqrt(b * b / (c * c)) >= 1:
        raise DomainError("a/c + b/c must be < 1 for the F4 series")
    return abs(bailey_quadrature(lam, mu, nu, rho, a, b, c) - bailey_rhs(lam, mu, nu, rho, a, b, c))


# ---------------------------------------------------------------------------
# Generating functions of the minimal K-type


def _require_p_ge_q(sig: Signature):
    if sig.p < sig.q:
        raise DomainError(
            f"generating function is defined for p >= q; use Signature({sig.q},{sig.p}) "
            "with the roles of z' and z'' exchanged")


def f0_params(sig: Signature):
    p, q = sig.p, sig.q
    return (q - p) / 4, (p + q - 4) / 4, (q - 1) / 2


def generating_F0(sig: Signature, u) -> np.ndarray:
    """O(p) x O(q-1)-invariant vector of the minimal K-type on S^{p-1} x S^{q-1}.

    Evaluated as the analytic continuation in the last coordinate y_last, so
    the result is a polynomial of degree (p-q)/2 in y_last with parity
    (-1)^{(p-q)/2}.  For y_last >= 0 it agrees with the hypergeometric
    formula in 1 - y_last^2.
    """
    _require_p_ge_q(sig)
    u = np.asarray(u, dtype=float)
    a, b, c = f0_params(sig)
    return gauss_2f1_signed(a, b, c, u[..., -1])


def generating_f0(sig: Signature, z) -> np.ndarray:
    """Flat-picture generating function tau^{-(p+q-4)/2} * F0(Psi(z))."""
    _require_p_ge_q(sig)
    z = np.asarray(z, dtype=float)
    from .geometry import eval_P
    t = tau(sig, z)
    w = (1.0 + eval_P(sig, z) / 4.0) / t
    a, b, c = f0_params(sig)
    return t ** (-(sig.p + sig.q - 4) / 2) * gauss_2f1_signed(a, b, c, w)


def generating_f0_literal(sig: Signature, z) -> np.ndarray:
    """tau^{-(p+q-4)/2} 2F1(...; |z''|^2/tau^2) with the principal branch (not analytic across P = -4)."""
    _require_p_ge_q(sig)
    z = np.asarray(z, dtype=float)
    t = tau(sig, z)
    zpp = sig.split(z)[1]
    x = np.sum(zpp * zpp, axis=-1) / t**2
    a, b, c = f0_params(sig)
    out = np.array([float(_principal(a, b, c, xi)) for xi in np.ravel(x)]).reshape(np.shape(x))
    return t ** (-(sig.p + sig.q - 4) / 2) * out


def _principal(a, b, c, x):
    if x < 0.5:
        return gauss_2f1(a, b, c, np.array(x))
    return _connection_at_one(a, b, c, np.array(math.sqrt(1 - x)))


# ---------------------------------------------------------------------------
# Constants


def eps_sign(sig: Signature) -> int:
    return 1 if ((sig.p - sig.q) // 2) % 2 == 0 else -1


def delta_sign(sig: Signature) -> int:
    """+1 for p-q = 0, 2 mod 8 and -1 for p-q = 4, 6 mod 8."""
    return 1 if (sig.p - sig.q) % 8 in (0, 2) else -1


@dataclass(frozen=True)
class Constants:
    p: int
    q: int
    n: int
    eps: int
    delta: int
    c1: float
    c2: float
    c3: float
    c1c3: float
    inverse_const_printed: float
    synthesis_const_printed: float
    synthesis_const_derived: float
    inverse_const_derived: float
    unitary_scale: float

    def as_dict(self):
        return asdict(self)


EXPRESSIONS = {
    "eps": "(-1)^((p-q)/2)",
    "delta": "+1 if p-q = 0,2 mod 8, -1 if p-q = 4,6 mod 8",
    "c1": "Gamma((n-1-eps)/4) / (2^(n/2) pi^((n+1)/2))",
    "c2": "4 delta pi^(n/2) Gamma((n-1+eps)/4) / Gamma(n/2-1)",
    "c3": "pi^(n/2) Gamma((n-1+eps)/4) / Gamma(n/2-1)",
    "c1c3": "c1*c3 (expected 2^(2-n))",
    "inverse_const_printed": "(2pi)^((p+q-2)/2) 2^(-(p-5)/2) Gamma((q-1)/2) / Gamma((p+q-4)/2)",
    "synthesis_const_printed": "Gamma((p+q-4)/2) / (2^((q+3)/2) pi^((p+q-2)/2) Gamma((q-1)/2))",
    "synthesis_const_derived": "Gamma((p+q-4)/2) / (2^(p+q-1) pi^((p+q-2)/2) Gamma((q-1)/2))",
    "inverse_const_derived": "1 / synthesis_const_derived",
    "unitary_scale": "2^((n+2)/2) pi^((n+1)/2)",
}


def constants(sig: Signature) -> Constants:
    p, q, n = sig.p, sig.q, sig.n
    e, d = eps_sign(sig), delta_sign(sig)
    G = math.gamma
    c1 = G((n - 1 - e) / 4) / (2 ** (n / 2) * math.pi ** ((n + 1) / 2))
    c3 = math.pi ** (n / 2) * G((n - 1 + e) / 4) / G(n / 2 - 1)
    c2 = 4 * d * c3
    thm = (2 * math.pi) ** ((p + q - 2) / 2) * 2 ** (-(p - 5) / 2) * G((q - 1) / 2) / G((p + q - 4) / 2)
    prop = G((p + q - 4) / 2) / (2 ** ((q + 3) / 2) * math.pi ** ((p + q - 2) / 2) * G((q - 1) / 2))
    prop_d = G((p + q - 4) / 2) / (2 ** (p + q - 1) * math.pi ** ((p + q - 2) / 2) * G((q - 1) / 2))
    return Constants(p, q, n, e, d, c1, c2, c3, c1 * c3, thm, prop, prop_d, 1.0 / prop_d,
                     2 ** ((n + 2) / 2) * math.pi ** ((n + 1) / 2))

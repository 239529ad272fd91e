"""Signatures, quadratic forms, light-cone embeddings and O(p,q) matrices.

Coordinates on R^{p+q} are indexed 0..n+1 with n = p+q-2.  A flat point
z in R^n sits at indices 1..n, split as z' (first p-1 entries) and z''
(last q-1 entries).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.linalg import expm

SINGULAR_MU = 1e-10


class SignatureError(ValueError):
    pass


class PointAtInfinity(ArithmeticError):
    """Raised when a conformal map sends a point to infinity."""


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if not (isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer))):
            raise SignatureError("p and q must be integers")
        if p < 2 or q < 2:
            raise SignatureError(f"need p, q >= 2, got ({p},{q})")
        if (p + q) % 2:
            raise SignatureError(f"p+q must be even, got ({p},{q})")
        if (p, q) == (2, 2):
            raise SignatureError("(p,q) = (2,2) is excluded")

    @property
    def n(self) -> int:
        return self.p + self.q - 2

    @cached_property
    def eps(self) -> np.ndarray:
        e = np.concatenate([np.ones(self.p - 1), -np.ones(self.q - 1)])
        e.setflags(write=False)
        return e

    @cached_property
    def ipq(self) -> np.ndarray:
        m = np.diag(np.concatenate([np.ones(self.p), -np.ones(self.q)]))
        m.setflags(write=False)
        return m

    @property
    def dim(self) -> int:
        return self.p + self.q

    def split(self, z):
        z = np.asarray(z)
        return z[..., : self.p - 1], z[..., self.p - 1:]

    def swapped(self) -> "Signature":
        return Signature(self.q, self.p)

    def __str__(self):
        return f"({self.p},{self.q})"


def _check_dim(sig: Signature, z, name="z"):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != sig.n:
        raise ValueError(f"{name} has last dimension {z.shape[-1]}, expected n={sig.n}")
    return z


def eval_P(sig: Signature, z) -> np.ndarray:
    """Flat quadratic form sum eps_j z_j^2 (vectorised over leading axes)."""
    z = _check_dim(sig, z)
    return np.einsum("...j,j,...j->...", z, sig.eps, z)


def eval_Q(sig: Signature, zeta) -> np.ndarray:
    """Dual quadratic form on frequency space; same signs as eval_P."""
    zeta = _check_dim(sig, zeta, "zeta")
    return np.einsum("...j,j,...j->...", zeta, sig.eps, zeta)


def bracket_pq(sig: Signature, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.einsum("...i,i,...i->...", u, np.diag(sig.ipq), v)


def iota(sig: Signature, z) -> np.ndarray:
    """Embed R^n into the null cone of R^{p,q} on the slice mu = 1."""
    z = _check_dim(sig, z)
    quarter = eval_P(sig, z)[..., None] / 4.0
    return np.concatenate([1.0 - quarter, z, 1.0 + quarter], axis=-1)


def iota_inv(sig: Signature, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[..., 1: sig.n + 1]


def mu(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return 0.5 * (v[..., 0] + v[..., -1])


def nu(sig: Signature, v) -> np.ndarray:
    """Euclidean length of the first p coordinates."""
    v = np.asarray(v, dtype=float)
    return np.linalg.norm(v[..., : sig.p], axis=-1)


def tau(sig: Signature, z, form: int = 3) -> np.ndarray:
    """Conformal factor |x-part of iota(z)|, in one of three closed forms."""
    z = _check_dim(sig, z)
    zp, zpp = sig.split(z)
    a2 = np.sum(zp * zp, axis=-1)
    b2 = np.sum(zpp * zpp, axis=-1)
    P = a2 - b2
    if form == 1:
        return np.sqrt((1.0 - P / 4.0) ** 2 + a2)
    if form == 2:
        return np.sqrt((1.0 + P / 4.0) ** 2 + b2)
    if form == 3:
        a, b = np.sqrt(a2), np.sqrt(b2)
        return np.sqrt(1.0 + ((a + b) / 2.0) ** 2) * np.sqrt(1.0 + ((a - b) / 2.0) ** 2)
    raise ValueError("form must be 1, 2 or 3")


def psi_map(sig: Signature, z) -> np.ndarray:
    """Conformal embedding of R^{p-1,q-1} onto the open set M_+ of S^{p-1} x S^{q-1}."""
    v = iota(sig, z)
    return v / tau(sig, z)[..., None]


def psi_inv(sig: Signature, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    m = mu(u)
    if np.any(m <= 0):
        raise ValueError("psi_inv is only defined on u_0 + u_{n+1} > 0")
    return u[..., 1: sig.n + 1] / m[..., None]


def on_M(sig: Signature, u, tol=1e-12) -> bool:
    u = np.asarray(u, dtype=float)
    x, y = u[..., : sig.p], u[..., sig.p:]
    return bool(
        np.all(np.abs(np.linalg.norm(x, axis=-1) - 1) < tol)
        and np.all(np.abs(np.linalg.norm(y, axis=-1) - 1) < tol)
    )


# ---------------------------------------------------------------------------
# Lie algebra and group


@dataclass(frozen=True)
class LieAlgebraElement:
    mat: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def residual(self, sig: Signature) -> float:
        I = sig.ipq
        return float(np.max(np.abs(self.mat @ I + I @ self.mat.T)))

    def __add__(self, other):
        return LieAlgebraElement(self.mat + other.mat)

    def __rmul__(self, c):
        return LieAlgebraElement(c * self.mat)


@dataclass(frozen=True)
class GroupElement:
    mat: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def residual(self, sig: Signature) -> float:
        I = sig.ipq
        return float(np.max(np.abs(self.mat.T @ I @ self.mat - I)))

    def __matmul__(self, other):
        return GroupElement(self.mat @ other.mat)

    def inverse(self, sig: Signature) -> "GroupElement":
        # g^{-1} = I g^T I for g in O(p,q)
        return GroupElement(sig.ipq @ self.mat.T @ sig.ipq)


def matrix_unit(dim: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((dim, dim))
    m[i, j] = 1.0
    return m


def nbar_gen(sig: Signature, j: int) -> LieAlgebraElement:
    """Translation generator, j in 1..n."""
    d, e = sig.dim, sig.eps[j - 1]
    E = lambda a, b: matrix_unit(d, a, b)
    n1 = sig.n + 1
    return LieAlgebraElement(E(j, 0) + E(j, n1) - e * E(0, j) + e * E(n1, j), f"Nbar{j}")


def n_gen(sig: Signature, j: int) -> LieAlgebraElement:
    """Special conformal generator, j in 1..n."""
    d, e = sig.dim, sig.eps[j - 1]
    E = lambda a, b: matrix_unit(d, a, b)
    n1 = sig.n + 1
    return LieAlgebraElement(E(j, 0) - E(j, n1) - e * E(0, j) - e * E(n1, j), f"N{j}")


def e_gen(sig: Signature) -> LieAlgebraElement:
    d, n1 = sig.dim, sig.n + 1
    return LieAlgebraElement(matrix_unit(d, 0, n1) + matrix_unit(d, n1, 0), "E")


def m_gen(sig: Signature, i: int, j: int) -> LieAlgebraElement:
    """Generator of o(p-1,q-1) acting on flat coordinates i < j (1-based)."""
    d = sig.dim
    c = -sig.eps[i - 1] * sig.eps[j - 1]
    return LieAlgebraElement(matrix_unit(d, i, j) + c * matrix_unit(d, j, i), f"M{i},{j}")


def basis_elements(sig: Signature) -> list[LieAlgebraElement]:
    """Nbar_j, N_j, E and a basis of the o(p-1,q-1) block; together a basis of o(p,q)."""
    n = sig.n
    out = [nbar_gen(sig, j) for j in range(1, n + 1)]
    out += [n_gen(sig, j) for j in range(1, n + 1)]
    out.append(e_gen(sig))
    out += [m_gen(sig, i, j) for i, j in combinations(range(1, n + 1), 2)]
    return out


def m0(sig: Signature) -> GroupElement:
    return GroupElement(-np.eye(sig.dim), "m0")


def bracket(X: LieAlgebraElement, Y: LieAlgebraElement) -> LieAlgebraElement:
    return LieAlgebraElement(X.mat @ Y.mat - Y.mat @ X.mat)


@dataclass(frozen=True)
class BasisSolver:
    """Least-squares coordinates of matrices in the basis_elements basis."""
    sig: Signature

    @cached_property
    def _lstsq(self):
        B = np.stack([b.mat.ravel() for b in basis_elements(self.sig)], axis=1)
        pinv = np.linalg.pinv(B)
        return B, pinv, float(np.linalg.cond(B))

    @property
    def condition_number(self) -> float:
        return self._lstsq[2]

    def coordinates(self, X) -> tuple[np.ndarray, float]:
        mat = X.mat if isinstance(X, LieAlgebraElement) else np.asarray(X)
        B, pinv, _ = self._lstsq
        c = pinv @ mat.ravel()
        res = float(np.max(np.abs(B @ c - mat.ravel()))) if mat.size else 0.0
        return c, res


def structure_constants(sig: Signature) -> tuple[np.ndarray, float]:
    """c[a,b,:] with [X_a, X_b] = sum_c c[a,b,c] X_c, and the worst solve residual."""
    basis = basis_elements(sig)
    solver = BasisSolver(sig)
    k = len(basis)
    C = np.zeros((k, k, k))
    worst = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            c, res = solver.coordinates(bracket(basis[a], basis[b]))
            C[a, b] = c
            C[b, a] = -c
            worst = max(worst, res)
    return C, worst


def _is_nilpotent(mat, power=3, tol=0.0) -> bool:
    return bool(np.all(np.abs(np.linalg.matrix_power(mat, power)) <= tol))


def group_exp(X: LieAlgebraElement, t: float = 1.0) -> GroupElement:
    """exp(tX); a terminating series for nilpotent elements, scipy expm otherwise."""
    A = t * X.mat
    if _is_nilpotent(A, 3, tol=1e-14 * max(1.0, np.max(np.abs(A)) ** 3)):
        return GroupElement(np.eye(A.shape[0]) + A + A @ A / 2.0)
    return GroupElement(expm(A))


def nbar(sig: Signature, a) -> GroupElement:
    """exp(sum_j a_j Nbar_j)."""
    a = np.asarray(a, dtype=float)
    X = sum((a[j - 1] * nbar_gen(sig, j).mat for j in range(1, sig.n + 1)), np.zeros((sig.dim,) * 2))
    return group_exp(LieAlgebraElement(X))


def dilation(sig: Signature, t: float) -> GroupElement:
    return group_exp(e_gen(sig), t)


def embed_m(sig: Signature, m) -> GroupElement:
    """Place an element of O(p-1,q-1) (n x n) in the middle block."""
    g = np.eye(sig.dim)
    g[1: sig.n + 1, 1: sig.n + 1] = np.asarray(m, dtype=float)
    return GroupElement(g)


def boost(sig: Signature, i: int, j: int, t: float) -> GroupElement:
    """exp(t M_{ij}); a hyperbolic boost when eps_i != eps_j, a rotation otherwise."""
    return group_exp(m_gen(sig, i, j), t)


def flat_action(sig: Signature, g: GroupElement, z) -> tuple[np.ndarray, np.ndarray]:
    """Meromorphic conformal action on R^n: returns (L_g z, mu(g iota(z)))."""
    v = iota(sig, z)
    w = np.einsum("ij,...j->...i", g.mat, v)
    m = mu(w)
    if np.any(np.abs(m) < SINGULAR_MU):
        raise PointAtInfinity("g sends z to infinity (|mu| < 1e-10)")
    return iota_inv(sig, w / m[..., None]), m


def fd_jacobian(f, z, h=1e-5) -> np.ndarray:
    """Central-difference Jacobian of f: R^n -> R^m at z; shape (m, n)."""
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        cols.append((np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def flat_metric(sig: Signature) -> np.ndarray:
    return np.diag(sig.eps)


def pullback_metric_psi(sig: Signature, z, h=1e-5) -> np.ndarray:
    """Finite-difference pullback of the ambient I_{p,q} metric along psi_map."""
    J = fd_jacobian(lambda w: psi_map(sig, w), z, h)
    return J.T @ sig.ipq @ J


def pullback_metric_action(sig: Signature, g: GroupElement, z, h=1e-5) -> np.ndarray:
    J = fd_jacobian(lambda w: flat_action(sig, g, w)[0], z, h)
    return J.T @ flat_metric(sig) @ J

"""Pointwise Kähler curvature algebra.

Tensors are stored with chart components together with the metric g and
complex structure J of the point. All contractions and inner products are
taken in the g-orthonormal frame E = L^{-T}, g = L L^T, where J becomes the
orthogonal matrix J' = L^T J L^{-T}. Components follow
R[i, j, k, l] = g(R(e_i, e_j) e_k, e_l).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from src.errors import NotInvariant, NotPositiveDefinite, SingularSystem

logger = logging.getLogger(__name__)


def orthonormal_frame(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Frame E with E^T g E = Id, and its inverse F = E^{-1}.

    Raises:
        NotPositiveDefinite: if the Cholesky factorization of g fails.
    """
    try:
        L = linalg.cholesky(g, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Metric is not positive definite: {e}") from e
    F = L.T
    E = linalg.solve_triangular(L, np.eye(g.shape[0]), lower=True).T
    return E, F


def standard_J(dimC: int) -> np.ndarray:
    """Multiplication by i on R^(2 dimC) laid out as (real parts, imaginary parts)."""
    I = np.eye(dimC)
    Z = np.zeros((dimC, dimC))
    return np.block([[Z, -I], [I, Z]])


@dataclass
class Curv4:
    components: np.ndarray
    g: np.ndarray
    J: np.ndarray
    _frame: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def frame(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._frame is None:
            self._frame = orthonormal_frame(self.g)
        return self._frame

    def frame_J(self) -> np.ndarray:
        E, F = self.frame()
        return F @ self.J @ E

    def frame_components(self) -> np.ndarray:
        E, _ = self.frame()
        return np.einsum("ijkl,ia,jb,kc,ld->abcd", self.components, E, E, E, E, optimize=True)

    @classmethod
    def from_frame(cls, Rf: np.ndarray, g: np.ndarray, J: np.ndarray) -> "Curv4":
        E, F = orthonormal_frame(g)
        comps = np.einsum("abcd,ai,bj,ck,dl->ijkl", Rf, F, F, F, F, optimize=True)
        return cls(comps, g, J, (E, F))

    def _like(self, comps: np.ndarray) -> "Curv4":
        return Curv4(comps, self.g, self.J, self._frame)

    def __add__(self, other: "Curv4") -> "Curv4":
        return self._like(self.components + other.components)

    def __sub__(self, other: "Curv4") -> "Curv4":
        return self._like(self.components - other.components)

    def __neg__(self) -> "Curv4":
        return self._like(-self.components)

    def __mul__(self, c: float) -> "Curv4":
        return self._like(c * self.components)

    __rmul__ = __mul__

    def evaluate(self, X, Y, Z, W) -> float:
        """g(R(X, Y) Z, W)."""
        return float(np.einsum("ijkl,i,j,k,l->", self.components, X, Y, Z, W))


@dataclass
class Sym11:
    components: np.ndarray
    g: np.ndarray
    J: np.ndarray

    def frame_components(self) -> np.ndarray:
        E, _ = orthonormal_frame(self.g)
        return E.T @ self.components @ E

    @classmethod
    def from_frame(cls, Sf: np.ndarray, g: np.ndarray, J: np.ndarray) -> "Sym11":
        _, F = orthonormal_frame(g)
        return cls(F.T @ Sf @ F, g, J)

    def __add__(self, other: "Sym11") -> "Sym11":
        return Sym11(self.components + other.components, self.g, self.J)

    def __sub__(self, other: "Sym11") -> "Sym11":
        return Sym11(self.components - other.components, self.g, self.J)

    def __mul__(self, c: float) -> "Sym11":
        return Sym11(c * self.components, self.g, self.J)

    __rmul__ = __mul__

    def endomorphism(self) -> np.ndarray:
        """g-raised form, as a matrix acting on chart vectors."""
        return linalg.solve(self.g, self.components, assume_a="pos")

    def j_residual(self) -> float:
        S = self.components
        return float(np.max(np.abs(self.J.T @ S @ self.J - S)))

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.components - self.components.T)))


def ricci_contract(R: Curv4) -> Sym11:
    """c_K(R)(v, w) = trace R(v, ., ., w) in a g-orthonormal frame."""
    Rf = R.frame_components()
    return Sym11.from_frame(np.einsum("iaaj->ij", Rf), R.g, R.J)


def _adjoint_frame(Sf: np.ndarray, Jp: np.ndarray) -> np.ndarray:
    d = np.eye(Sf.shape[0])
    A1 = (
        np.einsum("ik,jl->ijkl", Sf, d)
        - np.einsum("il,jk->ijkl", Sf, d)
        - np.einsum("jk,il->ijkl", Sf, d)
        + np.einsum("jl,ik->ijkl", Sf, d)
    )
    # JS[k, i] = g(J S e_i, e_k)
    JS = Jp @ Sf
    A2 = (
        np.einsum("ki,lj->ijkl", JS, Jp)
        - np.einsum("li,kj->ijkl", JS, Jp)
        - np.einsum("kj,li->ijkl", JS, Jp)
        + np.einsum("lj,ki->ijkl", JS, Jp)
    )
    omega = Jp.T
    beta = (Sf @ Jp).T
    P = 0.5 * (
        0.5 * (A1 + A2)
        + np.einsum("ij,kl->ijkl", omega, beta)
        + np.einsum("ij,kl->ijkl", beta, omega)
    )
    # the bivector formula is written for the opposite sign convention
    return -P


def adjoint_ck(S: Sym11, tol: float = 1e-8) -> Curv4:
    """Metric adjoint c*_K of the Ricci contraction.

    Raises:
        NotInvariant: if S is not J-invariant within tol.
    """
    scale = max(1.0, float(np.max(np.abs(S.components))))
    res = S.j_residual()
    if res > tol * scale:
        raise NotInvariant(f"S(J., J.) differs from S by {res:.3e}")
    E, F = orthonormal_frame(S.g)
    Jp = F @ S.J @ E
    Sf = E.T @ S.components @ E
    return Curv4.from_frame(_adjoint_frame(Sf, Jp), S.g, S.J)


def curvature_inner(R1: Curv4, R2: Curv4) -> float:
    """<R1, R2> = 1/4 sum R1 R2 over an orthonormal frame."""
    return 0.25 * float(np.sum(R1.frame_components() * R2.frame_components()))


def sym_inner(S1: Sym11, S2: Sym11) -> float:
    return float(np.sum(S1.frame_components() * S2.frame_components()))


def tensor_norm(R: Curv4) -> float:
    return float(np.linalg.norm(R.frame_components().ravel()))


def sym11_frame_basis(Jp: np.ndarray) -> np.ndarray:
    """Orthonormal basis (stacked matrices) of J'-invariant symmetric matrices."""
    n = Jp.shape[0]
    vecs = []
    for a in range(n):
        for b in range(a, n):
            E = np.zeros((n, n))
            E[a, b] = E[b, a] = 1.0
            vecs.append((0.5 * (E + Jp.T @ E @ Jp)).ravel())
    Q = linalg.orth(np.array(vecs).T)
    return Q.T.reshape(-1, n, n)


def decompose(R: Curv4) -> Tuple[Sym11, Curv4]:
    """Split R = c*_K(S) + W with W in the kernel of c_K.

    S solves (c_K o c*_K)(S) = c_K(R) on the J-invariant symmetric forms.

    Raises:
        SingularSystem: if the normal matrix is not positive definite.
    """
    E, F = R.frame()
    Jp = F @ R.J @ E
    basis = sym11_frame_basis(Jp)
    Rf = R.frame_components()
    rhs_f = np.einsum("iaaj->ij", Rf)
    images = [np.einsum("iaaj->ij", _adjoint_frame(B, Jp)) for B in basis]
    M = np.array([[np.sum(Bi * img) for img in images] for Bi in basis])
    rhs = np.array([np.sum(Bi * rhs_f) for Bi in basis])
    try:
        factor = linalg.cho_factor(0.5 * (M + M.T))
        coeffs = linalg.cho_solve(factor, rhs)
    except linalg.LinAlgError as e:
        raise SingularSystem(f"Ricci normal system is singular: {e}") from e
    Sf = np.tensordot(coeffs, basis, axes=1)
    S = Sym11.from_frame(Sf, R.g, R.J)
    W = R - Curv4.from_frame(_adjoint_frame(Sf, Jp), R.g, R.J)
    return S, W


def bochner_ratio(R: Curv4) -> Tuple[float, float]:
    """(|W|, |R|) for the Bochner part W of R."""
    _, W = decompose(R)
    return tensor_norm(W), tensor_norm(R)


def theta_op(R: Curv4, dimC: int) -> Sym11:
    """Bryant operator 1/4 (S - trace(S) / (2 (dimC + 2)) g) as a form."""
    S, _ = decompose(R)
    Sf = S.frame_components()
    Tf = 0.25 * (Sf - np.trace(Sf) / (2 * (dimC + 2)) * np.eye(Sf.shape[0]))
    return Sym11.from_frame(Tf, R.g, R.J)


def theta_eigenvalues(theta: Sym11) -> np.ndarray:
    """Complex eigenvalues of the J-linear endomorphism, one per real pair."""
    vals = linalg.eigvalsh(0.5 * (theta.frame_components() + theta.frame_components().T))
    return vals[::2]


def theta_pairing_residual(theta: Sym11) -> float:
    vals = linalg.eigvalsh(0.5 * (theta.frame_components() + theta.frame_components().T))
    return float(np.max(np.abs(vals[::2] - vals[1::2])))


def symmetry_residuals(R: Curv4) -> Dict[str, float]:
    """Algebraic curvature identities, relative to |R| (absolute when R vanishes)."""
    C = R.components
    J = R.J
    scale = max(float(np.max(np.abs(C))), 1e-300) if np.any(C) else 1.0
    res = {
        "antisym_first": np.max(np.abs(C + np.einsum("ijkl->jikl", C))),
        "antisym_second": np.max(np.abs(C + np.einsum("ijkl->ijlk", C))),
        "pair": np.max(np.abs(C - np.einsum("ijkl->klij", C))),
        "bianchi": np.max(np.abs(C + np.einsum("ijkl->jkil", C) + np.einsum("ijkl->kijl", C))),
        "kahler": np.max(np.abs(np.einsum("abkl,ai,bj->ijkl", C, J, J) - C)),
    }
    return {k: float(v) / scale for k, v in res.items()}


def holomorphic_sectional(R: Curv4, X: np.ndarray) -> float:
    """R(X, JX, JX, X) / g(X, X)^2."""
    JX = R.J @ X
    gxx = float(X @ R.g @ X)
    return R.evaluate(X, JX, JX, X) / gxx**2


def random_sym11(g: np.ndarray, J: np.ndarray, rng: np.random.Generator) -> Sym11:
    E, F = orthonormal_frame(g)
    Jp = F @ J @ E
    A = rng.normal(size=g.shape)
    A = A + A.T
    return Sym11.from_frame(0.5 * (A + Jp.T @ A @ Jp), g, J)


def random_kahler_curvature(dimC: int, rng: np.random.Generator) -> Curv4:
    """Random element of K(V) on R^(2 dimC) with g = Id and the standard J.

    Built from a complex tensor K[i, j, k, l] symmetric in (i, k) and (j, l)
    with K[j, i, l, k] = conj(K[i, j, k, l]), the coefficients of the
    (1,1)(1,1) curvature form.
    """
    n = dimC
    K = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
    K = K + np.einsum("ijkl->kjil", K)
    K = K + np.einsum("ijkl->ilkj", K)
    K = K + np.conj(np.einsum("ijkl->jilk", K))
    # complex coordinates of the real basis vectors
    Z = np.concatenate([np.eye(n), 1j * np.eye(n)]).astype(complex)
    Zc = np.conj(Z)
    first = np.einsum("pi,qj->pqij", Z, Zc) - np.einsum("qi,pj->pqij", Z, Zc)
    R = np.einsum("ijkl,pqij,rskl->pqrs", K, first, first, optimize=True)
    if np.max(np.abs(R.imag)) > 1e-9 * max(1.0, np.max(np.abs(R.real))):
        raise NotInvariant("Random curvature tensor is not real")
    g = np.eye(2 * n)
    return Curv4(R.real, g, standard_J(n))

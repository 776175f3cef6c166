import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

import src.config as config
from src.errors import (
    AmbiguousSpectrum,
    BadParams,
    DegenerateMinimalPoly,
    NotHermitian,
    NotOrthogonal,
    OnDomainBoundary,
)
from src.polyalg import (
    MatrixPoly,
    RealPoly,
    characteristic_polynomial,
    elementary_symmetric,
    jordan_structure,
    minimal_polynomial,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HermForm:
    """Hermitian form of signature (mdim+1, 1) on C^(mdim+2), timelike e_0 first.

    The pairing is conjugate-linear in the second slot:
    (a, b) = -a_0 conj(b_0) + sum_j a_j conj(b_j).
    """

    mdim: int

    def __post_init__(self):
        if self.mdim < 0:
            raise BadParams(f"mdim must be >= 0, got {self.mdim}")

    @property
    def size(self) -> int:
        return self.mdim + 2

    @property
    def eta(self) -> np.ndarray:
        e = np.eye(self.size)
        e[0, 0] = -1.0
        return e

    def pair(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.vdot(b, self.eta @ a))

    def quad(self, M: np.ndarray, w: np.ndarray) -> complex:
        """(M w, w)."""
        return complex(np.vdot(w, self.eta @ (M @ w)))

    def basis(self, j: int) -> np.ndarray:
        e = np.zeros(self.size, dtype=complex)
        e[j] = 1.0
        return e


def eta_residual(form: HermForm, M: np.ndarray) -> float:
    """Residual of conj(M)^T = eta M eta."""
    eta = form.eta
    return float(np.max(np.abs(M.conj().T - eta @ M @ eta)))


@dataclass(frozen=True)
class HermOp:
    """An eta-hermitian operator on W = C^(mdim+2)."""

    entries: np.ndarray
    form: HermForm
    trace_free: bool = False

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=complex)
        if M.shape != (self.form.size, self.form.size):
            raise BadParams(
                f"Operator must be {self.form.size}x{self.form.size}, got {M.shape}"
            )
        object.__setattr__(self, "entries", M)

    def check(self, tol: float = 1e-12) -> None:
        res = eta_residual(self.form, self.entries)
        if res > tol * max(1.0, np.max(np.abs(self.entries))):
            raise NotHermitian(f"eta-hermitian residual {res:.3e} exceeds {tol:.1e}")
        if self.trace_free and abs(np.trace(self.entries)) > tol * max(1.0, np.max(np.abs(self.entries))):
            raise NotHermitian(f"Operator flagged trace-free has trace {np.trace(self.entries):.3e}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


@dataclass(frozen=True)
class NullPoint:
    """A point of the hermitian sphere, as the unit vector u with w = e_0 + u."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        nu = np.linalg.norm(u)
        if abs(nu - 1.0) > 1e-12:
            raise BadParams(f"NullPoint needs |u| = 1, got {nu:.15g}")
        object.__setattr__(self, "u", u)

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([[1.0 + 0.0j], self.u])

    @classmethod
    def random(cls, mdim: int, rng: np.random.Generator) -> "NullPoint":
        v = rng.normal(size=mdim + 1) + 1j * rng.normal(size=mdim + 1)
        return cls(v / np.linalg.norm(v))


@dataclass
class ClassLabel:
    kind: str
    spectrum: List[Tuple[complex, int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "spectrum": [
                {"eigenvalue": [lam.real, lam.imag], "multiplicity": m, "block": b}
                for lam, m, b in self.spectrum
            ],
        }


def classify(A: HermOp, tol: Optional[float] = None) -> ClassLabel:
    """Sort an eta-hermitian operator into one of the four conjugacy classes.

    Args:
        A: operator to classify.
        tol: clustering and rank tolerance (defaults to config.CLASSIFY_TOL).

    Returns:
        ClassLabel: kind plus the clustered spectrum with block sizes.

    Raises:
        NotHermitian: if A is not eta-hermitian within tol.
        AmbiguousSpectrum: if eigenvalue clusters cannot be separated.
    """
    tol = config.CLASSIFY_TOL if tol is None else tol
    M = A.entries
    res = eta_residual(A.form, M)
    if res > tol * max(1.0, A.norm):
        raise NotHermitian(f"eta-hermitian residual {res:.3e} exceeds tolerance {tol:.1e}")
    spectrum = jordan_structure(M, tol)
    blocks = [b for _, _, b in spectrum]
    if any(b >= 3 for b in blocks):
        kind = "parabolic2"
    elif sum(1 for lam, _, b in spectrum if b == 2 and lam.imag == 0) == 1:
        kind = "parabolic1"
    elif any(lam.imag != 0 for lam, _, _ in spectrum):
        kind = "hyperbolic"
    else:
        kind = "elliptic"
    logger.debug(f"classified operator as {kind}")
    return ClassLabel(kind=kind, spectrum=spectrum)


def reduced_adjoint(A: HermOp, q: Optional[RealPoly] = None) -> MatrixPoly:
    """Operator polynomial a~ with (tI - A) a~(t) = q_A(t) Id.

    The coefficient of t^(deg q - 1 - k) is a_k = A^k - s_1 A^(k-1) + ... + (-1)^k s_k Id
    where s_k are the elementary symmetric functions of the roots of q_A.
    A known minimal polynomial may be passed as q.

    Raises:
        DegenerateMinimalPoly: if the minimal polynomial cannot be resolved.
    """
    if q is None:
        try:
            q = minimal_polynomial(A.entries)
        except AmbiguousSpectrum as e:
            raise DegenerateMinimalPoly(str(e)) from e
    M = A.entries
    n = M.shape[0]
    d = q.degree
    sigma = elementary_symmetric(q)
    a = []
    current = np.zeros((n, n), dtype=complex)
    for k in range(d):
        current = (M @ current if k else np.zeros_like(M)) + ((-1) ** k) * sigma[k] * np.eye(n)
        a.append(current)
    # a[k] multiplies t^(d-1-k)
    return MatrixPoly(a[::-1])


def minimal_poly_of(A: HermOp) -> RealPoly:
    try:
        return minimal_polynomial(A.entries)
    except AmbiguousSpectrum as e:
        raise DegenerateMinimalPoly(str(e)) from e


def pA_poly(
    A: HermOp,
    x: NullPoint,
    q: Optional[RealPoly] = None,
    margin: float = 1e-9,
) -> RealPoly:
    """The real polynomial t -> (a~(t) w, w) / (A w, w).

    Raises:
        OnDomainBoundary: if (Aw, w) is below margin * |A|.
    """
    w = x.w
    aw = A.form.quad(A.entries, w)
    if abs(aw) <= margin * max(A.norm, 1e-300):
        raise OnDomainBoundary(f"(Aw,w) = {aw.real:.3e} is on the domain boundary")
    adj = reduced_adjoint(A, q)
    vals = adj.quadratic_form(w, A.form.eta) / aw
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals.imag)) > 1e-10 * scale:
        raise NotHermitian(f"p_A,x has imaginary coefficients {np.max(np.abs(vals.imag)):.3e}")
    # leading coefficient (w,w)/(Aw,w) vanishes on the null cone
    coeffs = vals.real.copy()
    coeffs[-1] = 0.0
    return RealPoly(coeffs)


def sphere_metric_H(
    A: HermOp, x: NullPoint, X: np.ndarray, Y: np.ndarray, tol: float = 1e-9
) -> float:
    """Metric on the horizontal space at x from representatives X, Y in x-perp.

    Raises:
        NotOrthogonal: if X or Y is not orthogonal to w.
        OnDomainBoundary: if (Aw, w) is not positive.
    """
    form = A.form
    w = x.w
    for name, vec in (("X", X), ("Y", Y)):
        if abs(form.pair(vec, w)) > tol * max(1.0, np.linalg.norm(vec)):
            raise NotOrthogonal(f"{name} is not orthogonal to w: {abs(form.pair(vec, w)):.3e}")
    aw = form.quad(A.entries, w).real
    if aw <= 0:
        raise OnDomainBoundary(f"(Aw,w) = {aw:.3e} is not positive")
    return form.pair(X, Y).real / aw


def patrat_residual(A: HermOp, x: NullPoint, t: float, q: Optional[RealPoly] = None) -> float:
    """Relative residual of (a~(t)w, a~(t)w)/(Aw,w) = q'(t)p(t) - q(t)p'(t)."""
    q = minimal_poly_of(A) if q is None else q
    p = pA_poly(A, x, q)
    w = x.w
    y = reduced_adjoint(A, q)(t) @ w
    lhs = A.form.pair(y, y).real / A.form.quad(A.entries, w).real
    rhs = q.derivative()(t) * p(t) - q(t) * p.derivative()(t)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def aditional_residual(A: HermOp, x: NullPoint, t: float, q: Optional[RealPoly] = None) -> float:
    """Relative residual of the horizontal norm of a~(t)w - p(t)Aw against its closed form."""
    q = minimal_poly_of(A) if q is None else q
    p = pA_poly(A, x, q)
    w = x.w
    form = A.form
    X = reduced_adjoint(A, q)(t) @ w - p(t) * (A.entries @ w)
    lhs = 4 * sphere_metric_H(A, x, X, X)
    aw = form.quad(A.entries, w).real
    a2w = form.quad(A.entries @ A.entries, w).real
    pt = p(t)
    rhs = 4 * (q.derivative()(t) * pt - q(t) * p.derivative()(t) - 2 * t * pt**2 + pt**2 * a2w / aw)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def hermitian_basis(form: HermForm) -> List[np.ndarray]:
    """Real basis of eta-hermitian operators, as eta H with H running over hermitian units."""
    n = form.size
    eta = form.eta
    out = []
    for i in range(n):
        for j in range(i, n):
            H = np.zeros((n, n), dtype=complex)
            if i == j:
                H[i, i] = 1.0
                out.append(eta @ H)
            else:
                H[i, j] = H[j, i] = 1.0
                out.append(eta @ H)
                H = np.zeros((n, n), dtype=complex)
                H[i, j] = 1j
                H[j, i] = -1j
                out.append(eta @ H)
    return out


def identitate_nullspace(
    n_samples: int, seed: int, form: HermForm, trace_free: bool = True
) -> int:
    """Dimension of the space of eta-hermitian A with (Aw, w) = 0 on sampled null w.

    Args:
        n_samples: number of random null vectors, at least (mdim+2)^2.
        seed: sampling seed.
        form: the hermitian form.
        trace_free: add the trace constraint.

    Returns:
        int: nullity of the assembled real-linear system.
    """
    basis = hermitian_basis(form)
    if n_samples < len(basis):
        raise BadParams(f"Need at least {len(basis)} samples, got {n_samples}")
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_samples):
        w = NullPoint.random(form.mdim, rng).w
        rows.append([form.quad(E, w).real for E in basis])
    if trace_free:
        rows.append([np.trace(E).real for E in basis])
    sv = linalg.svdvals(np.array(rows))
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    return len(basis) - rank


def random_eta_unitary(form: HermForm, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """exp of a random eta-antihermitian matrix."""
    n = form.size
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = 0.5 * (H + H.conj().T)
    return linalg.expm(1j * scale * form.eta @ H)


def random_eta_hermitian(
    form: HermForm, rng: np.random.Generator, trace_free: bool = True
) -> np.ndarray:
    n = form.size
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = 0.5 * (H + H.conj().T)
    A = form.eta @ H
    if trace_free:
        A = A - np.trace(A) / n * np.eye(n)
    return A


def load_operator(source: Union[str, Path, dict]) -> HermOp:
    """Read an operator file {"mdim": int, "matrix": [[[re, im], ...], ...]}."""
    if isinstance(source, dict):
        data = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    if "mdim" not in data or "matrix" not in data:
        raise BadParams("Operator JSON needs 'mdim' and 'matrix'")
    mdim = int(data["mdim"])
    rows = data["matrix"]
    n = mdim + 2
    if len(rows) != n or any(len(row) != n for row in rows):
        raise BadParams(f"Operator matrix must be {n}x{n} for mdim = {mdim}")
    M = np.array([[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in rows])
    return HermOp(M, HermForm(mdim))


def operator_to_json(A: HermOp) -> dict:
    return {
        "mdim": A.form.mdim,
        "matrix": [[[float(e.real), float(e.imag)] for e in row] for row in A.entries],
    }


def describe(A: HermOp, tol: Optional[float] = None) -> dict:
    """ClassLabel plus q_A and Q_A, as printed by the classify command."""
    label = classify(A, tol)
    q = minimal_polynomial(A.entries, tol)
    Q = characteristic_polynomial(A.entries, tol)
    out = label.to_dict()
    out["q"] = q.to_string()
    out["Q"] = Q.to_string()
    out["q_coeffs"] = q.to_list()
    out["Q_coeffs"] = Q.to_list()
    return out

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.polynomial.polynomial as npoly
from scipy import linalg

import src.config as config
from src.errors import AmbiguousSpectrum, ZeroPolynomial

logger = logging.getLogger(__name__)

TRIM_REL = 1e-12


class RealPoly:
    """Real polynomial with ascending coefficients.

    Trailing coefficients below ``1e-12 * max|coeff|`` are trimmed on
    construction, so ``degree`` is the numerical degree.
    """

    def __init__(self, coeffs: Iterable[float]):
        arr = np.atleast_1d(np.asarray(list(coeffs), dtype=float))
        if arr.size == 0:
            arr = np.zeros(1)
        scale = np.max(np.abs(arr))
        if scale > 0:
            keep = np.nonzero(np.abs(arr) > TRIM_REL * scale)[0]
            arr = arr[: keep[-1] + 1]
        else:
            arr = np.zeros(1)
        self.coeffs = arr

    @classmethod
    def constant(cls, c: float) -> "RealPoly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c: float = 1.0) -> "RealPoly":
        return cls([0.0] * k + [c])

    @classmethod
    def linear(cls, root: float) -> "RealPoly":
        """t - root."""
        return cls([-root, 1.0])

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: float = 1.0) -> "RealPoly":
        """Monic product of (t - root); complex roots must come in conjugate pairs."""
        if len(roots) == 0:
            return cls([lead])
        c = npoly.polyfromroots(np.asarray(roots, dtype=complex))
        if np.max(np.abs(c.imag)) > 1e-8 * max(1.0, np.max(np.abs(c.real))):
            raise ValueError(f"Roots do not give a real polynomial: {roots}")
        return cls(lead * c.real)

    @property
    def degree(self) -> int:
        if self.is_zero():
            return -1
        return len(self.coeffs) - 1

    @property
    def lead(self) -> float:
        return float(self.coeffs[-1])

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    def __call__(self, t):
        return npoly.polyval(t, self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        return RealPoly(npoly.polyadd(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        return RealPoly(npoly.polysub(self.coeffs, other.coeffs))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __neg__(self):
        return RealPoly(-self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return RealPoly(self.coeffs * float(other))
        return RealPoly(npoly.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RealPoly([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def derivative(self) -> "RealPoly":
        if len(self.coeffs) == 1:
            return RealPoly([0.0])
        return RealPoly(npoly.polyder(self.coeffs))

    def shift(self, c: float) -> "RealPoly":
        """Return t -> p(t + c)."""
        out = RealPoly([0.0])
        step = RealPoly([c, 1.0])
        for a in self.coeffs[::-1]:
            out = out * step + a
        return out

    def monic(self) -> "RealPoly":
        if self.is_zero():
            raise ZeroPolynomial("Cannot normalize the zero polynomial")
        return RealPoly(self.coeffs / self.lead)

    def divmod(self, divisor: "RealPoly") -> Tuple["RealPoly", "RealPoly"]:
        if divisor.is_zero():
            raise ZeroPolynomial("Division by the zero polynomial")
        quo, rem = npoly.polydiv(self.coeffs, divisor.coeffs)
        return RealPoly(quo), RealPoly(rem)

    def exact_div(self, divisor: "RealPoly", tol: float = 1e-9) -> "RealPoly":
        """Divide by an exact factor, raising if the remainder is not negligible."""
        quo, rem = self.divmod(divisor)
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        if np.max(np.abs(rem.coeffs)) > tol * scale:
            raise ValueError(
                f"Division is not exact: remainder {np.max(np.abs(rem.coeffs)):.3e}"
            )
        return quo

    def max_abs_diff(self, other: "RealPoly") -> float:
        return float(np.max(np.abs((self - other).coeffs)))

    def roots(self) -> List[complex]:
        return roots(self)

    def to_string(self, var: str = "t", digits: int = 6) -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0 and len(self.coeffs) > 1:
                continue
            mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            if mono and np.isclose(c, 1.0):
                terms.append(mono)
            elif mono and np.isclose(c, -1.0):
                terms.append(f"-{mono}")
            else:
                num = f"{c:.{digits}g}"
                terms.append(f"{num}*{mono}" if mono else num)
        return " + ".join(terms).replace("+ -", "- ")

    def to_list(self) -> List[float]:
        return [float(c) for c in self.coeffs]

    def __repr__(self) -> str:
        return f"RealPoly({self.to_string()})"


def _as_poly(x) -> RealPoly:
    if isinstance(x, RealPoly):
        return x
    return RealPoly([float(x)])


def horner(coeffs: Sequence, t):
    """Evaluate ascending coefficients at t; works for any ring-like values (jets, arrays)."""
    out = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        out = out * t + c
    return out


class MatrixPoly:
    """Polynomial with square matrix coefficients, ascending degree."""

    def __init__(self, coeffs: Sequence[np.ndarray]):
        self.coeffs = [np.asarray(c, dtype=complex) for c in coeffs]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t) -> np.ndarray:
        out = self.coeffs[-1].copy()
        for c in reversed(self.coeffs[:-1]):
            out = out * t + c
        return out

    def scale_by(self, p: RealPoly) -> "MatrixPoly":
        """Product with a scalar polynomial."""
        n = self.coeffs[0].shape[0]
        out = [np.zeros((n, n), dtype=complex) for _ in range(self.degree + p.degree + 1)]
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(p.coeffs):
                out[i + j] = out[i + j] + b * a
        return MatrixPoly(out)

    def quadratic_form(self, w: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Complex coefficients (C_k w, w) for the pairing with signature matrix eta."""
        return np.array([np.vdot(w, eta @ (c @ w)) for c in self.coeffs])


def roots(p: RealPoly) -> List[complex]:
    """All roots of p from companion-matrix eigenvalues, Newton polished.

    Args:
        p: polynomial of degree >= 1.

    Returns:
        List[complex]: roots sorted by (real, imag).

    Raises:
        ZeroPolynomial: if p is identically zero.
    """
    if p.is_zero():
        raise ZeroPolynomial("The zero polynomial has no isolated roots")
    if p.degree < 1:
        return []
    c = p.coeffs
    raw = linalg.eigvals(npoly.polycompanion(c))
    dp = npoly.polyder(c)
    polished = []
    for z0 in raw:
        z = complex(z0)
        best, best_val = z, abs(npoly.polyval(z, c))
        for _ in range(10):
            d = npoly.polyval(z, dp)
            if d == 0:
                break
            z = z - npoly.polyval(z, c) / d
            val = abs(npoly.polyval(z, c))
            if not np.isfinite(val):
                break
            if val < best_val:
                best, best_val = z, val
        polished.append(best)
    # real polynomials: snap near-real roots
    scale = max(1.0, float(np.max(np.abs(c))))
    out = []
    for z in polished:
        if abs(z.imag) < 1e-10 * max(1.0, abs(z)) or (
            abs(npoly.polyval(z.real, c)) <= 1e-10 * scale and abs(z.imag) < 1e-6
        ):
            z = complex(z.real, 0.0)
        out.append(z)
    return sorted(out, key=lambda z: (round(z.real, 12), z.imag))


def real_roots(p: RealPoly, imag_tol: float = 1e-7) -> np.ndarray:
    return np.array(sorted(z.real for z in roots(p) if abs(z.imag) <= imag_tol))


def _cluster(values: np.ndarray, radius: float) -> List[List[int]]:
    """Single-linkage clusters of complex values."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) < radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def jordan_structure(
    A: np.ndarray, tol: Optional[float] = None
) -> List[Tuple[complex, int, int]]:
    """Clustered spectrum of A as (eigenvalue, algebraic multiplicity, largest block).

    Rounding splits a Jordan block of size k by roughly eps^(1/k), so eigenvalues
    are clustered within sqrt(tol) * max(1, |A|) and clusters closer than ten
    radii are rejected.

    Raises:
        AmbiguousSpectrum: if two clusters are too close to tell apart.
    """
    tol = config.CLASSIFY_TOL if tol is None else tol
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    radius = np.sqrt(tol) * scale
    eig = linalg.eigvals(A)
    groups = _cluster(eig, radius)
    centers = [complex(np.mean(eig[g])) for g in groups]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            gap = abs(centers[i] - centers[j])
            if gap < 10 * radius:
                raise AmbiguousSpectrum(
                    f"Eigenvalue clusters {centers[i]:.6g} and {centers[j]:.6g} "
                    f"are only {gap:.3e} apart (radius {radius:.3e})"
                )
    out = []
    ident = np.eye(n, dtype=complex)
    for g, lam in zip(groups, centers):
        mult = len(g)
        shifted = A - lam * ident
        power = ident
        block = mult
        for k in range(1, mult + 1):
            power = power @ shifted
            sv = linalg.svdvals(power)
            nullity = int(np.sum(sv <= np.sqrt(tol) * scale**k))
            if nullity >= mult:
                block = k
                break
        if abs(lam.imag) < radius:
            lam = complex(lam.real, 0.0)
        out.append((lam, mult, block))
    return sorted(out, key=lambda e: (round(e[0].real, 12), e[0].imag))


def _real_from_factors(factors: List[Tuple[complex, int]]) -> RealPoly:
    rts = []
    for lam, k in factors:
        rts.extend([lam] * k)
    c = npoly.polyfromroots(np.asarray(rts, dtype=complex)) if rts else np.ones(1)
    return RealPoly(np.real(c))


def minimal_polynomial(A: np.ndarray, tol: Optional[float] = None) -> RealPoly:
    """Monic minimal polynomial built as prod (t - lam_i)^{b_i} over clusters."""
    spectrum = jordan_structure(A, tol)
    return _real_from_factors([(lam, block) for lam, _, block in spectrum])


def characteristic_polynomial(A: np.ndarray, tol: Optional[float] = None) -> RealPoly:
    """Monic characteristic polynomial from clustered eigenvalues and multiplicities."""
    spectrum = jordan_structure(A, tol)
    return _real_from_factors([(lam, mult) for lam, mult, _ in spectrum])


def elementary_symmetric(q: RealPoly) -> List[float]:
    """sigma_k of the roots of a monic q, read off its coefficients."""
    q = q.monic()
    d = q.degree
    return [((-1) ** k) * q.coeffs[d - k] for k in range(d + 1)]

"""Second-order forward-mode jets.

A Jet2 carries a value array together with its gradient and Hessian with
respect to n independent variables. Values may be arrays of any shape S;
gradients then have shape S + (n,) and Hessians S + (n, n), so whole
matrices of chart functions (the metric, for instance) are differentiated
in one pass.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from src.errors import DomainError

logger = logging.getLogger(__name__)


class Jet2:
    __slots__ = ("val", "grad", "hess")
    # make numpy defer to the reflected Jet2 operators
    __array_ufunc__ = None

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def variables(cls, point: Sequence[float]) -> "Jet2":
        point = np.asarray(point, dtype=float)
        n = point.shape[0]
        return cls(point.copy(), np.eye(n), np.zeros((n, n, n)))

    @classmethod
    def constant(cls, value, n: int) -> "Jet2":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros(value.shape + (n,)), np.zeros(value.shape + (n, n)))

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.val.shape

    def __len__(self) -> int:
        return self.val.shape[0]

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, Jet2):
            other = np.asarray(other, dtype=float)
            val = self.val + other
            return Jet2(
                val,
                np.broadcast_to(self.grad, val.shape + (self.n,)),
                np.broadcast_to(self.hess, val.shape + (self.n, self.n)),
            )
        return Jet2(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        val = a.val * b.val
        grad = a.val[..., None] * b.grad + b.val[..., None] * a.grad
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        hess = (
            a.val[..., None, None] * b.hess
            + b.val[..., None, None] * a.hess
            + cross
            + np.swapaxes(cross, -1, -2)
        )
        return Jet2(val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self):
        if np.any(self.val == 0):
            raise DomainError("Division by zero in jet arithmetic")
        v = self.val
        return self._unary(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        p = float(p)
        v = self.val
        if p != int(p) and np.any(v < 0):
            raise DomainError("Fractional power of a negative jet value")
        return self._unary(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __matmul__(self, M):
        # jet vector (k,) @ constant matrix (k, m)
        M = np.asarray(M, dtype=float)
        return Jet2(
            self.val @ M,
            np.tensordot(M, self.grad, axes=([0], [0])),
            np.tensordot(M, self.hess, axes=([0], [0])),
        )

    def __rmatmul__(self, M):
        # constant matrix (m, k) @ jet with leading axis k
        M = np.asarray(M, dtype=float)
        return Jet2(
            np.tensordot(M, self.val, axes=([1], [0])),
            np.tensordot(M, self.grad, axes=([1], [0])),
            np.tensordot(M, self.hess, axes=([1], [0])),
        )

    def _unary(self, f0, f1, f2):
        g = self.grad
        grad = f1[..., None] * g
        hess = f1[..., None, None] * self.hess + f2[..., None, None] * (
            g[..., :, None] * g[..., None, :]
        )
        return Jet2(f0, grad, hess)

    # indexing and reshaping over the value axes only
    def __getitem__(self, idx):
        return Jet2(self.val[idx], self.grad[idx], self.hess[idx])

    def sum(self, axis: int = 0):
        if axis < 0:
            axis += self.val.ndim
        return Jet2(self.val.sum(axis), self.grad.sum(axis), self.hess.sum(axis))

    @property
    def T(self):
        return Jet2(
            self.val.T,
            np.swapaxes(self.grad, 0, 1),
            np.swapaxes(self.hess, 0, 1),
        )

    # elementary functions
    def sqrt(self):
        if np.any(self.val < 0):
            raise DomainError(f"sqrt of negative value {np.min(self.val):.3e}")
        s = np.sqrt(self.val)
        if np.any(s == 0):
            raise DomainError("sqrt is not differentiable at 0")
        return self._unary(s, 0.5 / s, -0.25 / s**3)

    def exp(self):
        e = np.exp(self.val)
        return self._unary(e, e, e)

    def log(self):
        if np.any(self.val <= 0):
            raise DomainError(f"log of non-positive value {np.min(self.val):.3e}")
        v = self.val
        return self._unary(np.log(v), 1.0 / v, -1.0 / v**2)

    def sin(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._unary(s, c, -s)

    def cos(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self._unary(c, -s, -c)

    def tan(self):
        t = np.tan(self.val)
        sec2 = 1.0 + t**2
        return self._unary(t, sec2, 2.0 * t * sec2)

    def arctan(self):
        v = self.val
        d = 1.0 / (1.0 + v**2)
        return self._unary(np.arctan(v), d, -2.0 * v * d**2)

    def tanh(self):
        t = np.tanh(self.val)
        sech2 = 1.0 - t**2
        return self._unary(t, sech2, -2.0 * t * sech2)

    def __repr__(self) -> str:
        return f"Jet2(val={self.val!r}, n={self.n})"


def value(x):
    return x.val if isinstance(x, Jet2) else x


def _dispatch(name: str, np_func: Callable):
    def func(x):
        if isinstance(x, Jet2):
            return getattr(x, name)()
        if name == "sqrt" and np.any(np.asarray(x) < 0):
            raise DomainError(f"sqrt of negative value {np.min(x):.3e}")
        if name == "log" and np.any(np.asarray(x) <= 0):
            raise DomainError(f"log of non-positive value {np.min(x):.3e}")
        return np_func(x)

    func.__name__ = name
    return func


sqrt = _dispatch("sqrt", np.sqrt)
exp = _dispatch("exp", np.exp)
log = _dispatch("log", np.log)
sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)
tan = _dispatch("tan", np.tan)
arctan = _dispatch("arctan", np.arctan)
tanh = _dispatch("tanh", np.tanh)


def concat(parts: Sequence) -> "Jet2":
    """Concatenate scalars, vectors and jet vectors along the first axis."""
    n = next((p.n for p in parts if isinstance(p, Jet2)), None)
    if n is None:
        return np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts])
    lifted = []
    for p in parts:
        if not isinstance(p, Jet2):
            p = Jet2.constant(np.atleast_1d(np.asarray(p, dtype=float)), n)
        elif p.val.ndim == 0:
            p = p[None]
        lifted.append(p)
    return Jet2(
        np.concatenate([p.val for p in lifted]),
        np.concatenate([p.grad for p in lifted]),
        np.concatenate([p.hess for p in lifted]),
    )


def stack(parts: Sequence, axis: int = 0):
    n = next((p.n for p in parts if isinstance(p, Jet2)), None)
    if n is None:
        return np.stack([np.asarray(p, dtype=float) for p in parts], axis=axis)
    lifted = [p if isinstance(p, Jet2) else Jet2.constant(p, n) for p in parts]
    return Jet2(
        np.stack([p.val for p in lifted], axis=axis),
        np.stack([p.grad for p in lifted], axis=axis),
        np.stack([p.hess for p in lifted], axis=axis),
    )


def outer(a, b):
    return a[:, None] * b[None, :]


@dataclass(frozen=True)
class Jet1r:
    """Value and first two derivatives of a function of one variable."""

    value: float
    d1: float
    d2: float


def hessian(fn: Callable, point: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
    """Exact value, gradient and Hessian of a scalar field built from jet primitives.

    Args:
        fn: scalar field taking a Jet2 vector of variables.
        point: evaluation point in R^n.

    Returns:
        Tuple[float, np.ndarray, np.ndarray]: value, gradient, Hessian.

    Raises:
        DomainError: propagated from the primitives.
    """
    x = Jet2.variables(point)
    out = fn(x)
    if not isinstance(out, Jet2):
        n = len(point)
        return float(out), np.zeros(n), np.zeros((n, n))
    return float(out.val), out.grad.copy(), out.hess.copy()


def deriv_r(fn: Callable, r0: float) -> Jet1r:
    """Value, first and second derivative of a scalar function of r at r0."""
    r = Jet2.variables([r0])[0]
    out = fn(r)
    if not isinstance(out, Jet2):
        return Jet1r(float(out), 0.0, 0.0)
    return Jet1r(float(out.val), float(out.grad[0]), float(out.hess[0, 0]))


def finite_difference_hessian(
    fn: Callable, point: Sequence[float], step: float = 1e-4
) -> Tuple[np.ndarray, np.ndarray]:
    """Central differences on a float-valued field; a test oracle for hessian()."""
    point = np.asarray(point, dtype=float)
    n = point.size
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    f0 = fn(point)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        grad[i] = (fn(point + ei) - fn(point - ei)) / (2 * step)
        hess[i, i] = (fn(point + ei) - 2 * f0 + fn(point - ei)) / step**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step
            hess[i, j] = hess[j, i] = (
                fn(point + ei + ej) - fn(point + ei - ej) - fn(point - ei + ej) + fn(point - ei - ej)
            ) / (4 * step**2)
    return grad, hess

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

import src.jets as jets
from src.errors import BadParams, DomainError, NoConvergence, OutsideDomain
from src.families import FamilySpec, case1_weights, mu_solution, resolve_branch

logger = logging.getLogger(__name__)

SUBTYPES = ("hyperbolic", "elliptic", "parabolic")
MAX_ITER = 100
SCAN_POINTS = 400


def _check_subtype(subtype: str, spec: FamilySpec) -> None:
    if subtype not in SUBTYPES:
        raise BadParams(f"Unknown potential subtype '{subtype}', expected one of {SUBTYPES}")
    if spec.case != 1 or spec.d is None:
        raise BadParams("Implicit potentials are defined for case-1 specs with d")
    expected = "hyperbolic" if spec.d > 0 else ("elliptic" if spec.d < 0 else "parabolic")
    if subtype != expected:
        raise BadParams(f"Subtype '{subtype}' does not match d = {spec.d} ({expected})")


def inverse_square_factors(subtype: str, spec: FamilySpec) -> Callable:
    """x -> [1 / f_j(x)^2 for j = 1..m+1]; works on floats and jets."""
    _check_subtype(subtype, spec)
    ks, k = case1_weights(spec)
    cs = [kj + k for kj in ks]
    if subtype == "parabolic":
        q = spec.const
        return lambda x: [x * jets.exp(-c * x) / (x + q) for c in cs]
    if subtype == "hyperbolic":
        beta = math.sqrt(2 * spec.d)
        return lambda x: [x * jets.exp(-c * x) / jets.cos(beta * x / 2) for c in cs]
    beta = math.sqrt(-2 * spec.d)
    p = spec.const
    betas = [c / beta - 0.5 for c in cs]

    def elliptic(x):
        E = jets.exp(beta * x + p)
        return [x * jets.exp(-bj * (beta * x + p)) / (math.exp(2 * p) * (E - 1)) for bj in betas]

    return elliptic


def radial_substitution(subtype: str, spec: FamilySpec) -> Tuple[Callable, Callable]:
    """(x -> y, y -> x) for the coordinate the reduced equation is written in.

    hyperbolic: x = (4/beta) arctan sqrt(1 + y), with y in (-1, 0) on the domain
    elliptic:   y = e^(beta x) - e^(-p)
    parabolic:  y = x + q
    """
    _check_subtype(subtype, spec)
    if subtype == "parabolic":
        q = spec.const
        return (lambda x: x + q), (lambda y: y - q)
    if subtype == "hyperbolic":
        beta = math.sqrt(2 * spec.d)
        return (
            lambda x: math.tan(beta * x / 4) ** 2 - 1,
            lambda y: 4 / beta * math.atan(math.sqrt(1 + y)),
        )
    beta = math.sqrt(-2 * spec.d)
    p = spec.const
    return (lambda x: math.exp(beta * x) - math.exp(-p)), (lambda y: math.log(y + math.exp(-p)) / beta)


def reduced_equation(subtype: str, spec: FamilySpec) -> Callable:
    """(y, |w_j|^2 list) -> residual of the potential equation in the coordinate y."""
    _check_subtype(subtype, spec)
    ks, k = case1_weights(spec)
    cs = [kj + k for kj in ks]
    if subtype == "parabolic":
        q = spec.const
        return lambda y, a: sum(aj * jets.exp(-c * (y - q)) for aj, c in zip(a, cs)) - y
    if subtype == "hyperbolic":
        beta = math.sqrt(2 * spec.d)
        ls = [2 * c / beta for c in cs]

        def hyperbolic(y, a):
            theta = jets.arctan(jets.sqrt(1 + y))
            return sum(aj * jets.exp(-2 * lj * theta) for aj, lj in zip(a, ls)) + y / (2 + y)

        return hyperbolic
    beta = math.sqrt(-2 * spec.d)
    p = spec.const
    betas = [c / beta - 0.5 for c in cs]

    def elliptic(y, a):
        u = math.exp(p) * y
        total = sum(aj * jets.exp(-bj * jets.log(u + 1)) for aj, bj in zip(a, betas))
        return math.exp(-2 * p) * total / u - 1

    return elliptic


def potential_map(subtype: str, spec: FamilySpec, z: np.ndarray) -> np.ndarray:
    """F(z) = (f_1(r^2) z_1, ..., f_{m+1}(r^2) z_{m+1}).

    Raises:
        OutsideDomain: if some 1/f_j^2 is not positive at r^2.
    """
    z = np.asarray(z, dtype=complex)
    x = float(np.vdot(z, z).real)
    inv = np.array(inverse_square_factors(subtype, spec)(x), dtype=float)
    if np.any(inv <= 0) or not np.all(np.isfinite(inv)):
        raise OutsideDomain(f"1/f_j^2 = {inv} is not positive at x = {x:.6g}")
    return z / np.sqrt(inv)


def _safeguarded_newton(h: Callable, lo: float, hi: float, tol: float) -> float:
    """Root of h in a sign-changing bracket; Newton steps with bisection fallback."""
    h_lo = float(jets.value(h(lo)))
    x = 0.5 * (lo + hi)
    for it in range(MAX_ITER):
        jet = jets.deriv_r(h, x)
        val, slope = jet.value, jet.d1
        if abs(val) < tol:
            return x
        if np.sign(val) == np.sign(h_lo):
            lo, h_lo = x, val
        else:
            hi = x
        step = x - val / slope if slope != 0 else None
        x = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
    raise NoConvergence(f"No convergence after {MAX_ITER} iterations (last x = {x:.6g})")


def _bracket(h: Callable, lo: float, hi: float) -> Tuple[float, float]:
    grid = np.linspace(lo, hi, SCAN_POINTS)
    vals = []
    for x in grid:
        try:
            vals.append(float(jets.value(h(float(x)))))
        except (DomainError, ZeroDivisionError, FloatingPointError):
            vals.append(np.nan)
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and np.sign(a) != np.sign(b):
            return float(grid[i]), float(grid[i + 1])
        if np.isfinite(a) and a == 0:
            return float(grid[i]), float(grid[i])
    raise NoConvergence(f"No sign change of the potential equation on [{lo:.4g}, {hi:.4g}]")


def _solve(h: Callable, interval: Tuple[float, float], tol: float) -> float:
    lo, hi = _bracket(h, *interval)
    if lo == hi:
        return lo
    return _safeguarded_newton(h, lo, hi, tol)


def _square_interval(spec: FamilySpec, interval: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    if interval is not None:
        return interval
    from src.families import default_interval

    lo, hi = default_interval(spec, resolve_branch(spec.d, spec.branch))
    return lo * lo, hi * hi


def solve_implicit_potential(
    subtype: str,
    spec: FamilySpec,
    wpoint: np.ndarray,
    interval: Optional[Tuple[float, float]] = None,
    tol: float = 1e-12,
) -> float:
    """Solve sum |w_j|^2 / f_j(x)^2 = x for x.

    The interval of x (default: J squared) is scanned for a sign change and
    the bracketed root is polished by safeguarded Newton.

    Raises:
        NoConvergence: if there is no sign change or Newton stalls.
    """
    a = np.abs(np.asarray(wpoint, dtype=complex)) ** 2
    factors = inverse_square_factors(subtype, spec)

    def h(x):
        return sum(aj * fj for aj, fj in zip(a, factors(x))) - x

    x = _solve(h, _square_interval(spec, interval), tol)
    logger.debug(f"{subtype} potential solved at x = {x:.12g}")
    return x


def solve_reduced_potential(
    subtype: str,
    spec: FamilySpec,
    wpoint: np.ndarray,
    interval: Optional[Tuple[float, float]] = None,
    tol: float = 1e-12,
) -> float:
    """Solve the reduced equation for y and return x(y).

    The x interval (default: J squared) is mapped to y by the monotone
    substitution of `radial_substitution`.
    """
    a = np.abs(np.asarray(wpoint, dtype=complex)) ** 2
    eq = reduced_equation(subtype, spec)
    to_y, to_x = radial_substitution(subtype, spec)
    lo, hi = _square_interval(spec, interval)
    y = _solve(lambda y: eq(y, a), (to_y(lo), to_y(hi)), tol)
    x = to_x(y)
    logger.debug(f"{subtype} reduced potential solved at y = {y:.12g}, x = {x:.12g}")
    return x


def potential_residuals(
    subtype: str, spec: FamilySpec, z: np.ndarray, interval: Optional[Tuple[float, float]] = None
) -> Tuple[float, float]:
    """|x(F(z)) - |z|^2| for the implicit and the reduced equation."""
    z = np.asarray(z, dtype=complex)
    r2 = float(np.vdot(z, z).real)
    w = potential_map(subtype, spec, z)
    x1 = solve_implicit_potential(subtype, spec, w, interval)
    x2 = solve_reduced_potential(subtype, spec, w, interval)
    return abs(x1 - r2), abs(x2 - r2)


def tachibana_constants(spec: FamilySpec) -> Tuple[float, float, float]:
    """(a, lambda_1, lambda_2) of the rotationally symmetric family."""
    ks, _ = case1_weights(spec)
    if any(abs(kj - ks[0]) > 1e-12 for kj in ks):
        raise BadParams("The Tachibana family needs equal weights k_1 = ... = k_{m+1}")
    a = (spec.mdim + 2) * ks[0]
    return a, a * a + spec.d / 2, -2 * a


def tachibana_solution(spec: FamilySpec, t: float, tol: float = 1e-13) -> Tuple[float, float, float]:
    """x(t), x'(t), x''(t) for exp(a x) mu'(x)^(-1/2) = t.

    Newton runs on the logarithm F(x) = a x - log(mu'(x))/2 = log t and the
    derivatives follow from implicit differentiation.

    Raises:
        NoConvergence: if no bracket or no convergence.
    """
    if t <= 0:
        raise BadParams(f"t must be positive, got {t}")
    a, _, _ = tachibana_constants(spec)
    branch = resolve_branch(spec.d, spec.branch)

    def F(x):
        _, dmu = mu_solution(spec.d, spec.const, x, branch)
        return a * x - 0.5 * jets.log(dmu)

    target = math.log(t)
    # stay clear of the pole guard of mu
    lo = max(0.0, -spec.const if branch == "rational" else 0.0) + 2e-3
    hi = lo + 1.0
    for _ in range(60):
        if float(F(hi)) > target:
            break
        hi = lo + 2 * (hi - lo)
    else:
        raise NoConvergence(f"No upper bracket for t = {t}")
    if float(F(lo)) >= target:
        raise NoConvergence(f"No lower bracket for t = {t}")
    x = _safeguarded_newton(lambda s: F(s) - target, lo, hi, tol)
    jet = jets.deriv_r(F, x)
    F1, F2 = jet.d1, jet.d2
    xd = 1.0 / (t * F1)
    xdd = -(F1 * xd + t * F2 * xd**2) / (t * F1)
    return x, xd, xdd


def tachibana_residuals(spec: FamilySpec, ts: List[float]) -> Tuple[float, float]:
    """(max ODE residual, max residual of the generating equation) over ts."""
    a, lam1, lam2 = tachibana_constants(spec)
    branch = resolve_branch(spec.d, spec.branch)
    ode, eq = 0.0, 0.0
    for t in ts:
        x, xd, xdd = tachibana_solution(spec, t)
        ode = max(ode, abs(xdd - lam1 * t * xd**3 - lam2 * xd**2))
        _, dmu = mu_solution(spec.d, spec.const, x, branch)
        eq = max(eq, abs(math.exp(a * x) / math.sqrt(dmu) - t) / max(1.0, t))
    return ode, eq

"""Checks of the B-hat polynomial machinery in cases 3/4.

On these families B_r / r^2 = B + delta(r) A with A nilpotent of order two
and commuting with B, so the moments of B-hat_r on the null vector w are

    (B-hat^j w, w) = (B^j w, w) + j delta (B^(j-1) A w, w).

p-hat_{r,x} is assembled from these moments, which keeps it differentiable
through the jets of conegeom both in r (at fixed x) and in the chart.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

import src.jets as jets
from src.bochner import Curv4, theta_eigenvalues, theta_op
from src.conegeom import (
    ConeChartPoint,
    apply_operator,
    cone_fields,
    euclidean_horizontal,
    metric,
    null_vector,
    quadratic_form,
    realize,
    riemann,
)
from src.errors import (
    BadParams,
    BfconeError,
    NearCollision,
    OutsideDomain,
    UnsupportedCase,
    WrongCase,
)
from src.families import FamilySpec, OperatorFamily, parabolic_data, predicted_polys
from src.indefherm import (
    HermOp,
    NullPoint,
    minimal_poly_of,
    pA_poly,
    reduced_adjoint,
    sphere_metric_H,
)
from src.polyalg import RealPoly, characteristic_polynomial, elementary_symmetric, horner

logger = logging.getLogger(__name__)

COLLISION_GAP = 1e-4
SIMPLE_GAP = 1e-6
STATIONARY_TOL = 1e-7
IMAG_TOL = 1e-7


def _require_parabolic(fam: OperatorFamily) -> None:
    if fam.case not in (3, 4):
        raise WrongCase(f"The B-hat machinery needs case 3 or 4, got case {fam.case}")


def _moments(fam: OperatorFamily, r, w_re, w_im, count: int) -> list:
    eta = np.diag(fam.form.eta)
    B = fam.B.entries
    A = fam.A.entries
    delta = fam.delta(r)
    power = np.eye(B.shape[0], dtype=complex)
    mixed = None
    out = []
    for j in range(count):
        term = quadratic_form(eta, apply_operator(power, w_re, w_im), w_re, w_im)
        if j >= 1:
            term = term + j * delta * quadratic_form(eta, apply_operator(mixed, w_re, w_im), w_re, w_im)
        out.append(term)
        # B^j A for the next step
        mixed = A.astype(complex) if j == 0 else B @ mixed
        power = B @ power
    return out


def hat_coefficients(fam: OperatorFamily, r, w_re, w_im) -> list:
    """Ascending coefficients of p-hat_{r,x}; r and w may be floats or jets."""
    q = fam.parabolic.q_hat
    d = q.degree
    s = [((-1) ** i) * sig for i, sig in enumerate(elementary_symmetric(q))]
    M = _moments(fam, r, w_re, w_im, d)
    a = [sum(s[i] * M[k - i] for i in range(k + 1)) for k in range(d)]
    # a[k] multiplies t^(d-1-k); a[0] = (w, w) vanishes on the null cone
    return [a[d - 1 - i] / M[1] for i in range(d - 1)]


def scaled_poly(p: RealPoly, r: float) -> RealPoly:
    """t -> r^(2 deg p) p(t / r^2), the polynomial of B_r = r^2 B-hat_r."""
    d = p.degree
    return RealPoly([c * r ** (2 * (d - i)) for i, c in enumerate(p.coeffs)])


@dataclass(frozen=True)
class HatData:
    """p-hat_{r,x} and the data around it at one chart point."""

    z: ConeChartPoint
    r: float
    f: float
    phi: float
    p_hat: RealPoly
    q_hat: RealPoly
    q_hat1: RealPoly
    bhat: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return self.z.w

    def eta_roots(self) -> np.ndarray:
        """Real roots of p-hat, sorted; raises NearCollision on complex or colliding roots."""
        if self.p_hat.degree < 1:
            return np.zeros(0)
        roots = np.array(self.p_hat.roots())
        if np.any(np.abs(roots.imag) > IMAG_TOL * np.maximum(1.0, np.abs(roots))):
            raise NearCollision(f"p-hat has non-real roots {roots}")
        eta = np.sort(roots.real)
        if eta.size > 1 and np.min(np.diff(eta)) < SIMPLE_GAP:
            raise NearCollision(f"p-hat roots collide: {eta}")
        return eta


def hat_data(fam: OperatorFamily, z: ConeChartPoint) -> HatData:
    """
    Raises:
        WrongCase: outside cases 3/4.
        OutsideDomain: if (B_r w, w) is not positive at z.
    """
    _require_parabolic(fam)
    fields = cone_fields(fam, z.x, with_metric=False)
    if not fields.phi > 0:
        raise OutsideDomain(f"(B_r w, w) = {float(fields.phi):.3e} is not positive at r = {z.r:.6g}")
    r, w_re, w_im = null_vector(z.x)
    coeffs = hat_coefficients(fam, r, w_re, w_im)
    pd = fam.parabolic
    return HatData(
        z=z,
        r=float(r),
        f=float(fields.f),
        phi=float(fields.phi),
        p_hat=RealPoly([float(c) for c in coeffs]),
        q_hat=pd.q_hat,
        q_hat1=pd.q_hat1,
        bhat=fam.B.entries + fam.delta(float(r)) * fam.A.entries,
    )


def p1_poly(fam: OperatorFamily, z: ConeChartPoint) -> RealPoly:
    """P_1(t) = (t - t_2) p-hat(t + c') + (f / r^2) q-hat_1(t + c').

    Raises:
        WrongCase: outside cases 3/4.
        OutsideDomain: if z is outside the domain.
    """
    h = hat_data(fam, z)
    pd = fam.parabolic
    cp = pd.cprime
    return RealPoly.linear(pd.t2) * h.p_hat.shift(cp) + h.q_hat1.shift(cp) * (h.f / h.r**2)


def _p1_at(fam: OperatorFamily, x, t: float):
    """P_1(t) at chart point x; generic over floats and jets."""
    pd = fam.parabolic
    fields = cone_fields(fam, x, with_metric=False)
    r, w_re, w_im = null_vector(x)
    s = t + pd.cprime
    return (t - pd.t2) * horner(hat_coefficients(fam, r, w_re, w_im), s) + fields.f / (r * r) * float(
        pd.q_hat1(s)
    )


def p1_roots(fam: OperatorFamily, z: ConeChartPoint) -> np.ndarray:
    """Sorted real roots of P_1; raises NearCollision on non-real roots."""
    roots = np.array(p1_poly(fam, z).roots())
    if np.any(np.abs(roots.imag) > IMAG_TOL * np.maximum(1.0, np.abs(roots))):
        raise NearCollision(f"P_1 has non-real roots {roots}")
    return np.sort(roots.real)


def _dr_terms(fam: OperatorFamily, z: ConeChartPoint, t: float) -> Tuple[float, float]:
    _, w_re, w_im = null_vector(z.x)
    jet = jets.deriv_r(lambda s: horner(hat_coefficients(fam, s, w_re, w_im), t), z.r)
    h = hat_data(fam, z)
    rhs = 2 * h.f / h.r * (h.p_hat(t) - h.q_hat1(t))
    return jet.d1, float(rhs)


def check_dr(fam: OperatorFamily, z: ConeChartPoint, t: float) -> float:
    """Relative residual of d/dr p-hat_r(t) = (2f/r)(p-hat_r(t) - q-hat_1(t)) at fixed x."""
    lhs, rhs = _dr_terms(fam, z, t)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def check_dot(fam: OperatorFamily, z: ConeChartPoint) -> float:
    """Largest relative residual of d eta_j / dr = (2f/r) q-hat_1(eta_j) / p-hat'(eta_j)."""
    h = hat_data(fam, z)
    dp = h.p_hat.derivative()
    worst = 0.0
    for eta in h.eta_roots():
        dr_p, _ = _dr_terms(fam, z, float(eta))
        slope = float(dp(eta))
        lhs = -dr_p / slope
        rhs = 2 * h.f / h.r * float(h.q_hat1(eta)) / slope
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return worst


@dataclass(frozen=True)
class HoriTerms:
    lhs: Tuple[float, float, float]
    rhs: Tuple[float, float, float]
    lhat: float
    aditional: float


def hori_terms(fam: OperatorFamily, z: ConeChartPoint, t: float) -> HoriTerms:
    """Both sides of the three horizontal-gradient identities at z.

    H-gradients come from the chart gradient projected on the complex
    orthogonal complement of u; on H the metric is Re<., .> / (B_r w, w),
    so |dF|^2 = phi |Pi grad F|^2.
    """
    h = hat_data(fam, z)
    pd = fam.parabolic
    gamma = pd.gamma
    r, f, phi = h.r, h.f, h.phi
    PiE = euclidean_horizontal(z)

    def p_field(x):
        rr, w_re, w_im = null_vector(x)
        return horner(hat_coefficients(fam, rr, w_re, w_im), t)

    def f_field(x):
        fields = cone_fields(fam, x, with_metric=False)
        return fields.f / (fields.r * fields.r)

    _, grad_p, _ = jets.hessian(p_field, z.x)
    _, grad_F, _ = jets.hessian(f_field, z.x)
    hp, hF = PiE @ grad_p, PiE @ grad_F

    form = fam.form
    w = h.w
    Br = fam.B_r(r)
    br_w = form.quad(Br, w).real
    br2_w = form.quad(Br @ Br, w).real
    p, q, q1 = h.p_hat, h.q_hat, h.q_hat1
    pt = float(p(t))
    bh_w = br_w / r**2
    bh2_w = br2_w / r**4
    rhs1 = 4 * (q.derivative()(t) * pt - q(t) * p.derivative()(t) - 2 * t * pt**2 + pt**2 * bh2_w / bh_w)
    rhs2 = 4 * f**2 / r**6 * (br2_w / br_w - 2 * r**2 * gamma)
    rhs3 = 4 * f / r**2 * ((t - gamma) * q1(t) - (t + gamma) * pt + pt * br2_w / (r**2 * br_w))
    lhs = (phi * float(hp @ hp), phi * float(hF @ hF), phi * float(hF @ hp))

    bhat = HermOp(h.bhat, form)
    X = reduced_adjoint(bhat, q)(t) @ w - pt * (h.bhat @ w)
    Lhat = realize(z, 2 * X)
    lhat = float(np.max(np.abs(Lhat - phi * hp))) / max(1.0, float(np.max(np.abs(Lhat))))
    closed = 4 * sphere_metric_H(bhat, NullPoint(z.u), X, X)
    aditional = abs(lhs[0] - closed) / max(1.0, abs(closed))
    return HoriTerms(lhs, (float(rhs1), float(rhs2), float(rhs3)), lhat, aditional)


def check_hori(fam: OperatorFamily, z: ConeChartPoint, t: float) -> Tuple[float, float, float]:
    """Relative residuals of the three horizontal-gradient identities."""
    terms = hori_terms(fam, z, t)
    return tuple(
        abs(a - b) / max(1.0, abs(a), abs(b)) for a, b in zip(terms.lhs, terms.rhs)
    )


def _nonconstant_index(fam: OperatorFamily, roots: np.ndarray, j: int) -> float:
    if not 0 <= j < roots.size:
        raise BadParams(f"Root index {j} out of range for {roots.size} roots of P_1")
    xi = float(roots[j])
    for c in fam.parabolic.constant_roots():
        if abs(xi - c) < 1e-6 * max(1.0, abs(c)):
            raise BadParams(f"Root {j} of P_1 is the constant eigenvalue {c:.6g}")
    others = np.delete(roots, j)
    if others.size and float(np.min(np.abs(others - xi))) < COLLISION_GAP:
        raise NearCollision(f"Root {xi:.6g} of P_1 is within {COLLISION_GAP} of another root")
    return xi


def check_grad(fam: OperatorFamily, z: ConeChartPoint, j: int) -> float:
    """Relative residual of |grad xi_j|^2 = -4 p_m(xi_j) / P_n'(xi_j).

    grad xi_j follows from P_1(xi_j) = 0 by implicit differentiation, with the
    chart gradient of P_1's coefficients taken by automatic differentiation.

    Raises:
        NearCollision: if xi_j is not separated from the other roots.
        BadParams: if j indexes a constant root.
    """
    _require_parabolic(fam)
    P1 = p1_poly(fam, z)
    xi = _nonconstant_index(fam, p1_roots(fam, z), j)
    _, dP, _ = jets.hessian(lambda x: _p1_at(fam, x, xi), z.x)
    dxi = -dP / float(P1.derivative()(xi))
    g = metric(fam, z)
    lhs = float(dxi @ linalg.solve(g, dxi, assume_a="pos"))
    p_m, _ = predicted_polys(fam.spec)
    Pn = P1
    for c in fam.parabolic.constant_roots():
        Pn = Pn.exact_div(RealPoly.linear(c), tol=1e-7)
    rhs = -4 * float(p_m(xi)) / float(Pn.derivative()(xi))
    return abs(lhs - rhs) / max(abs(rhs), 1e-12)


def constante_predicate(spec: FamilySpec) -> Dict[str, object]:
    """Predicted constant roots of P_1 and the flags that decide them."""
    try:
        pd = parabolic_data(spec)
    except UnsupportedCase as e:
        raise WrongCase(str(e)) from e
    return {"roots": pd.constant_roots(), "flags": pd.constant_root_flags()}


def _second_radius(fam: OperatorFamily, z: ConeChartPoint) -> ConeChartPoint:
    lo, hi = fam.interval
    for frac in (0.37, 0.73, 0.15, 0.9):
        r2 = lo + frac * (hi - lo)
        if abs(r2 - z.r) < 0.05 * (hi - lo):
            continue
        other = ConeChartPoint(r2 * z.u)
        try:
            hat_data(fam, other)
        except BfconeError:
            continue
        return other
    raise OutsideDomain(f"No second radius in J for tracking P_1 roots at r = {z.r:.6g}")


def track_constant_roots(fam: OperatorFamily, z: ConeChartPoint) -> List[float]:
    """Roots of P_1 that do not move between r and a second radius at the same x."""
    here = p1_roots(fam, z)
    there = p1_roots(fam, _second_radius(fam, z))
    out = []
    for xi in here:
        nearest = float(there[np.argmin(np.abs(there - xi))]) if there.size else np.inf
        if abs(nearest - xi) < STATIONARY_TOL * max(1.0, abs(xi)):
            out.append(float(xi))
    return out


def constante_residual(fam: OperatorFamily, z: ConeChartPoint) -> Tuple[float, str]:
    """Distance between predicted and tracked constant roots, and a note on mismatches."""
    predicted = constante_predicate(fam.spec)["roots"]
    tracked = track_constant_roots(fam, z)
    if len(predicted) != len(tracked):
        return 1.0, f"predicted constant roots {predicted}, tracked {tracked}"
    roots = p1_roots(fam, z)
    for c in predicted:
        if int(np.sum(np.abs(roots - c) < 1e-6 * max(1.0, abs(c)))) != 1:
            return 1.0, f"constant root {c:.6g} is not simple"
    if not predicted:
        return 0.0, ""
    return float(max(abs(a - b) for a, b in zip(sorted(predicted), tracked))), ""


def eq_e_residual(fam: OperatorFamily, z: ConeChartPoint) -> float:
    """Coefficientwise residual of the Lagrange form of q-hat_1(t + c') - p-hat(t + c')."""
    h = hat_data(fam, z)
    cp = fam.parabolic.cprime
    eta = h.eta_roots()
    dp = h.p_hat.derivative()
    lhs = RealPoly([0.0])
    for j, ej in enumerate(eta):
        weight = float(h.q_hat1(ej)) / float(dp(ej))
        lhs = lhs + RealPoly.from_roots([ei - cp for i, ei in enumerate(eta) if i != j]) * weight
    rhs = h.q_hat1.shift(cp) - h.p_hat.shift(cp)
    scale = max(1.0, float(np.max(np.abs(rhs.coeffs))))
    return (lhs - rhs).max_abs_diff(RealPoly([0.0])) / scale


def predicted_theta_spectrum(fam: OperatorFamily, z: ConeChartPoint) -> np.ndarray:
    """Roots of P_1 together with the roots of Q-hat / q-hat, shifted by c'."""
    pd = fam.parabolic
    cp = pd.cprime
    values = list(p1_roots(fam, z))
    gamma_power = 3 if pd.has_mu else 2
    values += [pd.gamma - cp] * (pd.n + 1 - gamma_power)
    for beta, mult in pd.distinct_betas():
        values += [beta - cp] * (mult - 1)
    return np.sort(np.array(values))


def theta_spectrum_residual(fam: OperatorFamily, z: ConeChartPoint, R: Optional[Curv4] = None) -> float:
    """Largest gap between sorted numeric Theta eigenvalues and the predicted multiset."""
    _require_parabolic(fam)
    R = riemann(fam, z) if R is None else R
    numeric = np.sort(theta_eigenvalues(theta_op(R, fam.mdim + 1)))
    predicted = predicted_theta_spectrum(fam, z)
    if numeric.size != predicted.size:
        raise BadParams(f"Spectrum sizes differ: {numeric.size} numeric, {predicted.size} predicted")
    return float(np.max(np.abs(numeric - predicted)))


def expresii_residual(fam: OperatorFamily, z: ConeChartPoint, R: Optional[Curv4] = None) -> float:
    """Residual of Theta(L_j) = (eta_j - c') L_j - q_r(xi_j) / (r^4 (eta_j - gamma)) V over the roots of p-hat."""
    h = hat_data(fam, z)
    pd = fam.parabolic
    R = riemann(fam, z) if R is None else R
    theta = theta_op(R, fam.mdim + 1).endomorphism()
    r = h.r
    Br = HermOp(fam.B_r(r), fam.form)
    q_r = scaled_poly(h.q_hat, r)
    adj = reduced_adjoint(Br, q_r)
    V = z.x
    worst = 0.0
    for eta in h.eta_roots():
        xi = r * r * float(eta)
        L = realize(z, adj(xi) @ h.w)
        predicted = (eta - pd.cprime) * L - float(q_r(xi)) / (r**4 * (eta - pd.gamma)) * V
        actual = theta @ L
        worst = max(worst, float(np.linalg.norm(actual - predicted)) / max(1.0, float(np.linalg.norm(actual))))
    return worst


def _sum_of_roots(p: RealPoly) -> float:
    if p.degree < 1:
        return 0.0
    return -float(p.coeffs[-2]) / p.lead


def modified_scalar_residual(fam: OperatorFamily, z: ConeChartPoint) -> float:
    """Sum of the roots of p_{A,x} Q_A / q_A against -(A^2 w, w) / (A w, w) for A = B_r."""
    r = z.r
    A = HermOp(fam.B_r(r), fam.form)
    if fam.case in (3, 4):
        q = scaled_poly(fam.parabolic.q_hat, r)
        Q = scaled_poly(fam.parabolic.Q_hat, r)
    else:
        q = minimal_poly_of(A)
        Q = characteristic_polynomial(A.entries)
    p = pA_poly(A, NullPoint(z.u), q)
    total = _sum_of_roots(p) + _sum_of_roots(Q) - _sum_of_roots(q)
    w = z.w
    aw = fam.form.quad(A.entries, w).real
    rhs = -fam.form.quad(A.entries @ A.entries, w).real / aw
    return abs(total - rhs) / max(1.0, abs(rhs))


def einstein_value(fam: OperatorFamily) -> Optional[float]:
    """Theta / Id on an Einstein family, None otherwise."""
    m = fam.mdim
    B, A = fam.B.entries, fam.A.entries
    if fam.case in (1, 2):
        k = int(np.argmax(np.abs(np.diag(A))))
        e = float((B[k, k] / A[k, k]).real)
        if np.max(np.abs(B - e * A)) > 1e-12 or abs(e * e + 2 * fam.spec.d) > 1e-12 or e == 0:
            return None
        return e / (m + 3)
    if fam.case == 4 and np.max(np.abs(B)) < 1e-14:
        return fam.lam / (m + 3)
    return None


def einstein_residual(fam: OperatorFamily, z: ConeChartPoint, R: Optional[Curv4] = None) -> float:
    expected = einstein_value(fam)
    if expected is None:
        raise BadParams("The family is not Einstein")
    R = riemann(fam, z) if R is None else R
    vals = theta_eigenvalues(theta_op(R, fam.mdim + 1))
    return float(np.max(np.abs(vals - expected)))


def generic_point(fam: OperatorFamily, z: ConeChartPoint) -> bool:
    """Sampler filter: real simple roots of p-hat and P_1, with the collision gap."""
    try:
        hat_data(fam, z).eta_roots()
        roots = p1_roots(fam, z)
    except BfconeError:
        return False
    return roots.size < 2 or float(np.min(np.diff(roots))) >= COLLISION_GAP

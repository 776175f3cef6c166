"""Generalized Kähler cone in the global chart C^(mdim+1) minus the origin.

Points are stored as complex vectors z and handled as real vectors
x = (Re z, Im z). A tangent vector Z splits as Z = Z_h + p V + q T with
V = x, T the Reeb realization, p = Re<Z, u>/r and q the contact form.
Every chart field is assembled from one generic builder so the same code
evaluates on floats and on second-order jets.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

import src.config as config
import src.jets as jets
from src.bochner import Curv4, standard_J, tensor_norm
from src.errors import BadParams, BfconeError, NotPositiveDefinite, OutsideDomain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeChartPoint:
    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.ndim != 1:
            raise OutsideDomain(f"Chart point must be a vector, got shape {z.shape}")
        r = float(np.linalg.norm(z))
        if not np.isfinite(r) or r == 0.0:
            raise OutsideDomain("The cone chart excludes z = 0")
        object.__setattr__(self, "z", z)

    @classmethod
    def from_real(cls, x: np.ndarray) -> "ConeChartPoint":
        x = np.asarray(x, dtype=float)
        N = x.size // 2
        return cls(x[:N] + 1j * x[N:])

    @property
    def mdim(self) -> int:
        return self.z.size - 1

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.z))

    @property
    def u(self) -> np.ndarray:
        return self.z / self.r

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([[1.0 + 0.0j], self.u])

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([self.z.real, self.z.imag])


@dataclass
class ConeFields:
    """Chart fields at one point; entries are floats/arrays or Jet2 objects."""

    r: object
    u_re: object
    u_im: object
    qA: object
    qB: object
    phi: object
    psi: object
    f: object
    G: object
    T: object
    pvec: object
    qvec: object
    alpha: object
    Ph: object = None
    g: object = None
    Jmat: object = None


def apply_operator(M: np.ndarray, w_re, w_im):
    """(Re M w, Im M w) for a complex matrix M and w given by real parts."""
    Mre, Mim = M.real, M.imag
    return Mre @ w_re - Mim @ w_im, Mre @ w_im + Mim @ w_re


def quadratic_form(eta: np.ndarray, Mw, w_re, w_im):
    """Re (M w, w)."""
    return ((Mw[0] * w_re + Mw[1] * w_im) * eta).sum(0)


def null_vector(x):
    """(r, Re w, Im w) with w = e_0 + z/r; generic over floats and jets."""
    N = x.shape[0] // 2
    r = jets.sqrt((x * x).sum(0))
    w_re = jets.concat([1.0, x[:N] / r])
    w_im = jets.concat([0.0, x[N:] / r])
    return r, w_re, w_im


def cone_fields(fam, x, with_metric: bool = True) -> ConeFields:
    """Assemble the cone fields at chart point x (float vector or Jet2 vector)."""
    N = x.shape[0] // 2
    x_re, x_im = x[:N], x[N:]
    r, w_re, w_im = null_vector(x)
    u_re, u_im = w_re[1:], w_im[1:]
    eta = np.diag(fam.form.eta)
    Bw = apply_operator(fam.B.entries, w_re, w_im)
    Aw = apply_operator(fam.A.entries, w_re, w_im)
    qB = quadratic_form(eta, Bw, w_re, w_im)
    qA = quadratic_form(eta, Aw, w_re, w_im)
    b1, b2, a2 = fam.coefficients(r)
    _, _, da2 = fam.coefficient_derivatives(r)
    phi = b1 * qB + b2 * qA
    psi = a2 * qA
    f = psi / phi
    G = r * da2 / (2 * a2)
    # c = i B_r w, written as (c_0, v)
    c_re = -(b1 * Bw[1] + b2 * Aw[1])
    c_im = b1 * Bw[0] + b2 * Aw[0]
    c0_re, c0_im = c_re[0], c_im[0]
    T_re = r * (c_re[1:] - (c0_re * u_re - c0_im * u_im))
    T_im = r * (c_im[1:] - (c0_re * u_im + c0_im * u_re))
    T = jets.concat([T_re, T_im])
    pvec = x / (r * r)
    qvec = jets.concat([-u_im, u_re]) / (r * phi)
    alpha = jets.concat([-x_im, x_re]) / (2 * phi)
    out = ConeFields(r, u_re, u_im, qA, qB, phi, psi, f, G, T, pvec, qvec, alpha)
    if with_metric:
        n = 2 * N
        Ph = np.eye(n) - jets.outer(x, pvec) - jets.outer(T, qvec)
        hh = (Ph[:, :, None] * Ph[:, None, :]).sum(0)
        out.Ph = Ph
        out.g = hh / phi + (r * r * f) * (jets.outer(pvec, pvec) + jets.outer(qvec, qvec))
        out.Jmat = standard_J(N) @ Ph + jets.outer(T, pvec) - jets.outer(x, qvec)
    return out


def _float_fields(fam, z: ConeChartPoint, with_metric: bool = True) -> ConeFields:
    fields = cone_fields(fam, z.x, with_metric)
    if not fields.phi > 0:
        raise OutsideDomain(f"(B_r w, w) = {float(fields.phi):.3e} is not positive at r = {z.r:.6g}")
    return fields


@dataclass(frozen=True)
class FramePoint:
    V: np.ndarray
    T: np.ndarray
    Jmat: np.ndarray
    pvec: np.ndarray
    qvec: np.ndarray
    Ph: np.ndarray
    r: float
    phi: float
    f: float

    def split(self, Z: np.ndarray) -> Tuple[np.ndarray, float, float]:
        """(Z_h, p, q) with Z = Z_h + p V + q T."""
        p = float(self.pvec @ Z)
        q = float(self.qvec @ Z)
        return self.Ph @ Z, p, q

    def J(self, Z: np.ndarray) -> np.ndarray:
        return self.Jmat @ Z


def contact_theta(fam, z: ConeChartPoint, Z: np.ndarray) -> float:
    """theta(Z) = Im<Z, u> / (r (B_r w, w))."""
    fields = _float_fields(fam, z, with_metric=False)
    return float(fields.qvec @ np.asarray(Z, dtype=float))


def frame(fam, z: ConeChartPoint) -> FramePoint:
    fields = _float_fields(fam, z)
    return FramePoint(
        V=z.x,
        T=np.asarray(fields.T),
        Jmat=np.asarray(fields.Jmat),
        pvec=np.asarray(fields.pvec),
        qvec=np.asarray(fields.qvec),
        Ph=np.asarray(fields.Ph),
        r=float(fields.r),
        phi=float(fields.phi),
        f=float(fields.f),
    )


def metric(fam, z: ConeChartPoint) -> np.ndarray:
    """Metric in chart coordinates from the block formula.

    Raises:
        OutsideDomain: if (B_r w, w) is not positive.
        NotPositiveDefinite: if g has a non-positive eigenvalue.
    """
    fields = _float_fields(fam, z)
    g = np.asarray(fields.g)
    g = 0.5 * (g + g.T)
    low = float(linalg.eigvalsh(g)[0])
    if low <= 0:
        raise NotPositiveDefinite(f"Metric has eigenvalue {low:.3e} at r = {z.r:.6g}")
    return g


def f_and_G(fam, z: ConeChartPoint) -> Tuple[float, float]:
    fields = _float_fields(fam, z, with_metric=False)
    if abs(fields.psi) < 1e-14:
        raise OutsideDomain(f"(A_r w, w) = {float(fields.psi):.3e} vanishes")
    return float(fields.f), float(fields.G)


def scalar_field(fam, z: ConeChartPoint, name: str) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, chart gradient and Hessian of a named cone field (f, G, phi, psi, qA, qB)."""
    return jets.hessian(lambda x: getattr(cone_fields(fam, x, with_metric=False), name), z.x)


def riemann_from_metric(gj: jets.Jet2) -> np.ndarray:
    """R[i, j, k, l] = g(R(e_i, e_j) e_k, e_l) from a second-order jet of g."""
    g, dg, ddg = gj.val, gj.grad, gj.hess
    ginv = linalg.inv(g)
    gam1 = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    dgam1 = 0.5 * (
        np.einsum("jlim->lijm", ddg) + np.einsum("iljm->lijm", ddg) - np.einsum("ijlm->lijm", ddg)
    )
    gam = np.einsum("kl,lij->kij", ginv, gam1)
    dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dgam = np.einsum("klm,lij->kijm", dginv, gam1) + np.einsum("kl,lijm->kijm", ginv, dgam1)
    rup = (
        np.einsum("ljki->lijk", dgam)
        - np.einsum("likj->lijk", dgam)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )
    return np.einsum("pijk,pl->ijkl", rup, g)


def riemann(fam, z: ConeChartPoint) -> Curv4:
    """Riemann tensor of the cone metric at z, with g and J attached."""
    base = _float_fields(fam, z)
    fields = cone_fields(fam, jets.Jet2.variables(z.x))
    R = riemann_from_metric(fields.g)
    g = np.asarray(base.g)
    return Curv4(R, 0.5 * (g + g.T), np.asarray(base.Jmat))


def omega_residuals(fam, z: ConeChartPoint) -> Dict[str, float]:
    """g = omega(., J .), omega(V, T) = r^2 f and d omega = 0."""
    fields = _float_fields(fam, z)
    alpha = cone_fields(fam, jets.Jet2.variables(z.x), with_metric=False).alpha
    D = alpha.grad
    omega = D.T - D
    g = np.asarray(fields.g)
    r, f = float(fields.r), float(fields.f)
    scale = max(1.0, float(np.max(np.abs(g))))
    # d omega_{ijk} from the second derivatives of alpha
    H = alpha.hess
    d_omega = np.einsum("jik->ijk", H) - np.einsum("ijk->ijk", H)
    closed = d_omega + np.einsum("ijk->jki", d_omega) + np.einsum("ijk->kij", d_omega)
    return {
        "metric": float(np.max(np.abs(omega @ np.asarray(fields.Jmat) - g))) / scale,
        "volume": abs(float(z.x @ omega @ np.asarray(fields.T)) - r * r * f) / max(1.0, r * r * abs(f)),
        "closed": float(np.max(np.abs(closed))),
    }


def domain_contains(fam, z, margin: Optional[float] = None) -> bool:
    """r inside J with margin, (B_r w, w) > margin and f > margin."""
    margin = config.BFCONE_MARGIN if margin is None else margin
    try:
        if not isinstance(z, ConeChartPoint):
            z = ConeChartPoint(z)
        if not fam.in_interval(z.r, margin):
            return False
        fields = cone_fields(fam, z.x, with_metric=False)
    except BfconeError:
        return False
    return bool(fields.phi > margin and fields.f > margin)


def realize(z: ConeChartPoint, y: np.ndarray) -> np.ndarray:
    """Chart vector of the homomorphism w -> y mod w, as the real vector r (y' - y_0 u)."""
    y = np.asarray(y, dtype=complex)
    v = z.r * (y[1:] - y[0] * z.u)
    return np.concatenate([v.real, v.imag])


def euclidean_horizontal(z: ConeChartPoint) -> np.ndarray:
    """Euclidean projection onto the complex orthogonal complement of u."""
    x = z.x
    jx = standard_J(z.z.size) @ x
    r2 = z.r**2
    return np.eye(x.size) - np.outer(x, x) / r2 - np.outer(jx, jx) / r2


def random_horizontal(
    fam, z: ConeChartPoint, k: int, rng: np.random.Generator
) -> List[np.ndarray]:
    """k g-orthonormal vectors of H = ker(theta) and ker(dr), via Gram-Schmidt in g."""
    dim_h = z.x.size - 2
    if k > dim_h:
        raise BadParams(f"H has real dimension {dim_h}, cannot draw {k} orthonormal vectors")
    fr = frame(fam, z)
    g = metric(fam, z)
    out: List[np.ndarray] = []
    while len(out) < k:
        v = fr.Ph @ rng.normal(size=z.x.size)
        for e in out:
            v = v - (e @ g @ v) * e
        nv = float(np.sqrt(v @ g @ v))
        if nv < 1e-8:
            continue
        out.append(v / nv)
    return out


def radial_residuals(fam, z: ConeChartPoint, rng: np.random.Generator) -> Dict[str, float]:
    """dG on H and on T, and T(f); all vanish on a commuting family."""
    fr = frame(fam, z)
    _, dG, _ = scalar_field(fam, z, "G")
    f, df, _ = scalar_field(fam, z, "f")
    H = random_horizontal(fam, z, min(3, z.x.size - 2), rng)
    tn = fr.T / np.linalg.norm(fr.T)
    return {
        "dG_H": max(abs(float(dG @ X)) for X in H),
        "dG_T": abs(float(dG @ tn)),
        "Tf": abs(float(df @ fr.T)) / max(1.0, abs(f)),
    }


def curb_terms(
    fam, z: ConeChartPoint, R: Curv4, X: np.ndarray, Y: np.ndarray, Zv: np.ndarray
) -> Dict[str, Tuple[float, float, float]]:
    """(lhs, rhs, scale) for the four curvature components of the cone.

    X, Y, Zv are g-orthonormal horizontal vectors. The lhs values use the
    standard sign of R; callers calibrate the global sign.
    """
    fr = frame(fam, z)
    g = R.g
    J = fr.Jmat
    r = fr.r
    T, V = fr.T, fr.V
    f, df, Hf = scalar_field(fam, z, "f")
    G = float(cone_fields(fam, z.x, with_metric=False).G)
    dG_dr = fam.G_jet(r).d1

    def gg(a, b):
        return float(a @ g @ b)

    def om(a, b):
        return gg(J @ a, b)

    def d(a):
        return float(df @ a)

    fdot_grad = (Hf @ V + df) / r - (df @ V) * V / r**3

    def d_fdot(a):
        return float(fdot_grad @ a)

    # g_r(X, v) = df(X) on H
    PiE = euclidean_horizontal(z)
    gvv = r**4 * fr.phi * float(np.sum((PiE @ df) ** 2))

    norm = max(tensor_norm(R), 1e-4)
    nT = np.sqrt(gg(T, T))
    nV = np.sqrt(gg(V, V))
    out = {}
    out["a"] = (
        R.evaluate(X, T, Y, Zv),
        -d(Y) / 2 * om(X, Zv) - d(J @ Y) / 2 * gg(X, Zv) + d(Zv) / 2 * om(X, Y)
        + d(J @ Zv) / 2 * gg(X, Y) - d(X) * om(Y, Zv),
        norm * nT,
    )
    out["b"] = (
        R.evaluate(T, V, V, T),
        gvv + r**2 * f * ((G - 2) * (8 * f - 2) + r * dG_dr + 12 * f**2),
        norm * nT**2 * nV**2,
    )
    out["c"] = (
        R.evaluate(T, V, V, Zv),
        -(r**3) / 2 * d_fdot(J @ Zv) + r**2 * (G - 1) * d(J @ Zv),
        norm * nT * nV**2,
    )
    out["d"] = (
        R.evaluate(X, V, Y, Zv),
        d(Y) * gg(X, Zv) / 2 - d(Zv) * gg(X, Y) / 2 - d(J @ Y) * om(X, Zv) / 2
        + d(J @ Zv) * om(X, Y) / 2 - d(J @ X) * om(Y, Zv),
        norm * nV,
    )
    return out

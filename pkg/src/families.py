import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import src.config as config
import src.jets as jets
from src.errors import (
    BadParams,
    EmptyDomain,
    NearPole,
    SpecViolation,
    UnsupportedCase,
)
from src.indefherm import HermForm, HermOp, NullPoint, eta_residual
from src.polyalg import RealPoly

logger = logging.getLogger(__name__)

POLE_GUARD = 1e-3
BRANCHES = ("auto", "tan", "coth", "tanh", "rational")


def resolve_branch(d: float, branch: str = "auto", case: int = 1) -> str:
    if branch not in BRANCHES:
        raise BadParams(f"Unknown mu branch '{branch}', expected one of {BRANCHES}")
    if branch == "auto":
        if d > 0:
            return "tan"
        if d == 0:
            return "rational"
        return "tanh" if case == 2 else "coth"
    expected = {"tan": d > 0, "rational": d == 0, "coth": d < 0, "tanh": d < 0}
    if not expected[branch]:
        raise BadParams(f"Branch '{branch}' does not solve the mu equation for d = {d}")
    return branch


def mu_pole(d: float, const: float, branch: str, t: float) -> Optional[float]:
    """Location of the pole of the branch nearest to t, or None."""
    if branch == "tan":
        beta = math.sqrt(2 * d)
        k = round(((beta * t + const) / 2 - math.pi / 2) / math.pi)
        return ((2 * k + 1) * math.pi - const) / beta
    if branch == "coth":
        beta = math.sqrt(-2 * d)
        return -const / beta
    if branch == "rational":
        return -const
    return None


def mu_solution(d: float, const: float, t, branch: str = "auto"):
    """Closed-form solution of mu' = mu^2/2 + d and its derivative.

    Branches, with beta = sqrt(2|d|):
      tan      (d > 0):  mu = beta tan((beta t + const)/2)
      coth     (d < 0):  mu = beta (1 + E)/(1 - E), E = exp(beta t + const)
      tanh     (d < 0):  mu = -beta tanh((beta t + const)/2)
      rational (d = 0):  mu = -2/(t + const)

    Args:
        d: constant of the equation.
        const: integration constant.
        t: evaluation point (float or Jet2).
        branch: branch name, or "auto".

    Returns:
        (mu, mu'): values of the same type as t.

    Raises:
        NearPole: if t is within 1e-3 of a pole of the branch.
    """
    branch = resolve_branch(d, branch)
    pole = mu_pole(d, const, branch, float(jets.value(t)))
    if pole is not None and abs(float(jets.value(t)) - pole) < POLE_GUARD:
        raise NearPole(f"t = {float(jets.value(t)):.6g} is within {POLE_GUARD} of the pole {pole:.6g}")
    if branch == "tan":
        beta = math.sqrt(2 * d)
        tg = jets.tan((beta * t + const) / 2)
        mu = beta * tg
        return mu, d + mu * mu / 2
    if branch == "coth":
        beta = math.sqrt(-2 * d)
        E = jets.exp(beta * t + const)
        mu = beta * (1 + E) / (1 - E)
        return mu, 2 * beta**2 * E / ((1 - E) * (1 - E))
    if branch == "tanh":
        beta = math.sqrt(-2 * d)
        th = jets.tanh((beta * t + const) / 2)
        return -beta * th, -(beta**2) / 2 * (1 - th * th)
    mu = -2 / (t + const)
    return mu, mu * mu / 2


def _complex(entry) -> complex:
    if isinstance(entry, (list, tuple)):
        return complex(float(entry[0]), float(entry[1]))
    return complex(entry)


@dataclass
class FamilySpec:
    """Parameters of one Bochner-flat operator family (or a deliberate violation of one)."""

    mdim: int
    case: int
    B: dict
    d: Optional[float] = None
    lam: Optional[float] = None
    const: float = 0.0
    branch: str = "auto"
    J: Optional[Tuple[float, float]] = None
    samples: int = config.DEFAULT_SAMPLES
    seed: int = config.BFCONE_SEED
    tolerances: Dict[str, float] = field(default_factory=dict)
    offdiag: Optional[complex] = None
    strict: bool = True
    name: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        try:
            mdim = int(data["mdim"])
            case = int(data["case"])
            B = dict(data["B"])
        except (KeyError, TypeError, ValueError) as e:
            raise BadParams(f"Spec needs integer 'mdim', 'case' and an object 'B': {e}") from e
        J = data.get("J")
        if J is not None:
            if len(J) != 2 or not float(J[0]) < float(J[1]):
                raise BadParams(f"J must be an increasing pair, got {J}")
            J = (float(J[0]), float(J[1]))
        offdiag = data.get("offdiag")
        lam = data.get("lambda", data.get("lam"))
        return cls(
            mdim=mdim,
            case=case,
            B=B,
            d=None if data.get("d") is None else float(data["d"]),
            lam=None if lam is None else float(lam),
            const=float(data.get("const", 0.0)),
            branch=str(data.get("branch", "auto")),
            J=J,
            samples=int(data.get("samples", config.DEFAULT_SAMPLES)),
            seed=int(data.get("seed", config.BFCONE_SEED)),
            tolerances={str(k): float(v) for k, v in data.get("tolerances", {}).items()},
            offdiag=None if offdiag is None else _complex(offdiag),
            strict=bool(data.get("strict", True)),
            name=data.get("name"),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FamilySpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {
            "mdim": self.mdim,
            "case": self.case,
            "B": self.B,
            "const": self.const,
            "branch": self.branch,
            "samples": self.samples,
            "seed": self.seed,
            "tolerances": dict(sorted(self.tolerances.items())),
            "strict": self.strict,
        }
        if self.d is not None:
            out["d"] = self.d
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.J is not None:
            out["J"] = list(self.J)
        if self.offdiag is not None:
            out["offdiag"] = [self.offdiag.real, self.offdiag.imag]
        if self.name is not None:
            out["name"] = self.name
        return out

    @property
    def lam_value(self) -> float:
        return 0.0 if self.case == 3 else float(self.lam or 0.0)


def normal_form_A(form: HermForm, case: int) -> np.ndarray:
    """The fixed operator A of each case."""
    m = form.mdim
    n = form.size
    if case == 1:
        return np.diag([-(m + 1)] + [1] * (m + 1)).astype(complex) / (2 * (m + 2))
    if case == 2:
        return np.diag([-1] * (m + 1) + [m + 1]).astype(complex) / (2 * (m + 2))
    A = np.zeros((n, n), dtype=complex)
    A[:2, :2] = [[-1, 1], [-1, 1]]
    return A


@dataclass(frozen=True)
class ParabolicData:
    """Normal-form data of a case 3/4 operator B = gamma Id + N on W0 plus beta_j Id on W_j."""

    gamma: float
    alpha: float
    mu: Tuple[complex, ...]
    betas: Tuple[Tuple[float, int], ...]
    lam: float
    mdim: int

    @property
    def n(self) -> int:
        return len(self.mu) + 1

    @property
    def has_mu(self) -> bool:
        return any(abs(x) > 0 for x in self.mu)

    @property
    def c(self) -> float:
        return self.gamma - self.lam

    @property
    def cprime(self) -> float:
        return self.c / (self.mdim + 3)

    @property
    def t2(self) -> float:
        return (self.mdim + 2) * self.c / (self.mdim + 3)

    @property
    def t1(self) -> float:
        return self.lam + self.t2

    def distinct_betas(self) -> List[Tuple[float, int]]:
        merged: Dict[float, int] = {}
        for value, mult in self.betas:
            key = next((b for b in merged if abs(b - value) < 1e-12), value)
            merged[key] = merged.get(key, 0) + mult
        return sorted(merged.items())

    @property
    def q_hat(self) -> RealPoly:
        power = 3 if self.has_mu else 2
        return RealPoly.linear(self.gamma) ** power * RealPoly.from_roots(
            [b for b, _ in self.distinct_betas()]
        )

    @property
    def Q_hat(self) -> RealPoly:
        out = RealPoly.linear(self.gamma) ** (self.n + 1)
        for b, mult in self.distinct_betas():
            out = out * RealPoly.linear(b) ** mult
        return out

    @property
    def q_hat1(self) -> RealPoly:
        return self.q_hat.exact_div(RealPoly.linear(self.gamma) ** 2)

    def constant_root_flags(self) -> Dict[str, bool]:
        return {
            "qhat1_c_zero": abs(self.q_hat1(self.c)) < 1e-12 * max(1.0, abs(self.c)) ** self.q_hat1.degree,
            "exceptional": self.lam != 0 and self.alpha == 0 and not self.has_mu,
        }

    def constant_roots(self) -> List[float]:
        flags = self.constant_root_flags()
        out = []
        if flags["qhat1_c_zero"]:
            out.append(self.t2)
        if flags["exceptional"]:
            out.append(self.t1)
        return sorted(out)


def parabolic_data(spec: FamilySpec) -> ParabolicData:
    if spec.case not in (3, 4):
        raise UnsupportedCase(f"Normal-form data only exists for cases 3/4, got case {spec.case}")
    desc = spec.B
    if desc.get("type") != "parabolic":
        raise BadParams("Cases 3/4 need B of type 'parabolic'")
    mu = tuple(_complex(x) for x in desc.get("mu", []))
    betas = tuple((float(b["value"]), int(b["mult"])) for b in desc.get("betas", []))
    n = len(mu) + 1
    if any(mult < 1 for _, mult in betas):
        raise SpecViolation("beta multiplicities must be positive")
    if n + 1 + sum(mult for _, mult in betas) != spec.mdim + 2:
        raise SpecViolation(
            f"Block sizes n+1 = {n + 1} and beta multiplicities do not add up to {spec.mdim + 2}"
        )
    gamma = desc.get("gamma")
    if gamma is None:
        # trace-free: (n+1) gamma + sum n_j beta_j = 0
        gamma = -sum(b * mult for b, mult in betas) / (n + 1)
    gamma = float(gamma)
    if any(abs(b - gamma) < 1e-12 for b, _ in betas):
        raise SpecViolation(f"beta values must differ from gamma = {gamma}")
    return ParabolicData(
        gamma=gamma,
        alpha=float(desc.get("alpha", 0.0)),
        mu=mu,
        betas=betas,
        lam=spec.lam_value,
        mdim=spec.mdim,
    )


def _build_B(spec: FamilySpec, form: HermForm) -> np.ndarray:
    m = spec.mdim
    size = form.size
    desc = spec.B
    kind = desc.get("type")
    if kind == "diagonal":
        eig = [float(e) for e in desc["eigenvalues"]]
        if len(eig) != size:
            raise SpecViolation(f"Diagonal B needs {size} eigenvalues, got {len(eig)}")
        B = np.diag(eig).astype(complex)
    elif kind == "block":
        if spec.case != 2:
            raise SpecViolation("Block B descriptions are only used in case 2")
        rows = desc["matrix"]
        blk = np.array([[_complex(e) for e in row] for row in rows])
        if blk.shape != (m + 1, m + 1):
            raise SpecViolation(f"Case-2 block must be {m + 1}x{m + 1}, got {blk.shape}")
        B = np.zeros((size, size), dtype=complex)
        B[: m + 1, : m + 1] = blk
        last = desc.get("last")
        B[m + 1, m + 1] = -np.trace(blk).real if last is None else float(last)
    elif kind == "parabolic":
        if spec.case not in (3, 4):
            raise SpecViolation("Parabolic B descriptions are only used in cases 3/4")
        pd_ = parabolic_data(spec)
        n = pd_.n
        B = np.zeros((size, size), dtype=complex)
        B[: n + 1, : n + 1] = pd_.gamma * np.eye(n + 1)
        row = [-pd_.alpha, pd_.alpha] + list(pd_.mu)
        B[0, : n + 1] += row
        B[1, : n + 1] += row
        for j, mu_j in enumerate(pd_.mu, start=2):
            B[j, 0] += -np.conj(mu_j)
            B[j, 1] += np.conj(mu_j)
        pos = n + 1
        for value, mult in pd_.betas:
            for _ in range(mult):
                B[pos, pos] = value
                pos += 1
    else:
        raise SpecViolation(f"Unknown B type '{kind}'")
    if spec.offdiag is not None:
        b = spec.offdiag
        B[0, 1] += b
        B[1, 0] += -np.conj(b)
    return B


def spec_violations(form: HermForm, A: np.ndarray, B: np.ndarray) -> Dict[str, float]:
    """Residuals of the structural constraints on (A, B)."""
    return {
        "trace": float(abs(np.trace(B))),
        "eta_hermitian": eta_residual(form, B),
        "commutator": float(np.linalg.norm(A @ B - B @ A)),
    }


class OperatorFamily:
    """Closed-form r -> (B_r, dB_r/dr, A_r, dA_r/dr) with B_r = b1 B + b2 A and A_r = a2 A."""

    def __init__(self, spec: FamilySpec, form: HermForm, A: HermOp, B: HermOp):
        self.spec = spec
        self.form = form
        self.A = A
        self.B = B
        self.case = spec.case
        if spec.case in (1, 2):
            self.branch = resolve_branch(spec.d, spec.branch, spec.case)
        else:
            self.branch = None
        self.parabolic = parabolic_data(spec) if spec.case in (3, 4) else None
        self.interval = spec.J if spec.J is not None else default_interval(spec, self.branch)

    @property
    def mdim(self) -> int:
        return self.spec.mdim

    @property
    def lam(self) -> float:
        return self.spec.lam_value

    def mu(self, t):
        return mu_solution(self.spec.d, self.spec.const, t, self.branch)

    def coefficients(self, r):
        """(b1, b2, a2) at r; r may be a float or a Jet2."""
        r2 = r * r
        if self.case == 1:
            mu, dmu = self.mu(r2)
            return r2, -r2 * mu, r2 * r2 * dmu
        if self.case == 2:
            mu, dmu = self.mu(r2)
            return r2, r2 * mu, -r2 * r2 * dmu
        if self.case == 3:
            return r2, -r2 * r2, r2 * r2
        lam = self.lam
        e = jets.exp(lam * r2)
        return r2, -r2 * e / lam, r2 * r2 * e

    def coefficient_derivatives(self, r):
        """Closed-form d/dr of (b1, b2, a2); r may be a float or a Jet2."""
        r2 = r * r
        if self.case in (1, 2):
            mu, dmu = self.mu(r2)
            ddmu = mu * dmu
            sign = 1.0 if self.case == 2 else -1.0
            db2 = sign * (2 * r * mu + 2 * r**3 * dmu)
            da2 = -sign * (4 * r**3 * dmu + 2 * r**5 * ddmu)
            return 2 * r, db2, da2
        if self.case == 3:
            return 2 * r, -4 * r**3, 4 * r**3
        lam = self.lam
        e = jets.exp(lam * r2)
        return 2 * r, -2 * r * e / lam - 2 * r**3 * e, 4 * r**3 * e + 2 * lam * r**5 * e

    def delta(self, r):
        """B_r / r^2 = B + delta(r) A in cases 3/4."""
        if self.case == 3:
            return -(r * r)
        if self.case == 4:
            return -jets.exp(self.lam * r * r) / self.lam
        raise UnsupportedCase("delta(r) is only defined in cases 3/4")

    def B_r(self, r: float) -> np.ndarray:
        b1, b2, _ = self.coefficients(r)
        return b1 * self.B.entries + b2 * self.A.entries

    def A_r(self, r: float) -> np.ndarray:
        _, _, a2 = self.coefficients(r)
        return a2 * self.A.entries

    def Bdot_r(self, r: float) -> np.ndarray:
        db1, db2, _ = self.coefficient_derivatives(r)
        return db1 * self.B.entries + db2 * self.A.entries

    def Adot_r(self, r: float) -> np.ndarray:
        _, _, da2 = self.coefficient_derivatives(r)
        return da2 * self.A.entries

    def G(self, r: float) -> float:
        jet = jets.deriv_r(lambda s: self.coefficients(s)[2], r)
        return r * jet.d1 / (2 * jet.value)

    def G_jet(self, r: float) -> jets.Jet1r:
        """G and its first r-derivative, from a jet of a2."""
        x = jets.Jet2.variables([r])[0]
        a2 = self.coefficients(x)[2]
        # G = r a2' / (2 a2); differentiate once more through the jet
        val, d1, d2 = float(a2.val), float(a2.grad[0]), float(a2.hess[0, 0])
        G = r * d1 / (2 * val)
        dG = (d1 + r * d2) / (2 * val) - r * d1 * d1 / (2 * val * val)
        return jets.Jet1r(G, dG, float("nan"))

    def in_interval(self, r: float, margin: float = 0.0) -> bool:
        lo, hi = self.interval
        pad = margin * (hi - lo)
        return lo + pad < r < hi - pad

    def violations(self) -> Dict[str, float]:
        return spec_violations(self.form, self.A.entries, self.B.entries)


def default_interval(spec: FamilySpec, branch: Optional[str]) -> Tuple[float, float]:
    lo, hi = config.DEFAULT_INTERVAL
    if branch is None:
        return lo, hi
    d, const = spec.d, spec.const
    if branch == "tan":
        beta = math.sqrt(2 * d)
        # first positive solution of beta t + const = pi (mod 2 pi)
        t_pole = ((math.pi - const) % (2 * math.pi)) / beta
        if t_pole == 0:
            t_pole = 2 * math.pi / beta
        t_max = t_pole - config.POLE_MARGIN
        if t_max <= 0:
            raise SpecViolation(f"tan branch leaves no pole-free interval (first pole at t = {t_pole:.4g})")
        hi = min(hi, math.sqrt(t_max))
        if hi <= lo:
            lo = hi / 2
    elif branch == "coth":
        t0 = -const / math.sqrt(-2 * d)
        if t0 > -config.POLE_MARGIN:
            lo = max(lo, math.sqrt(max(t0, 0.0) + config.POLE_MARGIN))
            hi = max(hi, lo + 1.0)
    elif branch == "rational":
        t0 = -const
        if t0 > -config.POLE_MARGIN:
            lo = max(lo, math.sqrt(max(t0, 0.0) + config.POLE_MARGIN))
            hi = max(hi, lo + 1.0)
    return lo, hi


def build_family(spec: FamilySpec) -> OperatorFamily:
    """Construct A, B and the closed-form coefficient functions of a family.

    Raises:
        SpecViolation: listing the failed invariant (strict specs only for
            the trace and commutator constraints).
        BadParams: for missing constants.
    """
    if spec.case not in (1, 2, 3, 4):
        raise BadParams(f"case must be 1..4, got {spec.case}")
    form = HermForm(spec.mdim)
    if spec.mdim < 1:
        raise BadParams(f"mdim must be >= 1 for a cone family, got {spec.mdim}")
    if spec.case in (1, 2) and spec.d is None:
        raise BadParams(f"Case {spec.case} needs the constant d")
    if spec.case == 2 and spec.d >= 0:
        raise SpecViolation("Case 2 needs d < 0 so that A_r keeps the sign of A")
    if spec.case == 4 and not spec.lam:
        raise BadParams("Case 4 needs a non-zero lambda")
    if spec.offdiag is not None and spec.case != 1:
        raise BadParams("The off-diagonal perturbation is only defined in case 1")
    A = normal_form_A(form, spec.case)
    B = _build_B(spec, form)
    violations = spec_violations(form, A, B)
    scale = max(1.0, float(np.max(np.abs(B))))
    if violations["eta_hermitian"] > 1e-12 * scale:
        raise SpecViolation(f"B is not eta-hermitian (residual {violations['eta_hermitian']:.3e})")
    if spec.strict:
        if violations["trace"] > 1e-12 * scale:
            raise SpecViolation(f"B is not trace-free (trace {violations['trace']:.3e})")
        if violations["commutator"] > 1e-12 * scale:
            raise SpecViolation(f"[A, B] != 0 (norm {violations['commutator']:.3e})")
    fam = OperatorFamily(spec, form, HermOp(A, form, True), HermOp(B, form, spec.strict))
    lo, hi = fam.interval
    logger.info(f"Built case-{spec.case} family (mdim={spec.mdim}) on J = ({lo:.4g}, {hi:.4g})")
    return fam


def sample_domain(
    fam: OperatorFamily,
    n: int,
    seed: int,
    margin: Optional[float] = None,
    accept: Optional[Callable] = None,
) -> list:
    """Rejection-sample n chart points inside the domain.

    Args:
        fam: the family.
        n: number of points.
        seed: sampling seed.
        margin: domain margin (config.BFCONE_MARGIN by default).
        accept: optional extra predicate on a ConeChartPoint (genericity filters).

    Returns:
        list: ConeChartPoint objects, deterministic in seed.

    Raises:
        EmptyDomain: if 1e4 * n candidates were rejected.
    """
    from src.conegeom import ConeChartPoint, domain_contains

    if n < 1:
        raise BadParams(f"n must be >= 1, got {n}")
    margin = config.BFCONE_MARGIN if margin is None else margin
    rng = np.random.default_rng(seed)
    lo, hi = fam.interval
    points = []
    budget = 10_000 * n
    tries = 0
    while len(points) < n:
        if tries >= budget:
            raise EmptyDomain(
                f"Only {len(points)} of {n} points found after {budget} candidates; "
                "check the interval J against the poles of mu and the sign conditions"
            )
        tries += 1
        u = NullPoint.random(fam.mdim, rng).u
        r = rng.uniform(lo, hi)
        z = ConeChartPoint(r * u)
        if not domain_contains(fam, z, margin):
            continue
        if accept is not None and not accept(z):
            continue
        points.append(z)
    logger.info(f"Sampled {n} domain points with {tries} candidates (seed {seed})")
    return points


def _distinct(values: Sequence[float], tol: float = 1e-12) -> List[float]:
    out: List[float] = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > tol * max(1.0, abs(v)):
            out.append(v)
    return out


def case1_weights(spec: FamilySpec) -> Tuple[List[float], float]:
    """k_j and k = sum k_j of a diagonal case-1 B = diag(-k, k_1, ..., k_{m+1})."""
    if spec.case != 1 or spec.B.get("type") != "diagonal":
        raise UnsupportedCase("Case-1 weights need a diagonal case-1 B")
    eig = [float(e) for e in spec.B["eigenvalues"]]
    ks = eig[1:]
    return ks, sum(ks)


def bryant_type(spec: FamilySpec) -> str:
    if spec.case == 1:
        if spec.d > 0:
            return "hyperbolic"
        return "elliptic" if spec.d < 0 else "parabolic1"
    if spec.case == 3:
        return "parabolic2"
    if spec.case == 4:
        pd_ = parabolic_data(spec)
        if pd_.has_mu:
            return "parabolic2"
        return "parabolic1" if pd_.alpha != 0 else "elliptic"
    raise UnsupportedCase("No Bryant type is predicted for case 2")


def predicted_polys(spec: FamilySpec) -> Tuple[RealPoly, RealPoly]:
    """Bryant minimal and characteristic polynomials (p_m, p_c) of the family.

    Case 1 uses the model polynomials of each Bryant type (the hyperbolic
    model carries the 2/beta normalization). Cases 3/4 use the shifted
    factors of B-hat, with p_m reduced by the constant roots of P_1.

    Raises:
        UnsupportedCase: for case 2.
    """
    m = spec.mdim
    if spec.case == 2:
        raise UnsupportedCase("Bryant polynomials are not predicted for case 2")
    if spec.case == 1:
        ks, k = case1_weights(spec)
        d = spec.d
        if d > 0:
            beta = math.sqrt(2 * d)
            quad = RealPoly.linear(-2 * (m + 2) * k / (beta * (m + 3))) ** 2 + 1.0
            vals = [(2 / beta) * (kj + k / (m + 3)) for kj in ks]
            return quad * RealPoly.from_roots(_distinct(vals)), quad * RealPoly.from_roots(vals)
        if d < 0:
            beta = math.sqrt(-2 * d)
            vals = (
                [-beta / 2 - (m + 2) * k / (m + 3)]
                + [kj + k / (m + 3) for kj in ks]
                + [beta / 2 - (m + 2) * k / (m + 3)]
            )
            return RealPoly.from_roots(_distinct(vals)), RealPoly.from_roots(vals)
        double = RealPoly.linear(-(m + 2) * k / (m + 3)) ** 2
        vals = [kj + k / (m + 3) for kj in ks]
        reduced = [kj + k / (m + 3) for kj in _distinct(ks) if abs(kj + k) > 1e-12]
        return double * RealPoly.from_roots(reduced), double * RealPoly.from_roots(vals)
    pd_ = parabolic_data(spec)
    cp = pd_.cprime
    lead = RealPoly.linear(pd_.t2)
    p_c = lead * pd_.Q_hat.shift(cp)
    p_m = lead * pd_.q_hat.shift(cp)
    for root in pd_.constant_roots():
        p_m = p_m.exact_div(RealPoly.linear(root))
    return p_m, p_c


def order_one_polys(spec: FamilySpec) -> Tuple[RealPoly, RealPoly]:
    """Closed forms of (p_m, p_c) for B = eA (case 1) or B = alpha A (cases 3/4)."""
    m = spec.mdim
    if spec.case == 1:
        ks, k = case1_weights(spec)
        e = 2 * (m + 2) * ks[0]
        if any(abs(kj - ks[0]) > 1e-12 for kj in ks):
            raise BadParams("Order-one closed forms need B proportional to A")
        s = RealPoly.linear(e / (m + 3))
        quad = s * s + e * s + (e * e + 2 * spec.d) / 4
        return s * quad, s ** (m + 1) * quad
    if spec.case in (3, 4):
        pd_ = parabolic_data(spec)
        if pd_.has_mu or pd_.betas or abs(pd_.gamma) > 1e-12:
            raise BadParams("Order-one closed forms need B proportional to A")
        lam = pd_.lam
        head = RealPoly.linear(-(m + 2) * lam / (m + 3))
        tail = RealPoly.linear(lam / (m + 3))
        return head * tail**2, head * tail ** (m + 2)
    raise UnsupportedCase("Order-one closed forms are not given for case 2")


def _diag_case(m: int, case: int, scale: float) -> List[float]:
    A = normal_form_A(HermForm(m), case)
    return [float(scale * A[i, i].real) for i in range(m + 2)]


def example_spec(name: str, params: Sequence[float] = (), mdim: int = 2, **options) -> FamilySpec:
    """FamilySpec of a named example.

    Args:
        name: one of bryant, wproj, einstein, tachibana, flat, negative.
        params: positional numbers, meaning depends on the example:
            bryant k_1..k_{m+1}; wproj a_1..a_{m+2}; einstein e [case];
            tachibana kbar; negative |b|.
        mdim: the parameter m.
        options: sign (wproj), lam (einstein case 4), d (tachibana).

    Raises:
        BadParams: if params do not match the example.
    """
    m = mdim
    params = [float(p) for p in params]
    if name == "flat":
        return FamilySpec(mdim=m, case=1, d=0.0, B={"type": "diagonal", "eigenvalues": [0.0] * (m + 2)}, name="flat")
    if name == "bryant":
        ks = params or [0.0] * (m + 1)
        if len(ks) != m + 1 or any(k < 0 for k in ks):
            raise BadParams(f"bryant needs {m + 1} non-negative weights k_j")
        shift = sum(ks) / (m + 2)
        eig = [-shift] + [k - shift for k in ks]
        return FamilySpec(mdim=m, case=1, d=0.0, B={"type": "diagonal", "eigenvalues": eig}, name="bryant")
    if name == "wproj":
        if len(params) != m + 2 or any(a <= 0 for a in params):
            raise BadParams(f"wproj needs {m + 2} positive weights a_j")
        sign = float(options.get("sign", 1.0))
        if sign not in (1.0, -1.0):
            raise BadParams("wproj sign must be +1 or -1")
        a = params[: m + 1]
        shift = sum(a) / (m + 2)
        eig = [-shift] + [aj - shift for aj in a]
        d = sign * 2 * params[m + 1] ** 2 / (m + 3) ** 2
        return FamilySpec(mdim=m, case=1, d=d, B={"type": "diagonal", "eigenvalues": eig}, name="wproj")
    if name == "einstein":
        if not params:
            raise BadParams("einstein needs e (and optionally the case)")
        e = params[0]
        case = int(params[1]) if len(params) > 1 else int(options.get("case", 1))
        if case in (1, 2):
            if e == 0:
                raise BadParams("einstein in cases 1/2 needs e != 0")
            if case == 2 and e <= 0:
                raise BadParams("einstein in case 2 needs e > 0")
            return FamilySpec(
                mdim=m, case=case, d=-e * e / 2,
                B={"type": "diagonal", "eigenvalues": _diag_case(m, case, e)},
                name="einstein",
            )
        if case == 4:
            lam = float(options.get("lam", -1.0))
            if e != 0 or lam >= 0:
                raise BadParams("einstein in case 4 needs e = 0 and lambda < 0")
            return FamilySpec(
                mdim=m, case=4, lam=lam,
                B={"type": "parabolic", "gamma": 0.0, "alpha": 0.0, "mu": [[0.0, 0.0]] * m, "betas": []},
                name="einstein",
            )
        raise BadParams(f"einstein is defined for cases 1, 2, 4, got {case}")
    if name == "tachibana":
        if len(params) != 1:
            raise BadParams("tachibana needs kbar")
        kbar = params[0]
        eig = [-(m + 1) * kbar] + [kbar] * (m + 1)
        d = float(options.get("d", 0.0))
        return FamilySpec(mdim=m, case=1, d=d, B={"type": "diagonal", "eigenvalues": eig}, name="tachibana")
    if name == "negative":
        size = params[0] if params else 0.1 * math.sqrt(2)
        ks = [0.1 * (j + 1) for j in range(m + 1)]
        eig = [-sum(ks)] + ks
        return FamilySpec(
            mdim=m, case=1, d=0.0, B={"type": "diagonal", "eigenvalues": eig},
            offdiag=complex(size, 0.0), strict=False, name="negative",
        )
    raise BadParams(f"Unknown example '{name}'")


def with_overrides(spec: FamilySpec, **changes) -> FamilySpec:
    return replace(spec, **changes)

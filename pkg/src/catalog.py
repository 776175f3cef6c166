"""Identity catalog and the verification suite runner.

Every catalog entry is one identity of the cone construction. run_suite
builds the family, samples the domain, evaluates the selected entries at
each sample point (in parallel, reduced in index order) and assembles a
deterministic Report.
"""
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

import src.bryantverify as bv
import src.config as config
import src.jets as jets
from src.bochner import (
    adjoint_ck,
    bochner_ratio,
    curvature_inner,
    random_sym11,
    ricci_contract,
    sym_inner,
    symmetry_residuals,
    tensor_norm,
)
from src.conegeom import (
    ConeChartPoint,
    curb_terms,
    f_and_G,
    omega_residuals,
    radial_residuals,
    random_horizontal,
    riemann,
)
from src.errors import BadParams, BfconeError, IncompatibleCase, UnknownId
from src.families import FamilySpec, OperatorFamily, build_family, sample_domain
from src.indefherm import HermOp, NullPoint, aditional_residual, minimal_poly_of, patrat_residual
from src.potentials import potential_residuals, tachibana_constants, tachibana_residuals

logger = logging.getLogger(__name__)

ALL_CASES = (1, 2, 3, 4)
CURB_IDS = {"I4": "a", "I5": "b", "I6": "c", "I7": "d"}
DEFAULT_T = 0.7
TACHIBANA_TS = tuple(float(t) for t in np.linspace(0.5, 3.0, 20))
CSV_COLUMNS = ["id", "sample", "residual", "pass", "r"]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    name: str
    anchor: str
    cases: Tuple[int, ...] = ALL_CASES
    scope: str = "point"
    applies: Optional[Callable[[OperatorFamily], Optional[str]]] = None


def _tachibana_skip(fam: OperatorFamily) -> Optional[str]:
    spec = fam.spec
    if spec.B.get("type") != "diagonal" or spec.offdiag is not None:
        return "needs a diagonal case-1 B"
    try:
        a, _, _ = tachibana_constants(spec)
    except BfconeError as e:
        return str(e)
    if a < 0 or fam.branch not in ("rational", "coth") or spec.const != 0:
        return "needs k >= 0, const = 0 and the rational or coth branch"
    return None


def _potential_skip(fam: OperatorFamily) -> Optional[str]:
    spec = fam.spec
    if spec.B.get("type") != "diagonal" or spec.offdiag is not None:
        return "needs a diagonal case-1 B"
    return None


def _einstein_skip(fam: OperatorFamily) -> Optional[str]:
    return None if bv.einstein_value(fam) is not None else "family is not Einstein"


_ENTRIES = [
    CatalogEntry("I1", "radial-f", "f = 1 - r (dB_r/dr w, w) / (2 (B_r w, w))"),
    CatalogEntry("I2", "difference-Br", "A_r = B_r - (r/2) dB_r/dr"),
    CatalogEntry("I3", "G-equation", "r G'/2 - G + 2 = r^4 mu'(r^2), G = r^2 mu + 2", (1, 2)),
    CatalogEntry("I4", "curvature-XTYZ", "R(X, T, Y, Z) in terms of df on H"),
    CatalogEntry("I5", "curvature-TVVT", "R(T, V, V, T) = g(v, v) + r^2 f ((G-2)(8f-2) + r G' + 12 f^2)"),
    CatalogEntry("I6", "curvature-TVVZ", "R(T, V, V, Z) = -r^3/2 df'(JZ) + r^2 (G-1) df(JZ)"),
    CatalogEntry("I7", "curvature-XVYZ", "R(X, V, Y, Z) in terms of df on H"),
    CatalogEntry("I8", "adjoint-square", "(a(t)w, a(t)w) / (Aw, w) = q'(t) p(t) - q(t) p'(t)"),
    CatalogEntry("I9", "adjoint-horizontal", "|a(t)w - p(t) Aw|^2_H closed form"),
    CatalogEntry("I10", "p-hat-radial", "d/dr p-hat_r(t) = (2f/r)(p-hat_r(t) - q-hat_1(t))", (3, 4)),
    CatalogEntry("I11", "root-velocity", "d eta_j/dr = (2f/r) q-hat_1(eta_j) / p-hat'(eta_j)", (3, 4)),
    CatalogEntry("I12a", "horizontal-p-hat", "|d^H p-hat(t)|^2 closed form", (3, 4)),
    CatalogEntry("I12b", "horizontal-f", "|d^H (f/r^2)|^2 = 4f^2/r^6 ((B_r^2 w,w)/(B_r w,w) - 2 r^2 gamma)", (3, 4)),
    CatalogEntry("I12c", "horizontal-cross", "<d^H (f/r^2), d^H p-hat(t)> closed form", (3, 4)),
    CatalogEntry("I13", "root-gradient", "|grad xi_j|^2 = -4 p_m(xi_j) / P_n'(xi_j)", (3, 4)),
    CatalogEntry("I14", "lagrange-form", "sum_j q-hat_1(eta_j)/p-hat'(eta_j) prod_(i!=j)(t - eta_i + c') = q-hat_1(t+c') - p-hat(t+c')", (3, 4)),
    CatalogEntry("I15", "theta-spectrum", "spec Theta = roots of P_1 and of Q-hat/q-hat shifted by c'", (3, 4)),
    CatalogEntry("I16", "kahler-symmetries", "R in K(V): pair symmetry, Bianchi, J-invariance"),
    CatalogEntry("I17", "ricci-adjoint", "<c*_K(S), R> = <S, c_K(R)>"),
    CatalogEntry("I18", "kahler-form", "g = omega(., J .), omega(V, T) = r^2 f, d omega = 0"),
    CatalogEntry("I19", "family-constraints", "[A, B] = 0, tr B = 0, B eta-hermitian", scope="spec"),
    CatalogEntry("I20", "G-radial", "dG = 0 on H and T, T(f) = 0"),
    CatalogEntry("I21", "bochner-flat", "|W| / |R| = 0"),
    CatalogEntry("I22", "constant-roots", "constant roots of P_1 from q-hat_1(c) and the exceptional case", (3, 4)),
    CatalogEntry("I23", "generating-function", "x'' = lambda_1 t x'^3 + lambda_2 x'^2", (1,), "spec", _tachibana_skip),
    CatalogEntry("I24", "theta-on-L", "Theta(L_j) = (eta_j - c') L_j - q_r(xi_j) / (r^4 (eta_j - gamma)) V", (3, 4)),
    CatalogEntry("I25", "potential-maps", "x(F(z)) = |z|^2 for the implicit and reduced equations", (1,), "point", _potential_skip),
    CatalogEntry("I26", "modified-scalar", "sum of roots of p_(A,x) Q_A / q_A = -(A^2 w, w) / (A w, w)"),
    CatalogEntry("I27", "einstein-theta", "Theta = (e or lambda) / (m+3) Id", (1, 2, 4), "point", _einstein_skip),
]

CATALOG: Dict[str, CatalogEntry] = {e.id: e for e in _ENTRIES}


@dataclass
class CheckResult:
    id: str
    n_samples: int
    max_residual: Optional[float]
    tolerance: float
    passed: bool
    notes: str = ""
    anchor: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "n_samples": self.n_samples,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "notes": self.notes,
            "anchor": self.anchor,
        }


def _plain(obj):
    """JSON-ready copy with floats at 17 significant digits and non-finite values as null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.17g}") if math.isfinite(v) else None
    return obj


@dataclass
class Report:
    spec: dict
    env: dict
    checks: List[CheckResult]
    skipped: List[dict] = field(default_factory=list)
    seconds: float = 0.0
    rows: List[dict] = field(default_factory=list)

    @property
    def n_pass(self) -> int:
        return sum(1 for c in self.checks if c.passed)

    @property
    def n_fail(self) -> int:
        return len(self.checks) - self.n_pass

    @property
    def exit_code(self) -> int:
        return 0 if self.n_fail == 0 else 1

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "env": self.env,
            "checks": [c.to_dict() for c in self.checks],
            "skipped": self.skipped,
            "summary": {"pass": self.n_pass, "fail": self.n_fail, "seconds": self.seconds},
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=CSV_COLUMNS)

    def write_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")


class PointContext:
    """Lazily computed data shared by the checks at one sample point."""

    def __init__(self, fam: OperatorFamily, z: ConeChartPoint, index: int, seed: int):
        self.fam = fam
        self.z = z
        self.index = index
        self.rng = np.random.default_rng([seed, index])

    @cached_property
    def riemann(self):
        return riemann(self.fam, self.z)

    def horizontal(self, k: int) -> List[np.ndarray]:
        k = min(k, self.z.x.size - 2)
        return random_horizontal(self.fam, self.z, k, self.rng)

    def sphere_data(self):
        """(A = B_r as HermOp, x, q) for the sphere-model identities."""
        fam, z = self.fam, self.z
        A = HermOp(fam.B_r(z.r), fam.form)
        if fam.case in (3, 4):
            q = bv.scaled_poly(fam.parabolic.q_hat, z.r)
        else:
            q = minimal_poly_of(A)
        return A, NullPoint(z.u), q


def _radial_f(ctx: PointContext) -> float:
    fam, z = ctx.fam, ctx.z
    f, _ = f_and_G(fam, z)
    w = z.w
    bw = fam.form.quad(fam.B_r(z.r), w).real
    bdw = fam.form.quad(fam.Bdot_r(z.r), w).real
    rhs = 1 - z.r * bdw / (2 * bw)
    return abs(f - rhs) / max(1.0, abs(rhs))


def _difference_br(ctx: PointContext) -> float:
    fam, r = ctx.fam, ctx.z.r
    Ar = fam.A_r(r)
    diff = Ar - (fam.B_r(r) - r / 2 * fam.Bdot_r(r))
    res = float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(Ar))))
    closed = fam.coefficient_derivatives(r)
    for i in range(3):
        jet = jets.deriv_r(lambda s: fam.coefficients(s)[i], r)
        res = max(res, abs(jet.d1 - float(closed[i])) / max(1.0, abs(jet.d1)))
    return res


def _g_equation(ctx: PointContext) -> float:
    fam, r = ctx.fam, ctx.z.r
    mu, dmu = fam.mu(r * r)
    jet = fam.G_jet(r)
    rhs = r**4 * dmu
    scale = max(1.0, abs(rhs), abs(jet.value))
    return max(abs(r * jet.d1 / 2 - jet.value + 2 - rhs), abs(jet.value - (r * r * mu + 2))) / scale


def _patrat(ctx: PointContext, t: float) -> float:
    A, x, q = ctx.sphere_data()
    return patrat_residual(A, x, t, q)


def _aditional(ctx: PointContext, t: float) -> float:
    A, x, q = ctx.sphere_data()
    return aditional_residual(A, x, t, q)


def _root_gradient(ctx: PointContext) -> float:
    fam, z = ctx.fam, ctx.z
    roots = bv.p1_roots(fam, z)
    constants = fam.parabolic.constant_roots()
    worst = 0.0
    for j, xi in enumerate(roots):
        if any(abs(xi - c) < 1e-6 * max(1.0, abs(c)) for c in constants):
            continue
        worst = max(worst, bv.check_grad(fam, z, j))
    return worst


def _ricci_adjoint(ctx: PointContext) -> float:
    R = ctx.riemann
    S1 = random_sym11(R.g, R.J, ctx.rng)
    S2 = random_sym11(R.g, R.J, ctx.rng)
    Rt = R + adjoint_ck(S2)
    lhs = curvature_inner(adjoint_ck(S1), Rt)
    rhs = sym_inner(S1, ricci_contract(Rt))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def _bochner_flat(ctx: PointContext) -> Tuple[float, str]:
    W, Rn = bochner_ratio(ctx.riemann)
    if Rn < config.RIEMANN_FLOOR:
        return 0.0, "floor"
    return W / Rn, ""


def _kahler_symmetries(ctx: PointContext) -> Tuple[float, str]:
    R = ctx.riemann
    if tensor_norm(R) < config.RIEMANN_FLOOR:
        return 0.0, "floor"
    return max(symmetry_residuals(R).values()), ""


def _potentials(ctx: PointContext) -> float:
    fam, z = ctx.fam, ctx.z
    d = fam.spec.d
    subtype = "hyperbolic" if d > 0 else ("elliptic" if d < 0 else "parabolic")
    lo, hi = fam.interval
    res = potential_residuals(subtype, fam.spec, z.z, (lo * lo, hi * hi))
    return max(res) / max(1.0, z.r**2)


def _with_note(fn: Callable[[PointContext], float]) -> Callable[[PointContext, float], Tuple[float, str]]:
    return lambda ctx, t: (fn(ctx), "")


_POINT_CHECKS: Dict[str, Callable[[PointContext, float], Tuple[float, str]]] = {
    "I1": _with_note(_radial_f),
    "I2": _with_note(_difference_br),
    "I3": _with_note(_g_equation),
    "I8": lambda ctx, t: (_patrat(ctx, t), ""),
    "I9": lambda ctx, t: (_aditional(ctx, t), ""),
    "I10": lambda ctx, t: (bv.check_dr(ctx.fam, ctx.z, t), ""),
    "I11": lambda ctx, t: (bv.check_dot(ctx.fam, ctx.z), ""),
    "I12a": lambda ctx, t: (bv.check_hori(ctx.fam, ctx.z, t)[0], ""),
    "I12b": lambda ctx, t: (bv.check_hori(ctx.fam, ctx.z, t)[1], ""),
    "I12c": lambda ctx, t: (bv.check_hori(ctx.fam, ctx.z, t)[2], ""),
    "I13": _with_note(_root_gradient),
    "I14": lambda ctx, t: (bv.eq_e_residual(ctx.fam, ctx.z), ""),
    "I15": lambda ctx, t: (bv.theta_spectrum_residual(ctx.fam, ctx.z, ctx.riemann), ""),
    "I16": lambda ctx, t: _kahler_symmetries(ctx),
    "I17": _with_note(_ricci_adjoint),
    "I18": lambda ctx, t: (max(omega_residuals(ctx.fam, ctx.z).values()), ""),
    "I20": lambda ctx, t: (max(radial_residuals(ctx.fam, ctx.z, ctx.rng).values()), ""),
    "I21": lambda ctx, t: _bochner_flat(ctx),
    "I22": lambda ctx, t: bv.constante_residual(ctx.fam, ctx.z),
    "I24": lambda ctx, t: (bv.expresii_residual(ctx.fam, ctx.z, ctx.riemann), ""),
    "I25": _with_note(_potentials),
    "I26": lambda ctx, t: (bv.modified_scalar_residual(ctx.fam, ctx.z), ""),
    "I27": lambda ctx, t: (bv.einstein_residual(ctx.fam, ctx.z, ctx.riemann), ""),
}


def _family_constraints(fam: OperatorFamily) -> List[Tuple[float, str]]:
    v = fam.violations()
    scale = max(1.0, float(np.max(np.abs(fam.B.entries))))
    note = (
        f"commutator norm {v['commutator']:.3e}, trace {v['trace']:.3e}, "
        f"eta-hermitian residual {v['eta_hermitian']:.3e}"
    )
    return [(max(v.values()) / scale, note)]


def _generating_function(fam: OperatorFamily) -> List[Tuple[float, str]]:
    out = []
    for t in TACHIBANA_TS:
        ode, eq = tachibana_residuals(fam.spec, [t])
        out.append((max(ode, eq), ""))
    return out


_SPEC_CHECKS: Dict[str, Callable[[OperatorFamily], List[Tuple[float, str]]]] = {
    "I19": _family_constraints,
    "I23": _generating_function,
}


def _curb_raw(ctx: PointContext) -> Dict[str, Tuple[float, float, float]]:
    X, Y, Zv = (ctx.horizontal(3) * 3)[:3]
    return curb_terms(ctx.fam, ctx.z, ctx.riemann, X, Y, Zv)


def _curb_residual(raw: Tuple[float, float, float], sign: float) -> float:
    lhs, rhs, scale = raw
    return abs(sign * lhs - rhs) / max(scale, 1e-300)


def calibrate_sign(raws: Sequence[Tuple[float, float, float]]) -> float:
    """+1 or -1, whichever makes the curvature components agree better overall."""
    plain = sum(_curb_residual(raw, 1.0) for raw in raws)
    flipped = sum(_curb_residual(raw, -1.0) for raw in raws)
    return -1.0 if flipped < plain else 1.0


def _check_known(check_id: str) -> CatalogEntry:
    if check_id not in CATALOG:
        raise UnknownId(f"Unknown catalog id '{check_id}'")
    return CATALOG[check_id]


def _skip_reason(entry: CatalogEntry, fam: OperatorFamily) -> Optional[str]:
    if fam.case not in entry.cases:
        return f"not defined for case {fam.case}"
    if entry.applies is not None:
        return entry.applies(fam)
    return None


def _tolerance(check_id: str, spec: FamilySpec) -> float:
    return float(spec.tolerances.get(check_id, config.DEFAULT_TOLERANCES[check_id]))


def _evaluate_point(
    fam: OperatorFamily, z: ConeChartPoint, index: int, seed: int, ids: Sequence[str], t: float
) -> Dict[str, tuple]:
    """id -> ("ok", residual, note) or ("error", message); curb ids carry raw triples."""
    ctx = PointContext(fam, z, index, seed)
    out: Dict[str, tuple] = {}
    if any(i in CURB_IDS for i in ids):
        try:
            raw = _curb_raw(ctx)
            for i in ids:
                if i in CURB_IDS:
                    out[i] = ("raw", raw[CURB_IDS[i]])
        except (BfconeError, np.linalg.LinAlgError) as e:
            for i in ids:
                if i in CURB_IDS:
                    out[i] = ("error", f"{type(e).__name__}: {e}")
    for i in ids:
        if i in CURB_IDS:
            continue
        try:
            residual, note = _POINT_CHECKS[i](ctx, t)
            out[i] = ("ok", float(residual), note)
        except (BfconeError, np.linalg.LinAlgError) as e:
            out[i] = ("error", f"{type(e).__name__}: {e}")
        except Exception:
            logger.error(f"Unexpected failure of {i} at sample {index} (r = {z.r:.6g})")
            raise
    return out


def _aggregate(
    check_id: str,
    outcomes: List[tuple],
    radii: List[Optional[float]],
    tolerance: float,
    extra_note: str = "",
) -> Tuple[CheckResult, List[dict]]:
    residuals, errors, floor, notes = [], [], 0, []
    rows = []
    for k, (outcome, r) in enumerate(zip(outcomes, radii)):
        if outcome[0] == "error":
            errors.append(f"sample {k}: {outcome[1]}")
            rows.append({"id": check_id, "sample": k, "residual": None, "pass": False, "r": r})
            continue
        _, residual, note = outcome
        if note == "floor":
            floor += 1
        elif note and note not in notes:
            notes.append(note)
        residuals.append(residual)
        rows.append({"id": check_id, "sample": k, "residual": residual, "pass": residual < tolerance, "r": r})
    if extra_note:
        notes.insert(0, extra_note)
    if floor:
        notes.append("‖R‖ below floor" if floor == len(outcomes) else f"‖R‖ below floor at {floor} of {len(outcomes)} samples")
    max_residual = max(residuals) if residuals and not errors else None
    passed = max_residual is not None and max_residual < tolerance
    if errors:
        notes.append(f"{len(errors)} sample(s) failed; first: {errors[0]}")
    elif not passed and residuals:
        k = int(np.argmax(residuals))
        where = f" at r = {radii[k]:.6g}" if radii[k] is not None else ""
        notes.append(f"worst sample {k}{where}")
    result = CheckResult(
        id=check_id,
        n_samples=len(outcomes),
        max_residual=max_residual,
        tolerance=tolerance,
        passed=passed,
        notes="; ".join(notes),
        anchor=CATALOG[check_id].anchor,
    )
    return result, rows


def run_identity(
    check_id: str, fam: OperatorFamily, point: Optional[ConeChartPoint] = None, params: Optional[dict] = None
) -> CheckResult:
    """Evaluate one catalog entry at one point (or once, for spec-level entries).

    Raises:
        UnknownId: if check_id is not in the catalog.
        IncompatibleCase: if the entry does not apply to the family.
    """
    entry = _check_known(check_id)
    reason = _skip_reason(entry, fam)
    if reason is not None:
        raise IncompatibleCase(f"{check_id} does not apply: {reason}")
    params = params or {}
    tolerance = float(params.get("tolerance", _tolerance(check_id, fam.spec)))
    if entry.scope == "spec":
        outcomes = [("ok",) + item for item in _SPEC_CHECKS[check_id](fam)]
        result, _ = _aggregate(check_id, outcomes, [None] * len(outcomes), tolerance)
        return result
    if point is None:
        raise IncompatibleCase(f"{check_id} is evaluated at a sample point")
    seed = int(params.get("seed", fam.spec.seed))
    out = _evaluate_point(fam, point, 0, seed, [check_id], float(params.get("t", DEFAULT_T)))[check_id]
    note = ""
    if out[0] == "raw":
        sign = calibrate_sign([out[1]])
        note = "sign-flip calibration applied" if sign < 0 else ""
        out = ("ok", _curb_residual(out[1], sign), "")
    result, _ = _aggregate(check_id, [out], [point.r], tolerance, note)
    return result


def _resolve_selection(selection: Union[str, Sequence[str]]) -> List[str]:
    if isinstance(selection, str):
        if selection == "all":
            return list(CATALOG)
        selection = [selection]
    ids = []
    for i in selection:
        _check_known(i)
        if i not in ids:
            ids.append(i)
    return ids


def run_suite(
    spec: FamilySpec,
    selection: Union[str, Sequence[str]] = "all",
    threads: Optional[int] = None,
    timing: bool = False,
    t: float = DEFAULT_T,
) -> Report:
    """Build the family, sample the domain and run the selected catalog entries.

    Math-domain errors at a sample become failed entries; the suite never
    aborts on them.

    Raises:
        UnknownId: for an unknown id in the selection.
        SpecViolation, BadParams, EmptyDomain: if the spec itself is invalid.
    """
    start = time.perf_counter()
    ids = _resolve_selection(selection)
    fam = build_family(spec)
    active, skipped = [], []
    for i in ids:
        reason = _skip_reason(CATALOG[i], fam)
        if reason is None:
            active.append(i)
        else:
            skipped.append({"id": i, "reason": reason})
            logger.warning(f"Skipping {i}: {reason}")
    point_ids = [i for i in active if CATALOG[i].scope == "point"]
    points: List[ConeChartPoint] = []
    if point_ids:
        accept = (lambda z: bv.generic_point(fam, z)) if fam.case in (3, 4) else None
        points = sample_domain(fam, spec.samples, spec.seed, accept=accept)
    workers = threads or config.BFCONE_THREADS
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        per_point = list(
            pool.map(lambda k: _evaluate_point(fam, points[k], k, spec.seed, point_ids, t), range(len(points)))
        )
    radii = [z.r for z in points]

    sign = 1.0
    curb_raws = [
        p[i][1] for p in per_point for i in point_ids if i in CURB_IDS and p[i][0] == "raw"
    ]
    if curb_raws:
        sign = calibrate_sign(curb_raws)

    checks: List[CheckResult] = []
    rows: List[dict] = []
    for i in active:
        tolerance = _tolerance(i, spec)
        if CATALOG[i].scope == "spec":
            try:
                outcomes = [("ok",) + item for item in _SPEC_CHECKS[i](fam)]
            except BfconeError as e:
                outcomes = [("error", f"{type(e).__name__}: {e}")]
            result, check_rows = _aggregate(i, outcomes, [None] * len(outcomes), tolerance)
        else:
            outcomes = []
            for p in per_point:
                out = p[i]
                if out[0] == "raw":
                    out = ("ok", _curb_residual(out[1], sign), "")
                outcomes.append(out)
            note = "sign-flip calibration applied" if i in CURB_IDS and sign < 0 else ""
            result, check_rows = _aggregate(i, outcomes, radii, tolerance, note)
        logger.info(
            f"{i}: max residual {result.max_residual} (tolerance {tolerance:.1e}) "
            f"{'pass' if result.passed else 'FAIL'}"
        )
        checks.append(result)
        rows.extend(check_rows)

    elapsed = time.perf_counter() - start
    logger.info(f"Suite finished in {elapsed:.2f}s: {sum(c.passed for c in checks)} pass, "
                f"{sum(not c.passed for c in checks)} fail")
    env = {
        "seed": spec.seed,
        "samples": spec.samples,
        "sign_convention": "+1" if sign > 0 else "-1",
        "tolerances": {i: _tolerance(i, spec) for i in active},
        "version": config.VERSION,
    }
    return Report(
        spec=spec.to_dict(),
        env=env,
        checks=checks,
        skipped=skipped,
        seconds=round(elapsed, 3) if timing else 0.0,
        rows=rows,
    )


def _apply_field(data: dict, key: str, value) -> None:
    if key.startswith("B."):
        data["B"] = dict(data["B"])
        data["B"][key[2:]] = value
    else:
        data[key] = value


def run_scan(grid: dict, threads: Optional[int] = None) -> pd.DataFrame:
    """Run the suite over the cartesian product of a parameter grid.

    Args:
        grid: {"base": spec dict, "grid": {field: [values]}, "ids": [...]}.
            Fields of B are addressed as "B.<key>".
        threads: worker count per suite.

    Returns:
        pd.DataFrame: one row per grid point with pass/fail counts and the worst check.
    """
    if "base" not in grid or "grid" not in grid:
        raise BadParams("Scan JSON needs 'base' and 'grid'")
    keys = sorted(grid["grid"])
    selection = grid.get("ids", "all")
    rows = []
    for values in product(*(grid["grid"][k] for k in keys)):
        data = dict(grid["base"])
        for k, v in zip(keys, values):
            _apply_field(data, k, v)
        row = {k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in zip(keys, values)}
        try:
            report = run_suite(FamilySpec.from_dict(data), selection, threads=threads)
        except BfconeError as e:
            row.update({"pass": 0, "fail": 0, "worst_id": None, "worst_residual": None,
                        "error": f"{type(e).__name__}: {e}"})
            rows.append(row)
            continue
        failed = [c for c in report.checks if not c.passed]
        worst = failed[0] if failed else None
        row.update({
            "pass": report.n_pass,
            "fail": report.n_fail,
            "worst_id": worst.id if worst else None,
            "worst_residual": worst.max_residual if worst else None,
            "error": None,
        })
        rows.append(row)
        logger.info(f"Scan point {dict(zip(keys, values))}: {report.n_pass} pass, {report.n_fail} fail")
    return pd.DataFrame(rows, columns=keys + ["pass", "fail", "worst_id", "worst_residual", "error"])

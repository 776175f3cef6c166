import math

import numpy as np
import pytest

import src.jets as jets
from src.errors import BadParams, NearPole, SpecViolation, UnsupportedCase
from src.families import (
    FamilySpec,
    build_family,
    bryant_type,
    example_spec,
    mu_solution,
    order_one_polys,
    parabolic_data,
    predicted_polys,
    resolve_branch,
    sample_domain,
    with_overrides,
)
from src.polyalg import RealPoly
from tests.conftest import load_spec


@pytest.mark.parametrize(
    "d, branch",
    [(0.5, "tan"), (-0.5, "coth"), (-0.5, "tanh"), (0.0, "rational")],
)
def test_mu_branches_solve_the_riccati_equation(d, branch):
    for t in (0.4, 0.9, 1.3):
        mu, dmu = mu_solution(d, 0.2, t, branch)
        assert dmu == pytest.approx(mu * mu / 2 + d, rel=1e-12)
        jet = jets.deriv_r(lambda s: mu_solution(d, 0.2, s, branch)[0], t)
        assert jet.d1 == pytest.approx(dmu, rel=1e-12)


def test_mu_near_pole_raises():
    with pytest.raises(NearPole):
        mu_solution(0.0, 0.0, 5e-4, "rational")


def test_branch_resolution():
    assert resolve_branch(-1.0, "auto", case=1) == "coth"
    assert resolve_branch(-1.0, "auto", case=2) == "tanh"
    assert resolve_branch(0.0) == "rational"
    with pytest.raises(BadParams):
        resolve_branch(1.0, "coth")


@pytest.mark.parametrize(
    "name",
    ["flat.json", "bryant_case1.json", "case3_two_eigenvalues.json", "case4_order_one.json"],
)
def test_difference_identity_holds_for_every_case(name):
    fam = build_family(load_spec(name))
    lo, hi = fam.interval
    for r in np.linspace(lo, hi, 7)[1:-1]:
        diff = fam.A_r(r) - (fam.B_r(r) - r / 2 * fam.Bdot_r(r))
        assert np.max(np.abs(diff)) < 1e-12


def test_case2_family_builds_on_the_tanh_branch():
    spec = example_spec("einstein", [1.0, 2.0])
    fam = build_family(spec)
    assert fam.branch == "tanh"
    r = 0.8
    assert np.max(np.abs(fam.A_r(r) - (fam.B_r(r) - r / 2 * fam.Bdot_r(r)))) < 1e-12


def test_negative_control_commutator_norm():
    fam = build_family(load_spec("negative_control.json"))
    assert fam.violations()["commutator"] == pytest.approx(0.1, rel=1e-12)


def test_strict_specs_reject_invariant_violations():
    with pytest.raises(SpecViolation):
        build_family(with_overrides(load_spec("negative_control.json"), strict=True))
    bad_trace = FamilySpec(mdim=2, case=1, d=0.0, B={"type": "diagonal", "eigenvalues": [1.0, 0.0, 0.0, 0.0]})
    with pytest.raises(SpecViolation):
        build_family(bad_trace)


def test_missing_constants():
    with pytest.raises(BadParams):
        build_family(FamilySpec(mdim=2, case=1, B={"type": "diagonal", "eigenvalues": [0.0] * 4}))
    with pytest.raises(BadParams):
        build_family(with_overrides(load_spec("case4_order_one.json"), lam=None))
    with pytest.raises(SpecViolation):
        build_family(FamilySpec(mdim=2, case=2, d=0.5, B={"type": "diagonal", "eigenvalues": [0.0] * 4}))


def test_parabolic_block_sizes_must_add_up():
    spec = load_spec("case3_two_eigenvalues.json")
    B = dict(spec.B, betas=[{"value": 0.6, "mult": 2}])
    with pytest.raises(SpecViolation):
        parabolic_data(with_overrides(spec, B=B))


def test_sampling_is_deterministic_and_inside_the_domain(bryant_family):
    first = sample_domain(bryant_family, 8, 42)
    second = sample_domain(bryant_family, 8, 42)
    assert [p.r for p in first] == [p.r for p in second]
    lo, hi = bryant_family.interval
    assert all(lo < p.r < hi for p in first)


def test_bryant_types():
    assert bryant_type(load_spec("bryant_case1.json")) == "parabolic1"
    assert bryant_type(load_spec("einstein_case1.json")) == "elliptic"
    assert bryant_type(load_spec("case3_two_eigenvalues.json")) == "parabolic2"
    assert bryant_type(load_spec("case4_order_one.json")) == "parabolic1"
    assert bryant_type(load_spec("einstein_case4.json")) == "elliptic"
    with pytest.raises(UnsupportedCase):
        bryant_type(example_spec("einstein", [1.0, 2.0]))


def test_order_one_polynomials_agree_with_the_general_formula():
    spec = load_spec("case4_order_one.json")
    p_m, p_c = predicted_polys(spec)
    o_m, o_c = order_one_polys(spec)
    assert p_m.max_abs_diff(o_m) < 1e-12
    assert p_c.max_abs_diff(o_c) < 1e-12
    # (t - 4/5)(t + 1/5)^2 for m = 2, lambda = -1
    assert p_m.max_abs_diff(RealPoly.from_roots([0.8, -0.2, -0.2])) < 1e-12


def test_constant_roots_are_divided_out_of_p_m():
    p_m, p_c = predicted_polys(load_spec("case4_constant_roots.json"))
    assert p_c.degree == 5
    assert p_m.max_abs_diff(RealPoly.from_roots([-0.32, 0.48])) < 1e-12


def test_case1_model_polynomials_match_order_one_forms():
    spec = example_spec("einstein", [1.0])
    p_m, p_c = predicted_polys(spec)
    o_m, o_c = order_one_polys(spec)
    assert p_c.degree == o_c.degree
    for t in (-0.5, 0.1, 0.7):
        assert o_c(t) == pytest.approx(p_c(t), abs=1e-12)


def test_example_specs():
    spec = example_spec("wproj", [1.0, 1.0, 1.0, 1.0], sign=-1.0)
    assert spec.d == pytest.approx(-2 / 25)
    assert example_spec("negative").offdiag == complex(0.1 * math.sqrt(2), 0.0)
    with pytest.raises(BadParams):
        example_spec("bryant", [1.0])
    with pytest.raises(BadParams):
        example_spec("sphere")


def test_spec_dict_keeps_lambda_and_offdiag():
    spec = load_spec("negative_control.json")
    data = spec.to_dict()
    assert data["offdiag"] == [pytest.approx(0.1414213562373095), 0.0]
    assert FamilySpec.from_dict(load_spec("einstein_case4.json").to_dict()).lam == -1.0

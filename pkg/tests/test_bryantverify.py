import numpy as np
import pytest

import src.bryantverify as bv
from src.errors import BadParams, WrongCase
from src.families import build_family
from tests.conftest import domain_points, load_spec

PARABOLIC_FAMILIES = ["two_eigenvalue_family", "order_one_family", "constant_roots_family"]


def test_b_hat_machinery_needs_cases_3_and_4(bryant_family):
    z = domain_points(bryant_family, 1)[0]
    with pytest.raises(WrongCase):
        bv.hat_data(bryant_family, z)
    with pytest.raises(WrongCase):
        bv.constante_predicate(load_spec("bryant_case1.json"))


@pytest.mark.parametrize("family", PARABOLIC_FAMILIES)
def test_p_hat_radial_derivative(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam):
        for t in (-0.3, 0.7, 1.4):
            assert bv.check_dr(fam, z, t) < 1e-8


@pytest.mark.parametrize("family", PARABOLIC_FAMILIES)
def test_root_velocities(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam):
        assert bv.check_dot(fam, z) < 1e-7


def test_horizontal_gradient_identities(two_eigenvalue_family):
    for z in domain_points(two_eigenvalue_family):
        assert max(bv.check_hori(two_eigenvalue_family, z, 0.7)) < 1e-6


@pytest.mark.parametrize("family", PARABOLIC_FAMILIES)
def test_lagrange_form(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam):
        assert bv.eq_e_residual(fam, z) < 1e-8


@pytest.mark.parametrize("family", ["two_eigenvalue_family", "order_one_family"])
def test_root_gradients(family, request):
    fam = request.getfixturevalue(family)
    constants = fam.parabolic.constant_roots()
    for z in domain_points(fam):
        for j, xi in enumerate(bv.p1_roots(fam, z)):
            if any(abs(xi - c) < 1e-6 for c in constants):
                continue
            assert bv.check_grad(fam, z, j) < 1e-4


@pytest.mark.parametrize(
    "name, roots, flags",
    [
        ("case3_parabolic_mu.json", [-0.16], {"qhat1_c_zero": True, "exceptional": False}),
        ("case3_nilpotent.json", [0.0], {"qhat1_c_zero": True, "exceptional": False}),
        ("case4_beta_root.json", [0.48], {"qhat1_c_zero": True, "exceptional": False}),
        ("case4_parabolic_mu.json", [], {"qhat1_c_zero": False, "exceptional": False}),
    ],
)
def test_constant_roots_across_subcases(name, roots, flags):
    pred = bv.constante_predicate(load_spec(name))
    assert pred["roots"] == pytest.approx(roots, abs=1e-12)
    assert pred["flags"] == flags


def test_constant_roots_are_predicted_and_tracked(constant_roots_family):
    pred = bv.constante_predicate(load_spec("case4_constant_roots.json"))
    assert pred["roots"] == pytest.approx([-0.32, 0.48])
    assert pred["flags"] == {"qhat1_c_zero": True, "exceptional": True}
    for z in domain_points(constant_roots_family):
        residual, note = bv.constante_residual(constant_roots_family, z)
        assert residual < 1e-7
        assert note == ""


def test_constant_root_has_no_gradient_check(constant_roots_family):
    z = domain_points(constant_roots_family, 1)[0]
    roots = bv.p1_roots(constant_roots_family, z)
    j = int(np.argmin(np.abs(roots + 0.32)))
    with pytest.raises(BadParams):
        bv.check_grad(constant_roots_family, z, j)
    with pytest.raises(BadParams):
        bv.check_grad(constant_roots_family, z, roots.size)


@pytest.mark.parametrize("family", PARABOLIC_FAMILIES)
def test_theta_spectrum(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam, 3):
        assert bv.theta_spectrum_residual(fam, z) < 1e-5


def test_theta_spectrum_counts_every_eigenvalue(two_eigenvalue_family):
    z = domain_points(two_eigenvalue_family, 1)[0]
    assert bv.predicted_theta_spectrum(two_eigenvalue_family, z).size == two_eigenvalue_family.mdim + 1


@pytest.mark.parametrize("family", ["bryant_family", "two_eigenvalue_family"])
def test_modified_scalar_curvature(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam):
        assert bv.modified_scalar_residual(fam, z) < 1e-6


@pytest.mark.parametrize(
    "name, value",
    [("einstein_case1.json", 0.2), ("einstein_case4.json", -0.2)],
)
def test_einstein_families_have_scalar_theta(name, value):
    fam = build_family(load_spec(name))
    assert bv.einstein_value(fam) == pytest.approx(value)
    for z in domain_points(fam, 3):
        assert bv.einstein_residual(fam, z) < 1e-6


def test_non_einstein_family_has_no_einstein_value(bryant_family):
    assert bv.einstein_value(bryant_family) is None
    with pytest.raises(BadParams):
        bv.einstein_residual(bryant_family, domain_points(bryant_family, 1)[0])


def test_generic_points_keep_roots_apart(two_eigenvalue_family):
    for z in domain_points(two_eigenvalue_family):
        assert bv.generic_point(two_eigenvalue_family, z)
        roots = bv.p1_roots(two_eigenvalue_family, z)
        assert roots.size < 2 or np.min(np.diff(roots)) >= bv.COLLISION_GAP

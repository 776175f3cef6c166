from types import SimpleNamespace

import numpy as np
import pytest

import src.jets as jets
from src.bochner import symmetry_residuals, tensor_norm
from src.conegeom import (
    ConeChartPoint,
    cone_fields,
    contact_theta,
    curb_terms,
    domain_contains,
    f_and_G,
    frame,
    metric,
    omega_residuals,
    radial_residuals,
    random_horizontal,
    riemann,
    riemann_from_metric,
)
from src.errors import BadParams, OutsideDomain
from tests.conftest import domain_points


def test_flat_cone_is_euclidean(flat_family):
    for z in domain_points(flat_family, 20, seed=1):
        assert np.allclose(metric(flat_family, z), np.eye(6), atol=1e-12)
        assert tensor_norm(riemann(flat_family, z)) < 1e-8
        assert f_and_G(flat_family, z) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_flat_reeb_field_is_the_standard_one(flat_family):
    z = domain_points(flat_family, 1, seed=2)[0]
    fr = frame(flat_family, z)
    J = np.block([[np.zeros((3, 3)), -np.eye(3)], [np.eye(3), np.zeros((3, 3))]])
    assert np.allclose(fr.T, J @ z.x, atol=1e-12)
    assert np.allclose(fr.Jmat, J, atol=1e-12)
    assert contact_theta(flat_family, z, fr.T) == pytest.approx(1.0)


def test_riemann_sign_on_the_round_sphere():
    # stereographic chart of the unit sphere, sectional curvature 1
    point = np.array([0.3, -0.2])
    x = jets.Jet2.variables(point)
    s = 1 + (x * x).sum(0)
    g = (4 / (s * s)) * np.eye(2)
    R = riemann_from_metric(g)
    conformal = 4 / (1 + point @ point) ** 2
    assert R[0, 1, 1, 0] == pytest.approx(conformal**2, rel=1e-10)
    assert R[0, 1, 0, 1] == pytest.approx(-(conformal**2), rel=1e-10)


def test_chart_point_excludes_origin():
    with pytest.raises(OutsideDomain):
        ConeChartPoint(np.zeros(3))


def test_domain_respects_the_interval(bryant_family):
    lo, hi = bryant_family.interval
    u = np.array([1.0, 0.0, 0.0], dtype=complex)
    assert not domain_contains(bryant_family, ConeChartPoint((hi + 0.5) * u))
    assert domain_contains(bryant_family, ConeChartPoint(0.5 * (lo + hi) * u))


@pytest.mark.parametrize("family", ["flat_family", "bryant_family"])
def test_kahler_form_identities(family, request):
    fam = request.getfixturevalue(family)
    for z in domain_points(fam, 5, seed=3):
        res = omega_residuals(fam, z)
        assert res["metric"] < 1e-6
        assert res["volume"] < 1e-6
        assert res["closed"] < 1e-10


def test_curvature_has_kahler_symmetries(bryant_family):
    for z in domain_points(bryant_family, 3, seed=4):
        assert max(symmetry_residuals(riemann(bryant_family, z)).values()) < 1e-6


def test_horizontal_vectors_are_orthonormal(bryant_family):
    z = domain_points(bryant_family, 1, seed=6)[0]
    rng = np.random.default_rng(0)
    vecs = random_horizontal(bryant_family, z, 4, rng)
    g = metric(bryant_family, z)
    fr = frame(bryant_family, z)
    gram = np.array([[a @ g @ b for b in vecs] for a in vecs])
    assert np.allclose(gram, np.eye(4), atol=1e-10)
    for v in vecs:
        assert abs(fr.pvec @ v) < 1e-10
        assert abs(fr.qvec @ v) < 1e-10
    with pytest.raises(BadParams):
        random_horizontal(bryant_family, z, 5, rng)


def test_G_does_not_depend_on_the_A_pairing(bryant_family):
    fam = bryant_family
    # A = Id pairs to zero with every null vector
    degenerate = SimpleNamespace(
        form=fam.form,
        B=fam.B,
        A=SimpleNamespace(entries=np.eye(fam.A.entries.shape[0], dtype=complex)),
        coefficients=fam.coefficients,
        coefficient_derivatives=fam.coefficient_derivatives,
    )
    for z in domain_points(fam, 3, seed=8):
        _, _, da2 = fam.coefficient_derivatives(z.r)
        _, _, a2 = fam.coefficients(z.r)
        expected = z.r * da2 / (2 * a2)
        assert f_and_G(fam, z)[1] == pytest.approx(expected, rel=1e-12)
        fields = cone_fields(degenerate, z.x, with_metric=False)
        assert fields.qA == pytest.approx(0.0, abs=1e-12)
        assert np.isfinite(fields.G)
        assert fields.G == pytest.approx(expected, rel=1e-12)


def test_radial_quantities_on_commuting_family(bryant_family):
    rng = np.random.default_rng(9)
    for z in domain_points(bryant_family, 3, seed=7):
        assert max(radial_residuals(bryant_family, z, rng).values()) < 1e-8


def test_curvature_components_vanish_on_flat_cone(flat_family):
    rng = np.random.default_rng(1)
    z = domain_points(flat_family, 1, seed=8)[0]
    X, Y, Zv = random_horizontal(flat_family, z, 3, rng)
    terms = curb_terms(flat_family, z, riemann(flat_family, z), X, Y, Zv)
    for lhs, rhs, _ in terms.values():
        assert abs(lhs) < 1e-8
        assert abs(rhs) < 1e-8

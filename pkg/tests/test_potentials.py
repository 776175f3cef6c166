import numpy as np
import pytest

from src.errors import BadParams, DomainError
from src.families import build_family, example_spec
from src.potentials import (
    _bracket,
    potential_map,
    potential_residuals,
    radial_substitution,
    reduced_equation,
    tachibana_constants,
    tachibana_residuals,
    tachibana_solution,
)
from tests.conftest import domain_points, load_spec

SUBTYPE_SPECS = [
    ("parabolic", load_spec("bryant_case1.json")),
    ("hyperbolic", example_spec("wproj", [1.0, 1.0, 1.0, 1.0], sign=1.0)),
    ("elliptic", example_spec("wproj", [1.0, 1.0, 1.0, 1.0], sign=-1.0)),
]


@pytest.mark.parametrize("subtype, spec", SUBTYPE_SPECS, ids=[s for s, _ in SUBTYPE_SPECS])
def test_potential_maps_invert(subtype, spec):
    fam = build_family(spec)
    lo, hi = fam.interval
    for z in domain_points(fam, 20, seed=5):
        implicit, reduced = potential_residuals(subtype, spec, z.z, (lo * lo, hi * hi))
        assert implicit < 1e-8
        assert reduced < 1e-8


@pytest.mark.parametrize("subtype, spec", SUBTYPE_SPECS, ids=[s for s, _ in SUBTYPE_SPECS])
def test_reduced_equation_vanishes_at_substituted_radius(subtype, spec):
    fam = build_family(spec)
    to_y, to_x = radial_substitution(subtype, spec)
    eq = reduced_equation(subtype, spec)
    for z in domain_points(fam, 10, seed=7):
        x = float(np.vdot(z.z, z.z).real)
        a = np.abs(potential_map(subtype, spec, z.z)) ** 2
        y = to_y(x)
        assert to_x(y) == pytest.approx(x, rel=1e-12)
        assert abs(eq(y, a)) < 1e-8


def test_hyperbolic_coordinate_lies_below_zero():
    spec = SUBTYPE_SPECS[1][1]
    to_y, _ = radial_substitution("hyperbolic", spec)
    lo, hi = build_family(spec).interval
    assert -1 < to_y(lo * lo) < to_y(hi * hi) < 0


def test_bracket_skips_points_outside_the_domain():
    def h(x):
        if x < 0.5:
            raise DomainError("outside")
        return x - 0.75

    lo, hi = _bracket(h, 0.0, 1.0)
    assert lo <= 0.75 <= hi


def test_bracket_surfaces_other_errors():
    def h(x):
        raise BadParams("not a domain problem")

    with pytest.raises(BadParams):
        _bracket(h, 0.0, 1.0)


def test_potential_map_scales_each_coordinate():
    spec = load_spec("bryant_case1.json")
    z = np.array([0.3 + 0.1j, -0.2j, 0.5])
    w = potential_map("parabolic", spec, z)
    ratios = np.abs(w) / np.abs(z)
    assert np.all(ratios > 0)
    assert not np.allclose(ratios, ratios[0])


def test_subtype_must_match_d():
    with pytest.raises(BadParams):
        potential_map("elliptic", load_spec("bryant_case1.json"), np.array([1.0, 0.0, 0.0]))


def test_tachibana_constants():
    a, lam1, lam2 = tachibana_constants(example_spec("tachibana", [0.25]))
    assert (a, lam1, lam2) == pytest.approx((1.0, 1.0, -2.0))


def test_tachibana_generating_function():
    spec = example_spec("tachibana", [0.25])
    ts = list(np.linspace(0.5, 3.0, 20))
    ode, eq = tachibana_residuals(spec, ts)
    assert ode < 1e-8
    assert eq < 1e-10


def test_tachibana_closed_form_on_rational_branch():
    # e^x x / sqrt(2) = t on mu = -2/t
    spec = example_spec("tachibana", [0.25])
    x, xd, _ = tachibana_solution(spec, 1.7)
    assert np.exp(x) * x / np.sqrt(2) == pytest.approx(1.7, rel=1e-12)
    assert xd == pytest.approx(x / (1.7 * (x + 1)), rel=1e-10)


def test_tachibana_needs_equal_weights():
    with pytest.raises(BadParams):
        tachibana_constants(load_spec("bryant_case1.json"))

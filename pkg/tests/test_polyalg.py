import numpy as np
import pytest

from src.errors import AmbiguousSpectrum, ZeroPolynomial
from src.polyalg import (
    MatrixPoly,
    RealPoly,
    characteristic_polynomial,
    elementary_symmetric,
    horner,
    jordan_structure,
    minimal_polynomial,
    real_roots,
    roots,
)


def test_roots_recover_simple_real_roots():
    p = RealPoly.from_roots([3.0, -1.0, 0.5])
    found = sorted(z.real for z in roots(p))
    assert np.allclose(found, [-1.0, 0.5, 3.0], atol=1e-12)
    assert all(z.imag == 0.0 for z in roots(p))


def test_roots_keep_conjugate_pairs():
    p = RealPoly([1.0, 0.0, 1.0])
    found = roots(p)
    assert np.allclose(sorted(z.imag for z in found), [-1.0, 1.0])
    assert real_roots(p).size == 0


def test_roots_of_zero_polynomial_raise():
    with pytest.raises(ZeroPolynomial):
        roots(RealPoly([0.0, 0.0]))


def test_trailing_coefficients_are_trimmed():
    p = RealPoly([1.0, 2.0, 1e-15])
    assert p.degree == 1


def test_shift_and_derivative():
    p = RealPoly([1.0, -2.0, 0.0, 4.0])
    shifted = p.shift(0.3)
    for t in (-1.0, 0.2, 2.5):
        assert shifted(t) == pytest.approx(p(t + 0.3), rel=1e-12)
    assert p.derivative().to_list() == [-2.0, 0.0, 12.0]


def test_exact_division():
    p = RealPoly.from_roots([1.0, 2.0, 5.0])
    q = p.exact_div(RealPoly.linear(2.0))
    assert q.max_abs_diff(RealPoly.from_roots([1.0, 5.0])) < 1e-12
    with pytest.raises(ValueError):
        p.exact_div(RealPoly.linear(3.0))


def test_elementary_symmetric_functions():
    q = RealPoly.from_roots([1.0, 2.0])
    assert np.allclose(elementary_symmetric(q), [1.0, 3.0, 2.0])


def test_to_string():
    assert RealPoly([0.0, 0.0, 1.0]).to_string() == "t^2"
    assert RealPoly([-1.0, 1.0]).to_string() == "t - 1"


def test_horner_matches_call():
    coeffs = [0.5, -1.0, 2.0]
    assert horner(coeffs, 1.5) == pytest.approx(RealPoly(coeffs)(1.5))


def test_minimal_and_characteristic_polynomial_of_diagonal():
    A = np.diag([1.0, 1.0, 2.0])
    assert minimal_polynomial(A).max_abs_diff(RealPoly.from_roots([1.0, 2.0])) < 1e-10
    assert characteristic_polynomial(A).max_abs_diff(RealPoly.from_roots([1.0, 1.0, 2.0])) < 1e-10


def test_jordan_block_is_detected():
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 3.0]])
    spectrum = jordan_structure(A)
    assert [(round(lam.real, 8), mult, block) for lam, mult, block in spectrum] == [(0.0, 2, 2), (3.0, 1, 1)]
    assert minimal_polynomial(A).max_abs_diff(RealPoly.from_roots([0.0, 0.0, 3.0])) < 1e-10


def test_close_clusters_are_ambiguous():
    with pytest.raises(AmbiguousSpectrum):
        jordan_structure(np.diag([0.0, 5e-4]), tol=1e-8)


def test_matrix_poly_scale_and_evaluate():
    M = MatrixPoly([np.eye(2), 2 * np.eye(2)])
    scaled = M.scale_by(RealPoly([1.0, 1.0]))
    t = 0.7
    assert np.allclose(scaled(t), (1 + 2 * t) * (1 + t) * np.eye(2))

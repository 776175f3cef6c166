import numpy as np
import pytest

import src.jets as jets
from src.errors import DomainError
from src.jets import Jet2, deriv_r, finite_difference_hessian, hessian


def _field(x):
    # works on floats and on jets
    s = 1 + (x * x).sum(0)
    return jets.exp(x[0]) * jets.sin(x[1]) + x[0] * x[0] * x[2] / s + jets.log(s) * jets.tanh(x[1])


def test_hessian_matches_finite_differences():
    point = np.array([0.3, -0.7, 1.1])
    value, grad, hess = hessian(_field, point)
    fd_grad, fd_hess = finite_difference_hessian(lambda p: float(_field(p)), point)
    assert value == pytest.approx(float(_field(point)))
    assert np.allclose(grad, fd_grad, atol=1e-7)
    assert np.allclose(hess, fd_hess, atol=1e-5)
    assert np.allclose(hess, hess.T, atol=1e-14)


def test_deriv_r_of_polynomial():
    jet = deriv_r(lambda r: r**3 - 2 * r, 2.0)
    assert (jet.value, jet.d1, jet.d2) == pytest.approx((4.0, 10.0, 12.0))


def test_reciprocal_second_derivative():
    jet = deriv_r(lambda r: 1 / r, 0.5)
    assert jet.d2 == pytest.approx(2 / 0.5**3)


def test_arctan_derivatives():
    jet = deriv_r(lambda r: jets.arctan(r), 0.5)
    assert (jet.value, jet.d1, jet.d2) == pytest.approx((np.arctan(0.5), 0.8, -0.64))


def test_matrix_valued_jets_differentiate_entrywise():
    x = Jet2.variables([0.2, -0.4])
    M = jets.stack([jets.stack([x[0] * x[1], x[0]]), jets.stack([x[1], x[0] * x[0]])])
    assert M.shape == (2, 2)
    assert np.allclose(M.hess[0, 0], [[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(M.hess[1, 1], [[2.0, 0.0], [0.0, 0.0]])
    assert np.allclose(M.grad[0, 1], [1.0, 0.0])


def test_concat_lifts_constants():
    x = Jet2.variables([1.0, 2.0])
    v = jets.concat([0.5, x])
    assert v.shape == (3,)
    assert np.allclose(v.grad[0], 0.0)
    assert np.allclose(v.grad[1:], np.eye(2))


def test_domain_errors():
    x = Jet2.variables([-1.0])[0]
    with pytest.raises(DomainError):
        jets.sqrt(x)
    with pytest.raises(DomainError):
        jets.log(x)
    with pytest.raises(DomainError):
        jets.sqrt(-2.0)
    with pytest.raises(DomainError):
        Jet2.variables([0.0])[0].reciprocal()

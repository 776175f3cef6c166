import numpy as np
import pytest

from src.bochner import (
    Sym11,
    adjoint_ck,
    bochner_ratio,
    curvature_inner,
    decompose,
    holomorphic_sectional,
    orthonormal_frame,
    random_kahler_curvature,
    random_sym11,
    ricci_contract,
    standard_J,
    sym_inner,
    symmetry_residuals,
    theta_eigenvalues,
    theta_op,
    theta_pairing_residual,
)
from src.errors import NotInvariant, NotPositiveDefinite


def _random_metric(n: int, rng: np.random.Generator) -> np.ndarray:
    # hermitian metric: J-invariant and positive definite
    J = standard_J(n // 2)
    M = rng.normal(size=(n, n))
    g = M @ M.T + n * np.eye(n)
    return 0.5 * (g + J.T @ g @ J)


@pytest.mark.parametrize("dimC", [2, 3])
def test_adjoint_of_ricci_contraction(dimC):
    rng = np.random.default_rng(dimC)
    for _ in range(50):
        R = random_kahler_curvature(dimC, rng)
        S = random_sym11(R.g, R.J, rng)
        lhs = curvature_inner(adjoint_ck(S), R)
        rhs = sym_inner(S, ricci_contract(R))
        assert abs(lhs - rhs) <= 1e-8 * max(abs(lhs), abs(rhs))


def test_adjoint_of_metric_is_constant_holomorphic_curvature():
    n = 3
    g = np.eye(2 * n)
    J = standard_J(n)
    R = adjoint_ck(Sym11(g.copy(), g, J))
    # half the Fubini-Study tensor: Ric = (n + 1) g
    assert np.allclose(ricci_contract(R).components, (n + 1) * g, atol=1e-12)
    rng = np.random.default_rng(5)
    for _ in range(10):
        X = rng.normal(size=2 * n)
        assert holomorphic_sectional(R, X) == pytest.approx(2.0, rel=1e-10)


def test_random_kahler_curvature_symmetries():
    R = random_kahler_curvature(3, np.random.default_rng(4))
    assert max(symmetry_residuals(R).values()) < 1e-12


def test_decomposition_leaves_trace_free_bochner_part():
    rng = np.random.default_rng(8)
    R = random_kahler_curvature(3, rng)
    S, W = decompose(R)
    assert np.max(np.abs(ricci_contract(W).components)) < 1e-10 * np.max(np.abs(R.components))
    assert np.allclose((adjoint_ck(S) + W).components, R.components, atol=1e-10)


def test_pure_ricci_part_is_bochner_flat():
    rng = np.random.default_rng(12)
    g = np.eye(6)
    S = random_sym11(g, standard_J(3), rng)
    W, Rn = bochner_ratio(adjoint_ck(S))
    assert W < 1e-10 * Rn


def test_contractions_with_non_standard_metric():
    rng = np.random.default_rng(21)
    g = _random_metric(4, rng)
    J = standard_J(2)
    S1 = random_sym11(g, J, rng)
    S2 = random_sym11(g, J, rng)
    R = adjoint_ck(S2)
    assert max(symmetry_residuals(R).values()) < 1e-10
    lhs = curvature_inner(adjoint_ck(S1), R)
    rhs = sym_inner(S1, ricci_contract(R))
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_theta_of_constant_holomorphic_curvature_is_scalar():
    n = 2
    g = np.eye(2 * n)
    J = standard_J(n)
    theta = theta_op(adjoint_ck(Sym11(g.copy(), g, J)), n)
    vals = theta_eigenvalues(theta)
    assert vals.size == n
    assert np.allclose(vals, vals[0], atol=1e-12)
    assert theta_pairing_residual(theta) < 1e-12


def test_adjoint_needs_invariant_forms():
    g = np.eye(4)
    S = np.zeros((4, 4))
    S[0, 0] = 1.0
    with pytest.raises(NotInvariant):
        adjoint_ck(Sym11(S, g, standard_J(2)))


def test_frame_needs_positive_metric():
    with pytest.raises(NotPositiveDefinite):
        orthonormal_frame(np.diag([1.0, -1.0]))

import numpy as np
import pytest

from snt.constructions import (
    NmfPair,
    bipartite_factor,
    direct_sum,
    edm_factor,
    edm_factor_any,
    edm_matrix,
    power_factor,
    principal_subfactor,
    rank2_factor,
    separable_columns,
    separable_factor,
    sum_factor,
    symmetrization_factor,
)
from snt.errors import InvariantError, NotSeparableError, RankError, ShapeError
from snt.matcore import Trifactor, verify_trifactorization


def rand_factor(rng, n, k):
    C = rng.uniform(size=(k, k))
    return Trifactor(rng.uniform(size=(n, k)), C + C.T)


def test_direct_sum_and_sum():
    rng = np.random.default_rng(0)
    F1, F2 = rand_factor(rng, 3, 2), rand_factor(rng, 4, 3)
    D = direct_sum(F1, F2)
    expected = np.zeros((7, 7))
    expected[:3, :3] = F1.product()
    expected[3:, 3:] = F2.product()
    assert D.k == 5 and np.allclose(D.product(), expected)
    G = rand_factor(rng, 3, 3)
    S = sum_factor(F1, G)
    assert S.k == 5 and np.allclose(S.product(), F1.product() + G.product())
    with pytest.raises(ShapeError):
        sum_factor(F1, F2)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_power_factor(m):
    rng = np.random.default_rng(m)
    F = rand_factor(rng, 5, 3)
    A = F.product()
    P = power_factor(F, m)
    expected = np.linalg.matrix_power(A, m)
    assert P.k == 3
    assert np.abs(P.product() - expected).max() <= 1e-10 * np.abs(expected).max()


def test_power_factor_rejects_zero():
    with pytest.raises(InvariantError):
        power_factor(Trifactor(np.eye(2), np.eye(2)), 0)


def test_principal_subfactor():
    rng = np.random.default_rng(1)
    F = rand_factor(rng, 6, 3)
    rows = [0, 2, 5]
    assert np.allclose(principal_subfactor(F, rows).product(), F.product()[np.ix_(rows, rows)])
    with pytest.raises(InvariantError):
        principal_subfactor(F, [6])


def test_bipartite_and_symmetrization():
    rng = np.random.default_rng(2)
    U, V = rng.uniform(size=(4, 2)), rng.uniform(size=(3, 2))
    pair = NmfPair(U, V)
    F = bipartite_factor(pair)
    expected = np.block([[np.zeros((4, 4)), U @ V.T], [V @ U.T, np.zeros((3, 3))]])
    assert F.k == 4 and np.allclose(F.product(), expected)
    V2 = rng.uniform(size=(4, 2))
    F = symmetrization_factor(NmfPair(U, V2))
    assert np.allclose(F.product(), U @ V2.T + V2 @ U.T)
    with pytest.raises(ShapeError):
        symmetrization_factor(pair)
    with pytest.raises(InvariantError):
        NmfPair(-U, V)


def test_separable_factor():
    rng = np.random.default_rng(3)
    for _ in range(10):
        core = rng.uniform(size=(3, 3))
        core = core + core.T
        Q = np.vstack([np.eye(3), rng.uniform(size=(3, 3))])
        A = Q @ core @ Q.T
        F = separable_factor(A, [0, 1, 2])
        assert verify_trifactorization(A, F, tol=1e-8).valid
        cols = separable_columns(A)
        assert verify_trifactorization(A, separable_factor(A, cols), tol=1e-8).valid


def test_separable_failure_reports_worst_column():
    A = np.eye(3)
    with pytest.raises(NotSeparableError) as info:
        separable_factor(A, [0, 1])
    assert info.value.worst_column == 2


def test_rank2_random_draws():
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        U = rng.uniform(size=(n, 2))
        A = U @ U.T if rng.random() < 0.5 else U @ np.array([[0, 1], [1, 0]]) @ U.T
        F = rank2_factor(A)
        assert F.k == 2
        assert np.linalg.norm(F.product() - A) < 1e-9 * np.linalg.norm(A)


def test_rank2_rejects_other_ranks():
    with pytest.raises(RankError):
        rank2_factor(np.eye(3))
    with pytest.raises(RankError):
        rank2_factor(np.ones((3, 3)))


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_edm_factor_exact(n):
    M, F = edm_factor(n)
    assert F.k == n // 2 + 2
    B = F.B.astype(np.int64)
    C = F.C.astype(np.int64)
    assert np.array_equal(B @ C @ B.T, edm_matrix(n))
    assert verify_trifactorization(M, F).max_residual < 1e-12


def test_edm_frozen_small_case():
    _, F = edm_factor(4)
    assert F.B.tolist() == [[3, 0, 1, 0], [1, 0, 0, 1], [0, 1, 0, 1], [0, 3, 1, 0]]
    assert F.C.tolist() == [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]


@pytest.mark.parametrize("n", [3, 5, 7])
def test_edm_odd(n):
    M, F = edm_factor_any(n)
    assert F.k == (n + 1) // 2 + 2
    assert verify_trifactorization(M, F).max_residual == 0.0


def test_edm_rejects_odd():
    with pytest.raises(InvariantError):
        edm_factor(5)

import numpy as np
import pytest
import sympy

from snt.errors import InvariantError, ReducibleError, ShapeError
from snt.matcore import (
    SpectralData,
    SymMatrix,
    Trifactor,
    apply_scaling,
    identity_factor,
    inertia,
    is_irreducible,
    numerical_rank,
    perron,
    spectral_split,
    support_pattern,
    verify_trifactorization,
)

EX23_A = np.array([[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]], dtype=float)
EX23_B = np.array([[4, 2, 2, 0], [2, 3, 1, 2], [2, 1, 3, 2], [0, 2, 2, 4]], dtype=float)
R2 = np.sqrt(2)
EX23_W = np.array([[2, 0, 0], [1, R2, 0], [1, 0, R2], [0, R2, R2]])
EX41 = np.array([[0, 2, 1, 1], [2, 0, 1, 1], [1, 1, 0, 2], [1, 1, 2, 0]], dtype=float)
M4 = np.array([[0, 1, 4, 9], [1, 0, 1, 4], [4, 1, 0, 1], [9, 4, 1, 0]], dtype=float)


def random_factor(rng, n, k):
    B = rng.uniform(size=(n, k))
    C = rng.uniform(size=(k, k))
    return Trifactor(B, C + C.T)


class TestSymMatrix:
    def test_clamps_dust(self):
        a = SymMatrix([[1.0, -1e-12], [-1e-12, 2.0]])
        assert a.entries[0, 1] == 0.0

    def test_rejects_negative(self):
        with pytest.raises(InvariantError):
            SymMatrix([[1.0, -1e-3], [-1e-3, 1.0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(InvariantError):
            SymMatrix([[1.0, 2.0], [1.0, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            SymMatrix(np.ones((2, 3)))

    def test_read_only(self):
        a = SymMatrix(np.eye(2))
        with pytest.raises(ValueError):
            a.entries[0, 0] = 5.0


class TestTrifactor:
    def test_shapes(self):
        with pytest.raises(ShapeError):
            Trifactor(np.ones((3, 2)), np.eye(3))

    def test_negative_c(self):
        with pytest.raises(InvariantError):
            Trifactor(np.ones((3, 2)), [[1, -1], [-1, 1]])

    def test_asymmetric_c(self):
        with pytest.raises(InvariantError):
            Trifactor(np.ones((3, 2)), [[1, 2], [0, 1]])


def test_verify_example_factorization():
    rep = verify_trifactorization(EX23_B, Trifactor(EX23_W, np.eye(3)))
    assert rep.valid and rep.max_residual < 1e-12


def test_verify_flags_raw_negative_pair():
    rep = verify_trifactorization(np.eye(2), (np.eye(2), [[1, 0], [0, 1]]))
    assert rep.valid
    rep = verify_trifactorization(np.eye(2), (np.eye(2), [[1, -0.5], [-0.5, 1]]))
    assert not rep.valid and not rep.nonneg_ok


def test_verify_shape_error():
    with pytest.raises(ShapeError):
        verify_trifactorization(np.eye(3), Trifactor(np.eye(2), np.eye(2)))


@pytest.mark.parametrize(
    "a, r",
    [(EX23_A, 3), (EX23_B, 3), (EX41, 3), (np.eye(4), 4), (np.ones((3, 3)), 1), (np.zeros((2, 2)), 0)],
)
def test_numerical_rank(a, r):
    assert numerical_rank(a) == r


def test_numerical_rank_tolerance_override():
    a = np.diag([1.0, 1e-8])
    assert numerical_rank(a) == 2
    assert numerical_rank(a, tol=1e-6) == 1


def _sympy_inertia(a):
    x = sympy.symbols("x")
    poly = sympy.Matrix(a.astype(int).tolist()).charpoly(x)
    roots = sympy.Poly(poly.as_expr(), x).all_roots()
    pos = sum(1 for r in roots if r > 0)
    neg = sum(1 for r in roots if r < 0)
    return pos, neg, len(roots) - pos - neg


def test_inertia_m4_against_exact_oracle():
    assert tuple(inertia(M4)) == _sympy_inertia(M4) == (1, 2, 1)


def test_inertia_of_signed_matrix():
    assert tuple(inertia(np.array([[0.0, 1.0], [1.0, 0.0]]))) == (1, 1, 0)
    assert tuple(inertia(np.diag([-1.0, 2.0, 0.0]))) == (1, 1, 1)


def test_congruence_inertia_inequalities():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = rng.integers(2, 6)
        n = rng.integers(k, 8)
        C = rng.standard_normal((k, k))
        C = C + C.T
        B = rng.standard_normal((n, k))
        pc, mc, _ = inertia(C)
        pa, ma, _ = inertia(B @ C @ B.T)
        assert pa <= pc and ma <= mc


def test_support_pattern():
    a = np.array([[1.0, 1e-14], [1e-14, 0.0]])
    assert support_pattern(a).tolist() == [[True, False], [False, False]]
    assert not support_pattern(np.zeros((3, 3))).any()
    assert (support_pattern(EX23_A) == (EX23_A > 0)).all()


@pytest.mark.parametrize(
    "a, expected", [(EX41, True), (np.eye(2), False), (np.array([[0.0, 1.0], [1.0, 0.0]]), True), ([[5.0]], True)]
)
def test_irreducible(a, expected):
    assert is_irreducible(a) is expected


def test_perron():
    lam, u = perron(EX41)
    assert lam == pytest.approx(4.0, abs=1e-12)
    assert np.allclose(u, 0.5, atol=1e-12)
    with pytest.raises(ReducibleError):
        perron(np.eye(2))


def test_spectral_split_reconstruction():
    rng = np.random.default_rng(3)
    for _ in range(20):
        F = random_factor(rng, 6, 3)
        A = F.product()
        sd = spectral_split(A)
        assert sd.r == 3
        assert sd.u.min() > 0
        assert np.linalg.norm(sd.reconstruct() - A) < sd.r * 1e-8 * np.linalg.norm(A)


def test_spectral_data_from_basis():
    E = np.array([[0, -1], [0, 1], [-1, 0], [1, 0]]) / np.sqrt(2)
    sd = SpectralData.from_basis(EX41, np.full(4, 0.5), E)
    assert sd.lambda1 == pytest.approx(4.0)
    assert np.allclose(sd.D1, [-2, -2])
    with pytest.raises(InvariantError):
        SpectralData.from_basis(EX41, np.full(4, 0.5), E * 2)


def test_apply_scaling_preserves_product():
    rng = np.random.default_rng(11)
    for _ in range(100):
        k = rng.integers(1, 6)
        F = random_factor(rng, rng.integers(1, 8), k)
        G = apply_scaling(F, rng.permutation(k), rng.uniform(0.1, 10.0, k))
        scale = max(1.0, np.abs(F.product()).max())
        assert np.abs(G.product() - F.product()).max() <= 1e-12 * scale
        assert G.k == F.k


def test_apply_scaling_examples():
    F = Trifactor(EX23_W, np.eye(3))
    assert np.array_equal(apply_scaling(F, [0, 1, 2], np.ones(3)).B, F.B)
    G = apply_scaling(F, [1, 0, 2], np.ones(3))
    assert verify_trifactorization(EX23_B, G).valid
    G = apply_scaling(F, [0, 1, 2], [2.0, 1.0, 1.0])
    assert np.abs(G.product() - EX23_B).max() < 1e-12
    with pytest.raises(InvariantError):
        apply_scaling(F, [0, 1, 2], [1.0, 0.0, 1.0])
    with pytest.raises(InvariantError):
        apply_scaling(F, [0, 0, 2], np.ones(3))


def test_rank_at_most_k():
    rng = np.random.default_rng(5)
    for _ in range(30):
        k = rng.integers(1, 5)
        F = random_factor(rng, 7, k)
        assert numerical_rank(F.product()) <= k


def test_identity_factor():
    F = identity_factor(EX41)
    assert verify_trifactorization(EX41, F).valid and F.k == 4

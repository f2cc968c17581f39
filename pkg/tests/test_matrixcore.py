import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscgate.errors import ContractViolation, InvalidInputError, RankDeficiencyError
from oscgate.matrixcore import (
    expm_hermitian,
    fractional_power,
    hermitian_generator,
    kron,
    matrix_norms,
    nearest_unitary,
    realignment_residual,
    spectral_decomposition,
    unitarity_defect,
)
from strategies import dims, random_hermitian, random_unitary, seeds


@given(seeds, dims)
def test_norm_ordering(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    frob, spec = matrix_norms(A)
    assert spec <= frob * (1 + 1e-12)
    assert frob <= np.sqrt(d) * spec * (1 + 1e-12)
    assert np.isclose(frob, np.linalg.norm(A))
    assert np.isclose(spec, np.linalg.norm(A, 2))


def test_norms_of_identity():
    assert matrix_norms(np.eye(4)) == pytest.approx((2.0, 1.0))


@given(seeds, dims)
def test_nearest_unitary_is_polar_factor(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    U = nearest_unitary(A)
    assert unitarity_defect(U) < 1e-10
    P = U.conj().T @ A
    assert np.allclose(P, P.conj().T, atol=1e-9)
    assert np.linalg.eigvalsh(0.5 * (P + P.conj().T)).min() > -1e-9
    # no random unitary does better
    for _ in range(3):
        V = random_unitary(rng, d)
        assert np.linalg.norm(A - U) <= np.linalg.norm(A - V) + 1e-9


@given(seeds, dims)
def test_nearest_unitary_fixes_unitaries(seed, d):
    U = random_unitary(np.random.default_rng(seed), d)
    assert np.allclose(nearest_unitary(U), U, atol=1e-10)


def test_nearest_unitary_rejects_singular():
    with pytest.raises(RankDeficiencyError) as info:
        nearest_unitary(np.diag([1.0, 0.0]))
    assert info.value.smallest_singular_value == pytest.approx(0.0)


@given(seeds, dims)
def test_spectral_decomposition_reconstructs(seed, d):
    U = random_unitary(np.random.default_rng(seed), d)
    sd = spectral_decomposition(U)
    assert np.allclose(sd.reconstruct(), U, atol=1e-10)
    assert np.allclose(sum(sd.projectors), np.eye(d), atol=1e-10)


def test_spectral_decomposition_groups_degenerate():
    sd = spectral_decomposition(np.diag([1, 1, -1, 1j]))
    assert len(sd.eigenvalues) == 3
    ranks = sorted(int(round(np.trace(P).real)) for P in sd.projectors)
    assert ranks == [1, 1, 2]


def test_spectral_decomposition_rejects_non_normal():
    with pytest.raises(ContractViolation):
        spectral_decomposition(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds, dims)
def test_generator_inverts_exponential(seed, d):
    rng = np.random.default_rng(seed)
    U = random_unitary(rng, d)
    H = hermitian_generator(U)
    assert np.allclose(H, H.conj().T, atol=1e-12)
    assert np.allclose(expm_hermitian(H), U, atol=1e-9)
    assert np.linalg.eigvalsh(H).max() <= np.pi + 1e-9


def test_generator_branch_cut_is_deterministic():
    # eigenvalue -1 gets phase +pi, i.e. generator eigenvalue -pi
    H = hermitian_generator(np.diag([1.0, -1.0]))
    assert np.allclose(H, np.diag([0.0, -np.pi]))
    Z = np.diag([1.0, -1.0]) * np.exp(1e-12j)
    assert np.allclose(hermitian_generator(Z), np.diag([0.0, -np.pi]), atol=1e-9)


@given(seeds, dims, st.integers(min_value=1, max_value=60))
@settings(max_examples=40)
def test_fractional_power_roundtrip(seed, d, k):
    U = random_unitary(np.random.default_rng(seed), d)
    R = fractional_power(U, k)
    assert unitarity_defect(R) < 1e-10
    assert np.allclose(np.linalg.matrix_power(R, k), U, atol=1e-8)


def test_fractional_power_validates():
    with pytest.raises(InvalidInputError):
        fractional_power(np.eye(2), 0)
    with pytest.raises(ContractViolation):
        fractional_power(np.ones((2, 2)), 2)


def test_kron_ordering():
    A = np.array([[1, 2], [3, 4]])
    B = np.array([[0, 1], [1, 0]])
    K = kron(A, B)
    assert K[2 * 1 + 0, 2 * 0 + 1] == A[1, 0] * B[0, 1]
    assert kron(A).shape == (2, 2)
    with pytest.raises(InvalidInputError):
        kron()


@given(seeds)
def test_realignment_detects_products(seed):
    rng = np.random.default_rng(seed)
    A, B = random_unitary(rng, 2), random_unitary(rng, 3)
    assert realignment_residual(kron(A, B), (2, 3)) < 1e-10
    cnot = np.eye(4)[[0, 1, 3, 2]]
    assert realignment_residual(cnot, (2, 2)) > 0.5


def test_expm_of_zero_is_identity():
    assert np.allclose(expm_hermitian(np.zeros((3, 3))), np.eye(3))


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        matrix_norms(np.ones((2, 3)))
    with pytest.raises(InvalidInputError):
        matrix_norms(np.array([[np.nan]]))

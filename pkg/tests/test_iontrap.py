import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscgate.errors import ContractViolation, InvalidInputError, ShapeError
from oscgate.iontrap import (
    IonTrapBasis,
    coupling_block,
    design_residual_projections,
    iontrap_coupling,
    iontrap_design,
    iontrap_generator,
)
from strategies import random_hermitian, seeds


def test_basis():
    b = IonTrapBasis(3, omega0=2.0, omega0p=0.5)
    assert b.dim == 6
    assert np.allclose(b.energies(), [1.0, 1.5, 2.0, -1.0, -0.5, 0.0])
    assert b.flip_frequency(2) == pytest.approx(3.0)
    assert b.flip_frequency(1, -1) == pytest.approx(-1.5)
    with pytest.raises(InvalidInputError):
        IonTrapBasis(1)


def test_coupling_block_is_one_plus_position_ladders():
    a = coupling_block(4)
    ladder = np.diag(np.sqrt([1, 2, 3]), 1)
    assert np.allclose(a, np.eye(4) + ladder + ladder.T)
    full = iontrap_coupling(IonTrapBasis(4)).full
    assert np.allclose(full, full.conj().T)
    assert np.allclose(full[:4, :4], 0) and np.allclose(full[:4, 4:], 0.5 * a)


@given(seeds, st.integers(min_value=2, max_value=8))
@settings(max_examples=30)
def test_design_is_per_diagonal_least_squares(seed, N):
    rng = np.random.default_rng(seed)
    basis = IonTrapBasis(N)
    C = random_hermitian(rng, N)
    design = iontrap_design(C, basis)
    assert set(design) == set(range(-(N - 1), N))
    a = coupling_block(N)
    for k, omega in design.items():
        v = 0.5 * np.diagonal(a, -k)
        c = np.diagonal(C, -k)
        if not np.any(v):
            assert omega == 0
            continue
        ref = np.linalg.lstsq(v[:, None].astype(complex), c, rcond=None)[0][0]
        assert omega == pytest.approx(ref, abs=1e-12)
    assert max(design_residual_projections(C, design, basis).values()) < 1e-12


def test_coupled_diagonals_only():
    # I + a + a^dag reaches only |k| <= 1
    design = iontrap_design(random_hermitian(np.random.default_rng(0), 5), IonTrapBasis(5))
    assert all(design[k] == 0 for k in design if abs(k) > 1)


def test_generator_hermitian_and_reproduces_reachable_part():
    N = 4
    basis = IonTrapBasis(N)
    a = coupling_block(N)
    omega = {-1: 0.3 - 0.2j, 0: 1.1 + 0.4j, 1: -0.7j}
    C = np.zeros((N, N), dtype=complex)
    for k, w in omega.items():
        for m in range(N):
            if 0 <= m + k < N:
                C[m + k, m] = 0.5 * a[m + k, m] * w
    G = iontrap_generator(omega, basis)
    assert np.allclose(G, G.conj().T)
    assert np.allclose(G[:N, N:], C)
    assert np.allclose(G[:N, :N], 0) and np.allclose(G[N:, N:], 0)


def test_generator_negative_map_check():
    basis = IonTrapBasis(3)
    pos = {0: 1 + 1j, 1: 0.5}
    G = iontrap_generator(pos, basis, negative={0: 1 - 1j, 1: 0.5})
    assert np.allclose(G, iontrap_generator(pos, basis))
    with pytest.raises(ContractViolation):
        iontrap_generator(pos, basis, negative={0: 1 + 1j})
    with pytest.raises(InvalidInputError):
        iontrap_generator(pos, basis, T=0.0)


def test_design_validation():
    basis = IonTrapBasis(3)
    with pytest.raises(ShapeError):
        iontrap_design(np.eye(4), basis)
    with pytest.raises(ContractViolation):
        iontrap_design(np.triu(np.ones((3, 3))), basis)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscgate.errors import ConstraintInfeasibleError, CoverageError, DegenerateTargetError, InvalidInputError, ShapeError
from oscgate.genmatch import (
    FourierDesign,
    GeneratorPair,
    anharmonic_generator,
    controllability_rank,
    design_energy,
    diagonal_sums,
    fourier_design,
    nser,
    realized_generator,
    stationarity_residuals,
    two_oscillator_interaction,
)
from oscgate.oscillator import TruncationSpec, q_power_matrix
from strategies import random_hermitian, seeds


def anharmonic_pair(N, mu=0.5, T=1.0, power=3):
    spec = TruncationSpec(N)
    return GeneratorPair(anharmonic_generator(spec, mu, T), q_power_matrix(spec, power))


def test_pair_validation():
    with pytest.raises(ShapeError):
        GeneratorPair(np.eye(3), np.eye(2))


def test_design_energy_and_negative_harmonics():
    d = FourierDesign(np.array([1.0, 2 + 1j, 0.5j]), lam=0.0, energy=0.0)
    assert design_energy(d.phi_hat) == pytest.approx(1 + 2 * 5 + 2 * 0.25)
    assert d[-1] == np.conj(d[1]) and d[5] == 0
    assert set(d.harmonics()) == {-2, -1, 0, 1, 2}
    with pytest.raises(InvalidInputError):
        FourierDesign(np.array([1j]), 0.0, 0.0)


@given(seeds, st.integers(min_value=3, max_value=10), st.floats(min_value=1e-3, max_value=10.0))
@settings(max_examples=40, deadline=None)
def test_budget_design_properties(seed, N, energy):
    rng = np.random.default_rng(seed)
    pair = GeneratorPair(random_hermitian(rng, N), random_hermitian(rng, N))
    d = fourier_design(pair, energy)
    assert d.energy <= energy * (1 + 1e-8)
    scale = max(1.0, float(np.abs(d.A).max()), float(np.abs(d.B).max()))
    assert stationarity_residuals(pair, d).max() < 1e-9 * scale * max(1.0, abs(d.lam))
    if d.active:
        assert d.energy == pytest.approx(energy, rel=1e-8)
        assert d.lam < 0
    else:
        assert d.lam == 0.0
    # any other design of no larger energy matches no better
    best = nser(pair, d)
    for _ in range(20):
        p = rng.standard_normal(d.K + 1) + 1j * rng.standard_normal(d.K + 1)
        p[0] = p[0].real
        p *= np.sqrt(energy / design_energy(p))
        assert nser(pair, FourierDesign(p, 0.0, energy)) >= best - 1e-10


def test_nser_monotone_in_budget():
    pair = anharmonic_pair(8)
    vals = [nser(pair, fourier_design(pair, e)) for e in (0.01, 0.05, 0.5, 5.0, 1e3)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_equality_mode_spends_budget():
    pair = anharmonic_pair(6)
    free = fourier_design(pair, 1e6)
    assert not free.active
    big = 2 * free.energy
    d = fourier_design(pair, big, mode="equality")
    assert d.energy == pytest.approx(big, rel=1e-8)
    assert d.lam > 0
    with pytest.raises(InvalidInputError):
        fourier_design(pair, 1.0, mode="maybe")


def test_equality_mode_unreachable_budget():
    # one live harmonic only: energy above the pole value cannot be reached on the branch
    V = np.zeros((3, 3))
    V[0, 0] = 1.0
    pair = GeneratorPair(np.diag([1.0, 0, 0]), V)
    with pytest.raises(ConstraintInfeasibleError):
        fourier_design(pair, 1e30, mode="equality")


def test_degenerate_target():
    spec = TruncationSpec(4)
    # q couples only neighbouring levels; a diagonal-free, odd-gap-free target has no overlap
    H = np.zeros((4, 4))
    H[2, 0] = H[0, 2] = 1.0
    with pytest.raises(DegenerateTargetError):
        fourier_design(GeneratorPair(H, q_power_matrix(spec, 1)), 1.0)


def test_validation():
    pair = anharmonic_pair(4)
    with pytest.raises(InvalidInputError):
        fourier_design(pair, 0.0)
    with pytest.raises(InvalidInputError):
        fourier_design(pair, 1.0, K=4)


def test_diagonal_sums_by_hand():
    H = np.array([[1.0, 2.0], [2.0, 3.0]])
    V = np.array([[1.0, 1.0], [1.0, -1.0]])
    A, B = diagonal_sums(GeneratorPair(H, V), 1)
    assert np.allclose(A, [1 - 3, 2])
    assert np.allclose(B, [2, 1])


def test_realized_generator_and_coverage():
    pair = anharmonic_pair(6)
    d = fourier_design(pair, 1e6)
    Hphi = realized_generator(d, pair)
    assert np.allclose(Hphi, Hphi.conj().T)
    # full-range harmonics reproduce H_g wherever V can reach it
    mask = pair.V != 0
    resid = np.abs(pair.H_g - Hphi)[mask]
    assert nser(pair, d) == pytest.approx(np.sum(np.abs(pair.H_g - Hphi) ** 2) / np.sum(np.abs(pair.H_g) ** 2))
    assert resid.size > 0
    short = fourier_design(pair, 1e6, K=1)
    with pytest.raises(CoverageError) as info:
        realized_generator(short, pair)
    assert all(abs(m - n) > 1 for m, n in info.value.missing)


def test_nser_with_cubic_coupling_decreases_with_truncation():
    vals = [nser(p, fourier_design(p, 0.05)) for p in (anharmonic_pair(N) for N in (8, 16, 32, 64))]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_two_oscillator_interaction():
    s1, s2 = TruncationSpec(3), TruncationSpec(4)
    V = two_oscillator_interaction(s1, s2)
    a1 = np.diag(np.sqrt(np.arange(1, 10)), 1)
    a2 = np.diag(np.sqrt(np.arange(1, 10)), 1)
    Q1 = (a1 + a1.T) / np.sqrt(2)
    Q2 = (a2 + a2.T) / np.sqrt(2)
    big = np.linalg.matrix_power(np.kron(Q1, np.eye(10)) - np.kron(np.eye(10), Q2), 3)
    idx = [10 * i + j for i in range(3) for j in range(4)]
    assert np.allclose(V, big[np.ix_(idx, idx)], atol=1e-12)
    with pytest.raises(InvalidInputError):
        two_oscillator_interaction(TruncationSpec(1), s2)


@given(seeds)
@settings(max_examples=30)
def test_controllability_generic(seed):
    rng = np.random.default_rng(seed)
    d = 5
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    assert controllability_rank(random_hermitian(rng, d), random_hermitian(rng, d), psi) == (d, True)


def test_controllability_degenerate():
    d = 4
    psi = np.ones(d)
    assert controllability_rank(np.diag([1.0, 2, 3, 4]), np.zeros((d, d)), psi) == (0, False)
    assert controllability_rank(np.eye(d), np.diag([1.0, 2, 3, 4]), psi) == (1, False)
    with pytest.raises(InvalidInputError):
        controllability_rank(np.eye(d), np.eye(d), np.zeros(d))
    with pytest.raises(ShapeError):
        controllability_rank(np.eye(3), np.eye(d), psi)

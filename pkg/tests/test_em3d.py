import numpy as np
import pytest
from hypothesis import given, settings

from oscgate.em3d import (
    B_SLOTS,
    E_SLOTS,
    EMField,
    default_constraint,
    em_dyson_gate,
    em_dyson_terms,
    em_error_terms,
    em_kernels,
    em_operators,
    em_optimal_field,
    em_oracle_gate,
    observable_average,
    target_residual,
)
from oscgate.errors import ContractViolation, InvalidInputError, ShapeError
from oscgate.gatelib import GateTarget
from oscgate.matrixcore import expm_hermitian
from oscgate.oracle import convergence_order
from oscgate.oscillator import TruncationSpec, energy_spectrum
from strategies import random_hermitian, seeds

SPEC = TruncationSpec(2, 3)
SPEC3 = TruncationSpec(3, 3)


def random_field(rng, M=6, T=1.0):
    return EMField(T, rng.standard_normal((M, 6)))


def near_free_target(rng, spec, T=1.0, s=0.02):
    E = energy_spectrum(spec).energies
    return GateTarget(np.exp(-1j * E * T)[:, None] * expm_hermitian(random_hermitian(rng, spec.dim), s), "t")


def test_field_slots():
    xi = np.arange(12.0).reshape(2, 6)
    f = EMField(1.0, xi)
    assert np.array_equal(f.B, xi[:, [0, 2, 4]])
    assert np.array_equal(f.E, xi[:, [1, 3, 5]])
    assert B_SLOTS == (0, 2, 4) and E_SLOTS == (1, 3, 5)
    assert np.array_equal(f.flat(), np.arange(12.0))
    with pytest.raises(InvalidInputError):
        EMField(1.0, np.zeros((2, 5)))
    with pytest.raises(InvalidInputError):
        EMField(-1.0, np.zeros((2, 6)))


def test_operators_are_hermitian_and_diamagnetic_tensor_symmetric():
    ops = em_operators(SPEC3)
    for G in ops.G:
        assert np.allclose(G, G.conj().T)
    assert np.allclose(ops.D, np.swapaxes(ops.D, 0, 1))
    with pytest.raises(InvalidInputError):
        em_operators(TruncationSpec(3))


def test_zero_field():
    f = EMField.zeros(1.0, 4)
    g = em_dyson_gate(f, SPEC)
    assert np.allclose(g.W, np.eye(SPEC.dim))
    assert observable_average(np.diag(np.arange(8.0)), 5, f, SPEC) == pytest.approx(5.0)


def test_dyson_vs_oracle_orders():
    rng = np.random.default_rng(11)
    f = random_field(rng, M=16)
    k = em_kernels(SPEC3, (1.0, 16))
    eps = [0.2, 0.1, 0.05, 0.025]
    errs = [np.linalg.norm(em_dyson_gate(f, SPEC3, e, k).W - em_oracle_gate(f, SPEC3, e).U) for e in eps]
    assert convergence_order(eps, errs) == pytest.approx(3.0, abs=0.3)


def test_lab_frame_agrees():
    rng = np.random.default_rng(12)
    f = random_field(rng, M=8)
    e = 0.05
    U = em_oracle_gate(f, SPEC, e, steps=8 * 512, frame="lab").U
    assert np.linalg.norm(U - em_dyson_gate(f, SPEC, e).U) < 20 * e ** 3
    with pytest.raises(InvalidInputError):
        em_oracle_gate(f, SPEC, e, frame="other")


def test_contract_g_matches_dense_kernel():
    rng = np.random.default_rng(13)
    M = 3
    k = em_kernels(SPEC, (1.0, M))
    Wd = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    dense = np.zeros((M, 6, M, 6))
    for j in range(M):
        for a in range(6):
            for kk in range(M):
                for b in range(6):
                    w = 1.0 if j > kk else 0.5 if j == kk else 0.0
                    g = w * k.h[j, a] @ k.h[kk, b]
                    if j == kk and a in B_SLOTS and b in B_SLOTS:
                        g = g - 1j / (8 * k.dt) * k.Dt[j, B_SLOTS.index(a), B_SLOTS.index(b)]
                    dense[j, a, kk, b] = np.trace(Wd.conj().T @ g).real
    assert np.allclose(k.contract_g(Wd), dense.reshape(6 * M, 6 * M), atol=1e-12)


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_error_model_exact_through_second_order(seed):
    rng = np.random.default_rng(seed)
    M, e = 6, 0.1
    tg = near_free_target(rng, SPEC)
    k = em_kernels(SPEC, (1.0, M))
    alpha, beta = em_error_terms(tg, SPEC, (1.0, M), e, k)
    assert np.array_equal(beta, beta.T)
    f = EMField(1.0, 0.3 * rng.standard_normal((M, 6)))
    W1, W2 = em_dyson_terms(f, SPEC, k)
    Wd = target_residual(tg, SPEC, 1.0)
    actual = np.sum(np.abs(tg.matrix - em_dyson_gate(f, SPEC, e, k).U) ** 2) - np.sum(np.abs(Wd) ** 2)
    x, dt = f.flat(), k.dt
    pred = dt * alpha.reshape(-1) @ x + dt * dt * x @ beta @ x
    tail = 2 * e ** 3 * np.vdot(W1, W2).real + e ** 4 * np.sum(np.abs(W2) ** 2)
    assert pred == pytest.approx(actual - tail, abs=1e-12)


def test_optimal_field_properties():
    rng = np.random.default_rng(14)
    M, e, eps0 = 8, 0.1, 0.5
    tg = near_free_target(rng, SPEC3)
    alpha, beta = em_error_terms(tg, SPEC3, (1.0, M), e)
    dt = 1.0 / M
    d = em_optimal_field(alpha, beta, dt, eps0)
    assert d.residual < 1e-8
    assert d.constraint_value == pytest.approx(eps0, rel=1e-9)
    Q = default_constraint(M, dt)
    model = lambda x: dt * alpha.reshape(-1) @ x + dt * dt * x @ beta @ x
    best = model(d.xi_opt.flat())
    for _ in range(200):
        x = rng.standard_normal(6 * M)
        x *= np.sqrt(eps0 / (dt * dt * x @ Q @ x))
        assert model(x) >= best - 1e-12


def test_optimal_field_edge_cases():
    M = 2
    alpha = np.ones((M, 6))
    beta = np.eye(6 * M)
    d = em_optimal_field(alpha, beta, 0.5, 0.0)
    assert np.all(d.xi_opt.xi == 0) and d.constraint_value == 0.0
    with pytest.raises(ShapeError):
        em_optimal_field(alpha, np.eye(3), 0.5, 1.0)
    with pytest.raises(ContractViolation):
        em_optimal_field(alpha, beta, 0.5, 1.0, Q=-np.eye(6 * M))
    with pytest.raises(InvalidInputError):
        em_optimal_field(alpha, beta, 0.5, -1.0)


def test_gram_is_psd():
    k = em_kernels(SPEC, (1.0, 5))
    assert np.linalg.eigvalsh(k.gram()).min() > -1e-10


def test_observable_average():
    rng = np.random.default_rng(15)
    f = random_field(rng, M=16)
    X = random_hermitian(rng, SPEC3.dim)
    k = em_kernels(SPEC3, (1.0, 16))
    assert observable_average(np.eye(SPEC3.dim), 3, f, SPEC3, 0.1, k) == pytest.approx(1.0, abs=1e-12)
    eps = [0.2, 0.1, 0.05, 0.025]
    errs = []
    for e in eps:
        W = em_oracle_gate(f, SPEC3, e).U
        exact = (W @ X @ W.conj().T)[3, 3].real
        errs.append(abs(observable_average(X, 3, f, SPEC3, e, k) - exact))
    assert convergence_order(eps, errs) == pytest.approx(3.0, abs=0.3)
    with pytest.raises(ContractViolation):
        observable_average(np.triu(np.ones((27, 27))), 0, f, SPEC3)
    with pytest.raises(InvalidInputError):
        observable_average(X, 27, f, SPEC3)

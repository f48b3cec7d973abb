import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenoguard.errors import DimensionMismatch, NotHermitian, UnknownLabel
from zenoguard.qlinalg import (
    SX,
    SZ,
    QuantumState,
    SubsystemLayout,
    apply_operator,
    eig_hermitian,
    embed,
    fidelity,
    kron,
    partial_trace,
    propagator,
    tensor,
)

from conftest import random_hermitian, random_ket, random_unitary

seeds = st.integers(0, 2**32 - 1)


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_sigma_z_identity():
    assert np.array_equal(kron(SZ, np.eye(2)), np.diag([1, 1, -1, -1]).astype(complex))


def test_kron_rectangular_shape():
    assert kron(np.ones((2, 3)), np.ones((4, 5))).shape == (8, 15)


def _manual_product_vector(x, y):
    out = np.zeros(len(x) * len(y), dtype=complex)
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            out[i * len(y) + j] = xi * yj
    return out


@given(seeds)
def test_kron_acts_factorwise(seed):
    rng = np.random.default_rng(seed)
    a, b = random_hermitian(rng, 2) + 1j, random_unitary(rng, 2)
    x, y = random_ket(rng, 2), random_ket(rng, 2)
    lhs = kron(a, b) @ _manual_product_vector(x, y)
    rhs = _manual_product_vector(a @ x, b @ y)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@given(seeds)
def test_kron_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3)) for _ in range(3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) < 1e-12


def test_eig_sigma_z():
    w, v = eig_hermitian(SZ)
    assert np.allclose(w, [-1, 1], atol=1e-12)
    assert np.allclose(np.abs(v.conj().T @ v), np.eye(2), atol=1e-12)


def test_eig_sigma_x_vectors():
    w, v = eig_hermitian(SX)
    assert np.allclose(w, [-1, 1], atol=1e-12)
    minus = np.array([1, -1]) / math.sqrt(2)
    plus = np.array([1, 1]) / math.sqrt(2)
    assert abs(abs(np.vdot(minus, v[:, 0])) - 1) < 1e-12
    assert abs(abs(np.vdot(plus, v[:, 1])) - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17, 32])
def test_eig_known_spectrum(n, rng):
    spectrum = np.sort(rng.uniform(-5, 5, size=n))
    u = random_unitary(rng, n)
    m = u @ np.diag(spectrum) @ u.conj().T
    w, v = eig_hermitian(m)
    assert np.max(np.abs(w - spectrum)) < 1e-9
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) < 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-10


def test_eig_degenerate_spectrum(rng):
    spectrum = np.array([0.0, 0.0, 1.0, 1.0, 1.0, 2.0])
    u = random_unitary(rng, 6)
    m = u @ np.diag(spectrum) @ u.conj().T
    w, v = eig_hermitian(m)
    assert np.max(np.abs(w - spectrum)) < 1e-9
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) < 1e-9


@pytest.mark.slow
def test_eig_dimension_128_matches_numpy(rng):
    m = random_hermitian(rng, 128)
    w, v = eig_hermitian(m)
    assert np.max(np.abs(w - np.linalg.eigh(m)[0])) < 1e-9
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) < 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(128))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 24))
def test_eig_reconstruction_property(seed, n):
    m = random_hermitian(np.random.default_rng(seed), n)
    w, v = eig_hermitian(m)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - m)) < 1e-9


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_propagator_zero_time(rng):
    assert np.array_equal(propagator(random_hermitian(rng, 5), 0.0), np.eye(5))


def test_propagator_sigma_z_quarter_turn():
    u = propagator(SZ, math.pi / 2)
    assert np.max(np.abs(u - np.diag([np.exp(-0.5j * math.pi), np.exp(0.5j * math.pi)]))) < 1e-12


def test_propagator_matches_series(rng):
    h = random_hermitian(rng, 6)
    dt = 0.3
    # truncated Taylor series oracle
    series = np.eye(6, dtype=complex)
    term = np.eye(6, dtype=complex)
    for k in range(1, 60):
        term = term @ (-1j * dt * h) / k
        series = series + term
    assert np.max(np.abs(propagator(h, dt) - series)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(-5, 5), st.integers(2, 12))
def test_propagator_unitary_and_group(seed, dt, n):
    h = random_hermitian(np.random.default_rng(seed), n)
    u = propagator(h, dt)
    assert np.max(np.abs(u.conj().T @ u - np.eye(n))) <= 1e-9
    assert np.max(np.abs(u @ propagator(h, -dt) - np.eye(n))) <= 1e-9


def _layout(*dims):
    return SubsystemLayout(dims, tuple(f"s{i}" for i in range(len(dims))))


def test_partial_trace_product():
    rng = np.random.default_rng(3)
    a = QuantumState(_layout(2), "density", np.diag([0.3, 0.7]))
    b_ket = random_ket(rng, 3)
    b = QuantumState(SubsystemLayout((3,), ("t",)), "pure", b_ket)
    red = partial_trace(tensor(a, b), ["s0"])
    assert np.max(np.abs(red.data - a.data)) < 1e-12


def test_partial_trace_bell_pair():
    bell = QuantumState(_layout(2, 2), "pure", np.array([1, 0, 0, 1]) / math.sqrt(2))
    for keep in ("s0", "s1"):
        assert np.max(np.abs(partial_trace(bell, [keep]).data - np.eye(2) / 2)) < 1e-12


def _trace_oracle(psi, dims, keep):
    """Reduced density matrix by explicit summation over basis indices."""
    t = psi.reshape(dims)
    kd = [dims[i] for i in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    for idx in np.ndindex(*dims):
        for jdx in np.ndindex(*dims):
            if any(idx[i] != jdx[i] for i in range(len(dims)) if i not in keep):
                continue
            r = np.ravel_multi_index([idx[i] for i in keep], kd)
            c = np.ravel_multi_index([jdx[i] for i in keep], kd)
            out[r, c] += t[idx] * np.conj(t[jdx])
    return out


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2], [1, 2]])
def test_partial_trace_three_subsystems(keep):
    rng = np.random.default_rng(7)
    dims = (2, 3, 2)
    psi = random_ket(rng, 12)
    st_ = QuantumState(_layout(*dims), "pure", psi)
    red = partial_trace(st_, [f"s{i}" for i in keep])
    assert abs(np.trace(red.data) - 1) < 1e-9
    assert np.max(np.abs(red.data - _trace_oracle(psi, dims, keep))) < 1e-12
    dens = partial_trace(st_.to_density(), [f"s{i}" for i in keep])
    assert np.max(np.abs(dens.data - red.data)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0, 1))
def test_partial_trace_linear_and_trace_preserving(seed, p):
    rng = np.random.default_rng(seed)
    lay = _layout(2, 3)
    r1 = QuantumState(lay, "pure", random_ket(rng, 6)).to_density()
    r2 = QuantumState(lay, "pure", random_ket(rng, 6)).to_density()
    mix = QuantumState(lay, "density", p * r1.data + (1 - p) * r2.data)
    lhs = partial_trace(mix, ["s1"]).data
    rhs = p * partial_trace(r1, ["s1"]).data + (1 - p) * partial_trace(r2, ["s1"]).data
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    assert abs(np.trace(lhs) - 1) < 1e-9


def test_partial_trace_unknown_label():
    with pytest.raises(UnknownLabel):
        partial_trace(QuantumState(_layout(2), "pure", [1, 0]), ["nope"])


def test_fidelity_cases(rng):
    psi = QuantumState(_layout(2), "pure", random_ket(rng, 2))
    orth = QuantumState(_layout(2), "pure", np.array([-np.conj(psi.data[1]), np.conj(psi.data[0])]))
    assert abs(fidelity(psi.to_density(), psi) - 1) < 1e-12
    assert fidelity(psi.to_density(), orth) < 1e-12
    mixed = QuantumState(_layout(2), "density", np.eye(2) / 2)
    assert abs(fidelity(mixed, psi) - 0.5) < 1e-12


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        fidelity(QuantumState(_layout(2), "density", np.eye(2) / 2), QuantumState(_layout(3), "pure", [1, 0, 0]))


def test_apply_operator_matches_embedded_matrix(rng):
    lay = _layout(2, 3, 2)
    psi = QuantumState(lay, "pure", random_ket(rng, 12))
    op = random_unitary(rng, 4)
    full = embed(op, ["s2", "s0"], lay)
    assert np.max(np.abs(apply_operator(psi, op, ["s2", "s0"]).data - full @ psi.data)) < 1e-12
    rho = psi.to_density()
    out = apply_operator(rho, op, ["s2", "s0"]).data
    assert np.max(np.abs(out - full @ rho.data @ full.conj().T)) < 1e-12

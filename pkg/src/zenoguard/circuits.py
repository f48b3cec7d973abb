"""Gates and codes built from the noise direction.

Conventions
-----------
Physical basis: ``|+> = (1, 0)``, ``|-> = (0, 1)`` (sigma_z = +1, -1).

``R`` maps ``|+>, |->`` to the +1/-1 eigenvectors of ``A`` and the
computation basis is ``|0> = R H |+>``, ``|1> = R H |->``; ``W = R H`` is the
basis change. Both computation states are flipped by ``A``.

The physical CNOT flips the target when the control is ``|+>``. With that
choice ``W (x) W`` after the CNOT takes ``(c+|+> + c-|->) (x) |+>`` to
``c+|01> + c-|10>``, and for ``lambda3 = 0`` the encoding acts exactly as the
bare CNOT on that input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import NotNormalized, OddQubitCount
from .noise import DissipationSpec, qubit_operator
from .qlinalg import SX, SY, SZ, QuantumState, SubsystemLayout, kron, partial_trace

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PROJ_PLUS = np.diag([1, 0]).astype(complex)
PROJ_MINUS = np.diag([0, 1]).astype(complex)
CNOT_PHYSICAL = kron(PROJ_PLUS, SX) + kron(PROJ_MINUS, np.eye(2))

TWO_QUBITS = SubsystemLayout((2, 2), ("q1", "q2"))


def bloch_angles(lam) -> tuple[float, float]:
    """Polar and azimuthal angle of the unit vector ``lam``."""
    l1, l2, l3 = lam
    theta = math.acos(max(-1.0, min(1.0, l3)))
    phi = math.atan2(l2, l1) if (l1 or l2) else 0.0
    return theta, phi


def rotation(lam) -> np.ndarray:
    """``R = Rz(phi) Ry(theta) diag(1, e^{2i theta})``.

    The trailing phase fixes the eigenvector phases so that ``R = I`` for
    ``lam = z`` and ``R = H`` for ``lam = x``.
    """
    theta, phi = bloch_angles(lam)
    rz = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz @ ry @ np.diag([1.0, np.exp(2j * theta)])


@dataclass(frozen=True, eq=False)
class GateSet:
    rotation: np.ndarray
    hadamard: np.ndarray
    cnot_physical: np.ndarray
    cnot_computation: np.ndarray

    @property
    def basis_change(self) -> np.ndarray:
        """Columns are the computation basis states in the physical basis."""
        return self.rotation @ self.hadamard

    def pauli(self, name: str) -> np.ndarray:
        """Pauli operator of the computation basis, in the physical basis."""
        w = self.basis_change
        p = {"x": SX, "y": SY, "z": SZ}[name]
        return w @ p @ w.conj().T

    def comp_ket(self, bits) -> np.ndarray:
        """Product state of computation-basis bits, e.g. ``(0, 1)``."""
        w = self.basis_change
        return reduce(np.kron, [w[:, b] for b in bits])

    def comp_transform(self, n: int) -> np.ndarray:
        return reduce(np.kron, [self.basis_change] * n)


def computation_basis(spec: DissipationSpec) -> tuple[np.ndarray, np.ndarray]:
    w = rotation(spec.lam) @ HADAMARD
    return w[:, 0].copy(), w[:, 1].copy()


def build_gates(spec: DissipationSpec) -> GateSet:
    r = rotation(spec.lam)
    rh = kron(r, r) @ kron(HADAMARD, HADAMARD)
    cprime = rh @ CNOT_PHYSICAL @ rh.conj().T
    return GateSet(r, HADAMARD.copy(), CNOT_PHYSICAL.copy(), cprime)


def encoding_unitary(gates: GateSet) -> np.ndarray:
    w = gates.basis_change
    return kron(w, w) @ gates.cnot_physical


def encode(c_plus: complex, c_minus: complex, gates: GateSet) -> QuantumState:
    n2 = abs(c_plus) ** 2 + abs(c_minus) ** 2
    if abs(n2 - 1.0) > 1e-9:
        raise NotNormalized(f"|c+|^2 + |c-|^2 = {n2!r}")
    carrier = np.array([c_plus, c_minus], dtype=complex)
    ancilla = np.array([1, 0], dtype=complex)
    psi = encoding_unitary(gates) @ np.kron(carrier, ancilla)
    return QuantumState(TWO_QUBITS, "pure", psi)


def encoded_state(c_plus: complex, c_minus: complex, gates: GateSet) -> QuantumState:
    """``c+|01> + c-|10>`` assembled directly from computation-basis kets."""
    psi = c_plus * gates.comp_ket((0, 1)) + c_minus * gates.comp_ket((1, 0))
    return QuantumState(TWO_QUBITS, "pure", psi)


def decode(state: QuantumState, gates: GateSet) -> tuple[complex, complex, float]:
    """Undo the encoding; returns carrier amplitudes and the leaked weight."""
    if state.form != "pure" or state.dim != 4:
        raise ValueError("decode expects a pure two-qubit state; use decode_density for mixtures")
    out = encoding_unitary(gates).conj().T @ state.data
    c_plus, c_minus = out[0], out[2]
    leakage = max(0.0, float(state.norm() - abs(c_plus) ** 2 - abs(c_minus) ** 2))
    return complex(c_plus), complex(c_minus), leakage


def decode_density(state: QuantumState, gates: GateSet) -> tuple[np.ndarray, float]:
    """Logical 2x2 density block (ancilla back in ``|+>``) and leaked weight."""
    if state.dim != 4:
        state = partial_trace(state, ("q1", "q2"))
    rho = state.to_density().data
    u = encoding_unitary(gates)
    back = u.conj().T @ rho @ u
    logical = back[np.ix_([0, 2], [0, 2])]
    leakage = max(0.0, float(np.trace(back).real - np.trace(logical).real))
    return logical, leakage


@dataclass(frozen=True, eq=False)
class Codespace:
    """Balanced-weight subspace of ``B_1 + ... + B_2L`` (``B = |1><1|``)."""

    n_qubits: int
    basis_indices: tuple[int, ...]
    b_observable: np.ndarray

    @property
    def L(self) -> int:
        return self.n_qubits // 2

    @property
    def dimension(self) -> int:
        return len(self.basis_indices)

    @property
    def in_parity(self) -> int:
        """Ancilla outcome (computation basis) that signals "in the codespace"."""
        return self.L % 2

    def projector(self, gates: GateSet) -> np.ndarray:
        """Projector onto the codespace expressed in the physical basis."""
        t = gates.comp_transform(self.n_qubits)
        cols = t[:, list(self.basis_indices)]
        return cols @ cols.conj().T


def hamming_weights(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx])


def codespace(two_l: int) -> Codespace:
    if two_l < 2 or two_l % 2:
        raise OddQubitCount(f"codespace needs an even qubit count >= 2, got {two_l}")
    weights = hamming_weights(two_l)
    basis = tuple(int(i) for i in np.flatnonzero(weights == two_l // 2))
    return Codespace(two_l, basis, weights.astype(float))


def efficiency(L: int) -> tuple[float, float]:
    """Exact ``log2 C(2L, L) / 2L`` and its large-L form."""
    if L < 1:
        raise ValueError("L must be >= 1")
    exact = math.log2(math.comb(2 * L, L)) / (2 * L)
    asymptotic = 1.0 - math.log2(math.pi * L) / (4 * L)
    return exact, asymptotic


def noise_operator_on(spec: DissipationSpec, qubit: int, n_qubits: int) -> np.ndarray:
    """``A_l`` on qubit ``qubit`` of an ``n_qubits`` register (physical basis)."""
    ops = [np.eye(2, dtype=complex)] * n_qubits
    ops[qubit] = qubit_operator(spec)
    return reduce(kron, ops)

"""Dense complex linear algebra for small open-system simulations.

Matrices are plain ``numpy`` complex128 arrays. Composite Hilbert spaces are
described by a :class:`SubsystemLayout`; the index convention is big-endian in
the listed order, i.e. the first subsystem is the most significant digit of a
flat basis index (the same order ``numpy.kron`` produces).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotNormalized, NumericalFailure, UnknownLabel

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100

# Pauli matrices in the sigma_z eigenbasis (|+> = index 0 has sigma_z = +1).
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of shape {a.shape}")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        return np.inf
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(m) <= tol


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``a`` indexes the more significant digit."""
    a, b = as_matrix(a), as_matrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(ra * rb, ca * cb)


def kron_all(mats: Iterable) -> np.ndarray:
    return reduce(kron, mats)


def _round_robin(n: int):
    """Yield rounds of disjoint index pairs covering every pair once per sweep."""
    m = n + (n % 2)
    slots = list(range(m))
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = slots[i], slots[m - 1 - i]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        yield pairs
        slots = [slots[0], slots[-1]] + slots[1:-1]


def eig_hermitian(m, tol: float = JACOBI_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each sweep visits all index pairs in round-robin order so that the n/2
    disjoint rotations of one round are applied together. Iteration stops when
    the off-diagonal Frobenius norm drops below ``tol * max(1, ||m||_F)``.

    Returns ``(w, v)`` with ascending real eigenvalues ``w`` and a unitary
    ``v`` whose columns are the eigenvectors, ``m = v @ diag(w) @ v^H``.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch(f"eig_hermitian needs a square matrix, got {a.shape}")
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e}")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    if n == 1:
        return a.real.diagonal().copy(), v

    threshold = tol * max(1.0, np.linalg.norm(a))
    rounds = list(_round_robin(n))
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off < threshold:
            break
        for pairs in rounds:
            pq = np.array(pairs)
            P, Q = pq[:, 0], pq[:, 1]
            z = a[P, Q]
            r = np.abs(z)
            active = r > 1e-300
            if not active.any():
                continue
            P, Q, z, r = P[active], Q[active], z[active], r[active]
            app = a[P, P].real
            aqq = a[Q, Q].real
            phase = np.conj(z / r)  # e^{-i arg z}
            theta = 0.5 * np.arctan2(2.0 * r, aqq - app)
            c, s = np.cos(theta), np.sin(theta)
            upp, upq = c, s
            uqp, uqq = -s * phase, c * phase

            cp, cq = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = cp * upp + cq * uqp
            a[:, Q] = cp * upq + cq * uqq
            rp, rq = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = np.conj(upp)[:, None] * rp + np.conj(uqp)[:, None] * rq
            a[Q, :] = np.conj(upq)[:, None] * rp + np.conj(uqq)[:, None] * rq
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            vp, vq = v[:, P].copy(), v[:, Q].copy()
            v[:, P] = vp * upp + vq * uqp
            v[:, Q] = vp * upq + vq * uqq
        a = 0.5 * (a + a.conj().T)
    else:
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off >= threshold:
            raise NumericalFailure(f"Jacobi sweeps did not converge (off-diagonal norm {off:.3e})")

    w = a.diagonal().real
    order = np.argsort(w, kind="stable")
    return w[order].copy(), v[:, order]


def propagator(h, dt: float) -> np.ndarray:
    """Exact ``exp(-i h dt)`` for Hermitian ``h`` (hbar = 1)."""
    h = as_matrix(h)
    if dt == 0:
        err = hermiticity_error(h)
        if err > HERMITIAN_TOL:
            raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e}")
        return np.eye(h.shape[0], dtype=complex)
    w, v = eig_hermitian(h)
    return propagator_from_eig(w, v, dt)


def propagator_from_eig(w: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


@dataclass(frozen=True)
class SubsystemLayout:
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise DimensionMismatch("dims and labels differ in length")
        if any(d < 1 for d in self.dims):
            raise DimensionMismatch(f"subsystem dimensions must be positive: {self.dims}")
        if len(set(self.labels)) != len(self.labels):
            raise DimensionMismatch(f"duplicate labels in {self.labels}")

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def __add__(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.dims + other.dims, self.labels + other.labels)

    def without(self, labels: Iterable[str]) -> "SubsystemLayout":
        drop = {self.index(lb) for lb in labels}
        keep = [i for i in range(len(self.dims)) if i not in drop]
        return SubsystemLayout(tuple(self.dims[i] for i in keep), tuple(self.labels[i] for i in keep))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure vector (shape ``(D,)``) or a density matrix (shape ``(D, D)``).

    Construction does not normalize; use :meth:`validate` to check the
    physical invariants.
    """

    layout: SubsystemLayout
    form: str
    data: np.ndarray

    def __post_init__(self):
        if self.form not in ("pure", "density"):
            raise ValueError(f"unknown state form {self.form!r}")
        d = np.asarray(self.data, dtype=complex)
        D = self.layout.total
        expected = (D,) if self.form == "pure" else (D, D)
        if self.form == "pure" and d.ndim == 2 and 1 in d.shape:
            d = d.reshape(-1)
        if d.shape != expected:
            raise DimensionMismatch(f"{self.form} state over {self.layout.dims} needs shape {expected}, got {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def pure(cls, vector, layout: SubsystemLayout) -> "QuantumState":
        return cls(layout, "pure", vector).validate()

    @classmethod
    def density(cls, matrix, layout: SubsystemLayout) -> "QuantumState":
        return cls(layout, "density", matrix).validate()

    @property
    def dim(self) -> int:
        return self.layout.total

    def validate(self, tol: float = 1e-9) -> "QuantumState":
        if self.form == "pure":
            n2 = float(np.vdot(self.data, self.data).real)
            if abs(n2 - 1.0) > tol:
                raise NotNormalized(f"squared norm {n2!r} differs from 1")
        else:
            tr = complex(np.trace(self.data))
            if abs(tr - 1.0) > tol:
                raise NotNormalized(f"trace {tr!r} differs from 1")
            err = hermiticity_error(self.data)
            if err > HERMITIAN_TOL:
                raise NotHermitian(f"density matrix deviates from Hermitian by {err:.3e}")
            lo = np.linalg.eigvalsh(self.data).min()
            if lo < -1e-8:
                raise NumericalFailure(f"density matrix has negative eigenvalue {lo:.3e}")
        return self

    def to_density(self) -> "QuantumState":
        if self.form == "density":
            return self
        return QuantumState(self.layout, "density", np.outer(self.data, self.data.conj()))

    def norm(self) -> float:
        """Squared norm for vectors, trace for density matrices."""
        if self.form == "pure":
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def normalized(self) -> "QuantumState":
        n = self.norm()
        if n <= 0:
            raise NotNormalized("cannot normalize a zero state")
        scale = np.sqrt(n) if self.form == "pure" else n
        return QuantumState(self.layout, self.form, self.data / scale)

    def scaled(self, factor: float) -> "QuantumState":
        return QuantumState(self.layout, self.form, self.data * factor)


def basis_state(index: int, layout: SubsystemLayout) -> QuantumState:
    v = np.zeros(layout.total, dtype=complex)
    v[index] = 1.0
    return QuantumState(layout, "pure", v)


def tensor(*states: QuantumState) -> QuantumState:
    """Product state; the result is a density matrix if any factor is."""
    layout = reduce(lambda x, y: x + y, (s.layout for s in states))
    if all(s.form == "pure" for s in states):
        data = reduce(np.kron, (s.data for s in states))
        return QuantumState(layout, "pure", data)
    data = reduce(kron, (s.to_density().data for s in states))
    return QuantumState(layout, "density", data)


def _contract(t: np.ndarray, op: np.ndarray, axes: Sequence[int], tdims: Sequence[int]) -> np.ndarray:
    """Apply ``op`` (acting on the joint space of ``axes``) to tensor ``t``."""
    k = len(axes)
    opt = op.reshape(tuple(tdims) * 2)
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def apply_operator(state: QuantumState, op, labels: Sequence[str]) -> QuantumState:
    """Apply ``op`` to the listed subsystems (``op`` ordered as ``labels``).

    Pure states map to ``op|psi>``; density matrices to ``op rho op^H``.
    """
    op = as_matrix(op)
    lay = state.layout
    axes = [lay.index(lb) for lb in labels]
    tdims = [lay.dims[i] for i in axes]
    if op.shape != (int(np.prod(tdims)),) * 2:
        raise DimensionMismatch(f"operator shape {op.shape} does not fit subsystems {list(labels)}")
    n = len(lay.dims)
    if state.form == "pure":
        t = state.data.reshape(lay.dims)
        t = _contract(t, op, axes, tdims)
        return QuantumState(lay, "pure", t.reshape(-1))
    t = state.data.reshape(lay.dims * 2)
    t = _contract(t, op, axes, tdims)
    t = _contract(t, op.conj(), [a + n for a in axes], tdims)
    return QuantumState(lay, "density", t.reshape(state.data.shape))


def embed(op, labels: Sequence[str], layout: SubsystemLayout) -> np.ndarray:
    """Full-space matrix of an operator acting on the named subsystems."""
    basis = np.eye(layout.total, dtype=complex)
    cols = [apply_operator(QuantumState(layout, "pure", e), op, labels).data for e in basis]
    return np.array(cols).T


def partial_trace(state: QuantumState, keep: Iterable[str]) -> QuantumState:
    """Reduce to the subsystems in ``keep`` (returned in layout order)."""
    lay = state.layout
    keep_set = set(keep)
    for lb in keep_set:
        lay.index(lb)
    keep_idx = [i for i, lb in enumerate(lay.labels) if lb in keep_set]
    rest_idx = [i for i in range(len(lay.dims)) if i not in keep_idx]
    new_lay = SubsystemLayout(tuple(lay.dims[i] for i in keep_idx), tuple(lay.labels[i] for i in keep_idx))
    dk = new_lay.total
    dr = int(np.prod([lay.dims[i] for i in rest_idx], dtype=np.int64)) if rest_idx else 1
    n = len(lay.dims)
    if state.form == "pure":
        m = state.data.reshape(lay.dims).transpose(keep_idx + rest_idx).reshape(dk, dr)
        rho = m @ m.conj().T
    else:
        perm = keep_idx + rest_idx + [i + n for i in keep_idx] + [i + n for i in rest_idx]
        t = state.data.reshape(lay.dims * 2).transpose(perm).reshape(dk, dr, dk, dr)
        rho = np.einsum("iaja->ij", t)
    return QuantumState(new_lay, "density", rho)


def project_subsystem(state: QuantumState, label: str, ket) -> QuantumState:
    """Contract subsystem ``label`` with ``<ket|`` (and ``|ket>`` on the right).

    The result lives on the remaining subsystems and is *not* normalized; its
    norm is the probability of finding ``label`` in ``ket``.
    """
    lay = state.layout
    ax = lay.index(label)
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    if ket.size != lay.dims[ax]:
        raise DimensionMismatch(f"ket of size {ket.size} for subsystem {label!r} of dim {lay.dims[ax]}")
    new_lay = lay.without([label])
    n = len(lay.dims)
    if state.form == "pure":
        t = np.tensordot(ket.conj(), state.data.reshape(lay.dims), axes=([0], [ax]))
        return QuantumState(new_lay, "pure", t.reshape(-1))
    t = state.data.reshape(lay.dims * 2)
    t = np.tensordot(ket.conj(), t, axes=([0], [ax]))
    t = np.tensordot(t, ket, axes=([n - 1 + ax], [0]))
    D = new_lay.total
    return QuantumState(new_lay, "density", t.reshape(D, D))


def fidelity(s: QuantumState, target: QuantumState, tol: float = 1e-9) -> float:
    """Overlap <target|rho|target> of a (mixed) state with a pure target."""
    if s.dim != target.dim:
        raise DimensionMismatch(f"state dimension {s.dim} vs target dimension {target.dim}")
    if target.form != "pure":
        raise DimensionMismatch("fidelity target must be a pure state")
    psi = target.data
    if s.form == "pure":
        val = abs(np.vdot(psi, s.data)) ** 2
    else:
        val = float(np.vdot(psi, s.data @ psi).real)
    if val < -tol or val > 1 + tol:
        raise NumericalFailure(f"fidelity {val!r} outside [0, 1]")
    return min(1.0, max(0.0, val))

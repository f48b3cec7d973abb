"""Repeated QND codespace tests interleaved with exact system + bath evolution."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .circuits import Codespace, GateSet, build_gates, codespace, decode_density, encode
from .errors import ConfigError, DimensionOverflow, NumericalFailure
from .noise import MAX_DIM, BathDiscretization, DissipationSpec, DriveSpec, build_hamiltonian, thermal_bath_state
from .qlinalg import QuantumState, SubsystemLayout, apply_operator, eig_hermitian, fidelity, partial_trace
from .qlinalg import project_subsystem, propagator_from_eig, tensor

POLICIES = ("postselect", "track-both")
PAULI_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class ZenoConfig:
    t_total: float
    n_tests: int
    gamma: float = 0.0
    policy: str = "track-both"
    seed: int = 0

    def __post_init__(self):
        if not self.t_total > 0:
            raise ConfigError(f"t_total must be > 0, got {self.t_total}")
        if int(self.n_tests) != self.n_tests or self.n_tests < 1:
            raise ConfigError(f"n_tests must be a positive integer, got {self.n_tests}")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        object.__setattr__(self, "n_tests", int(self.n_tests))

    @property
    def dt(self) -> float:
        return self.t_total / self.n_tests


@dataclass(frozen=True)
class StepRecord:
    step: int
    leak_probability: float
    syndrome: str
    post_fidelity: float


@dataclass(frozen=True)
class ZenoRunReport:
    per_step: tuple[StepRecord, ...]
    final_fidelity: float
    total_out_probability: float
    estimated_p_tot: float
    policy: str = "track-both"
    decoded_leakage: float = 0.0

    @property
    def mean_leak(self) -> float:
        return float(np.mean([r.leak_probability for r in self.per_step]))

    def to_dict(self) -> dict:
        return asdict(self)


def first_order_step(state: QuantumState, h: np.ndarray, dt: float) -> QuantumState:
    """``(1 - i h dt)|psi>``, deliberately left unnormalized."""
    if state.form != "pure":
        raise ValueError("first_order_step acts on pure states")
    psi = state.data
    return QuantumState(state.layout, "pure", psi - 1j * dt * (h @ psi))


def code_labels(layout: SubsystemLayout) -> list[str]:
    return [lb for lb in layout.labels if lb.startswith("q")]


def syndrome_branches(state: QuantumState, gates: GateSet, code: Codespace) -> tuple[QuantumState, QuantumState]:
    """Run the ancilla parity circuit; return the unnormalized in/out branches.

    An ancilla prepared in computation ``|0>`` receives ``C'`` from every code
    qubit and is then read out in the computation basis; the branch whose
    ancilla parity matches ``L mod 2`` is "in".
    """
    qubits = code_labels(state.layout)
    if len(qubits) != code.n_qubits:
        raise ConfigError(f"state has {len(qubits)} code qubits, codespace expects {code.n_qubits}")
    w = gates.basis_change
    anc = QuantumState(SubsystemLayout((2,), ("anc",)), "pure", w[:, 0])
    joint = tensor(state, anc)
    for q in qubits:
        joint = apply_operator(joint, gates.cnot_computation, (q, "anc"))
    k_in = code.in_parity
    branch_in = project_subsystem(joint, "anc", w[:, k_in])
    branch_out = project_subsystem(joint, "anc", w[:, 1 - k_in])
    return branch_in, branch_out


def syndrome_test(state: QuantumState, gates: GateSet, code: Codespace, rng=None):
    """QND codespace test; returns ``(outcome, projected, p_out)``.

    With ``rng`` the outcome is sampled; without it the likelier branch is
    reported. ``projected`` is normalized and no longer carries the ancilla.
    """
    b_in, b_out = syndrome_branches(state, gates, code)
    p_in, p_out = b_in.norm(), b_out.norm()
    total = p_in + p_out
    p_out = p_out / total if total > 0 else 0.0
    if rng is not None:
        outcome = "out" if rng.random() < p_out else "in"
    else:
        outcome = "out" if p_out > 0.5 else "in"
    chosen = b_out if outcome == "out" else b_in
    return outcome, chosen.normalized(), float(p_out)


def _pauli_kicks(state: QuantumState, gates: GateSet):
    qubits = code_labels(state.layout)
    return [(q, gates.pauli(p)) for q in qubits for p in PAULI_NAMES]


def inject_test_noise(state: QuantumState, gamma: float, rng=None, *, gates: GateSet, sample: bool | None = None):
    """Single-qubit depolarizing kick in the computation basis.

    Density states receive the exact mixture unless ``sample`` is set; pure
    states (or ``sample=True``) draw one branch from ``rng``.
    """
    if not 0.0 <= gamma < 1.0 + 1e-15:
        raise ConfigError(f"gamma must lie in [0, 1), got {gamma}")
    if gamma == 0:
        return state
    kicks = _pauli_kicks(state, gates)
    if sample is None:
        sample = state.form == "pure"
    if sample:
        if rng is None:
            raise ValueError("sampling the test noise needs a random generator")
        if rng.random() >= gamma:
            return state
        q, op = kicks[int(rng.integers(len(kicks)))]
        return apply_operator(state, op, (q,))
    rho = state.to_density()
    acc = (1.0 - gamma) * rho.data
    for q, op in kicks:
        acc = acc + (gamma / len(kicks)) * apply_operator(rho, op, (q,)).data
    return QuantumState(rho.layout, "density", acc)


def _reduced_fidelity(rho: QuantumState, target: QuantumState) -> float:
    return fidelity(partial_trace(rho, target.layout.labels), target)


def run_protocol(
    spec: DissipationSpec,
    bath: BathDiscretization,
    drive: DriveSpec,
    gates: GateSet,
    code: Codespace,
    initial: tuple[complex, complex],
    config: ZenoConfig,
) -> ZenoRunReport:
    """Encode, then repeat {evolve T0/N, test noise, syndrome test} N times.

    ``track-both`` keeps the full non-selective mixture, so the final
    fidelity is that of the unconditioned state. ``postselect`` keeps the
    branch with all outcomes "in" and samples the test noise. In both cases
    the per-step leak is the out-probability of the surviving "in" branch.
    """
    if code.n_qubits != 2:
        raise ConfigError("the protocol run encodes one logical qubit into two code qubits")
    h, layout = build_hamiltonian(spec, bath, drive, code.n_qubits)
    if 2 * layout.total > MAX_DIM:
        raise DimensionOverflow(f"dimension with ancilla {2 * layout.total} exceeds {MAX_DIM}")
    w, v = eig_hermitian(h)
    u = propagator_from_eig(w, v, config.dt)
    ud = u.conj().T
    rng = np.random.default_rng(config.seed)

    target = encode(initial[0], initial[1], gates)
    rho0 = tensor(target, thermal_bath_state(bath)).to_density()
    rho_in = rho0.data
    rho_rest = np.zeros_like(rho_in)
    w_in = 1.0
    track = config.policy == "track-both"

    def wrap(m):
        return QuantumState(layout, "density", m)

    leaks = []
    records = []
    for step in range(1, config.n_tests + 1):
        rho_in = u @ rho_in @ ud
        if abs(np.trace(rho_in).real - 1.0) > 1e-9:
            raise NumericalFailure(f"norm drift {np.trace(rho_in).real - 1.0:.2e} at step {step}")
        if track:
            rho_rest = u @ rho_rest @ ud
        if config.gamma > 0:
            rho_in = inject_test_noise(wrap(rho_in), config.gamma, rng, gates=gates, sample=not track).data
            if track:
                rho_rest = inject_test_noise(wrap(rho_rest), config.gamma, gates=gates, sample=False).data

        b_in, b_out = syndrome_branches(wrap(rho_in), gates, code)
        p_out = min(1.0, max(0.0, b_out.norm()))
        if track:
            r_in, r_out = syndrome_branches(wrap(rho_rest), gates, code)
            rho_rest = r_in.data + r_out.data + w_in * b_out.data
        if 1.0 - p_out > 1e-300:
            rho_in = b_in.data / (1.0 - p_out)
        w_in *= 1.0 - p_out
        leaks.append(p_out)
        syndrome = "out" if rng.random() < p_out else "in"

        current = w_in * rho_in + rho_rest if track else rho_in
        records.append(StepRecord(step, float(p_out), syndrome, _reduced_fidelity(wrap(current), target)))

    final = wrap(w_in * rho_in + rho_rest if track else rho_in)
    _, leak = decode_density(partial_trace(final, target.layout.labels), gates)
    return ZenoRunReport(
        per_step=tuple(records),
        final_fidelity=records[-1].post_fidelity,
        total_out_probability=float(1.0 - w_in),
        estimated_p_tot=float(sum(leaks)),
        policy=config.policy,
        decoded_leakage=leak,
    )


@dataclass(frozen=True)
class ProtocolSetup:
    """Everything a run needs apart from the gate set and code, which follow."""

    spec: DissipationSpec
    bath: BathDiscretization
    drive: DriveSpec
    initial: tuple[complex, complex]
    config: ZenoConfig

    def run(self, **changes) -> ZenoRunReport:
        cfg = replace(self.config, **changes) if changes else self.config
        return run_protocol(self.spec, self.bath, self.drive, build_gates(self.spec), codespace(2), self.initial, cfg)


@dataclass(frozen=True)
class ScalingResult:
    rows: tuple[tuple[int, float, float], ...]
    slope: float | None
    flag: str = ""
    argmin_n: int | None = None
    interior_minimum: bool = False


NO_DECAY_FLOOR = 1e-13


def loglog_slope(xs, ys) -> float:
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def zeno_scaling_experiment(setup: ProtocolSetup, n_values) -> ScalingResult:
    """Track-both runs for each N; fits log(1 - F) against log N."""
    ns = [int(n) for n in n_values]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("n_values must be strictly ascending")
    rows = []
    for n in ns:
        rep = setup.run(n_tests=n, policy="track-both")
        rows.append((n, 1.0 - rep.final_fidelity, rep.total_out_probability))
    errs = [r[1] for r in rows]
    good = [(n, e) for n, e, _ in rows if e > NO_DECAY_FLOOR]
    if len(good) < 2:
        return ScalingResult(tuple(rows), None, "no-decay")
    slope = loglog_slope(*zip(*good))
    i = int(np.argmin(errs))
    return ScalingResult(tuple(rows), slope, "", ns[i], 0 < i < len(ns) - 1)


def fidelity_after(spec, drive, initial, t: float, bath: BathDiscretization | None = None) -> float:
    """Fidelity of an encoded state after plain evolution for time ``t``."""
    bath = bath or BathDiscretization((), 1, 0.0)
    gates = build_gates(spec)
    h, layout = build_hamiltonian(spec, bath, drive, 2)
    w, v = eig_hermitian(h)
    u = propagator_from_eig(w, v, t)
    target = encode(initial[0], initial[1], gates)
    rho = tensor(target, thermal_bath_state(bath)).to_density()
    out = QuantumState(layout, "density", u @ rho.data @ u.conj().T)
    return _reduced_fidelity(out, target)


__all__ = [
    "ProtocolSetup",
    "ScalingResult",
    "ZenoConfig",
    "ZenoRunReport",
    "first_order_step",
    "inject_test_noise",
    "run_protocol",
    "syndrome_test",
    "zeno_scaling_experiment",
]

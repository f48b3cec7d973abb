"""Dissipation model: noise operator, spectral densities, discretized bath and
the qubit + bath Hamiltonian with the free-Hamiltonian-elimination drive.

Units: hbar = k_B = 1. Couplings of a discrete mode are complex amplitudes
``g`` entering as ``A_l (g a^dag + g* a)``, which is Hermitian for any phase
and reduces to ``g A_l (a^dag + a)`` for real ``g``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, CutoffTooSmall, DimensionOverflow, OddQubitCount
from .qlinalg import SX, SY, SZ, QuantumState, SubsystemLayout, kron_all

MAX_DIM = 2048
THERMAL_TAIL_TOL = 1e-3
OHMIC_SUPPORT = 15.0  # ohmic spectra are cut at OHMIC_SUPPORT * omega_c


@dataclass(frozen=True)
class SpectralDensity:
    """``|g(omega)|^2`` on ``omega >= 0``.

    kinds:
      ohmic      alpha * omega * exp(-omega / omega_c)
      flat       g0**2 on [0, omega_max]
      tabulated  piecewise-linear through ``points`` (omega, |g|^2)
      atomic     sum of delta spikes, ``points`` = (omega_k, weight_k)
    """

    kind: str
    alpha: float = 0.0
    omega_c: float = 1.0
    g0: float = 0.0
    omega_max: float = 1.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("ohmic", "flat", "tabulated", "atomic"):
            raise ConfigError(f"unknown spectral density kind {self.kind!r}")
        if self.kind == "ohmic" and (self.alpha < 0 or self.omega_c <= 0):
            raise ConfigError("ohmic spectral density needs alpha >= 0 and omega_c > 0")
        if self.kind == "flat" and self.omega_max <= 0:
            raise ConfigError("flat spectral density needs omega_max > 0")
        if self.kind in ("tabulated", "atomic"):
            pts = tuple((float(w), float(v)) for w, v in self.points)
            object.__setattr__(self, "points", pts)
            if not pts:
                raise ConfigError(f"{self.kind} spectral density needs at least one point")
            ws = [w for w, _ in pts]
            if any(b <= a for a, b in zip(ws, ws[1:])):
                raise ConfigError("spectral table frequencies must be strictly increasing")
            if any(v < 0 for _, v in pts) or ws[0] < 0:
                raise ConfigError("spectral table entries must be non-negative")
            if self.kind == "tabulated" and len(pts) < 2:
                raise ConfigError("tabulated spectral density needs at least two points")

    @classmethod
    def ohmic(cls, alpha: float, omega_c: float) -> "SpectralDensity":
        return cls("ohmic", alpha=alpha, omega_c=omega_c)

    @classmethod
    def flat(cls, g0: float, omega_max: float) -> "SpectralDensity":
        return cls("flat", g0=g0, omega_max=omega_max)

    @classmethod
    def tabulated(cls, points) -> "SpectralDensity":
        return cls("tabulated", points=tuple(map(tuple, points)))

    @classmethod
    def atomic(cls, points) -> "SpectralDensity":
        return cls("atomic", points=tuple(map(tuple, points)))

    @classmethod
    def from_table(cls, path) -> "SpectralDensity":
        """Read a two-column ``omega |g|^2`` table ('#' starts a comment)."""
        pts = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            cols = line.split()
            if len(cols) != 2:
                raise ConfigError(f"{path}: expected two columns, got {len(cols)}", line=lineno)
            try:
                pts.append((float(cols[0]), float(cols[1])))
            except ValueError:
                raise ConfigError(f"{path}: non-numeric entry {line!r}", line=lineno) from None
        return cls.tabulated(pts)

    def support(self) -> tuple[float, float]:
        if self.kind == "ohmic":
            return 0.0, OHMIC_SUPPORT * self.omega_c
        if self.kind == "flat":
            return 0.0, self.omega_max
        return self.points[0][0], self.points[-1][0]

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        if self.kind == "ohmic":
            return np.where(w >= 0, self.alpha * w * np.exp(-w / self.omega_c), 0.0)
        if self.kind == "flat":
            return np.where((w >= 0) & (w <= self.omega_max), self.g0**2, 0.0)
        if self.kind == "atomic":
            raise TypeError("atomic spectral densities have no pointwise value")
        xs, ys = zip(*self.points)
        return np.interp(w, xs, ys, left=0.0, right=0.0)

    def vanishes_at_zero(self) -> bool:
        lo, _ = self.support()
        if self.kind == "ohmic":
            return True
        if self.kind == "atomic":
            return lo > 0
        return lo > 0 or float(self(0.0)) == 0.0


@dataclass(frozen=True)
class DissipationSpec:
    """Noise direction, qubit frequency, temperature, spectrum and bath sharing.

    ``sharing`` is ``"independent"``, ``"collective"`` or ``("partial", f)``.
    ``coupling_scales`` multiplies the coupling amplitude of qubit l (missing
    entries default to 1), so unbalanced and phase-shifted couplings can be
    modelled with one spectral shape.
    """

    lam: tuple[float, float, float]
    omega0: float = 1.0
    temperature: float = 0.0
    spectral: SpectralDensity = field(default_factory=lambda: SpectralDensity.flat(0.0, 1.0))
    sharing: object = "independent"
    coupling_scales: tuple[complex, ...] = (1.0, 1.0)

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        if len(lam) != 3:
            raise ConfigError("lambda must have three components")
        if abs(math.sqrt(sum(x * x for x in lam)) - 1.0) > 1e-12:
            raise ConfigError(f"lambda must be a unit vector, |lambda| = {math.sqrt(sum(x * x for x in lam))!r}")
        object.__setattr__(self, "lam", lam)
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        object.__setattr__(self, "sharing", _normalize_sharing(self.sharing))
        object.__setattr__(self, "coupling_scales", tuple(complex(c) for c in self.coupling_scales))

    @property
    def shared_fraction(self) -> float:
        if self.sharing == "independent":
            return 0.0
        if self.sharing == "collective":
            return 1.0
        return self.sharing[1]

    def scale(self, qubit: int) -> complex:
        return self.coupling_scales[qubit] if qubit < len(self.coupling_scales) else 1.0


def _normalize_sharing(sharing):
    if sharing in ("independent", "collective"):
        return sharing
    if isinstance(sharing, (tuple, list)) and len(sharing) == 2 and sharing[0] == "partial":
        f = float(sharing[1])
        if not 0.0 <= f <= 1.0:
            raise ConfigError(f"partial sharing fraction must lie in [0, 1], got {f}")
        return ("partial", f)
    raise ConfigError(f"unknown bath sharing {sharing!r}")


def unit_lambda(lam) -> tuple[float, float, float]:
    v = np.asarray(lam, dtype=float)
    return tuple(float(x) for x in v / np.linalg.norm(v))


def qubit_operator(spec: DissipationSpec) -> np.ndarray:
    """``A = lam1 sigma_x + lam2 sigma_y + lam3 sigma_z`` in the physical basis."""
    l1, l2, l3 = spec.lam
    return l1 * SX + l2 * SY + l3 * SZ


@dataclass(frozen=True)
class BathMode:
    omega: float
    couplings: tuple[complex, ...]
    shared: bool

    @property
    def g1(self) -> complex:
        return self.couplings[0]

    @property
    def g2(self) -> complex:
        return self.couplings[1] if len(self.couplings) > 1 else 0.0


@dataclass(frozen=True)
class BathDiscretization:
    """Discrete bath registers; one entry of ``modes`` per oscillator register."""

    modes: tuple[BathMode, ...]
    fock_cutoff: int
    temperature: float = 0.0
    nbar: tuple[float, ...] = ()

    def __post_init__(self):
        if self.fock_cutoff < 1:
            raise ConfigError("fock_cutoff must be >= 1")
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "nbar", tuple(thermal_occupation(m.omega, self.temperature) for m in self.modes))
        if self.temperature > 0:
            for m in self.modes:
                tail = truncated_mass(m.omega, self.temperature, self.fock_cutoff)
                if tail > THERMAL_TAIL_TOL:
                    raise CutoffTooSmall(
                        f"mode at omega={m.omega:.4g} loses {tail:.2e} thermal probability "
                        f"above n_max={self.fock_cutoff} at T={self.temperature:.4g}"
                    )

    @property
    def n_qubits(self) -> int:
        return max((len(m.couplings) for m in self.modes), default=2)

    def coth(self) -> np.ndarray:
        return np.array([1.0 + 2.0 * n for n in self.nbar])


def thermal_occupation(omega: float, temperature: float) -> float:
    if temperature <= 0:
        return 0.0
    x = omega / temperature
    return math.exp(-x) / -math.expm1(-x)


def truncated_mass(omega: float, temperature: float, n_max: int) -> float:
    """Gibbs probability above level ``n_max`` for an untruncated oscillator."""
    if temperature <= 0:
        return 0.0
    return math.exp(-omega * (n_max + 1) / temperature)


def shared_node_count(fraction: float, n_modes: int) -> int:
    return min(n_modes, math.ceil(fraction * n_modes - 1e-12))


def discretize_bath(spec: DissipationSpec, n_modes: int, fock_cutoff: int, n_qubits: int = 2) -> BathDiscretization:
    """Gauss-Legendre sampling of the spectral density.

    Node k carries ``|g_k|^2 = w_k |g(omega_k)|^2``. Shared nodes become a
    single register coupled to every qubit; unshared nodes become one register
    per qubit. Under partial sharing the lowest ``ceil(f * n_modes)`` nodes are
    shared.
    """
    if n_modes < 1:
        raise ConfigError("n_modes must be >= 1")
    sd = spec.spectral
    if sd.kind == "atomic":
        nodes = np.array([w for w, _ in sd.points])
        weights_sq = np.array([v for _, v in sd.points])
        n_modes = len(nodes)
    else:
        lo, hi = sd.support()
        x, w = np.polynomial.legendre.leggauss(n_modes)
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        weights_sq = 0.5 * (hi - lo) * w * sd(nodes)
    amps = np.sqrt(np.clip(weights_sq, 0.0, None))
    n_shared = shared_node_count(spec.shared_fraction, n_modes)

    modes = []
    for k, (om, amp) in enumerate(zip(nodes, amps)):
        gs = [spec.scale(l) * amp for l in range(n_qubits)]
        if k < n_shared:
            modes.append(BathMode(float(om), tuple(gs), True))
        else:
            for l in range(n_qubits):
                cs = [0j] * n_qubits
                cs[l] = gs[l]
                modes.append(BathMode(float(om), tuple(cs), False))
    return BathDiscretization(tuple(modes), fock_cutoff, spec.temperature)


@dataclass(frozen=True)
class DriveSpec:
    """Free-Hamiltonian-elimination drive ``-coefficient * sum_l sigma_l^z``."""

    enabled: bool = True
    coefficient: float = 1.0

    @classmethod
    def matched(cls, omega0: float) -> "DriveSpec":
        return cls(True, omega0)

    @classmethod
    def off(cls) -> "DriveSpec":
        return cls(False, 0.0)

    def check(self, omega0: float):
        if self.enabled and abs(self.coefficient - omega0) > 1e-12:
            raise ConfigError(f"drive coefficient {self.coefficient} must equal omega0 = {omega0}")


def ladder(n_max: int) -> np.ndarray:
    """Truncated annihilation operator on levels 0..n_max."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def system_layout(n_qubits: int, bath: BathDiscretization) -> SubsystemLayout:
    d = bath.fock_cutoff + 1
    labels = tuple(f"q{l + 1}" for l in range(n_qubits)) + tuple(f"mode{k}" for k in range(len(bath.modes)))
    return SubsystemLayout((2,) * n_qubits + (d,) * len(bath.modes), labels)


def build_hamiltonian(
    spec: DissipationSpec, bath: BathDiscretization, drive: DriveSpec, n_code_qubits: int = 2
) -> tuple[np.ndarray, SubsystemLayout]:
    if n_code_qubits < 2 or n_code_qubits % 2:
        raise OddQubitCount(f"need an even number >= 2 of code qubits, got {n_code_qubits}")
    drive.check(spec.omega0)
    layout = system_layout(n_code_qubits, bath)
    D = layout.total
    if D > MAX_DIM:
        raise DimensionOverflow(f"Hilbert space dimension {D} exceeds the engine limit {MAX_DIM}")
    for m in bath.modes:
        if len(m.couplings) > n_code_qubits:
            raise ConfigError("bath couples to more qubits than the code has")

    n_sub = len(layout.dims)
    eyes = [np.eye(d, dtype=complex) for d in layout.dims]

    def op_on(ops: dict[int, np.ndarray]) -> np.ndarray:
        return kron_all([ops.get(i, eyes[i]) for i in range(n_sub)])

    h = np.zeros((D, D), dtype=complex)
    z_coeff = spec.omega0 - (drive.coefficient if drive.enabled else 0.0)
    if z_coeff != 0.0:
        for l in range(n_code_qubits):
            h += z_coeff * op_on({l: SZ})

    A = qubit_operator(spec)
    a = ladder(bath.fock_cutoff)
    n_op = a.conj().T @ a
    for k, mode in enumerate(bath.modes):
        idx = n_code_qubits + k
        h += mode.omega * op_on({idx: n_op})
        for l, g in enumerate(mode.couplings):
            if g == 0:
                continue
            field_op = g * a.conj().T + np.conj(g) * a
            h += op_on({l: A, idx: field_op})
    return 0.5 * (h + h.conj().T), layout


def gibbs_populations(omega: float, temperature: float, n_max: int) -> np.ndarray:
    """Level populations exp(-omega n / T) / Z on 0..n_max."""
    p = np.zeros(n_max + 1)
    if temperature <= 0:
        p[0] = 1.0
        return p
    logw = -omega * np.arange(n_max + 1) / temperature
    p = np.exp(logw - logw.max())
    return p / p.sum()


def thermal_bath_state(bath: BathDiscretization) -> QuantumState:
    """Product of truncated, renormalized Gibbs states of every register."""
    d = bath.fock_cutoff + 1
    diag = np.ones(1)
    for m in bath.modes:
        diag = np.kron(diag, gibbs_populations(m.omega, bath.temperature, bath.fock_cutoff))
    labels = tuple(f"mode{k}" for k in range(len(bath.modes)))
    layout = SubsystemLayout((d,) * len(bath.modes), labels)
    return QuantumState(layout, "density", np.diag(diag).astype(complex))


def warn_infrared(spec: DissipationSpec):
    if spec.temperature > 0 and not spec.spectral.vanishes_at_zero():
        warnings.warn(
            "spectral density does not vanish at omega = 0; the thermal factor diverges "
            "there and the integral depends on the infrared floor",
            RuntimeWarning,
            stacklevel=3,
        )


def random_unit_vector(rng: np.random.Generator, n: int = 3) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


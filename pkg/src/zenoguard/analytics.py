"""Closed-form error predictions for the Zeno protection scheme."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NonIntegrable
from .noise import BathDiscretization, DissipationSpec, shared_node_count, warn_infrared

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(15)
RTOL = 1e-8
MAX_DEPTH = 60
IR_FLOOR = 1e-6  # in units of omega0
WORKING_RATIO = 0.1
OHMIC_TAIL = 50.0  # continuum integrals of ohmic spectra run to OHMIC_TAIL * omega_c


def coth_factor(omega, temperature: float):
    """``coth(omega / 2T)``; identically 1 at T = 0."""
    w = np.asarray(omega, dtype=float)
    if temperature <= 0:
        return np.ones_like(w)
    with np.errstate(over="ignore"):
        return 1.0 / np.tanh(w / (2.0 * temperature))


def adaptive_gauss_legendre(f, a: float, b: float, rtol: float = RTOL, max_depth: int = MAX_DEPTH) -> float:
    """Composite 15-point Gauss-Legendre with interval halving.

    An interval is accepted when its estimate agrees with the sum over its two
    halves to within its share of ``rtol * |total|``.
    """
    if b <= a:
        return 0.0

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        x = half * GL_NODES + 0.5 * (hi + lo)
        return half * float(np.dot(GL_WEIGHTS, f(x)))

    whole = rule(a, b)
    scale = abs(whole)
    total = 0.0
    stack = [(a, b, whole, 0)]
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        refined = left + right
        scale = max(scale, abs(refined))
        allowed = rtol * scale * (hi - lo) / (b - a)
        if abs(refined - est) <= allowed or abs(refined - est) <= 1e-300:
            total += refined
            continue
        if depth >= max_depth:
            raise NonIntegrable(f"quadrature failed to converge on [{lo:.3e}, {hi:.3e}]")
        stack.append((lo, mid, left, depth + 1))
        stack.append((mid, hi, right, depth + 1))
    return total


@dataclass(frozen=True)
class DeltaBreakdown:
    diagonal: float
    cross: float
    bound: float

    @property
    def delta(self) -> float:
        return self.diagonal + self.cross


def _spectral_integrals(spec: DissipationSpec, ir_floor: float) -> tuple[float, float]:
    """``int |g|^2 coth`` over the whole support and over its shared part."""
    sd = spec.spectral
    T = spec.temperature
    if sd.kind == "atomic":
        ws = np.array([w for w, _ in sd.points])
        vs = np.array([v for _, v in sd.points]) * coth_factor(ws, T)
        n_shared = shared_node_count(spec.shared_fraction, len(ws))
        return float(vs.sum()), float(vs[:n_shared].sum())

    warn_infrared(spec)
    lo, hi = sd.support()
    # the shared band is the low fraction of the discretization support
    shared_hi = lo + spec.shared_fraction * (hi - lo)
    if sd.kind == "ohmic":
        hi = OHMIC_TAIL * sd.omega_c
        if spec.shared_fraction >= 1.0:
            shared_hi = hi
    floor = ir_floor * spec.omega0 if T > 0 else 0.0
    lo = max(lo, floor)

    def kernel(x):
        return sd(x) * coth_factor(x, T)

    breaks = {lo, hi, min(max(shared_hi, lo), hi)}
    if sd.kind == "tabulated":
        breaks.update(w for w, _ in sd.points if lo < w < hi)
    edges = sorted(breaks)
    pieces = [(x0, x1, adaptive_gauss_legendre(kernel, x0, x1)) for x0, x1 in zip(edges, edges[1:])]
    total = sum(p for _, _, p in pieces)
    shared = sum(p for _, x1, p in pieces if x1 <= shared_hi + 1e-15 * max(1.0, abs(hi)))
    return total, shared


def delta_breakdown(
    spec: DissipationSpec, c_plus: complex, c_minus: complex, t0: float, ir_floor: float = IR_FLOOR
) -> DeltaBreakdown:
    total, shared = _spectral_integrals(spec, ir_floor)
    s1, s2 = spec.scale(0), spec.scale(1)
    t2 = t0 * t0
    diagonal = (abs(s1) ** 2 + abs(s2) ** 2) * total * t2
    cross = 4.0 * (np.conj(c_plus) * c_minus).real * (np.conj(s1) * s2).real * shared * t2
    bound = (abs(s1) + abs(s2)) ** 2 * total * t2
    return DeltaBreakdown(float(diagonal), float(cross), float(bound))


def delta_continuum(spec: DissipationSpec, c_plus: complex, c_minus: complex, t0: float, ir_floor: float = IR_FLOOR) -> float:
    return delta_breakdown(spec, c_plus, c_minus, t0, ir_floor).delta


def delta_discrete_breakdown(bath: BathDiscretization, c_plus: complex, c_minus: complex, t0: float) -> DeltaBreakdown:
    coth = bath.coth()
    re_cc = (np.conj(c_plus) * c_minus).real
    diagonal = cross = 0.0
    per_node: dict[float, list[float]] = {}
    for mode, ct in zip(bath.modes, coth):
        g1, g2 = mode.g1, mode.g2
        diagonal += sum(abs(g) ** 2 for g in mode.couplings) * ct
        if mode.shared:
            cross += 4.0 * re_cc * (np.conj(g1) * g2).real * ct
        acc = per_node.setdefault(mode.omega, [0.0, 0.0, ct])
        acc[0] += abs(g1)
        acc[1] += abs(g2)
    bound = sum((a1 + a2) ** 2 * ct for a1, a2, ct in per_node.values())
    t2 = t0 * t0
    return DeltaBreakdown(float(diagonal * t2), float(cross * t2), float(bound * t2))


def delta_discrete(bath: BathDiscretization, spec: DissipationSpec | None, c_plus: complex, c_minus: complex, t0: float) -> float:
    """Error coefficient restricted to the simulator's discrete modes.

    ``spec`` is accepted for symmetry with :func:`delta_continuum`; the bath
    already carries the temperature.
    """
    return delta_discrete_breakdown(bath, c_plus, c_minus, t0).delta


@dataclass(frozen=True)
class ErrorBudget:
    delta: float
    gamma: float
    n: int
    p_err_per_step: float
    p_tot: float
    n_opt: float
    n_opt_integer: int | None
    p_tot_min: float
    bound: float
    working_condition_ok: bool
    two_sqrt_delta_gamma: float
    gamma_over_delta: float

    @property
    def n_opt_unbounded(self) -> bool:
        return math.isinf(self.n_opt)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_opt_unbounded"] = self.n_opt_unbounded
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return d


def accumulated_error(delta: float, gamma: float, n: int) -> float:
    return delta / n + n * gamma


def error_budget(delta: float, gamma: float, n: int, bound: float = math.inf) -> ErrorBudget:
    if delta < 0 or gamma < 0:
        raise ValueError("delta and gamma must be non-negative")
    if n < 1:
        raise ValueError("n must be >= 1")
    if gamma > 0:
        n_opt = math.sqrt(delta / gamma)
        lo = max(1, math.floor(n_opt))
        n_int = min((lo, lo + 1), key=lambda k: (accumulated_error(delta, gamma, k), k))
    else:
        n_opt = math.inf
        n_int = None
    p_min = 2.0 * math.sqrt(delta * gamma)
    ratio = gamma / delta if delta > 0 else (0.0 if gamma == 0 else math.inf)
    ok = p_min < WORKING_RATIO and ratio < WORKING_RATIO
    return ErrorBudget(
        delta=delta,
        gamma=gamma,
        n=n,
        p_err_per_step=delta / n**2,
        p_tot=accumulated_error(delta, gamma, n),
        n_opt=n_opt,
        n_opt_integer=n_int,
        p_tot_min=p_min,
        bound=bound,
        working_condition_ok=ok,
        two_sqrt_delta_gamma=p_min,
        gamma_over_delta=ratio,
    )


def log2_central_binomial(n: float) -> float:
    """``log2 C(n, n/2)`` continued to real ``n`` through the Gamma function."""
    return (math.lgamma(n + 1) - 2 * math.lgamma(n / 2 + 1)) / math.log(2)


@dataclass(frozen=True)
class QubitOverhead:
    abstract_formula: float
    inverted_eq12: int
    inverted_continuous: float


def qubit_overhead(L: int) -> QubitOverhead:
    """Physical qubits needed to hold ``L`` logical qubits in a balanced code.

    ``abstract_formula`` is ``L + log2(pi L / 2) / 2``; ``inverted_eq12`` is the
    smallest even ``n`` with ``log2 C(n, n/2) >= L``; ``inverted_continuous``
    solves the same inequality over real ``n``.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    abstract = L + 0.5 * math.log2(math.pi * L / 2)
    n = 2
    while math.log2(math.comb(n, n // 2)) < L:
        n += 2
    lo, hi = float(L), float(n)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if log2_central_binomial(mid) >= L:
            hi = mid
        else:
            lo = mid
    return QubitOverhead(abstract, n, hi)

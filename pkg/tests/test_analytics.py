import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from zenoguard.analytics import (
    adaptive_gauss_legendre,
    delta_breakdown,
    delta_continuum,
    delta_discrete,
    delta_discrete_breakdown,
    error_budget,
    qubit_overhead,
)
from zenoguard.errors import NonIntegrable
from zenoguard.noise import (
    BathDiscretization,
    BathMode,
    DissipationSpec,
    SpectralDensity,
    discretize_bath,
    random_unit_vector,
)

from conftest import random_amplitudes

seeds = st.integers(0, 2**32 - 1)
SHARINGS = ["independent", "collective", ("partial", 0.3), ("partial", 0.75)]


def random_scales(rng):
    return tuple(complex(*rng.normal(size=2)) for _ in range(2))


def test_flat_closed_form_against_trapezoid():
    g0, wmax, t0 = 0.3, 2.5, 1.7
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(g0, wmax))
    w = np.linspace(0, wmax, 1_000_000)
    oracle = 2 * np.trapezoid(np.full_like(w, g0**2), w) * t0**2
    d = delta_continuum(spec, 0.6, 0.8, t0)
    assert abs(d / oracle - 1) < 1e-6
    assert abs(d - 2 * g0**2 * wmax * t0**2) < 1e-12


def test_ohmic_thermal_against_trapezoid():
    alpha, wc, temp = 0.05, 1.0, 0.4
    spec = DissipationSpec((0, 0, 1), temperature=temp, spectral=SpectralDensity.ohmic(alpha, wc))
    w = np.linspace(1e-9, 50 * wc, 1_000_000)
    kernel = alpha * w * np.exp(-w / wc) / np.tanh(w / (2 * temp))
    oracle = 2 * np.trapezoid(kernel, w)
    assert abs(delta_continuum(spec, 1, 0, 1.0) / oracle - 1) < 1e-6


def test_independent_cross_term_vanishes():
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(0.2, 1.0))
    s = 1 / math.sqrt(2)
    assert delta_breakdown(spec, s, s, 1.0).cross == 0.0


def test_collective_saturates_bound():
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.ohmic(0.1, 1.0), sharing="collective")
    s = 1 / math.sqrt(2)
    b = delta_breakdown(spec, s, s, 1.3)
    integral = b.diagonal / 2
    assert abs(b.delta - 4 * integral) < 1e-12 * b.delta
    assert abs(b.delta - b.bound) < 1e-12 * b.delta


def test_collective_antisymmetric_state_is_protected():
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(0.2, 1.0), sharing="collective")
    s = 1 / math.sqrt(2)
    assert abs(delta_continuum(spec, s, -s, 1.0)) < 1e-15


def test_discrete_zero_couplings():
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(0.0, 1.0))
    assert delta_discrete(discretize_bath(spec, 3, 1), spec, 1, 0, 1) == 0


@pytest.mark.parametrize("temp", [0.0, 0.5])
def test_discrete_single_shared_mode(temp):
    g, om = 0.13 * np.exp(0.4j), 1.2
    bath = BathDiscretization((BathMode(om, (g, g), True),), 12, temperature=temp)
    coth = 1.0 if temp == 0 else 1 / math.tanh(om / (2 * temp))
    assert abs(delta_discrete(bath, None, 1, 0, 0.9) - 2 * abs(g) ** 2 * 0.81 * coth) < 1e-15


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(SHARINGS), st.sampled_from([0.0, 0.3, 1.0]))
def test_discrete_equals_atomic_continuum(seed, sharing, temp):
    rng = np.random.default_rng(seed)
    ws = np.sort(rng.uniform(0.5, 3.0, size=4))
    assume(np.all(np.diff(ws) > 1e-6))
    pts = list(zip(ws, rng.uniform(0, 0.05, size=4)))
    spec = DissipationSpec(
        tuple(random_unit_vector(rng)),
        temperature=temp,
        spectral=SpectralDensity.atomic(pts),
        sharing=sharing,
        coupling_scales=random_scales(rng),
    )
    cp, cm = random_amplitudes(rng)
    bath = discretize_bath(spec, 4, 20)
    a = delta_discrete(bath, spec, cp, cm, 1.1)
    b = delta_continuum(spec, cp, cm, 1.1)
    assert abs(a - b) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from(SHARINGS), st.floats(0.0, 2.0))
def test_delta_scales_with_t0_squared(seed, sharing, t0):
    rng = np.random.default_rng(seed)
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.ohmic(0.1, 1.0), sharing=sharing,
                           coupling_scales=random_scales(rng))
    cp, cm = random_amplitudes(rng)
    d1 = delta_continuum(spec, cp, cm, t0)
    d2 = delta_continuum(spec, cp, cm, 2 * t0)
    assert abs(d2 - 4 * d1) <= 1e-12 * max(1.0, abs(d2))


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(SHARINGS), st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_delta_monotone_in_temperature(seed, sharing, t_a, t_b):
    rng = np.random.default_rng(seed)
    lo, hi = sorted((t_a, t_b))
    cp, cm = random_amplitudes(rng)
    scales = random_scales(rng)

    def delta_at(temp):
        spec = DissipationSpec((0, 0, 1), temperature=temp, spectral=SpectralDensity.ohmic(0.1, 1.0),
                               sharing=sharing, coupling_scales=scales)
        return delta_continuum(spec, cp, cm, 1.0)

    assert delta_at(lo) <= delta_at(hi) * (1 + 1e-9) + 1e-15


@settings(max_examples=200, deadline=None)
@given(seeds, st.sampled_from(SHARINGS), st.floats(0.0, 1.0))
def test_delta_nonnegative_and_bounded(seed, sharing, temp):
    rng = np.random.default_rng(seed)
    spec = DissipationSpec(tuple(random_unit_vector(rng)), temperature=temp,
                           spectral=SpectralDensity.ohmic(rng.uniform(0.01, 0.2), rng.uniform(0.5, 2.0)),
                           sharing=sharing, coupling_scales=random_scales(rng))
    cp, cm = random_amplitudes(rng)
    b = delta_breakdown(spec, cp, cm, 1.0)
    assert b.delta >= 0
    assert b.delta <= b.bound + 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from(SHARINGS))
def test_discrete_delta_bounded(seed, sharing):
    rng = np.random.default_rng(seed)
    spec = DissipationSpec((1, 0, 0), spectral=SpectralDensity.flat(0.2, 2.0), sharing=sharing,
                           coupling_scales=random_scales(rng))
    cp, cm = random_amplitudes(rng)
    b = delta_discrete_breakdown(discretize_bath(spec, 3, 1), cp, cm, 1.0)
    assert 0 <= b.delta <= b.bound + 1e-9


def test_infrared_warning_for_flat_thermal():
    spec = DissipationSpec((1, 0, 0), temperature=0.5, spectral=SpectralDensity.flat(0.1, 1.0))
    with pytest.warns(RuntimeWarning):
        delta_continuum(spec, 1, 0, 1.0)


def test_no_infrared_warning_for_ohmic():
    spec = DissipationSpec((1, 0, 0), temperature=0.5, spectral=SpectralDensity.ohmic(0.1, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        delta_continuum(spec, 1, 0, 1.0)


def test_quadrature_polynomial_exact():
    assert abs(adaptive_gauss_legendre(lambda x: x**5 - 2 * x, 0.0, 2.0) - (64 / 6 - 4)) < 1e-12


def test_quadrature_nonintegrable():
    with pytest.raises(NonIntegrable):
        adaptive_gauss_legendre(lambda x: 1.0 / x, 0.0, 1.0)


def test_error_budget_example():
    b = error_budget(0.01, 1e-6, 10)
    assert abs(b.n_opt - 100) < 1e-9
    assert abs(b.p_tot_min - 2e-4) < 1e-15
    assert b.n_opt_integer == 100
    assert b.working_condition_ok
    assert abs(b.p_err_per_step - 1e-4) < 1e-18
    assert abs(b.p_tot - (1e-3 + 1e-5)) < 1e-15


def test_error_budget_without_test_noise():
    b = error_budget(0.02, 0.0, 4)
    assert b.n_opt_unbounded and b.n_opt_integer is None
    assert b.to_dict()["n_opt"] == "inf"
    ps = [error_budget(0.02, 0.0, n).p_tot for n in range(1, 50)]
    assert all(q < p for p, q in zip(ps, ps[1:]))


def test_error_budget_working_condition_flags():
    assert not error_budget(0.01, 0.002, 3).working_condition_ok  # gamma / delta = 0.2
    assert not error_budget(10.0, 1e-3, 3).working_condition_ok  # 2 sqrt(delta gamma) = 0.2


def test_error_budget_rejects_negative():
    with pytest.raises(ValueError):
        error_budget(-1.0, 0.0, 1)


def test_error_budget_minimizer_matches_scan():
    rng = np.random.default_rng(5)
    for _ in range(100):
        delta = 10 ** rng.uniform(-4, 1)
        gamma = delta * 10 ** rng.uniform(-7, -1.01)
        b = error_budget(delta, gamma, 1)
        ns = np.arange(1, int(10 * b.n_opt) + 2)
        best = int(ns[np.argmin(delta / ns + ns * gamma)])
        assert abs(best - round(b.n_opt)) <= 1
        assert best == b.n_opt_integer


def test_qubit_overhead_single_logical():
    q = qubit_overhead(1)
    assert abs(q.abstract_formula - (1 + 0.5 * math.log2(math.pi / 2))) < 1e-15
    assert abs(q.abstract_formula - 1.326) < 1e-3
    assert q.inverted_eq12 == 2


@pytest.mark.parametrize("L", [4, 8, 16])
def test_qubit_overhead_grows_like_half_log(L):
    q = qubit_overhead(L)
    assert abs(q.inverted_continuous - L - 0.5 * math.log2(L)) <= 1
    assert q.inverted_eq12 % 2 == 0
    assert q.inverted_continuous <= q.inverted_eq12 < q.inverted_continuous + 2
    assert math.log2(math.comb(q.inverted_eq12, q.inverted_eq12 // 2)) >= L
    assert math.log2(math.comb(q.inverted_eq12 - 2, q.inverted_eq12 // 2 - 1)) < L

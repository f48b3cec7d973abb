import math

import numpy as np
import pytest

from zenoguard.noise import DissipationSpec, DriveSpec, SpectralDensity, discretize_bath
from zenoguard.zeno import ProtocolSetup, ZenoConfig

ACCEPTANCE_LINES = []

# |g|^2 per qubit for the reference configuration; delta = 2 |g|^2 T0^2 = 0.05
REF_G2 = 0.025
REF_OMEGA_MAX = 2.0


def reference_setup(coupling_scale=1.0, n_tests=64, gamma=0.0, initial=(2**-0.5, 2**-0.5), policy="track-both"):
    """Two code qubits, one independent mode per qubit, T = 0, lambda = x."""
    g0 = coupling_scale * math.sqrt(REF_G2 / REF_OMEGA_MAX)
    spec = DissipationSpec((1.0, 0.0, 0.0), spectral=SpectralDensity.flat(g0, REF_OMEGA_MAX), sharing="independent")
    bath = discretize_bath(spec, 1, 2)
    return ProtocolSetup(spec, bath, DriveSpec.matched(1.0), initial, ZenoConfig(1.0, n_tests, gamma, policy, 11))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)


def random_ket(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_amplitudes(rng):
    v = random_ket(rng, 2)
    return complex(v[0]), complex(v[1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from pendula_lab import ChainConfig, ExcitationConfig, build_basis
from pendula_lab.averaging import build_averaged_hamiltonian

# acceptance results, printed once at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[1].rstrip(":").split(".")[0]), s)):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cfg():
    return ChainConfig()


@pytest.fixture(scope="session")
def basis():
    return build_basis(30)


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("coeffs")


@pytest.fixture(scope="session")
def avg(cfg, basis, cache_dir):
    return build_averaged_hamiltonian(cfg, 6, "saddle", 26, basis, cache_dir)


@pytest.fixture(scope="session")
def avg_eq(cfg, basis, cache_dir):
    return build_averaged_hamiltonian(cfg, 6, "equilibrium", 26, basis, cache_dir)


@pytest.fixture(scope="session")
def w6(basis):
    return float(basis.omega[6])


@pytest.fixture(scope="session")
def exc(cfg, w6):
    return ExcitationConfig.from_detuning(cfg, 6, 2.5, 0.5 / w6, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def theta_e(cfg):
    return math.acos(cfg.d0 - 1.0)

import math

import numpy as np
import pytest

from cavswap import SystemParams, swap_configuration


def random_params(rng, lossy=None, swap=False):
    """Draw parameters in units of kappa with a random overall scale."""
    kappa = float(rng.uniform(0.2, 5.0))
    gamma = 0.0 if lossy is False else float(rng.uniform(0.0, 2.0)) * kappa
    if lossy is True and gamma == 0.0:
        gamma = 0.3 * kappa
    k_c = float(rng.uniform(-50, 50))
    delta_e = float(rng.uniform(-3, 3)) * kappa
    if swap:
        return swap_configuration(float(rng.uniform(0.1, 30)) * kappa, k_c, delta_e, kappa, gamma)
    return SystemParams(
        k_c=k_c,
        delta_e=delta_e,
        kappa=kappa,
        gamma=gamma,
        lambda_L=float(rng.uniform(0, 30)) * kappa,
        lambda_R=float(rng.uniform(0, 30)) * kappa,
        theta_L=float(rng.uniform(-math.pi, math.pi)),
        theta_R=float(rng.uniform(-math.pi, math.pi)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig2_params():
    return swap_configuration(10.0, gamma=0.5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

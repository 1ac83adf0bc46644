import os
import subprocess
import sys

import numpy as np
import pytest

from cavswap import _kernels


def _random_arrowhead(rng, n, lossy=False):
    diag = rng.normal(size=n) * 3 + 0j
    if lossy:
        diag[0] -= 0.4j
    coupling = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 0.3
    coupling[0] = 0
    psi0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    return diag, coupling, psi0 / np.linalg.norm(psi0)


def _dense(diag, coupling):
    h = np.diag(diag)
    h[0, 1:] = coupling[1:]
    h[1:, 0] = np.conj(coupling[1:])
    return h


def _exact(diag, coupling, psi0, t):
    # independent route: eigen-decomposition of the dense matrix
    w, v = np.linalg.eig(_dense(diag, coupling))
    return v @ (np.exp(-1j * w * t) * np.linalg.solve(v, psi0))


@pytest.mark.parametrize("lossy", [False, True])
def test_numpy_kernel_matches_exact_evolution(rng, lossy):
    diag, coupling, psi0 = _random_arrowhead(rng, 41, lossy)
    psi, excited, norms = _kernels.rk4_arrowhead_numpy(diag, coupling, psi0, 1e-3, 2000, 100)
    np.testing.assert_allclose(psi, _exact(diag, coupling, psi0, 2.0), atol=1e-9)
    assert excited.shape == norms.shape == (21,)
    assert excited[-1] == pytest.approx(abs(psi[0]) ** 2)
    if lossy:
        assert np.all(np.diff(norms) <= 1e-15)
    else:
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("lossy", [False, True])
def test_numba_kernel_matches_numpy(rng, lossy):
    diag, coupling, psi0 = _random_arrowhead(rng, 301, lossy)
    a = _kernels.rk4_arrowhead_numpy(diag, coupling, psi0, 2e-3, 700, 7)
    b = _kernels.rk4_arrowhead_numba(diag, coupling, psi0, 2e-3, 700, 7)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=0, atol=1e-12)


def test_fourth_order_convergence(rng):
    diag, coupling, psi0 = _random_arrowhead(rng, 21)
    exact = _exact(diag, coupling, psi0, 1.0)
    errs = []
    for n in (50, 100, 200):
        psi, _, _ = _kernels.propagate_rk4(diag, coupling, psi0, 1.0 / n, n)
        errs.append(np.max(np.abs(psi - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7) and np.all(orders < 4.3)


def test_record_every_includes_start(rng):
    diag, coupling, psi0 = _random_arrowhead(rng, 5)
    _, excited, norms = _kernels.propagate_rk4(diag, coupling, psi0, 0.01, 10, 5)
    assert excited.shape == (3,)
    assert excited[0] == pytest.approx(abs(psi0[0]) ** 2)


@pytest.mark.parametrize("value, expected", [("1", "numpy"), ("yes", "numpy"), ("0", None), ("", None)])
def test_env_flag_selects_backend(value, expected):
    env = dict(os.environ, CAVSWAP_DISABLE_NUMBA=value)
    out = subprocess.run(
        [sys.executable, "-c", "from cavswap import _kernels; print(_kernels.backend())"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.strip()
    if expected is None:
        expected = "numba" if _kernels.HAVE_NUMBA else "numpy"
    assert out == expected

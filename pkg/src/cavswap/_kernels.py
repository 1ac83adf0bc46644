"""Hot loops for the time-domain oracle.

The single-excitation Hamiltonians are arrowhead matrices: one excited level
coupled to many mutually uncoupled continuum modes. A matrix-vector product
is therefore O(n), and the RK4 stepping loop dominates runtime.

Both a numba kernel and a plain numpy kernel are defined. ``propagate_rk4``
points at the numba one unless numba is missing or the environment variable
``CAVSWAP_DISABLE_NUMBA`` is set to a truthy value.
"""

from __future__ import annotations

import os

import numpy as np

_TRUTHY = {"1", "true", "yes", "on"}
NUMBA_DISABLED = os.environ.get("CAVSWAP_DISABLE_NUMBA", "").strip().lower() in _TRUTHY

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def _arrowhead_apply_numpy(diag, coupling, x, out):
    # out = -i H x, with H[0, j] = coupling[j], H[j, 0] = conj(coupling[j]), coupling[0] unused
    out[0] = -1j * (diag[0] * x[0] + np.dot(coupling[1:], x[1:]))
    out[1:] = -1j * (np.conj(coupling[1:]) * x[0] + diag[1:] * x[1:])
    return out


def rk4_arrowhead_numpy(diag, coupling, psi0, dt, n_steps, record_every):
    """Classic RK4 for ``i dpsi/dt = H psi`` with an arrowhead ``H``.

    Returns the final state and the excited-level population and total norm
    sampled every ``record_every`` steps (including the initial state).
    """
    psi = np.array(psi0, dtype=np.complex128)
    diag = np.asarray(diag, dtype=np.complex128)
    coupling = np.asarray(coupling, dtype=np.complex128)
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    n_rec = n_steps // record_every + 1
    excited = np.empty(n_rec)
    norms = np.empty(n_rec)
    excited[0] = abs(psi[0]) ** 2
    norms[0] = np.vdot(psi, psi).real
    rec = 1
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        _arrowhead_apply_numpy(diag, coupling, psi, k1)
        _arrowhead_apply_numpy(diag, coupling, psi + half * k1, k2)
        _arrowhead_apply_numpy(diag, coupling, psi + half * k2, k3)
        _arrowhead_apply_numpy(diag, coupling, psi + dt * k3, k4)
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0:
            excited[rec] = abs(psi[0]) ** 2
            norms[rec] = np.vdot(psi, psi).real
            rec += 1
    return psi, excited, norms


def _rk4_arrowhead_loops(diag, coupling, psi0, dt, n_steps, record_every):
    # One fused pass per RK4 stage: the row updates of stage s also accumulate
    # the excited-level row sum needed by stage s + 1.
    n = psi0.shape[0]
    psi = psi0.copy()
    y = np.empty(n, dtype=np.complex128)
    acc = np.empty(n, dtype=np.complex128)
    cconj = np.conj(coupling)
    n_rec = n_steps // record_every + 1
    excited = np.empty(n_rec)
    norms = np.empty(n_rec)
    mi = -1j
    h = 0.5 * dt
    w1 = dt / 6.0
    w2 = dt / 3.0

    top = diag[0] * psi[0]
    nrm = psi[0].real ** 2 + psi[0].imag ** 2
    for j in range(1, n):
        top += coupling[j] * psi[j]
        nrm += psi[j].real ** 2 + psi[j].imag ** 2
    excited[0] = psi[0].real ** 2 + psi[0].imag ** 2
    norms[0] = nrm
    rec = 1
    for step in range(1, n_steps + 1):
        # stage 1 reads psi
        x0 = psi[0]
        k0 = mi * top
        acc[0] = w1 * k0
        y0 = psi[0] + h * k0
        nxt = 0j
        for j in range(1, n):
            kj = mi * (cconj[j] * x0 + diag[j] * psi[j])
            acc[j] = w1 * kj
            yj = psi[j] + h * kj
            y[j] = yj
            nxt += coupling[j] * yj
        y[0] = y0
        top = diag[0] * y0 + nxt
        # stages 2 and 3 read y and overwrite it in place
        for c_next in (h, dt):
            x0 = y[0]
            k0 = mi * top
            acc[0] += w2 * k0
            y0 = psi[0] + c_next * k0
            nxt = 0j
            for j in range(1, n):
                kj = mi * (cconj[j] * x0 + diag[j] * y[j])
                acc[j] += w2 * kj
                yj = psi[j] + c_next * kj
                y[j] = yj
                nxt += coupling[j] * yj
            y[0] = y0
            top = diag[0] * y0 + nxt
        # stage 4 finishes the step
        x0 = y[0]
        k0 = mi * top
        psi[0] += acc[0] + w1 * k0
        nxt = 0j
        nrm = psi[0].real ** 2 + psi[0].imag ** 2
        for j in range(1, n):
            kj = mi * (cconj[j] * x0 + diag[j] * y[j])
            pj = psi[j] + acc[j] + w1 * kj
            psi[j] = pj
            nxt += coupling[j] * pj
            nrm += pj.real ** 2 + pj.imag ** 2
        top = diag[0] * psi[0] + nxt
        if step % record_every == 0:
            excited[rec] = psi[0].real ** 2 + psi[0].imag ** 2
            norms[rec] = nrm
            rec += 1
    return psi, excited, norms


if HAVE_NUMBA:
    rk4_arrowhead_numba = numba.njit(cache=True, fastmath=True)(_rk4_arrowhead_loops)
else:  # pragma: no cover
    rk4_arrowhead_numba = None


def propagate_rk4(diag, coupling, psi0, dt, n_steps, record_every=1):
    """Dispatch to the numba kernel when enabled, otherwise to numpy."""
    diag = np.ascontiguousarray(diag, dtype=np.complex128)
    coupling = np.ascontiguousarray(coupling, dtype=np.complex128)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    if USE_NUMBA:
        return rk4_arrowhead_numba(diag, coupling, psi0, float(dt), int(n_steps), int(record_every))
    return rk4_arrowhead_numpy(diag, coupling, psi0, float(dt), int(n_steps), int(record_every))


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"

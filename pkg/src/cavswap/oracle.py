"""Brute-force time-domain check of the closed-form scattering results.

The continuum is replaced by ``n_modes`` equally spaced modes with couplings
``g(k_j) sqrt(dk)``. A photon packet is loaded into the modes, the
single-excitation Schrodinger equation is integrated with fixed-step RK4, and
the free evolution is divided out of the final mode amplitudes. Nothing here
uses the resolvent or the phase formula; they appear only as the comparison
target.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import SystemParams
from .scattering import coupling_amplitude, interaction_strength, phase_factor, transfer_elements
from .spectra import GaussianPacket

# modes whose packet amplitude is below this fraction of the peak are not compared
SUPPORT_REL = 1e-2
EDGE_AMPLITUDE_TOL = 1e-8
RESIDUAL_POPULATION_TOL = 1e-4
NORM_DRIFT_TOL = 1e-6
# x_0 >= X0_WIDTHS / kappa_in and t_final >= 2 x_0 + TAIL_LIFETIMES / kappa
X0_WIDTHS = 5.0
TAIL_LIFETIMES = 10.0
DEFAULT_TAIL = 20.0
DEFAULT_KAPPA_IN = 1.0
# default RK4 step keeps |H_jj| dt below this
PHASE_PER_STEP = 0.05


class OracleError(RuntimeError):
    """The discretized run cannot represent the asymptotic scattering problem."""


class ScatteringIncompleteError(OracleError):
    """The run finished but failed a physical sanity check (norm drift, residual excitation)."""


class GridRecurrenceError(OracleError):
    """The run is long enough for the discrete spectrum to rephase, so results would be invalid."""


@dataclass(frozen=True)
class OracleGrid:
    """Equally spaced continuum modes plus integrator settings.

    ``n_modes`` is odd so that a centred grid contains ``k_c`` itself.
    """

    k_min: float
    k_max: float
    n_modes: int
    dt: float
    t_final: float

    def __post_init__(self):
        if not self.k_max > self.k_min:
            raise OracleError("grid needs k_min < k_max")
        if self.n_modes < 3 or self.n_modes % 2 == 0:
            raise OracleError("n_modes must be odd and at least 3")
        if not (self.dt > 0 and self.t_final > 0):
            raise OracleError("dt and t_final must be positive")
        if self.spacing * self.t_final >= math.pi:
            raise GridRecurrenceError(
                f"t_final = {self.t_final:g} reaches the grid recurrence time "
                f"pi/dk = {math.pi / self.spacing:g}"
            )

    @classmethod
    def centered(cls, k_c: float, half_span: float, n_modes: int, t_final: float, dt: float | None = None):
        if dt is None:
            dt = PHASE_PER_STEP / half_span
        return cls(k_c - half_span, k_c + half_span, int(n_modes), float(dt), float(t_final))

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.n_modes - 1)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_modes)

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_final / self.dt - 1e-9)))

    @property
    def step(self) -> float:
        """Actual step: ``t_final`` split into ``n_steps`` equal pieces."""
        return self.t_final / self.n_steps

    def refined(self, factor: int = 2) -> "OracleGrid":
        """Same span with ``factor`` times more intervals and the same time settings."""
        n = (self.n_modes - 1) * factor + 1
        return OracleGrid(self.k_min, self.k_max, n, self.dt, self.t_final)


@dataclass(frozen=True)
class ArrowheadHamiltonian:
    """Excited level (index 0) coupled to continuum modes (indices 1..).

    ``diag`` holds the energies in the frame rotating at ``k_c``; ``coupling[j]``
    is the matrix element ``<e|H|mode j>`` (``coupling[0]`` is unused).
    """

    diag: np.ndarray
    coupling: np.ndarray
    k: np.ndarray

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def lossless(self) -> bool:
        return bool(np.all(self.diag.imag == 0))

    def to_dense(self) -> np.ndarray:
        h = np.diag(self.diag).astype(complex)
        h[0, 1:] = self.coupling[1:]
        h[1:, 0] = np.conj(self.coupling[1:])
        return h


def _check_grid(p: SystemParams, g: OracleGrid) -> None:
    if not g.k_min < p.k_c < g.k_max:
        raise OracleError("grid must bracket k_c")


def build_hamiltonian(p: SystemParams, g: OracleGrid) -> ArrowheadHamiltonian:
    """Excited level plus the bright continuum, ``V(k_j) sqrt(dk)`` couplings."""
    _check_grid(p, g)
    k = g.k
    diag = np.concatenate([[p.complex_detuning], k - p.k_c]).astype(complex)
    coupling = np.zeros(g.n_modes + 1, dtype=complex)
    coupling[1:] = interaction_strength(k, p) * math.sqrt(g.spacing)
    return ArrowheadHamiltonian(diag, coupling, k)


def build_full_hamiltonian(p: SystemParams, g: OracleGrid) -> ArrowheadHamiltonian:
    """Both polarization continua: modes ``1..N`` are ``|L;k_L>``, ``N+1..2N`` are ``|R;k_R>``.

    The sectors ``|L;k_R>`` and ``|R;k_L>`` never couple and are left out.
    """
    _check_grid(p, g)
    k = g.k
    dk = k - p.k_c
    diag = np.concatenate([[p.complex_detuning], dk, dk]).astype(complex)
    root = math.sqrt(g.spacing)
    coupling = np.concatenate(
        [[0.0], coupling_amplitude(k, p, "L") * root, coupling_amplitude(k, p, "R") * root]
    ).astype(complex)
    return ArrowheadHamiltonian(diag, coupling, np.concatenate([k, k]))


@dataclass(frozen=True)
class OracleResult:
    final_amplitudes: np.ndarray
    excited_population_history: np.ndarray
    norm_history: np.ndarray
    times: np.ndarray
    final_excited: complex

    @property
    def final_norm(self) -> float:
        return float(self.norm_history[-1])


def propagate(psi0, h: ArrowheadHamiltonian, g: OracleGrid, n_records: int = 200) -> OracleResult:
    """Integrate ``i dpsi/dt = H psi`` up to ``t_final`` with fixed-step RK4.

    Mode amplitudes are reported with the free phase ``exp(-i dk_j t_final)``
    divided out.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.dim,):
        raise OracleError(f"initial state has shape {psi0.shape}, expected ({h.dim},)")
    n0 = float(np.vdot(psi0, psi0).real)
    if abs(n0 - 1.0) > 1e-6:
        raise OracleError(f"initial state is not normalized (norm^2 = {n0:.9g})")
    n_steps = g.n_steps
    dt = g.step
    every = max(1, n_steps // n_records)
    times = np.arange(n_steps // every + 1) * every * dt
    if not np.any(h.coupling[1:]):
        # uncoupled: every level only picks up its own phase
        e0 = psi0[0] * np.exp(-1j * h.diag[0] * times)
        excited = np.abs(e0) ** 2
        norms = excited + float(np.vdot(psi0[1:], psi0[1:]).real)
        return OracleResult(psi0[1:].copy(), excited, norms, times, complex(e0[-1]))
    psi, excited, norms = _kernels.propagate_rk4(h.diag, h.coupling, psi0, dt, n_steps, every)
    if h.lossless and np.max(np.abs(norms - norms[0])) > NORM_DRIFT_TOL:
        raise ScatteringIncompleteError("norm drift exceeds tolerance; reduce dt")
    modes = psi[1:] * np.exp(1j * h.diag[1:].real * g.t_final)
    return OracleResult(modes, excited, norms, times, complex(psi[0]))


def oracle_packet(k_peak: float, kappa_in: float) -> GaussianPacket:
    """Gaussian packet placed ``5 / kappa_in`` away so the atom starts effectively unexcited."""
    return GaussianPacket(k_peak, kappa_in, X0_WIDTHS / kappa_in)


def default_grid(p: SystemParams, w: GaussianPacket, half_span: float = 40.0, n_modes: int = 4001) -> OracleGrid:
    """Grid of ``+-half_span`` (in units of kappa) around ``k_c``.

    The run lasts ``2 x_0 + 20 / kappa``: twice the minimum tail, which the
    residual-population guard alone would accept, because the Rabi sidebands
    decay at only ``kappa / 2``.
    """
    t_final = 2 * w.x_0 + DEFAULT_TAIL / p.kappa
    return OracleGrid.centered(p.k_c, half_span * p.kappa, n_modes, t_final)


def _check_packet(p: SystemParams, g: OracleGrid, w: GaussianPacket) -> np.ndarray:
    if not isinstance(w, GaussianPacket):
        raise OracleError("the oracle needs an analytic packet")
    if w.x_0 < X0_WIDTHS / w.kappa_in * (1 - 1e-12):
        raise OracleError(f"x_0 must be at least {X0_WIDTHS:g}/kappa_in")
    if g.t_final < (2 * w.x_0 + TAIL_LIFETIMES / p.kappa) * (1 - 1e-12):
        raise OracleError("t_final too short for the packet to leave the cavity")
    f = w.amplitude(g.k)
    if max(abs(f[0]), abs(f[-1])) > EDGE_AMPLITUDE_TOL:
        raise OracleError("packet leaks off the grid")
    return f


def _check_residual(res: OracleResult) -> None:
    pop = res.excited_population_history[-1]
    if pop > RESIDUAL_POPULATION_TOL:
        raise ScatteringIncompleteError(f"scattering incomplete: excited population {pop:.3e} at t_final")


@dataclass(frozen=True)
class PhaseComparison:
    k: np.ndarray
    ratio: np.ndarray
    analytic: np.ndarray
    result: OracleResult

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.ratio - self.analytic)

    @property
    def max_abs_error(self) -> float:
        return float(np.max(self.abs_error)) if self.k.size else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "re_ratio", "im_ratio", "re_analytic", "im_analytic", "abs_error"])
        for k, r, a, e in zip(self.k, self.ratio, self.analytic, self.abs_error):
            writer.writerow([f"{x + 0.0:.17g}" for x in (k, r.real, r.imag, a.real, a.imag, e)])
        return buf.getvalue()


def _ratio(out, inp):
    # complex division z / z is not exactly 1 in floating point
    return np.where(out == inp, 1.0 + 0j, out / inp)


def oracle_phase(p: SystemParams, g: OracleGrid, w: GaussianPacket) -> PhaseComparison:
    """Estimate ``exp(i delta_s(k_j))`` by scattering a bright-state packet.

    The analytic factor is attached for comparison only.
    """
    f = _check_packet(p, g, w)
    h = build_hamiltonian(p, g)
    root = math.sqrt(g.spacing)
    # The real coupling V(k) is acausal: in that gauge a packet "at x_0" already
    # drives the atom at t = 0. Loading it in the gauge where the coupling is
    # proportional to 1/(dk + i kappa) keeps the atom dark until the packet arrives.
    z = g.k - p.k_c + 1j * p.kappa
    psi0 = np.concatenate([[0.0], f * (np.abs(z) / z) * root])
    psi0 /= np.linalg.norm(psi0)
    res = propagate(psi0, h, g)
    _check_residual(res)
    mask = np.abs(f) >= SUPPORT_REL * np.max(np.abs(f))
    ratio = _ratio(res.final_amplitudes[mask], psi0[1:][mask])
    k = g.k[mask]
    return PhaseComparison(k, ratio, np.asarray(phase_factor(k, p), dtype=complex), res)


@dataclass(frozen=True)
class PacketScatter:
    """Output of one two-polarization run, split into the two coupled sectors."""

    k: np.ndarray
    input_L: np.ndarray
    input_R: np.ndarray
    out_L: np.ndarray
    out_R: np.ndarray
    result: OracleResult


def scatter_packet_full(
    p: SystemParams, g: OracleGrid, w: GaussianPacket, c_L: complex, c_R: complex
) -> PacketScatter:
    """Scatter ``packet x (c_L |L;k_L> + c_R |R;k_R>)`` in the two-continuum model."""
    f = _check_packet(p, g, w)
    h = build_full_hamiltonian(p, g)
    n = g.n_modes
    root = math.sqrt(g.spacing)
    psi0 = np.concatenate([[0.0], c_L * f * root, c_R * f * root])
    psi0 /= np.linalg.norm(psi0)
    res = propagate(psi0, h, g)
    _check_residual(res)
    amp = res.final_amplitudes
    return PacketScatter(g.k, psi0[1 : n + 1], psi0[n + 1 :], amp[:n], amp[n:], res)


@dataclass(frozen=True)
class TransferCheck:
    k: np.ndarray
    oracle: np.ndarray
    analytic: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        """Largest entry-wise deviation of the 2x2 action at each ``k``."""
        return np.max(np.abs(self.oracle - self.analytic), axis=(1, 2))

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviation)) if self.k.size else 0.0


def oracle_transfer_check(p: SystemParams, g: OracleGrid, w: GaussianPacket) -> TransferCheck:
    """Compare the scattered action on ``|L;k_L>`` and ``|R;k_R>`` packets with ``transfer_matrix``."""
    from_L = scatter_packet_full(p, g, w, 1.0, 0.0)
    from_R = scatter_packet_full(p, g, w, 0.0, 1.0)
    f = w.amplitude(g.k)
    mask = np.abs(f) >= SUPPORT_REL * np.max(np.abs(f))
    block = np.empty((int(mask.sum()), 2, 2), dtype=complex)
    block[:, 0, 0] = _ratio(from_L.out_L[mask], from_L.input_L[mask])
    block[:, 1, 0] = _ratio(from_L.out_R[mask], from_L.input_L[mask])
    block[:, 0, 1] = _ratio(from_R.out_L[mask], from_R.input_R[mask])
    block[:, 1, 1] = _ratio(from_R.out_R[mask], from_R.input_R[mask])
    k = g.k[mask]
    t_ll, t_lr, t_rl, t_rr = (np.asarray(x, dtype=complex) for x in transfer_elements(k, p))
    analytic = np.stack([np.stack([t_ll, t_lr], -1), np.stack([t_rl, t_rr], -1)], -2)
    return TransferCheck(k, block, analytic)


__all__ = [
    "ArrowheadHamiltonian",
    "GridRecurrenceError",
    "OracleError",
    "OracleGrid",
    "OracleResult",
    "PacketScatter",
    "PhaseComparison",
    "ScatteringIncompleteError",
    "TransferCheck",
    "build_full_hamiltonian",
    "build_hamiltonian",
    "default_grid",
    "oracle_packet",
    "oracle_phase",
    "oracle_transfer_check",
    "propagate",
    "scatter_packet_full",
]

"""Qubit swap and photon-atom entangling protocols built on the scattering kernel."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    AtomQubit,
    JointKState,
    ParameterError,
    PolarizationQubit,
    SystemParams,
    is_swap_configuration,
    swap_configuration,
)
from .scattering import apply_scattering, transfer_elements
from .spectra import GaussianPacket, SampledPacket, Wavepacket, gaussian_spectrum, xi_integral

INV_PHI = (math.sqrt(5) - 1) / 2
# entangling brackets in units of kappa; they exclude the pi-shift point at dk = 0
BALANCE_BRACKET = (0.25, 4.0)


class NoBalancedPointError(RuntimeError):
    """No sign change of ``|t_LL| - |t_RL|`` inside the bracket."""


@dataclass(frozen=True)
class SwapRoots:
    roots: list
    method: str
    complex_pair_omitted: bool = False

    @property
    def detunings(self) -> list:
        return list(self.roots)


@dataclass(frozen=True)
class EntanglePoint:
    k: float
    theta: float
    balance_residual: float
    detuning: float


@dataclass(frozen=True)
class FigureOfMerit:
    value: float
    xi: complex
    eta: float | None = None


def _require_swap(p: SystemParams, allow_uncoupled: bool = True) -> None:
    # with both couplings zero t_LL = 1 identically and the closed forms still hold
    if allow_uncoupled and p.coupling_sq == 0.0:
        return
    if not is_swap_configuration(p):
        raise ParameterError(
            "params",
            "swap configuration required: lambda_L = lambda_R > 0 and theta_L - theta_R = pi",
        )


def eta_overlap(a: AtomQubit, c: PolarizationQubit) -> float:
    """Weight of the interacting sector, ``|A_L C_L - A_R C_R|^2``."""
    return float(min(1.0, abs(a.A_L * c.C_L - a.A_R * c.C_R) ** 2))


def _t_ll(dk: float, p: SystemParams) -> complex:
    return complex(transfer_elements(p.k_c + dk, p)[0])


def golden_section_min(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 400):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns the abscissa."""
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2


def _lossless_swap_detunings(p: SystemParams):
    """Real roots of ``(dk - delta_e)(dk^2 + kappa^2) - dk Lambda = 0``."""
    kap2 = p.kappa**2
    lam2 = p.coupling_sq
    if p.delta_e == 0.0:
        disc = lam2 - kap2
        if abs(disc) <= 1e-12 * kap2:
            # triple root at dk = 0
            return [0.0], False
        if disc > 0:
            r = math.sqrt(disc)
            return [-r, 0.0, r], False
        return [0.0], disc < 0
    coeffs = [1.0, -p.delta_e, kap2 - lam2, -p.delta_e * kap2]
    roots = np.roots(coeffs)
    real = sorted(float(z.real) for z in roots if abs(z.imag) <= 1e-9 * max(1.0, abs(z)))
    polished = []
    for x in real:
        for _ in range(3):
            fx = ((x - p.delta_e) * (x * x + kap2)) - x * lam2
            dfx = (x * x + kap2) + 2 * x * (x - p.delta_e) - lam2
            if dfx == 0:
                break
            x -= fx / dfx
        polished.append(x)
    return polished, len(polished) < 3


def swap_frequencies(p: SystemParams) -> SwapRoots:
    """Frequencies at which the bright state picks up a pi phase.

    Lossless parameters use the exact cubic; with ``gamma > 0`` each lossless
    root seeds a golden-section search for the local minimum of ``|t_LL|``.
    """
    _require_swap(p, allow_uncoupled=False)
    dks, omitted = _lossless_swap_detunings(p)
    if not p.lossy:
        return SwapRoots([p.k_c + x for x in dks], "exact-cubic", omitted)
    refined = []
    for i, x in enumerate(dks):
        gaps = [abs(x - y) for j, y in enumerate(dks) if j != i]
        half = 0.5 * min([p.kappa] + [g / 2 for g in gaps if g > 0])
        xm = golden_section_min(lambda t: abs(_t_ll(t, p)), x - half, x + half)
        refined.append(p.k_c + xm)
    return SwapRoots(refined, "numeric-minimization", omitted)


def fidelity_from_overlap(xi: complex, eta: float) -> float:
    """``1 - 2 Re(xi) eta + |xi|^2 eta^2``, which equals ``|1 - xi eta|^2``."""
    return float(1 - 2 * xi.real * eta + abs(xi) ** 2 * eta**2)


def bell_from_overlap(xi: complex) -> float:
    """Bell-target overlap ``1/2 + |xi|^2 - Re(xi) + Im(xi)``."""
    return float(0.5 + abs(xi) ** 2 - xi.real + xi.imag)


def swap_fidelity(
    a: AtomQubit, c: PolarizationQubit, w: Wavepacket, p: SystemParams
) -> FigureOfMerit:
    """Overlap ``|<swap target|out>|^2`` for a product input."""
    _require_swap(p)
    eta = eta_overlap(a, c)
    xi = xi_integral(w, p)
    return FigureOfMerit(fidelity_from_overlap(xi, eta), xi, eta)


def min_swap_fidelity(w: Wavepacket, p: SystemParams) -> FigureOfMerit:
    """Worst case over input qubits, reached at ``eta = 1``: ``|1 - xi|^2``."""
    _require_swap(p)
    xi = xi_integral(w, p)
    return FigureOfMerit(fidelity_from_overlap(xi, 1.0), xi, 1.0)


def _balance(dk: float, p: SystemParams) -> float:
    t_ll, _, t_rl, _ = transfer_elements(p.k_c + dk, p)
    return abs(t_ll) - abs(t_rl)


def find_balance_point(p: SystemParams, lo: float, hi: float, xtol: float = 1e-13) -> EntanglePoint:
    """Bisect ``|t_LL| - |t_RL|`` for a sign change between detunings ``lo`` and ``hi``."""
    f_lo, f_hi = _balance(lo, p), _balance(hi, p)
    if f_lo == 0:
        hi = lo
    elif f_hi == 0:
        lo = hi
    elif (f_lo > 0) == (f_hi > 0):
        raise NoBalancedPointError(f"no balanced point in [{lo:g}, {hi:g}]")
    while hi - lo > xtol * max(1.0, abs(lo) + abs(hi)):
        mid = 0.5 * (lo + hi)
        f_mid = _balance(mid, p)
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    dk = 0.5 * (lo + hi)
    t_ll, _, t_rl, _ = transfer_elements(p.k_c + dk, p)
    theta = cmath.phase(t_rl / t_ll)
    if theta == -math.pi:
        theta = math.pi
    return EntanglePoint(p.k_c + dk, theta, abs(abs(t_ll) - abs(t_rl)), dk)


def entangle_frequencies(p: SystemParams) -> list:
    """Balanced points near ``k_c + kappa`` and ``k_c - kappa``.

    A bracket without a sign change (weak coupling) contributes nothing, so
    the list may be empty.
    """
    _require_swap(p)
    lo, hi = (b * p.kappa for b in BALANCE_BRACKET)
    points = []
    for bracket in ((lo, hi), (-hi, -lo)):
        try:
            points.append(find_balance_point(p, *bracket))
        except NoBalancedPointError:
            continue
    return points


def bell_probability(w: Wavepacket, p: SystemParams) -> FigureOfMerit:
    """Overlap of the scattered ``|L> x packet`` with ``(|L,k_L> - i |R,k_R>)/sqrt 2``."""
    _require_swap(p)
    xi = xi_integral(w, p)
    return FigureOfMerit(bell_from_overlap(xi), xi)


def direct_swap_fidelity(
    a: AtomQubit, c: PolarizationQubit, w: SampledPacket, p: SystemParams
) -> float:
    """Swap fidelity by scattering every grid component and integrating the overlap."""
    target = np.array(
        [a.A_R * c.C_R, a.A_L * c.C_L, a.A_L * c.C_R, a.A_R * c.C_L], dtype=complex
    )
    overlap = 0j
    for k, f, wt in zip(w.k, w.f, w.weights):
        out = apply_scattering(JointKState.product(a, c, k), p).alpha
        overlap += wt * abs(f) ** 2 * np.vdot(target, out)
    return abs(overlap) ** 2


def direct_bell_probability(w: SampledPacket, p: SystemParams) -> float:
    """Bell-generation probability by explicit scattering on the packet grid."""
    target = np.array([1.0, -1j, 0.0, 0.0]) / math.sqrt(2)
    overlap = 0j
    for k, f, wt in zip(w.k, w.f, w.weights):
        out = apply_scattering(JointKState(np.array([1.0, 0, 0, 0]), k), p).alpha
        overlap += wt * abs(f) ** 2 * np.vdot(target, out)
    return abs(overlap) ** 2


@dataclass(frozen=True)
class Fig2Row:
    lambda_over_kappa: float
    F_min: float
    P: float
    xi_swap: complex = field(repr=False, default=0j)
    xi_bell: complex = field(repr=False, default=0j)


def sweep_fig2(lambda_over_kappa, gamma: float, kappa_in: float, p_base: SystemParams | None = None) -> list:
    """Minimum swap fidelity and Bell probability against coupling strength.

    ``gamma`` and ``kappa_in`` are in units of kappa. The swap packet is centred
    on ``k_c`` and the entangling packet on ``k_c + kappa``.
    """
    base = p_base if p_base is not None else SystemParams()
    values = [float(x) for x in lambda_over_kappa]
    if not values or any(b <= a for a, b in zip(values, values[1:])) or values[0] <= 0:
        raise ParameterError("lambda_over_kappa", "lambda/kappa values must be positive and ascending")
    kap = base.kappa
    swap_packet = gaussian_spectrum(base.k_c, kappa_in * kap)
    bell_packet = gaussian_spectrum(base.k_c + kap, kappa_in * kap)
    rows = []
    for ratio in values:
        p = swap_configuration(ratio * kap, k_c=base.k_c, delta_e=0.0, kappa=kap, gamma=gamma * kap)
        fm = min_swap_fidelity(swap_packet, p)
        pb = bell_probability(bell_packet, p)
        rows.append(Fig2Row(ratio, fm.value, pb.value, fm.xi, pb.xi))
    return rows


__all__ = [
    "EntanglePoint",
    "Fig2Row",
    "FigureOfMerit",
    "GaussianPacket",
    "NoBalancedPointError",
    "SwapRoots",
    "bell_from_overlap",
    "bell_probability",
    "direct_bell_probability",
    "direct_swap_fidelity",
    "entangle_frequencies",
    "eta_overlap",
    "fidelity_from_overlap",
    "find_balance_point",
    "golden_section_min",
    "min_swap_fidelity",
    "sweep_fig2",
    "swap_fidelity",
    "swap_frequencies",
]

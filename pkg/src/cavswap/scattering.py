"""Closed-form single-photon scattering off a Lambda atom in a one-sided cavity.

Every function taking a frequency ``k`` accepts a scalar or an array and
broadcasts. Internally only the detuning ``dk = k - k_c`` enters. Spontaneous
decay is handled by giving the atomic frequency an imaginary part ``-i gamma``;
the dark state is never affected by it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import JointKState, ParameterError, RabiPoles, SystemParams


class SingularResolventError(ArithmeticError):
    """The resolvent was evaluated exactly on one of its real poles."""


class NonInteractingError(ValueError):
    """Both couplings vanish, so the bright/dark split is undefined."""


def _scalar_or_array(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def coupling_amplitude(k, p: SystemParams, pol: str):
    """Atom-continuum coupling ``g_pol(k)`` for polarization ``'L'`` or ``'R'``."""
    if pol == "L":
        lam, theta = p.lambda_L, p.theta_L
    elif pol == "R":
        lam, theta = p.lambda_R, p.theta_R
    else:
        raise ValueError(f"polarization must be 'L' or 'R', got {pol!r}")
    dk = np.asarray(k, dtype=float) - p.k_c
    amp = lam * math.sqrt(p.kappa / math.pi) * cmath.exp(1j * theta)
    return _scalar_or_array(amp / (dk + 1j * p.kappa))


def interaction_strength(k, p: SystemParams):
    """``V(k) = sqrt(|g_L(k)|^2 + |g_R(k)|^2)``, a Lorentzian amplitude."""
    dk = np.asarray(k, dtype=float) - p.k_c
    v2 = p.coupling_sq * (p.kappa / math.pi) / (dk**2 + p.kappa**2)
    return _scalar_or_array(np.sqrt(v2))


@dataclass(frozen=True)
class BrightDarkSplit:
    bright: complex
    dark: complex
    trivial_LR: complex
    trivial_RL: complex

    @property
    def norm_sq(self) -> float:
        return sum(abs(z) ** 2 for z in (self.bright, self.dark, self.trivial_LR, self.trivial_RL))


def bright_dark_decompose(s: JointKState, p: SystemParams) -> BrightDarkSplit:
    """Project the interacting pair ``(alpha_1, alpha_2)`` on the bright and dark states.

    The bright vector is ``(g_L*, g_R*) / V`` and the dark vector
    ``(g_R, -g_L) / V``; ``alpha_3`` and ``alpha_4`` pass through.
    """
    if p.coupling_sq == 0.0:
        raise NonInteractingError("bright/dark decomposition needs a non-zero coupling")
    gl = coupling_amplitude(s.k, p, "L")
    gr = coupling_amplitude(s.k, p, "R")
    v = interaction_strength(s.k, p)
    a1, a2, a3, a4 = s.alpha
    bright = (gl * a1 + gr * a2) / v
    dark = (np.conj(gr) * a1 - np.conj(gl) * a2) / v
    return BrightDarkSplit(complex(bright), complex(dark), complex(a3), complex(a4))


def rabi_poles(p: SystemParams) -> RabiPoles:
    """Dressed poles ``omega_pm`` in the detuning frame (principal square root)."""
    d = p.complex_detuning
    centre = (d - 1j * p.kappa) / 2
    root = cmath.sqrt((d + 1j * p.kappa) ** 2 / 4 + p.coupling_sq)
    return RabiPoles(centre + root, centre - root)


def resolvent_ee(k, p: SystemParams):
    """Excited-state matrix element of the resolvent at real frequency ``k``."""
    dk = np.asarray(k, dtype=float) - p.k_c
    wp, wm = rabi_poles(p).as_tuple()
    den = (dk - wp) * (dk - wm)
    if np.any(den == 0):
        raise SingularResolventError("resolvent evaluated on a real pole")
    return _scalar_or_array((dk + 1j * p.kappa) / den)


def phase_factor(k, p: SystemParams):
    """Bright-state scattering factor ``exp(i delta_s(k))``.

    Unimodular for ``gamma = 0``; its modulus drops below one for ``gamma > 0``.
    """
    dk = np.asarray(k, dtype=float) - p.k_c
    lam2 = p.coupling_sq
    if lam2 == 0.0:
        return _scalar_or_array(np.ones(dk.shape, dtype=complex))
    cav = (dk - p.complex_detuning) * (dk**2 + p.kappa**2)
    num = cav - (dk + 1j * p.kappa) * lam2
    den = cav - (dk - 1j * p.kappa) * lam2
    return _scalar_or_array(num / den)


def transfer_elements(k, p: SystemParams):
    """Return ``(t_LL, t_LR, t_RL, t_RR)`` at ``k`` (arrays broadcast with ``k``).

    The block is ``1 + (e^{i delta_s} - 1) |psi><psi|`` with the bright vector
    ``psi``. The Lorentzian factor cancels from every ratio, leaving only
    ``lambda_mu`` and the dipole phases.
    """
    lam2 = p.coupling_sq
    e = np.asarray(phase_factor(k, p), dtype=complex)
    if lam2 == 0.0:
        one = np.ones_like(e)
        zero = np.zeros_like(e)
        return tuple(_scalar_or_array(x) for x in (one, zero, zero, one))
    wl = p.lambda_L**2 / lam2
    wr = p.lambda_R**2 / lam2
    cross = p.lambda_L * p.lambda_R / lam2
    em1 = e - 1.0
    t_ll = 1.0 + em1 * wl
    t_rr = 1.0 + em1 * wr
    t_lr = cross * cmath.exp(1j * (p.theta_R - p.theta_L)) * em1
    t_rl = cross * cmath.exp(1j * (p.theta_L - p.theta_R)) * em1
    return tuple(_scalar_or_array(x) for x in (t_ll, t_lr, t_rl, t_rr))


@dataclass(frozen=True)
class TransferMatrix:
    """Scattering action at one frequency on the interacting pair; identity elsewhere."""

    t_LL: complex
    t_LR: complex
    t_RL: complex
    t_RR: complex
    k: float
    lossy: bool

    def block(self) -> np.ndarray:
        """2x2 block acting on ``(alpha_1, alpha_2)``."""
        return np.array([[self.t_LL, self.t_LR], [self.t_RL, self.t_RR]], dtype=complex)

    def full(self) -> np.ndarray:
        m = np.eye(4, dtype=complex)
        m[:2, :2] = self.block()
        return m

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.block(), compute_uv=False)


def transfer_matrix(k: float, p: SystemParams) -> TransferMatrix:
    k = float(k)
    t_ll, t_lr, t_rl, t_rr = transfer_elements(k, p)
    return TransferMatrix(complex(t_ll), complex(t_lr), complex(t_rl), complex(t_rr), k, p.lossy)


def apply_scattering(s: JointKState, p: SystemParams) -> JointKState:
    """Scatter a single-frequency state; the free phase ``e^{-ikt}`` is omitted."""
    return JointKState(transfer_matrix(s.k, p).full() @ s.alpha, s.k)


__all__ = [
    "BrightDarkSplit",
    "NonInteractingError",
    "ParameterError",
    "SingularResolventError",
    "TransferMatrix",
    "apply_scattering",
    "bright_dark_decompose",
    "coupling_amplitude",
    "interaction_strength",
    "phase_factor",
    "rabi_poles",
    "resolvent_ee",
    "transfer_elements",
    "transfer_matrix",
]

"""Domain types and parameter validation shared across the package.

Frequencies and rates are plain floats in one consistent unit. The
canonical convention is ``kappa = 1``; every other rate is then a multiple
of the cavity leakage rate.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, fields
from typing import Any, Mapping

import numpy as np

NORM_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a physical parameter violates its domain."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(message)


@dataclass(frozen=True)
class SystemParams:
    """Atom and cavity parameters.

    Parameters
    ----------
    k_c : float
        Resonance frequency of the cavity quasi-mode.
    delta_e : float
        Atom-cavity detuning, ``omega_e - k_c``.
    kappa : float
        Cavity leakage rate (must be positive).
    gamma : float
        Spontaneous decay rate of the excited state into side modes.
    lambda_L, lambda_R : float
        Coupling strengths of the two dipole transitions.
    theta_L, theta_R : float
        Dipole phase angles in radians.
    """

    k_c: float = 0.0
    delta_e: float = 0.0
    kappa: float = 1.0
    gamma: float = 0.0
    lambda_L: float = 0.0
    lambda_R: float = 0.0
    theta_L: float = 0.0
    theta_R: float = 0.0

    def __post_init__(self):
        validate_params(self)

    @property
    def omega_e(self) -> float:
        return self.k_c + self.delta_e

    @property
    def coupling_sq(self) -> float:
        """Total squared coupling ``lambda_L**2 + lambda_R**2``."""
        return self.lambda_L**2 + self.lambda_R**2

    @property
    def lossy(self) -> bool:
        return self.gamma > 0.0

    @property
    def complex_detuning(self) -> complex:
        """Detuning with the decay folded in as ``delta_e - i gamma``."""
        return complex(self.delta_e, -self.gamma)

    def replace(self, **changes) -> "SystemParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemParams(**values)

    def scaled(self, s: float) -> "SystemParams":
        """Rescale every frequency and rate by ``s`` (phases untouched)."""
        return self.replace(
            k_c=self.k_c * s,
            delta_e=self.delta_e * s,
            kappa=self.kappa * s,
            gamma=self.gamma * s,
            lambda_L=self.lambda_L * s,
            lambda_R=self.lambda_R * s,
        )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemParams":
        """Build params from a mapping whose keys match the field names.

        Rates are taken in units of kappa (``kappa = 1``) unless an explicit
        ``"kappa"`` key is present. Unknown keys raise ``ParameterError``.
        """
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            bad = sorted(unknown)[0]
            raise ParameterError(bad, f"unknown parameter {bad!r}")
        values = {}
        for key, value in data.items():
            try:
                values[key] = float(value)
            except (TypeError, ValueError):
                raise ParameterError(key, f"{key} must be a number, got {value!r}") from None
        return cls(**values)


def validate_params(p: SystemParams) -> SystemParams:
    """Check the parameter invariants and return ``p`` unchanged."""
    for f in fields(p):
        value = getattr(p, f.name)
        if not isinstance(value, numbers.Real) or not math.isfinite(value):
            raise ParameterError(f.name, f"{f.name} must be a finite real number")
    if not p.kappa > 0:
        raise ParameterError("kappa", "kappa must be positive")
    for name in ("gamma", "lambda_L", "lambda_R"):
        if getattr(p, name) < 0:
            raise ParameterError(name, f"{name} must be non-negative")
    return p


@dataclass(frozen=True)
class MirrorSpec:
    """Partially transparent output mirror: reflection amplitude and cavity length."""

    r: complex
    l: float

    def __post_init__(self):
        if not self.l > 0:
            raise ParameterError("l", "cavity length l must be positive")
        if abs(self.r) > 1.0:
            raise ParameterError("r", "|r| must not exceed 1")
        if abs(self.r) == 0.0:
            raise ParameterError("r", "r = 0 is out of model: the leakage rate diverges")


def kappa_from_mirror(m: MirrorSpec) -> float:
    """Leakage rate ``-ln|r| / 2l`` of a cavity closed by mirror ``m``."""
    return -math.log(abs(m.r)) / (2.0 * m.l)


def swap_configuration(
    lam: float,
    k_c: float = 0.0,
    delta_e: float = 0.0,
    kappa: float = 1.0,
    gamma: float = 0.0,
) -> SystemParams:
    """Equal couplings with opposite dipole phases, so ``g_L(k) = -g_R(k)``."""
    if not lam > 0:
        raise ParameterError("lambda", "swap configuration needs a positive coupling strength")
    return SystemParams(
        k_c=k_c,
        delta_e=delta_e,
        kappa=kappa,
        gamma=gamma,
        lambda_L=lam,
        lambda_R=lam,
        theta_L=math.pi,
        theta_R=0.0,
    )


def is_swap_configuration(p: SystemParams, tol: float = 1e-12) -> bool:
    if p.lambda_L <= 0 or abs(p.lambda_L - p.lambda_R) > tol * max(1.0, p.lambda_L):
        return False
    return abs(np.exp(1j * (p.theta_L - p.theta_R)) + 1.0) < 1e-9


def _check_unit(name: str, a: complex, b: complex) -> None:
    n = abs(a) ** 2 + abs(b) ** 2
    if abs(n - 1.0) > NORM_TOL:
        raise ParameterError(name, f"{name} amplitudes must be normalized (norm^2 = {n!r})")


@dataclass(frozen=True)
class AtomQubit:
    """Atomic ground-state qubit ``A_L|L> + A_R|R>``."""

    A_L: complex
    A_R: complex

    def __post_init__(self):
        _check_unit("AtomQubit", self.A_L, self.A_R)


@dataclass(frozen=True)
class PolarizationQubit:
    """Photon polarization qubit ``C_L|k_L> + C_R|k_R>``."""

    C_L: complex
    C_R: complex

    def __post_init__(self):
        _check_unit("PolarizationQubit", self.C_L, self.C_R)


@dataclass(frozen=True)
class JointKState:
    """Atom-photon amplitudes at one frequency.

    ``alpha`` is ordered as ``|L;k_L>, |R;k_R>, |L;k_R>, |R;k_L>``.
    """

    alpha: np.ndarray
    k: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex).reshape(-1)
        if a.shape != (4,):
            raise ParameterError("alpha", "alpha must hold exactly four amplitudes")
        if self.norm_sq_of(a) > 1.0 + NORM_TOL:
            raise ParameterError("alpha", "state norm exceeds 1")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @staticmethod
    def norm_sq_of(a) -> float:
        return float(np.sum(np.abs(a) ** 2))

    @property
    def norm_sq(self) -> float:
        return self.norm_sq_of(self.alpha)

    @classmethod
    def product(cls, atom: AtomQubit, photon: PolarizationQubit, k: float = 0.0) -> "JointKState":
        """Product state of an atomic and a photonic qubit at frequency ``k``."""
        return cls(
            np.array(
                [
                    atom.A_L * photon.C_L,
                    atom.A_R * photon.C_R,
                    atom.A_L * photon.C_R,
                    atom.A_R * photon.C_L,
                ]
            ),
            k,
        )


@dataclass(frozen=True)
class RabiPoles:
    """Complex poles of the dressed atom-cavity resolvent (detuning frame)."""

    omega_plus: complex
    omega_minus: complex

    def as_tuple(self) -> tuple[complex, complex]:
        return (self.omega_plus, self.omega_minus)


__all__ = [
    "NORM_TOL",
    "AtomQubit",
    "JointKState",
    "MirrorSpec",
    "ParameterError",
    "PolarizationQubit",
    "RabiPoles",
    "SystemParams",
    "is_swap_configuration",
    "kappa_from_mirror",
    "swap_configuration",
    "validate_params",
]

"""Single-photon spectral packets and spectral averages over them."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .core import ParameterError, SystemParams
from .scattering import transfer_elements

# Gaussian mass outside +-8 widths is below 1e-28.
WINDOW_WIDTHS = 8.0
XI_TOL = 1e-10
NORM_CHECK_TOL = 1e-6


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


@dataclass(frozen=True)
class GaussianPacket:
    """Normalized Gaussian amplitude centred on ``k_peak``.

    ``f(k) = pi^{-1/4} kappa_in^{-1/2} exp(-(k - k_peak)^2 / (2 kappa_in^2) + i k x_0)``;
    a positive ``x_0`` places the photon that far from the cavity at ``t = 0``.
    """

    k_peak: float
    kappa_in: float
    x_0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa_in) and self.kappa_in > 0):
            raise ParameterError("kappa_in", "kappa_in must be positive")

    def amplitude(self, k):
        k = np.asarray(k, dtype=float)
        env = np.exp(-((k - self.k_peak) ** 2) / (2 * self.kappa_in**2))
        return env * np.exp(1j * k * self.x_0) / (math.pi**0.25 * math.sqrt(self.kappa_in))

    def power(self, k):
        k = np.asarray(k, dtype=float)
        return np.exp(-((k - self.k_peak) ** 2) / self.kappa_in**2) / (math.sqrt(math.pi) * self.kappa_in)

    @property
    def window(self) -> tuple[float, float]:
        half = WINDOW_WIDTHS * self.kappa_in
        return self.k_peak - half, self.k_peak + half

    def sample(self, k) -> "SampledPacket":
        k = np.asarray(k, dtype=float)
        return SampledPacket(k, self.amplitude(k))


@dataclass(frozen=True)
class SampledPacket:
    """Amplitudes ``f`` on an ascending, possibly non-uniform, grid ``k``.

    Integrals use trapezoid weights on the grid.
    """

    k: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        k = np.array(self.k, dtype=float).reshape(-1)
        f = np.array(self.f, dtype=complex).reshape(-1)
        if k.size < 3:
            raise ParameterError("k", "sampled packet needs at least three grid points")
        if f.shape != k.shape:
            raise ParameterError("f", "amplitude and grid lengths differ")
        if not np.all(np.isfinite(k)) or not np.all(np.diff(k) > 0):
            raise ParameterError("k", "sampled grid must be finite and strictly ascending")
        k.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "f", f)

    @property
    def weights(self) -> np.ndarray:
        h = np.diff(self.k)
        w = np.zeros_like(self.k)
        w[:-1] += h / 2
        w[1:] += h / 2
        return w

    def power(self, k=None):
        if k is not None:
            raise ValueError("sampled packets are only defined on their grid")
        return np.abs(self.f) ** 2

    def normalized(self) -> "SampledPacket":
        return SampledPacket(self.k, self.f / math.sqrt(packet_norm(self)))

    def with_phase(self, phi) -> "SampledPacket":
        """Same packet with an extra spectral phase ``exp(i phi(k))``."""
        return SampledPacket(self.k, self.f * np.exp(1j * np.asarray(phi, dtype=float)))


Wavepacket = Union[GaussianPacket, SampledPacket]


def gaussian_spectrum(k_peak: float, kappa_in: float, x_0: float = 0.0) -> GaussianPacket:
    return GaussianPacket(float(k_peak), float(kappa_in), float(x_0))


def packet_norm(w: Wavepacket) -> float:
    """``int |f(k)|^2 dk``: exact for Gaussians, trapezoid for sampled packets."""
    if isinstance(w, GaussianPacket):
        return 1.0
    return float(np.sum(w.weights * np.abs(w.f) ** 2))


@lru_cache(maxsize=None)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def _composite_gl(func, a: float, b: float, order: int, panels: int):
    x, wts = _legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges)[:, None] / 2
    mid = (edges[:-1] + edges[1:])[:, None] / 2
    nodes = mid + half * x[None, :]
    return np.sum(func(nodes.ravel()).reshape(nodes.shape) * half * wts[None, :])


def gauss_legendre(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = XI_TOL,
    order: int = 32,
    max_panels: int = 4096,
):
    """Integrate ``func`` on ``[a, b]`` with composite Gauss-Legendre rules.

    The panel count doubles until two successive estimates differ by less
    than ``tol``. Returns ``(value, residual)``.
    """
    prev = _composite_gl(func, a, b, order, 1)
    panels = 1
    while panels < max_panels:
        panels *= 2
        cur = _composite_gl(func, a, b, order, panels)
        residual = abs(cur - prev)
        if residual < tol:
            return cur, residual
        prev = cur
    raise QuadratureError("Gauss-Legendre refinement did not converge", residual)


def spectral_average(func, w: Wavepacket, tol: float = XI_TOL):
    """Average of ``func(k)`` weighted by the packet power ``|f(k)|^2``."""
    if isinstance(w, GaussianPacket):
        a, b = w.window
        value, _ = gauss_legendre(lambda k: func(k) * w.power(k), a, b, tol=tol)
        return value
    return np.sum(w.weights * np.abs(w.f) ** 2 * func(w.k))


def xi_integral(w: Wavepacket, p: SystemParams, tol: float = XI_TOL) -> complex:
    """Spectral average of ``t_LL`` over the photon power spectrum."""
    norm = packet_norm(w)
    if abs(norm - 1.0) > NORM_CHECK_TOL:
        raise ParameterError("packet", f"packet is not normalized (norm {norm:.9g})")
    if p.coupling_sq == 0.0:
        # t_LL = 1 identically
        return complex(norm)
    return complex(spectral_average(lambda k: transfer_elements(k, p)[0], w, tol=tol))


def write_packet_csv(w: SampledPacket, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "re_f", "im_f"])
        for k, f in zip(w.k, w.f):
            writer.writerow([f"{k:.17g}", f"{f.real:.17g}", f"{f.imag:.17g}"])


def read_packet_csv(path) -> SampledPacket:
    """Read ``k, Re f, Im f`` rows; a non-numeric first row is taken as a header."""
    rows = []
    with open(Path(path), newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row[:3]])
            except ValueError:
                if i == 0:
                    continue
                raise ParameterError("packet", f"bad packet row {i + 1}: {row!r}") from None
    if not rows:
        raise ParameterError("packet", "packet file is empty")
    data = np.array(rows)
    if data.shape[1] != 3:
        raise ParameterError("packet", "packet rows need three columns: k, re_f, im_f")
    return SampledPacket(data[:, 0], data[:, 1] + 1j * data[:, 2])


__all__ = [
    "GaussianPacket",
    "QuadratureError",
    "SampledPacket",
    "Wavepacket",
    "gauss_legendre",
    "gaussian_spectrum",
    "packet_norm",
    "read_packet_csv",
    "spectral_average",
    "write_packet_csv",
    "xi_integral",
]

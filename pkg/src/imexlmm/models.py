"""Gradient-flow model descriptions and the periodic Fourier grid.

A model is u_t = M(L u + f(u)) with M negative (semi-)definite and L PSD,
both diagonal in Fourier space and described here by their symbols as
functions of |xi|^2.  The built-in trio:

* Allen-Cahn:     M = -I,      L = -eps^2 Lap,        f(u) = u^3 - u
* Cahn-Hilliard:  M = Lap,     L = -eps^2 Lap,        f(u) = u^3 - u
* phase-field crystal: M = Lap, L = (I + Lap)^2 + I,  f(u) = u^3 - (eps+1) u

The cubic nonlinearities are not globally Lipschitz; certificates use the
constant of the truncated nonlinearity on [-R, R], valid while the solution
stays inside that interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .certify import ModelConstants

__all__ = [
    "Grid",
    "ModelSpec",
    "HermitianViolationError",
    "allen_cahn",
    "cahn_hilliard",
    "pfc",
    "cubic_lipschitz_bound",
]

IMAG_RESIDUE_TOL = 1e-12


class HermitianViolationError(ArithmeticError):
    """Inverse transform of supposedly real data had a large imaginary part."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with cached wavenumber tables.

    shape gives points per axis (even, powers of two preferred), lengths the
    physical box sides.  Inner products use the cell-volume-weighted sum,
    which is exact for trigonometric polynomials below the Nyquist limit.
    """

    shape: tuple
    lengths: tuple
    k2: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        lengths = tuple(float(l) for l in self.lengths)
        if len(shape) != len(lengths):
            raise ValueError("shape and lengths must agree in dimension")
        if not 1 <= len(shape) <= 3:
            raise ValueError("only dimensions 1..3 are supported")
        if any(n < 2 or n % 2 for n in shape):
            raise ValueError("grid points per axis must be even and >= 2")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "lengths", lengths)
        axes = [
            2.0 * np.pi * np.fft.fftfreq(n, d=l / n)
            for n, l in zip(shape, lengths)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        object.__setattr__(self, "k2", sum(m ** 2 for m in mesh))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.lengths) / self.npoints)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def coordinates(self):
        axes = [
            np.arange(n) * (l / n) for n, l in zip(self.shape, self.lengths)
        ]
        return np.meshgrid(*axes, indexing="ij")

    def fft(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fftn(u)

    def ifft(self, u_hat: np.ndarray) -> np.ndarray:
        """Inverse transform expected to be real; the imaginary residue is
        zeroed when below tolerance and rejected otherwise."""
        v = np.fft.ifftn(u_hat)
        imag_max = float(np.max(np.abs(v.imag)))
        scale = max(1.0, float(np.max(np.abs(v.real))))
        if imag_max > IMAG_RESIDUE_TOL * scale:
            raise HermitianViolationError(
                f"imaginary residue {imag_max:.3e} exceeds tolerance"
            )
        return np.ascontiguousarray(v.real)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return self.cell_volume * float(np.sum(u * v))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(self.inner(u, u)))

    def spectral_inner(self, u_hat, v_hat, weight=None) -> float:
        """(u, W v) for a real diagonal symbol W, from transforms."""
        z = u_hat * np.conj(v_hat)
        if weight is not None:
            z = z * weight
        return self.cell_volume / self.npoints * float(np.sum(z.real))

    def apply_symbol(self, symbol: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.ifft(symbol * self.fft(u))


@dataclass(frozen=True)
class ModelSpec:
    """Symbols, nonlinearity, potential and analysis constants of one model."""

    name: str
    epsilon: float
    m_symbol: Callable[[np.ndarray], np.ndarray]
    l_symbol: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], np.ndarray]
    ell_f: float
    zeta: float
    eta: float
    mass_conserving: bool
    truncation_radius: float | None = None

    def constants(self) -> ModelConstants:
        return ModelConstants(ell_f=self.ell_f, zeta=self.zeta, eta=self.eta)


def cubic_lipschitz_bound(linear_coefficient: float, radius: float) -> float:
    """max over [-R, R] of |3 s^2 - c| for f(s) = s^3 - c s."""
    c = linear_coefficient
    return max(abs(c), abs(3.0 * radius ** 2 - c))


def allen_cahn(epsilon: float, radius: float = 2.0) -> ModelSpec:
    return ModelSpec(
        name="allen_cahn",
        epsilon=epsilon,
        m_symbol=lambda k2: -np.ones_like(k2),
        l_symbol=lambda k2: epsilon ** 2 * k2,
        f=lambda u: u ** 3 - u,
        potential=lambda u: 0.25 * (u ** 2 - 1.0) ** 2,
        ell_f=cubic_lipschitz_bound(1.0, radius),
        zeta=1.0,
        eta=1.0,
        mass_conserving=False,
        truncation_radius=radius,
    )


def cahn_hilliard(epsilon: float, radius: float = 2.0) -> ModelSpec:
    return ModelSpec(
        name="cahn_hilliard",
        epsilon=epsilon,
        m_symbol=lambda k2: -k2,
        l_symbol=lambda k2: epsilon ** 2 * k2,
        f=lambda u: u ** 3 - u,
        potential=lambda u: 0.25 * (u ** 2 - 1.0) ** 2,
        ell_f=cubic_lipschitz_bound(1.0, radius),
        zeta=epsilon ** -0.5,
        eta=0.5,
        mass_conserving=True,
        truncation_radius=radius,
    )


def pfc(epsilon: float, radius: float = 2.0) -> ModelSpec:
    """Phase-field crystal splitting L = (I + Lap)^2 + I, f = u^3 - (eps+1) u;
    the potential (u^2 - (1+eps))^2 / 4 shifts the conventional energy by the
    constant (1+eps)^2 |Omega| / 4."""
    return ModelSpec(
        name="pfc",
        epsilon=epsilon,
        m_symbol=lambda k2: -k2,
        l_symbol=lambda k2: (1.0 - k2) ** 2 + 1.0,
        f=lambda u: u ** 3 - (epsilon + 1.0) * u,
        potential=lambda u: 0.25 * (u ** 2 - (1.0 + epsilon)) ** 2,
        ell_f=cubic_lipschitz_bound(epsilon + 1.0, radius),
        zeta=(2.0 * np.sqrt(2.0) - 2.0) ** -0.25,
        eta=0.5,
        mass_conserving=True,
        truncation_radius=radius,
    )


MODEL_BUILDERS = {
    "allen_cahn": allen_cahn,
    "ac": allen_cahn,
    "cahn_hilliard": cahn_hilliard,
    "ch": cahn_hilliard,
    "pfc": pfc,
}

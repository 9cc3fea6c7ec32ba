"""Classical linear stability of IMEX multistep schemes.

The split test equation y' = lambda_I y + lambda_E y with z_I = tau*lambda_I
treated implicitly and z_E = tau*lambda_E explicitly yields the characteristic
equation rho(xi) - z_I sigma(xi) - z_E sigma_hat(xi) = 0.  A point (z_I, z_E)
is stable when that polynomial satisfies the root condition: all roots in the
closed unit disk, boundary roots simple.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .schemes import SchemeCoefficients

__all__ = [
    "CharPolys",
    "RootConditionResult",
    "RegionSlice",
    "UndefinedAngleError",
    "char_polys",
    "root_condition",
    "region_slice",
    "stability_angle",
]

ROOT_TOL = 1e-7        # |xi| <= 1 + ROOT_TOL counts as inside
BOUNDARY_BAND = 1e-7   # |xi| >= 1 - BOUNDARY_BAND counts as boundary
CLUSTER_RADIUS = 1e-6  # two boundary roots closer than this are non-simple


class UndefinedAngleError(ValueError):
    """Sector angle requested for a scheme that is not zero-stable."""


@dataclass(frozen=True)
class CharPolys:
    """Characteristic polynomials rho, sigma, sigma_hat (exact, descending)."""

    rho: tuple
    sigma: tuple
    sigma_hat: tuple

    def as_arrays(self):
        return (
            np.array([float(c) for c in self.rho]),
            np.array([float(c) for c in self.sigma]),
            np.array([float(c) for c in self.sigma_hat]),
        )


def char_polys(s: SchemeCoefficients) -> CharPolys:
    """rho = sum A_i xi^(k-i), sigma = sum B_i xi^(k-i),
    sigma_hat = sum_{i>=1} Bhat_i xi^(k-i)."""
    return CharPolys(
        rho=tuple(s.A),
        sigma=tuple(s.B),
        sigma_hat=(Fraction(0),) + tuple(s.Bhat),
    )


@dataclass(frozen=True)
class RootConditionResult:
    zero_stable: bool
    roots: np.ndarray
    violations: tuple


def root_condition(coeffs, tol: float = ROOT_TOL) -> RootConditionResult:
    """Root condition for a complex-coefficient polynomial (descending).

    Leading near-zeros are trimmed (degree degenerates continuously as the
    implicit weight grows); a degree-0 polynomial is vacuously stable.
    """
    c = np.asarray(coeffs, dtype=complex)
    mags = np.abs(c)
    scale = mags.max()
    if scale == 0.0:
        raise ValueError("zero polynomial has no root condition")
    lead = int(np.argmax(mags > 1e-14 * scale))
    c = c[lead:]
    if len(c) <= 1:
        return RootConditionResult(True, np.empty(0, dtype=complex), ())
    roots = np.roots(c)
    violations = []
    moduli = np.abs(roots)
    for r, m in zip(roots, moduli):
        if m > 1.0 + tol:
            violations.append(f"root {r:.6g} has modulus {m:.9g} > 1")
    boundary = roots[moduli >= 1.0 - BOUNDARY_BAND]
    for i in range(len(boundary)):
        for j in range(i + 1, len(boundary)):
            if abs(boundary[i] - boundary[j]) < CLUSTER_RADIUS:
                violations.append(
                    f"repeated boundary root near {boundary[i]:.6g}"
                )
    return RootConditionResult(not violations, roots, tuple(violations))


def _companion_roots_batch(coeffs: np.ndarray) -> np.ndarray:
    """Roots of many same-degree polynomials (rows, descending coeffs).

    Rows must have a nonzero leading coefficient; callers handle degenerate
    rows separately.
    """
    n, deg1 = coeffs.shape
    d = deg1 - 1
    monic = coeffs / coeffs[:, :1]
    comp = np.zeros((n, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, 0, :] = -monic[:, 1:]
    return np.linalg.eigvals(comp)


def _points_stable(rho, sigma, sigma_hat, zi, ze, tol=ROOT_TOL):
    """Vectorized root condition over arrays of (z_I, z_E) pairs."""
    zi = np.asarray(zi, dtype=complex).ravel()
    ze = np.asarray(ze, dtype=complex).ravel()
    coeffs = (
        rho[None, :]
        - zi[:, None] * sigma[None, :]
        - ze[:, None] * sigma_hat[None, :]
    )
    lead = coeffs[:, 0]
    scale = np.max(np.abs(coeffs), axis=1)
    ok_lead = np.abs(lead) > 1e-12 * np.maximum(scale, 1e-300)
    stable = np.zeros(len(zi), dtype=bool)
    if np.any(ok_lead):
        roots = _companion_roots_batch(coeffs[ok_lead])
        moduli = np.abs(roots)
        inside = np.all(moduli <= 1.0 + tol, axis=1)
        # boundary simplicity per row
        simple = np.ones(roots.shape[0], dtype=bool)
        for idx in np.nonzero(inside)[0]:
            r = roots[idx]
            b = r[np.abs(r) >= 1.0 - BOUNDARY_BAND]
            for i in range(len(b)):
                for j in range(i + 1, len(b)):
                    if abs(b[i] - b[j]) < CLUSTER_RADIUS:
                        simple[idx] = False
                        break
                if not simple[idx]:
                    break
        stable[ok_lead] = inside & simple
    for idx in np.nonzero(~ok_lead)[0]:
        stable[idx] = root_condition(coeffs[idx], tol=tol).zero_stable
    return stable


@dataclass(frozen=True)
class RegionSlice:
    """Boolean stability mask over a rectangle of the scanned variable."""

    plane: str
    fixed_value: complex
    re_axis: np.ndarray
    im_axis: np.ndarray
    mask: np.ndarray  # shape (len(im_axis), len(re_axis))

    def rows(self):
        """(x, y, stable) triples, row-major over the grid."""
        for i, y in enumerate(self.im_axis):
            for j, x in enumerate(self.re_axis):
                yield float(x), float(y), bool(self.mask[i, j])


def region_slice(
    s: SchemeCoefficients,
    plane: str,
    fixed_value: complex = 0j,
    window=(-15.0, 5.0, -10.0, 10.0),
    resolution=(400, 400),
) -> RegionSlice:
    """Scan one two-dimensional slice of the IMEX stability region.

    plane = "implicit" scans z_I with z_E = 0; "explicit" scans z_E with
    z_I = 0; "imex" scans z_E with z_I = fixed_value.
    """
    if plane not in ("implicit", "explicit", "imex"):
        raise ValueError(f"unknown plane {plane!r}")
    n_re, n_im = (resolution, resolution) if np.isscalar(resolution) else resolution
    if n_re < 2 or n_im < 2:
        raise ValueError("resolution must be at least 2 per axis")
    re_axis = np.linspace(window[0], window[1], n_re)
    im_axis = np.linspace(window[2], window[3], n_im)
    pts = re_axis[None, :] + 1j * im_axis[:, None]
    rho, sigma, sigma_hat = char_polys(s).as_arrays()
    if plane == "implicit":
        zi, ze = pts, np.zeros_like(pts)
    elif plane == "explicit":
        zi, ze = np.zeros_like(pts), pts
    else:
        zi, ze = np.full_like(pts, complex(fixed_value)), pts
    mask = _points_stable(rho, sigma, sigma_hat, zi, ze).reshape(pts.shape)
    return RegionSlice(
        plane=plane,
        fixed_value=complex(fixed_value) if plane == "imex" else 0j,
        re_axis=re_axis,
        im_axis=im_axis,
        mask=mask,
    )


def _ray_stable(rho, sigma, sigma_hat, phi, radii):
    zi = -radii * np.exp(1j * phi)
    ze = np.zeros_like(zi)
    if not np.all(_points_stable(rho, sigma, sigma_hat, zi, ze)):
        return False
    # r -> infinity limit: the characteristic roots approach those of sigma
    return root_condition(sigma).zero_stable


def stability_angle(
    s: SchemeCoefficients,
    n_radii: int = 200,
    r_min: float = 1e-3,
    r_max: float = 1e6,
    bisection_iters: int = 42,
) -> float:
    """Largest sector half-angle (degrees, capped at 90) such that every
    sampled implicit point z_I = -r e^{i phi}, |phi| <= angle, is stable.

    Bisection on the angle; each ray is sampled at n_radii logarithmic radii
    plus the r -> infinity check on sigma.  Real coefficients make the region
    conjugate-symmetric, so only nonnegative angles are scanned.
    """
    polys = char_polys(s)
    rho, sigma, sigma_hat = polys.as_arrays()
    if not root_condition(rho).zero_stable:
        raise UndefinedAngleError("scheme is not zero-stable")
    radii = np.logspace(np.log10(r_min), np.log10(r_max), n_radii)
    if not _ray_stable(rho, sigma, sigma_hat, 0.0, radii):
        return 0.0
    if _ray_stable(rho, sigma, sigma_hat, np.pi / 2, radii):
        return 90.0
    lo, hi = 0.0, np.pi / 2
    for _ in range(bisection_iters):
        mid = 0.5 * (lo + hi)
        if _ray_stable(rho, sigma, sigma_hat, mid, radii):
            lo = mid
        else:
            hi = mid
    return float(np.degrees(lo))

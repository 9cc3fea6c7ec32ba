"""Quadratic energy certificates for IMEX multistep schemes.

For a coefficient vector s whose generating series stays >= gamma > 0 on
[-1, 1], the trigonometric polynomial M(theta; s) - gamma is nonnegative and
factors as |P(e^{i theta})|^2 with a real polynomial P (Fejer-Riesz).  The
coefficients of P assemble an upper-triangular PSD matrix U, and the shifted
telescoping matrix G recovered from U is the weight of the nonnegative
quadratic modification added to the discrete energy.  ``certify_scheme`` runs
the full pipeline on both reformed coefficient vectors and reports the
admissible step bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chebpoly import ChebSeries, global_min
from .schemes import SchemeCoefficients, reform

__all__ = [
    "CertificateInfeasibleError",
    "ModelConstants",
    "EnergyCertificate",
    "DissipationReport",
    "gamma_max",
    "spectral_factorize",
    "build_U",
    "recover_G",
    "tau_max_bound",
    "certify_scheme",
]

# |z| bands for classifying Laurent roots: strictly inside / on the unit
# circle.  Double roots on the circle split by ~sqrt(eps) under companion
# eigensolves, so the circle band must be much wider than that split.
_CIRCLE_BAND = 1e-5
_ANGLE_CLUSTER = 1e-4
_GAMMA_SLACK = 1e-9


class CertificateInfeasibleError(ValueError):
    """Requested gamma exceeds the minimum of the generating series."""


@dataclass(frozen=True)
class ModelConstants:
    """Lipschitz constant of f plus the interpolation constants (zeta, eta)."""

    ell_f: float
    zeta: float
    eta: float

    def __post_init__(self):
        if self.ell_f <= 0:
            raise ValueError("ell_f must be positive")
        if self.zeta <= 0:
            raise ValueError("zeta must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")


@dataclass(frozen=True)
class EnergyCertificate:
    """(gamma, p, U, G) certifying x^T U x >= gamma x_1^2 for one vector."""

    gamma: float
    p: np.ndarray
    U: np.ndarray
    G: np.ndarray

    @property
    def k(self) -> int:
        return len(self.p)


def _as_series(values) -> ChebSeries:
    return values if isinstance(values, ChebSeries) else ChebSeries(tuple(values))


def gamma_max(s) -> float:
    """Largest admissible gamma: the minimum of the generating series."""
    return global_min(_as_series(s)).min_value


def series_from_factor(p, gamma: float) -> np.ndarray:
    """Invert the factorization: s_0 = gamma + sum p_i^2,
    s_m = 2 sum_i p_i p_{i+m}."""
    p = np.asarray(p, dtype=float)
    k = len(p)
    s = np.empty(k)
    s[0] = gamma + float(p @ p)
    for m in range(1, k):
        s[m] = 2.0 * float(p[:-m] @ p[m:])
    return s


def spectral_factorize(s, gamma: float) -> np.ndarray:
    """Real coefficients p with |P(e^{i t})|^2 = M(t; s) - gamma.

    The Laurent polynomial L(z) = s_0 - gamma + sum_m (s_m/2)(z^m + z^-m) is
    nonnegative on the unit circle, so its roots pair up reciprocally.  P is
    built from one root per pair, taking those with |z| <= 1; circle roots
    (which arrive with even multiplicity, split by rounding) are clustered by
    angle and replaced by their projected means before assigning half of each
    cluster to P.  The leading scale is fixed positive, so p is deterministic
    up to that sign.
    """
    series = _as_series(s)
    k = series.k
    gmax = gamma_max(series)
    if gamma > gmax + _GAMMA_SLACK * max(1.0, abs(gmax)):
        raise CertificateInfeasibleError(
            f"gamma={gamma!r} exceeds series minimum {gmax!r}"
        )
    coeffs = list(series.s)
    coeffs[0] -= gamma
    d = k - 1
    while d > 0 and coeffs[d] == 0.0:
        d -= 1
    scale = max(abs(c) for c in series.s) or 1.0
    if d == 0:
        if abs(coeffs[0]) <= 1e-13 * scale:
            return np.zeros(k)
        return np.concatenate(([np.sqrt(coeffs[0])], np.zeros(k - 1)))

    # z^d L(z): palindromic, degree 2d, constant term coeffs[d]/2 != 0
    poly = np.zeros(2 * d + 1)
    poly[d] = coeffs[0]
    for m in range(1, d + 1):
        poly[d + m] += coeffs[m] / 2.0
        poly[d - m] += coeffs[m] / 2.0
    roots = np.roots(poly[::-1])

    moduli = np.abs(roots)
    selected = list(roots[moduli < 1.0 - _CIRCLE_BAND])
    circle = roots[np.abs(moduli - 1.0) <= _CIRCLE_BAND]
    if len(circle) % 2:
        raise ArithmeticError("odd number of unit-circle roots; L < 0 somewhere?")
    if len(circle):
        angles = np.angle(circle)
        order = np.argsort(angles)
        pts = circle[order]
        i = 0
        while i < len(pts):
            j = i + 1
            while j < len(pts) and abs(np.angle(pts[j] / pts[i])) < _ANGLE_CLUSTER:
                j += 1
            group = pts[i:j]
            if len(group) % 2:
                raise ArithmeticError("unit-circle root cluster of odd size")
            # mean of the split pair cancels the O(sqrt(eps)) perturbation
            center = np.mean(group)
            center /= abs(center)
            selected.extend([center] * (len(group) // 2))
            i = j
    if len(selected) != d:
        raise ArithmeticError(
            f"root selection picked {len(selected)} of {d} reciprocal pairs"
        )

    prod = complex(np.prod(selected))
    lead_sq = (coeffs[d] / 2.0) / (((-1.0) ** d) * prod)
    if abs(lead_sq.imag) > 1e-8 * max(1.0, abs(lead_sq)) or lead_sq.real <= 0:
        raise ArithmeticError(f"inconsistent leading scale {lead_sq!r}")
    lead = np.sqrt(lead_sq.real)
    p_complex = np.poly(selected)[::-1] * lead  # ascending coefficients
    if np.max(np.abs(p_complex.imag)) > 1e-8 * max(1.0, np.max(np.abs(p_complex))):
        raise ArithmeticError("factor coefficients not real")
    p = np.concatenate((p_complex.real, np.zeros(k - 1 - d)))

    recon = series_from_factor(p, gamma)
    if np.max(np.abs(recon - np.asarray(series.s))) > 1e-6 * scale:
        raise ArithmeticError("factorization round trip failed")
    return p


def build_U(p, gamma: float) -> np.ndarray:
    """Upper-triangular U with U_ii = p_i^2 + gamma*delta_{i1},
    U_ij = 2 p_i p_j above the diagonal."""
    p = np.asarray(p, dtype=float)
    k = len(p)
    U = np.zeros((k, k))
    for i in range(k):
        U[i, i] = p[i] ** 2
        for j in range(i + 1, k):
            U[i, j] = 2.0 * p[i] * p[j]
    U[0, 0] += gamma
    return U


def recover_G(U: np.ndarray) -> np.ndarray:
    """Unique upper-triangular G with G - J^T G J equal to the trailing
    principal submatrix of U (J the lower shift); G_ij sums that submatrix
    down its diagonals."""
    U = np.asarray(U, dtype=float)
    k = U.shape[0]
    Ut = U[1:, 1:]
    n = k - 1
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = sum(Ut[i + m, j + m] for m in range(n - max(i, j)))
    return G


def _eta_bar(eta: float) -> float:
    return (1.0 - eta) / eta


def tau_max_bound(alpha: float, beta: float, chat1: float, constants: ModelConstants) -> float:
    """Admissible step bound tau_max = alpha * beta^eta_bar /
    (|l_f/2 + 2 l_f chat1|^(1+eta_bar) * eta * (1-eta)^eta_bar * zeta^(2+2 eta_bar)),
    with the 0^0 = 1 convention at eta = 1."""
    eta = constants.eta
    eb = _eta_bar(eta)
    lf = constants.ell_f
    denom_base = abs(lf / 2.0 + 2.0 * lf * chat1)

    def pow00(base, expo):
        return 1.0 if expo == 0.0 else base ** expo

    denom = (
        denom_base ** (1.0 + eb)
        * eta
        * pow00(1.0 - eta, eb)
        * constants.zeta ** (2.0 + 2.0 * eb)
    )
    return alpha * pow00(beta, eb) / denom


@dataclass(frozen=True)
class DissipationReport:
    """Outcome of certifying one scheme against one set of model constants."""

    k: int
    alpha_max: float
    beta_max: float
    cert_a: EnergyCertificate | None
    cert_b: EnergyCertificate | None
    tau_max: float | None
    constants: ModelConstants
    chat1: float
    refused: bool
    refusal_reason: str | None

    @property
    def G_a(self) -> np.ndarray:
        if self.cert_a is None:
            raise ValueError("no certificate: " + (self.refusal_reason or ""))
        return self.cert_a.G

    @property
    def G_b(self) -> np.ndarray:
        if self.cert_b is None:
            raise ValueError("no certificate: " + (self.refusal_reason or ""))
        return self.cert_b.G

    def to_json_dict(self) -> dict:
        return {
            "alpha_max": self.alpha_max,
            "beta_max": self.beta_max,
            "G_a": None if self.cert_a is None else [list(r) for r in self.cert_a.G],
            "G_b": None if self.cert_b is None else [list(r) for r in self.cert_b.G],
            "tau_max": self.tau_max,
            "refused": self.refused,
            "refusal_reason": self.refusal_reason,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def _certificate(values, gamma: float) -> EnergyCertificate:
    p = spectral_factorize(values, gamma)
    U = build_U(p, gamma)
    return EnergyCertificate(gamma=gamma, p=p, U=U, G=recover_G(U))


def certify_scheme(
    scheme: SchemeCoefficients,
    constants: ModelConstants,
    gamma_fraction: float = 1.0,
) -> DissipationReport:
    """Full certification of a scheme: refusal with the violating minimum, or
    certificates for both coefficient vectors plus the step bound.

    Certificates default to the maximal gamma values (largest tau_max); a
    ``gamma_fraction`` in (0, 1] scales both down proportionally.
    """
    if not 0.0 < gamma_fraction <= 1.0:
        raise ValueError("gamma_fraction must lie in (0, 1]")
    coeffs = reform(scheme)
    alpha_max = gamma_max(coeffs.a)
    beta_max = gamma_max(coeffs.b)
    chat1 = float(coeffs.chat[0]) if coeffs.chat else 0.0

    beta_ok = beta_max > 0.0 or (constants.eta == 1.0 and beta_max >= 0.0)
    if alpha_max <= 0.0 or not beta_ok:
        bad = []
        if alpha_max <= 0.0:
            bad.append(f"min T(x; a) = {alpha_max:.12g} <= 0")
        if not beta_ok:
            bad.append(f"min T(x; b) = {beta_max:.12g} <= 0")
        return DissipationReport(
            k=scheme.k,
            alpha_max=alpha_max,
            beta_max=beta_max,
            cert_a=None,
            cert_b=None,
            tau_max=None,
            constants=constants,
            chat1=chat1,
            refused=True,
            refusal_reason="; ".join(bad),
        )

    alpha = gamma_fraction * alpha_max
    beta = gamma_fraction * beta_max
    cert_a = _certificate(coeffs.a, alpha)
    cert_b = _certificate(coeffs.b, beta)
    return DissipationReport(
        k=scheme.k,
        alpha_max=alpha_max,
        beta_max=beta_max,
        cert_a=cert_a,
        cert_b=cert_b,
        tau_max=tau_max_bound(alpha, beta, chat1, constants),
        constants=constants,
        chat1=chat1,
        refused=False,
        refusal_reason=None,
    )

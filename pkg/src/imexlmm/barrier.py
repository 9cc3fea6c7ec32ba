"""Feasibility of energy-dissipative schemes and the order-7 obstruction.

``evaluate_feasibility`` scores a parameter vector by the minima of its two
generating polynomials and ``search_feasible`` hunts for positive pairs by
derivative-free pattern search.  For seven steps no feasible vector exists:
the positivity constraints at the Chebyshev nodes of [-1, 1] form a linear
system ``Q w <= q`` over the field of rationals extended by sqrt(3), and an
explicit nonnegative combination of its rows is contradictory.  The whole
order-7 pipeline runs in exact arithmetic, since a floating-point check of a
nonexistence statement would be inconclusive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import exactalg
from .chebpoly import ChebSeries, global_min
from .schemes import (
    ParameterVector,
    lmm6_parameters,
    lmm_from_parameters,
    reform,
)

__all__ = [
    "QuadExt",
    "SQRT3",
    "FarkasSystem",
    "FarkasReport",
    "FeasibilityResult",
    "SearchResult",
    "CertificateInvalidError",
    "evaluate_feasibility",
    "search_feasible",
    "build_farkas_system",
    "kernel_vectors",
    "certificate_multipliers",
    "verify_farkas_certificate",
]


class CertificateInvalidError(ArithmeticError):
    """The exact infeasibility certificate failed a check (assembly bug)."""


class QuadExt:
    """Element p + q*sqrt(3) of the real quadratic field Q(sqrt(3)).

    Arithmetic and sign are exact: p + q*sqrt(3) > 0 iff (p > 0 and
    p^2 > 3 q^2) or (q > 0 and 3 q^2 > p^2) or (p > 0 and q > 0).
    """

    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    @staticmethod
    def _coerce(other) -> "QuadExt":
        if isinstance(other, QuadExt):
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExt(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.p - o.p, self.q - o.q)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return QuadExt(-self.p, -self.q)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.p * o.p + 3 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        norm = o.p * o.p - 3 * o.q * o.q
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(3))")
        return self * QuadExt(o.p / norm, -o.q / norm)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.p == o.p and self.q == o.q

    def __hash__(self):
        return hash((self.p, self.q))

    def __bool__(self):
        return self.p != 0 or self.q != 0

    def is_positive(self) -> bool:
        p, q = self.p, self.q
        return (
            (p > 0 and p * p > 3 * q * q)
            or (q > 0 and 3 * q * q > p * p)
            or (p > 0 and q > 0)
        )

    def is_nonnegative(self) -> bool:
        return not self or self.is_positive()

    def __lt__(self, other):
        return (self._coerce(other) - self).is_positive()

    def __le__(self, other):
        return (self._coerce(other) - self).is_nonnegative()

    def __gt__(self, other):
        return (self - self._coerce(other)).is_positive()

    def __ge__(self, other):
        return (self - self._coerce(other)).is_nonnegative()

    def __float__(self):
        return float(self.p) + float(self.q) * 3.0 ** 0.5

    def __repr__(self):
        return f"QuadExt({self.p!r}, {self.q!r})"

    def __str__(self):
        return f"{self.p} + {self.q}·sqrt(3)"


SQRT3 = QuadExt(0, 1)

# cos(t*pi/6) for t mod 12; every node angle below reduces to this table.
_HALF = Fraction(1, 2)
_COS_PI_6 = {
    0: QuadExt(1),
    1: QuadExt(0, _HALF),
    2: QuadExt(_HALF),
    3: QuadExt(0),
    4: QuadExt(-_HALF),
    5: QuadExt(0, -_HALF),
    6: QuadExt(-1),
    7: QuadExt(0, -_HALF),
    8: QuadExt(-_HALF),
    9: QuadExt(0),
    10: QuadExt(_HALF),
    11: QuadExt(0, _HALF),
}


def _exact_cos_node(numerator: int, denominator: int) -> QuadExt:
    """cos(numerator*pi/denominator) for denominators dividing 6."""
    if 6 % denominator:
        raise ValueError(
            f"nodes cos(j*pi/{denominator}) do not lie in Q(sqrt(3))"
        )
    return _COS_PI_6[(numerator * (6 // denominator)) % 12]


@dataclass(frozen=True)
class FeasibilityResult:
    min_a: float
    min_b: float
    feasible: bool


def evaluate_feasibility(w) -> FeasibilityResult:
    """Minima of both generating polynomials for the scheme built from w."""
    if not isinstance(w, ParameterVector):
        w = ParameterVector(tuple(w))
    if w.k < 2:
        raise ValueError("feasibility evaluation needs k >= 2")
    coeffs = reform(lmm_from_parameters(w))
    min_a = global_min(ChebSeries(coeffs.a)).min_value
    min_b = global_min(ChebSeries(coeffs.b)).min_value
    return FeasibilityResult(
        min_a=min_a, min_b=min_b, feasible=min_a > 0.0 and min_b > 0.0
    )


@dataclass(frozen=True)
class SearchResult:
    w: ParameterVector
    min_a: float
    min_b: float
    feasible: bool
    evaluations: int


def search_feasible(
    k: int,
    budget: int = 2000,
    seed: int = 0,
    kappa: float = 1.0,
    restarts: int = 20,
) -> SearchResult:
    """Derivative-free search for a feasible parameter vector.

    Maximizes min(min_a, min_b/kappa) by coordinate pattern search with
    step halving, restarted from the known six-step point (when k = 6), the
    BDF point w = 0, and seeded random vectors.  Deterministic for a fixed
    seed; returns the best candidate found even when infeasible.
    """
    if k < 2:
        raise ValueError("search needs k >= 2")
    rng = random.Random(seed)
    evals = 0

    def objective(wf):
        nonlocal evals
        evals += 1
        res = evaluate_feasibility([Fraction(x) for x in wf])
        return min(res.min_a, res.min_b / kappa), res

    starts = []
    if k == 6:
        starts.append([float(x) for x in lmm6_parameters().w])
    starts.append([0.0] * k)
    while len(starts) < restarts:
        starts.append([rng.uniform(-50.0, 50.0) for _ in range(k)])
    share = max(2 * k + 1, budget // len(starts))

    best_w, best_score, best_res = None, -float("inf"), None
    for start in starts:
        if evals >= budget:
            break
        stop = min(budget, evals + share)
        current = list(start)
        score, res = objective(current)
        if score > best_score:
            best_w, best_score, best_res = list(current), score, res
        scales = [max(1.0, abs(c)) for c in current]
        step = 0.5
        while step > 1e-6 and evals < stop:
            improved = False
            for i in range(k):
                for sign in (1.0, -1.0):
                    if evals >= stop:
                        break
                    trial = list(current)
                    trial[i] += sign * step * scales[i]
                    s, r = objective(trial)
                    if s > score:
                        current, score, res = trial, s, r
                        improved = True
            if score > best_score:
                best_w, best_score, best_res = list(current), score, res
            if not improved:
                step /= 2.0
    return SearchResult(
        w=ParameterVector(tuple(Fraction(x) for x in best_w)),
        min_a=best_res.min_a,
        min_b=best_res.min_b,
        feasible=best_res.feasible,
        evaluations=evals,
    )


@dataclass(frozen=True)
class FarkasSystem:
    """Exact inequality system Q w <= q encoding node-wise positivity."""

    k: int
    Q: tuple  # 2k rows x k columns of QuadExt
    q: tuple  # length 2k

    def residuals(self, w) -> list:
        """q - Q w; feasibility of w means all entries nonnegative."""
        w = [x if isinstance(x, QuadExt) else QuadExt(Fraction(x)) for x in w]
        out = []
        for row, qi in zip(self.Q, self.q):
            acc = QuadExt(0)
            for c, x in zip(row, w):
                acc = acc + c * x
            out.append(qi - acc)
        return out

    def satisfied_by(self, w) -> bool:
        return all(r.is_nonnegative() for r in self.residuals(w))


def build_farkas_system(k: int = 7) -> FarkasSystem:
    """Assemble Q and q exactly over Q(sqrt(3)).

    Stacks the node-positivity constraints of both generating polynomials at
    the k Chebyshev points cos(j*pi/(k-1)); exact assembly requires those
    cosines to lie in Q(sqrt(3)), i.e. (k-1) | 6.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    n = k - 1
    Z = [[_exact_cos_node(m * j, n) for m in range(k)] for j in range(k)]

    nodes1 = [Fraction(-i) for i in range(k + 1)]
    W1_inv = exactalg.inverse(exactalg.vandermonde_transposed(nodes1))
    nodes2 = [Fraction(-i) for i in range(k)]
    W2_inv = exactalg.inverse(exactalg.vandermonde_transposed(nodes2))
    E = [[Fraction(1) if i >= j else Fraction(0) for j in range(k)] for i in range(k)]

    lift = lambda M: [[QuadExt(x) for x in row] for row in M]

    # a = [E, 0] W1^{-1} [0; w~] with w~ = e_1 + (selector) w
    Ek0 = [row + [Fraction(0)] for row in E]
    ZA = exactalg.matmul(Z, lift(exactalg.matmul(Ek0, W1_inv)))  # k x (k+1)
    selector = [[Fraction(0)] * k for _ in range(k + 1)]
    for i in range(k - 1):
        selector[i + 2][i] = Fraction(1)
    Q1 = [[-x for x in row] for row in exactalg.matmul(ZA, lift(selector))]
    e2 = [Fraction(0), Fraction(1)] + [Fraction(0)] * (k - 1)
    q1 = exactalg.matvec(ZA, [QuadExt(x) for x in e2])

    # b = E W2^{-1} (D w~ - w_k z) - [1/2; 1; ...; 1]
    ZB = exactalg.matmul(Z, lift(exactalg.matmul(E, W2_inv)))  # k x k
    dz = [[Fraction(0)] * k for _ in range(k)]
    for j in range(k - 1):
        dz[j + 1][j] = Fraction(1, j + 2)
    for i in range(k):
        dz[i][k - 1] = -(Fraction(-k) ** i)
    Q2 = [[-x for x in row] for row in exactalg.matmul(ZB, lift(dz))]
    e1 = [Fraction(1)] + [Fraction(0)] * (k - 1)
    half_ones = [Fraction(1, 2)] + [Fraction(1)] * (k - 1)
    q2_lhs = exactalg.matvec(ZB, [QuadExt(x) for x in e1])
    q2_rhs = exactalg.matvec(Z, [QuadExt(x) for x in half_ones])
    q2 = [a - b for a, b in zip(q2_lhs, q2_rhs)]

    return FarkasSystem(
        k=k,
        Q=tuple(tuple(row) for row in Q1 + Q2),
        q=tuple(q1 + q2),
    )


def _sparse_vector(entries: dict, length: int = 14) -> tuple:
    v = [QuadExt(0)] * length
    for idx, val in entries.items():
        v[idx - 1] = val
    return tuple(v)


def kernel_vectors() -> tuple:
    """Three exact left-kernel vectors of the k = 7 system matrix."""
    r1 = _sparse_vector(
        {
            3: QuadExt(Fraction(-7, 20), Fraction(6, 20)),
            5: QuadExt(Fraction(37, 540), Fraction(94, 540)),
            7: QuadExt(Fraction(-13, 640), Fraction(24, 640)),
            13: QuadExt(1),
        }
    )
    r2 = _sparse_vector(
        {
            3: QuadExt(Fraction(2, 5)),
            5: QuadExt(Fraction(-62, 135)),
            7: QuadExt(Fraction(-11, 80)),
            11: QuadExt(1),
        }
    )
    r3 = _sparse_vector(
        {
            3: QuadExt(Fraction(-7, 20), Fraction(-6, 20)),
            5: QuadExt(Fraction(37, 540), Fraction(-94, 540)),
            7: QuadExt(Fraction(-13, 640), Fraction(-24, 640)),
            9: QuadExt(1),
        }
    )
    return r1, r2, r3


def certificate_multipliers() -> tuple:
    """The nonnegative combination lambda = r1 + (3-sqrt3)/8 r2 + (2-sqrt3) r3."""
    r1, r2, r3 = kernel_vectors()
    c2 = QuadExt(Fraction(3, 8), Fraction(-1, 8))
    c3 = QuadExt(2, -1)
    return tuple(r1[i] + c2 * r2[i] + c3 * r3[i] for i in range(14))


@dataclass(frozen=True)
class FarkasReport:
    """Verified infeasibility certificate for k = 7."""

    system: FarkasSystem
    lam: tuple
    qt_lambda: QuadExt

    def summary(self) -> str:
        nz = {i + 1: str(v) for i, v in enumerate(self.lam) if v}
        lines = ["seven-step infeasibility certificate verified exactly:"]
        lines.append("  Q^T r = 0 for all three kernel vectors")
        lines.append(f"  lambda >= 0 with nonzeros {nz}")
        lines.append(f"  q^T lambda = {self.qt_lambda} < 0")
        return "\n".join(lines)


def verify_farkas_certificate() -> FarkasReport:
    """Check every condition of the order-7 infeasibility certificate exactly.

    Raises CertificateInvalidError if any of the following fails: the three
    kernel identities Q^T r = 0, entrywise nonnegativity of lambda with
    exactly four nonzero entries at the published positions and values, and
    strict negativity of q^T lambda.
    """
    system = build_farkas_system(7)
    rows = len(system.Q)
    cols = system.k

    def qt(vec):
        out = []
        for j in range(cols):
            acc = QuadExt(0)
            for i in range(rows):
                acc = acc + system.Q[i][j] * vec[i]
            out.append(acc)
        return out

    for idx, r in enumerate(kernel_vectors(), start=1):
        if any(qt(r)):
            raise CertificateInvalidError(f"Q^T r({idx}) != 0")

    lam = certificate_multipliers()
    if not all(v.is_nonnegative() for v in lam):
        raise CertificateInvalidError("lambda has a negative entry")
    nonzeros = {i + 1: lam[i] for i in range(14) if lam[i]}
    expected = {
        5: QuadExt(Fraction(5, 9), Fraction(-5, 27)),
        9: QuadExt(2, -1),
        11: QuadExt(Fraction(3, 8), Fraction(-1, 8)),
        13: QuadExt(1),
    }
    if nonzeros != expected:
        raise CertificateInvalidError(f"unexpected lambda support {nonzeros}")
    if any(qt(lam)):
        raise CertificateInvalidError("Q^T lambda != 0")

    qtl = QuadExt(0)
    for qi, li in zip(system.q, lam):
        qtl = qtl + qi * li
    if not (-qtl).is_positive():
        raise CertificateInvalidError(f"q^T lambda = {qtl} is not negative")
    return FarkasReport(system=system, lam=lam, qt_lambda=qtl)

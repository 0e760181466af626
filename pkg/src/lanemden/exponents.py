from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when (n, alpha, q1, q2) leave the admissible domain."""


@dataclass(frozen=True)
class ExponentSet:
    """Dimension, fractional order, coupling powers and the derived exponents.

    ``gamma_i = (1 + q_i) / (1 - q1 q2)``, ``r_i = 1 - 1/gamma_i`` and the
    Riesz kernel exponent ``d = n - 2 alpha``.
    """

    n: int
    alpha: float
    q1: float
    q2: float
    gamma1: float
    gamma2: float
    r1: float
    r2: float
    d: float

    def gamma(self, i: int) -> float:
        return (self.gamma1, self.gamma2)[_index(i)]

    def r(self, i: int) -> float:
        return (self.r1, self.r2)[_index(i)]

    def q(self, i: int) -> float:
        return (self.q1, self.q2)[_index(i)]

    def swapped(self) -> "ExponentSet":
        return derive_exponents(self.n, self.alpha, self.q2, self.q1)


def _index(i: int) -> int:
    if i not in (1, 2):
        raise ValueError(f"component index must be 1 or 2, got {i}")
    return i - 1


def derive_exponents(n: int, alpha: float, q1: float, q2: float) -> ExponentSet:
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension n must be a positive integer, got {n}")
    n = int(n)
    if not 0.0 < alpha < n / 2:
        raise ParameterError(f"alpha must satisfy 0 < alpha < n/2 = {n / 2}, got {alpha}")
    for name, q in (("q1", q1), ("q2", q2)):
        if not 0.0 < q < 1.0:
            raise ParameterError(f"{name} must lie in (0, 1), got {q}")
    den = 1.0 - q1 * q2
    g1 = (1.0 + q1) / den
    g2 = (1.0 + q2) / den
    if abs(g1 - (q1 * g2 + 1.0)) > 1e-12 * g1 or abs(g2 - (q2 * g1 + 1.0)) > 1e-12 * g2:
        raise ParameterError(f"exponent identities failed for q1={q1}, q2={q2}")
    return ExponentSet(
        n=n,
        alpha=float(alpha),
        q1=float(q1),
        q2=float(q2),
        gamma1=g1,
        gamma2=g2,
        r1=1.0 - 1.0 / g1,
        r2=1.0 - 1.0 / g2,
        d=n - 2.0 * alpha,
    )

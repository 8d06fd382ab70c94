"""Geodesic polar geometry on surfaces of constant curvature.

The metric is ds^2 = dr^2 + s_k(r)^2 dphi^2 with the angular factor

    s_k(r) = sin(sqrt(k) r)/sqrt(k),  r,  sinh(sqrt(-k) r)/sqrt(-k)

for positive, zero and negative curvature k.  The auxiliary radial
variable rho (sqrt(k) cot(sqrt(k) r) and its flat / hyperbolic analogues)
turns the radial part of every separable Hamiltonian into one-dimensional
motion in a polynomial-plus-simple effective potential; this module owns
the r <-> rho maps and their exact inverse relations.

All three curvature branches satisfy the identity

    1 / s_k(r)^2 == rho(r)^2 + k

which is what pins the constant term of the effective radial potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ChartDomainError

# Below this value of |k| r^2 the trig/hyperbolic branches are evaluated by
# series: the 1/sqrt(|k|) prefactors would otherwise cancel catastrophically.
_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class Curvature:
    """Gaussian curvature k; the sign sigma is always derived, never stored."""

    k: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.k):
            raise ValueError(f"curvature must be finite, got {self.k}")

    @property
    def sigma(self) -> int:
        return (self.k > 0) - (self.k < 0)

    @property
    def r_max(self) -> float:
        """Upper boundary of the first geodesic polar chart."""
        return math.pi / math.sqrt(self.k) if self.k > 0 else math.inf

    @property
    def rho_min(self) -> float:
        """Infimum of rho over the chart (not attained)."""
        if self.k < 0:
            return math.sqrt(-self.k)
        if self.k == 0:
            return 0.0
        return -math.inf


def as_curvature(k: Curvature | float) -> Curvature:
    return k if isinstance(k, Curvature) else Curvature(float(k))


def _require_chart(k: Curvature, r: float) -> None:
    if not r > 0.0:
        raise ChartDomainError(f"r must be positive, got {r}")
    if r >= k.r_max:
        raise ChartDomainError(
            f"r={r} outside the first chart (0, {k.r_max}) for k={k.k}"
        )


def metric_factor(k: Curvature, r: float) -> float:
    """Angular metric factor s_k(r); positive on the open chart."""
    _require_chart(k, r)
    u = k.k * r * r
    if abs(u) < _SERIES_CUTOFF:
        # sin(x)/x-type series in u = k r^2, valid for either sign of k
        return r * (1.0 - u / 6.0 + u * u / 120.0 - u ** 3 / 5040.0)
    if k.k > 0:
        rk = math.sqrt(k.k)
        return math.sin(rk * r) / rk
    rk = math.sqrt(-k.k)
    return math.sinh(rk * r) / rk


def metric_factor_deriv(k: Curvature, r: float) -> float:
    """d s_k/d r: cos(sqrt(k) r), 1, or cosh(sqrt(-k) r)."""
    _require_chart(k, r)
    if k.k > 0:
        return math.cos(math.sqrt(k.k) * r)
    if k.k == 0:
        return 1.0
    return math.cosh(math.sqrt(-k.k) * r)


def rho_of_r(k: Curvature, r: float) -> float:
    """Auxiliary radial coordinate; strictly decreasing in r on the chart."""
    _require_chart(k, r)
    u = k.k * r * r
    if abs(u) < _SERIES_CUTOFF:
        # cot/coth series share the same expansion in k
        return 1.0 / r - k.k * r / 3.0 - k.k ** 2 * r ** 3 / 45.0 \
            - 2.0 * k.k ** 3 * r ** 5 / 945.0
    if k.k > 0:
        rk = math.sqrt(k.k)
        return rk / math.tan(rk * r)
    rk = math.sqrt(-k.k)
    return rk / math.tanh(rk * r)


def r_of_rho(k: Curvature, rho: float) -> float:
    """Exact inverse of :func:`rho_of_r` on its range."""
    if k.k == 0:
        if rho <= 0.0:
            raise ChartDomainError(f"flat chart requires rho > 0, got {rho}")
        return 1.0 / rho
    if k.k < 0:
        rk = math.sqrt(-k.k)
        if rho <= rk:
            raise ChartDomainError(
                f"hyperbolic chart requires rho > sqrt(-k)={rk}, got {rho}"
            )
        if k.k * k.k / (rho * rho) < _SERIES_CUTOFF * abs(k.k):
            return _r_of_rho_series(k.k, rho)
        return math.atanh(rk / rho) / rk
    # spherical: rho ranges over all reals; arccot branch in (0, pi)
    rk = math.sqrt(k.k)
    if rho > 0.0 and k.k / (rho * rho) < _SERIES_CUTOFF:
        return _r_of_rho_series(k.k, rho)
    return (math.pi / 2.0 - math.atan(rho / rk)) / rk


def _r_of_rho_series(kk: float, rho: float) -> float:
    # arctan/artanh series in k/rho^2, shared by both signs
    return 1.0 / rho - kk / (3.0 * rho ** 3) + kk * kk / (5.0 * rho ** 5) \
        - kk ** 3 / (7.0 * rho ** 7)


def inverse_metric_sq(k: Curvature, rho: float) -> float:
    """1/s_k(r)^2 expressed through rho; equals rho^2 + k identically."""
    return rho * rho + k.k

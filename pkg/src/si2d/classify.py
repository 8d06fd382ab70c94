"""End-to-end superintegrability verdicts.

A separable system is superintegrable exactly when the radial period in
the effective potential is energy independent and commensurate with the
angular period, T_rho(A) = q T_phi(A) with one rational q for every A.
The report below measures both properties by quadrature and, when the
radial part belongs to one of the two closed-form families, checks that
the angular periods match the family prediction.

The central (free angular) specialization reproduces the closed-orbit
classification of central potentials: only the gamma = 0 oscillator
(q = 1/2) and the B = F = 0 Coulomb-type potential (q = 1) survive, on
all three curvature signs alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .actions import (
    angular_period,
    bound_energy_range,
    closed_form_period,
    isochrony_scan,
    rational_from_ratio,
)
from .potentials import (
    AngularPotential,
    Kepler,
    Oscillator,
    RadialFamily,
    RadialPotential,
)

_SPREAD_TOL = 1e-6
_Q_RESIDUAL_TOL = 1e-6
_FAMILY_FIT_TOL = 1e-6


@dataclass(frozen=True)
class Verdict:
    """Aggregated superintegrability evidence for one system."""

    isochronous: bool
    relative_spread: float
    q_estimate: Optional[Fraction]
    q_residual: float
    family_match: str  # "oscillator" | "kepler" | "none"
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "isochronous": self.isochronous,
            "relative_spread": self.relative_spread,
            "q_estimate": None if self.q_estimate is None else str(self.q_estimate),
            "q_value": None if self.q_estimate is None else float(self.q_estimate),
            "q_residual": self.q_residual,
            "family_match": self.family_match,
            "notes": list(self.notes),
        }


def central_q(family: RadialFamily) -> Optional[Fraction]:
    """Commensurability of the central (U = 0, cell pi) case, if any.

    Only the pure oscillator (gamma = 0) and the pure Coulomb-type
    potential (B = F = 0) close all bounded central orbits.
    """
    if isinstance(family, Oscillator) and family.gamma == 0.0:
        return Fraction(1, 2)
    if isinstance(family, Kepler) and family.B == 0.0 and family.F == 0.0:
        return Fraction(1)
    return None


def _family_fit(
    family: RadialFamily, A_samples: Sequence[float], T_phi: Sequence[float]
) -> tuple[str, float]:
    """Least-squares fit of the family's closed-form period, q free.

    The model is 1/T^2 = q^2 / c(A)^2 with c(A) the closed form at q = 1,
    linear in the single unknown q^2.  Returns the family tag and the
    worst relative deviation of the fitted periods.
    """
    if not isinstance(family, (Oscillator, Kepler)):
        return "none", math.inf
    c = [closed_form_period(family, a, 1.0) for a in A_samples]
    num = sum((1.0 / t ** 2) * (1.0 / ci ** 2) for t, ci in zip(T_phi, c))
    den = sum((1.0 / ci ** 2) ** 2 for ci in c)
    q_sq = num / den
    if q_sq <= 0:
        return "none", math.inf
    q = math.sqrt(q_sq)
    resid = max(abs(ci / q - t) / t for ci, t in zip(c, T_phi))
    tag = "oscillator" if isinstance(family, Oscillator) else "kepler"
    return (tag if resid < _FAMILY_FIT_TOL else "none"), resid


def superintegrability_report(
    V: RadialPotential,
    U: AngularPotential,
    A_samples: Sequence[float],
    E_samples: Sequence[float] | None = None,
) -> Verdict:
    """Measure isochronicity and period commensurability by quadrature.

    E_samples may be omitted, in which case five energies are drawn from
    the bound window at each A.  The rational q search is capped at
    denominator 64 with residual tolerance 1e-6; quadrature accuracy does
    not support distinguishing finer rationals.
    """
    notes: list[str] = []
    spreads: list[float] = []
    ratios: list[float] = []
    t_phis: list[float] = []
    for a in A_samples:
        if E_samples is None:
            e_lo, e_hi = bound_energy_range(V, a)
            energies = [e_lo + f * (e_hi - e_lo) for f in (0.1, 0.3, 0.5, 0.7, 0.9)]
        else:
            energies = list(E_samples)
        report = isochrony_scan(V, a, energies)
        spreads.append(report.relative_spread)
        t_phi = angular_period(U, a)
        t_phis.append(t_phi)
        ratios.append(report.T_quadrature / t_phi)

    spread = max(spreads)
    isochronous = spread < _SPREAD_TOL
    notes.append(f"max radial-period spread over E: {spread:.3e}")

    ratio_mean = sum(ratios) / len(ratios)
    q = rational_from_ratio(ratio_mean, max_denominator=64, tol=_Q_RESIDUAL_TOL)
    if q is not None:
        q_residual = max(abs(r - float(q)) / float(q) for r in ratios)
        if q_residual >= _Q_RESIDUAL_TOL:
            q = None
    if q is None:
        # report how far the mean ratio sits from the nearest capped rational
        nearest = rational_from_ratio(ratio_mean, max_denominator=64, tol=math.inf)
        q_residual = (
            abs(ratio_mean - float(nearest)) / float(nearest)
            if nearest is not None
            else math.inf
        )
        notes.append(f"period ratio {ratio_mean:.9f} not rational within cap")
    else:
        notes.append(f"period ratio locked to q = {q} (residual {q_residual:.3e})")

    family_match, fit_resid = _family_fit(V.family, A_samples, t_phis)
    notes.append(f"family closed-form fit residual: {fit_resid:.3e}")
    if not isochronous and q is None:
        family_match = "none"

    return Verdict(
        isochronous=isochronous,
        relative_spread=spread,
        q_estimate=q,
        q_residual=q_residual,
        family_match=family_match,
        notes=tuple(notes),
    )

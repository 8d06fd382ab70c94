"""Recovering an angular well from its period function.

The period T(A) of one-dimensional motion in a single well determines the
width of the well at every height,

    delta_phi(U) = (1/(pi sqrt(2))) * integral_{U0}^{U} T(A) dA / sqrt(U - A),

but not its shape: the two walls are assembled as

    phi_plus(U)  = +delta_phi(U)/2 + G(U)
    phi_minus(U) = -delta_phi(U)/2 + G(U)

with G any function keeping both branches single valued.  The constant
choice centres the well; the arccos form of :func:`g_ttw` selects the
Poschl-Teller shape.

For the two radial families the transform has closed forms.  Note two
sign/constant conventions adopted here: the widths are non-negative with
all branch signs living in the plus/minus assembly, and the closed-form
arcsine argument for the oscillator family is (U - gamma - 2 U0)/(U + gamma)
— the variant that vanishes at U = U0 and matches the transform of the
period function exactly (tested digit for digit against quadrature).

The overall split of the radial action into an energy part and the
-q J_phi part is only fixed up to a constant; nothing in this module ever
needs that constant (or the arbitrary amplitude factor multiplying the
third invariant), so neither is represented numerically.  All widths are
measured relative to the well bottom U0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .actions import angular_period
from .errors import BranchOverlapError, ChartDomainError
from .potentials import AngularPotential, Kepler, Oscillator, Tabulated

_QUAD_KW = dict(epsabs=1e-13, epsrel=1e-12, limit=250)


def delta_phi_numeric(T: Callable[[float], float], U0: float, U: float) -> float:
    """Abel transform of a period function: the well width at height U.

    The substitution A = U0 + (U - U0) sin^2(theta) removes the endpoint
    singularity exactly (the weight becomes 2 sqrt(U - U0) sin(theta)).
    """
    if U <= U0:
        raise ChartDomainError(f"need U > U0, got U={U}, U0={U0}")
    span = U - U0

    def g(th: float) -> float:
        s = math.sin(th)
        return T(U0 + span * s * s) * s

    val = quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]
    return 2.0 * math.sqrt(span) * val / (math.pi * math.sqrt(2.0))


def delta_phi_closed(
    family: Union[Oscillator, Kepler], q, U0: float, U: float
) -> float:
    """Closed-form well width for a family period function.

    Oscillator: (1/2q) (arcsin((U - gamma - 2 U0)/(U + gamma)) + pi/2).
    Kepler: the same construction applied to each of the two square-root
    terms; the sum equals the single combined arcsine via the addition
    identity.  Both vanish at U = U0 and saturate at pi/(2q) and pi/q.
    """
    qv = float(q)
    if U < U0:
        raise ChartDomainError(f"need U >= U0, got U={U}, U0={U0}")
    if isinstance(family, Oscillator):
        g = family.gamma
        if U + g <= 0:
            raise ChartDomainError(f"need U + gamma > 0, got {U + g}")
        arg = (U - g - 2.0 * U0) / (U + g)
        if not -1.0 - 1e-12 <= arg <= 1.0 + 1e-12:
            raise ChartDomainError(
                f"arcsine argument {arg} outside [-1, 1]: inconsistent (U0, gamma)"
            )
        return (math.asin(max(-1.0, min(arg, 1.0))) + math.pi / 2.0) / (2.0 * qv)
    if isinstance(family, Kepler):
        total = 0.0
        for c in (family.B + math.sqrt(family.F), family.B - math.sqrt(family.F)):
            if U + c <= 0:
                raise ChartDomainError(f"need U + B -/+ sqrt(F) > 0, got {U + c}")
            arg = (U - c - 2.0 * U0) / (U + c)
            if not -1.0 - 1e-12 <= arg <= 1.0 + 1e-12:
                raise ChartDomainError(
                    f"arcsine argument {arg} outside [-1, 1]: inconsistent (U0, B, F)"
                )
            total += math.asin(max(-1.0, min(arg, 1.0))) + math.pi / 2.0
        return total / (2.0 * qv)
    raise TypeError("closed widths exist only for the two radial families")


def g_ttw(U: float, alpha: float, beta: float, n: float) -> float:
    """Branch-centre function selecting the Poschl-Teller assembly."""
    if not U > 0:
        raise ChartDomainError(f"need U > 0, got {U}")
    arg = n * (math.sqrt(alpha) - math.sqrt(beta)) / math.sqrt(U)
    if not -1.0 <= arg <= 1.0:
        raise ChartDomainError(f"arccos argument {arg} outside [-1, 1]")
    return math.acos(arg) / (2.0 * n)


@dataclass(frozen=True)
class ConstantG:
    """Constant branch centre: a well symmetric about phi0."""

    phi0: float

    def __call__(self, U: float) -> float:
        return self.phi0


@dataclass(frozen=True)
class TTWG:
    """Poschl-Teller branch centre (the arccos form)."""

    alpha: float
    beta: float
    n: float

    def __call__(self, U: float) -> float:
        return g_ttw(U, self.alpha, self.beta, self.n)


GSpec = Union[ConstantG, TTWG, Callable[[float], float]]


@dataclass(frozen=True)
class BranchFunction:
    """Sampled wall positions phi_plus/phi_minus over increasing heights."""

    U0: float
    u: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    def __post_init__(self) -> None:
        du = np.diff(self.u)
        if not np.all(du > 0):
            raise ValueError("height grid must be strictly increasing")
        if not (np.all(np.diff(self.phi_plus) >= 0) and np.all(np.diff(self.phi_minus) <= 0)):
            raise BranchOverlapError(
                "wall positions are not monotone in the height: the chosen G "
                "does not produce a single-valued potential"
            )


def default_height_grid(U0: float, n_points: int = 512, top: float = 1e4) -> np.ndarray:
    """Geometric grid of heights hugging the well bottom."""
    return U0 + np.geomspace(1e-8, top, n_points)


def reconstruct_angular(
    source: Union[Oscillator, Kepler, Callable[[float], float]],
    q,
    U0: float,
    g_spec: GSpec,
    u_grid: Optional[Sequence[float]] = None,
) -> tuple[BranchFunction, Tabulated]:
    """Assemble the angular potential determined by a period function.

    ``source`` is either a radial family (closed-form widths) or a period
    function T(A) (numeric Abel transform).  Returns the sampled branches
    and the tabulated single-well potential obtained by inverting them.
    """
    u = np.asarray(u_grid, dtype=float) if u_grid is not None else default_height_grid(U0)
    if u.ndim != 1 or u.size < 8:
        raise ValueError("need a 1-d height grid with at least 8 points")
    if not (np.all(np.diff(u) > 0) and u[0] > U0):
        raise ValueError("height grid must increase strictly from above U0")

    if isinstance(source, (Oscillator, Kepler)):
        widths = np.array([delta_phi_closed(source, q, U0, ui) for ui in u])
    else:
        widths = np.array([delta_phi_numeric(source, U0, ui) for ui in u])
    g = np.array([g_spec(ui) for ui in u])

    branches = BranchFunction(
        U0=U0, u=u, phi_plus=g + 0.5 * widths, phi_minus=g - 0.5 * widths
    )

    phis = np.concatenate([branches.phi_minus[::-1], branches.phi_plus])
    us = np.concatenate([u[::-1], u])
    keep = np.concatenate([[True], np.diff(phis) > 1e-14])
    tab = Tabulated(phis[keep], us[keep])
    return branches, tab


def sampled_period_function(
    U: AngularPotential, A_min: float, A_max: float, n_samples: int = 240
) -> Callable[[float], float]:
    """Quadrature periods of an angular well, cached on a geometric grid.

    The interpolation runs in log T against log A (family periods are pure
    power laws there), so a few hundred samples reproduce the quadrature to
    well below the Abel-transform tolerance while keeping the nested
    integrals affordable.
    """
    a = np.geomspace(A_min, A_max, n_samples)
    t = np.array([angular_period(U, ai) for ai in a])
    interp = PchipInterpolator(np.log(a), np.log(t))

    def T(x: float) -> float:
        if x <= 0:
            raise ChartDomainError(f"period function sampled for A > 0, got {x}")
        if x < a[0] or x > a[-1]:
            raise ChartDomainError(f"A={x} outside the sampled range [{a[0]}, {a[-1]}]")
        return float(math.exp(interp(math.log(x))))

    return T

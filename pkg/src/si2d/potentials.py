"""Radial potential families, angular wells, and the isochrony analysis.

Two families of radial potentials make the effective radial motion
isochronous (period independent of energy) and hence admit a third global
integral when paired with a commensurate angular well:

    oscillator family:  Vt(rho) = gamma rho^2 + delta / rho^2
    Kepler family:      Vt(rho) = B rho^2 - rho sqrt(D + F rho^2)

``Vt`` is the potential in the auxiliary rho variable; the physical radial
potential V(r) follows by substituting rho(r) for the given curvature.
The module also provides the Poschl-Teller angular well, tabulated wells
produced by Abel inversion, the free (central) case, and the local
expansion of the effective potential around its minimum together with the
fourth-order anharmonicity condition that singles out the two families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    AdmissibilityError,
    ChartDomainError,
    DegenerateMinimumError,
    SingularDenominatorError,
)
from .geometry import Curvature, as_curvature, metric_factor, rho_of_r


# ---------------------------------------------------------------------------
# radial families (functions of the auxiliary variable rho)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Oscillator:
    """gamma rho^2 + delta / rho^2; contains the isotropic oscillator at k=0."""

    gamma: float
    delta: float

    def __post_init__(self) -> None:
        if self.gamma < 0 or self.delta < 0:
            raise AdmissibilityError(
                f"oscillator family needs gamma, delta >= 0, got "
                f"({self.gamma}, {self.delta})"
            )

    # a positive delta walls off rho = 0; the radial motion then cannot
    # cross the equator of the sphere
    @property
    def singular_at_zero(self) -> bool:
        return self.delta > 0

    def tilde(self, rho: float) -> float:
        if rho == 0.0 and self.delta != 0.0:
            raise ChartDomainError("rho=0 with a delta/rho^2 barrier")
        out = self.gamma * rho * rho
        if self.delta != 0.0:
            out += self.delta / (rho * rho)
        return out

    def tilde_d1(self, rho: float) -> float:
        out = 2.0 * self.gamma * rho
        if self.delta != 0.0:
            out -= 2.0 * self.delta / rho ** 3
        return out

    def tilde_d2(self, rho: float) -> float:
        out = 2.0 * self.gamma
        if self.delta != 0.0:
            out += 6.0 * self.delta / rho ** 4
        return out

    def tilde_d3(self, rho: float) -> float:
        return -24.0 * self.delta / rho ** 5 if self.delta != 0.0 else 0.0

    def tilde_d4(self, rho: float) -> float:
        return 120.0 * self.delta / rho ** 6 if self.delta != 0.0 else 0.0


@dataclass(frozen=True)
class Kepler:
    """B rho^2 - rho sqrt(D + F rho^2); contains the Coulomb system at k=0."""

    B: float
    D: float
    F: float

    def __post_init__(self) -> None:
        if self.B < 0 or self.D < 0 or self.F < 0:
            raise AdmissibilityError(
                f"Kepler family needs B, D, F >= 0, got "
                f"({self.B}, {self.D}, {self.F})"
            )

    @property
    def singular_at_zero(self) -> bool:
        return False

    def _s(self, rho: float) -> float:
        return math.sqrt(self.D + self.F * rho * rho)

    def tilde(self, rho: float) -> float:
        return self.B * rho * rho - rho * self._s(rho)

    def tilde_d1(self, rho: float) -> float:
        s = self._s(rho)
        if s == 0.0:
            return 2.0 * self.B * rho  # D = F = 0: pure quadratic
        return 2.0 * self.B * rho - (self.D + 2.0 * self.F * rho * rho) / s

    def tilde_d2(self, rho: float) -> float:
        s = self._s(rho)
        if s == 0.0 or self.F == 0.0:
            return 2.0 * self.B
        return 2.0 * self.B - self.F * rho * (3.0 * self.D + 2.0 * self.F * rho * rho) / s ** 3

    def tilde_d3(self, rho: float) -> float:
        if self.F == 0.0:
            return 0.0
        return -3.0 * self.D ** 2 * self.F / self._s(rho) ** 5

    def tilde_d4(self, rho: float) -> float:
        if self.F == 0.0:
            return 0.0
        return 15.0 * self.D ** 2 * self.F ** 2 * rho / self._s(rho) ** 7


# five-point central stencils; the step for the high derivatives is near the
# rounding/truncation optimum, the nominal 1e-4 step is kept for d1/d2
_FD_STEPS = (1e-4, 1e-4, 1e-3, 3e-3)


@dataclass(frozen=True)
class CustomTilde:
    """User-supplied rho-potential with optional analytic derivatives.

    Derivative slots left as None fall back to five-point finite
    differences; note the finite-difference fourth derivative carries only
    a few significant digits, so controls used in exact-residual tests
    should supply analytic derivatives.
    """

    func: Callable[[float], float]
    d1: Optional[Callable[[float], float]] = None
    d2: Optional[Callable[[float], float]] = None
    d3: Optional[Callable[[float], float]] = None
    d4: Optional[Callable[[float], float]] = None
    singular_at_zero: bool = False

    def tilde(self, rho: float) -> float:
        return self.func(rho)

    def _fd(self, order: int, rho: float) -> float:
        h = _FD_STEPS[order - 1] * (1.0 + abs(rho))
        f = self.func
        fm2, fm1 = f(rho - 2 * h), f(rho - h)
        fp1, fp2 = f(rho + h), f(rho + 2 * h)
        if order == 1:
            return (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
        if order == 2:
            return (-fp2 + 16 * fp1 - 30 * f(rho) + 16 * fm1 - fm2) / (12 * h * h)
        if order == 3:
            return (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h ** 3)
        return (fp2 - 4 * fp1 + 6 * f(rho) - 4 * fm1 + fm2) / h ** 4

    def tilde_d1(self, rho: float) -> float:
        return self.d1(rho) if self.d1 is not None else self._fd(1, rho)

    def tilde_d2(self, rho: float) -> float:
        return self.d2(rho) if self.d2 is not None else self._fd(2, rho)

    def tilde_d3(self, rho: float) -> float:
        return self.d3(rho) if self.d3 is not None else self._fd(3, rho)

    def tilde_d4(self, rho: float) -> float:
        return self.d4(rho) if self.d4 is not None else self._fd(4, rho)


RadialFamily = Union[Oscillator, Kepler, CustomTilde]


def eval_tilde(family: RadialFamily, rho: float) -> float:
    """Value of the rho-potential Vt(rho)."""
    return family.tilde(rho)


@dataclass(frozen=True)
class RadialPotential:
    """A radial family attached to a curvature; evaluable in r or rho."""

    family: RadialFamily
    curvature: Curvature

    def tilde(self, rho: float) -> float:
        return self.family.tilde(rho)

    def w_eff(self, rho: float, A: float) -> float:
        return effective_potential(self.family, A, self.curvature, rho)


def eval_radial(V: RadialPotential, r: float) -> float:
    """Physical radial potential V(r) from the curvature branch table.

    Implemented directly in terms of tan/tanh so it stays an independent
    cross-check of Vt(rho(r)); the two agree to rounding on the whole
    chart (for the sphere this requires the square-root term to carry the
    sign of cot, i.e. the continuation across the equator).
    """
    k = V.curvature
    fam = V.family
    if isinstance(fam, CustomTilde):
        return fam.tilde(rho_of_r(k, r))
    if k.k == 0:
        if not r > 0:
            raise ChartDomainError(f"r must be positive, got {r}")
        if isinstance(fam, Oscillator):
            return fam.gamma / r ** 2 + fam.delta * r ** 2
        return fam.B / r ** 2 - math.sqrt(fam.D * r ** 2 + fam.F) / r ** 2
    if k.k < 0:
        ak = -k.k
        if not r > 0:
            raise ChartDomainError(f"r must be positive, got {r}")
        t = math.tanh(math.sqrt(ak) * r)
        if isinstance(fam, Oscillator):
            return fam.gamma * ak / t ** 2 + fam.delta * t ** 2 / ak
        rad = fam.D * t ** 2 / ak + fam.F
        if rad < 0:
            raise AdmissibilityError("negative radicand in Kepler branch")
        return fam.B * ak / t ** 2 - (ak / t ** 2) * math.sqrt(rad)
    kk = k.k
    if not 0 < r < k.r_max:
        raise ChartDomainError(f"r={r} outside the chart (0, {k.r_max})")
    t = math.tan(math.sqrt(kk) * r)
    if isinstance(fam, Oscillator):
        return fam.gamma * kk / t ** 2 + fam.delta * t ** 2 / kk
    rad = fam.D / kk + fam.F / t ** 2
    if rad < 0:
        raise AdmissibilityError("negative radicand in Kepler branch")
    # odd in cot: keeps V(r) == Vt(rho(r)) beyond the equator where cot < 0
    return fam.B * kk / t ** 2 - (kk / t) * math.sqrt(rad)


def effective_potential(
    family: RadialFamily, A: float, k: Curvature | float, rho: float
) -> float:
    """Effective radial potential W(rho) = Vt(rho) + A rho^2 + k A.

    The constant term k*A follows from A/s_k(r)^2 == A (rho^2 + k); it only
    offsets the energy and never the shape, which is why the radial period
    is curvature independent.
    """
    k = as_curvature(k)
    return family.tilde(rho) + A * rho * rho + k.k * A


# ---------------------------------------------------------------------------
# angular potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoschlTeller:
    """n^2 alpha / cos^2(n phi) + n^2 beta / sin^2(n phi) on (0, pi/2n).

    With beta = 0 the sin-wall drops to the finite value n^2 alpha; the
    cell is kept open at 0 and the left edge acts as a reflecting wall so
    that actions and periods continue the beta > 0 closed forms.
    """

    alpha: float
    beta: float
    n: float

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise AdmissibilityError("Poschl-Teller needs alpha, beta >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise AdmissibilityError("alpha = beta = 0 is the free case; use Free")
        if not self.n > 0:
            raise AdmissibilityError(f"n must be positive, got {self.n}")

    @property
    def cell(self) -> tuple[float, float]:
        return (0.0, math.pi / (2.0 * self.n))

    @property
    def phi_min(self) -> float:
        """Location of the well bottom: tan^4(n phi) = beta/alpha."""
        if self.beta == 0.0:
            return 0.0
        if self.alpha == 0.0:
            return math.pi / (2.0 * self.n)
        return math.atan((self.beta / self.alpha) ** 0.25) / self.n

    @property
    def u_min(self) -> float:
        """Minimum value n^2 (sqrt(alpha) + sqrt(beta))^2."""
        return self.n ** 2 * (math.sqrt(self.alpha) + math.sqrt(self.beta)) ** 2

    def _check(self, phi: float) -> None:
        lo, hi = self.cell
        if self.beta == 0.0:
            lo = -hi  # symmetric continuation through phi = 0
        if self.alpha == 0.0:
            hi = 2.0 * hi
        if not lo < phi < hi:
            raise ChartDomainError(f"phi={phi} outside the cell ({lo}, {hi})")

    def value(self, phi: float) -> float:
        self._check(phi)
        n = self.n
        out = 0.0
        if self.alpha != 0.0:
            out += n * n * self.alpha / math.cos(n * phi) ** 2
        if self.beta != 0.0:
            out += n * n * self.beta / math.sin(n * phi) ** 2
        return out

    def deriv(self, phi: float) -> float:
        self._check(phi)
        n = self.n
        out = 0.0
        if self.alpha != 0.0:
            out += 2 * n ** 3 * self.alpha * math.sin(n * phi) / math.cos(n * phi) ** 3
        if self.beta != 0.0:
            out -= 2 * n ** 3 * self.beta * math.cos(n * phi) / math.sin(n * phi) ** 3
        return out

    def second_deriv(self, phi: float) -> float:
        self._check(phi)
        n = self.n
        s, c = math.sin(n * phi), math.cos(n * phi)
        out = 0.0
        if self.alpha != 0.0:
            out += 2 * n ** 4 * self.alpha * (1.0 / c ** 2 + 3.0 * s ** 2 / c ** 4)
        if self.beta != 0.0:
            out += 2 * n ** 4 * self.beta * (1.0 / s ** 2 + 3.0 * c ** 2 / s ** 4)
        return out


@dataclass(frozen=True)
class Free:
    """No angular force; only the length of the angular cell matters."""

    delta_phi: float

    def __post_init__(self) -> None:
        if not self.delta_phi > 0:
            raise AdmissibilityError("delta_phi must be positive")

    def value(self, phi: float) -> float:
        return 0.0

    def deriv(self, phi: float) -> float:
        return 0.0


class Tabulated:
    """Single-well angular potential given on a strictly increasing grid.

    Interpolation is monotone cubic (PCHIP) applied to 1/sqrt(U - U_ref):
    near a steep wall U grows like 1/(phi_wall - phi)^2, so the transformed
    values are nearly linear in phi and the interpolant stays accurate all
    the way up the walls.
    """

    def __init__(self, phi: Sequence[float], u: Sequence[float]):
        phi = np.asarray(phi, dtype=float)
        u = np.asarray(u, dtype=float)
        if phi.ndim != 1 or phi.shape != u.shape or phi.size < 4:
            raise AdmissibilityError("need matching 1-d grids with >= 4 points")
        if not np.all(np.diff(phi) > 0):
            raise AdmissibilityError("phi grid must be strictly increasing")
        imin = int(np.argmin(u))
        if imin == 0 or imin == u.size - 1:
            raise AdmissibilityError("grid must contain an interior minimum")
        if not (np.all(np.diff(u[: imin + 1]) <= 0) and np.all(np.diff(u[imin:]) >= 0)):
            raise AdmissibilityError("grid must describe a single well")
        self.phi_grid = phi
        self.u_grid = u
        span = float(u.max() - u.min())
        self._u_ref = float(u.min()) - max(1e-3 * span, 1e-9)
        self._interp = PchipInterpolator(phi, 1.0 / np.sqrt(u - self._u_ref))
        self._dinterp = self._interp.derivative()

    @property
    def cell(self) -> tuple[float, float]:
        return (float(self.phi_grid[0]), float(self.phi_grid[-1]))

    @property
    def phi_min(self) -> float:
        return float(self.phi_grid[np.argmin(self.u_grid)])

    @property
    def u_min(self) -> float:
        return float(self.u_grid.min())

    def _check(self, phi: float) -> None:
        lo, hi = self.cell
        if not lo <= phi <= hi:
            raise ChartDomainError(f"phi={phi} outside the tabulated range [{lo}, {hi}]")

    def value(self, phi: float) -> float:
        self._check(phi)
        w = float(self._interp(phi))
        return self._u_ref + 1.0 / (w * w)

    def deriv(self, phi: float) -> float:
        self._check(phi)
        w = float(self._interp(phi))
        return -2.0 * float(self._dinterp(phi)) / w ** 3


AngularPotential = Union[PoschlTeller, Free, Tabulated]


def eval_angular(U: AngularPotential, phi: float) -> float:
    """Angular potential value; 0 for the free case."""
    return U.value(phi)


# ---------------------------------------------------------------------------
# expansion around the effective-potential minimum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorExpansion:
    """Local data of W(rho) at a minimum rho0 for the A implied by rho0."""

    rho0: float
    A_implied: float
    E0: float
    omega0_sq: float
    alpha3: float
    beta4: float

    @property
    def omega0(self) -> float:
        return math.sqrt(self.omega0_sq)


def taylor_coefficients(
    family: RadialFamily, rho0: float, curvature: Curvature | float = 0.0
) -> TaylorExpansion:
    """Expansion of the effective potential around rho0.

    The separation constant making rho0 a stationary point is
    A = -Vt'(rho0)/(2 rho0); the curvature only shifts E0 through the
    constant k*A term.
    """
    d1 = family.tilde_d1(rho0)
    d2 = family.tilde_d2(rho0)
    a_implied = -d1 / (2.0 * rho0)
    omega0_sq = d2 - d1 / rho0
    if omega0_sq <= 0.0:
        raise DegenerateMinimumError(
            f"no quadratic minimum at rho0={rho0}: omega0^2={omega0_sq}"
        )
    k = as_curvature(curvature)
    return TaylorExpansion(
        rho0=rho0,
        A_implied=a_implied,
        E0=family.tilde(rho0) + a_implied * rho0 * rho0 + k.k * a_implied,
        omega0_sq=omega0_sq,
        alpha3=0.5 * family.tilde_d3(rho0),
        beta4=family.tilde_d4(rho0) / 6.0,
    )


def anharmonic_frequency(T: TaylorExpansion, a: float) -> float:
    """Oscillation frequency at amplitude a, to fourth order in the expansion.

    For members of the two radial families the amplitude-dependent term
    vanishes identically and the harmonic frequency is exact.
    """
    if not a >= 0:
        raise ValueError("amplitude must be non-negative")
    w0 = T.omega0
    corr = 0.75 * T.beta4 - (5.0 / 6.0) * T.alpha3 ** 2 / T.omega0_sq
    return w0 + corr * a * a / (2.0 * w0)


def isochrony_residual(family: RadialFamily | Callable[[float], float], rho: float) -> float:
    """Residual 3 Vt'''' (Vt'' - Vt'/rho) - 5 (Vt''')^2.

    Zero exactly on both radial families; nonzero for any other smooth
    rho-potential (rho^4 gives -2304 at rho = 1).
    """
    fam = family if hasattr(family, "tilde_d1") else CustomTilde(family)
    d1 = fam.tilde_d1(rho)
    d2 = fam.tilde_d2(rho)
    d3 = fam.tilde_d3(rho)
    d4 = fam.tilde_d4(rho)
    denom = d2 - d1 / rho
    scale = max(abs(d2), abs(d1 / rho), 1e-300)
    if abs(denom) <= 1e-14 * scale:
        raise SingularDenominatorError(
            f"Vt'' - Vt'/rho vanishes at rho={rho}; the isochrony condition is singular"
        )
    return 3.0 * d4 * denom - 5.0 * d3 * d3


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

PRESET_NAMES = (
    "ttw",
    "pw",
    "higgs",
    "schroedinger_coulomb",
    "flat_oscillator",
    "flat_kepler",
)


def preset(
    name: str, k: Curvature | float, **params
) -> tuple[RadialPotential, AngularPotential, Fraction]:
    """Named model: (radial potential, angular potential, commensurability q).

    ttw:  oscillator radial (gamma=0) + Poschl-Teller well, q = n.
    pw:   Coulomb-type radial (B=F=0) + half-frequency Poschl-Teller well
          (cell width pi/n), q = n.  The half frequency is what makes the
          radial-to-angular period ratio equal n; a full-frequency well
          would double the ratio.
    higgs / schroedinger_coulomb: curved central cases, q = 1/2 and 1.
    flat_oscillator / flat_kepler: their zero-curvature limits.
    """
    k = as_curvature(k)
    params = dict(params)

    def take(key: str, default=None):
        if key in params:
            return float(params.pop(key))
        if default is None:
            raise AdmissibilityError(f"preset '{name}' needs parameter '{key}'")
        return float(default)

    if name == "ttw":
        delta = take("delta")
        alpha, beta, n = take("alpha"), take("beta"), take("n")
        out = (
            RadialPotential(Oscillator(0.0, delta), k),
            PoschlTeller(alpha, beta, n),
            Fraction(n).limit_denominator(1000),
        )
    elif name == "pw":
        d = take("D")
        alpha, beta, n = take("alpha"), take("beta"), take("n")
        out = (
            RadialPotential(Kepler(0.0, d, 0.0), k),
            PoschlTeller(alpha, beta, n / 2.0),
            Fraction(n).limit_denominator(1000),
        )
    elif name in ("higgs", "flat_oscillator"):
        if name == "higgs" and k.k == 0:
            raise AdmissibilityError("higgs preset needs k != 0")
        if name == "flat_oscillator" and k.k != 0:
            raise AdmissibilityError("flat_oscillator preset needs k == 0")
        delta = take("delta")
        out = (
            RadialPotential(Oscillator(0.0, delta), k),
            Free(math.pi),
            Fraction(1, 2),
        )
    elif name in ("schroedinger_coulomb", "flat_kepler"):
        if name == "schroedinger_coulomb" and k.k == 0:
            raise AdmissibilityError("schroedinger_coulomb preset needs k != 0")
        if name == "flat_kepler" and k.k != 0:
            raise AdmissibilityError("flat_kepler preset needs k == 0")
        d = take("D")
        out = (
            RadialPotential(Kepler(0.0, d, 0.0), k),
            Free(math.pi),
            Fraction(1),
        )
    else:
        raise AdmissibilityError(
            f"unknown preset '{name}'; choose one of {PRESET_NAMES}"
        )
    if params:
        raise AdmissibilityError(f"unused parameters for preset '{name}': {sorted(params)}")
    return out

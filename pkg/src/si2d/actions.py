"""Turning points, action variables, and periods of the separated motions.

Both one-dimensional motions (angular in U(phi) at "energy" A, radial in
the effective potential W(rho) at energy E) produce integrals whose
integrands vanish or diverge like a square root at the turning points.
Every quadrature here factors the root out analytically,

    E - W(x) = (x - a)(b - x) h(x),

and substitutes x = a + (b - a) sin^2(theta), which leaves a smooth
bounded integrand in theta.  With the factored form the result is
insensitive (to first order) to the finite precision of the computed
turning points; the naive substitution would lose half the digits of the
root tolerance.

Period conventions: the radial period T_rho is the period of the
one-dimensional rho-motion in W and is defined positive; the derivative
of the radial action with respect to A is -T_rho/(2 pi), with the sign
carried explicitly by the derivative relation, not by T_rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import AdmissibilityError, NoBoundMotionError
from .geometry import Curvature, r_of_rho, metric_factor
from .potentials import (
    AngularPotential,
    Free,
    Kepler,
    Oscillator,
    PoschlTeller,
    RadialFamily,
    RadialPotential,
    Tabulated,
    eval_radial,
)

_QUAD_KW = dict(epsabs=1e-12, epsrel=1e-11, limit=250)
_HUGE = 1e308


@dataclass(frozen=True)
class TurningPair:
    """Left and right turning points of a librating degree of freedom."""

    x_min: float
    x_max: float

    @property
    def degenerate(self) -> bool:
        return self.x_min == self.x_max


# ---------------------------------------------------------------------------
# root machinery
# ---------------------------------------------------------------------------

def _safe(w: Callable[[float], float]) -> Callable[[float], float]:
    """Evaluate w, mapping domain errors and overflow to +inf."""

    def val(x: float) -> float:
        try:
            y = w(x)
        except (ValueError, OverflowError, ZeroDivisionError):
            return math.inf
        return y if math.isfinite(y) else math.inf

    return val


def _refine_root(f: Callable[[float], float], lo: float, hi: float) -> float:
    g = lambda x: max(min(f(x), _HUGE), -_HUGE)
    return float(brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200))


def turning_points(
    potential: Callable[[float], float],
    level: float,
    bracket_hint: tuple[float, float],
    n_scan: int = 2048,
) -> TurningPair:
    """Two simple roots of level - potential(x) inside the bracket.

    Scans the bracket uniformly and refines each sign change by bracketed
    root finding to |dx| < 1e-13 (1 + |x|).
    """
    lo, hi = bracket_hint
    if not lo < hi:
        raise ValueError(f"empty bracket {bracket_hint}")
    w = _safe(potential)
    f = lambda x: level - w(x)
    xs = [lo + (hi - lo) * i / n_scan for i in range(n_scan + 1)]
    vals = [f(x) for x in xs]
    roots = []
    for i in range(n_scan):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(xs[i])
        elif a * b < 0.0:
            roots.append(_refine_root(f, xs[i], xs[i + 1]))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    if len(roots) < 2:
        raise NoBoundMotionError(
            f"found {len(roots)} turning point(s) on {bracket_hint} at level {level}"
        )
    if len(roots) > 2:
        raise ValueError(
            f"{len(roots)} turning points on {bracket_hint}: not a single well"
        )
    return TurningPair(roots[0], roots[1])


def _expand_to_root(
    w: Callable[[float], float],
    level: float,
    x_in: float,
    boundary: float,
    escape: bool,
) -> tuple[float, bool]:
    """Walk from inside the well toward a boundary until w crosses the level.

    Returns (turning point, is_root).  A finite boundary reached with w
    still below the level is a hard wall for angular cells (is_root False)
    and an escape to infinity for the radial variable (raises).
    """
    f = lambda x: level - w(x)
    prev = x_in
    if math.isinf(boundary):
        sgn = 1.0 if boundary > 0 else -1.0
        step = 0.5 * (1.0 + abs(x_in))
        for _ in range(300):
            x = prev + sgn * step
            if f(x) <= 0.0:
                return _refine_root(f, min(prev, x), max(prev, x)), True
            prev, step = x, 2.0 * step
        raise NoBoundMotionError(f"no turning point toward {boundary}")
    # finite boundary: binary approach
    if prev != boundary:
        for _ in range(120):
            x = boundary + 0.5 * (prev - boundary)
            if f(x) <= 0.0:
                return _refine_root(f, min(prev, x), max(prev, x)), True
            prev = x
    if escape:
        raise NoBoundMotionError(
            f"level {level} exceeds the potential all the way to the boundary "
            f"{boundary}: motion is unbound"
        )
    return boundary, False


def _well_interval(
    w: Callable[[float], float],
    level: float,
    x0: float,
    bounds: tuple[float, float],
    escape: tuple[bool, bool] = (True, True),
) -> tuple[TurningPair, bool, bool]:
    """Turning interval around the minimum x0; flags tell which ends are roots."""
    wmin = w(x0)
    atol = 1e-13 * (1.0 + abs(level) + abs(wmin))
    if level < wmin - atol:
        raise NoBoundMotionError(f"level {level} below the well minimum {wmin}")
    if level <= wmin + atol:
        return TurningPair(x0, x0), True, True
    ws = _safe(w)
    a, left_root = _expand_to_root(ws, level, x0, bounds[0], escape[0])
    b, right_root = _expand_to_root(ws, level, x0, bounds[1], escape[1])
    return TurningPair(a, b), left_root, right_root


# ---------------------------------------------------------------------------
# factored quadrature kernels
# ---------------------------------------------------------------------------

def _factored_h(
    w: Callable[[float], float],
    level: float,
    a: float,
    b: float,
    left_root: bool,
    right_root: bool,
) -> Callable[[float], float]:
    margin = 1e-12 * (b - a)

    def h(x: float) -> float:
        x = min(max(x, a + margin), b - margin)
        num = level - w(x)
        den = 1.0
        if left_root:
            den *= x - a
        if right_root:
            den *= b - x
        return max(num / den, 1e-300)

    return h


def _second_derivative(w: Callable[[float], float], x: float) -> float:
    h = 1e-5 * (1.0 + abs(x))
    return (
        -w(x + 2 * h) + 16 * w(x + h) - 30 * w(x) + 16 * w(x - h) - w(x - 2 * h)
    ) / (12 * h * h)


def _action_integral(
    w: Callable[[float], float],
    level: float,
    pair: TurningPair,
    left_root: bool,
    right_root: bool,
    weight: Optional[Callable[[float], float]] = None,
) -> float:
    """integral of sqrt(2 (level - w)) * weight over the turning interval."""
    a, b = pair.x_min, pair.x_max
    if pair.degenerate:
        return 0.0
    h = _factored_h(w, level, a, b, left_root, right_root)
    qw = weight if weight is not None else (lambda x: 1.0)

    if left_root and right_root:
        def g(th: float) -> float:
            s, c = math.sin(th), math.cos(th)
            x = a + (b - a) * s * s
            return s * s * c * c * math.sqrt(2.0 * h(x)) * qw(x)
        return 2.0 * (b - a) ** 2 * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]

    if right_root:
        def g(th: float) -> float:
            s, c = math.sin(th), math.cos(th)
            x = a + (b - a) * s * s
            return s * c * c * math.sqrt(2.0 * h(x)) * qw(x)
        return 2.0 * (b - a) ** 1.5 * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]

    def g(th: float) -> float:
        s, c = math.sin(th), math.cos(th)
        x = a + (b - a) * s * s
        return s * s * c * math.sqrt(2.0 * h(x)) * qw(x)
    return 2.0 * (b - a) ** 1.5 * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]


def _period_integral(
    w: Callable[[float], float],
    level: float,
    pair: TurningPair,
    left_root: bool,
    right_root: bool,
) -> float:
    """Full period 2 * integral of dx / sqrt(2 (level - w))."""
    a, b = pair.x_min, pair.x_max
    if pair.degenerate:
        # harmonic limit of coincident turning points
        wpp = _second_derivative(w, a)
        if wpp <= 0:
            raise NoBoundMotionError("degenerate level at a non-quadratic minimum")
        return 2.0 * math.pi / math.sqrt(wpp)
    h = _factored_h(w, level, a, b, left_root, right_root)

    if left_root and right_root:
        g = lambda th: 1.0 / math.sqrt(h(a + (b - a) * math.sin(th) ** 2))
        return 2.0 * math.sqrt(2.0) * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]

    if right_root:
        def g(th: float) -> float:
            s = math.sin(th)
            return s / math.sqrt(h(a + (b - a) * s * s))
        return 2.0 * math.sqrt(2.0 * (b - a)) * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]

    def g(th: float) -> float:
        s, c = math.sin(th), math.cos(th)
        return c / math.sqrt(h(a + (b - a) * s * s))
    return 2.0 * math.sqrt(2.0 * (b - a)) * quad(g, 0.0, math.pi / 2.0, **_QUAD_KW)[0]


# ---------------------------------------------------------------------------
# angular degree of freedom
# ---------------------------------------------------------------------------

def _angular_well(U: AngularPotential, A: float):
    """Turning interval and root flags for the angular well at level A."""
    if isinstance(U, PoschlTeller):
        lo, hi = U.cell
        # a vanishing coefficient leaves a finite reflecting wall on that side
        escape = (U.beta > 0.0, U.alpha > 0.0)
        return _well_interval(U.value, A, U.phi_min, (lo, hi), escape)
    if isinstance(U, Tabulated):
        lo, hi = U.cell
        return _well_interval(U.value, A, U.phi_min, (lo, hi), (True, True))
    raise TypeError(f"no angular well for {type(U).__name__}")


def angular_action(U: AngularPotential, A: float) -> float:
    """J_phi(A) = (1/pi) * integral of sqrt(2 (A - U)) over the well."""
    if isinstance(U, Free):
        if not A > 0:
            raise NoBoundMotionError(f"free angular motion needs A > 0, got {A}")
        return math.sqrt(2.0 * A) * U.delta_phi / math.pi
    pair, lroot, rroot = _angular_well(U, A)
    return _action_integral(U.value, A, pair, lroot, rroot) / math.pi


def angular_period(U: AngularPotential, A: float) -> float:
    """Period of the one-dimensional angular motion at level A."""
    if isinstance(U, Free):
        if not A > 0:
            raise NoBoundMotionError(f"free angular motion needs A > 0, got {A}")
        return 2.0 * U.delta_phi / math.sqrt(2.0 * A)
    pair, lroot, rroot = _angular_well(U, A)
    if pair.degenerate and isinstance(U, PoschlTeller):
        return 2.0 * math.pi / math.sqrt(U.second_deriv(pair.x_min))
    return _period_integral(U.value, A, pair, lroot, rroot)


# ---------------------------------------------------------------------------
# radial degree of freedom
# ---------------------------------------------------------------------------

def _rho_domain(V: RadialPotential) -> tuple[float, float]:
    lo = V.curvature.rho_min
    if getattr(V.family, "singular_at_zero", False):
        lo = max(lo, 0.0)
    return lo, math.inf


def _weff_min_rho(V: RadialPotential, A: float) -> float:
    """Location of the effective-potential minimum (analytic per family)."""
    fam = V.family
    if isinstance(fam, Oscillator):
        if A + fam.gamma <= 0:
            raise AdmissibilityError(f"need A + gamma > 0, got {A + fam.gamma}")
        if fam.delta == 0.0:
            return max(0.0, V.curvature.rho_min)
        return (fam.delta / (A + fam.gamma)) ** 0.25
    if isinstance(fam, Kepler):
        c = (A + fam.B) ** 2 - fam.F
        if A + fam.B <= 0 or c <= 0:
            raise AdmissibilityError(
                f"need A + B > sqrt(F), got A+B={A + fam.B}, sqrt(F)={math.sqrt(fam.F)}"
            )
        if fam.D == 0.0 and fam.F == 0.0:
            return max(0.0, V.curvature.rho_min)
        if fam.F == 0.0:
            return math.sqrt(fam.D) / (2.0 * (A + fam.B))
        x = fam.D * (math.sqrt(1.0 + fam.F / c) - 1.0) / (2.0 * fam.F)
        return math.sqrt(x)
    # custom family: coarse geometric probe, then bounded refinement
    from scipy.optimize import minimize_scalar

    w = _safe(lambda rho: V.w_eff(rho, A))
    lo, _ = _rho_domain(V)
    base = max(abs(lo), 1.0) if math.isfinite(lo) else 1.0
    offsets = [base * 1.3 ** i for i in range(-30, 32)]
    if math.isfinite(lo):
        probes = [lo + off for off in offsets]
    else:
        probes = sorted([-off for off in offsets] + [0.0] + offsets)
    vals = [w(p) for p in probes]
    i = min(range(len(vals)), key=vals.__getitem__)
    if not math.isfinite(vals[i]):
        raise NoBoundMotionError("could not locate an effective-potential minimum")
    b_lo = probes[max(i - 1, 0)]
    b_hi = probes[min(i + 1, len(probes) - 1)]
    res = minimize_scalar(
        w, bounds=(b_lo, b_hi), method="bounded",
        options={"xatol": 1e-13 * (1.0 + abs(probes[i]))},
    )
    return float(res.x)


def _radial_well(V: RadialPotential, A: float, E: float):
    w = lambda rho: V.w_eff(rho, A)
    rho0 = _weff_min_rho(V, A)
    lo, hi = _rho_domain(V)
    if math.isfinite(lo) and rho0 <= lo:
        raise NoBoundMotionError(
            "effective potential has its minimum on the domain boundary: "
            "no librating radial motion"
        )
    pair, lroot, rroot = _well_interval(w, E, rho0, (lo, hi), (True, True))
    return w, pair, lroot, rroot


def radial_turning_points(V: RadialPotential, A: float, E: float) -> TurningPair:
    """Turning points of the rho-motion in the effective potential."""
    _, pair, _, _ = _radial_well(V, A, E)
    return pair


def radial_action(V: RadialPotential, A: float, E: float, variable: str = "rho") -> float:
    """J_r(A, E) = (1/pi) * integral of sqrt(2 (E - V - A/s^2)) dr.

    Evaluated in the rho variable by default (the integrand becomes
    sqrt(2 (E - W(rho)))/(rho^2 + k)); variable="r" integrates the
    original r-form, which must agree.
    """
    k = V.curvature
    w, pair, lroot, rroot = _radial_well(V, A, E)
    if variable == "rho":
        weight = lambda rho: 1.0 / (rho * rho + k.k)
        return _action_integral(w, E, pair, lroot, rroot, weight) / math.pi
    if variable != "r":
        raise ValueError(f"variable must be 'rho' or 'r', got {variable!r}")
    if pair.degenerate:
        return 0.0
    r_lo, r_hi = r_of_rho(k, pair.x_max), r_of_rho(k, pair.x_min)

    def wr(r: float) -> float:
        return eval_radial(V, r) + A / metric_factor(k, r) ** 2

    return _action_integral(wr, E, TurningPair(r_lo, r_hi), lroot, rroot) / math.pi


def radial_period(V: RadialPotential, A: float, E: float) -> float:
    """Period of the rho-motion in W; independent of E for family members."""
    w, pair, lroot, rroot = _radial_well(V, A, E)
    return _period_integral(w, E, pair, lroot, rroot)


# ---------------------------------------------------------------------------
# closed forms (radial-action route)
# ---------------------------------------------------------------------------

def _as_q(q) -> float:
    return float(Fraction(q)) if not isinstance(q, float) else q


def closed_form_period(family: RadialFamily, A: float, q) -> float:
    """Angular period forced by the radial family at commensurability q.

    Oscillator: pi / (sqrt(2) q sqrt(A + gamma)).
    Kepler: (pi / (sqrt(2) q)) (1/sqrt(A+B+sqrt(F)) + 1/sqrt(A+B-sqrt(F))).
    """
    qv = _as_q(q)
    if isinstance(family, Oscillator):
        if A + family.gamma <= 0:
            raise AdmissibilityError(f"need A + gamma > 0, got {A + family.gamma}")
        return math.pi / (math.sqrt(2.0) * qv * math.sqrt(A + family.gamma))
    if isinstance(family, Kepler):
        rf = math.sqrt(family.F)
        if A + family.B - rf <= 0:
            raise AdmissibilityError(f"need A + B - sqrt(F) > 0, got {A + family.B - rf}")
        return (math.pi / (math.sqrt(2.0) * qv)) * (
            1.0 / math.sqrt(A + family.B + rf) + 1.0 / math.sqrt(A + family.B - rf)
        )
    raise TypeError("closed forms exist only for the two radial families")


def closed_form_radial_period(family: RadialFamily, A: float) -> float:
    """Radial period of the effective motion; the q factor cancels out."""
    return closed_form_period(family, A, 1.0)


def closed_form_angular_action(family: RadialFamily, A: float, q) -> float:
    """Angular action forced by the radial family, normalized so q J is

    sqrt((A + gamma)/2) for the oscillator family and
    (sqrt(A+B+sqrt(F)) + sqrt(A+B-sqrt(F)))/sqrt(2) for the Kepler one.
    """
    qv = _as_q(q)
    if isinstance(family, Oscillator):
        if A + family.gamma < 0:
            raise AdmissibilityError(f"need A + gamma >= 0, got {A + family.gamma}")
        return math.sqrt((A + family.gamma) / 2.0) / qv
    if isinstance(family, Kepler):
        rf = math.sqrt(family.F)
        if A + family.B - rf < 0:
            raise AdmissibilityError(f"need A + B - sqrt(F) >= 0, got {A + family.B - rf}")
        return (math.sqrt(A + family.B + rf) + math.sqrt(A + family.B - rf)) / (
            math.sqrt(2.0) * qv
        )
    raise TypeError("closed forms exist only for the two radial families")


# ---------------------------------------------------------------------------
# isochronicity scan and rational-ratio detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodReport:
    """Radial periods over an energy grid at fixed A."""

    T_quadrature: float
    T_closed_form: Optional[float]
    A: float
    E: Optional[float]
    relative_spread: float
    energies: tuple[float, ...] = ()
    periods: tuple[float, ...] = ()


def isochrony_scan(V: RadialPotential, A: float, E_grid: Sequence[float]) -> PeriodReport:
    """Radial period at each energy; the spread is (max-min)/mean."""
    if len(E_grid) == 0:
        raise ValueError("empty energy grid")
    periods = tuple(radial_period(V, A, e) for e in E_grid)
    mean = sum(periods) / len(periods)
    spread = (max(periods) - min(periods)) / mean if len(periods) > 1 else 0.0
    closed = None
    if isinstance(V.family, (Oscillator, Kepler)):
        closed = closed_form_radial_period(V.family, A)
    return PeriodReport(
        T_quadrature=mean,
        T_closed_form=closed,
        A=A,
        E=E_grid[0] if len(E_grid) == 1 else None,
        relative_spread=spread,
        energies=tuple(float(e) for e in E_grid),
        periods=periods,
    )


def rational_from_ratio(
    x: float, max_denominator: int = 64, tol: float = 1e-6
) -> Optional[Fraction]:
    """Best rational with bounded denominator, or None outside the tolerance."""
    if not math.isfinite(x) or x <= 0:
        return None
    q = Fraction(x).limit_denominator(max_denominator)
    if q == 0:
        return None
    if abs(x - float(q)) <= tol * abs(float(q)):
        return q
    return None


def bound_energy_range(V: RadialPotential, A: float, frac: float = 0.75) -> tuple[float, float]:
    """A safe (E_min, E_max) window of bound radial motion at this A.

    E_min sits just above the well bottom; E_max stays a fraction of the
    way to the escape level over the domain boundary (or a fixed multiple
    of the well depth scale when the potential confines everywhere).
    """
    rho0 = _weff_min_rho(V, A)
    w = _safe(lambda rho: V.w_eff(rho, A))
    wmin = w(rho0)
    lo, _ = _rho_domain(V)
    escape = math.inf
    if math.isfinite(lo):
        escape = w(lo + 1e-9 * (1.0 + abs(lo)))
    # never stretch the window past a few well depths even when the domain
    # boundary is a steep wall rather than an escape direction
    cap = min(escape, wmin + 4.0 * (1.0 + abs(wmin)))
    if cap <= wmin:
        raise NoBoundMotionError("no bound energy window at this A")
    return wmin + 1e-3 * (cap - wmin), wmin + frac * (cap - wmin)

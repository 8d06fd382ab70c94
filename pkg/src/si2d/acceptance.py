"""Desk-scale verification suite.

Each check returns a :class:`CheckResult` with the measured worst-case
value and its tolerance; ``run_all`` executes every check in a fixed
order with a fixed random seed, so repeated runs produce identical
reports.  The CLI command ``si2d verify --all`` prints one line per
check and exits nonzero if any fails; the pytest acceptance module
asserts each check individually.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import abel, actions, classify, dynamics, geometry, potentials
from .errors import NoBoundMotionError
from .geometry import Curvature
from .potentials import CustomTilde, Kepler, Oscillator, PoschlTeller, RadialPotential

_SEED = 20260810


@dataclass(frozen=True)
class CheckResult:
    cid: str
    passed: bool
    value: float
    tolerance: float
    detail: str


def _quartic_tilde() -> CustomTilde:
    """rho^4 control with analytic derivatives (not a family member)."""
    return CustomTilde(
        func=lambda r: r ** 4,
        d1=lambda r: 4.0 * r ** 3,
        d2=lambda r: 12.0 * r ** 2,
        d3=lambda r: 24.0 * r,
        d4=lambda r: 24.0,
    )


def _sextic_tilde() -> CustomTilde:
    return CustomTilde(
        func=lambda r: r ** 6,
        d1=lambda r: 6.0 * r ** 5,
        d2=lambda r: 30.0 * r ** 4,
        d3=lambda r: 120.0 * r ** 3,
        d4=lambda r: 360.0 * r ** 2,
    )


def _draw_bound_config(rng: np.random.Generator, family: str, k: float):
    """Random admissible (V, A) with a nonempty bound-energy window."""
    for _ in range(100):
        if family == "oscillator":
            if k < 0:
                gamma = rng.uniform(0.0, 0.6)
                a = rng.uniform(0.2, 0.6)
                delta = rng.uniform(gamma + a + 0.8, gamma + a + 2.5)
            else:
                gamma = rng.uniform(0.0, 1.5)
                delta = rng.uniform(0.3, 2.5)
                a = rng.uniform(0.4, 2.0)
            fam = Oscillator(gamma, delta)
        else:
            if k < 0:
                b = rng.uniform(0.0, 0.15)
                a = rng.uniform(0.25, 0.5)
                d = rng.uniform((2.2 * (a + b)) ** 2, (2.2 * (a + b)) ** 2 + 3.0)
                f = rng.uniform(0.0, 0.2 * (a + b) ** 2)
            else:
                b = rng.uniform(0.0, 1.0)
                d = rng.uniform(0.5, 3.0)
                a = rng.uniform(0.4, 2.0)
                f = rng.uniform(0.0, 0.8 * (a + b) ** 2)
            fam = Kepler(b, d, f)
        V = RadialPotential(fam, Curvature(k))
        try:
            actions.bound_energy_range(V, a)
        except (NoBoundMotionError, ValueError):
            continue
        return V, a
    raise RuntimeError(f"no admissible draw for {family} at k={k}")


def _energy_grid(V: RadialPotential, a: float, m: int = 5) -> list[float]:
    lo, hi = actions.bound_energy_range(V, a)
    return [lo + f * (hi - lo) for f in np.linspace(0.15, 0.85, m)]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def check_isochronicity() -> CheckResult:
    """Radial period spread over energies: tiny for families, large for rho^4."""
    rng = np.random.default_rng(_SEED)
    worst = 0.0
    for family in ("oscillator", "kepler"):
        for k in (-1.0, 0.0, 1.0):
            for _ in range(2):
                V, a = _draw_bound_config(rng, family, k)
                report = actions.isochrony_scan(V, a, _energy_grid(V, a))
                worst = max(worst, report.relative_spread)
    control = RadialPotential(_quartic_tilde(), Curvature(1.0))
    spread_ctl = actions.isochrony_scan(control, 1.0, _energy_grid(control, 1.0)).relative_spread
    passed = worst < 1e-6 and spread_ctl > 1e-2
    return CheckResult(
        "1-isochronicity", passed, worst, 1e-6,
        f"12 family configs spread<=" f"{worst:.3e}; rho^4 control spread {spread_ctl:.3e} (>1e-2)",
    )


def check_isochrony_ode() -> CheckResult:
    """Family members solve the fourth-order condition; rho^4 misses it."""
    rng = np.random.default_rng(_SEED + 1)
    worst = 0.0
    for _ in range(4):
        osc = Oscillator(rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0))
        kep = Kepler(rng.uniform(0.0, 2.0), rng.uniform(0.5, 3.0), rng.uniform(0.2, 1.5))
        for fam in (osc, kep):
            for rho in np.geomspace(0.3, 3.0, 50):
                d1 = fam.tilde_d1(rho)
                d2 = fam.tilde_d2(rho)
                scale = max(
                    abs(3.0 * fam.tilde_d4(rho) * (d2 - d1 / rho)),
                    abs(5.0 * fam.tilde_d3(rho) ** 2),
                    1e-30,
                )
                worst = max(worst, abs(potentials.isochrony_residual(fam, rho)) / scale)
    quartic = potentials.isochrony_residual(_quartic_tilde(), 1.0)
    passed = worst < 1e-9 and abs(quartic + 2304.0) <= 1e-9 * 2304.0
    return CheckResult(
        "2-isochrony-ode", passed, worst, 1e-9,
        f"family residual rel<= {worst:.3e}; rho^4 at rho=1 gives {quartic:.6f} (exact -2304)",
    )


# the Poschl-Teller floor grows like n^2 and hyperbolic binding needs the
# radial coupling to dominate A, so these strengths keep every (preset, n, k)
# combination comfortably inside its bound window at A = 5
_PRESET_PARAMS = dict(ttw=dict(delta=20.0), pw=dict(D=400.0))
_PT_SHAPE = dict(alpha=0.09, beta=0.11)


def _preset_system(name: str, k: float, n: int):
    params = dict(_PRESET_PARAMS[name])
    params.update(_PT_SHAPE, n=n)
    return potentials.preset(name, Curvature(k), **params)


def check_commensurability() -> CheckResult:
    """T_rho / T_phi equals the preset's n on every curvature."""
    worst = 0.0
    for name in ("ttw", "pw"):
        for n in (1, 2, 3):
            for k in (-1.0, 0.0, 1.0):
                V, U, q = _preset_system(name, k, n)
                a = 5.0
                lo, hi = actions.bound_energy_range(V, a)
                e = lo + 0.5 * (hi - lo)
                ratio = actions.radial_period(V, a, e) / actions.angular_period(U, a)
                worst = max(worst, abs(ratio - n))
    return CheckResult(
        "3-commensurability", worst < 1e-7, worst, 1e-7,
        "TTW/PW, n in {1,2,3}, k in {-1,0,1}: max |T_rho/T_phi - n|",
    )


def check_action_derivatives() -> CheckResult:
    """Central differences of the actions against the period formulas."""
    systems = [
        _preset_system("ttw", 0.0, 2),
        _preset_system("pw", -1.0, 1),
        _preset_system("ttw", 1.0, 3),
    ]
    worst = 0.0
    for V, U, _q in systems:
        for a in (4.2, 5.3, 6.7):
            h = 5e-4 * (1.0 + a)
            dj_phi = (actions.angular_action(U, a + h) - actions.angular_action(U, a - h)) / (2 * h)
            t_phi = actions.angular_period(U, a)
            worst = max(worst, abs(dj_phi - t_phi / (2 * math.pi)) / (t_phi / (2 * math.pi)))

            lo, hi = actions.bound_energy_range(V, a)
            e = lo + 0.4 * (hi - lo)
            dj_r = (actions.radial_action(V, a + h, e) - actions.radial_action(V, a - h, e)) / (2 * h)
            t_rho = actions.radial_period(V, a, e)
            worst = max(worst, abs(dj_r + t_rho / (2 * math.pi)) / (t_rho / (2 * math.pi)))
    return CheckResult(
        "4-action-derivatives", worst < 1e-6, worst, 1e-6,
        "dJ_phi/dA vs T_phi/2pi and dJ_r/dA vs -T_rho/2pi at 9 points each",
    )


def check_action_normalization() -> CheckResult:
    """Quadrature J_phi differs from the closed form by an A-independent constant."""
    worst_std = 0.0
    cases = [
        # A grids sit above the respective well floors (16 and 1)
        (PoschlTeller(1.0, 1.0, 2.0), Oscillator(0.0, 1.0), 2, np.geomspace(18.0, 70.0, 7)),
        (PoschlTeller(1.0, 1.0, 0.5), Kepler(0.0, 1.0, 0.0), 1, np.geomspace(1.5, 12.0, 7)),
    ]
    for U, fam, q, a_values in cases:
        diffs = [
            actions.angular_action(U, a) - actions.closed_form_angular_action(fam, a, q)
            for a in a_values
        ]
        worst_std = max(worst_std, float(np.std(diffs)))
    return CheckResult(
        "5-action-normalization", worst_std < 1e-8, worst_std, 1e-8,
        "std over 7 A-values of (J_phi quadrature - closed form), both families",
    )


def check_pi_factor() -> CheckResult:
    """Abel transform of the closed-form periods matches the closed widths."""
    cases = [
        (Oscillator(0.8, 1.0), 1.6, 2.3),
        (Kepler(1.5, 1.0, 1.2), 2.0, 0.4),
    ]
    worst = 0.0
    for fam, q, u0 in cases:
        T = lambda a, fam=fam, q=q: actions.closed_form_period(fam, a, q)
        for u in u0 + np.geomspace(0.1, 1e3, 30):
            num = abel.delta_phi_numeric(T, u0, u)
            clo = abel.delta_phi_closed(fam, q, u0, u)
            worst = max(worst, abs(num - clo))
    return CheckResult(
        "6-pi-factor-abel", worst < 1e-8, worst, 1e-8,
        "numeric Abel transform vs closed widths, 30-point grids, both families",
    )


def check_abel_round_trip() -> CheckResult:
    """PT wells recovered from their own quadrature periods; width limits."""
    worst_sup = 0.0
    for n in (1, 2):
        pt = PoschlTeller(1.0, 1.0, float(n))
        from scipy.optimize import minimize_scalar

        lo, hi = pt.cell
        res = minimize_scalar(
            pt.value, bounds=(lo + 1e-9, hi - 1e-9), method="bounded",
            options={"xatol": 1e-12},
        )
        u0 = float(res.fun)
        top = 1e4
        T = abel.sampled_period_function(pt, u0, u0 + top * 1.01, n_samples=240)
        grid = abel.default_height_grid(u0, 512, top)
        _branches, tab = abel.reconstruct_angular(
            T, n, u0, abel.TTWG(1.0, 1.0, float(n)), grid
        )
        span = hi - lo
        xs = np.linspace(lo + 0.05 * span, hi - 0.05 * span, 400)
        sup = max(abs(tab.value(x) - pt.value(x)) for x in xs)
        worst_sup = max(worst_sup, sup)

    # width limits at extreme height: pi/(2q) and pi/q (small-U0 configs so
    # the sqrt(U0/U) tail sits inside the tolerance at U = 1e6)
    worst_width = 0.0
    for q in (1.0, 2.0):
        w = abel.delta_phi_closed(Oscillator(0.0, 1.0), q, 0.3, 1e6)
        worst_width = max(worst_width, abs(w - math.pi / (2 * q)))
    w = abel.delta_phi_closed(Kepler(0.0, 1.0, 0.0), 1.0, 0.2, 1e6)
    worst_width = max(worst_width, abs(w - math.pi))

    passed = worst_sup < 1e-4 and worst_width < 1e-3
    return CheckResult(
        "7-abel-round-trip", passed, worst_sup, 1e-4,
        f"PT(1,1,n) sup-norm {worst_sup:.3e} on inner 90%; width-limit dev {worst_width:.3e} (<1e-3)",
    )


def check_orbit_closure() -> CheckResult:
    """TTW/PW orbits close; measured frequencies lock to m/n; drifts tiny."""
    worst_closure = 0.0
    worst_third = 0.0
    worst_drift = 0.0
    # (preset, params, A, E, t_max): levels sit above the angular floor
    # (16 and 1) and inside the radial bound window
    cases = [
        ("ttw", dict(delta=0.5, alpha=1.0, beta=1.0, n=2), 20.0, 9.0, 45.0),
        ("pw", dict(D=4.0, alpha=1.0, beta=1.0, n=1), 1.5, -0.5, 65.0),
    ]
    for name, params, a, e, t_max in cases:
        V, U, q = potentials.preset(name, Curvature(0.0), **params)
        s0 = dynamics.initial_state(V, U, e, a)
        traj = dynamics.integrate(s0, V, U, t_max=t_max, dt=1e-3)
        rec = dynamics.orbit_closure(traj, tol=1e-5)
        if rec is None:
            return CheckResult(
                "8-orbit-closure", False, math.inf, 1e-5,
                f"{name} n={params['n']}: no phase-space return below 1e-5",
            )
        worst_closure = max(worst_closure, rec.phase_distance)
        worst_third = max(worst_third, dynamics.third_integral_check(traj, q.numerator, q.denominator))
        scale = 1.0 + abs(e)
        worst_drift = max(worst_drift, traj.energy_drift / scale, traj.L_drift / scale)
    passed = worst_closure < 1e-5 and worst_third < 1e-5 and worst_drift < 1e-8
    return CheckResult(
        "8-orbit-closure", passed, worst_closure, 1e-5,
        f"closure dist {worst_closure:.3e}; third-integral residual {worst_third:.3e} "
        f"(<1e-5); drift {worst_drift:.3e} (<1e-8)",
    )


def check_bertrand() -> CheckResult:
    """Central limits: q = 1/2 and 1, closures at k = 0, same verdicts curved."""
    ok = classify.central_q(Oscillator(0.0, 3.0)) == Fraction(1, 2)
    ok &= classify.central_q(Kepler(0.0, 5.0, 0.0)) == Fraction(1)
    ok &= classify.central_q(Oscillator(1.0, 1.0)) is None
    ok &= classify.central_q(Kepler(0.3, 1.0, 0.0)) is None

    worst_closure = 0.0
    flat_cases = [
        ("flat_oscillator", dict(delta=0.5), 1.2, 2.2, 16.0),
        ("flat_kepler", dict(D=1.0), 0.5, -0.35, 14.0),
    ]
    for name, params, a, e, t_max in flat_cases:
        V, U, q = potentials.preset(name, Curvature(0.0), **params)
        s0 = dynamics.initial_state(V, U, e, a)
        traj = dynamics.integrate(s0, V, U, t_max=t_max, dt=1e-3)
        rec = dynamics.orbit_closure(traj, tol=1e-6)
        if rec is None:
            return CheckResult(
                "9-bertrand-limits", False, math.inf, 1e-6,
                f"{name}: no closure below 1e-6",
            )
        worst_closure = max(worst_closure, rec.phase_distance)

    # curved central systems keep the same commensurability (strengths chosen
    # so the hyperbolic plane still binds at A = 0.8)
    worst_ratio = 0.0
    for k in (-1.0, 1.0):
        for name, params, qq in (
            ("higgs", dict(delta=3.0), 0.5),
            ("schroedinger_coulomb", dict(D=9.0), 1.0),
        ):
            V, U, q = potentials.preset(name, Curvature(k), **params)
            a = 0.8
            lo, hi = actions.bound_energy_range(V, a)
            e = lo + 0.5 * (hi - lo)
            ratio = actions.radial_period(V, a, e) / actions.angular_period(U, a)
            worst_ratio = max(worst_ratio, abs(ratio - qq))
    passed = bool(ok) and worst_closure < 1e-6 and worst_ratio < 1e-7
    return CheckResult(
        "9-bertrand-limits", passed, worst_closure, 1e-6,
        f"central q verdicts ok={bool(ok)}; flat closures {worst_closure:.3e}; "
        f"curved ratio dev {worst_ratio:.3e}",
    )


def check_curvature_continuity() -> CheckResult:
    """Radial actions at k = +/-1e-6 stay within 1e-4 of the flat values."""
    systems = [
        Oscillator(0.4, 1.1),
        Kepler(0.2, 1.0, 0.09),
    ]
    samples = [(0.6, 0.25), (0.6, 0.6), (1.1, 0.25), (1.1, 0.6), (1.6, 0.45)]
    worst = 0.0
    for fam in systems:
        flat = RadialPotential(fam, Curvature(0.0))
        for a, frac in samples:
            lo, hi = actions.bound_energy_range(flat, a)
            e = lo + frac * (hi - lo)
            j0 = actions.radial_action(flat, a, e)
            for k in (1e-6, -1e-6):
                jk = actions.radial_action(RadialPotential(fam, Curvature(k)), a, e)
                worst = max(worst, abs(jk - j0) / j0)
    return CheckResult(
        "10-curvature-continuity", worst < 1e-4, worst, 1e-4,
        "J_r at k=+/-1e-6 vs k=0, both families, 5 (A, E) samples each",
    )


def check_metric_identity() -> CheckResult:
    """1/s_k^2 == rho^2 + k on random chart points, all signs."""
    rng = np.random.default_rng(_SEED + 2)
    worst = 0.0
    for sign in (-1, 0, 1):
        for _ in range(1000):
            k = Curvature(float(sign) * rng.uniform(0.2, 2.0)) if sign else Curvature(0.0)
            r = rng.uniform(0.05, 0.95) * min(k.r_max, 3.0)
            lhs = 1.0 / geometry.metric_factor(k, r) ** 2
            rho = geometry.rho_of_r(k, r)
            rhs = rho * rho + k.k
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
    return CheckResult(
        "11-metric-identity", worst < 1e-12, worst, 1e-12,
        "1000 random chart points per curvature sign",
    )


ALL_CHECKS: tuple[tuple[str, Callable[[], CheckResult]], ...] = (
    ("1-isochronicity", check_isochronicity),
    ("2-isochrony-ode", check_isochrony_ode),
    ("3-commensurability", check_commensurability),
    ("4-action-derivatives", check_action_derivatives),
    ("5-action-normalization", check_action_normalization),
    ("6-pi-factor-abel", check_pi_factor),
    ("7-abel-round-trip", check_abel_round_trip),
    ("8-orbit-closure", check_orbit_closure),
    ("9-bertrand-limits", check_bertrand),
    ("10-curvature-continuity", check_curvature_continuity),
    ("11-metric-identity", check_metric_identity),
)


def run_all(report: Optional[Callable[[CheckResult], None]] = None) -> list[CheckResult]:
    results = []
    for _cid, fn in ALL_CHECKS:
        res = fn()
        results.append(res)
        if report is not None:
            report(res)
    return results

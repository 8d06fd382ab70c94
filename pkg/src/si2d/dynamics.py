"""Hamiltonian flow of the separable systems and its invariants.

The Hamiltonian is

    H = p_r^2/2 + (p_phi^2/2 + U(phi)) / s_k(r)^2 + V(r)

(the angular block enters divided by s^2 once; this is the form consistent
with the kinetic term and with the radial action integrand).  Time stepping
uses the generalized (Stormer-Verlet) leapfrog for non-separable
Hamiltonians; because the momenta enter dH/dq only through p_phi and the
position update for r does not involve r itself, every implicit relation
of the scheme resolves explicitly here.  Three leapfrog substeps with the
classic triple-jump coefficients give a fourth-order symmetric symplectic
step.

Alongside physical time t the integrator accumulates the rescaled time
tau with d tau = dt / s_k(r)^2.  In tau both separated motions are exact
autonomous one-dimensional systems (rho in the effective potential, phi
in the angular well), so turning-point intervals measured in tau reproduce
the quadrature periods T_rho and T_phi, and the commensurability ratio
shows up directly in the measured frequencies: omega_phi = q * omega_r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, TextIO, Union

import numpy as np

from .errors import InsufficientSpanError, SingularityAbortError
from .geometry import Curvature, metric_factor, metric_factor_deriv, rho_of_r
from .potentials import (
    AngularPotential,
    Free,
    RadialPotential,
    eval_radial,
)

_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = 1.0 - 2.0 * _YOSHIDA_W1


@dataclass(frozen=True)
class PhaseState:
    """Point in the (r, phi, p_r, p_phi) phase space."""

    r: float
    phi: float
    p_r: float
    p_phi: float


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled orbit with conserved-quantity drift bookkeeping."""

    times: np.ndarray
    tau: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    p_r: np.ndarray
    p_phi: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    energy_drift: float
    L_drift: float
    angular_is_free: bool

    @property
    def initial_state(self) -> PhaseState:
        return PhaseState(self.r[0], self.phi[0], self.p_r[0], self.p_phi[0])

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.r[i], self.phi[i], self.p_r[i], self.p_phi[i])


def hamiltonian(s: PhaseState, V: RadialPotential, U: AngularPotential) -> float:
    """Total energy of a phase-space point."""
    sk = metric_factor(V.curvature, s.r)
    return (
        0.5 * s.p_r ** 2
        + (0.5 * s.p_phi ** 2 + U.value(s.phi)) / sk ** 2
        + eval_radial(V, s.r)
    )


def generalized_momentum(s: PhaseState, U: AngularPotential) -> float:
    """Separation integral L = p_phi^2/2 + U(phi)."""
    return 0.5 * s.p_phi ** 2 + U.value(s.phi)


def radial_force_terms(V: RadialPotential, r: float) -> tuple[float, float, float]:
    """(s^2, 2 s'/s^3, dV/dr) at radius r.

    dV/dr is evaluated through the rho chain rule, -Vt'(rho) (rho^2 + k),
    which covers every family uniformly.
    """
    k = V.curvature
    sk = metric_factor(k, r)
    spr = metric_factor_deriv(k, r)
    rho = rho_of_r(k, r)
    dv = -V.family.tilde_d1(rho) * (rho * rho + k.k)
    return sk * sk, 2.0 * spr / sk ** 3, dv


def _leapfrog_step(
    r: float, phi: float, pr: float, pphi: float, h: float,
    V: RadialPotential, U: AngularPotential,
) -> tuple[float, float, float, float]:
    s2_0, grad0, dv0 = radial_force_terms(V, r)
    pphi_h = pphi - 0.5 * h * U.deriv(phi) / s2_0
    L_h = 0.5 * pphi_h * pphi_h + U.value(phi)
    pr_h = pr - 0.5 * h * (dv0 - L_h * grad0)

    r1 = r + h * pr_h
    s2_1, grad1, dv1 = radial_force_terms(V, r1)
    phi1 = phi + 0.5 * h * pphi_h * (1.0 / s2_0 + 1.0 / s2_1)

    L_1 = 0.5 * pphi_h * pphi_h + U.value(phi1)
    pr1 = pr_h - 0.5 * h * (dv1 - L_1 * grad1)
    pphi1 = pphi_h - 0.5 * h * U.deriv(phi1) / s2_1
    return r1, phi1, pr1, pphi1


def _yoshida4_step(r, phi, pr, pphi, dt, V, U):
    for w in (_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1):
        r, phi, pr, pphi = _leapfrog_step(r, phi, pr, pphi, w * dt, V, U)
    return r, phi, pr, pphi


def initial_state(
    V: RadialPotential, U: AngularPotential, E: float, A: float
) -> PhaseState:
    """Generic bound starting point for given (E, A).

    The orbit starts at the effective-potential minimum with the radial
    momentum taking up E - W(rho0), and at the angular well bottom (or
    phi = pi/2 for the free case) with p_phi = sqrt(2 (A - U)).
    """
    from .actions import _weff_min_rho
    from .geometry import r_of_rho

    rho0 = _weff_min_rho(V, A)
    r0 = r_of_rho(V.curvature, rho0)
    w0 = V.w_eff(rho0, A)
    if E < w0:
        raise InsufficientSpanError(f"E={E} below the effective minimum {w0}")
    p_r0 = math.sqrt(2.0 * (E - w0))
    phi0 = math.pi / 2.0 if isinstance(U, Free) else U.phi_min
    u0 = U.value(phi0)
    if A < u0:
        raise InsufficientSpanError(f"A={A} below the angular minimum {u0}")
    p_phi0 = math.sqrt(2.0 * (A - u0))
    return PhaseState(r=r0, phi=phi0, p_r=p_r0, p_phi=p_phi0)


def integrate(
    s0: PhaseState,
    V: RadialPotential,
    U: AngularPotential,
    t_max: float,
    dt: float,
) -> Trajectory:
    """Fixed-step fourth-order symplectic integration up to t_max.

    Aborts with :class:`SingularityAbortError` when the orbit comes within
    10 dt |p_r| of r = 0 or of the chart wall on the sphere.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(round(t_max / dt))
    if n < 1:
        raise ValueError("t_max shorter than one step")
    k = V.curvature
    r_wall = k.r_max

    r = np.empty(n + 1)
    phi = np.empty(n + 1)
    pr = np.empty(n + 1)
    pphi = np.empty(n + 1)
    r[0], phi[0], pr[0], pphi[0] = s0.r, s0.phi, s0.p_r, s0.p_phi

    x, y, u, v = s0.r, s0.phi, s0.p_r, s0.p_phi
    for i in range(1, n + 1):
        x, y, u, v = _yoshida4_step(x, y, u, v, dt, V, U)
        guard = 10.0 * dt * abs(u)
        if x <= guard or (math.isfinite(r_wall) and r_wall - x <= guard):
            raise SingularityAbortError(
                f"orbit within {guard} of the chart boundary at t={i * dt}"
            )
        r[i], phi[i], pr[i], pphi[i] = x, y, u, v

    times = np.arange(n + 1) * dt
    s2 = np.array([metric_factor(k, ri) ** 2 for ri in r])
    tau = _cumulative_simpson(1.0 / s2, dt)

    uvals = np.array([U.value(p) for p in phi])
    vvals = np.array([eval_radial(V, ri) for ri in r])
    energy = 0.5 * pr ** 2 + (0.5 * pphi ** 2 + uvals) / s2 + vvals
    momentum = 0.5 * pphi ** 2 + uvals
    return Trajectory(
        times=times,
        tau=tau,
        r=r,
        phi=phi,
        p_r=pr,
        p_phi=pphi,
        energy=energy,
        momentum=momentum,
        energy_drift=float(np.max(np.abs(energy - energy[0]))),
        L_drift=float(np.max(np.abs(momentum - momentum[0]))),
        angular_is_free=isinstance(U, Free),
    )


def _cumulative_simpson(y: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral on a uniform grid, fourth-order accurate."""
    out = np.zeros_like(y)
    if y.size < 3:
        if y.size == 2:
            out[1] = 0.5 * dx * (y[0] + y[1])
        return out
    # half-interval Newton rules over consecutive sample triples
    for i in range(1, y.size):
        if i % 2 == 1:
            if i + 1 < y.size:
                out[i] = out[i - 1] + dx * (5 * y[i - 1] + 8 * y[i] - y[i + 1]) / 12.0
            else:
                out[i] = out[i - 1] + dx * (-y[i - 2] + 8 * y[i - 1] + 5 * y[i]) / 12.0
        else:
            out[i] = out[i - 2] + dx * (y[i - 2] + 4 * y[i - 1] + y[i]) / 3.0
    return out


def _sign_change_events(t: np.ndarray, y: np.ndarray) -> tuple[list[float], list[int]]:
    """Interpolated times of sign changes of y, with the crossing direction."""
    events, direction = [], []
    for i in range(y.size - 1):
        a, b = y[i], y[i + 1]
        if a == 0.0 or a * b >= 0.0:
            continue
        # local quadratic through the three samples around the crossing
        j = min(max(i, 1), y.size - 2)
        y0, y1, y2 = y[j - 1], y[j], y[j + 1]
        c2 = 0.5 * (y2 - 2 * y1 + y0)
        c1 = 0.5 * (y2 - y0)
        root = None
        if c2 != 0.0:
            disc = c1 * c1 - 4 * c2 * (y1)
            if disc >= 0.0:
                for sgn in (+1.0, -1.0):
                    xi = (-c1 + sgn * math.sqrt(disc)) / (2 * c2)
                    if (i - j) - 1e-12 <= xi <= (i + 1 - j) + 1e-12:
                        root = j + xi
                        break
        if root is None:
            root = i + a / (a - b)
        events.append(float(np.interp(root, np.arange(y.size), t)))
        direction.append(1 if b > a else -1)
    return events, direction


def _mean_period(t_events: list[float], directions: list[int]) -> float:
    estimates = []
    for sign in (+1, -1):
        grp = [t for t, d in zip(t_events, directions) if d == sign]
        if len(grp) >= 2:
            estimates.append((grp[-1] - grp[0]) / (len(grp) - 1))
    if not estimates:
        raise InsufficientSpanError("fewer than two same-direction turning events")
    return sum(estimates) / len(estimates)


def measure_frequencies(traj: Trajectory) -> tuple[float, float]:
    """(omega_r, omega_phi) from turning events, measured in rescaled time.

    The rescaled time is what makes both separated motions strictly
    periodic, so these are the frequencies whose ratio carries the
    commensurability: omega_phi / omega_r = q.
    """
    ev_r, dir_r = _sign_change_events(traj.tau, traj.p_r)
    if len(ev_r) < 10:
        raise InsufficientSpanError(
            f"only {len(ev_r)} radial turning events; need >= 5 oscillations"
        )
    omega_r = 2.0 * math.pi / _mean_period(ev_r, dir_r)
    ev_p, dir_p = _sign_change_events(traj.tau, traj.p_phi)
    if len(ev_p) < 3:
        raise InsufficientSpanError(
            "too few angular turning events (free or near-free angular motion)"
        )
    omega_phi = 2.0 * math.pi / _mean_period(ev_p, dir_p)
    return omega_r, omega_phi


def third_integral_check(traj: Trajectory, m: int, n: int) -> float:
    """Residual |m omega_r - n omega_phi| / (m omega_r).

    Vanishes exactly when the angle combination m Psi_r - n Psi_phi is
    constant along the flow, i.e. when the extra invariant built from it
    is conserved; q = m/n.
    """
    omega_r, omega_phi = measure_frequencies(traj)
    return abs(m * omega_r - n * omega_phi) / (m * omega_r)


@dataclass(frozen=True)
class ClosureRecord:
    t_close: float
    phase_distance: float


def orbit_closure(traj: Trajectory, tol: float) -> Optional[ClosureRecord]:
    """First return of the orbit to its initial phase-space point.

    Distances are Euclidean in (r, phi, p_r, p_phi); for free angular
    motion phi is compared modulo full turns.  Returns None when no
    candidate dips below tol.
    """
    dphi = traj.phi - traj.phi[0]
    if traj.angular_is_free:
        dphi = np.remainder(dphi + math.pi, 2.0 * math.pi) - math.pi
    d2 = (
        (traj.r - traj.r[0]) ** 2
        + dphi ** 2
        + (traj.p_r - traj.p_r[0]) ** 2
        + (traj.p_phi - traj.p_phi[0]) ** 2
    )
    scale2 = max(np.max(d2), 1e-300)
    # skip the initial departure: wait until the orbit has moved away
    i0 = int(np.argmax(d2 > 0.01 * scale2))
    if i0 == 0:
        return None
    best_i, best_d2, best_t = None, tol * tol, None
    i = i0 + 1
    while i < d2.size - 1:
        if d2[i] < best_d2 and d2[i] <= d2[i - 1] and d2[i] <= d2[i + 1]:
            # parabolic refinement of the squared distance
            a, b, c = d2[i - 1], d2[i], d2[i + 1]
            denom = a - 2 * b + c
            shift = 0.5 * (a - c) / denom if denom > 0 else 0.0
            t_ref = traj.times[i] + shift * (traj.times[1] - traj.times[0])
            d_ref = b - 0.25 * (a - c) * shift if denom > 0 else b
            best_i, best_d2, best_t = i, max(d_ref, 0.0), t_ref
            break
        i += 1
    if best_i is None:
        return None
    return ClosureRecord(t_close=float(best_t), phase_distance=float(math.sqrt(best_d2)))


def export_trajectory(traj: Trajectory, out: Union[str, TextIO]) -> None:
    """CSV dump with 17 significant digits: t,r,phi,p_r,p_phi,E,L."""
    close = False
    if isinstance(out, str):
        out = open(out, "w", newline="\n")
        close = True
    try:
        out.write("t,r,phi,p_r,p_phi,E,L\n")
        for i in range(traj.times.size):
            row = (
                traj.times[i], traj.r[i], traj.phi[i],
                traj.p_r[i], traj.p_phi[i], traj.energy[i], traj.momentum[i],
            )
            out.write(",".join(f"{x:.17g}" for x in row) + "\n")
    finally:
        if close:
            out.close()

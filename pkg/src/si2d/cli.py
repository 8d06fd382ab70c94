"""Command-line front door.

Subcommands: periods, potential, actions, orbit, abel, classify, bertrand,
verify.  All artifacts are deterministic: floats carry 17 significant
digits, JSON keys keep a fixed order, and nothing is timestamped.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from . import __version__, abel, acceptance, actions, classify, dynamics, potentials
from .errors import Si2dError
from .geometry import Curvature, r_of_rho, rho_of_r
from .potentials import Free, Kepler, Oscillator, PoschlTeller, RadialPotential


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad numeric list {text!r}: {exc}")


def _pool_map(fn: Callable, items: Iterable):
    """Map preserving order; worker count capped by SI2D_THREADS."""
    items = list(items)
    workers = int(os.environ.get("SI2D_THREADS", "1") or "1")
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit_json(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header: str, rows: Iterable[tuple], out: Optional[str]) -> None:
    lines = [header] + [",".join(_fmt(x) for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# system construction from flags
# ---------------------------------------------------------------------------

def _add_system_flags(p: argparse.ArgumentParser, need_angular: bool = True) -> None:
    p.add_argument("--k", type=float, default=0.0, help="curvature")
    p.add_argument("--preset", choices=potentials.PRESET_NAMES, help="named model")
    p.add_argument("--family", choices=["oscillator", "kepler"])
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--D", type=float)
    p.add_argument("--F", type=float)
    if need_angular:
        p.add_argument("--angular", choices=["pt", "free"], help="explicit angular part")
        p.add_argument("--delta-phi", type=float, default=math.pi)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=float)
    p.add_argument("--q", type=float, help="commensurability override")


def _build_system(args) -> tuple[RadialPotential, Optional[object], Optional[Fraction]]:
    k = Curvature(args.k)
    if args.preset:
        params = {}
        for key in ("delta", "D", "alpha", "beta", "n"):
            val = getattr(args, key, None)
            if val is not None:
                params[key] = val
        return potentials.preset(args.preset, k, **params)
    if not args.family:
        raise Si2dError("need --preset or --family")
    if args.family == "oscillator":
        fam = Oscillator(args.gamma or 0.0, args.delta or 0.0)
    else:
        fam = Kepler(args.B or 0.0, args.D or 0.0, args.F or 0.0)
    V = RadialPotential(fam, k)
    U = None
    if getattr(args, "angular", None) == "pt":
        if args.alpha is None or args.beta is None or args.n is None:
            raise Si2dError("--angular pt needs --alpha --beta --n")
        U = PoschlTeller(args.alpha, args.beta, args.n)
    elif getattr(args, "angular", None) == "free":
        U = Free(args.delta_phi)
    q = Fraction(args.q).limit_denominator(1000) if args.q else None
    return V, U, q


def _inputs_dict(args, keys) -> dict:
    out = {}
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            out[key] = val
    return out


def _check(cid: str, passed: bool, value: float, tol: float) -> dict:
    return {"id": cid, "pass": bool(passed), "value": value, "tolerance": tol}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_periods(args) -> int:
    V, U, q = _build_system(args)
    energies = args.E
    periods = _pool_map(lambda e: actions.radial_period(V, args.A, e), energies)
    mean = sum(periods) / len(periods)
    spread = (max(periods) - min(periods)) / mean if len(periods) > 1 else 0.0
    closed = None
    if isinstance(V.family, (Oscillator, Kepler)):
        closed = actions.closed_form_radial_period(V.family, args.A)
    report = actions.PeriodReport(
        T_quadrature=mean, T_closed_form=closed, A=args.A, E=None,
        relative_spread=spread, energies=tuple(energies), periods=tuple(periods),
    )
    results = {
        "energies": list(report.energies),
        "T_rho": list(report.periods),
        "T_rho_mean": report.T_quadrature,
        "T_rho_closed_form": report.T_closed_form,
        "relative_spread": report.relative_spread,
    }
    if U is not None:
        t_phi = actions.angular_period(U, args.A)
        results["T_phi"] = t_phi
        results["ratio"] = report.T_quadrature / t_phi
    checks = [_check("isochronous-spread", report.relative_spread < 1e-6,
                     report.relative_spread, 1e-6)]
    payload = {
        "command": "periods",
        "version": __version__,
        "inputs": _inputs_dict(args, ["k", "preset", "family", "gamma", "delta",
                                      "B", "D", "F", "A"]) | {"E": energies},
        "results": results,
        "checks": checks,
    }
    _emit_json(payload, args.out)
    return 0 if all(c["pass"] for c in checks) else 1


def cmd_potential(args) -> int:
    V, U, _q = _build_system(args)
    k = V.curvature
    rows = []
    r_hi = min(k.r_max * 0.95, 3.0) if math.isfinite(k.r_max) else 3.0
    for r in np.linspace(0.05, r_hi, args.points):
        rows.append(("V_r", float(r), potentials.eval_radial(V, float(r))))
    if U is not None and not isinstance(U, Free):
        lo, hi = U.cell
        span = hi - lo
        for phi in np.linspace(lo + 0.01 * span, hi - 0.01 * span, args.points):
            rows.append(("U_phi", float(phi), U.value(float(phi))))
    if args.A is not None:
        pair = actions.radial_turning_points(V, args.A, actions.bound_energy_range(V, args.A)[1])
        for rho in np.linspace(pair.x_min, pair.x_max, args.points):
            rows.append(("W_eff_rho", float(rho), V.w_eff(float(rho), args.A)))
    lines = ["kind,x,value"] + [f"{kind},{_fmt(x)},{_fmt(v)}" for kind, x, v in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_actions(args) -> int:
    V, U, q = _build_system(args)
    j_r_rho = actions.radial_action(V, args.A, args.E[0], variable="rho")
    j_r_r = actions.radial_action(V, args.A, args.E[0], variable="r")
    results = {
        "J_r": j_r_rho,
        "J_r_r_form": j_r_r,
        "T_rho": actions.radial_period(V, args.A, args.E[0]),
    }
    checks = [_check("radial-variable-consistency",
                     abs(j_r_rho - j_r_r) <= 1e-9 * (1 + abs(j_r_rho)),
                     abs(j_r_rho - j_r_r), 1e-9)]
    if U is not None:
        results["J_phi"] = actions.angular_action(U, args.A)
        results["T_phi"] = actions.angular_period(U, args.A)
    if q is not None and isinstance(V.family, (Oscillator, Kepler)):
        closed_j = actions.closed_form_angular_action(V.family, args.A, q)
        closed_t = actions.closed_form_period(V.family, args.A, q)
        results["J_phi_closed_form"] = closed_j
        results["T_phi_closed_form"] = closed_t
        if "J_phi" in results:
            results["J_phi_offset"] = results["J_phi"] - closed_j
    payload = {
        "command": "actions",
        "version": __version__,
        "inputs": _inputs_dict(args, ["k", "preset", "family", "gamma", "delta",
                                      "B", "D", "F", "A"]) | {"E": args.E},
        "results": results,
        "checks": checks,
    }
    _emit_json(payload, args.out)
    return 0 if all(c["pass"] for c in checks) else 1


def cmd_orbit(args) -> int:
    V, U, q = _build_system(args)
    if U is None:
        raise Si2dError("orbit needs an angular part (--preset or --angular)")
    s0 = dynamics.initial_state(V, U, args.E[0], args.A)
    traj = dynamics.integrate(s0, V, U, t_max=args.t_max, dt=args.dt)
    if args.out:
        dynamics.export_trajectory(traj, args.out)
    rec = dynamics.orbit_closure(traj, tol=args.closure_tol)
    results = {
        "samples": int(traj.times.size),
        "energy_drift": traj.energy_drift,
        "L_drift": traj.L_drift,
        "closure": None if rec is None else
        {"t_close": rec.t_close, "phase_distance": rec.phase_distance},
    }
    checks = [
        _check("energy-drift", traj.energy_drift < 1e-8 * (1 + abs(args.E[0])),
               traj.energy_drift, 1e-8),
        _check("L-drift", traj.L_drift < 1e-8 * (1 + abs(args.A)),
               traj.L_drift, 1e-8),
    ]
    try:
        omega_r, omega_phi = dynamics.measure_frequencies(traj)
        results["omega_r"] = omega_r
        results["omega_phi"] = omega_phi
        if q is not None:
            resid = dynamics.third_integral_check(traj, q.numerator, q.denominator)
            results["third_integral_residual"] = resid
            checks.append(_check("third-integral", resid < 1e-5, resid, 1e-5))
    except Si2dError:
        pass
    payload = {
        "command": "orbit",
        "version": __version__,
        "inputs": _inputs_dict(args, ["k", "preset", "family", "gamma", "delta", "B",
                                      "D", "F", "alpha", "beta", "n", "A", "t-max", "dt"])
        | {"E": args.E},
        "results": results,
        "checks": checks,
    }
    _emit_json(payload, None)
    return 0 if all(c["pass"] for c in checks) else 1


def cmd_abel(args) -> int:
    if args.family == "oscillator":
        fam = Oscillator(args.gamma or 0.0, 1.0)
    else:
        fam = Kepler(args.B or 0.0, 1.0, args.F or 0.0)
    if args.G == "ttw":
        if args.alpha is None or args.beta is None or args.n is None:
            raise Si2dError("--G ttw needs --alpha --beta --n")
        g = abel.TTWG(args.alpha, args.beta, args.n)
    else:
        g = abel.ConstantG(args.phi0)
    grid = args.U0 + np.geomspace(1e-8, args.grid_top, args.grid_points)
    _branches, tab = abel.reconstruct_angular(fam, args.q, args.U0, g, grid)
    _emit_csv("phi,U", zip(tab.phi_grid, tab.u_grid), args.out)
    return 0


def cmd_classify(args) -> int:
    V, U, q = _build_system(args)
    if U is None:
        raise Si2dError("classify needs an angular part (--preset or --angular)")
    verdict = classify.superintegrability_report(
        V, U, args.A, args.E if args.E else None
    )
    payload = {
        "command": "classify",
        "version": __version__,
        "inputs": _inputs_dict(args, ["k", "preset", "family", "gamma", "delta", "B",
                                      "D", "F", "alpha", "beta", "n"])
        | {"A": args.A},
        "results": verdict.to_dict(),
        "checks": [
            _check("isochronous", verdict.isochronous, verdict.relative_spread, 1e-6),
            _check("rational-q", verdict.q_estimate is not None, verdict.q_residual, 1e-6),
        ],
    }
    _emit_json(payload, args.out)
    return 0 if verdict.isochronous and verdict.q_estimate is not None else 1


def cmd_bertrand(args) -> int:
    V, _U, _q = _build_system(args)
    q = classify.central_q(V.family)
    results = {"central_q": None if q is None else str(q)}
    if q is not None:
        a = args.A[0] if args.A else 1.0
        lo, hi = actions.bound_energy_range(V, a)
        e = lo + 0.5 * (hi - lo)
        ratio = actions.radial_period(V, a, e) / actions.angular_period(Free(math.pi), a)
        results["period_ratio"] = ratio
        results["ratio_deviation"] = abs(ratio - float(q))
    payload = {
        "command": "bertrand",
        "version": __version__,
        "inputs": _inputs_dict(args, ["k", "family", "gamma", "delta", "B", "D", "F"]),
        "results": results,
        "checks": [] if q is None else
        [_check("central-commensurability", results["ratio_deviation"] < 1e-7,
                results["ratio_deviation"], 1e-7)],
    }
    _emit_json(payload, args.out)
    return 0


def cmd_verify(args) -> int:
    results = []

    def report(res):
        status = "PASS" if res.passed else "FAIL"
        sys.stdout.write(
            f"[{status}] {res.cid}: value={res.value:.3e} tol={res.tolerance:.0e} "
            f"- {res.detail}\n"
        )
        sys.stdout.flush()

    results = acceptance.run_all(report=report)
    n_fail = sum(not r.passed for r in results)
    if args.out:
        payload = {
            "command": "verify",
            "version": __version__,
            "inputs": {"all": True},
            "results": {"passed": len(results) - n_fail, "failed": n_fail},
            "checks": [
                _check(r.cid, r.passed, r.value, r.tolerance) for r in results
            ],
        }
        _emit_json(payload, args.out)
    sys.stdout.write(f"{len(results) - n_fail}/{len(results)} criteria passed\n")
    return 0 if n_fail == 0 else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="si2d",
        description="superintegrable 2D systems on constant-curvature surfaces",
    )
    p.add_argument("--version", action="version", version=f"si2d {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("periods", help="radial periods over an energy grid")
    _add_system_flags(sp)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--E", type=_floats, required=True, help="comma list of energies")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_periods)

    sp = sub.add_parser("potential", help="tabulate V(r), U(phi), W_eff(rho)")
    _add_system_flags(sp)
    sp.add_argument("--A", type=float)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_potential)

    sp = sub.add_parser("actions", help="action variables and closed-form deltas")
    _add_system_flags(sp)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--E", type=_floats, required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_actions)

    sp = sub.add_parser("orbit", help="integrate an orbit, export CSV, check closure")
    _add_system_flags(sp)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--E", type=_floats, required=True)
    sp.add_argument("--t-max", dest="t_max", type=float, default=50.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--closure-tol", dest="closure_tol", type=float, default=1e-5)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_orbit)

    sp = sub.add_parser("abel", help="reconstruct an angular well from closed-form widths")
    sp.add_argument("--family", choices=["oscillator", "kepler"], required=True)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--B", type=float)
    sp.add_argument("--F", type=float)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--U0", type=float, required=True)
    sp.add_argument("--G", choices=["ttw", "const"], default="const")
    sp.add_argument("--phi0", type=float, default=math.pi / 4)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--n", type=float)
    sp.add_argument("--grid-points", dest="grid_points", type=int, default=512)
    sp.add_argument("--grid-top", dest="grid_top", type=float, default=1e4)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_abel)

    sp = sub.add_parser("classify", help="superintegrability verdict")
    _add_system_flags(sp)
    sp.add_argument("--A", type=_floats, required=True, help="comma list of A samples")
    sp.add_argument("--E", type=_floats)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("bertrand", help="central-potential commensurability report")
    _add_system_flags(sp, need_angular=False)
    sp.add_argument("--A", type=_floats)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_bertrand)

    sp = sub.add_parser("verify", help="run the full verification suite")
    sp.add_argument("--all", action="store_true", help="run every criterion")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_verify)

    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Si2dError as exc:
        sys.stderr.write(f"si2d: {exc}\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"si2d: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

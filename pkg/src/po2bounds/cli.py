"""Command-line front end.

Subcommands: bound, table, simulate, equilibrium, exact, verify.  Every
command emits one machine-readable run record (JSON by default, CSV on
request) on stdout; human-oriented progress and warnings go to stderr.
Records are byte-stable for fixed flags and seed apart from the
timestamp field.

Exit codes: 0 success, 1 flag/validation error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import bounds as bounds_mod
from . import exactchain, meanfield, simulator, tridiag

SCHEMA_VERSION = 1

TABLE_METRICS = ("lambda", "simulation", "asymptotic_bound", "upper_bound")

CSV_HEADER = ["n", "gamma", "alpha", "buffer", "xi", "seed", "metric", "value"]

VERIFY_DEFAULT_GAMMAS = (0.1, 0.01)
VERIFY_DEFAULT_NS = (10, 100, 1000)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _default_seed() -> int:
    env = os.environ.get("PO2_SEED")
    return int(env) if env else 0


def _params_from(args, n=None) -> meanfield.SystemParams:
    try:
        buffer = args.buffer if args.buffer == "auto" else int(args.buffer)
        return meanfield.SystemParams(
            n_servers=n if n is not None else args.n,
            gamma=args.gamma,
            alpha=args.alpha,
            buffer=buffer,
            xi=args.xi,
        )
    except ValueError as exc:
        _say(f"invalid parameters: {exc}")
        sys.exit(1)


def _record(command: str, params: meanfield.SystemParams | None, results: dict, seed) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": None,
        "results": results,
        "seed": seed,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if params is not None:
        rec["params"] = {
            "n": params.n_servers,
            "gamma": params.gamma,
            "alpha": params.alpha,
            "buffer": params.buffer,
            "xi": params.xi,
            "lambda": params.lam,
        }
    return rec


def _flat_rows(rec: dict) -> list[list]:
    """One (n, metric, value) row per scalar result, RFC-4180 friendly."""
    p = rec["params"] or {}
    base = [p.get("n"), p.get("gamma"), p.get("alpha"), p.get("buffer"), p.get("xi"), rec["seed"]]

    rows = []

    def walk(prefix, val, n_override=None):
        head = list(base)
        if n_override is not None:
            head[0] = n_override
        if isinstance(val, dict):
            for k, v in val.items():
                walk(f"{prefix}.{k}" if prefix else k, v, n_override)
        elif isinstance(val, (list, tuple)):
            for idx, v in enumerate(val):
                walk(f"{prefix}[{idx}]", v, n_override)
        else:
            rows.append(head + [prefix, val])

    if rec["command"] == "table":
        for entry in rec["results"]["rows"]:
            for metric in TABLE_METRICS:
                if metric in entry:
                    rows.append(
                        [entry["n"], p.get("gamma"), p.get("alpha"), entry["buffer"],
                         p.get("xi"), rec["seed"], metric, entry[metric]]
                    )
    else:
        walk("", rec["results"])
    return rows


def _emit(rec: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(rec, indent=2, default=_jsonable) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(_flat_rows(rec))
        text = buf.getvalue()
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _alpha_warnings(params: meanfield.SystemParams) -> list[str]:
    if not 0.0 < params.alpha < bounds_mod.ALPHA_VALID_MAX:
        return [f"alpha outside (0,1/18): bound formula not guaranteed (alpha={params.alpha})"]
    return []


# ---------------------------------------------------------------- commands


def cmd_bound(args) -> int:
    params = _params_from(args)
    report = bounds_mod.dominant_term(params)
    warnings = _alpha_warnings(params)
    for w in warnings:
        _say(f"warning: {w}")
    _say(
        f"lambda={_fmt(report.lam)} buffer={report.buffer_used} "
        f"asymptotic={_fmt(report.scaled_asymptotic)} upper={_fmt(report.scaled_upper)}"
    )
    results = {
        "lambda": report.lam,
        "buffer_used": report.buffer_used,
        "dominant_term": report.dominant_term,
        "scaled_asymptotic": report.scaled_asymptotic,
        "scaled_upper": report.scaled_upper,
        "alpha_valid": report.alpha_valid,
        "warnings": warnings,
    }
    _emit(_record("bound", params, results, args.seed), args)
    return 0


def cmd_table(args) -> int:
    n_list = _parse_n_list(args.n_list)
    rows = []
    params = None
    for n in n_list:
        params = _params_from(args, n=n)
        report = bounds_mod.dominant_term(params)
        row = {
            "n": n,
            "buffer": report.buffer_used,
            "lambda": report.lam,
            "asymptotic_bound": report.scaled_asymptotic,
            "upper_bound": report.scaled_upper,
        }
        if args.simulate:
            config = simulator.SimConfig(
                steps=args.steps, seed=args.seed, replicas=args.replicas,
                warmup_fraction=args.warmup, scheme=args.scheme,
            )
            stats = simulator.run(params, config)
            row["simulation"] = stats.scaled_mse
            row["simulation_std_error"] = params.n_servers * stats.std_error
        rows.append(row)
        _say("  ".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in row.items()))
    for w in _alpha_warnings(params):
        _say(f"warning: {w}")
    _emit(_record("table", params, {"rows": rows}, args.seed), args)
    return 0


def cmd_simulate(args) -> int:
    params = _params_from(args)
    config = simulator.SimConfig(
        steps=args.steps, seed=args.seed, replicas=args.replicas,
        warmup_fraction=args.warmup, scheme=args.scheme,
    )
    tail = None
    if args.tail_r is not None or args.tail_eps is not None:
        if args.tail_r is None or args.tail_eps is None:
            _say("--tail-r and --tail-eps must be given together")
            return 1
        tail = simulator.TailConfig(r=args.tail_r, epsilon=args.tail_eps)
    stats = simulator.run(params, config, tail)
    _say(
        f"scaled_mse={_fmt(stats.scaled_mse)} std_error={_fmt(stats.std_error)}"
        + (f" tail_prob={_fmt(stats.tail_prob)}" if stats.tail_prob is not None else "")
    )
    results = {
        "mse_mean": stats.mse_mean,
        "scaled_mse": stats.scaled_mse,
        "std_error": stats.std_error,
        "replica_values": stats.replica_values,
        "occupancy_mean": stats.occupancy_mean,
        "tail_prob": stats.tail_prob,
        "scheme": config.scheme,
        "steps": config.steps,
        "replicas": config.replicas,
        "warmup_fraction": config.warmup_fraction,
    }
    _emit(_record("simulate", params, results, args.seed), args)
    return 0


def cmd_equilibrium(args) -> int:
    params = _params_from(args)
    eq = meanfield.equilibrium(params)
    _say(f"residual={eq.residual:.3e} buffer={params.buffer}")
    results = {
        "s_star": eq.s_star,
        "residual": eq.residual,
        "buffer_used": params.buffer,
    }
    _emit(_record("equilibrium", params, results, args.seed), args)
    return 0


def cmd_exact(args) -> int:
    params = _params_from(args)
    try:
        gen = exactchain.build_generator(params)
    except exactchain.StateSpaceTooLarge as exc:
        _say(str(exc))
        return 1
    dist = exactchain.stationary(gen)
    eq = meanfield.equilibrium(params)
    mse = exactchain.exact_mse(dist, eq.s_star, params)
    _say(
        f"states={gen.space.count} residual={dist.residual:.2e} "
        f"scaled_mse={_fmt(params.n_servers * mse)}"
    )
    results = {
        "states": gen.space.count,
        "stationary_residual": dist.residual,
        "exact_mse": mse,
        "scaled_exact_mse": params.n_servers * mse,
    }
    _emit(_record("exact", params, results, args.seed), args)
    return 0


def cmd_verify(args) -> int:
    gammas = [float(g) for g in args.gamma.split(",")] if args.gamma else list(VERIFY_DEFAULT_GAMMAS)
    ns = _parse_n_list(args.n_list) if args.n_list else list(VERIFY_DEFAULT_NS)
    checks = []
    for gamma in gammas:
        for n in ns:
            params = meanfield.SystemParams(
                n_servers=n, gamma=gamma, alpha=args.alpha, buffer="auto", xi=args.xi
            )
            checks.extend(run_battery(params, seed=args.seed))
    failed = [c for c in checks if not c["passed"]]
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        _say(
            f"{status} {c['check']:<28} gamma={c['gamma']:<5g} N={c['n']:<6d} "
            f"margin={c['margin']:.3e}"
        )
    _say(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    results = {"checks": checks, "all_passed": not failed}
    _emit(_record("verify", None, results, args.seed), args)
    return 2 if failed else 0


# ---------------------------------------------------------- verify battery


def run_battery(params: meanfield.SystemParams, seed: int = 0) -> list[dict]:
    """Numeric checks of the tridiagonal and drift statements at one point.

    Each entry reports a signed margin (>= 0 means pass) so failures are
    quantified rather than silent.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(params.n_servers,)))
    n, gamma = params.n_servers, params.gamma
    eq = meanfield.equilibrium(params)
    s_star = eq.s_star
    jac = tridiag.jacobian(s_star, params)
    out = []

    def add(check: str, margin: float, tol: float = 0.0):
        out.append(
            {
                "check": check,
                "gamma": gamma,
                "n": n,
                "margin": float(margin),
                "passed": bool(margin >= -tol),
            }
        )

    # equilibrium quality
    add("equilibrium_residual", 1e-12 - eq.residual)
    tail = params.lam ** (2.0 ** np.arange(1, params.buffer + 1) - 1.0)
    rel_gap = np.min((tail - s_star) / np.maximum(tail, 1e-300))
    add("equilibrium_tail_bound", float(rel_gap), tol=1e-12)
    ext = np.concatenate(([1.0], s_star, [0.0]))
    add("equilibrium_monotone", float(np.min(-np.diff(ext))), tol=1e-15)

    # determinant recursions
    p = tridiag.determinants(jac)
    signs = (-1.0) ** np.arange(params.buffer + 1) * p
    add("determinant_sign_alternation", float(np.min(signs)))
    add("determinant_magnitude", float(np.min(np.abs(p)) - 1.0), tol=1e-12)
    p_short = tridiag.determinants_shortform(jac)
    rel = np.max(np.abs(p - p_short) / np.maximum(np.abs(p), 1.0))
    add("determinant_shortform_match", 1e-9 - rel)

    # convergents and inverse diagonal
    c = tridiag.convergents(jac)
    add("convergents_negative", float(np.min(-c)))
    inv_diag = tridiag.inverse_diagonal(jac)
    solve_diag = np.array([tridiag.inverse_entry(jac, i, i) for i in range(params.buffer)])
    rel = np.max(np.abs(inv_diag - solve_diag) / np.maximum(np.abs(solve_diag), 1e-30))
    add("inverse_diagonal_vs_solve", 1e-10 - rel)
    add("inverse_diagonal_negative", float(np.min(-inv_diag)))
    add("inverse_diag_first_magnitude", float(abs(inv_diag[0]) - 1.0 / 3.0))

    # inverse-entry bound (asserted at N >= 100, reported below)
    dense_inv = np.column_stack(
        [tridiag.solve(jac, e) for e in np.eye(params.buffer)]
    )
    entry_cap = (12.0 / gamma) * n ** (2.0 * params.alpha + 2.0 * params.xi)
    entry_margin = entry_cap - float(np.max(np.abs(dense_inv)))
    if n >= 100:
        add("inverse_entry_bound", entry_margin)
    else:
        add("inverse_entry_bound_reported", abs(entry_margin))

    # Stein identity: (J^{-T} x) . (J x) == ||x||^2 for any x
    jac_t = jac.transpose()
    worst = 0.0
    for _ in range(100):
        x = rng.standard_normal(params.buffer)
        x /= np.linalg.norm(x)
        y = tridiag.solve(jac_t, x)
        worst = max(worst, abs(float(y @ jac.matvec(x)) - 1.0))
    add("stein_identity", 1e-10 - worst)

    # spectrum: real by construction, Hurwitz, and below -delta0
    spec = tridiag.spectrum(jac)
    add("eigenvalues_negative", -spec.max_eig)

    # the Lyapunov certificate exists only for lam > 0.75
    if params.lam > 0.75:
        weights = meanfield.lyapunov_weights(params)
        add("spectral_gap_vs_delta0", -weights.delta0 - spec.max_eig)

        worst = 0.0
        for _ in range(20):
            s0 = np.sort(rng.random(params.buffer))[::-1].copy()
            traj = meanfield.integrate(s0, t_end=40.0, dt=0.01, params=params)
            worst = max(worst, meanfield.check_lyapunov_decay(traj, weights, s_star))
        add("lyapunov_decay", 1e-6 - worst)

    # exact second-order expansion of the quadratic drift
    worst = 0.0
    for _ in range(20):
        s = np.sort(rng.random(params.buffer))[::-1].copy()
        worst = max(worst, meanfield.taylor_check(s, s_star, params))
    add("taylor_quadratic_exact", 1e-12 - worst)

    # concentration-parameter feasibility at this alpha (N-independent)
    try:
        feas = bounds_mod.ssc_feasibility(params.alpha, 1e-9)
        add("ssc_feasibility", 1.0 if feas.feasible else -1.0)
    except ValueError:
        add("ssc_feasibility", -1.0)

    return out


# ----------------------------------------------------------------- parser


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        _say(f"invalid --n-list: {text!r}")
        sys.exit(1)
    if not values or any(v < 1 for v in values):
        _say(f"--n-list must contain positive integers, got {text!r}")
        sys.exit(1)
    return values


def _add_common(p: argparse.ArgumentParser, with_n=True):
    if with_n:
        p.add_argument("--n", type=int, required=True, help="number of servers N")
    p.add_argument("--gamma", type=float, required=True, help="slack parameter in (0, 1]")
    p.add_argument("--alpha", type=float, required=True, help="heavy-traffic exponent >= 0")
    p.add_argument("--buffer", default="auto", help="queue capacity b, or 'auto'")
    p.add_argument("--xi", type=float, default=0.01, help="small slack xi > 0")
    _add_output(p)


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, help="write the record here instead of stdout")
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="RNG seed (default: PO2_SEED env var or 0)")


def _add_sim_flags(p: argparse.ArgumentParser):
    p.add_argument("--steps", type=lambda v: int(float(v)), default=10**6,
                   help="steps per replica (scientific notation ok)")
    p.add_argument("--replicas", type=int, default=10)
    p.add_argument("--warmup", type=float, default=0.1, help="warmup fraction in [0, 1)")
    p.add_argument("--scheme", choices=simulator.SCHEMES, default="uniformization")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="po2bounds", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bound", help="dominant term and upper bound at one parameter point")
    _add_common(p)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("table", help="bound table over a list of N (optionally simulated)")
    p.add_argument("--n-list", required=True, help="comma-separated N values")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--buffer", default="auto")
    p.add_argument("--xi", type=float, default=0.01)
    p.add_argument("--simulate", action="store_true", help="add a simulation column")
    _add_sim_flags(p)
    _add_output(p)
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("simulate", help="steady-state MSE estimate by CTMC simulation")
    _add_common(p)
    _add_sim_flags(p)
    p.add_argument("--tail-r", type=int, default=None, help="tail moment order r")
    p.add_argument("--tail-eps", type=float, default=None, help="tail radius exponent epsilon")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("equilibrium", help="mean-field fixed point with residual certificate")
    _add_common(p)
    p.set_defaults(fn=cmd_equilibrium)

    p = sub.add_parser("exact", help="exact stationary MSE for small (N, b)")
    _add_common(p)
    p.set_defaults(fn=cmd_exact)

    p = sub.add_parser("verify", help="numeric battery for the structural claims")
    p.add_argument("--gamma", default=None, help="comma-separated gammas (default 0.1,0.01)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n-list", default=None, help="comma-separated N grid (default 10,100,1000)")
    p.add_argument("--xi", type=float, default=0.01)
    _add_output(p)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, meanfield.SolverError) as exc:
        _say(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Each subcommand maps onto one library operation, writes CSV tables plus
a JSON result, and records a manifest with the exact argument vector so
``gilbert rerun <manifest>`` reproduces byte-identical outputs.

Exit codes: 0 success, 2 configuration/usage error, 3 a ``--check``
acceptance condition failed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import asdict

from . import reports, stats
from .engine import MarkedConfig, build
from .functionals import (Phi, default_padding, empirical_measure, integrate,
                          test_function)
from .geom import DegenerateConfiguration, Rect
from .pointproc import ProcessParams, sample_poisson
from .render import render_svg
from .stabilize import stab_tail

TABLE_COLUMNS = ("lambda", "estimate", "std_error", "target", "n_rep",
                 "certified_fraction", "master_seed")


def _default_seed() -> int:
    return int(os.environ.get("GILBERT_SEED", "0"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: $GILBERT_SEED or 0)")
    p.add_argument("--stream", type=int, default=0, help="base stream index")
    p.add_argument("--out", type=str, default=None,
                   help="output prefix; writes <out>.csv/.json and a manifest")
    p.add_argument("--check", action="store_true",
                   help="exit 3 unless the command's acceptance condition holds")


def _params(args, tau: float) -> ProcessParams:
    seed = args.seed if args.seed is not None else _default_seed()
    return ProcessParams(intensity=tau, master_seed=seed,
                         stream_index=args.stream)


def _lambda_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _report_row(report: stats.EstimatorReport, lam: float | str = "") -> dict:
    return {"lambda": lam, "estimate": report.estimate,
            "std_error": report.std_error, "target": "",
            "n_rep": report.n_rep,
            "certified_fraction": report.certified_fraction,
            "master_seed": report.metadata.get("master_seed", "")}


def _rows_from_experiment(rows, seed: int) -> list[dict]:
    return [{"lambda": r.lam, "estimate": r.estimate,
             "std_error": r.std_error, "target": r.target, "n_rep": r.n_rep,
             "certified_fraction": r.certified_fraction, "master_seed": seed}
            for r in rows]


def _emit(args, *, command: str, argv: list[str],
          table: list[dict] | None, result: dict) -> None:
    if args.out is None:
        return
    outputs = {}
    if table is not None:
        path = args.out + ".csv"
        reports.write_csv(path, TABLE_COLUMNS, table)
        outputs["csv"] = path
    path = args.out + ".json"
    reports.write_json(path, result)
    outputs["json"] = path
    manifest = {"command": command, "argv": argv, "outputs": outputs}
    reports.write_json(args.out + ".manifest.json", manifest)


def _cmd_simulate(args, argv) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.seeds is not None:
        config = reports.read_seeds_json(args.seeds)
        if args.window is not None:
            x0, y0, w, h = args.window
            window = Rect(x0, y0, w, h)
        else:
            xs = [p.x for p in config.points] or [0.0]
            ys = [p.y for p in config.points] or [0.0]
            pad = 0.2 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
            window = Rect(min(xs) - pad, min(ys) - pad,
                          max(xs) - min(xs) + 2 * pad,
                          max(ys) - min(ys) + 2 * pad)
        config = MarkedConfig(config.points, window)
    else:
        if args.lam is None:
            raise ValueError("simulate needs either --seeds or --tau/--lam")
        side = math.sqrt(args.lam)
        window = Rect(0.0, 0.0, side, side)
        params = ProcessParams(intensity=args.tau, master_seed=seed,
                               stream_index=args.stream)
        config = sample_poisson(window, params)
    tess = build(config, tie_break=args.tie_break)
    result = reports.tessellation_to_dict(tess)
    if args.out is not None:
        reports.write_json(args.out + ".json", result)
        outputs = {"json": args.out + ".json"}
        if args.svg:
            render_svg(tess, config.window, args.out + ".svg")
            outputs["svg"] = args.out + ".svg"
        reports.write_json(args.out + ".manifest.json",
                           {"command": "simulate", "argv": argv,
                            "outputs": outputs})
    n_blocked = sum(1 for v in tess.branch_lengths.values() if math.isfinite(v))
    print(f"simulate: {len(config)} seeds, {len(tess.events)} collisions, "
          f"{n_blocked} blocked branches")
    return 0


def _cmd_measure(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    f = test_function(args.f)
    padding = args.padding if args.padding is not None else default_padding(args.tau)
    mu = empirical_measure(args.lam, params, phi, padding)
    res = integrate(mu, f)
    result = {"lambda": args.lam, "tau": args.tau, "phi": phi.label(),
              "f": f.name, "padding": padding,
              "integral": res.value, "integral_certified": res.certified_value,
              "n_excluded": res.n_excluded, "n_atoms": res.n_atoms,
              "total_mass": mu.total_mass,
              "certified_fraction": mu.certified_fraction,
              "master_seed": params.master_seed, "stream": params.stream_index}
    atoms = [{"lambda": args.lam, "estimate": w, "std_error": "",
              "target": "", "n_rep": "", "certified_fraction": float(c),
              "master_seed": params.master_seed}
             for w, c in zip(mu.weights.tolist(), mu.certified.tolist())]
    _emit(args, command="measure", argv=argv, table=atoms, result=result)
    print(f"measure: {res.n_atoms} atoms, integral {res.value:.6g} "
          f"(certified-only {res.certified_value:.6g}, "
          f"{res.n_excluded} excluded)")
    return 0


def _cmd_estimate_e(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    rep = stats.estimate_E(args.tau, phi, args.n_rep, params, args.m_max)
    result = {"report": asdict(rep)}
    _emit(args, command="estimate-e", argv=argv,
          table=[_report_row(rep)], result=result)
    print(f"estimate-e: {rep.estimate:.6g} +/- {rep.std_error:.2g} "
          f"(n={rep.n_rep}, certified {rep.certified_fraction:.3f})")
    return 0


def _cmd_estimate_v(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    radii = _lambda_list(args.radii) if args.radii else None
    rep = stats.estimate_V(args.tau, phi, args.r_max, args.n_angles,
                           args.n_radii, args.n_rep, params, args.m_max,
                           n_rep_c0=args.n_rep_c0, n_rep_e=args.n_rep_e,
                           radii=radii)
    result = {"report": asdict(rep)}
    _emit(args, command="estimate-v", argv=argv,
          table=[_report_row(rep)], result=result)
    print(f"estimate-v: {rep.estimate:.6g} +/- {rep.std_error:.2g}")
    return 0


def _cmd_lln(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    f = test_function(args.f)
    lams = _lambda_list(args.lambdas)
    n_rep = ([int(x) for x in args.n_rep.split(",")]
             if "," in args.n_rep else int(args.n_rep))
    rows = stats.lln_experiment(args.tau, phi, f, lams, n_rep, params,
                                padding=args.padding, m_max=args.m_max,
                                n_rep_e=args.n_rep_e)
    table = _rows_from_experiment(rows, params.master_seed)
    result = {"rows": [asdict(r) for r in rows]}
    _emit(args, command="lln", argv=argv, table=table, result=result)
    for r in rows:
        print(f"lln: lambda={r.lam:g} mean={r.estimate:.6g} "
              f"se={r.std_error:.2g} target={r.target:.6g}")
    if args.check:
        devs = [abs(r.estimate - r.target) for r in rows]
        monotone = all(devs[i + 1] <= devs[i] for i in range(len(devs) - 1))
        final_ok = (abs(rows[-1].estimate - rows[-1].target)
                    <= 0.05 * abs(rows[-1].target))
        if not (monotone and final_ok):
            print("lln check FAILED", file=sys.stderr)
            return 3
    return 0


def _cmd_var(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    f = test_function(args.f)
    lams = _lambda_list(args.lambdas)
    rows = stats.var_experiment(args.tau, phi, f, lams, args.n_rep, params,
                                v_hat=args.v_hat, padding=args.padding)
    table = _rows_from_experiment(rows, params.master_seed)
    result = {"rows": [asdict(r) for r in rows]}
    _emit(args, command="var", argv=argv, table=table, result=result)
    for r in rows:
        print(f"var: lambda={r.lam:g} norm_var={r.estimate:.6g} "
              f"se={r.std_error:.2g}")
    if args.check and len(rows) >= 2:
        a, b = rows[-2].estimate, rows[-1].estimate
        if abs(a - b) > 0.15 * max(abs(a), abs(b)):
            print("var check FAILED: rungs differ by more than 15%",
                  file=sys.stderr)
            return 3
    return 0


def _cmd_clt(args, argv) -> int:
    params = _params(args, args.tau)
    phi = Phi.parse(args.phi)
    f = test_function(args.f)
    rep = stats.clt_experiment(args.tau, phi, f, args.lam, args.n_rep, params,
                               padding=args.padding)
    result = {"ks_statistic": rep.ks_statistic, "p_value": rep.p_value,
              "sample_mean": rep.sample_mean,
              "sample_variance": rep.sample_variance,
              "metadata": rep.metadata}
    table = [{"lambda": args.lam, "estimate": rep.ks_statistic,
              "std_error": "", "target": rep.p_value, "n_rep": args.n_rep,
              "certified_fraction": "", "master_seed": params.master_seed}]
    _emit(args, command="clt", argv=argv, table=table, result=result)
    print(f"clt: KS D={rep.ks_statistic:.4f} p={rep.p_value:.4f}")
    if args.check and rep.p_value < 0.01:
        print("clt check FAILED: p < 0.01", file=sys.stderr)
        return 3
    return 0


def _cmd_scaling(args, argv) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    params = ProcessParams(intensity=1.0, master_seed=seed,
                           stream_index=args.stream)
    phi = Phi.parse(args.phi)
    taus = _lambda_list(args.taus)
    rep = stats.scaling_check(phi, taus, args.n_rep, params,
                              lam_base=args.lam_base, n_rep_e=args.n_rep_e)
    # CSV rows carry the scaled-mean column against the scaled-variance
    # target; per-quantity standard errors live in the JSON result
    table = [{"lambda": r.tau, "estimate": r.e_scaled, "std_error": r.e_se,
              "target": r.v_scaled, "n_rep": args.n_rep,
              "certified_fraction": "", "master_seed": seed}
             for r in rep.rows]
    result = {"k": rep.k, "rows": [asdict(r) for r in rep.rows],
              "e_flags": list(rep.e_flags), "v_flags": list(rep.v_flags)}
    _emit(args, command="scaling", argv=argv, table=table, result=result)
    for r in rep.rows:
        print(f"scaling: tau={r.tau:g} tau^(k/2)E={r.e_scaled:.6g}"
              f"+/-{r.e_se:.2g} tau^k V={r.v_scaled:.6g}+/-{r.v_se:.2g}")
    if args.check and (rep.e_flags or rep.v_flags):
        print(f"scaling check FAILED: e_flags={rep.e_flags} "
              f"v_flags={rep.v_flags}", file=sys.stderr)
        return 3
    return 0


def _cmd_stab_tail(args, argv) -> int:
    params = _params(args, args.tau)
    grid = [args.r_min + (args.r_max - args.r_min) * i / args.n_r
            for i in range(args.n_r + 1)]
    res = stab_tail(args.tau, grid, args.n_rep, params, args.m_max)
    table = [{"lambda": r, "estimate": s, "std_error": e, "target": "",
              "n_rep": res.n_rep, "certified_fraction": "",
              "master_seed": params.master_seed}
             for r, s, e in zip(res.r_grid, res.survival, res.std_error)]
    result = {"r_grid": list(res.r_grid), "survival": list(res.survival),
              "std_error": list(res.std_error), "n_rep": res.n_rep,
              "n_certified": res.n_certified, "slope": res.slope,
              "intercept": res.intercept, "r_squared": res.r_squared,
              "C_hat": res.C_hat, "M_hat": res.M_hat}
    _emit(args, command="stab-tail", argv=argv, table=table, result=result)
    print(f"stab-tail: slope={res.slope:.4f} R^2={res.r_squared:.4f} "
          f"C={res.C_hat:.4f} M={res.M_hat:.4f}")
    if args.check and not (res.slope < 0 and res.r_squared >= 0.9):
        print("stab-tail check FAILED", file=sys.stderr)
        return 3
    return 0


def _cmd_rerun(args, argv) -> int:
    manifest = reports.read_json(args.manifest)
    stored = manifest.get("argv")
    if not stored or stored[0] == "rerun":
        raise ValueError("manifest does not contain a re-runnable command")
    return main(stored)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gilbert",
        description="Planar crack-growth tessellation simulator and "
                    "Monte Carlo experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="build one tessellation")
    p.add_argument("--seeds", type=str, default=None,
                   help="JSON file with a list of {x, y, alpha} seeds")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--window", type=float, nargs=4, default=None,
                   metavar=("X0", "Y0", "W", "H"))
    p.add_argument("--tie-break", action="store_true",
                   help="resolve simultaneous arrivals lexicographically")
    p.add_argument("--svg", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("measure", help="empirical measure and integral")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--f", type=str, default="const1")
    p.add_argument("--padding", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("estimate-e", help="mass per point")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--n-rep", type=int, default=1000)
    p.add_argument("--m-max", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate_e)

    p = sub.add_parser("estimate-v", help="variance per point")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--r-max", type=float, default=5.0)
    p.add_argument("--n-angles", type=int, default=4)
    p.add_argument("--n-radii", type=int, default=10)
    p.add_argument("--radii", type=str, default=None,
                   help="comma-separated radial nodes overriding the "
                        "uniform grid (refine near 0 for accuracy)")
    p.add_argument("--n-rep", type=int, default=400)
    p.add_argument("--n-rep-c0", type=int, default=None)
    p.add_argument("--n-rep-e", type=int, default=None)
    p.add_argument("--m-max", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate_v)

    p = sub.add_parser("lln", help="law of large numbers ladder")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--f", type=str, default="const1")
    p.add_argument("--lambdas", type=str, required=True)
    p.add_argument("--n-rep", type=str, default="50")
    p.add_argument("--n-rep-e", type=int, default=1000)
    p.add_argument("--padding", type=float, default=None)
    p.add_argument("--m-max", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_lln)

    p = sub.add_parser("var", help="variance asymptotics ladder")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--f", type=str, default="const1")
    p.add_argument("--lambdas", type=str, required=True)
    p.add_argument("--n-rep", type=int, default=200)
    p.add_argument("--v-hat", type=float, default=None)
    p.add_argument("--padding", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_var)

    p = sub.add_parser("clt", help="central limit theorem check")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--f", type=str, default="const1")
    p.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n-rep", type=int, default=300)
    p.add_argument("--padding", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("scaling", help="intensity-scaling invariances")
    p.add_argument("--phi", type=str, required=True)
    p.add_argument("--taus", type=str, default="0.5,1,2,4")
    p.add_argument("--n-rep", type=int, default=200)
    p.add_argument("--lam-base", type=float, default=400.0)
    p.add_argument("--n-rep-e", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("stab-tail", help="stabilization radius tail")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-rep", type=int, default=2000)
    p.add_argument("--r-min", type=float, default=0.0,
                   help="start of the fit grid (the head of the survival "
                        "function is flat; the exponential claim is a tail "
                        "statement)")
    p.add_argument("--r-max", type=float, default=12.0)
    p.add_argument("--n-r", type=int, default=24)
    p.add_argument("--m-max", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_stab_tail)

    p = sub.add_parser("rerun", help="re-run a manifest")
    p.add_argument("manifest", type=str)
    p.set_defaults(func=_cmd_rerun)
    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args, list(argv))
    except (ValueError, KeyError, OSError, RuntimeError,
            DegenerateConfiguration) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""``thetafilter <solve|converge|region|compare>``: CSV on stdout or ``--out``.

Exit codes: 0 success, 2 usage error or degenerate filter parameter,
3 numerical failure (Newton, step underflow).
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from thetafilter.accuracy import second_order_nu
from thetafilter.adaptive import ControllerConfig, NuPolicy, solve_adaptive, solve_fixed
from thetafilter.convergence import DEFAULT_DTS, METRICS, convergence_study
from thetafilter.core import (
    DegenerateDenominator,
    MethodParams,
    NonConvergence,
    StepMode,
    StepUnderflow,
    ThetaFilterError,
    norm,
)
from thetafilter.problems import PROBLEM_NAMES, get_problem
from thetafilter.reference import rk_reference
from thetafilter.stability import (
    a0_stability_oracle,
    is_a0_stable,
    is_a_stable,
    is_zero_stable,
    locus_curve,
    region_raster,
)
from thetafilter.stepper import NewtonConfig

EXIT_USAGE = 2
EXIT_NUMERIC = 3

# Options whose value may legitimately start with '-', e.g. "--re-range -5:5".
_VALUE_OPTS = {"--re-range", "--im-range", "--nu-list", "--theta-list", "--dt-list", "--nu", "--lambda"}


class UsageError(Exception):
    pass


@dataclass
class CsvTable:
    header: list
    rows: list

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("row arity does not match header")

    def write(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([repr(float(v)) for v in row])


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def _range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"range must look like a:b, got {text!r}")
    lo, hi = (_float(p) for p in parts)
    if not lo < hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def _resolve_nu(text: str, theta: float) -> float:
    return second_order_nu(theta) if text.strip() == "auto" else _float(text)


def _list(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError("empty list")
    return items


def _nu_label(nu: float) -> str:
    return f"{nu:.6g}"


def _state_cols(prefix: str, dim: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(dim)]


def cmd_solve(args) -> CsvTable:
    problem = get_problem(args.problem, lam=args.lam, t_end=args.t_end)
    cfg = NewtonConfig(linear_solve=problem.linear is not None)
    auto = args.nu.strip() == "auto"
    if args.adaptive:
        if args.tol is None:
            raise UsageError("--adaptive needs --tol")
        policy = NuPolicy.SECOND_ORDER if auto else NuPolicy.fixed(_float(args.nu))
        MethodParams(args.theta, 0.0 if auto else policy.nu, StepMode.VARIABLE)
        traj = solve_adaptive(problem, args.theta,
                              ControllerConfig(tol=args.tol, tau_max=args.tau_max), cfg, policy)
    else:
        if args.dt is None:
            raise UsageError("give --dt or --adaptive --tol")
        params = MethodParams(args.theta, _resolve_nu(args.nu, args.theta))
        traj = solve_fixed(problem, params, args.dt, cfg)
    header = ["t", "k"] + _state_cols("y", problem.dim) + _state_cols("y_star", problem.dim) + ["est"]
    rows = [(r.t, r.k, *r.y, *r.y_star, r.est) for r in traj.records]
    return CsvTable(header, rows)


def cmd_converge(args) -> CsvTable:
    problem = get_problem(args.problem, lam=args.lam)
    if problem.exact is None:
        raise UsageError(f"problem {args.problem!r} has no exact solution")
    nus = [_resolve_nu(s, args.theta) for s in _list(args.nu_list)]
    dts = [_float(s) for s in _list(args.dt_list)] if args.dt_list else list(DEFAULT_DTS)
    cols = convergence_study(problem, args.theta, nus, dts, args.metric,
                             NewtonConfig(linear_solve=problem.linear is not None))
    header = ["dt"]
    for col in cols:
        header += [f"err_nu{_nu_label(col.nu)}", f"rate_nu{_nu_label(col.nu)}"]
    rows = []
    for i, dt in enumerate(dts):
        row = [dt]
        for col in cols:
            row += [col.errors[i], col.rates[i]]
        rows.append(tuple(row))
    return CsvTable(header, rows)


def region_verdicts(params: MethodParams, tau: float) -> dict:
    if params.step_mode is StepMode.CONSTANT:
        a0 = is_a0_stable(params.theta, params.nu)
    else:
        a0 = a0_stability_oracle(params, tau)
    return {"zero_stable": is_zero_stable(params, tau), "a_stable": is_a_stable(params, tau),
            "a0_stable": a0}


def cmd_region(args):
    nu = _resolve_nu(args.nu, args.theta)
    if args.tau is not None:
        if not args.tau > 0:
            raise UsageError("--tau must be positive")
        params, tau = MethodParams(args.theta, nu, StepMode.VARIABLE), args.tau
    else:
        params, tau = MethodParams(args.theta, nu), 1.0
    if args.mode == "locus":
        curve = locus_curve(params, n=720, tau=tau)
        table = CsvTable(["phi", "re", "im"], [(p, z.real, z.imag) for p, z in zip(curve.phi, curve.z)])
    else:
        grid = region_raster(params, _range(args.re_range), _range(args.im_range), args.nx, args.ny, tau)
        rows = [(x, y, float(grid.stable[i, j]))
                for i, x in enumerate(grid.re) for j, y in enumerate(grid.im)]
        table = CsvTable(["re", "im", "stable"], rows)
    return table, region_verdicts(params, tau)


def cmd_compare(args) -> CsvTable:
    problem = get_problem(args.problem, lam=args.lam, t_end=args.t_end)
    cfg = NewtonConfig(linear_solve=problem.linear is not None)
    configs = []
    for th_text in _list(args.theta_list):
        theta = _float(th_text)
        for nu_text in _list(args.nu_list):
            configs.append(MethodParams(theta, _resolve_nu(nu_text, theta)))
    trajs = [solve_fixed(problem, p, args.dt, cfg) for p in configs]
    times = trajs[0].t
    ref = rk_reference(problem, args.ref_tol, t_eval=times[1:])
    if len(ref.t) != len(times) or np.max(np.abs(ref.t - times)) > 1e-12:
        raise ThetaFilterError("reference grid does not match the solver grid")
    energy = problem.invariant
    header = ["t"] + _state_cols("ref_y", problem.dim) + (["ref_energy"] if energy else [])
    for p in configs:
        tag = f"th{p.theta:g}_nu{_nu_label(p.nu)}"
        header += [f"{tag}_y{i}" for i in range(problem.dim)] + [f"{tag}_dev"]
        if energy:
            header.append(f"{tag}_energy")
    rows = []
    for n, t in enumerate(times):
        y_ref = ref.records[n].y
        row = [t, *y_ref] + ([energy(y_ref)] if energy else [])
        for tr in trajs:
            y = tr.records[n].y
            row += [*y, norm(y - y_ref)]
            if energy:
                row.append(energy(y))
        rows.append(tuple(row))
    return CsvTable(header, rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thetafilter", description="Theta method plus time filter.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="integrate one problem, one row per step")
    sp.add_argument("--problem", choices=PROBLEM_NAMES, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=-10.0)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--nu", default="0", help="real value or 'auto' for the second-order choice")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--adaptive", action="store_true")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--tau-max", type=float, default=None)
    sp.add_argument("--t-end", type=float, default=None)
    sp.add_argument("--out")

    cp = sub.add_parser("converge", help="errors and observed rates over a step list")
    cp.add_argument("--problem", choices=PROBLEM_NAMES, default="linear")
    cp.add_argument("--theta", type=float, required=True)
    cp.add_argument("--lambda", dest="lam", type=float, default=-10.0)
    cp.add_argument("--nu-list", default="0")
    cp.add_argument("--dt-list", default=None)
    cp.add_argument("--metric", choices=METRICS, default="l2")
    cp.add_argument("--out")

    rp = sub.add_parser("region", help="boundary locus or stability raster")
    rp.add_argument("--theta", type=float, required=True)
    rp.add_argument("--nu", default="0")
    rp.add_argument("--mode", choices=("locus", "raster"), default="locus")
    rp.add_argument("--re-range", default="-5:5")
    rp.add_argument("--im-range", default="-5:5")
    rp.add_argument("--nx", type=int, default=201)
    rp.add_argument("--ny", type=int, default=201)
    rp.add_argument("--tau", type=float, default=None)
    rp.add_argument("--out")

    mp = sub.add_parser("compare", help="several (theta, nu) runs against the reference solver")
    mp.add_argument("--problem", choices=PROBLEM_NAMES, required=True)
    mp.add_argument("--lambda", dest="lam", type=float, default=-10.0)
    mp.add_argument("--theta-list", default="0.5,1")
    mp.add_argument("--nu-list", default="0,auto")
    mp.add_argument("--dt", type=float, required=True)
    mp.add_argument("--t-end", type=float, default=None)
    mp.add_argument("--ref-tol", type=float, default=1e-10)
    mp.add_argument("--out")
    return ap


def _join_dash_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _emit(table: CsvTable, out_path) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            table.write(fh)
    else:
        table.write(sys.stdout)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_dash_values(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        if args.command == "region":
            table, verdicts = cmd_region(args)
            _emit(table, args.out)
            stream = sys.stderr if not args.out else sys.stdout
            for key, val in verdicts.items():
                print(f"{key}={int(val)}", file=stream)
        else:
            handler = {"solve": cmd_solve, "converge": cmd_converge, "compare": cmd_compare}[args.command]
            _emit(handler(args), args.out)
    except (UsageError, DegenerateDenominator) as exc:
        print(f"thetafilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergence, StepUnderflow) as exc:
        print(f"thetafilter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"thetafilter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThetaFilterError as exc:
        print(f"thetafilter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())

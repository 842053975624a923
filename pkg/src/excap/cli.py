"""Command-line front end.

Every subcommand writes one JSON report (``--out``, default stdout) and,
where it makes sense, a CSV curve (``--csv``).  Exit status is 0 on
success, 2 for invalid input and 3 when a solver runs out of iterations (the
report is still written, with ``converged`` false).  Errors are printed to
stderr as a JSON object.

CSV columns per command:

    capacity     u, weight
    shape        t, x
    asymptotics  a, normalized_capacity
    search       restart, iter, energy
    mc           u, p_hat, ci95, slope
    riesz        u, weight
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import analysis, asymptotics, multidim, simulate
from .capacity import min_energy
from .exceptions import ExcapError, NonConvergence, ValidationError
from .geometry import load_path, path_to_dict, sheet_staircase, straight_line
from .kernels import BrownianSheet, LongMemory, load_kernel
from .serialize import csv_text, dumps

DEFAULTS = {"n": 401, "tol": 1e-9, "t_grid": 2001, "seed": 0}

log = logging.getLogger("excap")


class _Exit(Exception):
    def __init__(self, code, payload, outputs):
        self.code = code
        self.payload = payload
        self.outputs = outputs


def _coords(text):
    try:
        vals = [float(x) for x in str(text).split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad point {text!r}") from exc
    return np.array(vals)


def _path_from_args(args):
    if args.path is not None:
        return load_path(args.path)
    if args.a is None or args.b is None:
        raise ValidationError("give --path or both --a and --b")
    return straight_line(_coords(args.a), _coords(args.b))


def _interval(args):
    a = float(_coords(args.a)[0]) if args.a is not None else 0.0
    if args.b is None:
        raise ValidationError("--b is required")
    b = float(_coords(args.b)[0])
    if not a < b:
        raise ValidationError("need a < b")
    return a, b


def _config(args, keys):
    # the shared defaults are always echoed, whether or not a command uses them
    out = {k: getattr(args, k, v) for k, v in DEFAULTS.items()}
    out.update({k: getattr(args, k) for k in keys})
    return out


def _solve(kernel, path, n, tol):
    try:
        return min_energy(kernel, path, n=n, tol=tol), True
    except NonConvergence as exc:
        return exc.report, False


def cmd_capacity(args):
    kernel = load_kernel(args.kernel)
    path = _path_from_args(args)
    rep, ok = _solve(kernel, path, args.n, args.tol)
    report = {"command": "capacity", "config": _config(args, ["n", "tol"]), "result": rep.to_dict()}
    csv = csv_text(["u", "weight"], rep.measure.to_rows())
    return report, csv, ok


def cmd_shape(args):
    kernel = load_kernel(args.kernel)
    a, b = _interval(args)
    rep, ok = _solve(kernel, straight_line([a], [b]), args.n, args.tol)
    shape = analysis.limiting_shape(kernel, a, b, rep.measure, t_grid=args.t_grid)
    result = {"capacity": shape.capacity, "level_violation": shape.level_violation,
              "capacity_report": rep.to_dict()}
    report = {"command": "shape", "config": _config(args, ["n", "tol", "t_grid"]), "result": result}
    return report, csv_text(["t", "x"], shape.to_rows()), ok


def cmd_phase(args):
    kernel = load_kernel(args.kernel)
    scale = getattr(kernel, "scale", 1.0)
    result = {}
    if args.which is not None:
        bracket = args.bracket or ([1.0 * scale, 3.0 * scale] if args.which == "a1"
                                   else [3.0 * scale, 5.0 * scale])
        result["which"] = args.which
        result["bracket"] = list(bracket)
        result["critical_length"] = analysis.critical_length(
            kernel, args.which, bracket, tol=args.root_tol, t_grid=args.t_grid)
    if args.length is not None:
        result["regime"] = analysis.classify_regime(
            kernel, args.length, t_grid=args.t_grid, solver_n=args.n).to_dict()
    if not result:
        raise ValidationError("give --which and/or --length")
    config = _config(args, ["n", "t_grid", "root_tol"])
    return {"command": "phase", "config": config, "result": result}, None, True


def cmd_asymptotics(args):
    kernel = load_kernel(args.kernel)
    if isinstance(kernel, LongMemory):
        rep = asymptotics.long_memory_report(kernel, args.lengths, n=args.n, riesz_n=args.riesz_n,
                                             tol=args.tol)
    else:
        rep = asymptotics.short_memory_report(kernel, args.lengths, n=args.n, tol=args.tol)
    config = _config(args, ["n", "tol", "riesz_n", "lengths"])
    report = {"command": "asymptotics", "config": config, "result": rep.to_dict()}
    return report, csv_text(["a", "normalized_capacity"], rep.observed), True


def cmd_sheet(args):
    d = args.dim
    kernel = BrownianSheet(d)
    stair = sheet_staircase(d)
    line = straight_line(stair.start, stair.end)
    out = {}
    ok = True
    for name, path in (("staircase", stair), ("straight", line)):
        cond = multidim.check_endpoint_condition(kernel, path, grid=args.t_grid)
        rep, conv = _solve(kernel, path, args.n, args.tol)
        ok = ok and conv
        out[name] = {"condition_holds": cond.holds, "margin": cond.margin,
                     "capacity": rep.capacity, "energy": rep.energy, "converged": rep.converged,
                     "path": path_to_dict(path)}
    result = {"dim": d, "predicted_capacity": 2.0 / (math.factorial(d) + math.factorial(d - 1)), **out}
    return {"command": "sheet", "config": _config(args, ["n", "tol", "t_grid"]), "result": result}, None, ok


def cmd_search(args):
    kernel = load_kernel(args.kernel)
    a, b = _coords(args.a), _coords(args.b)
    cfg = multidim.PathSearchConfig(control_points=args.control_points,
                                    perturbation_scale=args.perturbation_scale,
                                    restarts=args.restarts, iters=args.iters, seed=args.seed,
                                    n=args.n, tol=args.tol)
    res = multidim.path_search(kernel, a, b, cfg)
    straight, _ = _solve(kernel, straight_line(a, b), args.n, args.tol)
    result = {"path": path_to_dict(res.path), "straight_energy": straight.energy,
              "capacity_report": res.report.to_dict()}
    config = _config(args, ["n", "tol", "seed", "control_points", "perturbation_scale",
                            "restarts", "iters"])
    report = {"command": "search", "config": config, "result": result}
    if args.path_out:
        # written with the report, after everything succeeded
        args._extra_outputs[args.path_out] = dumps(path_to_dict(res.path))
    return report, csv_text(["restart", "iter", "energy"], res.trace), res.report.converged


def cmd_mc(args):
    kernel = load_kernel(args.kernel)
    a, b = _interval(args)
    pts = np.linspace(a, b, args.n)
    est = simulate.exceedance_sweep(kernel, pts, args.levels, args.samples, args.seed)
    two = [{"u": u, "p": simulate.two_point_prob(kernel, b - a, u)} for u in args.levels]
    rep, ok = _solve(kernel, straight_line([a], [b]), args.n, args.tol)
    rows = [(e.u, e.p_hat, e.ci95, simulate.log_slope(e.p_hat, e.u)) for e in est]
    result = {"estimates": [{**e.to_dict(), "slope": s} for e, (_, _, _, s) in zip(est, rows)],
              "two_point": two, "capacity": rep.capacity}
    config = _config(args, ["n", "tol", "seed", "samples", "levels"])
    return {"command": "mc", "config": config, "result": result}, csv_text(
        ["u", "p_hat", "ci95", "slope"], rows), ok


def cmd_riesz(args):
    from .kernels import Riesz

    rep, ok = _solve(Riesz(args.beta), straight_line([0.0], [1.0]), args.n, args.tol)
    result = {"beta": args.beta, "energy": rep.energy, "limit": 1.0 / rep.energy,
              "bounds": list(asymptotics.riesz_bounds(args.beta)),
              "uniform_energy": asymptotics.riesz_uniform_energy(args.beta),
              "capacity_report": rep.to_dict()}
    report = {"command": "riesz", "config": _config(args, ["n", "tol"]), "result": result}
    return report, csv_text(["u", "weight"], rep.measure.to_rows()), ok


def build_parser():
    p = argparse.ArgumentParser(prog="excap", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n=DEFAULTS["n"]):
        sp.add_argument("--out", help="JSON report file (default stdout)")
        sp.add_argument("--csv", help="CSV output file")
        sp.add_argument("--n", type=int, default=n, help="grid size")
        sp.add_argument("--tol", type=float, default=DEFAULTS["tol"])

    sp = sub.add_parser("capacity", help="minimal energy and capacity of a path")
    common(sp)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--path")
    sp.add_argument("--a", help="start point, comma separated")
    sp.add_argument("--b", help="end point, comma separated")
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("shape", help="limiting shape on an interval")
    common(sp)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--a", default="0")
    sp.add_argument("--b", required=True)
    sp.add_argument("--t-grid", dest="t_grid", type=int, default=DEFAULTS["t_grid"])
    sp.set_defaults(func=cmd_shape)

    sp = sub.add_parser("phase", help="critical lengths and regime classification")
    common(sp)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--which", choices=["a1", "a2"])
    sp.add_argument("--bracket", type=float, nargs=2)
    sp.add_argument("--root-tol", dest="root_tol", type=float, default=1e-4)
    sp.add_argument("--length", type=float, help="classify the regime at this interval length")
    sp.add_argument("--t-grid", dest="t_grid", type=int, default=DEFAULTS["t_grid"])
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("asymptotics", help="long-interval capacity growth")
    common(sp)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--lengths", type=float, nargs="+", default=[20.0, 50.0, 100.0])
    sp.add_argument("--riesz-n", dest="riesz_n", type=int, default=801)
    sp.set_defaults(func=cmd_asymptotics)

    sp = sub.add_parser("sheet", help="Brownian sheet staircase vs straight line")
    common(sp)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--t-grid", dest="t_grid", type=int, default=DEFAULTS["t_grid"])
    sp.set_defaults(func=cmd_sheet)

    sp = sub.add_parser("search", help="heuristic path search")
    common(sp, n=201)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    sp.add_argument("--control-points", dest="control_points", type=int, default=8)
    sp.add_argument("--perturbation-scale", dest="perturbation_scale", type=float, default=0.1)
    sp.add_argument("--restarts", type=int, default=4)
    sp.add_argument("--iters", type=int, default=100)
    sp.add_argument("--path-out", dest="path_out", help="write the best path as path JSON")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("mc", help="Monte Carlo exceedance along an interval")
    common(sp, n=51)
    sp.add_argument("--kernel", required=True)
    sp.add_argument("--a", default="0")
    sp.add_argument("--b", required=True)
    sp.add_argument("--levels", type=float, nargs="+", default=[1.5, 2.0, 2.5])
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("riesz", help="minimal Riesz energy of [0, 1]")
    common(sp, n=801)
    sp.add_argument("--beta", type=float, required=True)
    sp.set_defaults(func=cmd_riesz)
    return p


def _emit(path, text, stream):
    if path:
        from .serialize import _atomic_write

        _atomic_write(path, text)
    else:
        stream.write(text)


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    args._extra_outputs = {}
    try:
        if args.n < 2:
            raise ValidationError("--n must be at least 2")
        report, csv, ok = args.func(args)
    except NonConvergence as exc:
        stderr.write(json.dumps({"error": "NonConvergence", "message": str(exc)}) + "\n")
        return 3
    except (ExcapError, OSError) as exc:
        stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    _emit(args.out, dumps(report), stdout)
    if args.csv and csv is not None:
        _emit(args.csv, csv, stdout)
    for path, text in args._extra_outputs.items():
        _emit(path, text, stdout)
    if not ok:
        stderr.write(json.dumps({"error": "NonConvergence",
                                 "message": "solver stopped before reaching tolerance"}) + "\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

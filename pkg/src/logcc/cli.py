"""Command-line front end.

Subcommands map one-to-one onto library operations; structured results go to
JSON, curves to two-column CSV plot data.  Exit codes: 0 success, 1
precondition or file error, 2 solver nonconvergence.  ``LOGCC_THREADS`` caps
the numeric libraries' thread pools for the whole process.
"""

from __future__ import annotations

import os

if os.environ.get("LOGCC_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["LOGCC_THREADS"])

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .grid import (
    ExtendedGridFunction,
    Grid,
    LogConcaveFunction,
    PreconditionError,
)
from .legendre import biconjugate, lft
from .calculus import lp_combination, sup_convolution
from .measures import binned_density, lp_surface_area_measure, surface_area_measure
from .variation import coarea_check, first_variation_report, subdifferential_check
from .minkowski import SolverConfig, ma_residual, ma_residual_field, solve_lp_minkowski
from .io import (
    FileFormatError,
    read_grid_function,
    read_grid_function_csv,
    read_measure,
    write_grid_function,
    write_measure,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2


def _read_fun(path: str) -> ExtendedGridFunction:
    if path.endswith(".csv"):
        return read_grid_function_csv(path)
    return read_grid_function(path)


def _dual_grid(args, like: Grid) -> Grid | None:
    if args.dual_bounds is None and args.dual_points is None:
        return None
    bounds = args.dual_bounds if args.dual_bounds is not None else [
        b for lo_hi in like.mirrored().bounds for b in lo_hi]
    pts = args.dual_points if args.dual_points is not None else list(like.shape)
    pairs = tuple((bounds[2 * k], bounds[2 * k + 1]) for k in range(len(bounds) // 2))
    if len(pts) == 1 and len(pairs) > 1:
        pts = pts * len(pairs)
    return Grid(pairs, tuple(pts))


def _grid_from_flags(bounds, points) -> Grid:
    pairs = tuple((bounds[2 * k], bounds[2 * k + 1]) for k in range(len(bounds) // 2))
    if len(points) == 1 and len(pairs) > 1:
        points = points * len(pairs)
    return Grid(pairs, tuple(points))


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=1))


def _write_plot(path: str, columns, header) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _cmd_lft(args) -> int:
    fun = _read_fun(args.infile)
    res = lft(fun, _dual_grid(args, fun.grid))
    write_grid_function(res.function, args.out)
    sidecar = args.flags_out or (args.out + ".flags.json")
    _write_json(sidecar, {
        "boundary": res.boundary.astype(int).ravel(order="C").tolist(),
        "argmax": res.argmax.ravel(order="C").tolist(),
    })
    return EXIT_OK


def _cmd_biconj(args) -> int:
    fun = _read_fun(args.infile)
    write_grid_function(biconjugate(fun, _dual_grid(args, fun.grid)), args.out)
    return EXIT_OK


def _cmd_supconv(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    g = LogConcaveFunction(_read_fun(args.g))
    out = sup_convolution(f, g, _dual_grid(args, f.grid))
    write_grid_function(out.potential, args.out)
    return EXIT_OK


def _cmd_lp_comb(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    g = LogConcaveFunction(_read_fun(args.g))
    out = lp_combination(f, g, args.t, args.p, _dual_grid(args, f.grid))
    write_grid_function(out.potential, args.out)
    return EXIT_OK


def _cmd_surface_measure(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    if args.p is not None and args.p != 1.0:
        m = lp_surface_area_measure(f, args.p)
    else:
        m = surface_area_measure(f)
    write_measure(m, args.out)
    return EXIT_OK


def _cmd_first_variation(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    g = LogConcaveFunction(_read_fun(args.g))
    rep = first_variation_report(f, g)
    _write_json(args.out, {
        "t_schedule": rep.t_schedule.tolist(),
        "difference_quotients": rep.difference_quotients.tolist(),
        "extrapolated_delta": rep.extrapolated_delta,
        "predicted": rep.predicted,
        "relative_gap": rep.relative_gap,
        "log_quotients_nondecreasing": rep.log_quotients_nondecreasing,
    })
    if args.plot_out:
        _write_plot(args.plot_out, [rep.t_schedule, rep.difference_quotients],
                    ["t", "quotient"])
    return EXIT_OK


def _cmd_coarea(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    rep = coarea_check(f, levels=args.levels)
    _write_json(args.out, {
        "lhs": rep.lhs, "rhs_gradient": rep.rhs_gradient,
        "rhs_boundary": rep.rhs_boundary, "levels": rep.levels,
    })
    return EXIT_OK


def _cmd_subdiff(args) -> int:
    f = LogConcaveFunction(_read_fun(args.f))
    g = LogConcaveFunction(_read_fun(args.g))
    rep = subdifferential_check(f, g)
    _write_json(args.out, {"lhs": rep.lhs, "rhs": rep.rhs, "holds": rep.holds})
    return EXIT_OK


def _cmd_minkowski(args) -> int:
    measure = read_measure(args.measure)
    grid = _grid_from_flags(args.grid_bounds, args.grid_points)
    a = None if args.a in (None, "AUTO", "auto") else float(args.a)
    config = SolverConfig(p=args.p, grid=grid, a=a, max_iters=args.max_iters,
                          grad_tol=args.grad_tol)
    result = solve_lp_minkowski(measure, config)
    psi_path = args.out + ".psi.json"
    f_path = args.out + ".f.json"
    write_grid_function(result.psi, psi_path)
    write_grid_function(result.f.potential, f_path)
    _write_json(args.out, {
        "status": result.status,
        "c": result.c,
        "measure_mismatch": result.measure_mismatch,
        "constraint_level": result.constraint_level,
        "iterations": result.iterations,
        "objective_trace": result.objective_trace.tolist(),
        "residual_trace": result.residual_trace.tolist(),
        "feasibility_trace": result.feasibility_trace.tolist(),
        "psi_file": psi_path,
        "f_potential_file": f_path,
    })
    if args.trace_out:
        _write_plot(args.trace_out,
                    [np.arange(len(result.objective_trace)), result.objective_trace],
                    ["iteration", "objective"])
    return EXIT_OK if result.status == "converged" else EXIT_NONCONVERGENCE


def _cmd_ma_residual(args) -> int:
    measure = read_measure(args.measure)
    if args.f:
        f = LogConcaveFunction(_read_fun(args.f))
        psi = lft(f.potential).function if args.p < 1 else None
        bins = Grid(tuple((lo, hi) for lo, hi in f.grid.mirrored().bounds),
                    tuple(max(3, (n + 1) // 2) for n in f.grid.shape))
        rep = ma_residual_field(f, binned_density(measure, bins), args.p,
                                c=args.c, support_fn=psi)
    else:
        result_doc = json.loads(Path(args.result).read_text())
        f = LogConcaveFunction(read_grid_function(result_doc["f_potential_file"]))
        psi = read_grid_function(result_doc["psi_file"])
        bins = Grid(psi.grid.bounds, tuple(max(3, (n + 1) // 2) for n in psi.grid.shape))
        rep = ma_residual_field(f, binned_density(measure, bins), args.p,
                                c=result_doc["c"], support_fn=psi)
    _write_json(args.out, {
        "l1_relative": rep.l1_relative,
        "nodes_used": rep.nodes_used,
        "nodes_excluded": rep.nodes_excluded,
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="logcc", description=__doc__)
    top.add_argument("--config", help="JSON file whose keys preset any flag")
    sub = top.add_subparsers(dest="command", required=True)

    def dual_flags(p):
        p.add_argument("--dual-bounds", type=float, nargs="+", default=None,
                       metavar="LO HI", help="dual window per axis")
        p.add_argument("--dual-points", type=int, nargs="+", default=None)

    p = sub.add_parser("lft", help="Legendre-Fenchel transform")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--flags-out", default=None)
    dual_flags(p)
    p.set_defaults(run=_cmd_lft)

    p = sub.add_parser("biconj", help="biconjugate (convex envelope)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    dual_flags(p)
    p.set_defaults(run=_cmd_biconj)

    p = sub.add_parser("supconv", help="sup-convolution of two log-concave functions")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--out", required=True)
    dual_flags(p)
    p.set_defaults(run=_cmd_supconv)

    p = sub.add_parser("lp-comb", help="Lp combination")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--out", required=True)
    dual_flags(p)
    p.set_defaults(run=_cmd_lp_comb)

    p = sub.add_parser("surface-measure", help="(Lp) surface-area measure")
    p.add_argument("--f", required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_surface_measure)

    p = sub.add_parser("first-variation", help="first-variation report")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot-out", default=None)
    p.set_defaults(run=_cmd_first_variation)

    p = sub.add_parser("coarea", help="co-area decomposition report")
    p.add_argument("--f", required=True)
    p.add_argument("--levels", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_coarea)

    p = sub.add_parser("subdiff", help="subdifferential inequality report")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_subdiff)

    p = sub.add_parser("minkowski", help="solve the even Lp Minkowski problem")
    p.add_argument("--measure", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--a", default=None, help="constraint level or AUTO")
    p.add_argument("--grid-bounds", type=float, nargs="+", default=[-8.0, 8.0])
    p.add_argument("--grid-points", type=int, nargs="+", default=[1001])
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--grad-tol", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", default=None)
    p.set_defaults(run=_cmd_minkowski)

    p = sub.add_parser("ma-residual", help="Monge-Ampere residual diagnostics")
    p.add_argument("--measure", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--result", help="JSON result from the minkowski subcommand")
    p.add_argument("--f", help="potential file for a plug-in pair instead of --result")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_ma_residual)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args, remaining = parser.parse_known_args(argv)
    if args.config:
        presets = json.loads(Path(args.config).read_text())
        flags = []
        for key, val in presets.items():
            flags.append(f"--{key.replace('_', '-')}")
            if not isinstance(val, bool):
                flags.extend(str(v) for v in (val if isinstance(val, list) else [val]))
        argv_full = (argv if argv is not None else sys.argv[1:])
        # config values come first so explicit flags win
        idx = argv_full.index(args.command)
        merged = argv_full[:idx + 1] + flags + argv_full[idx + 1:]
        args = parser.parse_args([a for a in merged if a != "--config"
                                  and a != str(args.config)])
    try:
        return args.run(args)
    except (PreconditionError, FileFormatError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())

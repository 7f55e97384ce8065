"""Command-line interface.

Exit codes: 0 all checks within thresholds, 1 some check outside its
threshold, 2 invalid geometry, modes or arguments, 3 eigensolver
non-convergence, 4 output failure.
"""

import argparse
import logging
import sys

import numpy as np

from . import analytic, report
from .errors import ConvergenceFailure, GeometryError, InvalidMode, RefinementTooDeep, RellichTriError
from .fem import DEFAULT_SEED
from .geometry import triangle_from_vertices
from .mesh import write_off
from .trace import FEM_DIRECT, FEM_VARIATIONAL

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4

FAMILIES = {
    "square": analytic.SQUARE,
    "right-isosceles": analytic.RIGHT_ISOSCELES,
    "equilateral": analytic.EQUILATERAL,
}
TRACES = {"variational": FEM_VARIATIONAL, "direct": FEM_DIRECT}


class UsageError(RellichTriError):
    pass


def parse_vertices(text):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse vertices {text!r}") from None
    if len(vals) != 6:
        raise UsageError("--vertices needs six comma-separated numbers x0,y0,x1,y1,x2,y2")
    return np.array(vals).reshape(3, 2)


def parse_levels(text):
    """``"3..6"`` or ``"3,4,5,6"``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse levels {text!r}") from None


def _common(p):
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--pairs", type=int, default=25, help="number of random (m, n) draws")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rellich-tri",
        description="Neumann mass identities for Dirichlet eigenfunctions on triangles.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-triangle", help="finite element verification of one triangle")
    p.add_argument("--vertices", required=True, help="x0,y0,x1,y1,x2,y2")
    p.add_argument("--num-eigs", type=int, default=6)
    p.add_argument("--refine", type=int, default=6)
    p.add_argument("--degree", type=int, choices=[1, 2], default=2)
    p.add_argument("--trace", choices=sorted(TRACES), default="variational")
    p.add_argument("--tol", type=float, default=report.FEM_THRESHOLDS.identity,
                   help="relative side-mass threshold")
    p.add_argument("--pairing-tol", type=float, default=report.FEM_THRESHOLDS.pairing)
    p.add_argument("--derivative-tol", type=float, default=report.FEM_THRESHOLDS.derivative)
    p.add_argument("--solver-tol", type=float, default=1e-9)
    p.add_argument("--dump-mesh", default=None, help="write the mesh as OFF text")
    _common(p)

    p = sub.add_parser("exact", help="closed-form eigenfunction families")
    p.add_argument("--family", choices=sorted(FAMILIES), required=True)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--modes", type=int, default=None, help="use the N lowest modes")
    p.add_argument("--side", type=float, default=1.0, help="equilateral side length")
    p.add_argument("--quad-order", type=int, default=None)
    p.add_argument("--scaling-demo", action="store_true")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--tol", type=float, default=report.ANALYTIC_THRESHOLDS.identity)
    p.add_argument("--pairing-tol", type=float, default=report.ANALYTIC_THRESHOLDS.pairing)
    p.add_argument("--derivative-tol", type=float, default=report.ANALYTIC_THRESHOLDS.derivative)
    _common(p)

    p = sub.add_parser("convergence", help="identity residuals across refinement levels")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--vertices")
    g.add_argument("--family", choices=["right-isosceles", "equilateral"])
    p.add_argument("--levels", required=True, help="e.g. 3..6 or 3,4,5,6")
    p.add_argument("--num-eigs", type=int, default=6)
    p.add_argument("--degree", type=int, choices=[1, 2], default=2)
    p.add_argument("--trace", choices=sorted(TRACES), default="variational")
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--solver-tol", type=float, default=1e-9)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w") as fh:
        fh.write(text)


def cmd_verify_triangle(args):
    t = triangle_from_vertices(*parse_vertices(args.vertices))
    thr = report.Thresholds(args.tol, args.pairing_tol, args.derivative_tol)
    mesh = None
    if args.dump_mesh:
        from .mesh import refine_mesh

        mesh = refine_mesh(t, args.refine, args.degree)
        write_off(mesh, args.dump_mesh)
    rep = report.fem_report(
        t, num_eigs=args.num_eigs, level=args.refine, degree=args.degree,
        trace=TRACES[args.trace], pairs=args.pairs, seed=args.seed, tol=args.solver_tol,
        thresholds=thr, mesh=mesh,
    )
    if args.format == "json":
        _emit(report.to_json(rep), args.out)
    else:
        _emit(report.to_csv(report.report_rows(rep), report.CSV_COLUMNS), args.out)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def _exact_modes(args, family):
    if args.j is not None or args.k is not None:
        if args.j is None or args.k is None:
            raise UsageError("--j and --k must be given together")
        if family == analytic.EQUILATERAL:
            return [(args.j, args.k, analytic.SYMMETRIC)]
        return [(args.j, args.k)]
    return analytic.lowest_modes(family, args.modes or 1, side=args.side)


def cmd_exact(args):
    family = FAMILIES[args.family]
    if family == analytic.SQUARE:
        modes = _exact_modes(args, family)
        rep = report.square_report(
            modes, scaling_kmax=args.kmax if args.scaling_demo else None,
            quad_order=args.quad_order,
        )
    else:
        if args.scaling_demo:
            raise UsageError("--scaling-demo applies to the square family only")
        thr = report.Thresholds(args.tol, args.pairing_tol, args.derivative_tol)
        rep = report.analytic_report(
            family, _exact_modes(args, family), pairs=args.pairs, seed=args.seed,
            side=args.side, quad_order=args.quad_order, thresholds=thr,
        )
    if args.format == "json":
        _emit(report.to_json(rep), args.out)
    else:
        _emit(report.to_csv(report.report_rows(rep), report.CSV_COLUMNS), args.out)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_convergence(args):
    levels = parse_levels(args.levels)
    if len(levels) < 3:
        raise UsageError("--levels needs at least three levels")
    exact = None
    if args.family == "right-isosceles":
        t = analytic.right_isosceles_triangle()
        modes = analytic.lowest_modes(analytic.RIGHT_ISOSCELES, args.num_eigs)
        exact = [float(j * j + k * k) for j, k in modes]
    elif args.family == "equilateral":
        t = analytic.equilateral_triangle(args.side)
        modes = analytic.lowest_modes(analytic.EQUILATERAL, args.num_eigs, side=args.side)
        exact = [analytic.equilateral_eigenvalue(m, n, args.side) for m, n, _ in modes]
    else:
        t = triangle_from_vertices(*parse_vertices(args.vertices))
    rows = report.convergence_rows(
        t, levels, num_eigs=args.num_eigs, degree=args.degree, trace=TRACES[args.trace],
        seed=args.seed, tol=args.solver_tol, exact_eigenvalues=exact,
    )
    if args.format == "csv":
        _emit(report.to_csv(rows, report.CONVERGENCE_COLUMNS), args.out)
    else:
        _emit(report.to_json({"triangle": report.triangle_block(t), "rows": rows}), args.out)
    return EXIT_OK


COMMANDS = {
    "verify-triangle": cmd_verify_triangle,
    "exact": cmd_exact,
    "convergence": cmd_convergence,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (GeometryError, InvalidMode, RefinementTooDeep, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceFailure as exc:
        print(f"error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

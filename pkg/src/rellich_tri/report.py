"""Verification pipelines and report serialisation.

Report dictionaries follow a fixed layout::

    {"triangle": {"vertices", "sides": {"a", "b", "c"}, "area", "frame_case"},
     "method": {"solver", "degree", "refine", "trace"},
     "eigenpairs": [{"index", "lambda", "h",
                     "sides": [{"id", "length", "mass", "predicted", "rel_error", ...}],
                     "rellich": [{"m", "n", "value", "deviation_from_2"}],
                     "derivative_residuals": {"m", "n"}}]}
"""

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytic
from .fem import DEFAULT_SEED, assemble, solve_lowest_eigenpairs
from .geometry import canonicalize
from .mesh import refine_mesh
from .rellich import (
    fem_interior_commutator_value,
    identity_report,
    master_derivative_checks,
    rellich_pairing,
    sample_parameters,
)
from .trace import FEM_VARIATIONAL, analytic_masses, fem_masses

THREADS_ENV = "RELLICH_TRI_THREADS"

CSV_COLUMNS = [
    "level", "index", "side", "lambda", "h", "length", "mass", "predicted", "abs_error", "rel_error",
]
CONVERGENCE_COLUMNS = CSV_COLUMNS + [
    "lambda_ref", "lambda_error", "lambda_order", "residual_order",
]


@dataclass
class Thresholds:
    """Pass/fail limits surfaced in reports.

    ``identity`` bounds the relative side-mass error, ``pairing`` the
    relative deviation of the pairing from 2, ``derivative`` the derivative
    residuals relative to ``2 / ell``.
    """

    identity: float
    pairing: float
    derivative: float


ANALYTIC_THRESHOLDS = Thresholds(identity=1e-9, pairing=1e-9, derivative=1e-9)
FEM_THRESHOLDS = Thresholds(identity=0.02, pairing=0.02, derivative=0.02)


def worker_count():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items):
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def triangle_block(t):
    a, b, c = t.side_lengths
    return {
        "vertices": t.vertices.tolist(),
        "sides": {"a": a, "b": b, "c": c},
        "area": t.area,
        "frame_case": canonicalize(t).case.split("_")[0],
    }


def eigenpair_entry(index, lam, t, masses, params, extra=None):
    """Identity, pairing and derivative checks for one eigenpair."""
    frame = canonicalize(t)
    rep = identity_report(t, masses)
    pairings = [rellich_pairing(frame, masses, m, n) for m, n in params]
    deriv = master_derivative_checks(frame, masses)
    entry = {
        "index": int(index),
        "lambda": float(lam),
        "h": float(lam) ** -0.5,
    }
    entry.update(extra or {})
    entry["sides"] = [
        {
            "id": s.id,
            "length": s.length,
            "mass": s.mass,
            "predicted": s.predicted,
            "abs_error": s.abs_error,
            "rel_error": s.rel_error,
        }
        for s in rep.sides
    ]
    entry["total"] = {"mass": rep.total_mass, "predicted": rep.total_predicted}
    entry["rellich"] = [
        {"m": p.m, "n": p.n, "value": p.value, "deviation_from_2": p.deviation} for p in pairings
    ]
    entry["affine_coeffs"] = list(pairings[0].affine_coeffs) if pairings else None
    entry["derivative_residuals"] = {"m": deriv.m, "n": deriv.n}
    return entry


def evaluate_entry(entry, ell, thr):
    """Whether an eigenpair entry meets ``thr``."""
    ok = all(s["rel_error"] <= thr.identity for s in entry["sides"])
    ok &= all(abs(r["deviation_from_2"]) / 2.0 <= thr.pairing for r in entry["rellich"])
    scale = 2.0 / ell
    ok &= entry["derivative_residuals"]["m"] <= thr.derivative * scale
    ok &= entry["derivative_residuals"]["n"] <= thr.derivative * scale
    return bool(ok)


def _finish(report, t, thr):
    ell = canonicalize(t).ell
    for e in report["eigenpairs"]:
        e["passed"] = evaluate_entry(e, ell, thr)
    report["thresholds"] = vars(thr).copy()
    report["passed"] = all(e["passed"] for e in report["eigenpairs"])
    return report


def fem_report(t, num_eigs=6, level=6, degree=2, trace=FEM_VARIATIONAL, pairs=25,
               seed=DEFAULT_SEED, tol=1e-9, thresholds=FEM_THRESHOLDS, mesh=None):
    """End-to-end finite element verification of one triangle."""
    mesh = mesh if mesh is not None else refine_mesh(t, level, degree)
    K, M = assemble(mesh)
    eig = solve_lowest_eigenpairs(K, M, min(num_eigs, K.shape[0]), tol=tol, seed=seed)
    params = sample_parameters(pairs, seed)

    def one(e):
        masses = fem_masses(mesh, e, trace)
        extra = {
            "eigen_residual": e.residual,
            "interior_commutator": fem_interior_commutator_value(e, M),
        }
        return eigenpair_entry(e.index, e.lam, t, masses, params, extra)

    report = {
        "triangle": triangle_block(t),
        "method": {"solver": "fem", "degree": degree, "refine": level, "trace": trace},
        "eigenpairs": _map(one, eig),
    }
    return _finish(report, t, thresholds)


def analytic_report(family, modes, pairs=25, seed=DEFAULT_SEED, side=1.0, quad_order=None,
                    thresholds=ANALYTIC_THRESHOLDS):
    """Verification report for closed-form triangle eigenfunctions."""
    funcs = [analytic.make_eigenfunction(family, m, side=side) for m in modes]
    t = funcs[0].domain
    params = sample_parameters(pairs, seed)

    def one(item):
        i, f = item
        masses = analytic_masses(f, t, quad_order)
        return eigenpair_entry(i, f.lam, t, masses, params, {"mode": list(f.mode)})

    report = {
        "triangle": triangle_block(t),
        "method": {"solver": "analytic", "degree": None, "refine": None, "trace": "analytic",
                   "family": family},
        "eigenpairs": _map(one, list(enumerate(funcs))),
    }
    return _finish(report, t, thresholds)


def square_report(modes, scaling_kmax=None, quad_order=None, tol=1e-12):
    """Closed-form versus quadrature Neumann masses on ``[0, 2pi]**2``.

    ``equidistribution_prediction`` is ``|S| / Area``, the value the
    triangle identity would give; it generally disagrees with the mass.
    """
    sq = analytic.Square()
    entries = []
    for i, (j, k) in enumerate(modes):
        f = analytic.square_eigenfunction(j, k)
        masses = analytic_masses(f, sq, quad_order)
        sides = []
        for s in sq.sides():
            exact = analytic.square_neumann_mass(j, k, s)
            got = masses[s].value
            pred = sq.length(s) / sq.area
            sides.append({
                "id": s,
                "length": sq.length(s),
                "mass": got,
                "closed_form": exact,
                "closed_form_rel_error": abs(got - exact) / exact,
                "equidistribution_prediction": pred,
                "rel_error": abs(got - pred) / pred,
            })
        entries.append({
            "index": i,
            "mode": [j, k],
            "lambda": f.lam,
            "h": f.h,
            "sides": sides,
            "passed": all(s["closed_form_rel_error"] <= tol for s in sides),
        })
    report = {
        "domain": {"name": "square", "vertices": sq.vertices.tolist(), "area": sq.area},
        "method": {"solver": "analytic", "degree": None, "refine": None, "trace": "analytic",
                   "family": analytic.SQUARE},
        "eigenpairs": entries,
        "thresholds": {"closed_form": tol},
    }
    if scaling_kmax is not None:
        report["scaling"] = [
            {"j": j, "k": k, "h": h, "mass": mass, "mass_over_h2": ratio}
            for j, k, h, mass, ratio in analytic.square_mass_scaling_demo(scaling_kmax)
        ]
    report["passed"] = all(e["passed"] for e in entries)
    return report


def convergence_rows(t, levels, num_eigs=6, degree=2, trace=FEM_VARIATIONAL, seed=DEFAULT_SEED,
                     tol=1e-9, exact_eigenvalues=None):
    """Per-level eigenvalue errors and identity residuals.

    Eigenvalue errors are measured against ``exact_eigenvalues`` when given,
    otherwise against the finest level. Observed orders are ``log2`` ratios
    of successive errors.
    """
    levels = sorted(levels)

    def solve(level):
        mesh = refine_mesh(t, level, degree)
        K, M = assemble(mesh)
        eig = solve_lowest_eigenpairs(K, M, min(num_eigs, K.shape[0]), tol=tol, seed=seed)
        return level, eig, [fem_masses(mesh, e, trace) for e in eig]

    results = _map(solve, levels)
    count = min(len(r[1]) for r in results)
    if exact_eigenvalues is not None:
        ref = list(exact_eigenvalues)[:count]
    else:
        ref = [e.lam for e in results[-1][1][:count]]

    rows, prev_lam, prev_res = [], {}, {}
    for level, eig, masses in results:
        for e, ms in zip(eig[:count], masses[:count]):
            rep = identity_report(t, ms)
            lam_err = abs(e.lam - ref[e.index])
            lam_order = _order(prev_lam.get(e.index), lam_err)
            prev_lam[e.index] = lam_err
            for s in rep.sides:
                key = (e.index, s.id)
                rows.append({
                    "level": level, "index": e.index, "side": s.id, "lambda": e.lam, "h": e.h,
                    "length": s.length, "mass": s.mass, "predicted": s.predicted,
                    "abs_error": s.abs_error, "rel_error": s.rel_error,
                    "lambda_ref": ref[e.index], "lambda_error": lam_err,
                    "lambda_order": lam_order,
                    "residual_order": _order(prev_res.get(key), s.rel_error),
                })
                prev_res[key] = s.rel_error
    return rows


def _order(prev, cur):
    if prev is None or not prev > 0 or not cur > 0:
        return None
    return float(np.log2(prev / cur))


def report_rows(report):
    """Flatten a report into CSV rows, one per (level, eigen index, side)."""
    level = report["method"].get("refine")
    rows = []
    for e in report["eigenpairs"]:
        for s in e["sides"]:
            pred = s.get("predicted", s.get("equidistribution_prediction"))
            rows.append({
                "level": level, "index": e["index"], "side": s["id"], "lambda": e["lambda"],
                "h": e["h"], "length": s["length"], "mass": s["mass"], "predicted": pred,
                "abs_error": abs(s["mass"] - pred), "rel_error": s["rel_error"],
            })
    return rows


def to_json(report):
    return json.dumps(report, indent=2, allow_nan=True) + "\n"


def to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: ("" if row.get(c) is None else _fmt(row.get(c))) for c in columns})
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x

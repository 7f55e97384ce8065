"""Semiclassical Neumann data ``h d_nu u`` on the sides of a domain.

Three routes are provided:

* ``analytic``: exact gradients of a closed-form eigenfunction at
  Gauss-Legendre nodes of the whole side;
* ``fem_direct``: the gradient of the finite element function on the
  boundary-adjacent elements;
* ``fem_variational``: the flux ``g`` in the boundary trace space solving
  ``int_dT g v = int_T grad u . grad v - lam int_T u v`` for every
  boundary-supported test function ``v``.

The outward normal is used throughout.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import GeometryMismatch, SingularBoundaryMass
from .fem import assemble_full, element_maps, shape_functions
from .quadrature import _unit_interval_rule, segment_rule

ANALYTIC = "analytic"
FEM_DIRECT = "fem_direct"
FEM_VARIATIONAL = "fem_variational"

EDGE_ORDER = 4

_REF_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class NeumannTrace:
    """Samples of ``h d_nu u`` with boundary quadrature on one side.

    ``nodes`` are arclength positions from the side's first endpoint
    (counterclockwise traversal); ``points`` are the same nodes in the
    plane.
    """

    side_id: str
    nodes: np.ndarray
    weights: np.ndarray
    flux: np.ndarray
    method: str
    points: np.ndarray = None
    length: float = float("nan")


@dataclass(frozen=True)
class SideMass:
    side_id: str
    value: float
    method: str
    length: float = float("nan")


def side_mass(tr):
    """Quadrature of ``|h d_nu u|**2`` along the side."""
    value = float(np.sum(tr.weights * np.abs(tr.flux) ** 2))
    return SideMass(tr.side_id, value, tr.method, tr.length)


def _same_domain(f, geometry, tol=1e-12):
    a = np.asarray(f.vertices, dtype=float)
    b = np.asarray(geometry.vertices, dtype=float)
    if a.shape != b.shape:
        return False
    scale = max(1.0, float(np.abs(a).max()))
    for shift in range(len(b)):
        if np.allclose(a, np.roll(b, shift, axis=0), rtol=0.0, atol=tol * scale):
            return True
    return False


def default_quad_order(f, length):
    kmax = float(np.abs(f.wavevectors).max())
    return max(20, int(np.ceil(kmax * length)) + 20)


def analytic_trace(f, geometry, side, quad_order=None):
    """Exact Neumann data of a closed-form eigenfunction on one side.

    ``quad_order`` Gauss-Legendre nodes are placed on the whole side; the
    default grows with the largest wavenumber of ``f`` so the mass is
    resolved to machine precision.
    """
    if not _same_domain(f, geometry):
        raise GeometryMismatch(f"eigenfunction of family {f.family} lives on a different domain")
    p, q = geometry.endpoints(side)
    length = geometry.length(side)
    if quad_order is None:
        quad_order = default_quad_order(f, length)
    if quad_order < 2:
        raise ValueError("quad_order must be at least 2")
    pts, s, w = segment_rule(p, q, quad_order)
    nu = geometry.outward_normal(side)
    flux = f.h * (f.gradient(pts) @ nu)
    return NeumannTrace(side, s, w, flux, ANALYTIC, pts, length)


def analytic_masses(f, geometry, quad_order=None):
    return {s: side_mass(analytic_trace(f, geometry, s, quad_order)) for s in geometry.sides()}


def _edge_reference_points(local, t):
    a = _REF_CORNERS[local]
    b = _REF_CORNERS[(local + 1) % 3]
    return a[None, :] + t[:, None] * (b - a)[None, :]


def _side_edges(mesh, side):
    idx = mesh.edges_on(side)
    if len(idx) == 0:
        raise ValueError(f"mesh has no boundary edges on side {side!r}")
    return idx


def _assemble_trace(mesh, side, idx, t, w, values, method):
    p = mesh.nodes[mesh.boundary_edges[idx, 0]]
    q = mesh.nodes[mesh.boundary_edges[idx, 1]]
    lengths = np.hypot(*(q - p).T)
    start, _ = mesh.triangle.endpoints(side)
    pts = p[:, None, :] + t[None, :, None] * (q - p)[:, None, :]
    s = np.hypot(*(pts - start).transpose(2, 0, 1))
    weights = lengths[:, None] * w[None, :]
    return NeumannTrace(
        side,
        s.ravel(),
        weights.ravel(),
        values.ravel(),
        method,
        pts.reshape(-1, 2),
        mesh.triangle.length(side),
    )


def fem_trace_direct(mesh, e, side, order=EDGE_ORDER):
    """Neumann data from the element gradient on boundary-adjacent elements."""
    idx = _side_edges(mesh, side)
    t, w = _unit_interval_rule(order)
    u = mesh.expand(e.coefficients)
    _, _, inv_t, _ = element_maps(mesh)
    nu = mesh.triangle.outward_normal(side)
    vals = np.empty((len(idx), order))
    for loc in range(3):
        sel = mesh.boundary_local[idx] == loc
        if not np.any(sel):
            continue
        ref = _edge_reference_points(loc, t)
        _, dphi = shape_functions(mesh.degree, ref)
        els = mesh.boundary_element[idx[sel]]
        coef = u[mesh.elements[els]]
        ref_grad = np.einsum("eb,qbi->eqi", coef, dphi)
        grad = np.einsum("eij,eqj->eqi", inv_t[els], ref_grad)
        vals[sel] = e.h * (grad @ nu)
    return _assemble_trace(mesh, side, idx, t, w, vals, FEM_DIRECT)


def _edge_basis(degree, t):
    if degree == 1:
        return np.column_stack([1.0 - t, t])
    return np.column_stack([(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)])


def _edge_dofs(mesh):
    cols = [mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1]]
    if mesh.degree == 2:
        cols.append(mesh.boundary_mid)
    return np.column_stack(cols)


def boundary_mass_matrix(mesh):
    """Mass matrix of the continuous trace space, indexed by ``mesh.boundary_nodes``."""
    bnodes = mesh.boundary_nodes
    pos = -np.ones(mesh.num_nodes, dtype=np.int64)
    pos[bnodes] = np.arange(len(bnodes))
    dofs = pos[_edge_dofs(mesh)]
    t, w = _unit_interval_rule(mesh.degree + 2)
    phi = _edge_basis(mesh.degree, t)
    local = np.einsum("q,qa,qb->ab", w, phi, phi)
    p = mesh.nodes[mesh.boundary_edges[:, 0]]
    q = mesh.nodes[mesh.boundary_edges[:, 1]]
    lengths = np.hypot(*(q - p).T)
    mb = np.zeros((len(bnodes), len(bnodes)))
    for e, ln in enumerate(lengths):
        d = dofs[e]
        mb[np.ix_(d, d)] += ln * local
    return mb


def variational_flux(mesh, e):
    """Recovered ``d_nu u`` at the boundary nodes (not scaled by ``h``).

    Returns ``(boundary_nodes, g, rhs)`` where ``rhs`` is the residual
    ``K u - lam M u`` on the boundary rows.
    """
    K, M = assemble_full(mesh)
    u = mesh.expand(e.coefficients)
    bnodes = mesh.boundary_nodes
    rhs = (K @ u - e.lam * (M @ u))[bnodes]
    mb = boundary_mass_matrix(mesh)
    try:
        chol = sla.cho_factor(mb)
    except np.linalg.LinAlgError as exc:
        raise SingularBoundaryMass("boundary mass matrix is not positive definite") from exc
    diag = np.diag(chol[0]) ** 2
    if diag.min() <= 1e-14 * diag.max():
        raise SingularBoundaryMass("boundary mass matrix is numerically singular")
    g = sla.cho_solve(chol, rhs)
    return bnodes, g, rhs


def fem_trace_variational(mesh, e, side, order=EDGE_ORDER, flux=None):
    """Neumann data from variational flux recovery, sampled at per-edge Gauss nodes.

    ``flux`` may carry a precomputed :func:`variational_flux` result so the
    boundary system is solved once for all three sides.
    """
    idx = _side_edges(mesh, side)
    bnodes, g, _ = flux if flux is not None else variational_flux(mesh, e)
    nodal = np.zeros(mesh.num_nodes)
    nodal[bnodes] = g
    t, w = _unit_interval_rule(order)
    phi = _edge_basis(mesh.degree, t)
    vals = nodal[_edge_dofs(mesh)[idx]] @ phi.T
    return _assemble_trace(mesh, side, idx, t, w, e.h * vals, FEM_VARIATIONAL)


def fem_masses(mesh, e, method=FEM_VARIATIONAL):
    """Side masses of a finite element eigenpair on sides A, B, C."""
    out = {}
    if method == FEM_VARIATIONAL:
        flux = variational_flux(mesh, e)
        for s in ("A", "B", "C"):
            out[s] = side_mass(fem_trace_variational(mesh, e, s, flux=flux))
    elif method == FEM_DIRECT:
        for s in ("A", "B", "C"):
            out[s] = side_mass(fem_trace_direct(mesh, e, s))
    else:
        raise ValueError(f"unknown trace method {method!r}")
    return out

import itertools
import os

import numpy as np
import pytest
import sympy as sp

from rellich_tri import analytic
from rellich_tri.errors import RefinementTooDeep, ZeroVector
from rellich_tri.fem import (
    EigenPair,
    assemble,
    assemble_full,
    local_matrices,
    normalize,
    solve_lowest_eigenpairs,
    solve_mesh,
)
from rellich_tri.geometry import triangle_from_vertices
from rellich_tri.mesh import refine_mesh, write_off

TRI_345 = triangle_from_vertices((0, 0), (4, 0), (0, 3))
RI = analytic.right_isosceles_triangle()


def _sympy_element(vertices, degree):
    """Element matrices by exact symbolic integration on the physical triangle."""
    x, y = sp.symbols("x y")
    (x0, y0), (x1, y1), (x2, y2) = [[sp.Rational(str(c)) for c in p] for p in vertices]
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    l1 = ((x - x0) * (y2 - y0) - (x2 - x0) * (y - y0)) / det
    l2 = ((x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)) / det
    l0 = 1 - l1 - l2
    lam = [l0, l1, l2]
    if degree == 1:
        basis = lam
    else:
        basis = [li * (2 * li - 1) for li in lam] + [4 * lam[i] * lam[j] for i, j in ((0, 1), (1, 2), (2, 0))]
    r, s = sp.symbols("r s")
    sub = {x: x0 + r * (x1 - x0) + s * (x2 - x0), y: y0 + r * (y1 - y0) + s * (y2 - y0)}

    def integ(expr):
        e = sp.expand(expr.subs(sub, simultaneous=True))
        return sp.integrate(sp.integrate(e, (s, 0, 1 - r)), (r, 0, 1)) * sp.Abs(det)

    n = len(basis)
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            gi = [sp.diff(basis[i], x), sp.diff(basis[i], y)]
            gj = [sp.diff(basis[j], x), sp.diff(basis[j], y)]
            K[i, j] = K[j, i] = float(integ(gi[0] * gj[0] + gi[1] * gj[1]))
            M[i, j] = M[j, i] = float(integ(basis[i] * basis[j]))
    return K, M


def test_level_zero_mesh():
    m = refine_mesh(TRI_345, 0, 1)
    assert m.num_elements == 1
    assert len(m.boundary_edges) == 3
    assert len(m.free_nodes) == 0


@pytest.mark.parametrize("level", [0, 1, 2, 3, 5])
@pytest.mark.parametrize("degree", [1, 2])
def test_mesh_invariants(level, degree):
    t = triangle_from_vertices((0.1, -0.3), (2.2, 0.4), (-0.5, 1.7))
    m = refine_mesh(t, level, degree)
    assert m.num_elements == 4**level
    areas = m.element_areas()
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(t.area, rel=1e-12)
    # Conformity: interior corner edges shared twice, boundary edges once.
    count = {}
    for el in m.elements[:, :3]:
        for a, b in ((el[0], el[1]), (el[1], el[2]), (el[2], el[0])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    bset = {(min(a, b), max(a, b)) for a, b in m.boundary_edges}
    assert all(count[e] == 1 for e in bset)
    assert all(v == 2 for e, v in count.items() if e not in bset)
    assert all(v in (1, 2) for v in count.values())
    # Every boundary edge tagged with exactly one side and lying on it.
    assert set(m.boundary_side) == {"A", "B", "C"}
    for side in "ABC":
        p, q = t.endpoints(side)
        nrm = t.outward_normal(side)
        idx = m.edges_on(side)
        assert len(idx) == 2**level
        pts = m.nodes[m.boundary_edges[idx].ravel()]
        np.testing.assert_allclose((pts - p) @ nrm, 0.0, atol=1e-12)
        lengths = np.hypot(*(m.nodes[m.boundary_edges[idx, 1]] - m.nodes[m.boundary_edges[idx, 0]]).T)
        assert lengths.sum() == pytest.approx(t.length(side), rel=1e-12)
    if degree == 2:
        mids = m.nodes[m.elements[:, 3:]]
        corners = m.nodes[m.elements[:, :3]]
        np.testing.assert_allclose(mids, 0.5 * (corners + np.roll(corners, -1, axis=1)), atol=1e-12)


def test_area_partition_345():
    for level in range(5):
        assert refine_mesh(TRI_345, level).element_areas().sum() == pytest.approx(6.0, rel=1e-12)


def test_refinement_guard():
    with pytest.raises(RefinementTooDeep):
        refine_mesh(TRI_345, 11)


def test_off_dump(tmp_path):
    m = refine_mesh(TRI_345, 2, 2)
    path = tmp_path / "mesh.off"
    write_off(m, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "OFF"
    nv, nf, ne = map(int, lines[1].split())
    assert (nv, nf, ne) == (m.num_nodes, 16, 0)
    assert len(lines) == 2 + nv + nf
    assert lines[-1].startswith("3 ")


@pytest.mark.parametrize("degree", [1, 2])
@pytest.mark.parametrize(
    "verts",
    [[(0, 0), (1, 0), (0, 1)], [(0.5, -0.25), (2, 0.5), (-0.75, 1.5)]],
)
def test_element_matrices_match_symbolic(degree, verts):
    t = triangle_from_vertices(*verts)
    m = refine_mesh(t, 0, degree)
    ke, me = local_matrices(m)
    el_vertices = m.nodes[m.elements[0, :3]]
    K, M = _sympy_element(el_vertices.tolist(), degree)
    np.testing.assert_allclose(ke[0], K, atol=1e-13)
    np.testing.assert_allclose(me[0], M, atol=1e-13)


def test_reference_p1_stiffness():
    m = refine_mesh(triangle_from_vertices((0, 0), (1, 0), (0, 1)), 0, 1)
    ke, me = local_matrices(m)
    np.testing.assert_allclose(ke[0], 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]), atol=1e-15)
    np.testing.assert_allclose(me[0], (np.ones((3, 3)) + np.eye(3)) / 24, atol=1e-15)


@pytest.mark.parametrize("degree", [1, 2])
def test_full_stiffness_row_sums_vanish(degree):
    K, M = assemble_full(refine_mesh(TRI_345, 3, degree))
    np.testing.assert_allclose(K @ np.ones(K.shape[0]), 0.0, atol=1e-12)
    assert M.sum() == pytest.approx(6.0, rel=1e-12)


@pytest.mark.parametrize("degree", [1, 2])
def test_reduced_matrices_spd(degree):
    K, M = assemble(refine_mesh(TRI_345, 2, degree))
    for A in (K, M):
        d = A.toarray()
        np.testing.assert_allclose(d, d.T, atol=1e-14)
        assert np.linalg.eigvalsh(d).min() > 0
    rng = np.random.default_rng(3)
    v = rng.standard_normal(M.shape[0])
    assert v @ (M @ v) > 0


def test_right_isosceles_lowest_eigenvalue():
    pairs = solve_mesh(refine_mesh(RI, 5, 2), 1)
    assert 5.0 <= pairs[0].lam <= 5.01


def test_eigenpair_contract():
    m = refine_mesh(RI, 4, 2)
    K, M = assemble(m)
    pairs = solve_lowest_eigenpairs(K, M, 6)
    lams = [p.lam for p in pairs]
    assert lams == sorted(lams)
    U = np.column_stack([p.coefficients for p in pairs])
    np.testing.assert_allclose(U.T @ (M @ U), np.eye(6), atol=1e-10)
    for p in pairs:
        u = p.coefficients
        r = np.linalg.norm(K @ u - p.lam * (M @ u))
        assert r <= 1e-8 * p.lam * np.linalg.norm(M @ u)
        assert p.h == pytest.approx(p.lam**-0.5)
        assert u[np.argmax(np.abs(u))] > 0


def test_dense_and_sparse_paths_agree():
    m = refine_mesh(RI, 4, 2)
    K, M = assemble(m)
    import rellich_tri.fem as fem

    sparse_lams = [p.lam for p in solve_lowest_eigenpairs(K, M, 5)]
    old = fem.DENSE_LIMIT
    fem.DENSE_LIMIT = 10**6
    try:
        dense_lams = [p.lam for p in solve_lowest_eigenpairs(K, M, 5)]
    finally:
        fem.DENSE_LIMIT = old
    np.testing.assert_allclose(sparse_lams, dense_lams, rtol=1e-12)


def test_solver_deterministic():
    m = refine_mesh(TRI_345, 4, 2)
    K, M = assemble(m)
    a = solve_lowest_eigenpairs(K, M, 4, seed=11)
    b = solve_lowest_eigenpairs(K, M, 4, seed=11)
    for p, q in zip(a, b):
        assert p.lam == q.lam
        np.testing.assert_array_equal(p.coefficients, q.coefficients)


def test_normalize_properties():
    m = refine_mesh(TRI_345, 3, 2)
    K, M = assemble(m)
    e = solve_lowest_eigenpairs(K, M, 2)[1]
    raw = EigenPair(e.lam, -3.0 * e.coefficients, e.index)
    once = normalize(raw, M)
    assert once.coefficients @ (M @ once.coefficients) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(normalize(once, M).coefficients, once.coefficients, atol=1e-15)
    seven = normalize(EigenPair(e.lam, 7.0 * e.coefficients, e.index), M)
    np.testing.assert_allclose(seven.coefficients, normalize(EigenPair(e.lam, e.coefficients, 0), M).coefficients, atol=1e-14)
    with pytest.raises(ZeroVector):
        normalize(EigenPair(1.0, np.zeros(M.shape[0]), 0), M)


@pytest.mark.parametrize("family", [analytic.RIGHT_ISOSCELES, analytic.EQUILATERAL])
@pytest.mark.parametrize("degree", [1, 2])
def test_upper_bound_property(family, degree):
    modes = analytic.lowest_modes(family, 6)
    exact = [analytic.make_eigenfunction(family, mo).lam for mo in modes]
    t = analytic.make_eigenfunction(family, modes[0]).domain
    for level in (2, 3, 4, 5):
        lams = [p.lam for p in solve_mesh(refine_mesh(t, level, degree), 6)]
        assert all(l >= e * (1 - 1e-12) for l, e in zip(lams, exact))


@pytest.mark.parametrize("degree,order", [(1, 2.0), (2, 3.5)])
def test_eigenvalue_convergence_order(degree, order):
    errs = [abs(solve_mesh(refine_mesh(RI, L, degree), 1)[0].lam - 5.0) for L in (3, 4, 5, 6)]
    observed = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(observed >= order), observed


def test_equilateral_eigenvalue_cross_check():
    t = analytic.equilateral_triangle(1.0)
    lam = solve_mesh(refine_mesh(t, 6, 2), 1)[0].lam
    assert abs(lam - 16 * np.pi**2 / 3) <= 0.005 * 16 * np.pi**2 / 3


def test_relabeling_invariance():
    pts = [(0.0, 0.0), (1.0, 0.0), (-0.4, 0.5)]
    ref = None
    for perm in itertools.permutations(pts):
        t = triangle_from_vertices(*perm)
        lams = np.array([p.lam for p in solve_mesh(refine_mesh(t, 4, 2), 6)])
        if ref is None:
            ref = lams
        np.testing.assert_allclose(lams, ref, rtol=1e-10)

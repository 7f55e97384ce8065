import numpy as np
import pytest

from rellich_tri import analytic
from rellich_tri.errors import GeometryMismatch
from rellich_tri.fem import EigenPair, assemble_full, solve_mesh
from rellich_tri.geometry import triangle_from_vertices
from rellich_tri.mesh import refine_mesh
from rellich_tri.quadrature import _unit_interval_rule
from rellich_tri.trace import (
    FEM_DIRECT,
    FEM_VARIATIONAL,
    NeumannTrace,
    analytic_masses,
    analytic_trace,
    fem_masses,
    fem_trace_direct,
    fem_trace_variational,
    side_mass,
    variational_flux,
)

SQ = analytic.Square()
RI = analytic.right_isosceles_triangle()


def test_square_flux_on_left_side():
    f = analytic.square_eigenfunction(1, 1)
    tr = analytic_trace(f, SQ, "x0", 20)
    y = tr.points[:, 1]
    np.testing.assert_allclose(tr.points[:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(tr.flux, -f.h * np.sin(y) / np.pi, atol=1e-15)
    assert side_mass(tr).value == pytest.approx(1 / (2 * np.pi), rel=1e-12)


@pytest.mark.parametrize("j", range(1, 9))
@pytest.mark.parametrize("k", range(1, 9))
def test_square_closed_form(j, k):
    f = analytic.square_eigenfunction(j, k)
    for s in SQ.sides():
        tr = analytic_trace(f, SQ, s)
        assert len(tr.nodes) >= 2 * max(j, k) + 4
        got = side_mass(tr).value
        assert got == pytest.approx(analytic.square_neumann_mass(j, k, s), rel=1e-12)


def test_weights_sum_to_length():
    for f, geom in [
        (analytic.square_eigenfunction(2, 3), SQ),
        (analytic.right_isosceles_eigenfunction(1, 2), RI),
    ]:
        for s in geom.sides():
            tr = analytic_trace(f, geom, s)
            assert tr.weights.sum() == pytest.approx(geom.length(s), rel=1e-14)


def test_hypotenuse_flux_symmetric():
    f = analytic.right_isosceles_eigenfunction(1, 2)
    hyp = max("ABC", key=RI.length)
    tr = analytic_trace(f, RI, hyp, 31)
    # Gauss nodes are symmetric, so reversing the samples reflects about the midpoint.
    np.testing.assert_allclose(np.abs(tr.flux), np.abs(tr.flux[::-1]), atol=1e-13)
    np.testing.assert_allclose(tr.nodes + tr.nodes[::-1], RI.length(hyp), atol=1e-13)


@pytest.mark.parametrize("family", [analytic.RIGHT_ISOSCELES, analytic.EQUILATERAL])
def test_theorem_on_exact_families(family):
    for mode in analytic.lowest_modes(family, 8):
        f = analytic.make_eigenfunction(family, mode)
        for s, sm in analytic_masses(f, f.domain).items():
            pred = f.domain.length(s) / f.domain.area
            assert abs(sm.value - pred) <= 1e-10 * pred


@pytest.mark.parametrize("scale", [0.25, 1.0, 3.0, 10.0])
def test_dilation_scales_masses(scale):
    f1 = analytic.equilateral_eigenfunction(3, 1, side=1.0)
    fs = analytic.equilateral_eigenfunction(3, 1, side=scale)
    m1 = analytic_masses(f1, f1.domain)
    ms = analytic_masses(fs, fs.domain)
    for s in "ABC":
        assert ms[s].value == pytest.approx(m1[s].value / scale, rel=1e-12)


def test_mismatched_domain_rejected():
    f = analytic.right_isosceles_eigenfunction(1, 2)
    with pytest.raises(GeometryMismatch):
        analytic_trace(f, triangle_from_vertices((0, 0), (4, 0), (0, 3)), "A")
    with pytest.raises(GeometryMismatch):
        analytic_trace(analytic.square_eigenfunction(1, 1), RI, "A")


def test_side_mass_quadratic():
    tr = analytic_trace(analytic.square_eigenfunction(1, 2), SQ, "y0")
    doubled = NeumannTrace(tr.side_id, tr.nodes, tr.weights, 2 * tr.flux, tr.method)
    zero = NeumannTrace(tr.side_id, tr.nodes, tr.weights, 0 * tr.flux, tr.method)
    assert side_mass(doubled).value == pytest.approx(4 * side_mass(tr).value, rel=1e-15)
    assert side_mass(zero).value == 0.0


@pytest.mark.parametrize("degree", [1, 2])
def test_direct_trace_is_piecewise_polynomial(degree):
    mesh = refine_mesh(triangle_from_vertices((0, 0), (2, 0.3), (0.4, 1.5)), 1, degree)
    rng = np.random.default_rng(0)
    e = EigenPair(1.0, rng.standard_normal(len(mesh.free_nodes)), 0)
    t, _ = _unit_interval_rule(4)
    basis = np.vander(t, degree, increasing=True)
    for s in "ABC":
        tr = fem_trace_direct(mesh, e, s)
        assert tr.weights.sum() == pytest.approx(mesh.triangle.length(s), rel=1e-14)
        for vals in tr.flux.reshape(-1, 4):
            coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
            np.testing.assert_allclose(basis @ coef, vals, atol=1e-12)


@pytest.mark.parametrize("degree", [1, 2])
def test_variational_constant_test_function(degree):
    mesh = refine_mesh(triangle_from_vertices((0, 0), (1, 0), (-0.4, 0.5)), 3, degree)
    e = solve_mesh(mesh, 2)[1]
    bnodes, g, rhs = variational_flux(mesh, e)
    _, M = assemble_full(mesh)
    u = mesh.expand(e.coefficients)
    # Sum of the residual over boundary rows is -lam int u by partition of unity.
    assert rhs.sum() == pytest.approx(-e.lam * (M @ u).sum(), rel=1e-10)
    total = 0.0
    for s in "ABC":
        tr = fem_trace_variational(mesh, e, s)
        total += np.sum(tr.weights * tr.flux) / e.h
    assert total == pytest.approx(-e.lam * (M @ u).sum(), rel=1e-10)


def _ri_errors(level, method):
    f = analytic.right_isosceles_eigenfunction(1, 2)
    exact = analytic_masses(f, RI)
    mesh = refine_mesh(RI, level, 2)
    e = solve_mesh(mesh, 2)[1]
    got = fem_masses(mesh, e, method)
    return {s: abs(got[s].value - exact[s].value) / exact[s].value for s in "ABC"}


def test_variational_beats_direct():
    for level in (4, 5, 6):
        var = _ri_errors(level, FEM_VARIATIONAL)
        dire = _ri_errors(level, FEM_DIRECT)
        assert all(var[s] <= dire[s] for s in "ABC"), (level, var, dire)


def test_variational_accuracy_level5():
    assert max(_ri_errors(5, FEM_VARIATIONAL).values()) <= 0.005


def test_direct_accuracy_level6():
    assert max(_ri_errors(6, FEM_DIRECT).values()) <= 0.05


@pytest.mark.parametrize("degree", [1, 2])
def test_exact_in_space_convergence(degree):
    f = analytic.right_isosceles_eigenfunction(1, 2)
    exact = analytic_masses(f, RI)
    errs = []
    for level in (4, 5, 6):
        mesh = refine_mesh(RI, level, degree)
        e = EigenPair(f.lam, f.value(mesh.nodes[mesh.free_nodes]), 0)
        got = fem_masses(mesh, e)
        errs.append(max(abs(got[s].value - exact[s].value) / exact[s].value for s in "ABC"))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= degree + 0.5), orders


def test_unknown_method():
    mesh = refine_mesh(RI, 1, 1)
    with pytest.raises(ValueError):
        fem_masses(mesh, EigenPair(1.0, np.ones(len(mesh.free_nodes)), 0), "spectral")


@pytest.mark.parametrize("j", range(1, 6))
@pytest.mark.parametrize("k", range(1, 6))
def test_square_equidistributes_only_on_diagonal(j, k):
    f = analytic.square_eigenfunction(j, k)
    masses = analytic_masses(f, SQ)
    agree = all(abs(masses[s].value - SQ.length(s) / SQ.area) <= 1e-12 for s in SQ.sides())
    assert agree == (j == k)

"""Conforming P1/P2 discretisation of the Dirichlet Laplacian on a triangle."""

import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, ZeroVector
from .quadrature import reference_triangle_rule

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20140417
DENSE_LIMIT = 400


def shape_functions(degree, ref):
    """Reference basis values ``(nq, nb)`` and gradients ``(nq, nb, 2)``."""
    r, s = ref[:, 0], ref[:, 1]
    l0 = 1.0 - r - s
    one = np.ones_like(r)
    zero = np.zeros_like(r)
    if degree == 1:
        phi = np.column_stack([l0, r, s])
        dphi = np.stack(
            [np.column_stack([-one, -one]), np.column_stack([one, zero]), np.column_stack([zero, one])],
            axis=1,
        )
        return phi, dphi
    lam = [l0, r, s]
    dlam = [np.array([-1.0, -1.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    phi, dphi = [], []
    for i in range(3):
        phi.append(lam[i] * (2.0 * lam[i] - 1.0))
        dphi.append((4.0 * lam[i] - 1.0)[:, None] * dlam[i][None, :])
    for i, j in ((0, 1), (1, 2), (2, 0)):
        phi.append(4.0 * lam[i] * lam[j])
        dphi.append(4.0 * (lam[j][:, None] * dlam[i][None, :] + lam[i][:, None] * dlam[j][None, :]))
    return np.column_stack(phi), np.stack(dphi, axis=1)


def element_maps(mesh):
    """Affine maps of all elements: vertex 0, Jacobian, inverse transpose and det."""
    v = mesh.nodes[mesh.elements[:, :3]]
    jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv_t = np.linalg.inv(jac).transpose(0, 2, 1)
    return v[:, 0], jac, inv_t, det


def local_matrices(mesh):
    """Element stiffness and mass matrices, shape ``(ne, nb, nb)``."""
    ref, w = reference_triangle_rule(mesh.degree + 1)
    phi, dphi = shape_functions(mesh.degree, ref)
    _, _, inv_t, det = element_maps(mesh)
    grad = np.einsum("eij,qbj->eqbi", inv_t, dphi)
    ke = np.einsum("q,eqai,eqbi->eab", w, grad, grad) * det[:, None, None]
    me = np.einsum("q,qa,qb->ab", w, phi, phi)[None, :, :] * det[:, None, None]
    return ke, me


def _scatter(mesh, local):
    el = mesh.elements
    nb = el.shape[1]
    rows = np.repeat(el, nb, axis=1).ravel()
    cols = np.tile(el, (1, nb)).ravel()
    n = mesh.num_nodes
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


@lru_cache(maxsize=8)
def assemble_full(mesh):
    """Stiffness and mass matrices over all nodes, before Dirichlet elimination."""
    ke, me = local_matrices(mesh)
    return _scatter(mesh, ke), _scatter(mesh, me)


def assemble(mesh):
    """Stiffness ``K`` and mass ``M`` restricted to the free (interior) nodes."""
    k, m = assemble_full(mesh)
    free = mesh.free_nodes
    return k[free][:, free].tocsc(), m[free][:, free].tocsc()


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    coefficients: np.ndarray
    index: int
    residual: float = float("nan")

    @property
    def h(self):
        return self.lam**-0.5


def normalize(e, M):
    """Unit ``M``-norm, with the largest-magnitude coefficient made positive."""
    u = np.asarray(e.coefficients, dtype=float)
    norm2 = float(u @ (M @ u))
    if not np.any(u) or norm2 <= 0.0:
        raise ZeroVector("cannot normalise a zero coefficient vector")
    u = u / np.sqrt(norm2)
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return replace(e, coefficients=u)


def _m_orthonormalize(vecs, M):
    # Modified Gram-Schmidt in the M inner product, applied twice for stability.
    out = vecs.copy()
    for _ in range(2):
        for i in range(out.shape[1]):
            for j in range(i):
                out[:, i] -= (out[:, j] @ (M @ out[:, i])) * out[:, j]
            out[:, i] /= np.sqrt(out[:, i] @ (M @ out[:, i]))
    return out


def solve_lowest_eigenpairs(K, M, count, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """The ``count`` smallest eigenpairs of ``K x = lam M x``.

    Small systems use a dense symmetric solver; larger ones use ARPACK in
    shift-invert mode about zero with a seeded starting vector. Returned
    pairs are ``M``-orthonormal, sign-normalised and sorted by eigenvalue.

    Raises
    ------
    ConvergenceFailure
        If ARPACK fails or any relative residual
        ``|K u - lam M u| / (lam |M u|)`` exceeds ``tol``.
    """
    n = K.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"count must lie in [1, {n}], got {count}")

    if n <= DENSE_LIMIT or count >= n - 1:
        lam, vecs = sla.eigh(K.toarray(), M.toarray(), subset_by_index=[0, count - 1])
    else:
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            lam, vecs = spla.eigsh(K, k=count, M=M, sigma=0.0, which="LM", v0=v0, tol=0.0)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure(
                "ARPACK did not converge",
                {"converged": len(exc.eigenvalues), "requested": count, "dimension": n},
            ) from exc
        order = np.argsort(lam)
        lam, vecs = lam[order], vecs[:, order]
        vecs = _m_orthonormalize(vecs, M)

    pairs, residuals = [], []
    for i in range(count):
        u = vecs[:, i]
        mu = M @ u
        res = float(np.linalg.norm(K @ u - lam[i] * mu) / (abs(lam[i]) * np.linalg.norm(mu)))
        residuals.append(res)
        pairs.append(normalize(EigenPair(float(lam[i]), u, i, res), M))
    if max(residuals) > tol:
        raise ConvergenceFailure(
            f"eigen-residual {max(residuals):.2e} exceeds tolerance {tol:.1e}",
            {"residuals": residuals, "dimension": n, "tol": tol},
        )
    log.debug("solved %d eigenpairs, dimension %d, max residual %.2e", count, n, max(residuals))
    return pairs


def solve_mesh(mesh, count, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    K, M = assemble(mesh)
    count = min(count, K.shape[0])
    return solve_lowest_eigenpairs(K, M, count, tol=tol, seed=seed)

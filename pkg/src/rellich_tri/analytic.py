"""Closed-form Dirichlet eigenfunctions.

Every family is stored as the real part of a finite plane-wave sum,

    u(x) = norm * Re sum_p coef_p * exp(i k_p . x),

so values, gradients and Laplacians are exact (no differencing). The
families are

* ``square_2pi``: ``pi**-1 sin(jx) sin(ky)`` on ``[0, 2pi]**2``;
* ``right_isosceles_pi``: ``sin(jx) sin(ky) - sin(kx) sin(jy)`` on the
  triangle ``0 < x < y < pi``;
* ``equilateral``: alternating sums of six plane waves over the reflection
  group of the triangle with vertices ``(0, 0), (L, 0), (L/2, L*sqrt(3)/2)``.
  Modes are indexed by ``m >= n >= 1`` and a parity about the altitude
  through the origin vertex. The odd part vanishes when ``m == n``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidMode, OutOfDomain
from .geometry import triangle_from_vertices

SQUARE = "square_2pi"
RIGHT_ISOSCELES = "right_isosceles_pi"
EQUILATERAL = "equilateral"

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"

SQUARE_SIDES = ("x0", "x2pi", "y0", "y2pi")

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Square:
    """The square ``[0, side]**2`` with sides named ``x0, x2pi, y0, y2pi``."""

    side: float = TWO_PI

    @property
    def vertices(self):
        s = self.side
        return np.array([[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])

    @property
    def area(self):
        return self.side**2

    @property
    def perimeter(self):
        return 4.0 * self.side

    def sides(self):
        return SQUARE_SIDES

    def endpoints(self, side):
        v = self.vertices
        pairs = {"y0": (0, 1), "x2pi": (1, 2), "y2pi": (2, 3), "x0": (3, 0)}
        if side not in pairs:
            raise ValueError(f"unknown square side {side!r}")
        i, j = pairs[side]
        return v[i].copy(), v[j].copy()

    def length(self, side):
        self.endpoints(side)
        return self.side

    def outward_normal(self, side):
        p, q = self.endpoints(side)
        t = (q - p) / np.hypot(*(q - p))
        return np.array([t[1], -t[0]])


@dataclass(frozen=True, eq=False)
class ClosedFormEigenfunction:
    family: str
    mode: tuple
    lam: float
    normalization: float
    coefs: np.ndarray
    wavevectors: np.ndarray
    domain: object

    @property
    def h(self):
        return self.lam**-0.5

    @property
    def vertices(self):
        return self.domain.vertices

    def _phases(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts, np.exp(1j * pts @ self.wavevectors.T) * self.coefs

    def value(self, points):
        _, e = self._phases(points)
        return self.normalization * e.sum(axis=1).real

    def gradient(self, points):
        _, e = self._phases(points)
        return self.normalization * (1j * e @ self.wavevectors).real

    def hessian(self, points):
        _, e = self._phases(points)
        k = self.wavevectors
        kk = k[:, :, None] * k[:, None, :]
        return -self.normalization * np.einsum("np,pij->nij", e, kk).real

    def laplacian(self, points):
        h = self.hessian(points)
        return h[:, 0, 0] + h[:, 1, 1]

    def moved(self, matrix, shift=(0.0, 0.0)):
        """``u(Q^T (x - s))`` on the image domain ``Q T + s``, for orthogonal ``Q``.

        Only triangle domains can be moved.
        """
        q = np.asarray(matrix, dtype=float)
        s = np.asarray(shift, dtype=float)
        ks = self.wavevectors @ q.T
        coefs = self.coefs * np.exp(-1j * ks @ s)
        return ClosedFormEigenfunction(
            family=self.family,
            mode=self.mode,
            lam=self.lam,
            normalization=self.normalization,
            coefs=coefs,
            wavevectors=ks,
            domain=self.domain.transformed(q, s),
        )


def _sine_product_waves(j, k):
    """Plane waves of ``sin(jx) sin(ky)``."""
    coefs, ks = [], []
    for s in (1, -1):
        for t in (1, -1):
            coefs.append(-0.25 * s * t)
            ks.append((s * j, t * k))
    return np.array(coefs, dtype=complex), np.array(ks, dtype=float)


def square_eigenfunction(j, k):
    """``pi**-1 sin(jx) sin(ky)`` on ``[0, 2pi]**2``, eigenvalue ``j**2 + k**2``."""
    j, k = _check_positive_int(j, "j"), _check_positive_int(k, "k")
    coefs, ks = _sine_product_waves(j, k)
    return ClosedFormEigenfunction(
        family=SQUARE,
        mode=(j, k),
        lam=float(j * j + k * k),
        normalization=1.0 / np.pi,
        coefs=coefs,
        wavevectors=ks,
        domain=Square(),
    )


def square_neumann_mass(j, k, side):
    """Closed-form mass of ``h d_nu u`` on one side of the square.

    ``pi**-1 h**2 j**2`` on the sides ``x = 0, 2pi`` and ``pi**-1 h**2 k**2``
    on ``y = 0, 2pi``; no quadrature is involved.
    """
    j, k = _check_positive_int(j, "j"), _check_positive_int(k, "k")
    h2 = 1.0 / (j * j + k * k)
    if side in ("x0", "x2pi"):
        return h2 * j * j / np.pi
    if side in ("y0", "y2pi"):
        return h2 * k * k / np.pi
    raise ValueError(f"unknown square side {side!r}")


def square_mass_scaling_demo(k_max, j=1):
    """Rows ``(j, k, h, mass, mass / h**2)`` on side ``x = 0`` for ``k <= k_max``.

    The last column is ``j**2 / pi`` for every row, so the mass decays like
    ``h**2`` along the family.
    """
    if int(k_max) < 2:
        raise ValueError("k_max must be at least 2")
    rows = []
    for k in range(1, int(k_max) + 1):
        h = (j * j + k * k) ** -0.5
        mass = square_neumann_mass(j, k, "x0")
        rows.append((j, k, h, mass, mass / h**2))
    return rows


def right_isosceles_triangle():
    return triangle_from_vertices((0.0, 0.0), (0.0, np.pi), (np.pi, np.pi))


def right_isosceles_eigenfunction(j, k):
    """Antisymmetrised square mode on the triangle ``0 < x < y < pi``.

    ``u = (2/pi) (sin(jx) sin(ky) - sin(kx) sin(jy))`` with eigenvalue
    ``j**2 + k**2``; requires ``1 <= j < k``.
    """
    j, k = _check_positive_int(j, "j"), _check_positive_int(k, "k")
    if j >= k:
        raise InvalidMode(f"right isosceles modes need j < k, got ({j}, {k})")
    c1, k1 = _sine_product_waves(j, k)
    c2, k2 = _sine_product_waves(k, j)
    # Squared integrand over [0, pi]^2 is pi^2/2; the triangle holds half.
    return ClosedFormEigenfunction(
        family=RIGHT_ISOSCELES,
        mode=(j, k),
        lam=float(j * j + k * k),
        normalization=2.0 / np.pi,
        coefs=np.concatenate([c1, -c2]),
        wavevectors=np.vstack([k1, k2]),
        domain=_right_isosceles_cached(),
    )


@lru_cache(maxsize=1)
def _right_isosceles_cached():
    return right_isosceles_triangle()


def equilateral_triangle(side=1.0):
    s = float(side)
    return triangle_from_vertices((0.0, 0.0), (s, 0.0), (s / 2.0, s * np.sqrt(3.0) / 2.0))


def _d3_group():
    """Rotations by 0, 120, 240 degrees and reflections in lines at 0, 60, 120."""
    out = []
    for t in (0.0, 2 * np.pi / 3, 4 * np.pi / 3):
        c, s = np.cos(t), np.sin(t)
        out.append((np.array([[c, -s], [s, c]]), 1.0))
    for t in (0.0, np.pi / 3, 2 * np.pi / 3):
        c, s = np.cos(2 * t), np.sin(2 * t)
        out.append((np.array([[c, s], [s, -c]]), -1.0))
    return out


def equilateral_eigenvalue(m, n, side=1.0):
    return 16.0 * np.pi**2 / (9.0 * side**2) * (m * m + m * n + n * n)


def equilateral_eigenfunction(m, n, sym=SYMMETRIC, side=1.0):
    """Dirichlet mode ``(m, n)`` of the equilateral triangle of side ``side``.

    ``sym`` selects the part even (``"symmetric"``) or odd
    (``"antisymmetric"``) under reflection in the altitude through the
    origin vertex. Requires ``m >= n >= 1``, and ``m > n`` for the odd part.
    """
    m, n = _check_positive_int(m, "m"), _check_positive_int(n, "n")
    if m < n:
        raise InvalidMode(f"equilateral modes are indexed with m >= n, got ({m}, {n})")
    if sym not in (SYMMETRIC, ANTISYMMETRIC):
        raise InvalidMode(f"unknown parity {sym!r}")
    if sym == ANTISYMMETRIC and m == n:
        raise InvalidMode("the antisymmetric part of an (m, m) mode vanishes")

    s = float(side)
    tri = equilateral_triangle(s)
    # Dual basis to the unit normals at 30 and 90 degrees.
    w1 = np.array([2.0 / np.sqrt(3.0), 0.0])
    w2 = (2.0 / np.sqrt(3.0)) * np.array([-0.5, np.sqrt(3.0) / 2.0])
    d = s * np.sqrt(3.0) / 2.0
    k = (np.pi / d) * ((m + n) * w1 + n * w2)

    group = _d3_group()
    ks = np.array([g @ k for g, _ in group])
    signs = np.array([det for _, det in group], dtype=complex)
    if sym == SYMMETRIC:
        coefs = -1j * signs
        mass = (6.0 if m == n else 3.0) * tri.area
    else:
        coefs = signs
        mass = 3.0 * tri.area
    return ClosedFormEigenfunction(
        family=EQUILATERAL,
        mode=(m, n, sym),
        lam=float(equilateral_eigenvalue(m, n, s)),
        normalization=1.0 / np.sqrt(mass),
        coefs=coefs,
        wavevectors=ks,
        domain=tri,
    )


def lowest_modes(family, count, side=1.0):
    """The ``count`` lowest modes of a family, sorted by eigenvalue then mode."""
    if family not in (SQUARE, RIGHT_ISOSCELES, EQUILATERAL):
        raise InvalidMode(f"unknown family {family!r}")
    if count < 1:
        raise ValueError("count must be positive")
    bound = 4
    while True:
        found = []
        for p in range(1, bound + 1):
            for q in range(1, bound + 1):
                if family == SQUARE:
                    found.append((p * p + q * q, (p, q)))
                elif family == RIGHT_ISOSCELES and p < q:
                    found.append((p * p + q * q, (p, q)))
                elif family == EQUILATERAL and p >= q:
                    lam = equilateral_eigenvalue(p, q, side)
                    found.append((lam, (p, q, SYMMETRIC)))
                    if p > q:
                        found.append((lam, (p, q, ANTISYMMETRIC)))
        found.sort()
        # Smallest eigenvalue of any mode with an index beyond ``bound``.
        if family == EQUILATERAL:
            cap = equilateral_eigenvalue(bound + 1, 1, side)
        else:
            cap = (bound + 1) ** 2 + 1
        if len(found) >= count and found[count - 1][0] < cap:
            return [mode for _, mode in found[:count]]
        bound *= 2


def make_eigenfunction(family, mode, side=1.0):
    if family == SQUARE:
        return square_eigenfunction(*mode)
    if family == RIGHT_ISOSCELES:
        return right_isosceles_eigenfunction(*mode)
    if family == EQUILATERAL:
        return equilateral_eigenfunction(*mode, side=side)
    raise InvalidMode(f"unknown family {family!r}")


def evaluate(f, points, tol=1e-12):
    """Exact values and gradients of ``f`` at ``points``.

    Raises :class:`OutOfDomain` if a point lies outside the closed domain
    by more than ``tol`` relative to the domain diameter.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = f.vertices
    scale = float(np.abs(v).max())
    for i in range(len(v)):
        p, q = v[i], v[(i + 1) % len(v)]
        e = q - p
        cross = e[0] * (pts[:, 1] - p[1]) - e[1] * (pts[:, 0] - p[0])
        if np.any(cross < -tol * scale * np.hypot(*e)):
            raise OutOfDomain(f"point outside the {f.family} domain")
    return f.value(pts), f.gradient(pts)


def _check_positive_int(x, name):
    if int(x) != x or x < 1:
        raise InvalidMode(f"{name} must be a positive integer, got {x!r}")
    return int(x)

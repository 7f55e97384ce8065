"""Planar triangles and the canonical coordinate frame.

A :class:`Triangle` labels its sides ``A``, ``B``, ``C`` in order of
increasing length. :func:`canonicalize` moves the triangle so that the
vertex opposite side ``A`` sits at the origin and ``A`` lies on the
vertical line ``x = ell``, with ``B`` the lower and ``C`` the upper of the
two remaining sides.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTriangle, GeometryError, NonFiniteInput

SIDE_IDS = ("A", "B", "C")
ACUTE = "acute_or_right"
OBTUSE = "obtuse"

COLLINEAR_RTOL = 1e-12
RIGHT_ANGLE_RTOL = 1e-12


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True, eq=False)
class Triangle:
    """A non-degenerate planar triangle.

    Attributes
    ----------
    vertices : (3, 2) ndarray
        Vertices in counterclockwise order.
    edges : tuple of three (int, int)
        Vertex index pairs of sides A, B, C, each listed in counterclockwise
        traversal order.
    side_lengths : tuple of float
        ``(a, b, c)`` with ``a <= b <= c``.
    area : float
    reflected : bool
        True if the input vertices were clockwise and vertices 1 and 2 were
        swapped to restore counterclockwise storage.
    """

    vertices: np.ndarray
    edges: tuple
    side_lengths: tuple
    area: float
    reflected: bool = False

    @property
    def perimeter(self):
        return float(sum(self.side_lengths))

    @property
    def centroid(self):
        return self.vertices.mean(axis=0)

    def _index(self, side):
        try:
            return SIDE_IDS.index(side)
        except ValueError:
            raise GeometryError(f"unknown side id {side!r}") from None

    def length(self, side):
        return self.side_lengths[self._index(side)]

    def endpoints(self, side):
        i, j = self.edges[self._index(side)]
        return self.vertices[i].copy(), self.vertices[j].copy()

    def opposite_vertex(self, side):
        i, j = self.edges[self._index(side)]
        return ({0, 1, 2} - {i, j}).pop()

    def outward_normal(self, side):
        p, q = self.endpoints(side)
        t = (q - p) / np.hypot(*(q - p))
        # Counterclockwise traversal puts the interior on the left.
        return np.array([t[1], -t[0]])

    def sides(self):
        return SIDE_IDS

    def transformed(self, matrix, shift=(0.0, 0.0)):
        """Image of the triangle under ``x -> matrix @ x + shift``."""
        matrix = np.asarray(matrix, dtype=float)
        v = self.vertices @ matrix.T + np.asarray(shift, dtype=float)
        return triangle_from_vertices(*v)

    def scaled(self, s):
        return self.transformed(s * np.eye(2))


def triangle_from_vertices(p0, p1, p2):
    """Build a :class:`Triangle` from three points.

    Raises
    ------
    NonFiniteInput
        If any coordinate is NaN or infinite.
    DegenerateTriangle
        If the points are collinear up to ``1e-12 * scale**2``, where
        ``scale`` is the largest coordinate magnitude.
    """
    pts = np.array([p0, p1, p2], dtype=float)
    if pts.shape != (3, 2):
        raise GeometryError(f"expected three 2-D points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise NonFiniteInput("vertex coordinates must be finite")

    signed = 0.5 * _cross(pts[1] - pts[0], pts[2] - pts[0])
    scale = float(np.abs(pts).max())
    if abs(signed) < COLLINEAR_RTOL * scale**2 or scale == 0.0:
        raise DegenerateTriangle(
            f"area {abs(signed):.3e} below collinearity threshold for scale {scale:.3e}"
        )
    reflected = signed < 0
    if reflected:
        pts = pts[[0, 2, 1]]

    ccw_edges = [(0, 1), (1, 2), (2, 0)]
    lengths = [float(np.hypot(*(pts[j] - pts[i]))) for i, j in ccw_edges]
    order = sorted(range(3), key=lambda e: (lengths[e], tuple(sorted(ccw_edges[e]))))
    a, b, c = (lengths[e] for e in order)
    if not a + b > c:
        raise DegenerateTriangle(f"side lengths {a}, {b}, {c} violate the triangle inequality")

    return Triangle(
        vertices=pts,
        edges=tuple(ccw_edges[e] for e in order),
        side_lengths=(a, b, c),
        area=abs(float(signed)),
        reflected=bool(reflected),
    )


@dataclass(frozen=True)
class SideFrame:
    """Tangent, outward normal and parametrisation speed of one side.

    Vectors are expressed in canonical-frame coordinates. ``speed`` is the
    arclength factor of the side parametrised by ``x`` (sides B and C) or
    by ``y`` (side A, where it is 1).
    """

    side_id: str
    tangent: np.ndarray
    normal: np.ndarray
    speed: float
    length: float
    start: np.ndarray
    end: np.ndarray


@dataclass(frozen=True, eq=False)
class CanonicalFrame:
    """A triangle placed in the canonical frame.

    ``labels`` maps each frame side (``"A"``, ``"B"``, ``"C"``) to the side
    id of the source triangle. In the acute/right case ``a1`` and ``a2``
    are the lengths of side A below and above the x-axis. In the obtuse
    case side A spans ``a1 <= y <= a1 + a`` and ``a2`` stores ``a + a1``.

    Frame coordinates are ``rotation @ (x - origin)``; ``rotation`` is
    orthogonal and has determinant -1 when a reflection was required.
    """

    triangle: Triangle
    ell: float
    a1: float
    a2: float
    case: str
    rotation: np.ndarray
    origin: np.ndarray
    labels: dict = field(default_factory=dict)
    lengths: tuple = ()
    frame_vertices: np.ndarray = None

    @property
    def a(self):
        return self.lengths[0]

    @property
    def b(self):
        return self.lengths[1]

    @property
    def c(self):
        return self.lengths[2]

    @property
    def reflection(self):
        return bool(np.linalg.det(self.rotation) < 0)

    def to_frame(self, points):
        points = np.asarray(points, dtype=float)
        return (points - self.origin) @ self.rotation.T

    def from_frame(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self.rotation + self.origin

    def frame_side(self, triangle_side):
        """Frame label carried by a side of the source triangle."""
        for k, v in self.labels.items():
            if v == triangle_side:
                return k
        raise GeometryError(f"unknown side id {triangle_side!r}")


def canonicalize(t, which_side_is_A="A"):
    """Place ``t`` in the canonical frame with ``which_side_is_A`` as side A.

    The two remaining sides keep the relative order they have in ``t``;
    the first becomes B and the second C, so ``b <= c`` always holds.
    The configuration is obtuse when the foot of the altitude from the
    origin vertex falls outside side A.
    """
    if which_side_is_A not in SIDE_IDS:
        raise GeometryError(f"unknown side id {which_side_is_A!r}")
    rest = [s for s in SIDE_IDS if s != which_side_is_A]
    labels = {"A": which_side_is_A, "B": rest[0], "C": rest[1]}

    ia, ja = t.edges[SIDE_IDS.index(which_side_is_A)]
    o = t.opposite_vertex(which_side_is_A)
    edge_b = set(t.edges[SIDE_IDS.index(rest[0])])
    # Endpoint of A shared with B, and the one shared with C.
    p_ab = ia if ia in edge_b else ja
    p_ac = ja if p_ab == ia else ia

    O = t.vertices[o]
    PB = t.vertices[p_ab]
    PC = t.vertices[p_ac]
    tan = (PC - PB) / np.hypot(*(PC - PB))
    nrm = np.array([tan[1], -tan[0]])
    if np.dot(nrm, PB - O) < 0:
        nrm = -nrm
    rotation = np.vstack([nrm, tan])

    ell = float(np.dot(nrm, PB - O))
    y_b = float(np.dot(tan, PB - O))
    y_c = float(np.dot(tan, PC - O))
    a = t.length(which_side_is_A)
    if y_b > RIGHT_ANGLE_RTOL * ell:
        case = OBTUSE
        a1, a2 = y_b, y_c
    else:
        case = ACUTE
        a1, a2 = max(-y_b, 0.0), y_c

    frame_vertices = np.array([[0.0, 0.0], [ell, y_b], [ell, y_c]])
    return CanonicalFrame(
        triangle=t,
        ell=ell,
        a1=a1,
        a2=a2,
        case=case,
        rotation=rotation,
        origin=O.copy(),
        labels=labels,
        lengths=(a, t.length(rest[0]), t.length(rest[1])),
        frame_vertices=frame_vertices,
    )


def side_frames(t, f):
    """Tangents, outward normals and speeds of sides A, B, C in frame ``f``.

    Returned as a dict keyed by frame label.
    """
    ell, a1, a2 = f.ell, f.a1, f.a2
    a, b, c = f.lengths
    O, PB, PC = f.frame_vertices
    if f.case == ACUTE:
        tau_b = np.array([ell / b, -a1 / b])
        nu_b = np.array([-a1 / b, -ell / b])
        tau_c = np.array([ell / c, a2 / c])
        nu_c = np.array([-a2 / c, ell / c])
    else:
        tau_b = np.array([ell / b, a1 / b])
        nu_b = np.array([a1 / b, -ell / b])
        tau_c = np.array([ell / c, a2 / c])
        nu_c = np.array([-a2 / c, ell / c])
    return {
        "A": SideFrame("A", np.array([0.0, 1.0]), np.array([1.0, 0.0]), 1.0, a, PB, PC),
        "B": SideFrame("B", tau_b, nu_b, b / ell, b, O, PB),
        "C": SideFrame("C", tau_c, nu_c, c / ell, c, O, PC),
    }


def predicted_neumann_mass(t, side):
    """Side length over triangle area."""
    return t.length(side) / t.area

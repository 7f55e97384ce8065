"""Gauss-Legendre rules on segments and triangles."""

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=64)
def _unit_interval_rule(order):
    x, w = leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def segment_rule(p, q, order):
    """Gauss-Legendre nodes on the segment ``p -> q``.

    Returns ``(points, s, weights)`` where ``s`` is the arclength position
    of each node measured from ``p``. Weights sum to the segment length.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    t, w = _unit_interval_rule(order)
    length = float(np.hypot(*(q - p)))
    points = p[None, :] + t[:, None] * (q - p)[None, :]
    return points, t * length, w * length


@lru_cache(maxsize=64)
def reference_triangle_rule(order):
    """Collapsed (Duffy) tensor Gauss rule on the reference triangle.

    The reference triangle is ``{(r, s): r, s >= 0, r + s <= 1}``. With
    ``order`` points per direction the rule integrates polynomials of total
    degree ``2 * order - 2`` exactly. Weights sum to 1/2.
    """
    t, w = _unit_interval_rule(order)
    u, v = np.meshgrid(t, t, indexing="ij")
    r = u.ravel()
    s = (v * (1.0 - u)).ravel()
    weights = (np.outer(w, w) * (1.0 - u)).ravel()
    return np.column_stack([r, s]), weights


def triangle_rule(vertices, order):
    """Map the collapsed rule onto a physical triangle.

    Returns ``(points, weights)`` with weights summing to the triangle area.
    """
    v = np.asarray(vertices, dtype=float)
    ref, w = reference_triangle_rule(order)
    e1 = v[1] - v[0]
    e2 = v[2] - v[0]
    jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
    points = v[0] + ref[:, :1] * e1 + ref[:, 1:] * e2
    return points, w * jac

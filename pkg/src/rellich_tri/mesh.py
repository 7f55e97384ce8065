"""Uniformly refined meshes of a single triangle.

Applying the congruent 4-split ``level`` times to a triangle produces the
barycentric lattice with ``2**level`` intervals per side, so the mesh is
built directly on that lattice. Degree-2 meshes use the lattice at twice
the resolution, whose extra points are exactly the edge midpoints.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RefinementTooDeep

MAX_LEVEL = 10


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming Lagrange mesh of a triangle.

    ``elements`` has 3 columns (degree 1) or 6 columns (degree 2: corners
    then midpoints of local edges 01, 12, 20). Boundary edges are stored
    in counterclockwise order as corner-node pairs with the midpoint node
    (degree 2, else -1), the owning element, its local edge number and
    the triangle side id.
    """

    triangle: object
    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: np.ndarray
    boundary_mid: np.ndarray
    boundary_element: np.ndarray
    boundary_local: np.ndarray
    boundary_side: tuple
    refinement_level: int
    degree: int

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_elements(self):
        return len(self.elements)

    @property
    def boundary_nodes(self):
        idx = [self.boundary_edges.ravel()]
        if self.degree == 2:
            idx.append(self.boundary_mid)
        return np.unique(np.concatenate(idx))

    @property
    def free_nodes(self):
        mask = np.ones(self.num_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def element_areas(self):
        v = self.nodes[self.elements[:, :3]]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def expand(self, free_values):
        """Full nodal vector with zeros on the Dirichlet boundary."""
        full = np.zeros(self.num_nodes)
        full[self.free_nodes] = free_values
        return full

    def edges_on(self, side):
        return np.flatnonzero(np.array(self.boundary_side) == side)


def refine_mesh(t, level, degree=2):
    """Mesh of triangle ``t`` after ``level`` uniform 4-splits.

    Raises :class:`RefinementTooDeep` for ``level > 10``.
    """
    level = int(level)
    if level < 0:
        raise ValueError("level must be non-negative")
    if level > MAX_LEVEL:
        raise RefinementTooDeep(f"level {level} exceeds the limit of {MAX_LEVEL}")
    if degree not in (1, 2):
        raise ValueError("degree must be 1 or 2")

    n = 2**level
    res = n * degree
    v0, v1, v2 = t.vertices

    ii, jj = np.meshgrid(np.arange(res + 1), np.arange(res + 1), indexing="ij")
    keep = ii + jj <= res
    index = -np.ones((res + 1, res + 1), dtype=np.int64)
    index[keep] = np.arange(keep.sum())
    pi, pj = ii[keep] / res, jj[keep] / res
    nodes = v0 + pi[:, None] * (v1 - v0) + pj[:, None] * (v2 - v0)

    d = degree
    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    up = ci + cj <= n - 1
    down = ci + cj <= n - 2
    ui, uj = ci[up] * d, cj[up] * d
    di, dj = ci[down] * d, cj[down] * d

    up_corners = [index[ui, uj], index[ui + d, uj], index[ui, uj + d]]
    down_corners = [index[di + d, dj], index[di + d, dj + d], index[di, dj + d]]
    if degree == 2:
        up_mid = [index[ui + 1, uj], index[ui + 1, uj + 1], index[ui, uj + 1]]
        down_mid = [index[di + 2, dj + 1], index[di + 1, dj + 2], index[di + 1, dj + 1]]
        up_el = np.column_stack(up_corners + up_mid)
        down_el = np.column_stack(down_corners + down_mid)
    else:
        up_el = np.column_stack(up_corners)
        down_el = np.column_stack(down_corners)
    elements = np.vstack([up_el, down_el])

    # Up-element number for coarse lattice cell (i, j).
    up_id = -np.ones((n, n), dtype=np.int64)
    up_id[up] = np.arange(up.sum())

    side_of = {}
    for label, (a, b) in zip(("A", "B", "C"), t.edges):
        side_of[(a, b)] = label

    edges, mids, owner, local, sides = [], [], [], [], []
    k = np.arange(n)
    # Lattice sides: v0->v1 is j = 0, v1->v2 is i + j = n, v2->v0 is i = 0.
    runs = [
        ((0, 1), up_id[k, 0], 0),
        ((1, 2), up_id[n - 1 - k, k], 1),
        ((2, 0), up_id[0, n - 1 - k], 2),
    ]
    for pair, owners, loc in runs:
        el = elements[owners]
        a = el[:, loc]
        b = el[:, (loc + 1) % 3]
        edges.append(np.column_stack([a, b]))
        mids.append(el[:, 3 + loc] if degree == 2 else -np.ones(n, dtype=np.int64))
        owner.append(owners)
        local.append(np.full(n, loc))
        sides.extend([side_of[pair]] * n)

    return Mesh(
        triangle=t,
        nodes=nodes,
        elements=elements,
        boundary_edges=np.vstack(edges),
        boundary_mid=np.concatenate(mids),
        boundary_element=np.concatenate(owner),
        boundary_local=np.concatenate(local),
        boundary_side=tuple(sides),
        refinement_level=level,
        degree=degree,
    )


def write_off(mesh, path):
    """Dump the corner connectivity as OFF text (z = 0)."""
    tris = mesh.elements[:, :3]
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.num_nodes} {len(tris)} 0\n")
        for x, y in mesh.nodes:
            fh.write(f"{x!r} {y!r} 0.0\n")
        for a, b, c in tris:
            fh.write(f"3 {a} {b} {c}\n")

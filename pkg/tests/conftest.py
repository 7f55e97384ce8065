import time

import numpy as np
import pytest

from rellich_tri.fem import assemble, solve_lowest_eigenpairs
from rellich_tri.geometry import triangle_from_vertices
from rellich_tri.mesh import refine_mesh
from rellich_tri.trace import fem_masses

# Five triangles for the end-to-end runs; two are obtuse.
FEM_TRIANGLES = {
    "right_345": [(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)],
    "obtuse_small": [(0.0, 0.0), (1.0, 0.0), (-0.4, 0.5)],
    "obtuse_flat": [(0.0, 0.0), (3.0, 0.0), (0.5, 0.6)],
    "acute_scalene": [(0.0, 0.0), (2.0, 0.0), (0.7, 1.6)],
    "equilateral": [(0.0, 0.0), (1.0, 0.0), (0.5, np.sqrt(3.0) / 2.0)],
}

ACCEPTANCE_LINES = pytest.StashKey[list]()


class FemRun:
    def __init__(self, t, level, degree=2, count=6):
        start = time.perf_counter()
        self.triangle = t
        self.level = level
        self.mesh = refine_mesh(t, level, degree)
        self.K, self.M = assemble(self.mesh)
        self.pairs = solve_lowest_eigenpairs(self.K, self.M, count)
        self._masses = {}
        self.seconds = time.perf_counter() - start

    def masses(self, method="fem_variational"):
        if method not in self._masses:
            start = time.perf_counter()
            self._masses[method] = [fem_masses(self.mesh, e, method) for e in self.pairs]
            self.seconds += time.perf_counter() - start
        return self._masses[method]


@pytest.fixture(scope="session")
def fem_runs():
    """``{(name, level): FemRun}`` for levels 4, 5, 6 at degree 2."""
    runs = {}
    for name, verts in FEM_TRIANGLES.items():
        t = triangle_from_vertices(*verts)
        for level in (4, 5, 6):
            runs[name, level] = FemRun(t, level)
    return runs


@pytest.fixture
def record(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def _record(number, passed, detail):
        lines.append((str(number), bool(passed), detail))
    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(lines, key=lambda x: x[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {detail}")

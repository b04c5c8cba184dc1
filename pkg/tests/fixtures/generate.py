"""Regenerate the checked-in fixture files.

Run from anywhere: ``python tests/fixtures/generate.py``. Output is
deterministic; the files in this directory are the committed results.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

HERE = Path(__file__).resolve().parent


def write_mesh(name: str, vertices: np.ndarray, triangles: np.ndarray) -> None:
    np.savetxt(HERE / f"{name}_vertices.txt", vertices, fmt="%.17g")
    np.savetxt(HERE / f"{name}_elements.txt", triangles, fmt="%d")


def orient_ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    cross = (b - a)[:, 0] * (c - a)[:, 1] - (b - a)[:, 1] * (c - a)[:, 0]
    tri = triangles.copy()
    tri[cross < 0] = tri[cross < 0][:, [0, 2, 1]]
    return tri


def crossed_square(cells: int, side: float) -> tuple[np.ndarray, np.ndarray]:
    """Each grid square split into four triangles through its center."""
    h = side / cells
    grid = np.array([(i * h, j * h) for j in range(cells + 1) for i in range(cells + 1)])
    centers = np.array([((i + 0.5) * h, (j + 0.5) * h) for j in range(cells) for i in range(cells)])
    vertices = np.vstack([grid, centers])
    corner = lambda i, j: j * (cells + 1) + i
    tris = []
    for j in range(cells):
        for i in range(cells):
            m = len(grid) + j * cells + i
            a, b, c, d = corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)
            tris += [(a, b, m), (b, c, m), (c, d, m), (d, a, m)]
    return vertices, np.array(tris)


def unstructured_square(seed: int = 7) -> tuple[np.ndarray, np.ndarray]:
    """Delaunay mesh of the unit square with 200 triangles."""
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, 11)[:-1]
    zero, one = np.zeros_like(t), np.ones_like(t)
    boundary = np.concatenate([np.c_[t, zero], np.c_[one, t], np.c_[1 - t, one], np.c_[zero, 1 - t]])
    g = np.linspace(0.1, 0.9, 9)
    x, y = np.meshgrid(g, g)
    inner = np.c_[x.ravel(), y.ravel()] + rng.uniform(-0.02, 0.02, (81, 2))
    vertices = np.vstack([boundary, inner])
    return vertices, orient_ccw(vertices, Delaunay(vertices).simplices)


def lattice_region(inside, spacing: float, extent: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Equilateral-lattice triangles whose centroids satisfy ``inside``."""
    dy = spacing * np.sqrt(3) / 2
    nx = int(np.ceil(extent / spacing)) + 2
    ny = int(np.ceil(extent / dy)) + 2
    pts = np.array([((i + 0.5 * (j % 2)) * spacing, j * dy) for j in range(ny) for i in range(nx)])
    idx = lambda i, j: j * nx + i
    tris = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            if j % 2 == 0:
                tris += [(idx(i, j), idx(i + 1, j), idx(i, j + 1)), (idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1))]
            else:
                tris += [(idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)), (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1))]
    tris = np.array(tris)
    centroids = pts[tris].mean(axis=1)
    tris = tris[inside(centroids)]
    used, inverse = np.unique(tris, return_inverse=True)
    return pts[used], orient_ccw(pts[used], inverse.reshape(tris.shape))


def four_holes(xy: np.ndarray) -> np.ndarray:
    x, y = xy[:, 0], xy[:, 1]
    ok = (x > 0) & (x < 1) & (y > 0) & (y < 1)
    for cx in (0.3, 0.7):
        for cy in (0.3, 0.7):
            ok &= ~((np.abs(x - cx) < 0.1) & (np.abs(y - cy) < 0.1))
    return ok


def radial(lo: float, hi: float):
    return lambda xy: (np.hypot(xy[:, 0] - 0.5, xy[:, 1] - 0.5) < hi) & (np.hypot(xy[:, 0] - 0.5, xy[:, 1] - 0.5) > lo)


def main() -> None:
    write_mesh("five_vertex", np.array([[0, 0], [1, 0], [2, 0], [1, 1], [2, 1]], float), np.array([[0, 1, 3], [1, 2, 3], [2, 4, 3]]))
    (HERE / "three_squares_bitmap.txt").write_text("0 1\n1 1\n")
    np.savetxt(HERE / "four_points.txt", [[0, 0], [0.5, 0.8], [0.5, -0.8], [1, 0]], fmt="%.17g")

    write_mesh("pi_square16", *crossed_square(16, np.pi))
    write_mesh("pi_square8", *crossed_square(8, np.pi))
    write_mesh("darcy_square", *unstructured_square())
    write_mesh("four_holes", *lattice_region(four_holes, 1 / 30))
    write_mesh("disk", *lattice_region(radial(-1.0, 0.5), 1 / 20))
    write_mesh("annulus", *lattice_region(radial(0.2, 0.5), 1 / 20))

    angle = 2 * np.pi * np.arange(20) / 20
    np.savetxt(HERE / "circle20_points.txt", np.c_[np.cos(angle), np.sin(angle)], fmt="%.17g")
    g = np.linspace(0.0, 1.0, 6)
    x, y = np.meshgrid(g, g)
    np.savetxt(HERE / "grid_points.txt", np.c_[x.ravel(), y.ravel()], fmt="%.17g")
    np.savetxt(HERE / "uniform300_points.txt", np.random.default_rng(42).uniform(size=(300, 2)), fmt="%.17g")

    (HERE / "rank_path.txt").write_text("0 1 1\n1 2 1\n")
    (HERE / "rank_triangle.txt").write_text("0 1 1\n1 2 1\n0 2 2\n")
    (HERE / "rank_cycle.txt").write_text("0 1 1\n1 2 1\n2 0 1\n")


if __name__ == "__main__":
    main()

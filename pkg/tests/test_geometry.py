import numpy as np
import pytest

from deckit import barycentric_differentials, build_complex, circumcenter, dual_volumes, simplex_volume
from deckit.errors import DegenerateSimplexError, MeshError
from deckit.geometry import barycentric_gradients, degenerate_mask, primal_volumes
from deckit.io import load_mesh
from generators import mesh_paths, random_delaunay
from oracles import cayley_menger_volume, gradients_by_lstsq, random_simplex


class TestVolume:
    def test_examples(self):
        assert simplex_volume([[0, 0], [2, 0]]) == pytest.approx(2.0)
        assert simplex_volume([[0, 0], [1, 0], [0, 1]]) == pytest.approx(0.5)
        assert simplex_volume(np.vstack([np.zeros(3), np.eye(3)])) == pytest.approx(1 / 6)

    def test_degenerate_is_zero(self):
        assert simplex_volume([[0, 0], [1, 1], [2, 2]]) == pytest.approx(0.0, abs=1e-15)
        assert degenerate_mask(np.array([[0, 0], [1, 1], [2, 2.0]]))[0]

    def test_cayley_menger_oracle(self):
        rng = np.random.default_rng(51)
        for _ in range(200):
            p = int(rng.integers(1, 5))
            dim = int(rng.integers(p, 6))
            pts = random_simplex(rng, p, dim)
            assert simplex_volume(pts) == pytest.approx(cayley_menger_volume(pts), rel=1e-10)

    def test_stacked(self):
        rng = np.random.default_rng(52)
        pts = rng.standard_normal((7, 3, 2))
        vols = simplex_volume(pts)
        assert vols.shape == (7,)
        np.testing.assert_allclose(vols, [cayley_menger_volume(p) for p in pts], rtol=1e-10)


class TestCircumcenter:
    def test_right_triangle(self):
        cc = circumcenter([[0, 0], [2, 0], [0, 2]])
        np.testing.assert_allclose(cc.c, [1, 1], atol=1e-14)
        assert cc.R == pytest.approx(np.sqrt(2))
        assert cc.b.sum() == pytest.approx(1.0, abs=1e-12)

    def test_segment_midpoint(self):
        cc = circumcenter([[1.0, 2.0, 3.0], [3.0, 6.0, -1.0]])
        np.testing.assert_allclose(cc.c, [2.0, 4.0, 1.0])

    def test_obtuse(self):
        pts = np.array([[0, 0], [4, 0], [1, 1]], float)
        cc = circumcenter(pts)
        dist = np.linalg.norm(pts - cc.c, axis=1)
        assert np.max(np.abs(dist - cc.R)) < 1e-9 * cc.R

    def test_in_affine_hull(self):
        rng = np.random.default_rng(53)
        pts = random_simplex(rng, 2, 4)
        cc = circumcenter(pts)
        # c - v0 lies in the span of the edge vectors
        edges = (pts[1:] - pts[0]).T
        coef = np.linalg.lstsq(edges, cc.c - pts[0], rcond=None)[0]
        np.testing.assert_allclose(edges @ coef, cc.c - pts[0], atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateSimplexError):
            circumcenter([[0, 0], [1, 1], [2, 2]])


class TestBarycentric:
    def test_unit_triangle(self):
        bd = barycentric_differentials([[0, 0], [1, 0], [0, 1]])
        np.testing.assert_allclose(bd.X, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(bd.grad_mu_0, [-1, -1], atol=1e-14)

    def test_segment(self):
        bd = barycentric_differentials([[0, 0], [2, 0]])
        np.testing.assert_allclose(bd.X[:, 0], [0.5, 0])
        np.testing.assert_allclose(bd.grad_mu_0, [-0.5, 0])

    def test_pseudoinverse_property(self):
        rng = np.random.default_rng(54)
        for _ in range(20):
            pts = random_simplex(rng, 2, 3)
            bd = barycentric_differentials(pts)
            v0 = (pts[1:] - pts[0]).T
            np.testing.assert_allclose(bd.X.T @ v0, np.eye(2), atol=1e-9)
            np.testing.assert_allclose(bd.all, gradients_by_lstsq(pts), atol=1e-9)

    def test_ill_conditioned_uses_qr(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1e-5]])
        grads = barycentric_gradients(pts)
        np.testing.assert_allclose(grads, gradients_by_lstsq(pts), atol=1e-9 * np.abs(grads).max())

    def test_degenerate(self):
        with pytest.raises(DegenerateSimplexError):
            barycentric_differentials([[0, 0], [1, 0], [2, 0]])


class TestDualVolumes:
    def test_1d(self):
        c = build_complex([[0.0], [1.0], [2.0]], [[0, 1], [1, 2]])
        duals = dual_volumes(c)
        np.testing.assert_allclose(duals[0], [0.5, 1.0, 0.5])
        np.testing.assert_allclose(duals[1], [1.0, 1.0])

    def test_equilateral(self):
        pts = np.array([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])
        c = build_complex(pts, [[0, 1, 2]])
        np.testing.assert_allclose(dual_volumes(c)[1], 1 / (2 * np.sqrt(3)))
        np.testing.assert_allclose(dual_volumes(c)[0].sum(), np.sqrt(3) / 4)

    def test_obtuse_pair_partition(self):
        # an obtuse and an acute triangle on a shared edge, opposite angles summing
        # to less than 180 degrees: Delaunay but not well-centered
        pts = np.array([[0, 0], [4, 0], [2, 0.8], [2, -6.0]])
        c = build_complex(pts, [[0, 1, 2], [1, 0, 3]])
        duals = dual_volumes(c)
        assert np.all(duals[0] > 0)
        assert duals[0].sum() == pytest.approx(primal_volumes(c, 2).sum(), rel=1e-12)
        # shared edge: circumcenters at y = -2.1 (far side) and y = -8/3 (near side)
        shared = c.index_of(1, [[0, 1]])[0]
        assert duals[1][shared] == pytest.approx(8 / 3 - 2.1, rel=1e-12)
        assert not duals.negative

    def test_negative_duals_reported(self):
        pts = np.array([[0, 0], [4, 0], [2, 0.8], [2, -0.8]])
        c = build_complex(pts, [[0, 1, 2], [1, 0, 3]])
        duals = dual_volumes(c, check_boundary=False)
        shared = c.index_of(1, [[0, 1]])[0]
        assert duals[1][shared] == pytest.approx(-4.2, rel=1e-12)
        np.testing.assert_array_equal(duals.negative[1], [shared])
        assert duals[0].sum() == pytest.approx(primal_volumes(c, 2).sum(), rel=1e-12)

    def test_boundary_violation(self):
        pts = np.array([[0, 0], [4, 0], [2, 0.8]], float)
        c = build_complex(pts, [[0, 1, 2]])
        with pytest.raises(MeshError, match="boundary face"):
            dual_volumes(c)

    def test_non_manifold(self):
        pts = np.array([[0, 0], [1, 0], [0, 1], [0, -1], [1, 1]], float)
        c = build_complex(pts, [[0, 1, 2], [0, 1, 3], [0, 1, 4]])
        with pytest.raises(MeshError, match="non-manifold"):
            dual_volumes(c)

    def test_tetrahedra_partition(self):
        rng = np.random.default_rng(55)
        pts, tets = random_delaunay(rng, 25, 3)
        c = build_complex(pts, tets)
        duals = dual_volumes(c, check_boundary=False)
        total = primal_volumes(c, 3).sum()
        assert duals[0].sum() == pytest.approx(total, rel=1e-9)

    @pytest.mark.parametrize("name", ["five_vertex", "pi_square8", "darcy_square", "annulus"])
    def test_fixture_partition(self, name):
        c = load_mesh(*mesh_paths(name))
        duals = dual_volumes(c)
        assert duals[0].sum() == pytest.approx(primal_volumes(c, 2).sum(), rel=1e-9)
        # each triangle's area also splits over its three edges
        edge_part = (duals[1] * primal_volumes(c, 1)).sum() / 2
        assert edge_part == pytest.approx(primal_volumes(c, 2).sum(), rel=1e-9)

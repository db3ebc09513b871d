import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxlab import algebra as la
from fluxlab import cells

MESHES = {
    "interval(2)": lambda: cells.interval(2),
    "interval(6)": lambda: cells.interval(6),
    "circle(8)": lambda: cells.circle(8),
    "disk(1)": lambda: cells.disk(1),
    "disk(2)": lambda: cells.disk(2),
    "annulus(1)": lambda: cells.annulus(1),
    "annulus(2)": lambda: cells.annulus(2),
}


@pytest.fixture(scope="module", params=list(MESHES))
def mesh(request):
    return MESHES[request.param]()


class TestBuilders:
    def test_interval_counts(self):
        cx = cells.interval(2)
        assert (cx.n_vertices, cx.n_edges) == (3, 2)
        assert list(cx.boundary.vertex_ids) == [0, 2]

    def test_circle_no_boundary(self):
        cx = cells.circle(8)
        assert cx.n_vertices == cx.n_edges == 8
        assert not cx.has_boundary

    def test_disk_euler_characteristic(self):
        for r in (1, 2, 3):
            cx = cells.disk(r)
            assert cx.n_vertices - cx.n_edges + cx.n_faces == 1

    def test_annulus_euler_and_boundaries(self):
        cx = cells.annulus(2)
        assert cx.n_vertices - cx.n_edges + cx.n_faces == 0
        assert len(np.unique(cx.boundary.components)) == 2

    def test_rejections(self):
        with pytest.raises(cells.MeshError):
            cells.interval(1)
        with pytest.raises(cells.MeshError):
            cells.disk(0)
        with pytest.raises(cells.MeshError):
            cells.annulus(0)
        with pytest.raises(cells.MeshError):
            cells.build("torus", 3)

    def test_invariants(self, mesh):
        if mesh.dim == 2:
            assert np.max(np.abs(mesh.D1 @ mesh.D0)) == 0  # integer identity
            counts = np.abs(mesh.D1).sum(axis=0)
            assert set(np.unique(counts)) <= {1, 2}
        for k, v in mesh.volumes.items():
            assert np.all(np.asarray(v) > 0)
        for k, v in mesh.dual_volumes.items():
            assert np.all(np.asarray(v) > 0)

    def test_boundary_loops_odd(self):
        for cx in (cells.disk(1), cells.disk(3), cells.annulus(2)):
            for comp in np.unique(cx.boundary.components):
                assert np.sum(cx.boundary.components == comp) % 2 == 1

    def test_components(self):
        assert cells.disk(1).n_components == 1
        assert cells.interval(4).n_components == 1


class TestDifferential:
    def test_1d_signed_difference(self):
        cx = cells.interval(2)
        xi = cells.Cochain(cx, 0, "scalar", np.array([[1.0], [0.0], [2.0]]))
        assert np.allclose(cells.d(xi).data.ravel(), [-1.0, 2.0])

    def test_constant_gives_zero(self):
        cx = cells.disk(1)
        xi = cells.Cochain(cx, 0, "scalar", np.ones((cx.n_vertices, 1)))
        assert np.max(np.abs(cells.d(xi).data)) == 0.0

    def test_dd_zero_exact(self):
        cx = cells.disk(2)
        rng = np.random.default_rng(0)
        su2 = la.su2()
        xi = cells.random_cochain(cx, 0, "algebra", su2, rng)
        assert np.max(np.abs(cells.d(cells.d(xi)).data)) < 1e-13

    def test_top_degree_rejected(self):
        cx = cells.interval(3)
        a = cells.zeros(cx, 1, "scalar")
        with pytest.raises(cells.MeshError):
            cells.d(a)


class TestTwisted:
    def test_abelian_reduces_to_d(self):
        cx = cells.disk(1)
        rng = np.random.default_rng(1)
        u1 = la.u1()
        A = cells.random_cochain(cx, 1, "algebra", u1, rng)
        xi = cells.random_cochain(cx, 0, "algebra", u1, rng)
        assert np.allclose(cells.d_twisted(A, xi).data, cells.d(xi).data)

    def test_zero_background_reduces_to_d(self):
        cx = cells.disk(1)
        rng = np.random.default_rng(2)
        su2 = la.su2()
        A = cells.zeros(cx, 1, "algebra", su2)
        xi = cells.random_cochain(cx, 0, "algebra", su2, rng)
        assert np.allclose(cells.d_twisted(A, xi).data, cells.d(xi).data)

    def test_constant_parameter_pure_bracket(self):
        cx = cells.interval(4)
        rng = np.random.default_rng(3)
        su2 = la.su2()
        A = cells.random_cochain(cx, 1, "algebra", su2, rng)
        const = np.array([0.3, -1.0, 0.2])
        xi = cells.Cochain(cx, 0, "algebra", np.tile(const, (cx.n_vertices, 1)), su2)
        out = cells.d_twisted(A, xi)
        for e in range(cx.n_edges):
            assert np.allclose(out.data[e], la.bracket(su2, A.data[e], const))


class TestGreenPairing:
    def test_1d_worked_example(self):
        cx = cells.interval(2)
        u1 = la.u1()
        E = cells.Cochain(cx, 1, "dual", np.array([[3.0], [3.0]]), u1)
        bulk, bdry = cells.green_pairing(E)
        assert np.allclose(bulk.data, 0.0)
        assert np.allclose(bdry.ravel(), [3.0, 3.0])
        # total pairing telescopes: sum E dxi = 3(0-1) + 3(2-0) = 3
        xi = cells.Cochain(cx, 0, "algebra", np.array([[1.0], [0.0], [2.0]]), u1)
        assert abs(float(np.sum(E.data * cells.d(xi).data)) - 3.0) < 1e-14

    def test_zero_field(self):
        cx = cells.disk(1)
        su2 = la.su2()
        bulk, bdry = cells.green_pairing(cells.zeros(cx, 1, "dual", su2))
        assert np.max(np.abs(bulk.data)) == 0.0 and np.max(np.abs(bdry)) == 0.0

    def test_closed_circle_no_boundary_term(self):
        cx = cells.circle(6)
        rng = np.random.default_rng(4)
        u1 = la.u1()
        E = cells.random_cochain(cx, 1, "dual", u1, rng)
        bulk, bdry = cells.green_pairing(E)
        assert bdry.shape[0] == 0
        xi = cells.random_cochain(cx, 0, "algebra", u1, rng)
        lhs = float(np.sum(E.data * cells.d(xi).data))
        assert abs(lhs + float(np.sum(bulk.data * xi.data))) < 1e-13

    def test_identity_100_random_triples_every_mesh(self, mesh):
        rng = np.random.default_rng(5)
        su2 = la.su2()
        worst = 0.0
        for _ in range(100):
            E = cells.random_cochain(mesh, 1, "dual", su2, rng)
            xi = cells.random_cochain(mesh, 0, "algebra", su2, rng)
            A = cells.random_cochain(mesh, 1, "algebra", su2, rng)
            worst = max(worst, cells.green_identity_residual(E, xi, A))
        assert worst <= 1e-13

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_identity_hypothesis_seeds(self, seed):
        cx = cells.disk(1)
        rng = np.random.default_rng(seed)
        u1 = la.u1()
        E = cells.random_cochain(cx, 1, "dual", u1, rng, scale=10.0)
        xi = cells.random_cochain(cx, 0, "algebra", u1, rng, scale=10.0)
        A = cells.random_cochain(cx, 1, "algebra", u1, rng, scale=10.0)
        assert cells.green_identity_residual(E, xi, A) <= 1e-11


class TestTraces:
    def test_1d_adjacent_edge_value(self):
        cx = cells.interval(3)
        u1 = la.u1()
        E = cells.Cochain(cx, 1, "dual", np.array([[5.0], [6.0], [7.0]]), u1)
        t = cells.trace_t(E)
        assert np.allclose(t.ravel(), [5.0, 7.0])

    def test_support_away_from_boundary(self):
        cx = cells.disk(2)
        su2 = la.su2()
        a = cells.zeros(cx, 1, "algebra", su2)
        # put support only on edges with no boundary vertex
        binterior = np.setdiff1d(np.arange(cx.n_edges), cx.boundary.cell_ids)
        a.data[binterior[0]] = 1.0
        t = cells.trace_t(a)
        assert np.max(np.abs(t)) == 0.0

    def test_2d_restriction(self):
        cx = cells.disk(1)
        rng = np.random.default_rng(6)
        su2 = la.su2()
        a = cells.random_cochain(cx, 1, "algebra", su2, rng)
        assert np.allclose(cells.trace_t(a), a.data[cx.boundary.cell_ids])

    def test_trace_commutes_with_d(self):
        cx = cells.disk(2)
        rng = np.random.default_rng(7)
        su2 = la.su2()
        xi = cells.random_cochain(cx, 0, "algebra", su2, rng)
        bc = cx.boundary_complex()
        tb = cells.Cochain(bc, 0, "algebra", cells.trace_t(xi), su2)
        assert np.max(np.abs(cells.trace_t(cells.d(xi)) - cells.d(tb).data)) == 0.0

    def test_normal_trace_1d_outward(self):
        cx = cells.interval(2)
        u1 = la.u1()
        a = cells.Cochain(cx, 1, "algebra", np.array([[2.0], [3.0]]), u1)
        n = cells.trace_n(a)
        assert np.allclose(n.ravel(), [-2.0, 3.0])

    def test_normal_trace_2d_linear_field(self):
        # constant 1-form dx: normal component on the boundary is n_x per length
        cx = cells.disk(2)
        u1 = la.u1()
        data = np.zeros((cx.n_edges, 1))
        for e in range(cx.n_edges):
            vs = np.nonzero(cx.D0[e])[0]
            head = int(np.nonzero(cx.D0[e] == 1)[0][0])
            tail = int(np.nonzero(cx.D0[e] == -1)[0][0])
            data[e, 0] = cx.points[head, 0] - cx.points[tail, 0]
        a = cells.Cochain(cx, 1, "algebra", data, u1)
        n = cells.trace_n(a)
        b = cx.boundary
        for i, e in enumerate(b.cell_ids):
            vs = np.nonzero(cx.D0[e])[0]
            mid = cx.points[vs].mean(axis=0)
            outward = mid / np.linalg.norm(mid)  # disk: radial normal
            expect = outward[0] * cx.volumes[1][e]
            assert abs(n[i, 0] - expect) < 0.15  # first-order Whitney proxy

    def test_higher_degree_not_pinned(self):
        cx = cells.disk(1)
        rng = np.random.default_rng(8)
        f = cells.random_cochain(cx, 2, "algebra", la.su2(), rng)
        with pytest.raises(NotImplementedError):
            cells.trace_t(f)


class TestInner:
    def test_unit_basis_mass_coefficient(self):
        cx = cells.disk(1)
        u1 = la.u1()
        a = cells.zeros(cx, 1, "algebra", u1)
        a.data[3, 0] = 1.0
        m = cells.mass(cx, 1, "algebra")
        assert abs(cells.inner(a, a) - m[3]) < 1e-14

    def test_orthogonal_basis_cochains(self):
        cx = cells.interval(4)
        u1 = la.u1()
        a = cells.zeros(cx, 1, "algebra", u1)
        b = cells.zeros(cx, 1, "algebra", u1)
        a.data[0, 0] = 1.0
        b.data[2, 0] = 1.0
        assert cells.inner(a, b) == 0.0

    def test_uniform_dual_field_total_length(self):
        N = 7
        cx = cells.interval(N)
        u1 = la.u1()
        one = cells.Cochain(cx, 1, "dual", np.ones((N, 1)), u1)
        assert abs(cells.inner(one, one) - N * (1.0 / N)) < 1e-14

    def test_positive_definite(self, mesh):
        for deg in range(mesh.dim + 1):
            m = cells.mass(mesh, deg, "algebra")
            assert np.min(m) > 0
            md = cells.mass(mesh, deg, "dual")
            assert np.min(md) > 0

    def test_symmetry(self):
        cx = cells.disk(1)
        rng = np.random.default_rng(9)
        su2 = la.su2()
        a = cells.random_cochain(cx, 1, "algebra", su2, rng)
        b = cells.random_cochain(cx, 1, "algebra", su2, rng)
        assert abs(cells.inner(a, b) - cells.inner(b, a)) < 1e-13


class TestSerialization:
    def test_roundtrip(self, mesh):
        doc = cells.to_json(mesh)
        back = cells.from_json(doc)
        assert back.dim == mesh.dim
        assert np.array_equal(back.D0, mesh.D0)
        if mesh.dim == 2:
            assert np.array_equal(back.D1, mesh.D1)
        for k in mesh.volumes:
            assert np.allclose(back.volumes[k], mesh.volumes[k])
        assert np.array_equal(back.boundary.cell_ids, mesh.boundary.cell_ids)


class TestBoundaryComplex:
    def test_disk_boundary_is_circle(self):
        cx = cells.disk(2)
        bc = cx.boundary_complex()
        assert bc.n_vertices == bc.n_edges == cx.boundary.n_cells
        assert not bc.has_boundary

    def test_routing_even_loop_rejected(self):
        # hand-build a square (even boundary loop): density routing must raise
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        tris = [(0, 1, 2), (0, 2, 3)]
        cx = cells._complex_from_triangles(pts, tris, "square")
        u1 = la.u1()
        E = cells.Cochain(cx, 1, "dual", np.arange(cx.n_edges, dtype=float).reshape(-1, 1), u1)
        with pytest.raises(cells.MeshError, match="odd"):
            cells.green_pairing(E)

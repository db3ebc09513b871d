import numpy as np
import pytest

from fluxlab import algebra as la
from fluxlab import cells, models
from fluxlab import phasespace as ps


def make(name, mesh="disk", n=1):
    spec = models.ModelSpec(name=name, mesh=mesh, mesh_parameter=n)
    return models.instantiate(spec)


EXACT_FLOW_MODELS = [
    ("maxwell", "interval", 5),
    ("maxwell", "disk", 1),
    ("maxwell", "circle", 6),
    ("ym_su2", "interval", 4),
    ("ym_su2", "disk", 1),
    ("chern_simons_disk", "disk", 1),
]


class TestOmega:
    def test_antisymmetry_and_canonical_pair(self):
        m = make("maxwell", "interval", 4)
        rng = np.random.default_rng(0)
        v = m.random_tangent(rng)
        w = m.random_tangent(rng)
        assert m.omega(v, v) == 0.0
        assert abs(m.omega(v, w) + m.omega(w, v)) < 1e-14
        # canonical pair on one edge with unit pairing
        a = m.unpack_tangent(np.zeros(m.phase_dim))
        b = m.unpack_tangent(np.zeros(m.phase_dim))
        a.dE.data[0, 0] = 1.0
        b.dA.data[0, 0] = 1.0
        assert m.omega(a, b) == 1.0

    def test_flat_map_is_signed_permutation(self):
        m = make("ym_su2", "interval", 3)
        Om = m.omega_matrix()
        assert np.allclose(np.abs(Om) @ np.ones(m.phase_dim), 1.0)
        assert np.allclose(Om + Om.T, 0.0)


class TestRho:
    def test_zero_parameter(self):
        m = make("ym_su2", "disk", 1)
        rng = np.random.default_rng(1)
        phi = m.random_point(rng)
        v = m.rho(cells.zeros(m.complex, 0, "algebra", m.algebra), phi)
        assert np.max(np.abs(m.pack_tangent(v))) == 0.0

    def test_abelian_electric_frozen(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(2)
        phi = m.random_point(rng)
        xi = m.random_parameter(rng)
        v = m.rho(xi, phi)
        assert np.max(np.abs(v.dE.data)) == 0.0
        assert np.allclose(v.dA.data, cells.d(xi).data)

    def test_constant_parameter_at_zero_background(self):
        m = make("ym_su2", "interval", 4)
        rng = np.random.default_rng(3)
        phi = m.reference()
        phi.E.data[:] = rng.standard_normal(phi.E.data.shape)
        const = np.array([1.0, -0.5, 2.0])
        xi = cells.Cochain(m.complex, 0, "algebra",
                           np.tile(const, (m.complex.n_vertices, 1)), m.algebra)
        v = m.rho(xi, phi)
        assert np.max(np.abs(v.dA.data)) == 0.0  # d xi = 0 and [0, xi] = 0
        for e in range(m.complex.n_edges):
            expect = m.algebra.adstar(const) @ phi.E.data[e]
            assert np.allclose(v.dE.data[e], expect)


class TestMomentum:
    def test_1d_worked_example(self):
        m = make("maxwell", "interval", 2)
        phi = m.reference()
        phi.E.data[:] = [[3.0], [3.0]]
        xi = cells.Cochain(m.complex, 0, "algebra", np.array([[1.0], [0.0], [2.0]]), m.algebra)
        mom = m.momentum(phi)
        assert abs(mom.bulk_pair(xi)) < 1e-14
        assert abs(mom.flux_pair(xi) + 3.0) < 1e-14
        assert abs(mom.total(xi) + 3.0) < 1e-14
        assert np.allclose(mom.flux_densities.ravel(), [3.0, 3.0])

    def test_zero_field(self):
        m = make("ym_su2", "disk", 1)
        mom = m.momentum(m.reference())
        assert np.max(np.abs(mom.vertex_coefficients)) == 0.0

    def test_closed_circle_pure_bulk(self):
        m = make("maxwell", "circle", 6)
        rng = np.random.default_rng(4)
        phi = m.random_point(rng)
        xi = m.random_parameter(rng)
        mom = m.momentum(phi)
        assert mom.flux_densities.shape[0] == 0
        assert abs(mom.flux_pair(xi)) == 0.0
        assert abs(mom.total(xi) - mom.bulk_pair(xi)) < 1e-14

    @pytest.mark.parametrize("name,mesh,n", [
        ("maxwell", "disk", 1), ("ym_su2", "disk", 1), ("ym_su2", "interval", 5),
        ("chern_simons_disk", "disk", 2),
    ])
    def test_exact_decomposition_and_rank0(self, name, mesh, n):
        m = make(name, mesh, n)
        rng = np.random.default_rng(5)
        for _ in range(30):
            phi = m.random_point(rng)
            xi = m.random_parameter(rng)
            assert ps.decomposition_residual(m, phi, xi) <= 1e-13 * max(
                1.0, abs(m.momentum(phi).total(xi)))
            assert ps.bulk_rank0_defect(m, phi, xi) == 0.0

    def test_momentum_shift_hook(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(6)
        phi = m.random_point(rng)
        xi = m.random_parameter(rng)
        base = m.momentum(phi).flux_pair(xi)
        m.momentum_shift = np.ones((m.complex.boundary.n_vertices, m.gdim))
        shifted = m.momentum(phi).flux_pair(xi)
        m.momentum_shift = None
        expect = float(np.sum(xi.data[m.complex.boundary.vertex_ids]))
        assert abs(shifted - base - expect) < 1e-13


class TestFlowResidual:
    @pytest.mark.parametrize("name,mesh,n", EXACT_FLOW_MODELS)
    def test_exact_models(self, name, mesh, n):
        m = make(name, mesh, n)
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(100):
            phi = m.random_point(rng)
            xi = m.random_parameter(rng)
            v = m.random_tangent(rng)
            worst = max(worst, ps.flow_residual(m, phi, xi, v))
        assert worst <= 1e-12

    def test_zero_cases(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(8)
        phi = m.random_point(rng)
        zero_xi = cells.zeros(m.complex, 0, "algebra", m.algebra)
        assert ps.flow_residual(m, phi, zero_xi, m.random_tangent(rng)) == 0.0
        v0 = m.unpack_tangent(np.zeros(m.phase_dim))
        assert ps.flow_residual(m, phi, m.random_parameter(rng), v0) == 0.0

    def test_nonabelian_cs_defect_reported(self):
        cs = models.ChernSimonsModel(cells.disk(1), la.su2())
        rng = np.random.default_rng(9)
        defect = cs.flow_defect_bound(cs.random_point(rng), rng)
        assert defect > 1e-6  # genuinely obstructed, reported rather than hidden


class TestAdjustedFlux:
    def test_vanishes_at_reference(self):
        m = make("ym_su2", "disk", 1)
        xi = m.random_parameter(np.random.default_rng(10))
        assert ps.adjusted_flux(m, m.reference(), xi) == 0.0

    def test_ym_reference_has_zero_flux(self):
        m = make("maxwell", "interval", 2)
        phi = m.reference()
        phi.E.data[:] = [[3.0], [3.0]]
        xi = cells.Cochain(m.complex, 0, "algebra", np.array([[1.0], [0.0], [2.0]]), m.algebra)
        assert abs(ps.adjusted_flux(m, phi, xi) + 3.0) < 1e-14


class TestAlgebraCocycle:
    def test_ym_strong_equivariance_at_reference(self):
        for name in ("maxwell", "ym_su2"):
            m = make(name, "disk", 1)
            rng = np.random.default_rng(11)
            xi, eta = m.random_parameter(rng), m.random_parameter(rng)
            assert abs(ps.algebra_cocycle_k(m, xi, eta)) <= 1e-12

    def test_abelian_phi_independence_exact(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(12)
        xi, eta = m.random_parameter(rng), m.random_parameter(rng)
        assert ps.cocycle_phi_dependence(m, xi, eta, rng, samples=6) <= 1e-12
        cs = make("chern_simons_disk", "disk", 1)
        xi2, eta2 = cs.random_parameter(rng), cs.random_parameter(rng)
        assert ps.cocycle_phi_dependence(cs, xi2, eta2, rng, samples=6) <= 1e-12

    def test_nonabelian_phi_dependence_shrinks_with_fields(self):
        # the su2 defect is quadratic in the field amplitude
        m = make("ym_su2", "interval", 4)
        rng = np.random.default_rng(13)
        xi, eta = m.random_parameter(rng), m.random_parameter(rng)
        big = ps.cocycle_phi_dependence(m, xi, eta, np.random.default_rng(1), 6, scale=1.0)
        small = ps.cocycle_phi_dependence(m, xi, eta, np.random.default_rng(1), 6, scale=1e-3)
        assert small < 1e-4 * max(big, 1e-12)

    def test_cs_fourier_modes_approach_continuum(self):
        errs = []
        for r in (2, 4, 8):
            cs = models.ChernSimonsModel(cells.disk(r), la.u1())
            cx = cs.complex
            ang = np.arctan2(cx.points[:, 1], cx.points[:, 0])
            b = cx.boundary.vertex_ids
            xi = cells.zeros(cx, 0, "algebra", cs.algebra)
            eta = cells.zeros(cx, 0, "algebra", cs.algebra)
            xi.data[b, 0] = np.cos(ang[b])
            eta.data[b, 0] = np.sin(ang[b])
            val = ps.algebra_cocycle_k(cs, xi, eta)
            # exact antisymmetry for boundary-supported parameters
            assert abs(val + ps.algebra_cocycle_k(cs, eta, xi)) < 1e-12
            errs.append(abs(val - np.pi))
        assert errs[0] > errs[1] > errs[2]
        rate = np.log(errs[1] / errs[2]) / np.log((2 * 8 + 3) / (2 * 4 + 3))
        assert 1.5 < rate < 2.5

    def test_interior_supported_parameters_silent(self):
        cs = make("chern_simons_disk", "disk", 2)
        cx = cs.complex
        rng = np.random.default_rng(14)
        xi = cells.zeros(cx, 0, "algebra", cs.algebra)
        xi.data[cx.interior_vertex_ids] = rng.standard_normal((len(cx.interior_vertex_ids), 1))
        eta = cs.random_parameter(rng)
        assert abs(ps.algebra_cocycle_k(cs, eta, xi)) <= 1e-12


class TestGroupCocycle:
    def test_identity_transformation(self):
        m = make("chern_simons_disk", "disk", 1)
        zero = cells.zeros(m.complex, 0, "algebra", m.algebra)
        assert np.max(np.abs(ps.group_cocycle_c(m, zero))) == 0.0

    def test_abelian_cs_exact_formula(self):
        m = make("chern_simons_disk", "disk", 2)
        rng = np.random.default_rng(15)
        lam = m.random_parameter(rng)
        c = ps.group_cocycle_c(m, lam)
        # oracle: A. + d lambda evaluated through the flux coefficients directly
        moved = models.PhasePoint(
            cells.Cochain(m.complex, 1, "algebra",
                          m.reference().A.data + cells.d(lam).data, m.algebra), None)
        oracle = ps.adjusted_flux_vertex(m, moved)
        assert np.max(np.abs(c - oracle)) < 1e-12
        assert np.max(np.abs(c)) > 1e-8  # genuinely nonzero

    def test_ym_flux_unchanged(self):
        for name in ("maxwell", "ym_su2"):
            m = make(name, "disk", 1)
            rng = np.random.default_rng(16)
            assert np.max(np.abs(ps.group_cocycle_c(m, m.random_parameter(rng)))) <= 1e-12

    def test_abelian_group_identity_exact(self):
        m = make("chern_simons_disk", "disk", 1)
        rng = np.random.default_rng(17)
        xi, eta = m.random_parameter(rng), m.random_parameter(rng)
        assert ps.group_cocycle_identity_defect(m, xi, eta) <= 1e-12


class TestGaugeFlow:
    def test_flow_derivative_is_rho(self):
        m = make("ym_su2", "disk", 1)
        rng = np.random.default_rng(18)
        phi = m.random_point(rng)
        xi = m.random_parameter(rng, 0.5)
        eps = 1e-6
        num = (m.pack_point(ps.gauge_flow(m, phi, xi, eps))
               - m.pack_point(ps.gauge_flow(m, phi, xi, -eps))) / (2 * eps)
        assert np.max(np.abs(num - m.pack_tangent(m.rho(xi, phi)))) < 1e-8

    def test_flow_composes_along_one_parameter_subgroup(self):
        m = make("ym_su2", "interval", 3)
        rng = np.random.default_rng(19)
        phi = m.random_point(rng)
        xi = m.random_parameter(rng, 0.5)
        a = ps.gauge_flow(m, ps.gauge_flow(m, phi, xi, 0.3), xi, 0.7)
        b = ps.gauge_flow(m, phi, xi, 1.0)
        assert np.max(np.abs(m.pack_point(a) - m.pack_point(b))) < 1e-12

    def test_abelian_flow_is_shift(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(20)
        phi = m.random_point(rng)
        lam = m.random_parameter(rng)
        moved = ps.gauge_flow(m, phi, lam)
        assert np.allclose(moved.A.data, phi.A.data + cells.d(lam).data)
        assert np.allclose(moved.E.data, phi.E.data)


class TestEquivarianceAndTangency:
    def test_bulk_equivariance_abelian_exact(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(21)
        for _ in range(10):
            phi = m.random_point(rng)
            eta, xi = m.random_parameter(rng), m.random_parameter(rng)
            assert ps.bulk_equivariance_defect(m, phi, eta, xi) <= 1e-12

    def test_bulk_equivariance_su2_second_order_in_fields(self):
        m = make("ym_su2", "interval", 4)
        xi = m.random_parameter(np.random.default_rng(22))
        eta = m.random_parameter(np.random.default_rng(23))
        def defect(scale):
            rng = np.random.default_rng(24)
            phi = m.random_point(rng, scale)
            return ps.bulk_equivariance_defect(m, phi, eta, xi)
        assert defect(1e-3) < 1e-4 * max(defect(1.0), 1e-12)

    def test_orbit_tangency_abelian_exact(self):
        m = make("maxwell", "disk", 1)
        rng = np.random.default_rng(25)
        from fluxlab import reduction as red
        chart = red.OnShellChart.at(m)
        for _ in range(10):
            phi = chart.random_point(rng)
            xi = m.random_parameter(rng)
            assert ps.orbit_tangency_defect(m, phi, xi) <= 1e-10

    def test_orbit_tangency_su2_at_flat_background(self):
        m = make("ym_su2", "disk", 1)
        rng = np.random.default_rng(26)
        from fluxlab import reduction as red
        chart = red.OnShellChart.at(m)  # A = 0 background
        for _ in range(5):
            phi = chart.random_point(rng)
            xi = m.random_parameter(rng)
            assert ps.orbit_tangency_defect(m, phi, xi) <= 1e-10


class TestSerialization:
    def test_phase_point_json_roundtrip(self):
        import json
        m = make("ym_su2", "disk", 1)
        rng = np.random.default_rng(27)
        phi = m.random_point(rng)
        doc = json.dumps({
            "A": {str(e): phi.A.data[e].tolist() for e in range(m.complex.n_edges)},
            "E": {str(e): phi.E.data[e].tolist() for e in range(m.complex.n_edges)},
        })
        back = json.loads(doc)
        A2 = np.array([back["A"][str(e)] for e in range(m.complex.n_edges)])
        assert np.allclose(A2, phi.A.data)

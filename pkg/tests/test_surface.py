import math

import numpy as np
import pytest

from conftest import make_surface
from ruledsim.errors import (CylindricalSurfaceError, ParseError,
                             RegularityError, SingularPointError)
from ruledsim.fileio import (parse_surface_definition, read_sampled_surface,
                             write_sampled_surface)
from ruledsim.frame import frenet_frame, tangent_angle


class TestEvaluate:
    def test_helicoid_points(self, helicoid):
        for u, v in ((0.0, 0.0), (1.0, 2.0), (3.5, -1.25)):
            assert np.allclose(helicoid.point(u, v),
                               [v * math.cos(u), v * math.sin(u), u], atol=1e-14)

    def test_base_at_v_zero(self, hyperboloid):
        g = hyperboloid.grid()
        assert np.allclose(hyperboloid.point(g, np.zeros_like(g)),
                           hyperboloid.base.point(g))

    def test_affine_in_v(self, hyperboloid):
        u = 1.1
        p0 = hyperboloid.point(u, 0.0)
        p1 = hyperboloid.point(u, 1.0)
        p2 = hyperboloid.point(u, 2.0)
        assert np.allclose(p2 - p1, p1 - p0, atol=1e-14)


class TestNormals:
    def test_helicoid_normal_along_base(self, helicoid):
        for u in (0.0, 0.7, 2.4):
            assert np.allclose(helicoid.unit_normal(u, 0.0),
                               [-math.sin(u), math.cos(u), 0.0], atol=1e-14)

    def test_unit_length_and_tangency(self, hyperboloid):
        g = hyperboloid.grid()
        v = np.linspace(-2, 2, len(g))
        m = hyperboloid.unit_normal(g, v)
        assert np.max(np.abs(np.linalg.norm(m, axis=1) - 1.0)) <= 1e-12
        q = hyperboloid.director.point(g)
        assert np.max(np.abs(np.sum(m * q, axis=1))) <= 1e-12

    def test_limit_is_asymptotic_normal(self, helicoid, hyperboloid):
        # m(u, v) tends to -a as v -> +inf and to +a as v -> -inf
        for surf in (helicoid, hyperboloid):
            for u in (0.3, 2.0, 5.1):
                a = surf.asymptotic_normal(u)
                assert np.linalg.norm(surf.unit_normal(u, 1e6) + a) <= 1e-5
                assert np.linalg.norm(surf.unit_normal(u, -1e6) - a) <= 1e-5

    def test_asymptotic_normal_values(self, helicoid, helix_conoid):
        g = helicoid.grid()
        assert np.allclose(helicoid.asymptotic_normal(g),
                           np.broadcast_to([0.0, 0.0, 1.0], (len(g), 3)), atol=1e-14)
        g = helix_conoid.grid()
        assert np.allclose(helix_conoid.asymptotic_normal(g),
                           np.broadcast_to([0.0, 0.0, 1.0], (len(g), 3)), atol=1e-13)

    def test_cylinder_asymptotic_error(self, cylinder):
        with pytest.raises(CylindricalSurfaceError):
            cylinder.asymptotic_normal(1.0)

    def test_singular_point_error(self, tangent_developable):
        # the edge of regression is singular: r_u x r_v = 0 at v = 0
        with pytest.raises(SingularPointError):
            tangent_developable.unit_normal(1.0, 0.0)


class TestDistributionParameter:
    def test_helicoid_is_one(self, helicoid):
        d = helicoid.distribution_parameter(helicoid.grid())
        assert np.max(np.abs(d - 1.0)) <= 1e-12

    def test_helix_conoid_is_one(self, helix_conoid):
        d = helix_conoid.distribution_parameter(helix_conoid.grid())
        assert np.max(np.abs(d - 1.0)) <= 1e-12

    def test_tangent_developable_is_zero(self, tangent_developable):
        d = tangent_developable.distribution_parameter(tangent_developable.grid())
        assert np.max(np.abs(d)) <= 1e-12

    def test_cylindrical_ruling_error(self, cylinder):
        with pytest.raises(CylindricalSurfaceError):
            cylinder.distribution_parameter(0.5)


class TestStriction:
    def test_helicoid_striction_is_axis(self, helicoid):
        st = helicoid.striction()
        assert np.max(np.abs(st.v0)) <= 1e-14
        expected = np.column_stack([np.zeros_like(st.u), np.zeros_like(st.u), st.u])
        assert np.max(np.abs(st.points - expected)) <= 1e-14

    def test_helix_conoid_striction_is_base(self, helix_conoid):
        st = helix_conoid.striction()
        assert np.max(np.abs(st.v0)) <= 1e-13
        assert np.max(np.abs(st.points - helix_conoid.base.point(st.u))) <= 1e-13

    def test_samples_reconstruct_points(self, hyperboloid):
        st = hyperboloid.striction()
        for sample in st.samples()[::100]:
            f = hyperboloid.base.point(sample.u)
            q = hyperboloid.director.point(sample.u)
            assert np.allclose(sample.point, f + sample.v0 * q, atol=1e-14)

    def test_central_point_orthogonality(self, helicoid, hyperboloid):
        # <m(u, v0), a(u)> = 0 defines the central point
        for surf in (helicoid, hyperboloid):
            st = surf.striction()
            for i in range(0, len(st.u), 64):
                m = surf.unit_normal(float(st.u[i]), float(st.v0[i]))
                a = surf.asymptotic_normal(float(st.u[i]))
                assert abs(float(np.dot(m, a))) <= 1e-8

    def test_torsal_ruling_normal_is_asymptotic(self, tangent_developable):
        # on torsal rulings the tangent plane is constant along the ruling,
        # so away from the singular central point the normal is +-a itself
        st = tangent_developable.striction()
        for i in range(0, len(st.u), 128):
            m = tangent_developable.unit_normal(float(st.u[i]), float(st.v0[i]) + 1.0)
            a = tangent_developable.asymptotic_normal(float(st.u[i]))
            assert abs(abs(float(np.dot(m, a))) - 1.0) <= 1e-12

    def test_cylinder_striction_error(self, cylinder):
        with pytest.raises(CylindricalSurfaceError):
            cylinder.striction()

    def test_striction_property(self, hyperboloid):
        # <dq, dc> = 0 along the striction curve
        g = hyperboloid.grid()
        qd = hyperboloid.director.point(g, 1)
        cd = hyperboloid.striction_point(g, 1)
        assert np.max(np.abs(np.sum(qd * cd, axis=1))) <= 1e-12


class TestTorsalRulings:
    def test_helicoid_empty(self, helicoid):
        assert helicoid.torsal_rulings() == []

    def test_tangent_developable_everywhere(self, tangent_developable):
        roots = tangent_developable.torsal_rulings()
        assert len(roots) == len(tangent_developable.grid())

    def test_isolated_roots_against_grid_scan(self):
        # base (sin u, 0, cos u), director (cos u, sin u, 0):
        # det(df, q, dq) = -sin u, so the torsal rulings sit at multiples of pi
        surf = make_surface(("sin(u)", "0", "cos(u)"), ("cos(u)", "sin(u)", "0"),
                            -1.0, 7.0)
        roots = surf.torsal_rulings()
        expected = [0.0, math.pi, 2 * math.pi]
        assert len(roots) == len(expected)
        for r, e in zip(roots, expected):
            assert abs(r - e) <= 1e-9
            assert abs(float(surf.distribution_parameter(np.asarray(r)))) <= 1e-10
        # oracle: sign-change scan at 10x grid resolution brackets the same roots
        fine = np.linspace(surf.u_min, surf.u_max, 10 * surf.sample_count)
        det = surf._det_raw(fine)
        brackets = np.nonzero(np.sign(det[:-1]) * np.sign(det[1:]) < 0)[0]
        assert len(brackets) == len(roots)
        for i, r in zip(brackets, roots):
            assert fine[i] <= r <= fine[i + 1]


class TestClassify:
    def test_presets(self, helicoid, helix_conoid, hyperboloid,
                     tangent_developable, cylinder):
        c = helicoid.classify()
        assert (c.kind, c.conoid) == ("skew", True)
        c = helix_conoid.classify()
        assert (c.kind, c.conoid) == ("skew", True)
        c = hyperboloid.classify()
        assert (c.kind, c.conoid) == ("skew", False)
        c = tangent_developable.classify()
        assert (c.kind, c.conoid) == ("developable", False)
        assert c.max_abs_d <= 1e-8
        c = cylinder.classify()
        assert c.kind == "cylindrical" and c.conoid is None

    def test_developable_iff_tangent_equals_ruling(self, tangent_developable,
                                                   helicoid, hyperboloid):
        # forward direction of the torsal-ruling theorem at sample scale
        F = frenet_frame(tangent_developable)
        T = tangent_developable.striction_point(F.u, 1) / F.ds_du[:, None]
        assert np.max(np.linalg.norm(T - F.q, axis=1)) <= 1e-6
        for surf in (helicoid, hyperboloid):
            Fs = frenet_frame(surf)
            Ts = surf.striction_point(Fs.u, 1) / Fs.ds_du[:, None]
            assert np.min(np.linalg.norm(Ts - Fs.q, axis=1)) > 0.1

    def test_d_equals_sin_theta_over_k1(self, helicoid, helix_conoid, hyperboloid):
        for surf in (helicoid, helix_conoid, hyperboloid):
            F = frenet_frame(surf)
            theta = tangent_angle(F)
            d = surf.distribution_parameter(F.u)
            assert np.max(np.abs(d - np.sin(theta.theta) / F.k1)) <= 1e-6


class TestDirectorNormalization:
    def test_normalizes_when_flagged(self):
        surf = make_surface(("0", "0", "u"), ("2*cos(u)", "2*sin(u)", "0"),
                            0.0, 2 * math.pi, normalize=True)
        norms = np.linalg.norm(surf.director.point(surf.grid()), axis=1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-12
        # normalization is symbolic: derivatives stay exact
        F = frenet_frame(surf)
        assert np.max(np.abs(F.k1 - 1.0)) <= 1e-12

    def test_rejects_when_not_flagged(self):
        with pytest.raises(ValueError):
            make_surface(("0", "0", "u"), ("2*cos(u)", "2*sin(u)", "0"),
                         0.0, 2 * math.pi, normalize=False)

    def test_domain_mismatch_rejected(self):
        from ruledsim.curves import curve_from_text
        from ruledsim.surface import RuledSurface
        base = curve_from_text("0", "0", "u", 0.0, 1.0)
        director = curve_from_text("1", "0", "0", 0.0, 2.0)
        with pytest.raises(ValueError):
            RuledSurface(base, director)


class TestSurfaceFiles:
    def test_preset_text_round_trip(self, helicoid):
        assert helicoid.name == "helicoid"
        assert helicoid.u_min == 0.0
        assert helicoid.u_max == pytest.approx(2 * math.pi)
        assert helicoid.sample_count == 512

    def test_errors_carry_line_numbers(self):
        text = ("[surface]\nname = broken\nu_min = 0\nu_max = 1\n"
                "[base]\nx = cos(\ny = 0\nz = u\n"
                "[director]\nx = 1\ny = 0\nz = 0\n")
        with pytest.raises(ParseError) as exc:
            parse_surface_definition(text)
        assert exc.value.line == 6
        assert "offset 4" in str(exc.value)

    def test_unknown_section(self):
        with pytest.raises(ParseError):
            parse_surface_definition("[bogus]\nx = 1\n")

    def test_missing_key(self):
        with pytest.raises(ParseError):
            parse_surface_definition("[surface]\nu_min = 0\nu_max = 1\n"
                                     "[base]\nx = u\ny = 0\n"
                                     "[director]\nx = 1\ny = 0\nz = 0\n")

    def test_sampled_surface_round_trip(self, tmp_path, helicoid):
        g = helicoid.grid()
        st = helicoid.striction()
        q = helicoid.director.point(g)
        path = tmp_path / "surf.csv"
        write_sampled_surface(path, g, st.points, q)
        back = read_sampled_surface(path)
        assert np.max(np.abs(back.base.point(g) - st.points)) <= 1e-12
        assert np.max(np.abs(back.director.point(g) - q)) <= 1e-12

    def test_regular_striction_required(self):
        # planar director turning while the base runs along the rulings makes
        # the striction curve collapse to a point
        surf = make_surface(("cos(u)", "sin(u)", "0"), ("cos(u)", "sin(u)", "0"),
                            0.0, 2 * math.pi)
        with pytest.raises(RegularityError):
            surf.striction()

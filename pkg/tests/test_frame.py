import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from conftest import frame_orthonormality_defect, frenet_residual, make_surface
from ruledsim.errors import (CylindricalSurfaceError, FrameGapError,
                             OdeInapplicableError)
from ruledsim.fileio import FRAME_HEADER, write_frame_csv
from ruledsim.frame import (frenet_frame, integrate_frame_ode, phi_samples,
                            reconstruct_a, ruling_ode_residual,
                            structure_function, tangent_angle, total_curvature)
from ruledsim.presets import get_preset

SQRT2 = math.sqrt(2.0)


def gap_surface():
    return make_surface(("0", "0", "u"), ("cos(u^5)", "sin(u^5)", "0"),
                        -1.0, 1.0, name="stalling")


class TestFrenetFrame:
    def test_helicoid_closed_form(self, helicoid):
        F = frenet_frame(helicoid)
        s = F.s
        assert np.max(np.abs(F.k1 - 1.0)) <= 1e-12
        assert np.max(np.abs(F.k2)) <= 1e-12
        assert np.max(np.abs(F.q - np.stack(
            [np.cos(s), np.sin(s), np.zeros_like(s)], axis=-1))) <= 1e-12
        assert np.max(np.abs(F.h - np.stack(
            [-np.sin(s), np.cos(s), np.zeros_like(s)], axis=-1))) <= 1e-12
        assert np.max(np.abs(F.a - [0.0, 0.0, 1.0])) <= 1e-12

    def test_helix_conoid_closed_form(self, helix_conoid):
        F = frenet_frame(helix_conoid)
        assert np.max(np.abs(F.k1 - 1.0 / SQRT2)) <= 1e-12
        assert np.max(np.abs(F.k2)) <= 1e-12
        w = F.s / SQRT2
        assert np.max(np.abs(F.q - np.stack(
            [np.cos(w), np.sin(w), np.zeros_like(w)], axis=-1))) <= 1e-12

    def test_hyperboloid_curvatures(self, hyperboloid):
        # striction curve is the unit circle; both curvatures equal 1/sqrt(2)
        F = frenet_frame(hyperboloid)
        assert np.max(np.abs(F.k1 - 1.0 / SQRT2)) <= 1e-12
        assert np.max(np.abs(F.k2 - 1.0 / SQRT2)) <= 1e-12

    def test_tangent_developable_curvatures(self, tangent_developable):
        # helix radius 1, pitch 1: k1 = k2 = 1/w^2 = 1/2
        F = frenet_frame(tangent_developable)
        assert np.max(np.abs(F.k1 - 0.5)) <= 1e-12
        assert np.max(np.abs(F.k2 - 0.5)) <= 1e-12

    def test_orthonormality(self, helicoid, helix_conoid, hyperboloid,
                            tangent_developable):
        for surf in (helicoid, helix_conoid, hyperboloid, tangent_developable):
            assert frame_orthonormality_defect(frenet_frame(surf)) <= 1e-10

    def test_k1_nonnegative_phi_monotone(self, hyperboloid):
        F = frenet_frame(hyperboloid)
        assert np.all(F.k1 >= 0.0)
        assert np.all(np.diff(F.phi) > 0.0)
        assert np.all(np.diff(F.s) > 0.0)

    def test_frenet_residuals(self, helicoid, helix_conoid, hyperboloid,
                              tangent_developable):
        for surf in (helicoid, helix_conoid, hyperboloid, tangent_developable):
            assert frenet_residual(frenet_frame(surf)) <= 1e-5

    def test_dq_dphi_equals_h(self, hyperboloid):
        # first row of the phi-parametrized system
        F = frenet_frame(hyperboloid)
        du = F.u[1] - F.u[0]
        qd = np.empty_like(F.q)
        qd[2:-2] = (F.q[:-4] - 8 * F.q[1:-3] + 8 * F.q[3:-1] - F.q[4:]) / (12 * du)
        phi_rate = np.linalg.norm(hyperboloid.director.point(F.u, 1), axis=-1)
        dq_dphi = qd[2:-2] / phi_rate[2:-2, None]
        assert np.max(np.linalg.norm(dq_dphi - F.h[2:-2], axis=1)) <= 1e-5

    def test_cylinder_rejected(self, cylinder):
        with pytest.raises(CylindricalSurfaceError):
            frenet_frame(cylinder)

    def test_gap_report(self):
        F = frenet_frame(gap_surface())
        assert len(F.gaps) == 1
        lo, hi = F.gaps[0]
        assert lo < 0.0 < hi
        mask = F.valid()
        assert np.isnan(F.h[~mask]).all()
        assert np.isnan(F.k2[~mask]).all()
        assert frame_orthonormality_defect(F) <= 1e-10

    def test_sampled_surface_frame_matches_analytic(self, helicoid):
        from ruledsim.fileio import sampled_surface_from_arrays
        F = frenet_frame(helicoid)
        sampled = sampled_surface_from_arrays(F.s, F.c, F.q)
        Fs = frenet_frame(sampled)
        assert np.max(np.abs(Fs.k1 - 1.0)) <= 1e-6
        assert np.max(np.abs(Fs.k2)) <= 1e-6
        assert np.max(np.linalg.norm(Fs.q - F.q, axis=1)) <= 1e-9


class TestTotalCurvature:
    def test_helicoid_identity(self, helicoid):
        F = frenet_frame(helicoid)
        m = total_curvature(F)
        s = np.linspace(0, F.total_s, 33)
        assert np.max(np.abs(m.phi_of_s(s) - s)) <= 1e-9

    def test_helix_conoid_scaling(self, helix_conoid):
        F = frenet_frame(helix_conoid)
        m = total_curvature(F)
        s = np.linspace(0, F.total_s, 33)
        assert np.max(np.abs(m.phi_of_s(s) - s / SQRT2)) <= 1e-9

    def test_total_matches_independent_quadrature(self, hyperboloid):
        # adaptive Gauss-Kronrod on |dq/du| as an independent oracle
        F = frenet_frame(hyperboloid)
        oracle, _ = quad(
            lambda u: float(np.linalg.norm(hyperboloid.director.point(u, 1))),
            hyperboloid.u_min, hyperboloid.u_max, limit=200)
        assert F.total_phi == pytest.approx(oracle, rel=1e-10)

    def test_inverse(self, hyperboloid):
        F = frenet_frame(hyperboloid)
        m = total_curvature(F)
        phis = np.linspace(0, m.total, 57)
        assert np.max(np.abs(m.phi_of_s(m.s_of_phi(phis)) - phis)) <= 1e-9


class TestStructureFunction:
    def test_values(self, helicoid, helix_conoid, hyperboloid):
        assert np.max(np.abs(structure_function(frenet_frame(helicoid)).values)) <= 1e-12
        assert np.max(np.abs(structure_function(frenet_frame(helix_conoid)).values)) <= 1e-12
        sf = structure_function(frenet_frame(hyperboloid))
        assert np.max(np.abs(sf.values - 1.0)) <= 1e-12
        assert len(sf.phi) == 512

    def test_resolution_override(self, hyperboloid):
        sf = structure_function(frenet_frame(hyperboloid), resolution=257)
        assert len(sf.phi) == 257

    def test_gap_raises_with_interval(self):
        with pytest.raises(FrameGapError) as exc:
            structure_function(frenet_frame(gap_surface()))
        assert exc.value.intervals


class TestIntegrateFrameOde:
    def test_zero_structure_function_closed_form(self):
        # with f = 0: q(phi) = cos(phi) q0 + sin(phi) h0, a constant
        traj = integrate_frame_ode(lambda p: 0.0, np.eye(3),
                                   (0.0, math.pi / 2), output_nodes=129)
        qexp = np.stack([np.cos(traj.phi), np.sin(traj.phi),
                         np.zeros_like(traj.phi)], axis=-1)
        assert np.max(np.abs(traj.q - qexp)) <= 1e-8
        assert np.max(np.abs(traj.a - [0.0, 0.0, 1.0])) <= 1e-9

    def test_zero_length_returns_initial(self):
        traj = integrate_frame_ode(lambda p: 1.0, np.eye(3), (0.0, 0.0))
        assert traj.q.shape == (1, 3)
        assert np.allclose(traj.q[0], [1, 0, 0])

    def test_orthonormality_drift(self, hyperboloid):
        F = frenet_frame(hyperboloid)
        sf = structure_function(F)
        init = np.array([F.q[0], F.h[0], F.a[0]])
        traj = integrate_frame_ode(sf, init, (0.0, sf.total))
        for vecs in (traj.q, traj.h, traj.a):
            assert np.max(np.abs(np.linalg.norm(vecs, axis=1) - 1.0)) <= 1e-9
        assert np.max(np.abs(np.sum(traj.q * traj.h, axis=1))) <= 1e-9
        assert np.max(np.linalg.norm(traj.a - np.cross(traj.q, traj.h), axis=1)) <= 1e-9

    def test_reproduces_measured_frame(self, helicoid, hyperboloid):
        for surf in (helicoid, hyperboloid):
            F = frenet_frame(surf)
            sf = structure_function(F)
            init = np.array([F.q[0], F.h[0], F.a[0]])
            traj = integrate_frame_ode(sf, init, (0.0, sf.total),
                                       output_nodes=512)
            q_direct = CubicSpline(F.phi, F.q, axis=0)(traj.phi)
            assert np.max(np.linalg.norm(traj.q - q_direct, axis=1)) <= 1e-6

    def test_invalid_initial_frame(self):
        bad = np.eye(3) * 1.5
        with pytest.raises(ValueError):
            integrate_frame_ode(lambda p: 0.0, bad, (0.0, 1.0))


class TestRulingOdeResidual:
    def test_hyperboloid_residual(self, hyperboloid):
        res = ruling_ode_residual(frenet_frame(hyperboloid))
        assert res <= 1e-4

    def test_residual_halves_under_doubling(self, hyperboloid):
        res512 = ruling_ode_residual(frenet_frame(hyperboloid), resolution=512)
        fine = get_preset("hyperboloid", samples=1024)
        res1024 = ruling_ode_residual(frenet_frame(fine), resolution=1024)
        assert res1024 <= 0.6 * res512

    def test_conoid_inapplicable(self, helicoid):
        with pytest.raises(OdeInapplicableError):
            ruling_ode_residual(frenet_frame(helicoid))

    def test_synthetic_trajectory(self):
        traj = integrate_frame_ode(lambda p: 1.0, np.eye(3),
                                   (0.0, math.pi * SQRT2), output_nodes=4097)
        res = ruling_ode_residual(traj, f=lambda p: np.ones_like(p))
        assert res <= 1e-6


class TestReconstructA:
    def test_hyperboloid(self, hyperboloid):
        F = frenet_frame(hyperboloid)
        phi, q, f = phi_samples(F, 512)
        a_rec = reconstruct_a(phi, q, f)
        a_direct = CubicSpline(F.phi, F.a, axis=0)(phi)
        assert np.max(np.linalg.norm(a_rec - a_direct, axis=1)[1:-1]) <= 1e-4

    def test_consistency_with_integrated_frame(self):
        traj = integrate_frame_ode(lambda p: 1.0, np.eye(3),
                                   (0.0, math.pi), output_nodes=4097)
        a_rec = reconstruct_a(traj.phi, traj.q, np.ones_like(traj.phi))
        assert np.max(np.linalg.norm(a_rec - traj.a, axis=1)[1:-1]) <= 1e-6

    def test_conoid_rejected(self, helicoid):
        F = frenet_frame(helicoid)
        phi, q, f = phi_samples(F, 128)
        with pytest.raises(OdeInapplicableError):
            reconstruct_a(phi, q, f)


class TestTangentAngle:
    def test_helicoid(self, helicoid):
        F = frenet_frame(helicoid)
        ta = tangent_angle(F)
        assert np.max(np.abs(ta.theta - math.pi / 2)) <= 1e-12
        assert ta.residual <= 1e-12
        # distribution parameter equals sin(theta)/k1 = 1
        d = helicoid.distribution_parameter(F.u)
        assert np.max(np.abs(d - np.sin(ta.theta) / F.k1)) <= 1e-12

    def test_helix_conoid(self, helix_conoid):
        ta = tangent_angle(frenet_frame(helix_conoid))
        assert np.max(np.abs(ta.theta - 3 * math.pi / 4)) <= 1e-12

    def test_tangent_developable(self, tangent_developable):
        ta = tangent_angle(frenet_frame(tangent_developable))
        assert np.max(np.abs(ta.theta)) <= 1e-12


class TestFrameCsv:
    def test_export(self, tmp_path, helicoid):
        F = frenet_frame(helicoid)
        path = tmp_path / "frame.csv"
        write_frame_csv(path, F)
        lines = path.read_text().splitlines()
        assert lines[0] == FRAME_HEADER
        assert len(lines) == len(F.s) + 1
        row = np.array([float(x) for x in lines[1].split(",")])
        assert row.shape == (17,)
        assert row[15] == pytest.approx(1.0)   # k1

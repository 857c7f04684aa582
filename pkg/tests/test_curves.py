import math

import numpy as np
import pytest

from lmcflab.curves import (
    CIRCLE_SENTINEL,
    PlanarCurve,
    angle_derivative_check,
    angle_mod_pi_distance,
    curvature_and_radial,
    curvature_maxima_count,
    curve_hausdorff,
    frame,
    hausdorff_distance,
    lagrangian_angle,
    redistribute,
    wedge_hull,
    winding_number,
)
from lmcflab.errors import DomainError
from lmcflab.solitons import KIND_SLAG, SolitonSpec, sample_special_lagrangian


def circle(radius=1.0, nodes=256, center=0.0):
    t = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
    return PlanarCurve(center + radius * np.exp(1j * t), closed=True)


def ray(phi=0.0, r0=1.0, r1=2.0, nodes=64):
    r = np.linspace(r0, r1, nodes)
    return PlanarCurve(r * np.exp(1j * phi), closed=False)


def wobbly(nodes=512, amp=0.3, mode=2):
    t = np.linspace(0.0, 2.0 * math.pi, nodes, endpoint=False)
    return PlanarCurve((1.0 + amp * np.cos(mode * t)) * np.exp(1j * t), closed=True)


class TestValidation:
    def test_too_few_nodes(self):
        with pytest.raises(DomainError):
            PlanarCurve(np.exp(1j * np.linspace(0, 1, 5)), closed=False)

    def test_duplicate_consecutive(self):
        nodes = np.ones(10, dtype=complex)
        with pytest.raises(DomainError):
            PlanarCurve(nodes, closed=False)

    def test_duplicated_seam(self):
        t = np.linspace(0.0, 2 * math.pi, 32, endpoint=False)
        nodes = np.concatenate([np.exp(1j * t), [np.exp(1j * t[0])]])
        with pytest.raises(DomainError):
            PlanarCurve(nodes, closed=True)  # first == last exactly

    def test_node_at_origin(self):
        nodes = np.linspace(-1, 1, 21) + 0j
        with pytest.raises(DomainError):
            PlanarCurve(nodes, closed=False)


class TestFrame:
    def test_unit_circle(self):
        c = circle()
        T, N = frame(c)
        t = np.angle(c.nodes)
        assert np.abs(T - 1j * np.exp(1j * t)).max() < 1e-12
        assert np.abs(N + np.exp(1j * t)).max() < 1e-12  # inward

    def test_real_axis_ray(self):
        T, N = frame(ray())
        assert np.abs(T - 1.0).max() < 1e-12
        assert np.abs(N - 1j).max() < 1e-12

    def test_orthonormality(self):
        c = wobbly()
        T, N = frame(c)
        assert np.abs(np.abs(T) - 1).max() < 1e-14
        assert np.abs(N - 1j * T).max() == 0.0
        assert np.abs((T * np.conj(N)).real).max() < 1e-14


class TestCurvature:
    def test_unit_circle(self):
        d = curvature_and_radial(circle(nodes=512))
        assert np.abs(d.kappa - 1.0).max() < 5e-5
        assert np.abs(d.radial + 1.0).max() < 1e-12

    def test_radius_two(self):
        d = curvature_and_radial(circle(radius=2.0, nodes=512))
        assert np.abs(d.kappa - 0.5).max() < 5e-5
        assert np.abs(d.radial + 2.0).max() < 1e-12

    def test_ray_through_origin(self):
        d = curvature_and_radial(ray(phi=0.7))
        assert np.abs(d.kappa).max() < 1e-11
        assert np.abs(d.radial).max() < 1e-11

    def test_radial_bounded_by_radius(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
            r = 1.0 + 0.2 * np.cos(3 * t + rng.uniform(0, 6)) + 0.1 * np.sin(5 * t)
            c = PlanarCurve(r * np.exp(1j * t) + 0.3 * rng.normal(), closed=True)
            d = curvature_and_radial(c)
            assert (np.abs(d.radial) <= d.r + 1e-12).all()

    def test_second_order_convergence(self):
        # residual(h) / residual(h/2) -> 4 +- 0.5 on an analytic curve
        def max_err(nodes):
            t = np.linspace(0, 2 * math.pi, nodes, endpoint=False)
            r = 1.0 + 0.3 * np.cos(2 * t)
            c = PlanarCurve(r * np.exp(1j * t), closed=True)
            d = curvature_and_radial(c)
            # analytic curvature of a polar graph
            rp = -0.6 * np.sin(2 * t)
            rpp = -1.2 * np.cos(2 * t)
            kap = (r**2 + 2 * rp**2 - r * rpp) / (r**2 + rp**2) ** 1.5
            return np.abs(d.kappa - kap).max()

        e1, e2 = max_err(512), max_err(1024)
        assert 3.5 < e1 / e2 < 4.5


class TestLagrangianAngle:
    def test_ray_angle(self):
        for n in (1, 2, 3, 4):
            for phi in (0.0, 0.4, -1.1):
                prof = lagrangian_angle(ray(phi=phi, nodes=64), n)
                assert angle_mod_pi_distance(prof.theta, n * phi).max() < 1e-10

    def test_static_profile_constant(self):
        spec = SolitonSpec(kind=KIND_SLAG, n=3, B=1.0, theta_bar=0.4)
        lim = math.pi / 6
        curve = sample_special_lagrangian(spec, (-0.99 * lim, 0.99 * lim), 0.002, r_cap=4.0)
        prof = lagrangian_angle(curve, 3)
        assert angle_mod_pi_distance(prof.theta, 0.4).max() < 2e-5

    def test_unit_circle_n2(self):
        # theta = pi/2 + 2s along e^{is}; tangents are exact on a uniform circle
        c = circle(nodes=256)
        prof = lagrangian_angle(c, 2)
        s = np.angle(c.nodes[0]) + np.linspace(0, 2 * math.pi, 256, endpoint=False)
        assert np.abs(prof.theta - (math.pi / 2 + 2 * s)).max() < 1e-10
        assert prof.branch_offset == 0

    def test_reversal_invariance_mod_pi(self):
        c = wobbly()
        a = lagrangian_angle(c, 2).theta
        b = lagrangian_angle(c.reversed(), 2).theta[::-1]
        assert angle_mod_pi_distance(a, b).max() < 1e-10

    def test_seam_relabel_invariance(self):
        c = wobbly()
        rolled = PlanarCurve(np.roll(c.nodes, -37), closed=True)
        a = lagrangian_angle(c, 2).theta
        b = np.roll(lagrangian_angle(rolled, 2).theta, 37)
        assert angle_mod_pi_distance(a, b).max() < 1e-10

    def test_rotation_equivariance(self):
        c = wobbly()
        phi = 0.73
        for n in (1, 2, 3):
            a = lagrangian_angle(c, n).theta
            b = lagrangian_angle(c.rotated(phi), n).theta
            assert angle_mod_pi_distance(b - a, n * phi).max() < 1e-10

    def test_scaling_invariance(self):
        c = wobbly()
        a = lagrangian_angle(c, 3).theta
        b = lagrangian_angle(c.scaled(2.5), 3).theta
        assert angle_mod_pi_distance(a, b).max() < 1e-12


class TestAngleDerivative:
    def test_ray(self):
        assert angle_derivative_check(ray(nodes=128), 2) < 1e-12

    def test_circle_n2_refines(self):
        e1 = angle_derivative_check(circle(nodes=256), 2)
        e2 = angle_derivative_check(circle(nodes=512), 2)
        assert e1 < 2e-4 and e2 < 6e-5
        assert 3.0 < e1 / e2 < 5.0

    def test_static_profile_n3(self):
        spec = SolitonSpec(kind=KIND_SLAG, n=3, B=1.0)
        lim = math.pi / 6
        e = []
        for spacing in (0.01, 0.005):
            curve = sample_special_lagrangian(spec, (-0.95 * lim, 0.95 * lim), spacing, r_cap=3.0)
            e.append(angle_derivative_check(curve, 3))
        assert e[0] < 2e-3 and e[1] < e[0] / 2.5


class TestWindingAndMaxima:
    def test_circle_winding(self):
        assert winding_number(circle()) == 1

    def test_double_circle_winding(self):
        t = np.linspace(0.0, 4.0 * math.pi, 512, endpoint=False)
        assert winding_number(PlanarCurve(np.exp(1j * t), closed=True)) == 2

    def test_open_arc_rejected(self):
        with pytest.raises(DomainError):
            winding_number(ray())

    def test_circle_sentinel(self):
        assert curvature_maxima_count(circle(nodes=512)) == CIRCLE_SENTINEL

    def test_two_bump_curve(self):
        assert curvature_maxima_count(wobbly(amp=0.2, mode=2)) == 2


class TestRedistribute:
    def test_uniform_circle_fixed_point(self):
        c = circle(nodes=200)
        out = redistribute(c, 2 * math.pi / 200)
        assert len(out) == 200
        assert np.abs(out.nodes - c.nodes).max() < 1e-12

    def test_graded_ray_becomes_uniform(self):
        r = np.geomspace(1.0, 3.0, 80)  # geometrically graded mesh on the real axis
        c = PlanarCurve(r.astype(complex), closed=False)
        out = redistribute(c, 0.01)
        seg = out.spacing()
        assert seg.std() / seg.mean() < 1e-3
        assert out.nodes[0] == c.nodes[0] and out.nodes[-1] == c.nodes[-1]

    def test_arclength_preserved(self):
        rng = np.random.default_rng(11)
        for _ in range(4):
            t = np.linspace(0, 2 * math.pi, 400, endpoint=False)
            r = 1.0 + 0.2 * np.cos(2 * t + rng.uniform(0, 6)) + 0.05 * np.sin(7 * t)
            c = PlanarCurve(r * np.exp(1j * t), closed=True)
            out = redistribute(c, 0.05)
            assert abs(out.length() - c.length()) / c.length() < 1e-3

    def test_hausdorff_within_spacing_squared(self):
        c = wobbly(nodes=600, amp=0.2)
        spacing = 0.05
        out = redistribute(c, spacing)
        assert curve_hausdorff(out, c) < spacing**2


class TestWedgeHull:
    def test_ray(self):
        w = wedge_hull(ray(phi=0.6))
        assert w.span < 1e-12
        assert abs(w.bisector - 0.6) < 1e-12

    def test_truncated_static_profile(self):
        # arg range of the closed form is alpha - pi/4 over alpha in [-pi/6, pi/6]
        spec = SolitonSpec(kind=KIND_SLAG, n=2, B=1.0)
        curve = sample_special_lagrangian(spec, (-math.pi / 6, math.pi / 6), 0.002)
        w = wedge_hull(curve)
        assert abs(w.span - math.pi / 3) < 1e-3
        assert abs(w.bisector + math.pi / 4) < 1e-3

    def test_full_circle(self):
        assert wedge_hull(circle()).span == 2 * math.pi

    def test_rotation_and_scale(self):
        spec = SolitonSpec(kind=KIND_SLAG, n=2, B=1.0)
        curve = sample_special_lagrangian(spec, (-math.pi / 6, math.pi / 6), 0.002)
        w0 = wedge_hull(curve)
        w1 = wedge_hull(curve.rotated(0.5).scaled(3.0))
        assert abs(w1.span - w0.span) < 1e-12
        assert abs(np.angle(np.exp(1j * (w1.bisector - w0.bisector - 0.5)))) < 1e-12


class TestHausdorff:
    def test_self_distance(self):
        c = wobbly()
        assert hausdorff_distance(c, c) == 0.0

    def test_parallel_segments(self):
        a = PlanarCurve(np.linspace(1, 2, 50) + 0.5j, closed=False)
        b = PlanarCurve(np.linspace(1, 2, 50) + 0.8j, closed=False)
        assert abs(hausdorff_distance(a, b, region=(0.5, 3.0)) - 0.3) < 1e-12

    def test_empty_clip(self):
        with pytest.raises(DomainError):
            hausdorff_distance(circle(), circle(), region=(5.0, 6.0))

import math

import numpy as np
import pytest

import lmcflab.flow as flow_mod
from lmcflab.curves import PlanarCurve, curve_hausdorff
from lmcflab.errors import DomainError
from lmcflab.flow import (
    TERM_SINGULAR,
    TERM_TMAX,
    FlowConfig,
    FlowState,
    avoidance_check,
    classify_singularity_rate,
    estimate_singular_time,
    evolve,
    monitor_estimates,
    neves_initial,
    normal_velocity,
    step,
)
from lmcflab.solitons import KIND_SLAG, SolitonSpec, grim_reaper, sample_cone, sample_special_lagrangian
from lmcflab.solitons import KIND_CONE


def circle(radius=1.0, nodes=512):
    t = np.linspace(0.0, 2 * math.pi, nodes, endpoint=False)
    return PlanarCurve(radius * np.exp(1j * t), closed=True)


def slag_curve(n=2, B=1.0, spacing=0.01, r_cap=4.0):
    spec = SolitonSpec(kind=KIND_SLAG, n=n, B=B)
    lim = 0.99999 * math.pi / (2 * n)
    return sample_special_lagrangian(spec, (-lim, lim), spacing, r_cap=r_cap)


class TestNormalVelocity:
    def test_unit_circle_n2(self):
        v = normal_velocity(circle(), 2)
        assert np.abs(v - 2.0).max() < 2e-4

    def test_cone_is_static(self):
        c = sample_cone(SolitonSpec(kind=KIND_CONE, n=3, k=1, theta_bar=0.3), (0.5, 3.0), 0.01)
        assert np.abs(normal_velocity(c, 3)).max() < 1e-10

    def test_static_profile_second_order(self):
        errs = []
        for spacing in (0.01, 0.005):
            c = slag_curve(n=3, spacing=spacing)
            v = normal_velocity(c, 3)
            errs.append(np.abs(v[2:-2]).max())
        assert errs[0] < 1e-4
        assert 2.5 < errs[0] / errs[1] < 6.0


class TestStep:
    def test_circle_radius_law(self):
        cfg = FlowConfig(n=2, spacing=0.02, t_max=1.0)
        state = FlowState(t=0.0, curve=circle(nodes=314), n=2)
        for k in range(20):
            state = step(state, cfg, step_index=k)
        r = np.abs(state.curve.nodes)
        expect = math.sqrt(1.0 - 4.0 * state.t)
        assert abs(r.mean() - expect) < 1e-5

    def test_static_profile_tiny_displacement(self):
        cfg = FlowConfig(n=2, spacing=0.01, t_max=1.0, boundary="pinned")
        c0 = slag_curve(spacing=0.01)
        state = FlowState(t=0.0, curve=c0, n=2)
        out = step(state, cfg)
        dt = out.t
        disp = np.abs(out.curve.nodes - c0.nodes).max()
        assert disp <= dt * 1e-2  # velocity is O(h^2) on the static profile


class TestEvolveCircle:
    def test_extinction_time(self, circle_runs):
        for spacing, traj in circle_runs.items():
            assert traj.termination == TERM_SINGULAR
            T, _ = estimate_singular_time(traj.summary)
            assert abs(T - 0.25) < 0.0025

    def test_second_order_convergence(self, circle_runs):
        errs = [abs(estimate_singular_time(circle_runs[h].summary)[0] - 0.25) for h in (0.02, 0.01, 0.005)]
        assert errs[0] / errs[1] > 2.5
        assert errs[1] / errs[2] > 2.5

    def test_radius_law_along_the_run(self, circle_runs):
        traj = circle_runs[0.005]
        expect = np.sqrt(np.maximum(1.0 - 4.0 * traj.summary.t, 0.0))
        assert np.abs(traj.summary.r_min - expect).max() < 1e-3

    def test_classification_type_i(self, circle_runs):
        rep = classify_singularity_rate(circle_runs[0.01])
        assert rep.type_evidence == "I"
        assert abs(rep.sigma - 0.5) < 0.05
        assert abs(rep.location) < 0.05


class TestEquivariance:
    def test_rotation_commutes(self):
        t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        c0 = PlanarCurve((1 + 0.05 * np.cos(3 * t)) * np.exp(1j * t), closed=True)
        cfg = FlowConfig(n=2, spacing=0.025, t_max=0.004, snapshot_interval=10**9)
        phi = 0.7
        a = evolve(c0, cfg)
        b = evolve(c0.rotated(phi), cfg)
        za = a.snapshots[-1].curve.nodes * np.exp(1j * phi)
        zb = b.snapshots[-1].curve.nodes
        assert abs(a.snapshots[-1].t - b.snapshots[-1].t) < 1e-15
        assert np.abs(za - zb).max() < 1e-10

    def test_parabolic_scaling_commutes(self):
        t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        c0 = PlanarCurve((1 + 0.05 * np.cos(3 * t)) * np.exp(1j * t), closed=True)
        lam = 2.0
        cfg1 = FlowConfig(n=2, spacing=0.025, t_max=0.004, r_floor=1e-3, snapshot_interval=10**9)
        cfg2 = FlowConfig(n=2, spacing=0.025 * lam, t_max=0.004 * lam**2, r_floor=1e-3 * lam,
                          snapshot_interval=10**9)
        a = evolve(c0, cfg1)
        b = evolve(c0.scaled(lam), cfg2)
        assert len(a.summary.t) == len(b.summary.t)
        assert abs(b.snapshots[-1].t - lam**2 * a.snapshots[-1].t) < 1e-12
        assert np.abs(b.snapshots[-1].curve.nodes - lam * a.snapshots[-1].curve.nodes).max() < 1e-9


class TestThetaRange:
    def test_max_principle_circle(self):
        cfg = FlowConfig(n=2, spacing=0.01, t_max=0.05, r_floor=0.2)
        traj = evolve(circle(nodes=628), cfg)
        s = traj.summary
        assert (np.diff(s.theta_max) <= 1e-6).all()
        assert (np.diff(s.theta_min) >= -1e-6).all()

    def test_max_principle_perturbed_circle(self):
        t = np.linspace(0, 2 * math.pi, 2513, endpoint=False)
        c0 = PlanarCurve((1 + 0.03 * np.cos(2 * t)) * np.exp(1j * t), closed=True)
        cfg = FlowConfig(n=2, spacing=2.5e-3, t_max=0.02, r_floor=0.2, redistribution_period=30)
        traj = evolve(c0, cfg)
        s = traj.summary
        assert (np.diff(s.theta_max) <= 1e-6).all()
        assert (np.diff(s.theta_min) >= -1e-6).all()
        # the range genuinely contracts
        width = s.theta_max - s.theta_min
        assert width[-1] < width[0] - 1e-4


class TestNevesInitial:
    def test_waist_point(self):
        beta = 0.6 * math.pi
        c = neves_initial(beta, 2, samples=800, r_max=6.0)
        i = int(np.argmin(np.abs(np.abs(c.nodes) - 1.0)))
        assert abs(abs(c.nodes[i]) - 1.0) < 1e-3
        assert abs(np.angle(c.nodes[i]) - beta / 2) < 1e-2

    def test_span_approaches_beta(self):
        beta = 0.6 * math.pi
        args10 = np.angle(neves_initial(beta, 2, samples=900, r_max=10.0).nodes)
        args40 = np.angle(neves_initial(beta, 2, samples=2400, r_max=40.0).nodes)
        span10 = args10.max() - args10.min()
        span40 = args40.max() - args40.min()
        assert span10 < span40 < beta
        assert beta - span40 < 0.01

    def test_reflection_symmetry(self):
        beta = 0.6 * math.pi
        c = neves_initial(beta, 2, samples=1000, r_max=5.0)
        mirrored = PlanarCurve(np.conj(c.nodes[::-1]) * np.exp(1j * beta), closed=False)
        assert curve_hausdorff(c, mirrored) < 1e-4

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            neves_initial(1.01 * math.pi, 2)  # outside (0, 2 pi / n)


class TestAvoidance:
    def test_concentric_circles(self):
        cfg = FlowConfig(n=2, spacing=0.02, t_max=1.0, r_floor=0.05, snapshot_interval=50)
        inner = evolve(circle(1.0, 314), cfg)
        outer = evolve(circle(2.0, 628), cfg)
        assert inner.termination == TERM_SINGULAR
        rep = avoidance_check(inner, outer)
        assert rep.disjoint
        # the closed-form gap sqrt(4-4t) - sqrt(1-4t) is minimal at t = 0
        assert abs(rep.min_separation - 1.0) < 0.02

    def test_identical_trajectories(self):
        cfg = FlowConfig(n=2, spacing=0.02, t_max=0.01, snapshot_interval=20)
        a = evolve(circle(1.0, 314), cfg)
        b = evolve(circle(1.0, 314), cfg)
        rep = avoidance_check(a, b)
        assert rep.min_separation == 0.0
        assert not rep.disjoint

    def test_disjoint_time_ranges(self):
        cfg = FlowConfig(n=2, spacing=0.02, t_max=0.01, snapshot_interval=20)
        a = evolve(circle(1.0, 314), cfg)
        b = evolve(circle(1.0, 314), cfg)
        b.snapshots = [FlowState(t=s.t + 5.0, curve=s.curve, n=2) for s in b.snapshots]
        with pytest.raises(DomainError):
            avoidance_check(a, b)


class TestMonitor:
    def test_circle_ratio_closed_form(self, circle_runs):
        # |H|^2/(1 + 1/r^2) = n^2/(r^2 + 1) stays below n^2 throughout
        rep = monitor_estimates(circle_runs[0.01])
        assert rep.initial_h_ratio == pytest.approx(2.0, rel=1e-3)
        # the continuum envelope is n^2 = 4; the late coarse polygon overshoots a little
        assert rep.sup_h_ratio < 4.2
        assert not rep.growth_flag

    def test_static_profile_ratios_constant(self):
        cfg = FlowConfig(n=2, spacing=0.01, boundary="pinned", t_max=0.05, snapshot_interval=200)
        traj = evolve(slag_curve(spacing=0.01), cfg)
        ratios = []
        for st in traj.snapshots:
            d = st.diagnostics
            v = d.kappa - d.radial / d.r**2
            ratios.append(float((v[2:-2] ** 2 / (1 + 1 / d.r[2:-2] ** 2)).max()))
        assert max(ratios) - min(ratios) < 1e-4


class TestClassifier:
    def test_tmax_run_is_inconclusive(self):
        cfg = FlowConfig(n=2, spacing=0.02, t_max=0.01, snapshot_interval=50)
        traj = evolve(circle(1.0, 314), cfg)
        assert traj.termination == TERM_TMAX
        rep = classify_singularity_rate(traj)
        assert rep.type_evidence == "inconclusive"
        assert math.isnan(rep.sigma)


class TestGrimReaperFlow:
    def test_translates_down_at_unit_speed(self):
        # lifted above the origin, which is immaterial for n = 1
        reaper = grim_reaper((-1.52, 1.52), 0.01)
        c0 = PlanarCurve(reaper.nodes + 1j, closed=False)
        cfg = FlowConfig(n=1, spacing=0.01, boundary="pinned", t_max=0.5,
                         r_floor=1e-3, snapshot_interval=200)
        traj = evolve(c0, cfg)
        assert traj.termination == TERM_TMAX
        final = traj.snapshots[-1]
        i0 = int(np.argmin(np.abs(c0.nodes.real)))
        i1 = int(np.argmin(np.abs(final.curve.nodes.real)))
        drift = final.curve.nodes[i1] - c0.nodes[i0]
        velocity = drift / final.t
        assert abs(velocity - (-1j)) < 1e-3


class TestFastPathConsistency:
    def test_matches_reference_implementation(self):
        if not flow_mod.HAVE_NUMBA:
            pytest.skip("reference path is the only path")
        t = np.linspace(0, 2 * math.pi, 300, endpoint=False)
        c0 = PlanarCurve((1 + 0.05 * np.cos(3 * t)) * np.exp(1j * t), closed=True)
        cfg = FlowConfig(n=2, spacing=0.02, t_max=0.002, snapshot_interval=50, redistribution_period=30)
        fast = evolve(c0, cfg)
        flow_mod.HAVE_NUMBA = False
        try:
            slow = evolve(c0, cfg)
        finally:
            flow_mod.HAVE_NUMBA = True
        assert len(fast.summary.t) == len(slow.summary.t)
        assert np.abs(fast.summary.kappa_max - slow.summary.kappa_max).max() < 1e-10
        assert np.abs(fast.summary.theta_max - slow.summary.theta_max).max() < 1e-10
        assert np.abs(fast.snapshots[-1].curve.nodes - slow.snapshots[-1].curve.nodes).max() < 1e-10

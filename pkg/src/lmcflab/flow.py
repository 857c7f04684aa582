"""Time integration of the reduced equivariant flow of profile curves.

The normal velocity is v = kappa - (n-1) <gamma, N> / |gamma|^2; nodes move by
an explicit midpoint update with parabolic step dt = cfl * (min spacing)^2 and
periodic redistribution to uniform arclength.  Singularities are detected by a
radius floor or a curvature ceiling, and the singular time is extrapolated
from the collapse of the minimum radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curves import (
    AngleProfile,
    CurveDiagnostics,
    PlanarCurve,
    _derivatives,
    curvature_and_radial,
    lagrangian_angle,
    point_set_separation,
    redistribute,
    resample_path,
)
from .errors import DomainError, MeshError, NumericalError, SingularRadiusError

try:  # optional JIT fast path; the numpy implementation is the reference
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


TERM_TMAX = "t_max reached"
TERM_SINGULAR = "singularity trigger"
TERM_MESH = "mesh failure"

TYPE_I = "I"
TYPE_II = "II"
TYPE_INCONCLUSIVE = "inconclusive"

# rate exponent separating Type I evidence from Type II evidence
SIGMA_SPLIT = 0.55


@dataclass(frozen=True)
class Ray:
    """Half-line anchor + t * direction, t >= 0."""

    anchor: complex
    direction: complex

    def __post_init__(self):
        d = complex(self.direction)
        if abs(d) == 0:
            raise DomainError("ray direction must be nonzero")
        object.__setattr__(self, "direction", d / abs(d))

    def project(self, points: np.ndarray) -> np.ndarray:
        t = ((points - self.anchor) * np.conj(self.direction)).real
        return self.anchor + np.maximum(t, 0.0) * self.direction

    def distance(self, points: np.ndarray) -> np.ndarray:
        return np.abs(points - self.project(points))


@dataclass(frozen=True)
class FlowConfig:
    n: int
    spacing: float
    cfl: float = 0.2
    redistribution_period: int = 25
    r_floor: float = 1e-3
    kappa_ceiling: float = 1e4
    t_max: float = 1.0
    boundary: str = "closed"  # "closed" or "pinned"
    rays: tuple[Ray, Ray] | None = None
    collar_radius: float | None = None
    snapshot_interval: int = 40
    max_snapshots: int = 900
    # optional resolution schedule: keep the uniform mesh at resolve_factor /
    # max|kappa|, clipped to [spacing, spacing_max]; None pins the spacing
    spacing_max: float | None = None
    resolve_factor: float = 0.35

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("ambient dimension n must be >= 1")
        if not (0.0 < self.cfl <= 0.5):
            raise DomainError("cfl must lie in (0, 0.5]")
        if self.r_floor <= 0:
            raise DomainError("r_floor must be positive")
        if self.spacing <= 0:
            raise DomainError("spacing must be positive")
        if self.spacing_max is not None and self.spacing_max < self.spacing:
            raise DomainError("spacing_max must be >= spacing")
        if self.boundary not in ("closed", "pinned"):
            raise DomainError("boundary must be 'closed' or 'pinned'")

    def target_spacing(self, kappa_max: float) -> float:
        if self.spacing_max is None:
            return self.spacing
        want = self.resolve_factor / max(kappa_max, 1e-12)
        return float(min(max(want, self.spacing), self.spacing_max))


@dataclass
class FlowState:
    """Snapshot of the evolving curve; diagnostics are derived lazily."""

    t: float
    curve: PlanarCurve
    n: int

    @cached_property
    def diagnostics(self) -> CurveDiagnostics:
        return curvature_and_radial(self.curve)

    @cached_property
    def theta(self) -> AngleProfile:
        return lagrangian_angle(self.curve, self.n)


@dataclass(frozen=True)
class SingularityReport:
    T_est: float
    location: complex | None
    sigma: float
    type_evidence: str
    fit_quality: float
    kappa_prefactor: float = float("nan")


@dataclass
class FlowSummary:
    """Dense per-step series: time, max curvature, min radius, angle range."""

    t: np.ndarray
    kappa_max: np.ndarray
    r_min: np.ndarray
    theta_min: np.ndarray
    theta_max: np.ndarray


@dataclass
class FlowTrajectory:
    snapshots: list[FlowState]
    summary: FlowSummary
    termination: str
    config: FlowConfig
    singularity: SingularityReport | None = None

    @property
    def n(self) -> int:
        return self.config.n

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def curve_at(self, t: float) -> PlanarCurve:
        """Curve at time t: linear interpolation when node counts match,
        nearest snapshot otherwise."""
        ts = self.times()
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise DomainError(f"time {t} outside the stored snapshot range")
        i = int(np.searchsorted(ts, t))
        if i == 0:
            return self.snapshots[0].curve
        if i >= len(ts):
            return self.snapshots[-1].curve
        s0, s1 = self.snapshots[i - 1], self.snapshots[i]
        if len(s0.curve) == len(s1.curve) and s1.t > s0.t:
            w = (t - s0.t) / (s1.t - s0.t)
            nodes = (1 - w) * s0.curve.nodes + w * s1.curve.nodes
            return PlanarCurve(nodes, s0.curve.closed)
        return (s0 if t - s0.t <= s1.t - t else s1).curve


def normal_velocity(curve: PlanarCurve, n: int, r_floor: float = 1e-9) -> np.ndarray:
    """Per-node normal speed kappa - (n-1) radial / r^2."""
    diag = curvature_and_radial(curve)
    if diag.r.min() < r_floor:
        raise SingularRadiusError("node inside the radius floor")
    return diag.kappa - (n - 1) * diag.radial / diag.r**2


def _velocity_arrays(nodes: np.ndarray, closed: bool, n: int):
    """Velocity and unit normal without building intermediate dataclasses."""
    d1, d2 = _derivatives(nodes, closed)
    mag = np.abs(d1)
    T = d1 / mag
    N = 1j * T
    kappa = (np.conj(d1) * d2).imag / mag**3
    r2 = (nodes * np.conj(nodes)).real
    radial = (nodes * np.conj(N)).real
    v = kappa - (n - 1) * radial / r2
    return v, N, kappa, np.sqrt(r2)


def _advance(nodes: np.ndarray, closed: bool, n: int, dt: float, pinned: bool) -> np.ndarray:
    v1, N1, _, _ = _velocity_arrays(nodes, closed, n)
    mid = nodes + (0.5 * dt) * v1 * N1
    if pinned:
        mid[0] = nodes[0]
        mid[-1] = nodes[-1]
    v2, N2, _, _ = _velocity_arrays(mid, closed, n)
    out = nodes + dt * v2 * N2
    if pinned:
        out[0] = nodes[0]
        out[-1] = nodes[-1]
    return out


def _apply_collar(nodes: np.ndarray, rays: tuple[Ray, Ray], collar_radius: float) -> np.ndarray:
    sel = np.abs(nodes) >= collar_radius
    if not sel.any():
        return nodes
    pts = nodes[sel]
    p0 = rays[0].project(pts)
    p1 = rays[1].project(pts)
    choose0 = np.abs(pts - p0) <= np.abs(pts - p1)
    nodes[sel] = np.where(choose0, p0, p1)
    return nodes


def _step_dt(nodes: np.ndarray, closed: bool, cfl: float) -> float:
    seg = np.abs(np.roll(nodes, -1) - nodes) if closed else np.abs(np.diff(nodes))
    return cfl * float(seg.min()) ** 2


@njit(cache=True)
def _kernel_velocity(nodes, closed, nn, v, N, kappa):  # pragma: no cover - jitted
    m = nodes.size
    lo = 0 if closed else 1
    hi = m if closed else m - 1
    for i in range(lo, hi):
        ip = i + 1 if i + 1 < m else 0
        im = i - 1 if i - 1 >= 0 else m - 1
        a = nodes[i] - nodes[im]
        b = nodes[ip] - nodes[i]
        la = abs(a)
        lb = abs(b)
        denom = la * lb * (la + lb)
        d1 = (la * la * b + lb * lb * a) / denom
        d2 = 2.0 * (la * nodes[ip] - (la + lb) * nodes[i] + lb * nodes[im]) / denom
        mag = abs(d1)
        kap = (d1.conjugate() * d2).imag / (mag * mag * mag)
        Ni = 1j * d1 / mag
        r2 = (nodes[i] * nodes[i].conjugate()).real
        radial = (nodes[i] * Ni.conjugate()).real
        kappa[i] = kap
        N[i] = Ni
        v[i] = kap - (nn - 1.0) * radial / r2
    if not closed:
        # one-sided quadratics at the two open ends
        for (i, j, k2) in ((0, 1, 2), (m - 1, m - 2, m - 3)):
            h1 = abs(nodes[j] - nodes[i])
            h2 = abs(nodes[k2] - nodes[j])
            sgn = 1.0 if i == 0 else -1.0
            d1 = sgn * (
                -(2 * h1 + h2) / (h1 * (h1 + h2)) * nodes[i]
                + (h1 + h2) / (h1 * h2) * nodes[j]
                - h1 / (h2 * (h1 + h2)) * nodes[k2]
            )
            d2 = 2.0 * (
                nodes[i] / (h1 * (h1 + h2)) - nodes[j] / (h1 * h2) + nodes[k2] / (h2 * (h1 + h2))
            )
            mag = abs(d1)
            kap = (d1.conjugate() * d2).imag / (mag * mag * mag)
            Ni = 1j * d1 / mag
            r2 = (nodes[i] * nodes[i].conjugate()).real
            radial = (nodes[i] * Ni.conjugate()).real
            kappa[i] = kap
            N[i] = Ni
            v[i] = kap - (nn - 1.0) * radial / r2


@njit(cache=True)
def _kernel_chunk(
    nodes, closed, nn, cfl, t0, t_max, r_floor, kappa_ceiling, pinned, max_steps,
    out_kmax, out_rmin, out_thmin, out_thmax, out_t,
):  # pragma: no cover - jitted
    """Advance up to max_steps explicit midpoint steps, recording the summary.

    Returns (steps_taken, t, status): status 0 = steps exhausted, 1 = trigger,
    2 = t_max reached, 3 = mesh failure.  The summary row for the state BEFORE
    each step is written; on early exit the current state row is also written.
    """
    m = nodes.size
    v = np.empty(m, dtype=np.complex128)
    N = np.empty(m, dtype=np.complex128)
    kap = np.empty(m, dtype=np.float64)
    vr = np.empty(m, dtype=np.float64)
    mid = np.empty(m, dtype=np.complex128)
    t = t0
    twopi = 2.0 * math.pi
    for step_i in range(max_steps + 1):
        # diagnostics of the current state
        _kernel_velocity(nodes, closed, nn, v, N, kap)
        lo = 0 if closed else 2
        hi = m if closed else m - 2
        kmax = 0.0
        for i in range(lo, hi):
            a = abs(kap[i])
            if a > kmax:
                kmax = a
        rmin = 1e300
        for i in range(m):
            r = abs(nodes[i])
            if r < rmin:
                rmin = r
        # lifted angle range; arg(T) = arg(-i N)
        prev_tang = math.atan2(-N[0].real, N[0].imag)
        prev_phi = math.atan2(nodes[0].imag, nodes[0].real)
        th0 = prev_tang + (nn - 1.0) * prev_phi
        shift = math.floor(th0 / math.pi) * math.pi
        thmin = th0 - shift
        thmax = th0 - shift
        for i in range(1, m):
            tang = math.atan2(-N[i].real, N[i].imag)
            while tang - prev_tang > math.pi:
                tang -= twopi
            while tang - prev_tang < -math.pi:
                tang += twopi
            phi = math.atan2(nodes[i].imag, nodes[i].real)
            while phi - prev_phi > math.pi:
                phi -= twopi
            while phi - prev_phi < -math.pi:
                phi += twopi
            th = tang + (nn - 1.0) * phi - shift
            if th < thmin:
                thmin = th
            if th > thmax:
                thmax = th
            prev_tang = tang
            prev_phi = phi
        out_kmax[step_i] = kmax
        out_rmin[step_i] = rmin
        out_thmin[step_i] = thmin
        out_thmax[step_i] = thmax
        out_t[step_i] = t
        if not (kmax == kmax and rmin == rmin):
            return step_i, t, 3
        if rmin < r_floor or kmax > kappa_ceiling:
            return step_i, t, 1
        if t >= t_max - 1e-15:
            return step_i, t, 2
        if step_i == max_steps:
            return step_i, t, 0
        # time step from the minimum spacing
        hmin = 1e300
        for i in range(m - 1):
            h = abs(nodes[i + 1] - nodes[i])
            if h < hmin:
                hmin = h
        if closed:
            h = abs(nodes[0] - nodes[m - 1])
            if h < hmin:
                hmin = h
        dt = cfl * hmin * hmin
        if t + dt > t_max:
            dt = t_max - t
        if dt < 1e-16:
            return step_i, t, 3
        for i in range(m):
            mid[i] = nodes[i] + (0.5 * dt) * v[i] * N[i]
        if pinned:
            mid[0] = nodes[0]
            mid[m - 1] = nodes[m - 1]
        _kernel_velocity(mid, closed, nn, v, N, kap)
        if pinned:
            end0 = nodes[0]
            end1 = nodes[m - 1]
            for i in range(m):
                nodes[i] = nodes[i] + dt * v[i] * N[i]
            nodes[0] = end0
            nodes[m - 1] = end1
        else:
            for i in range(m):
                nodes[i] = nodes[i] + dt * v[i] * N[i]
        t += dt
    return max_steps, t, 0


def step(state: FlowState, config: FlowConfig, step_index: int = 0) -> FlowState:
    """One explicit midpoint update (with redistribution on cadence)."""
    nodes = state.curve.nodes.copy()
    closed = state.curve.closed
    pinned = config.boundary == "pinned"
    dt = min(_step_dt(nodes, closed, config.cfl), max(config.t_max - state.t, 0.0))
    if dt < 1e-16:
        raise MeshError("time step underflow")
    out = _advance(nodes, closed, config.n, dt, pinned)
    if pinned and config.rays is not None and config.collar_radius is not None:
        out = _apply_collar(out, config.rays, config.collar_radius)
    if not np.isfinite(out).all():
        raise MeshError("non-finite node positions after step")
    curve = PlanarCurve(out, closed)
    if (step_index + 1) % config.redistribution_period == 0:
        curve = redistribute(curve, config.spacing)
        if pinned:
            nodes2 = curve.nodes.copy()
            nodes2[0] = out[0]
            nodes2[-1] = out[-1]
            curve = PlanarCurve(nodes2, closed)
    return FlowState(t=state.t + dt, curve=curve, n=config.n)


class _SnapshotBuffer:
    """Bounded store; keeps the newest block dense and thins older snapshots
    so that their spacing stays proportional to the distance from the end."""

    def __init__(self, limit: int, dense_tail: int = 300):
        self.limit = limit
        self.dense_tail = dense_tail
        self.items: list[FlowState] = []

    def push(self, state: FlowState):
        self.items.append(state)
        if len(self.items) > self.limit:
            self._prune()

    def _prune(self):
        items = self.items
        t_end = items[-1].t
        head, tail = items[: -self.dense_tail], items[-self.dense_tail :]
        kept = []
        last_t = None
        for st in head:
            if last_t is None or (st.t - last_t) >= (t_end - st.t) / 20.0:
                kept.append(st)
                last_t = st.t
        self.items = kept + tail


def evolve(initial: PlanarCurve, config: FlowConfig) -> FlowTrajectory:
    """Run the reduced flow until t_max, a singularity trigger, or mesh failure."""
    kap0 = float(np.abs(curvature_and_radial(initial).kappa).max())
    curve = redistribute(initial, config.target_spacing(kap0))
    if config.boundary == "pinned":
        nodes = curve.nodes.copy()
        nodes[0] = initial.nodes[0]
        nodes[-1] = initial.nodes[-1]
        curve = PlanarCurve(nodes, curve.closed)
    closed = curve.closed
    pinned = config.boundary == "pinned"
    n = config.n

    ts, kmaxs, rmins, thmins, thmaxs = [], [], [], [], []
    buf = _SnapshotBuffer(config.max_snapshots)
    t = 0.0
    k = 0
    termination = TERM_TMAX
    nodes = curve.nodes.copy()

    use_fast = HAVE_NUMBA and not (pinned and config.rays is not None and config.collar_radius is not None)
    if use_fast:
        while True:
            if k % config.snapshot_interval == 0:
                buf.push(FlowState(t=t, curve=PlanarCurve(nodes.copy(), closed), n=n))
            to_redist = config.redistribution_period - (k % config.redistribution_period)
            to_snap = config.snapshot_interval - (k % config.snapshot_interval)
            chunk = int(min(to_redist, to_snap))
            m = nodes.size
            o_k = np.empty(chunk + 1)
            o_r = np.empty(chunk + 1)
            o_tl = np.empty(chunk + 1)
            o_th = np.empty(chunk + 1)
            o_t = np.empty(chunk + 1)
            taken, t, status = _kernel_chunk(
                nodes, closed, float(n), config.cfl, t, config.t_max,
                config.r_floor, config.kappa_ceiling, pinned, chunk,
                o_k, o_r, o_tl, o_th, o_t,
            )
            last = taken + 1 if status != 0 else taken
            rows = slice(0, last)
            ts.extend(o_t[rows])
            kmaxs.extend(o_k[rows])
            rmins.extend(o_r[rows])
            thmins.extend(o_tl[rows])
            thmaxs.extend(o_th[rows])
            k += taken
            if status == 1:
                termination = TERM_SINGULAR
                break
            if status == 2:
                termination = TERM_TMAX
                break
            if status == 3:
                termination = TERM_MESH
                if not np.isfinite(nodes).all():
                    nodes = buf.items[-1].curve.nodes.copy()
                    t = buf.items[-1].t
                break
            if k % config.redistribution_period == 0:
                try:
                    end0, end1 = nodes[0], nodes[-1]
                    cv = redistribute(PlanarCurve(nodes, closed), config.target_spacing(kmaxs[-1]))
                    nodes = cv.nodes.copy()
                    if pinned:
                        nodes[0], nodes[-1] = end0, end1
                except (MeshError, DomainError):
                    termination = TERM_MESH
                    break
        # drop a trailing non-finite row written just before a mesh failure
        while ts and not (np.isfinite(kmaxs[-1]) and np.isfinite(rmins[-1])):
            ts.pop(), kmaxs.pop(), rmins.pop(), thmins.pop(), thmaxs.pop()
        final_state = FlowState(t=t, curve=PlanarCurve(nodes.copy(), closed), n=n)
        if not buf.items or buf.items[-1].t < t:
            buf.push(final_state)
        summary = FlowSummary(
            t=np.array(ts),
            kappa_max=np.array(kmaxs),
            r_min=np.array(rmins),
            theta_min=np.array(thmins),
            theta_max=np.array(thmaxs),
        )
        traj = FlowTrajectory(
            snapshots=buf.items,
            summary=summary,
            termination=termination,
            config=config,
            singularity=None,
        )
        if termination == TERM_SINGULAR:
            traj.singularity = classify_singularity_rate(traj)
        return traj

    while True:
        try:
            v, N, kappa, r = _velocity_arrays(nodes, closed, n)
        except (MeshError, DomainError):
            termination = TERM_MESH
            break
        interior = slice(None) if closed else slice(2, -2)
        kmax = float(np.abs(kappa[interior]).max())
        rmin = float(r.min())
        theta = np.unwrap(np.angle(N / 1j)) + (n - 1) * np.unwrap(np.angle(nodes))
        theta -= math.floor(theta[0] / math.pi) * math.pi
        ts.append(t)
        kmaxs.append(kmax)
        rmins.append(rmin)
        thmins.append(float(theta.min()))
        thmaxs.append(float(theta.max()))
        if k % config.snapshot_interval == 0:
            buf.push(FlowState(t=t, curve=PlanarCurve(nodes.copy(), closed), n=n))
        if rmin < config.r_floor or kmax > config.kappa_ceiling:
            termination = TERM_SINGULAR
            break
        if t >= config.t_max - 1e-15:
            termination = TERM_TMAX
            break
        try:
            dt = min(_step_dt(nodes, closed, config.cfl), config.t_max - t)
            if dt < 1e-16:
                raise MeshError("time step underflow")
            mid = nodes + (0.5 * dt) * v * N
            if pinned:
                mid[0], mid[-1] = nodes[0], nodes[-1]
            v2, N2, _, _ = _velocity_arrays(mid, closed, n)
            new_nodes = nodes + dt * v2 * N2
            if pinned:
                new_nodes[0], new_nodes[-1] = nodes[0], nodes[-1]
            if pinned and config.rays is not None and config.collar_radius is not None:
                new_nodes = _apply_collar(new_nodes, config.rays, config.collar_radius)
            if not np.isfinite(new_nodes).all():
                raise MeshError("non-finite node positions")
            nodes = new_nodes
            t += dt
            k += 1
            if k % config.redistribution_period == 0:
                end0, end1 = nodes[0], nodes[-1]
                cv = redistribute(PlanarCurve(nodes, closed), config.target_spacing(kmax))
                nodes = cv.nodes.copy()
                if pinned:
                    nodes[0], nodes[-1] = end0, end1
        except (MeshError, DomainError):
            # partial outputs retained; the last recorded state is still valid
            termination = TERM_MESH
            break

    final_state = FlowState(t=t, curve=PlanarCurve(nodes.copy(), closed), n=n)
    if not buf.items or buf.items[-1].t < t:
        buf.push(final_state)

    summary = FlowSummary(
        t=np.array(ts),
        kappa_max=np.array(kmaxs),
        r_min=np.array(rmins),
        theta_min=np.array(thmins),
        theta_max=np.array(thmaxs),
    )
    traj = FlowTrajectory(
        snapshots=buf.items,
        summary=summary,
        termination=termination,
        config=config,
        singularity=None,
    )
    if termination == TERM_SINGULAR:
        traj.singularity = classify_singularity_rate(traj)
    return traj


def _singular_tail(summary: FlowSummary):
    r_end = summary.r_min[-1]
    sel = summary.r_min <= math.sqrt(10.0) * r_end
    if sel.sum() < 20:
        sel = np.zeros_like(sel)
        sel[-min(20, sel.size) :] = True
    return sel


def estimate_singular_time(summary: FlowSummary) -> tuple[float, float]:
    """Extrapolate T from the collapse of min r as a free power law.

    T is chosen to make log(min r) most linear in log(T - t) over the final
    1.5 decades; a fixed square-root law would bias T early whenever the
    radius collapses faster than (T - t)^(1/2), which is exactly the regime
    of interest.  Returns (T_est, prefactor of the fitted power law).
    """
    sel = _singular_tail(summary)
    if sel.sum() < 10:
        raise NumericalError("too few samples to extrapolate the singular time")
    t_tail = summary.t[sel]
    r_tail = summary.r_min[sel]
    if r_tail[-1] >= r_tail[0]:
        raise NumericalError("min radius is not collapsing; cannot extrapolate")
    t_end = float(summary.t[-1])
    span = max(t_end - float(t_tail[0]), 1e-14)

    def badness(T):
        tau = T - t_tail
        if tau.min() <= 0:
            return 1e9
        keep = tau <= tau[-1] * 10**1.5
        if keep.sum() < 8:
            keep = slice(None)
        x = np.log(tau[keep])
        y = np.log(r_tail[keep])
        slope, intercept = np.polyfit(x, y, 1)
        return float(((y - slope * x - intercept) ** 2).mean())

    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        badness,
        bounds=(t_end + 1e-9 * span, t_end + span),
        method="bounded",
        options={"xatol": 1e-13 * max(1.0, t_end)},
    )
    T = float(res.x)
    tau = T - t_tail
    slope, intercept = np.polyfit(np.log(tau), np.log(r_tail), 1)
    return T, float(math.exp(intercept))


def classify_singularity_rate(traj: FlowTrajectory) -> SingularityReport:
    """Fit max|kappa| ~ b (T - t)^(-sigma) over the final decade and classify.

    sigma <= 0.55 is Type I evidence, above it Type II; a poor fit or a run
    that simply reached t_max yields the inconclusive sentinel.
    """
    summary = traj.summary
    if traj.termination != TERM_SINGULAR:
        return SingularityReport(
            T_est=float("nan"),
            location=None,
            sigma=float("nan"),
            type_evidence=TYPE_INCONCLUSIVE,
            fit_quality=0.0,
        )
    T_est, _ = estimate_singular_time(summary)
    sel = _singular_tail(summary)
    dt_last = summary.t[-1] - summary.t[-2] if summary.t.size > 1 else 0.0
    tau = T_est - summary.t
    good = sel & (tau > 3.0 * dt_last)
    if good.sum() < 10:
        return SingularityReport(
            T_est=T_est, location=None, sigma=float("nan"),
            type_evidence=TYPE_INCONCLUSIVE, fit_quality=0.0,
        )
    x = np.log(tau[good])
    y = np.log(summary.kappa_max[good])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    quality = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 0.0
    sigma = -slope

    # the singular location is reported only with a confirmed collapse trend
    r_tail = summary.r_min[sel]
    decreasing = np.mean(np.diff(r_tail) <= 1e-12) if r_tail.size > 1 else 0.0
    location = None
    if decreasing >= 0.9 and r_tail[-1] < 0.6 * r_tail[0]:
        last = traj.snapshots[-1].curve.nodes
        location = complex(last[np.argmin(np.abs(last))])

    if quality < 0.9:
        evidence = TYPE_INCONCLUSIVE
    else:
        evidence = TYPE_I if sigma <= SIGMA_SPLIT else TYPE_II
    return SingularityReport(
        T_est=T_est,
        location=location,
        sigma=float(sigma),
        type_evidence=evidence,
        fit_quality=quality,
        kappa_prefactor=float(math.exp(intercept)),
    )


def neves_initial(beta: float, n: int, samples: int = 1200, r_max: float = 6.0) -> PlanarCurve:
    """Wedge curve (sin(pi s / beta))^(-beta/pi) e^{i s}, truncated at radius r_max.

    For beta in (pi/n, 2pi/n) the reduced flow of this data collapses to the
    origin in finite time.
    """
    if not (0.0 < beta < 2.0 * math.pi / n):
        raise DomainError("asymptote span beta must lie in (0, 2 pi / n)")
    if r_max <= 1.0:
        raise DomainError("truncation radius must exceed the waist radius 1")
    eps = (beta / math.pi) * math.asin(r_max ** (-math.pi / beta))
    s = np.linspace(eps, beta - eps, max(40 * samples, 20000))
    pts = np.sin(math.pi * s / beta) ** (-beta / math.pi) * np.exp(1j * s)
    L = float(np.abs(np.diff(pts)).sum())
    return PlanarCurve(resample_path(pts, L / (samples - 1)), closed=False)


def neves_rays(beta: float) -> tuple[Ray, Ray]:
    """Asymptote rays of the wedge data: arguments 0 and beta."""
    return Ray(0j, 1.0 + 0j), Ray(0j, np.exp(1j * beta))


@dataclass(frozen=True)
class AvoidanceReport:
    min_separation: float
    disjoint: bool
    t_start: float
    t_end: float


def avoidance_check(traj_a: FlowTrajectory, traj_b: FlowTrajectory) -> AvoidanceReport:
    """Minimum node-set separation of two trajectories over their common times.

    The disjoint flag requires the separation to exceed the coarser target
    spacing at every sampled common time.
    """
    ta, tb = traj_a.times(), traj_b.times()
    t0, t1 = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if t1 <= t0:
        raise DomainError("trajectories do not overlap in time")
    sample_times = ta[(ta >= t0) & (ta <= t1)]
    if sample_times.size == 0:
        sample_times = np.array([t0, t1])
    spacing_ref = max(traj_a.config.spacing, traj_b.config.spacing)
    min_sep = math.inf
    for t in sample_times:
        ca = traj_a.curve_at(float(t))
        cb = traj_b.curve_at(float(t))
        min_sep = min(min_sep, point_set_separation(ca.nodes, cb.nodes))
    return AvoidanceReport(
        min_separation=float(min_sep),
        disjoint=bool(min_sep > spacing_ref),
        t_start=float(t0),
        t_end=float(t1),
    )


@dataclass(frozen=True)
class MonitorReport:
    sup_h_ratio: float
    sup_a_ratio: float
    initial_h_ratio: float
    initial_a_ratio: float
    growth_flag: bool


def monitor_estimates(traj: FlowTrajectory) -> MonitorReport:
    """Empirical sup of |H|^2 / (1 + 1/r^2) and of the |A|^2 proxy ratio.

    |H|^2 is the squared normal speed; the |A|^2 proxy kappa^2 + 3(n-1) p^2
    omits the orbital second-fundamental-form block, whose contribution is
    covered by the same 1/r^2 envelope.  The flag reports a more than tenfold
    growth of either sup over the run.
    """
    n = traj.n
    sup_h = sup_a = 0.0
    init_h = init_a = None
    for st in traj.snapshots:
        d = st.diagnostics
        interior = slice(None) if st.curve.closed else slice(2, -2)
        p = np.abs(d.radial[interior]) / d.r[interior] ** 2
        v = d.kappa[interior] - (n - 1) * d.radial[interior] / d.r[interior] ** 2
        env = 1.0 + 1.0 / d.r[interior] ** 2
        h_ratio = float((v**2 / env).max())
        a_ratio = float(((d.kappa[interior] ** 2 + 3 * (n - 1) * p**2) / env).max())
        if init_h is None:
            init_h, init_a = h_ratio, a_ratio
        sup_h = max(sup_h, h_ratio)
        sup_a = max(sup_a, a_ratio)
    flag = sup_h > 10.0 * init_h or sup_a > 10.0 * init_a
    return MonitorReport(
        sup_h_ratio=sup_h,
        sup_a_ratio=sup_a,
        initial_h_ratio=init_h,
        initial_a_ratio=init_a,
        growth_flag=bool(flag),
    )

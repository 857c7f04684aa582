"""Closed-form soliton profiles and the shooting pipeline for shrinkers/expanders.

Profile curves of self-similar solutions satisfy, in arclength parametrisation,

    kappa = -(lam - (n-1)/r^2) <gamma, N>,

with lam = +1 for shrinkers, -1 for expanders and 0 for static (minimal)
profiles.  The sign convention follows the classification of the closed
shrinking curves by winding number p and curvature-maxima count q with
p/q in (1/(2n), 1/sqrt(2n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .curves import MIN_NODES, PlanarCurve, curvature_and_radial, curvature_maxima_count, frame, resample_path, winding_number
from .errors import DomainError, NumericalError, SingularRadiusError

KIND_CONE = "cone"
KIND_SLAG = "special-lagrangian"
KIND_SHRINKER = "shrinker"
KIND_EXPANDER = "expander"
KIND_GRIM = "grim-reaper"

_KINDS = (KIND_CONE, KIND_SLAG, KIND_SHRINKER, KIND_EXPANDER, KIND_GRIM)


def shrinker_ratio_window(n: int) -> tuple[float, float]:
    """Open admissible window for p/q: (1/(2n), 1/sqrt(2n))."""
    return 1.0 / (2 * n), 1.0 / math.sqrt(2 * n)


@dataclass(frozen=True)
class SolitonSpec:
    """Parameters of a classified self-similar profile."""

    kind: str
    n: int
    k: int = 0
    theta_bar: float = 0.0
    B: float | None = None
    p: int | None = None
    q: int | None = None
    alpha: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown soliton kind {self.kind!r}")
        if self.n < 1:
            raise DomainError("ambient dimension n must be >= 1")
        if self.kind == KIND_SLAG:
            if self.B is None or self.B <= 0:
                raise DomainError("special-lagrangian profile needs B > 0")
        if self.kind == KIND_SHRINKER:
            p, q = self.p, self.q
            if p is None or q is None or p < 1 or q < 1:
                raise DomainError("shrinker needs positive integers p, q")
            if math.gcd(p, q) != 1:
                raise DomainError("shrinker indices must be coprime")
            # open interval, checked exactly: 1/(2n) < p/q < 1/sqrt(2n)
            if not (2 * self.n * p > q and 2 * self.n * p * p < q * q):
                raise DomainError("p/q outside the open window (1/(2n), 1/sqrt(2n))")
        if self.kind == KIND_EXPANDER:
            if self.alpha is None or not (0.0 < self.alpha < math.pi / self.n):
                raise DomainError("expander angle must lie in (0, pi/n)")
        lam = {KIND_SHRINKER: 1.0, KIND_EXPANDER: -1.0}.get(self.kind, 0.0)
        if self.lam is None:
            object.__setattr__(self, "lam", lam)


def cone_direction(spec: SolitonSpec) -> float:
    """Ray argument (theta_bar + k pi)/n of a cone profile."""
    return (spec.theta_bar + spec.k * math.pi) / spec.n


def sample_cone(spec: SolitonSpec, r_range: tuple[float, float], spacing: float) -> PlanarCurve:
    """Nodes on the ray r -> r e^{i (theta_bar/n + k pi/n)}, uniform spacing."""
    if spec.kind != KIND_CONE:
        raise DomainError("spec is not a cone")
    r0, r1 = r_range
    if not (0.0 < r0 < r1):
        raise DomainError("cone range must satisfy 0 < r_min < r_max")
    count = max(MIN_NODES, int(np.rint((r1 - r0) / spacing)) + 1)
    r = np.linspace(r0, r1, count)
    return PlanarCurve(r * np.exp(1j * cone_direction(spec)), closed=False)


def slag_point(spec: SolitonSpec, alpha: np.ndarray) -> np.ndarray:
    """Closed form B cos(n a)^(-1/n) e^{i (a + theta_bar/n - pi/(2n) + k pi/n)}."""
    n = spec.n
    r = spec.B * np.cos(n * alpha) ** (-1.0 / n)
    phase = alpha + spec.theta_bar / n - math.pi / (2 * n) + spec.k * math.pi / n
    return r * np.exp(1j * phase)


def slag_alpha_limit(spec: SolitonSpec, r_cap: float) -> float:
    """Parameter bound |alpha| at which the closed form reaches radius r_cap."""
    if r_cap <= spec.B:
        raise DomainError("radius cap must exceed the apsis distance B")
    return math.acos((spec.B / r_cap) ** spec.n) / spec.n


def sample_special_lagrangian(
    spec: SolitonSpec,
    alpha_range: tuple[float, float],
    spacing: float,
    r_cap: float | None = None,
) -> PlanarCurve:
    """Sample the static profile at uniform arclength over an interior parameter range.

    The parameter grid is marched at bounded arc increments, since the speed
    B cos(n a)^(-(n+1)/n) blows up toward the asymptotic ends and a uniform
    parameter grid would cut the legs short.
    """
    if spec.kind != KIND_SLAG:
        raise DomainError("spec is not a special-lagrangian profile")
    a0, a1 = alpha_range
    lim = math.pi / (2 * spec.n)
    if not (-lim < a0 < a1 < lim):
        raise DomainError("singular endpoint: alpha range must be strictly inside (-pi/2n, pi/2n)")
    if r_cap is not None:
        cap = slag_alpha_limit(spec, r_cap)
        a0, a1 = max(a0, -cap), min(a1, cap)
        if a0 >= a1:
            raise DomainError("radius cap leaves an empty parameter range")
    n = spec.n
    h = spacing / 3.0
    alphas = [a0]
    a = a0
    while a < a1:
        speed = spec.B * math.cos(n * a) ** (-(n + 1.0) / n)
        a = min(a + h / speed, a1)
        alphas.append(a)
    if len(alphas) < 4:
        alphas = list(np.linspace(a0, a1, 8))
    pts = slag_point(spec, np.array(alphas))
    return PlanarCurve(resample_path(pts, spacing), closed=False)


def asymptotes_of(spec: SolitonSpec) -> tuple[SolitonSpec, SolitonSpec]:
    """Cone pair (indices k-1 and k, same theta_bar) framing the static profile."""
    if spec.kind != KIND_SLAG:
        raise DomainError("asymptotes are defined for special-lagrangian profiles")
    lower = SolitonSpec(kind=KIND_CONE, n=spec.n, k=spec.k - 1, theta_bar=spec.theta_bar)
    upper = SolitonSpec(kind=KIND_CONE, n=spec.n, k=spec.k, theta_bar=spec.theta_bar)
    return lower, upper


def grim_reaper(x_range: tuple[float, float], spacing: float) -> PlanarCurve:
    """Graph of log cos x; the grid straddles x = 0 without sampling the origin."""
    a, b = x_range
    if not (-math.pi / 2 < a < b < math.pi / 2):
        raise DomainError("grim reaper range must be strictly inside (-pi/2, pi/2)")
    count = max(MIN_NODES, int(math.ceil((b - a) / spacing)))
    if count % 2:
        count += 1
    x = a + (np.arange(count) + 0.5) * (b - a) / count
    return PlanarCurve(x + 1j * np.log(np.cos(x)), closed=False)


@dataclass(frozen=True)
class ShootingState:
    """Phase point of the arclength profile ODE."""

    position: complex
    direction: complex
    s: float = 0.0
    swept_angle: float = 0.0

    def __post_init__(self):
        if abs(abs(self.direction) - 1.0) > 1e-9:
            raise DomainError("direction must be a unit vector")
        if self.position == 0:
            raise DomainError("position must avoid the origin")


def soliton_rhs(state: ShootingState, lam: float, n: int, r_floor: float = 1e-12):
    """Arclength derivative (position', direction', swept_angle')."""
    pos, d = state.position, state.direction
    r2 = (pos * pos.conjugate()).real
    if r2 < r_floor * r_floor:
        raise SingularRadiusError("radius below floor in profile ODE")
    radial = (pos * d.conjugate()).imag
    kappa = -(lam - (n - 1) / r2) * radial
    return d, 1j * kappa * d, (pos.conjugate() * d).imag / r2


def _rk4(pos, d, swept, h, lam, n1):
    """One RK4 step of the profile ODE; n1 = n - 1.  Scalar complex arithmetic."""

    def rhs(p, t):
        r2 = (p * p.conjugate()).real
        radial = (p * t.conjugate()).imag
        kappa = -(lam - n1 / r2) * radial
        return t, 1j * kappa * t, (p.conjugate() * t).imag / r2

    k1p, k1d, k1a = rhs(pos, d)
    k2p, k2d, k2a = rhs(pos + 0.5 * h * k1p, d + 0.5 * h * k1d)
    k3p, k3d, k3a = rhs(pos + 0.5 * h * k2p, d + 0.5 * h * k2d)
    k4p, k4d, k4a = rhs(pos + h * k3p, d + h * k3d)
    pos = pos + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
    d = d + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
    d = d / abs(d)
    swept = swept + h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
    return pos, d, swept


class _Tracer:
    """Adaptive decimation of the integration trace: keep a node after enough
    turning or enough travel relative to the local radius."""

    def __init__(self, turn=0.05, travel=0.05):
        self.turn = turn
        self.travel = travel
        self.points = []
        self._last_pos = None
        self._last_dir = None

    def push(self, pos, d, force=False):
        if self._last_pos is None or force:
            self.points.append(pos)
            self._last_pos, self._last_dir = pos, d
            return
        moved = abs(pos - self._last_pos)
        turned = abs((d * self._last_dir.conjugate()).imag)
        if moved >= self.travel * abs(pos) or turned >= self.turn:
            self.points.append(pos)
            self._last_pos, self._last_dir = pos, d


def _step_size(r: float, step_scale: float, lam: float = 1.0, n: int = 2) -> float:
    # 1e-3 * r resolves the geometry; the second bound keeps RK4 inside its
    # stability region for the stiff tangential mode of rate |lam| r + n/r
    return step_scale * min(1e-3 * r, 0.4 / (abs(lam) * r + n / r))


def integrate_soliton(
    start: ShootingState,
    lam: float,
    n: int,
    max_length: float,
    r_stop: float | None = None,
    r_floor: float = 1e-9,
    step_scale: float = 1.0,
    trace: bool = True,
    trace_turn: float = 0.05,
    trace_travel: float = 0.05,
):
    """Fixed-step RK4 along the profile ODE with step <= 1e-3 * r.

    Stops exactly at arclength max_length (final partial step) or once the
    radius exceeds r_stop.  Returns (traced PlanarCurve or None, final
    ShootingState); trace_turn/trace_travel control the decimation of the
    recorded polyline.
    """
    pos, d, swept = complex(start.position), complex(start.direction), start.swept_angle
    s = start.s
    n1 = n - 1
    tracer = _Tracer(turn=trace_turn, travel=trace_travel) if trace else None
    if tracer is not None:
        tracer.push(pos, d, force=True)
    s_end = start.s + max_length
    while s < s_end:
        r = abs(pos)
        if r < r_floor:
            raise SingularRadiusError("radius below floor during integration")
        if r_stop is not None and r >= r_stop:
            break
        h = min(_step_size(r, step_scale, lam, n), s_end - s)
        pos, d, swept = _rk4(pos, d, swept, h, lam, n1)
        s += h
        if tracer is not None:
            tracer.push(pos, d)
    if tracer is not None:
        tracer.push(pos, d, force=True)
    final = ShootingState(position=pos, direction=d, s=s, swept_angle=swept)
    curve = None
    if tracer is not None and len(tracer.points) >= MIN_NODES:
        pts = np.array(tracer.points, dtype=complex)
        keep = np.concatenate([[True], np.abs(np.diff(pts)) > 0])
        curve = PlanarCurve(pts[keep], closed=False) if keep.sum() >= MIN_NODES else None
    return curve, final


def _radial_velocity(pos, d):
    return (pos.conjugate() * d).real / abs(pos)


def _refine_apsis(pos, d, swept, h, lam, n1):
    """Bisect the step fraction at which dr/ds crosses zero; returns the event state."""
    lo, hi = 0.0, 1.0
    c0 = _radial_velocity(pos, d)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        p, t, a = _rk4(pos, d, swept, mid * h, lam, n1)
        if _radial_velocity(p, t) * c0 > 0:
            lo = mid
        else:
            hi = mid
    frac = 0.5 * (lo + hi)
    p, t, a = _rk4(pos, d, swept, frac * h, lam, n1)
    return p, t, a, frac


def _integrate_apsis_events(
    r_apsis: float,
    lam: float,
    n: int,
    n_events: int,
    step_scale: float = 1.0,
    max_length: float | None = None,
    tracer: _Tracer | None = None,
):
    """Integrate from a perpendicular apsis until dr/ds has crossed zero n_events times.

    Returns (pos, dir, swept_angle) at the refined final event.  Raises
    DomainError when the orbit never turns within the length budget.
    """
    pos, d, swept = complex(r_apsis), 1j, 0.0
    n1 = n - 1
    if max_length is None:
        max_length = 500.0 * max(r_apsis, math.sqrt(max(n / abs(lam), 1.0))) * max(1, n_events)
    if tracer is not None:
        tracer.push(pos, d, force=True)
    s = 0.0
    crossings = 0
    c_prev = 0.0  # exact zero at the apsis start
    while s < max_length:
        h = _step_size(abs(pos), step_scale, lam, n)
        new_pos, new_d, new_swept = _rk4(pos, d, swept, h, lam, n1)
        c_new = _radial_velocity(new_pos, new_d)
        if c_prev != 0.0 and (c_new == 0.0 or (c_new > 0) != (c_prev > 0)):
            pos, d, swept, frac = _refine_apsis(pos, d, swept, h, lam, n1)
            s += frac * h
            crossings += 1
            if tracer is not None:
                tracer.push(pos, d)
            if crossings == n_events:
                return pos, d, swept
            # step firmly past the event before watching for the next sign change
            h2 = 1e-3 * _step_size(abs(pos), step_scale, lam, n)
            pos, d, swept = _rk4(pos, d, swept, h2, lam, n1)
            s += h2
            c_prev = _radial_velocity(pos, d)
            continue
        pos, d, swept = new_pos, new_d, new_swept
        if tracer is not None:
            tracer.push(pos, d)
        c_prev = c_new
        s += h
    raise DomainError("no radial turning point found: orbit appears non-oscillatory")


def period_angle(
    r_apsis: float,
    lam: float = 1.0,
    n: int = 2,
    step_scale: float = 1.0,
    max_length: float | None = None,
) -> float:
    """Angle of arg(gamma) swept over one radial period, apsis to equivalent apsis.

    Starts perpendicular to the position vector at radius r_apsis; the next
    equivalent apsis is the second zero of dr/ds.  Curvature extrema sit at
    the apsides, so this equals the angle between consecutive curvature maxima.
    """
    if r_apsis <= 0:
        raise DomainError("apsis radius must be positive")
    if lam <= 0:
        raise DomainError("oscillatory orbits need lam > 0")
    r_circle = math.sqrt(n / lam)
    if abs(r_apsis - r_circle) < 1e-9 * r_circle:
        raise DomainError("start is the stationary circle; orbit is non-oscillatory")
    _, _, swept = _integrate_apsis_events(
        r_apsis, lam, n, n_events=2, step_scale=step_scale, max_length=max_length
    )
    return float(swept)


@dataclass(frozen=True)
class ShrinkerResult:
    spec: SolitonSpec
    curve: PlanarCurve
    r_apsis: float
    closure_gap: float
    direction_gap: float
    winding: int
    maxima: int


def find_shrinker(p: int, q: int, n: int, step_scale: float = 1.0) -> ShrinkerResult:
    """Reconstruct the closed shrinking profile with winding p and q curvature maxima.

    Root-finds the apsis radius so that the swept angle per radial period is
    2 pi p / q (bisection to 1e-10), then integrates q periods and checks the
    closure gap.
    """
    spec = SolitonSpec(kind=KIND_SHRINKER, n=n, p=p, q=q)
    target = 2.0 * math.pi * p / q
    r_circle = math.sqrt(n)
    hi = r_circle * (1.0 - 1e-6)
    if period_angle(hi, 1.0, n, step_scale) < target:
        raise NumericalError("period angle below target at the circle end of the bracket")
    lo = None
    probe = 0.7 * r_circle
    while probe > 1e-7:
        if period_angle(probe, 1.0, n, step_scale) < target:
            lo = probe
            break
        probe *= 0.55
    if lo is None:
        raise NumericalError(f"could not bracket the apsis radius for (p, q) = ({p}, {q})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-10:
            break
        if period_angle(mid, 1.0, n, step_scale) < target:
            lo = mid
        else:
            hi = mid
    r_apsis = 0.5 * (lo + hi)

    # trace q radial periods and close up
    tracer = _Tracer()
    pos, d, _ = _integrate_apsis_events(
        r_apsis, 1.0, n, n_events=2 * q, step_scale=step_scale, tracer=tracer
    )
    closure_gap = abs(pos - complex(r_apsis))
    direction_gap = abs(d - 1j)
    pts = np.array(tracer.points, dtype=complex)
    if abs(pts[-1] - pts[0]) < 1e-9 * r_apsis:
        pts = pts[:-1]
    curve = PlanarCurve(pts, closed=True)
    wind = winding_number(curve)
    maxima = curvature_maxima_count(curve)
    if wind != p or maxima != q:
        raise NumericalError(
            f"reconstructed orbit has (winding, maxima) = ({wind}, {maxima}), expected ({p}, {q})"
        )
    return ShrinkerResult(
        spec=spec,
        curve=curve,
        r_apsis=r_apsis,
        closure_gap=closure_gap,
        direction_gap=direction_gap,
        winding=wind,
        maxima=maxima,
    )


def measure_expander_span(d: float, n: int, step_scale: float = 1.0) -> float:
    """Asymptote span of the lam = -1 orbit shot perpendicular from radius d.

    The span is read from the outgoing tangent direction at a measurement
    radius of min(max(1e3 d, 25), 40); the tangent converges to the asymptote
    direction like exp(-r^2/2), so it is machine-exact well below this cap,
    while integrating further would serve no purpose.  By reflection symmetry
    the span is twice the final tangent argument.
    """
    if d <= 0:
        raise DomainError("apsis distance must be positive")
    r_stop = min(max(1e3 * d, 25.0), 40.0)
    pos, t, swept = complex(d), 1j, 0.0
    n1 = n - 1
    s = 0.0
    max_length = 6.0 * r_stop
    while s < max_length:
        r = abs(pos)
        if r >= r_stop:
            break
        h = _step_size(r, step_scale, -1.0, n)
        pos, t, swept = _rk4(pos, t, swept, h, -1.0, n1)
        s += h
    else:
        raise NumericalError("expander orbit failed to reach the measurement radius")
    return 2.0 * math.atan2(t.imag, t.real)


@dataclass(frozen=True)
class ExpanderResult:
    spec: SolitonSpec
    curve: PlanarCurve
    apsis_distance: float
    measured_span: float


def find_expander(alpha: float, n: int, step_scale: float = 1.0, span_tol: float = 1e-6) -> ExpanderResult:
    """Shoot the expanding profile whose asymptote span equals alpha."""
    spec = SolitonSpec(kind=KIND_EXPANDER, n=n, alpha=alpha)

    def gap(d):
        return measure_expander_span(d, n, step_scale) - alpha

    # span decreases with apsis distance: pi/n limit as d -> 0
    grid = np.geomspace(1e-3, 20.0, 24)
    if gap(grid[0]) < 0:
        raise NumericalError("span already below target at the smallest apsis distance")
    bracket = None
    for d_prev, dd in zip(grid[:-1], grid[1:]):
        if gap(dd) <= 0:
            bracket = (d_prev, dd)
            break
    if bracket is None:
        raise NumericalError("could not bracket the apsis distance for the requested span")
    d_star = brentq(gap, *bracket, xtol=1e-13, rtol=8.9e-16)
    measured = measure_expander_span(d_star, n, step_scale)
    if abs(measured - alpha) > span_tol:
        raise NumericalError("span root-finding did not reach the requested tolerance")

    # trace one half and mirror across the apsis axis
    start = ShootingState(position=complex(d_star), direction=1j)
    r_out = min(max(1e3 * d_star, 25.0), 40.0)
    half, _ = integrate_soliton(start, -1.0, n, max_length=4.0 * r_out, r_stop=r_out, step_scale=step_scale)
    fwd = half.nodes
    nodes = np.concatenate([np.conj(fwd[::-1])[:-1], fwd])
    curve = PlanarCurve(nodes, closed=False)
    return ExpanderResult(spec=spec, curve=curve, apsis_distance=d_star, measured_span=measured)


def normal_speed(curve: PlanarCurve, lam: float, n: int) -> np.ndarray:
    """Per-node kappa + (lam - (n-1)/r^2) * radial, the soliton equation residual."""
    diag = curvature_and_radial(curve)
    return diag.kappa + (lam - (n - 1) / diag.r**2) * diag.radial


def soliton_residual(curve: PlanarCurve, lam: float, n: int) -> float:
    """Max residual of the soliton equation over interior nodes."""
    resid = np.abs(normal_speed(curve, lam, n))
    if not curve.closed:
        resid = resid[2:-2]
    return float(resid.max())


def translator_deficiency(curve: PlanarCurve, n: int) -> float:
    """Distance of the profile from solving the translator equation.

    Minimises the rms of (normal velocity - <V, N>) over unit vectors V; a
    genuine translating profile gives zero for its velocity direction.  Used
    as a nonexistence consistency check for n >= 2.
    """
    diag = curvature_and_radial(curve)
    v = diag.kappa - (n - 1) * diag.radial / diag.r**2
    _, N = frame(curve)
    if not curve.closed:
        v, N = v[2:-2], N[2:-2]

    def rms(psi):
        V = np.exp(1j * psi)
        return float(np.sqrt(np.mean((v - (V * np.conj(N)).real) ** 2)))

    grid = np.linspace(0.0, 2.0 * np.pi, 361)
    best = min(grid, key=rms)
    res = minimize_scalar(rms, bracket=(best - 0.05, best, best + 0.05))
    return float(min(rms(best), res.fun))

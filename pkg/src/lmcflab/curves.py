"""Discrete differential geometry of immersed curves in the punctured plane.

Curves are stored as ordered complex node lists.  The plane is identified
with the complex line through a point of the zero level set, so positions,
tangents and normals are complex numbers; the normal convention is N = iT
(counterclockwise), which makes the signed curvature of a counterclockwise
circle +1/R.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import DomainError, MeshError

MIN_NODES = 8

# relative gap below which two neighbour values of |kappa| count as a plateau
MAXIMA_PLATEAU_RTOL = 1e-8
# relative curvature variation below which a closed curve counts as a circle
CIRCLE_VARIATION_RTOL = 1e-6

CIRCLE_SENTINEL: Literal["circle"] = "circle"


@dataclass(frozen=True)
class PlanarCurve:
    """Immersed polyline in C \\ {0}.

    nodes   -- ordered complex positions, at least MIN_NODES of them
    closed  -- cyclic node list without a duplicated seam point
    """

    nodes: np.ndarray
    closed: bool = False

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=np.complex128)
        if nodes.ndim != 1:
            raise DomainError("curve nodes must be a flat sequence of points")
        object.__setattr__(self, "nodes", nodes)
        self.validate()

    def validate(self):
        n = self.nodes.size
        if n < MIN_NODES:
            raise DomainError(f"curve needs at least {MIN_NODES} nodes, got {n}")
        seg = _segments(self.nodes, self.closed)
        if np.any(np.abs(seg) == 0.0):
            raise DomainError("consecutive nodes must be distinct")
        if self.closed and self.nodes[0] == self.nodes[-1]:
            raise DomainError("closed curve must not duplicate the seam point")
        if np.any(self.nodes == 0.0):
            raise DomainError("curves live in the punctured plane; node at origin")

    def __len__(self):
        return self.nodes.size

    @property
    def xy(self) -> np.ndarray:
        """Node coordinates as a (N, 2) real array."""
        return np.column_stack([self.nodes.real, self.nodes.imag])

    @classmethod
    def from_xy(cls, xy: np.ndarray, closed: bool = False) -> "PlanarCurve":
        xy = np.asarray(xy, dtype=float)
        return cls(xy[:, 0] + 1j * xy[:, 1], closed)

    def spacing(self) -> np.ndarray:
        """Segment lengths (cyclic for closed curves)."""
        return np.abs(_segments(self.nodes, self.closed))

    def length(self) -> float:
        return float(self.spacing().sum())

    def rotated(self, phi: float) -> "PlanarCurve":
        return PlanarCurve(self.nodes * np.exp(1j * phi), self.closed)

    def scaled(self, lam: float) -> "PlanarCurve":
        return PlanarCurve(self.nodes * lam, self.closed)

    def reversed(self) -> "PlanarCurve":
        return PlanarCurve(self.nodes[::-1], self.closed)


@dataclass(frozen=True)
class CurveDiagnostics:
    """Per-node signed curvature, radial component <gamma, N>, |gamma| and arclength."""

    kappa: np.ndarray
    radial: np.ndarray
    r: np.ndarray
    arclength: np.ndarray


@dataclass(frozen=True)
class AngleProfile:
    """Continuous lift of arg(gamma') + (n-1) arg(gamma) along the node order.

    branch_offset records the integer multiple of pi subtracted so that
    theta[0] lies in [0, pi); the underlying angle is defined mod pi only.
    """

    theta: np.ndarray
    branch_offset: int

    def reduced(self) -> np.ndarray:
        return np.mod(self.theta, np.pi)


@dataclass(frozen=True)
class WedgeHull:
    """Minimal closed wedge with apex at the origin containing all nodes."""

    span: float
    bisector: float


def _segments(nodes: np.ndarray, closed: bool) -> np.ndarray:
    if closed:
        return np.roll(nodes, -1) - nodes
    return nodes[1:] - nodes[:-1]


def _degenerate_tol(nodes: np.ndarray) -> float:
    return 1e-13 * max(1.0, float(np.abs(nodes).max()))


def _derivatives(nodes: np.ndarray, closed: bool):
    """First and second parameter derivatives from 3-point stencils.

    Uses the quadratic interpolant through each node triple with chord-length
    parametrisation; second-order accurate on smooth near-uniform meshes.
    Open ends use the one-sided quadratic through the first/last three nodes.
    """
    n = nodes.size
    tol = _degenerate_tol(nodes)
    if closed:
        prv = np.roll(nodes, 1)
        nxt = np.roll(nodes, -1)
        a = nodes - prv
        b = nxt - nodes
        la = np.abs(a)
        lb = np.abs(b)
        if la.min() < tol or lb.min() < tol:
            raise MeshError("degenerate node spacing")
        denom = la * lb * (la + lb)
        d1 = (la**2 * b + lb**2 * a) / denom
        d2 = 2.0 * (la * nxt - (la + lb) * nodes + lb * prv) / denom
        return d1, d2

    d1 = np.empty(n, dtype=np.complex128)
    d2 = np.empty(n, dtype=np.complex128)
    a = nodes[1:-1] - nodes[:-2]
    b = nodes[2:] - nodes[1:-1]
    la = np.abs(a)
    lb = np.abs(b)
    if la.size and (la.min() < tol or lb.min() < tol):
        raise MeshError("degenerate node spacing")
    denom = la * lb * (la + lb)
    d1[1:-1] = (la**2 * b + lb**2 * a) / denom
    d2[1:-1] = 2.0 * (la * nodes[2:] - (la + lb) * nodes[1:-1] + lb * nodes[:-2]) / denom
    # one-sided quadratic at the two open ends
    h1 = np.abs(nodes[1] - nodes[0])
    h2 = np.abs(nodes[2] - nodes[1])
    if min(h1, h2) < tol:
        raise MeshError("degenerate node spacing")
    d1[0] = (
        -(2 * h1 + h2) / (h1 * (h1 + h2)) * nodes[0]
        + (h1 + h2) / (h1 * h2) * nodes[1]
        - h1 / (h2 * (h1 + h2)) * nodes[2]
    )
    d2[0] = 2.0 * (
        nodes[0] / (h1 * (h1 + h2)) - nodes[1] / (h1 * h2) + nodes[2] / (h2 * (h1 + h2))
    )
    g1 = np.abs(nodes[-1] - nodes[-2])
    g2 = np.abs(nodes[-2] - nodes[-3])
    if min(g1, g2) < tol:
        raise MeshError("degenerate node spacing")
    d1[-1] = (
        (2 * g1 + g2) / (g1 * (g1 + g2)) * nodes[-1]
        - (g1 + g2) / (g1 * g2) * nodes[-2]
        + g1 / (g2 * (g1 + g2)) * nodes[-3]
    )
    d2[-1] = 2.0 * (
        nodes[-1] / (g1 * (g1 + g2)) - nodes[-2] / (g1 * g2) + nodes[-3] / (g2 * (g1 + g2))
    )
    return d1, d2


def frame(curve: PlanarCurve):
    """Unit tangent and unit normal at every node, with N = iT exactly."""
    d1, _ = _derivatives(curve.nodes, curve.closed)
    mag = np.abs(d1)
    if mag.min() < _degenerate_tol(curve.nodes):
        raise MeshError("vanishing tangent")
    T = d1 / mag
    return T, 1j * T


def curvature_and_radial(curve: PlanarCurve) -> CurveDiagnostics:
    """Signed curvature, <gamma, N>, |gamma| and cumulative arclength."""
    nodes = curve.nodes
    d1, d2 = _derivatives(nodes, curve.closed)
    mag = np.abs(d1)
    if mag.min() < _degenerate_tol(nodes):
        raise MeshError("vanishing tangent")
    kappa = (np.conj(d1) * d2).imag / mag**3
    N = 1j * d1 / mag
    radial = (nodes * np.conj(N)).real
    r = np.abs(nodes)
    seg = np.abs(nodes[1:] - nodes[:-1])
    arclength = np.concatenate([[0.0], np.cumsum(seg)])
    return CurveDiagnostics(kappa=kappa, radial=radial, r=r, arclength=arclength)


def _lift(values: np.ndarray) -> np.ndarray:
    return np.unwrap(values)


def lagrangian_angle(curve: PlanarCurve, n: int) -> AngleProfile:
    """Continuous lift of arg(gamma') + (n-1) arg(gamma) with branch fixed at node 0.

    The reduced value mod pi is the Lagrangian angle of the invariant
    submanifold swept by the curve under an ambient action on C^n.
    """
    if n < 1:
        raise DomainError("ambient dimension n must be >= 1")
    T, _ = frame(curve)
    phi = _lift(np.angle(T))
    alpha = _lift(np.angle(curve.nodes))
    theta = phi + (n - 1) * alpha
    k0 = int(np.floor(theta[0] / np.pi))
    theta = theta - k0 * np.pi
    jumps = np.abs(np.diff(theta))
    if jumps.size and jumps.max() >= np.pi / 2:
        raise MeshError("angle lift failed: adjacent jump >= pi/2 (under-resolved mesh)")
    return AngleProfile(theta=theta, branch_offset=k0)


def angle_derivative_check(curve: PlanarCurve, n: int) -> float:
    """Max interior residual of d theta/ds against kappa + (n-1) d arg(gamma)/ds.

    Requires a near-uniform arclength mesh; converges to zero at O(h^2).
    """
    diag = curvature_and_radial(curve)
    prof = lagrangian_angle(curve, n)
    s = diag.arclength
    dtheta = np.gradient(prof.theta, s)
    alpha = _lift(np.angle(curve.nodes))
    dalpha = np.gradient(alpha, s)
    resid = np.abs(dtheta - (diag.kappa + (n - 1) * dalpha))
    if resid.size <= 4:
        raise MeshError("too few nodes for the interior residual")
    return float(resid[2:-2].max())


def winding_number(curve: PlanarCurve) -> int:
    """Total change of arg(gamma) around a closed loop, in units of 2 pi."""
    if not curve.closed:
        raise DomainError("winding number requires a closed loop")
    ratios = np.roll(curve.nodes, -1) / curve.nodes
    total = np.angle(ratios).sum()
    return int(np.rint(total / (2.0 * np.pi)))


def curvature_maxima_count(curve: PlanarCurve, kappa: np.ndarray | None = None):
    """Count strict local maxima of the signed curvature over one period.

    Signed curvature is used because a profile curve that dips inside the
    radius where the curvature changes sign carries a second family of |kappa|
    peaks at its inner apsides, which would double the count.  Near-constant
    curvature returns the sentinel string "circle".
    """
    if not curve.closed:
        raise DomainError("maxima count requires a closed loop")
    if kappa is None:
        kappa = curvature_and_radial(curve).kappa
    scale = float(np.abs(kappa).max())
    if scale == 0.0:
        return CIRCLE_SENTINEL
    if (kappa.max() - kappa.min()) / scale < CIRCLE_VARIATION_RTOL:
        return CIRCLE_SENTINEL
    tol = MAXIMA_PLATEAU_RTOL * scale
    d = np.roll(kappa, -1) - kappa
    state = np.where(d > tol, 1, np.where(d < -tol, -1, 0))
    nz = state[state != 0]
    if nz.size == 0:
        return CIRCLE_SENTINEL
    flips = np.flatnonzero((nz == 1) & (np.roll(nz, -1) == -1))
    return int(flips.size)


def redistribute(curve: PlanarCurve, spacing: float) -> PlanarCurve:
    """Re-place nodes at equal arclength by cubic interpolation along the polyline.

    Endpoints of open arcs are kept fixed; a uniform input mesh is a fixed
    point up to round-off.
    """
    if spacing <= 0:
        raise DomainError("target spacing must be positive")
    nodes = curve.nodes
    seg = np.abs(_segments(nodes, curve.closed))
    total = float(seg.sum())
    if curve.closed:
        s = np.concatenate([[0.0], np.cumsum(seg)])
        vals = np.concatenate([nodes, nodes[:1]])
        spline = CubicSpline(s, vals, bc_type="periodic")
        count = max(MIN_NODES, int(np.rint(total / spacing)))
        s_new = total * np.arange(count) / count
        return PlanarCurve(spline(s_new), closed=True)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    spline = CubicSpline(s, nodes)
    count = max(MIN_NODES, int(np.rint(total / spacing)) + 1)
    s_new = np.linspace(0.0, total, count)
    out = spline(s_new)
    out[0] = nodes[0]
    out[-1] = nodes[-1]
    return PlanarCurve(out, closed=False)


def wedge_hull(curve: PlanarCurve) -> WedgeHull:
    """Smallest closed origin wedge containing all nodes; span in [0, 2 pi].

    A curve whose directions cover the whole circle (largest angular gap at
    the sampling scale) reports span 2 pi with bisector 0.
    """
    ang = np.sort(np.mod(np.angle(curve.nodes), 2.0 * np.pi))
    n = ang.size
    gaps = np.diff(ang, append=ang[0] + 2.0 * np.pi)
    i = int(np.argmax(gaps))
    gmax = float(gaps[i])
    # a largest gap at the node-sampling scale means the directions wrap fully
    if gmax <= max(0.1, 3.0 * (2.0 * np.pi / n)):
        return WedgeHull(span=2.0 * np.pi, bisector=0.0)
    start = ang[(i + 1) % n]
    span = 2.0 * np.pi - gmax
    bis = start + span / 2.0
    bis = np.angle(np.exp(1j * bis))
    return WedgeHull(span=float(span), bisector=float(bis))


def hausdorff_distance(a: PlanarCurve, b: PlanarCurve, region: tuple[float, float] | None = None) -> float:
    """Symmetric Hausdorff distance of the node sets clipped to an annulus.

    region is (r_min, r_max) about the origin; None compares the full sets.
    """
    pa = a.nodes
    pb = b.nodes
    if region is not None:
        r0, r1 = region
        if not (0 <= r0 < r1):
            raise DomainError("annulus must satisfy 0 <= r_min < r_max")
        pa = pa[(np.abs(pa) >= r0) & (np.abs(pa) <= r1)]
        pb = pb[(np.abs(pb) >= r0) & (np.abs(pb) <= r1)]
    if pa.size == 0 or pb.size == 0:
        raise DomainError("a curve does not intersect the comparison region")
    return point_set_hausdorff(pa, pb)


def point_set_hausdorff(pa: np.ndarray, pb: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two complex point sets."""
    xa = np.column_stack([pa.real, pa.imag])
    xb = np.column_stack([pb.real, pb.imag])
    d_ab, _ = cKDTree(xb).query(xa)
    d_ba, _ = cKDTree(xa).query(xb)
    return float(max(d_ab.max(), d_ba.max()))


def _points_to_polyline(query: np.ndarray, poly: np.ndarray, closed: bool) -> np.ndarray:
    """Distance from each query point to a polyline, via nearest-node candidates."""
    xq = np.column_stack([query.real, query.imag])
    xp = np.column_stack([poly.real, poly.imag])
    _, idx = cKDTree(xp).query(xq)
    n = poly.size
    best = np.abs(query - poly[idx])
    for shift in (-1, 0):
        i0 = idx + shift
        if closed:
            i0 = np.mod(i0, n)
            i1 = np.mod(i0 + 1, n)
        else:
            i0 = np.clip(i0, 0, n - 2)
            i1 = i0 + 1
        a = poly[i0]
        seg = poly[i1] - a
        L2 = (seg * np.conj(seg)).real
        t = np.clip(((query - a) * np.conj(seg)).real / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
        best = np.minimum(best, np.abs(query - (a + t * seg)))
    return best


def curve_hausdorff(a: PlanarCurve, b: PlanarCurve, region: tuple[float, float] | None = None) -> float:
    """Symmetric Hausdorff distance between polylines (segment projection).

    Unlike the node-set distance this is insensitive to how densely the two
    curves are sampled along their common track, so it measures the geometric
    deviation only.  Query points are clipped to the annulus; the projection
    targets are the full polylines.
    """
    pa, pb = a.nodes, b.nodes
    qa, qb = pa, pb
    if region is not None:
        r0, r1 = region
        if not (0 <= r0 < r1):
            raise DomainError("annulus must satisfy 0 <= r_min < r_max")
        qa = pa[(np.abs(pa) >= r0) & (np.abs(pa) <= r1)]
        qb = pb[(np.abs(pb) >= r0) & (np.abs(pb) <= r1)]
    if qa.size == 0 or qb.size == 0:
        raise DomainError("a curve does not intersect the comparison region")
    d_ab = _points_to_polyline(qa, pb, b.closed).max()
    d_ba = _points_to_polyline(qb, pa, a.closed).max()
    return float(max(d_ab, d_ba))


def point_set_separation(pa: np.ndarray, pb: np.ndarray) -> float:
    """Minimum distance between two complex point sets."""
    xa = np.column_stack([pa.real, pa.imag])
    xb = np.column_stack([pb.real, pb.imag])
    d, _ = cKDTree(xb).query(xa)
    return float(d.min())


def angle_mod_pi_distance(a, b) -> np.ndarray:
    """Distance between angles identified mod pi (elementwise)."""
    d = np.mod(np.asarray(a) - np.asarray(b), np.pi)
    return np.minimum(d, np.pi - d)


def resample_path(points: np.ndarray, spacing: float, closed: bool = False) -> np.ndarray:
    """Resample a dense polyline at uniform arclength; helper for curve builders."""
    seg = np.abs(_segments(points, closed))
    total = float(seg.sum())
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if closed:
        vals = np.concatenate([points, points[:1]])
        spline = CubicSpline(s, vals, bc_type="periodic")
        count = max(MIN_NODES, int(np.rint(total / spacing)))
        return spline(total * np.arange(count) / count)
    spline = CubicSpline(s, points)
    count = max(MIN_NODES, int(np.rint(total / spacing)) + 1)
    out = spline(np.linspace(0.0, total, count))
    out[0] = points[0]
    out[-1] = points[-1]
    return out

"""Concrete compact group actions on C^n: moment maps, orbits, profile-plane
symmetry, and ambient verification of the angle formula.

A GroupAction is given by an orthonormal basis of its Lie algebra as
anti-Hermitian trace-free matrices, with <X, Y> = -tr(XY).  The moment map
coefficient against a basis element X is -Im(z* X z)/2, and the dual space is
identified with the algebra through the same pairing throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .curves import PlanarCurve, angle_mod_pi_distance, frame
from .errors import DomainError, NumericalError, ValidationError

ANTIHERMITIAN_TOL = 1e-12
GRAM_TOL = 1e-10
RANK_RTOL = 1e-8
WITNESS_TOL = 1e-6


@dataclass
class GroupAction:
    """Compact subgroup of SU(n) described by an orthonormal algebra basis."""

    name: str
    n: int
    basis: np.ndarray  # (dim, n, n) complex, anti-Hermitian, trace-free
    expected_m: int | None = None
    base_point: np.ndarray | None = None
    witness: np.ndarray | None = None  # group element g with g z0 = e^{2 pi i / expected_m} z0
    profile_gauge: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=complex)
        if self.basis.ndim != 3 or self.basis.shape[1:] != (self.n, self.n):
            raise ValidationError("algebra basis must be a (dim, n, n) array")
        self.validate()
        if self.base_point is not None:
            self.base_point = np.asarray(self.base_point, dtype=complex)
            self.base_point = self.base_point / np.linalg.norm(self.base_point)
            if self.profile_gauge is None:
                self.profile_gauge = calibrate_profile_gauge(self)

    def validate(self):
        failures = []
        for i, X in enumerate(self.basis):
            if np.abs(X + X.conj().T).max() > ANTIHERMITIAN_TOL:
                failures.append(f"basis[{i}] is not anti-Hermitian")
            if abs(np.trace(X)) > ANTIHERMITIAN_TOL:
                failures.append(f"basis[{i}] has nonzero trace")
        gram = -np.einsum("aij,bji->ab", self.basis, self.basis).real
        if np.abs(gram - np.eye(self.group_dim)).max() > GRAM_TOL:
            failures.append("basis is not orthonormal under -tr(XY)")
        if failures:
            raise ValidationError("; ".join(failures))

    @property
    def group_dim(self) -> int:
        return self.basis.shape[0]

    def infinitesimal(self, z: np.ndarray) -> np.ndarray:
        """Orbit vectors rho_z(X_a) = -X_a z, shape (dim, n)."""
        return -np.einsum("aij,j->ai", self.basis, z)

    def element(self, coords: np.ndarray) -> np.ndarray:
        """Group element exp(sum_a coords_a X_a)."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.group_dim,):
            raise DomainError("algebra coordinates must match the basis length")
        return expm(np.tensordot(coords, self.basis, axes=1))


@dataclass(frozen=True)
class MomentValue:
    coefficients: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.coefficients).max())


@dataclass(frozen=True)
class OrbitFrame:
    """Ambient frame at a lifted point: orbit vectors plus the profile tangent."""

    point: np.ndarray
    orbit_vectors: np.ndarray  # (dim, n)
    tangent: np.ndarray | None = None


def moment(action: GroupAction, z: np.ndarray) -> MomentValue:
    """Moment map coefficients -Im(z* X_a z)/2 against the orthonormal basis."""
    z = np.asarray(z, dtype=complex)
    vals = -0.5 * np.einsum("i,aij,j->a", z.conj(), action.basis, z).imag
    return MomentValue(coefficients=vals)


def moment_sharp(action: GroupAction, z: np.ndarray) -> np.ndarray:
    """Moment value as an algebra element via the -tr pairing."""
    return np.tensordot(moment(action, z).coefficients, action.basis, axes=1)


def equivariance_residual(action: GroupAction, z: np.ndarray, coords: np.ndarray) -> float:
    """|mu(g z) - Ad_g^* mu(z)| for g = exp(sum coords_a X_a)."""
    z = np.asarray(z, dtype=complex)
    g = action.element(coords)
    lhs = moment(action, g @ z).coefficients
    conj = g @ moment_sharp(action, z) @ g.conj().T
    rhs = -np.einsum("ij,aji->a", conj, action.basis).real
    return float(np.linalg.norm(lhs - rhs))


def _real_rank(vectors: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Real rank of complex n-vectors viewed in R^{2n}."""
    real = np.concatenate([vectors.real, vectors.imag], axis=1)
    svals = np.linalg.svd(real, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int((svals > rtol * svals[0]).sum())


def orbit_dimension(action: GroupAction, z: np.ndarray) -> int:
    """Dimension of the orbit through z (rank of the infinitesimal action)."""
    z = np.asarray(z, dtype=complex)
    if np.linalg.norm(z) == 0:
        raise DomainError("orbit dimension is undefined at the origin")
    return _real_rank(action.infinitesimal(z))


def symplectic_form(u: np.ndarray, v: np.ndarray):
    """omega(u, v) = Im <u, v> on C^n."""
    return np.einsum("...i,...i->...", u.conj(), v).imag


def zero_level_and_isotropic(action: GroupAction, z: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff z sits in the zero level; cross-checked against orbit isotropy.

    Zero moment implies the orbit is isotropic, so omega(rho(X_a), rho(X_b))
    must vanish at z whenever the flag is true.
    """
    z = np.asarray(z, dtype=complex)
    if np.linalg.norm(z) == 0:
        raise DomainError("test point must be nonzero")
    flag = moment(action, z).max_abs <= tol
    if flag:
        rho = action.infinitesimal(z)
        omegas = symplectic_form(rho[:, None, :], rho[None, :, :])
        if np.abs(omegas).max() > max(tol, 1e-9 * np.linalg.norm(z) ** 2):
            raise NumericalError("zero moment but orbit not isotropic: inconsistent action")
    return bool(flag)


def _orthonormal_block(vectors: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal real basis (as complex rows) of the span of the given vectors."""
    real = np.concatenate([vectors.real, vectors.imag], axis=1)
    _, svals, vt = np.linalg.svd(real, full_matrices=False)
    basis = vt[:rank]
    n = vectors.shape[1]
    return basis[:, :n] + 1j * basis[:, n:]


def orthogonal_decomposition_residual(action: GroupAction, z: np.ndarray) -> float:
    """Max off-block Gram entry of {z, iz} + orbit + J(orbit) after orthonormalisation.

    Valid at zero-level points with (n-1)-dimensional orbit, where the ambient
    space splits orthogonally into the profile plane, the orbit tangent and
    its J-rotation.
    """
    z = np.asarray(z, dtype=complex)
    dim = orbit_dimension(action, z)
    if dim != action.n - 1:
        raise DomainError(f"orbit dimension {dim} != n - 1 = {action.n - 1}")
    zu = z / np.linalg.norm(z)
    plane = np.stack([zu, 1j * zu])
    orbit = _orthonormal_block(action.infinitesimal(z), dim)
    jorbit = 1j * orbit
    blocks = [plane, orbit, jorbit]
    sizes = [b.shape[0] for b in blocks]
    full = np.concatenate(blocks, axis=0)
    real = np.concatenate([full.real, full.imag], axis=1)
    gram = real @ real.T
    worst = 0.0
    r0 = 0
    for i, si in enumerate(sizes):
        c0 = 0
        for j, sj in enumerate(sizes):
            if i != j:
                worst = max(worst, float(np.abs(gram[r0 : r0 + si, c0 : c0 + sj]).max()))
            c0 += sj
        r0 += si
    return worst


def cyclic_symmetry_order(
    action: GroupAction,
    z: np.ndarray,
    m_candidate: int,
    starts: int = 32,
    seed: int = 0,
) -> tuple[bool, float]:
    """Search for a group element g with g z = e^{2 pi i / m} z.

    Presets carry analytic witnesses for their canonical order; candidate
    divisors reuse powers of the witness.  Otherwise a 32-start quasi-Newton
    minimisation over algebra coordinates runs, with the lowest residual kept
    (ties broken by start index).  Returns (witness found, residual).
    """
    z = np.asarray(z, dtype=complex)
    if m_candidate < 1:
        raise DomainError("cyclic order must be positive")
    if (2 * action.n) % m_candidate != 0:
        raise DomainError("candidate order must divide 2 n")
    target = np.exp(2j * math.pi / m_candidate) * z
    best = float("inf")

    if (
        action.witness is not None
        and action.expected_m is not None
        and action.base_point is not None
        and np.allclose(z / np.linalg.norm(z), action.base_point, atol=1e-12)
        and action.expected_m % m_candidate == 0
    ):
        g = np.linalg.matrix_power(action.witness, action.expected_m // m_candidate)
        best = float(np.linalg.norm(g @ z - target))

    if best > WITNESS_TOL:
        rng = np.random.default_rng(seed)
        scale = float(np.linalg.norm(z))

        def objective(c):
            g = action.element(c)
            return float(np.linalg.norm(g @ z - target) ** 2)

        for _ in range(starts):
            c0 = rng.uniform(-math.pi, math.pi, size=action.group_dim)
            res = minimize(objective, c0, method="BFGS", options={"gtol": 1e-12, "maxiter": 400})
            cand = math.sqrt(max(res.fun, 0.0))
            if cand < best:
                best = cand
            if best <= 1e-9 * scale:
                break
    return best <= WITNESS_TOL, best


def frame_determinant_angle(action: GroupAction, point: np.ndarray, tangent: np.ndarray) -> float:
    """arg of det[orthonormal orbit vectors | tangent] as columns in C^n, mod pi."""
    dim = orbit_dimension(action, point)
    if dim != action.n - 1:
        raise DomainError("point does not have an (n-1)-dimensional orbit")
    orbit = _orthonormal_block(action.infinitesimal(point), dim)
    cols = np.concatenate([orbit, tangent[None, :]], axis=0).T
    det = np.linalg.det(cols)
    if abs(det) < 1e-8:
        raise NumericalError("singular ambient frame")
    return float(np.angle(det) % math.pi)


def calibrate_profile_gauge(action: GroupAction) -> np.ndarray:
    """Unit profile-plane generator for which the angle formula has zero offset.

    The ambient frame determinant at the base point with radial tangent fixes
    the gauge; rotating the base point by e^{-i delta / n} cancels the offset,
    after which arg det = arg(tangent) + (n-1) arg(w) mod pi exactly along the
    profile plane.
    """
    if action.base_point is None:
        raise DomainError("preset has no base point to calibrate")
    z0 = action.base_point
    delta = frame_determinant_angle(action, z0, z0)
    gauge = z0 * np.exp(-1j * delta / action.n)
    check = frame_determinant_angle(action, gauge, gauge)
    if min(check, math.pi - check) > 1e-9:
        # the mod-pi representative may need the opposite branch
        gauge = z0 * np.exp(-1j * (delta - math.pi) / action.n)
        check = frame_determinant_angle(action, gauge, gauge)
        if min(check, math.pi - check) > 1e-9:
            raise NumericalError("profile gauge calibration failed")
    return gauge


def ambient_angle_check(action: GroupAction, w: complex, tangent: complex) -> float:
    """Mod-pi distance between the ambient frame angle and arg(t) + (n-1) arg(w).

    w and tangent are profile-plane complex coordinates relative to the
    calibrated gauge direction.
    """
    if action.profile_gauge is None:
        raise DomainError("action has no calibrated profile plane")
    point = w * action.profile_gauge
    tang = (tangent / abs(tangent)) * action.profile_gauge
    lhs = frame_determinant_angle(action, point, tang)
    rhs = (np.angle(tangent) + (action.n - 1) * np.angle(w)) % math.pi
    return float(angle_mod_pi_distance(lhs, rhs))


@dataclass
class LagrangianLift:
    """Sampled invariant lift of a profile curve with per-point frames."""

    points: np.ndarray  # (M, n) complex
    frames: list[OrbitFrame]
    symplectic_residual: float
    moment_drift: float

    def local_rank(self, action: GroupAction, index: int = 0, eps: float = 1e-4, seed: int = 0) -> int:
        """PCA rank of the cloud near one point, probing group and curve directions.

        Finite group motions carry second-order components off the tangent
        space at relative size eps, so the rank threshold sits well above eps
        but far below one.
        """
        rng = np.random.default_rng(seed)
        fr = self.frames[index]
        diffs = [v / np.linalg.norm(v) for v in fr.orbit_vectors if np.linalg.norm(v) > 0]
        if fr.tangent is not None:
            diffs.append(fr.tangent / np.linalg.norm(fr.tangent))
        for _ in range(4):
            c = rng.normal(size=action.group_dim)
            c *= eps / np.linalg.norm(c)
            g = action.element(c)
            step_vec = g @ fr.point - fr.point
            diffs.append(step_vec / np.linalg.norm(step_vec))
        return _real_rank(np.asarray(diffs), rtol=50.0 * eps)


def lift_lagrangian(
    action: GroupAction,
    profile: PlanarCurve,
    orbit_samples: int = 8,
    seed: int = 0,
    node_stride: int | None = None,
) -> LagrangianLift:
    """Sweep a profile curve through sampled group elements.

    Each profile node w maps to g . (w z_cal); the frame at the image point
    holds the orbit vectors and the pushed-forward profile tangent.  Reports
    the largest symplectic pairing over frame pairs and the moment max-norm
    along the cloud.
    """
    if action.profile_gauge is None:
        raise DomainError("action has no calibrated profile plane")
    gauge = action.profile_gauge
    probe = profile.nodes[0] * gauge
    if orbit_dimension(action, probe) != action.n - 1:
        raise DomainError("profile plane points do not have (n-1)-dimensional orbits")
    T, _ = frame(profile)
    stride = node_stride or max(1, len(profile) // 32)
    idx = np.arange(0, len(profile), stride)
    rng = np.random.default_rng(seed)
    points = []
    frames = []
    sym_res = 0.0
    drift = 0.0
    for k in range(orbit_samples):
        if k == 0:
            g = np.eye(action.n, dtype=complex)
        else:
            g = action.element(rng.uniform(-1.5, 1.5, size=action.group_dim))
        for i in idx:
            p = g @ (profile.nodes[i] * gauge)
            tang = g @ (T[i] * gauge)
            rho = action.infinitesimal(p)
            span = _orthonormal_block(rho, action.n - 1)
            vecs = np.concatenate([span, (tang / np.linalg.norm(tang))[None, :]], axis=0)
            om = symplectic_form(vecs[:, None, :], vecs[None, :, :])
            sym_res = max(sym_res, float(np.abs(om).max()))
            drift = max(drift, moment(action, p).max_abs)
            points.append(p)
            frames.append(OrbitFrame(point=p, orbit_vectors=rho, tangent=tang))
    return LagrangianLift(
        points=np.asarray(points),
        frames=frames,
        symplectic_residual=sym_res,
        moment_drift=drift,
    )

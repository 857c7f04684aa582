"""Preset group actions and static reference data.

Presets ship an orthonormal algebra basis, a canonical zero-level base point
with (n-1)-dimensional orbit, the expected profile-plane cyclic order, and an
analytic witness element realising it.  The catalog is also serialised as a
package data file (see data/presets.json) with basis matrices stored as
row-major [re, im] pairs.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .errors import DomainError, ValidationError
from .symmetry import GroupAction


def _so_generators(n: int) -> np.ndarray:
    """Orthonormal basis (E_ab - E_ba)/sqrt(2), a < b, of so(n)."""
    gens = []
    for a in range(n):
        for b in range(a + 1, n):
            X = np.zeros((n, n), dtype=complex)
            X[a, b] = 1.0
            X[b, a] = -1.0
            gens.append(X / math.sqrt(2.0))
    return np.array(gens)


def so_preset(n: int) -> GroupAction:
    """Diagonal rotation action on C^n = R^n + i R^n; cyclic order 2."""
    if n < 2:
        raise DomainError("diagonal rotation preset needs n >= 2")
    z0 = np.zeros(n, dtype=complex)
    z0[0] = 1.0
    witness = -np.eye(n) if n == 2 else np.diag([-1.0, -1.0] + [1.0] * (n - 2))
    witness = witness.astype(complex)
    # witness maps z0 to -z0 = e^{2 pi i / 2} z0
    return GroupAction(
        name=f"so{n}",
        n=n,
        basis=_so_generators(n),
        expected_m=2,
        base_point=z0,
        witness=witness,
    )


def torus_preset(n: int) -> GroupAction:
    """Maximal torus of SU(n) acting diagonally; cyclic order n."""
    if n < 2:
        raise DomainError("torus preset needs n >= 2")
    # Helmert rows: orthonormal real vectors orthogonal to (1, ..., 1)
    rows = []
    for k in range(1, n):
        v = np.zeros(n)
        v[:k] = 1.0
        v[k] = -k
        rows.append(v / np.linalg.norm(v))
    basis = np.array([1j * np.diag(v) for v in rows])
    z0 = np.ones(n, dtype=complex) / math.sqrt(n)
    phases = np.full(n, 2.0 * math.pi / n)
    phases[-1] -= 2.0 * math.pi  # stay on the sum-zero sheet of the algebra
    witness = np.diag(np.exp(1j * phases))
    return GroupAction(
        name=f"torus{n}",
        n=n,
        basis=basis,
        expected_m=n,
        base_point=z0,
        witness=witness,
    )


def _cubic_rep(a: complex, b: complex) -> np.ndarray:
    """Unitary action of [[a, -conj(b)], [b, conj(a)]] on binary cubics in the
    basis {w1^3, sqrt(3) w1^2 w2, sqrt(3) w1 w2^2, w2^3}."""
    ac, bc = np.conj(a), np.conj(b)
    s3 = math.sqrt(3.0)
    return np.array(
        [
            [a**3, -s3 * a**2 * bc, s3 * a * bc**2, -(bc**3)],
            [s3 * a**2 * b, a * (abs(a) ** 2 - 2 * abs(b) ** 2), -bc * (2 * abs(a) ** 2 - abs(b) ** 2), s3 * ac * bc**2],
            [s3 * a * b**2, b * (2 * abs(a) ** 2 - abs(b) ** 2), ac * (abs(a) ** 2 - 2 * abs(b) ** 2), -s3 * ac**2 * bc],
            [b**3, s3 * ac * b**2, s3 * ac**2 * b, ac**3],
        ],
        dtype=complex,
    )


def su2_sym3_preset() -> GroupAction:
    """Binary-cubic action of SU(2) on C^4; cyclic order 4.

    The algebra basis is the image of the standard su(2) generators under the
    derived representation, normalised to -tr(XY) = delta.
    """
    s3 = math.sqrt(3.0)
    X1 = np.array(
        [[0, s3, 0, 0], [-s3, 0, 2, 0], [0, -2, 0, s3], [0, 0, -s3, 0]], dtype=complex
    )
    X2 = 1j * np.array(
        [[0, s3, 0, 0], [s3, 0, 2, 0], [0, 2, 0, s3], [0, 0, s3, 0]], dtype=complex
    )
    X3 = np.diag([3j, 1j, -1j, -3j])
    basis = np.array([X1, X2, X3]) / math.sqrt(20.0)
    z0 = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
    # the anti-diagonal element [[0, i], [i, 0]] acts as multiplication by -i
    # on z0; its inverse realises e^{+ i pi / 2}
    witness = np.linalg.matrix_power(_cubic_rep(0.0, 1j), 3)
    return GroupAction(
        name="su2-sym3",
        n=4,
        basis=basis,
        expected_m=4,
        base_point=z0,
        witness=witness,
    )


def s1_so_so_preset(p: int, q: int) -> GroupAction:
    """Circle times two rotation factors on C^(p+q), weights (q, -p).

    The central circle direction is the first basis element; the profile
    cyclic order is not pinned by theory here, so expected_m is left unset
    and witness searches run in exploratory mode.
    """
    if p < 3 or q < 3:
        raise DomainError("both rotation factors need dimension >= 3")
    n = p + q
    center = 1j * np.diag([float(q)] * p + [float(-p)] * q) / math.sqrt(p * q * (p + q))
    gens = [center]
    for X in _so_generators(p):
        full = np.zeros((n, n), dtype=complex)
        full[:p, :p] = X
        gens.append(full)
    for X in _so_generators(q):
        full = np.zeros((n, n), dtype=complex)
        full[p:, p:] = X
        gens.append(full)
    z0 = np.zeros(n, dtype=complex)
    z0[0] = math.sqrt(p / (p + q))
    z0[p] = math.sqrt(q / (p + q))
    return GroupAction(
        name=f"s1-so{p}-so{q}",
        n=n,
        basis=np.array(gens),
        expected_m=None,
        base_point=z0,
        witness=None,
    )


def build_preset(name: str, n: int | None = None, p: int | None = None, q: int | None = None) -> GroupAction:
    """Construct a preset action from its catalog name."""
    if name == "so":
        return so_preset(n or 3)
    if name == "torus":
        return torus_preset(n or 4)
    if name == "su2-sym3":
        return su2_sym3_preset()
    if name == "s1-so-so":
        return s1_so_so_preset(p or 3, q or 3)
    raise ValidationError(f"unknown preset {name!r}; choose from so, torus, su2-sym3, s1-so-so")


DEFAULT_CATALOG = (
    ("so", dict(n=3)),
    ("so", dict(n=4)),
    ("torus", dict(n=3)),
    ("torus", dict(n=4)),
    ("su2-sym3", dict()),
    ("s1-so-so", dict(p=3, q=3)),
)


def catalog_entry(action: GroupAction) -> dict:
    """Serializable record: basis matrices as row-major [re, im] pairs."""
    return {
        "name": action.name,
        "n": action.n,
        "group_dim": action.group_dim,
        "expected_m": action.expected_m,
        "basis": [
            [[float(x.real), float(x.imag)] for x in X.ravel()] for X in action.basis
        ],
        "base_point": [[float(x.real), float(x.imag)] for x in (action.base_point if action.base_point is not None else [])],
    }


def action_from_entry(entry: dict) -> GroupAction:
    n = entry["n"]
    basis = np.array(
        [
            np.array([complex(re, im) for re, im in X], dtype=complex).reshape(n, n)
            for X in entry["basis"]
        ]
    )
    base = entry.get("base_point") or None
    if base:
        base = np.array([complex(re, im) for re, im in base])
    return GroupAction(
        name=entry["name"], n=n, basis=basis, expected_m=entry.get("expected_m"), base_point=base
    )


def load_preset_catalog() -> list[GroupAction]:
    """Load the shipped catalog data file."""
    text = resources.files("lmcflab").joinpath("data/presets.json").read_text()
    return [action_from_entry(e) for e in json.loads(text)["presets"]]


def load_simple_group_table() -> list[dict]:
    """Static classification table of simple actions admitting the required orbits.

    Reference data only: rows are (group, representation label, n, stabiliser
    identity component, component group), with no executable semantics.
    """
    text = resources.files("lmcflab").joinpath("data/simple_group_actions.json").read_text()
    return json.loads(text)["rows"]

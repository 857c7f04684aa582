"""Shared fixtures: the expensive reference runs are computed once per session."""

import math

import numpy as np
import pytest

from lmcflab.curves import PlanarCurve
from lmcflab.flow import FlowConfig, evolve, neves_initial

# reference singular run: wedge data with span 0.6 pi in ambient dimension 2;
# the resolution schedule keeps the uniform mesh at ~0.35 / max|kappa|
NEVES_BETA = 0.6 * math.pi
NEVES_CONFIG = dict(
    n=2,
    spacing=5e-4,
    spacing_max=0.02,
    cfl=0.2,
    boundary="pinned",
    t_max=6.0,
    r_floor=1.5e-3,
    kappa_ceiling=4000.0,
    redistribution_period=40,
    snapshot_interval=40,
    max_snapshots=900,
)


@pytest.fixture(scope="session")
def neves_traj():
    initial = neves_initial(NEVES_BETA, 2, samples=3200, r_max=3.0)
    traj = evolve(initial, FlowConfig(**NEVES_CONFIG))
    assert traj.termination == "singularity trigger"
    return traj


@pytest.fixture(scope="session")
def circle_runs():
    """Shrinking unit circle (n = 2) at three resolutions, for convergence checks."""
    runs = {}
    for spacing in (0.02, 0.01, 0.005):
        t = np.linspace(0.0, 2 * math.pi, int(2 * math.pi / spacing), endpoint=False)
        c0 = PlanarCurve(np.exp(1j * t), closed=True)
        cfg = FlowConfig(n=2, spacing=spacing, r_floor=0.04, t_max=1.0, snapshot_interval=100)
        runs[spacing] = evolve(c0, cfg)
    return runs

"""Command-line front door: soliton | flow | blowup | symmetry | atlas.

Parameters come from an optional YAML/JSON configuration document (one section
per command, unknown keys rejected) overridden by command-line flags.  Exit
codes: 0 success, 2 validation/domain error, 3 numerical failure.  Identical
configuration and seed produce byte-identical result documents; figures are
covered by the content hash embedded in the report.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import blowup as bl
from . import fileio as io
from . import flow as fl
from . import presets as pr
from . import solitons as so
from . import symmetry as sy
from .curves import PlanarCurve, wedge_hull
from .errors import DomainError, MeshError, NoFitError, NumericalError, ValidationError

_SECTIONS = ("soliton", "flow", "blowup", "symmetry", "atlas")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith((".yaml", ".yml")):
        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValidationError("configuration document must be a mapping")
    unknown = set(doc) - set(_SECTIONS) - {"seed", "out"}
    if unknown:
        raise ValidationError(f"unknown configuration sections: {sorted(unknown)}")
    return doc


def _merge(section: dict, allowed: dict, overrides: dict) -> dict:
    """defaults <- config section <- explicit CLI flags, rejecting unknown keys."""
    unknown = set(section) - set(allowed)
    if unknown:
        raise ValidationError(f"unknown configuration keys: {sorted(unknown)}")
    params = dict(allowed)
    params.update(section)
    for key, val in overrides.items():
        if val is not None:
            params[key] = val
    return params


# ---------------------------------------------------------------- soliton

_SOLITON_DEFAULTS = dict(
    kind="shrinker", n=2, p=1, q=3, alpha=0.5, B=1.0, k=0, theta_bar=0.0,
    r_min=0.5, r_max=4.0, spacing=0.005, figure=False,
)


def cmd_soliton(params: dict, out: Path, seed: int, verbose: bool) -> None:
    kind = params["kind"]
    n = int(params["n"])
    report: dict = {"command": "soliton", "kind": kind, "n": n, "seed": seed}
    if kind == "shrinker":
        res = so.find_shrinker(int(params["p"]), int(params["q"]), n)
        curve, lam = res.curve, 1.0
        report.update(
            p=res.winding, q=res.maxima, r_apsis=res.r_apsis,
            closure_gap=res.closure_gap, direction_gap=res.direction_gap,
        )
    elif kind == "expander":
        res = so.find_expander(float(params["alpha"]), n)
        curve, lam = res.curve, -1.0
        report.update(alpha=float(params["alpha"]), apsis_distance=res.apsis_distance,
                      measured_span=res.measured_span)
    elif kind == "special-lagrangian":
        spec = so.SolitonSpec(kind=so.KIND_SLAG, n=n, B=float(params["B"]),
                              k=int(params["k"]), theta_bar=float(params["theta_bar"]))
        lim = math.pi / (2 * n)
        curve = so.sample_special_lagrangian(
            spec, (-0.999 * lim, 0.999 * lim), float(params["spacing"]), r_cap=float(params["r_max"])
        )
        lam = 0.0
        report.update(B=spec.B, k=spec.k, theta_bar=spec.theta_bar)
    elif kind == "cone":
        spec = so.SolitonSpec(kind=so.KIND_CONE, n=n, k=int(params["k"]),
                              theta_bar=float(params["theta_bar"]))
        curve = so.sample_cone(spec, (float(params["r_min"]), float(params["r_max"])),
                               float(params["spacing"]))
        lam = 0.0
        report.update(k=spec.k, theta_bar=spec.theta_bar)
    elif kind == "grim-reaper":
        curve = so.grim_reaper((-1.45, 1.45), float(params["spacing"]))
        lam = 0.0
        report["translator"] = True
    else:
        raise ValidationError(f"unknown soliton kind {kind!r}")

    if kind == "grim-reaper":
        # translator residual |v - <V, N>| against V = -i
        from .curves import curvature_and_radial, frame

        diag = curvature_and_radial(curve)
        _, N = frame(curve)
        resid = diag.kappa - ((-1j) * np.conj(N)).real
        report["residual"] = float(np.abs(resid[2:-2]).max())
    else:
        report["residual"] = so.soliton_residual(curve, lam, n)
    report["lambda"] = lam
    report["nodes"] = len(curve)
    wh = wedge_hull(curve)
    report["wedge_span"] = wh.span
    report["wedge_bisector"] = wh.bisector
    out.mkdir(parents=True, exist_ok=True)
    io.write_curve(out / "curve.csv", curve, n=n)
    if params.get("figure"):
        report["figure_data_hash"] = io.curves_figure(out / "curve.svg", [curve])
    io.write_report(out, "report", report)


# ------------------------------------------------------------------- flow

_FLOW_DEFAULTS = dict(
    initial="circle", n=2, spacing=0.01, spacing_max=None, cfl=0.2, t_max=1.0,
    r_floor=1e-3, kappa_ceiling=1e4, redistribution_period=25,
    radius=1.0, beta=0.6 * math.pi, r_max=3.0, samples=1600,
    p=1, q=3, alpha=0.5, B=1.0, k=0, theta_bar=0.0,
    file=None, figure=False, snapshot_files=12,
)


def _flow_initial(params: dict) -> tuple[PlanarCurve, str]:
    name = params["initial"]
    n = int(params["n"])
    if name == "circle":
        t = np.linspace(0.0, 2 * math.pi, max(64, int(2 * math.pi * params["radius"] / params["spacing"])), endpoint=False)
        return PlanarCurve(params["radius"] * np.exp(1j * t), closed=True), "closed"
    if name == "neves":
        return fl.neves_initial(float(params["beta"]), n, int(params["samples"]), float(params["r_max"])), "pinned"
    if name == "shrinker":
        return so.find_shrinker(int(params["p"]), int(params["q"]), n).curve, "closed"
    if name == "expander":
        return so.find_expander(float(params["alpha"]), n).curve, "pinned"
    if name == "special-lagrangian":
        spec = so.SolitonSpec(kind=so.KIND_SLAG, n=n, B=float(params["B"]),
                              k=int(params["k"]), theta_bar=float(params["theta_bar"]))
        lim = math.pi / (2 * n)
        return so.sample_special_lagrangian(spec, (-0.999 * lim, 0.999 * lim),
                                            float(params["spacing"]), r_cap=float(params["r_max"])), "pinned"
    if name == "grim-reaper":
        # lifted one unit above the origin: translation-invariant for n = 1,
        # and the run stays inside the punctured plane
        reaper = so.grim_reaper((-1.45, 1.45), float(params["spacing"]))
        return PlanarCurve(reaper.nodes + 1j, closed=False), "pinned"
    if name == "file":
        curve, meta = io.read_curve(params["file"])
        return curve, ("closed" if curve.closed else "pinned")
    raise ValidationError(f"unknown initial generator {name!r}")


def cmd_flow(params: dict, out: Path, seed: int, verbose: bool) -> None:
    initial, boundary = _flow_initial(params)
    config = fl.FlowConfig(
        n=int(params["n"]),
        spacing=float(params["spacing"]),
        spacing_max=None if params["spacing_max"] is None else float(params["spacing_max"]),
        cfl=float(params["cfl"]),
        t_max=float(params["t_max"]),
        r_floor=float(params["r_floor"]),
        kappa_ceiling=float(params["kappa_ceiling"]),
        redistribution_period=int(params["redistribution_period"]),
        boundary=boundary,
    )
    traj = fl.evolve(initial, config)
    out.mkdir(parents=True, exist_ok=True)
    io.write_summary_csv(out / "summary.csv", traj.summary)
    save_trajectory(out / "trajectory.npz", traj)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    count = min(int(params["snapshot_files"]), len(traj.snapshots))
    picks = np.unique(np.linspace(0, len(traj.snapshots) - 1, count).astype(int))
    for i in picks:
        st = traj.snapshots[i]
        io.write_curve(snap_dir / f"snapshot_{i:05d}.csv", st.curve, n=config.n)
    report: dict = {
        "command": "flow",
        "initial": params["initial"],
        "n": config.n,
        "seed": seed,
        "termination": traj.termination,
        "steps": int(traj.summary.t.size),
        "t_end": float(traj.summary.t[-1]),
        "final_min_radius": float(traj.summary.r_min[-1]),
        "final_max_curvature": float(traj.summary.kappa_max[-1]),
        "theta_range_initial": float(traj.summary.theta_max[0] - traj.summary.theta_min[0]),
        "theta_range_final": float(traj.summary.theta_max[-1] - traj.summary.theta_min[-1]),
    }
    if traj.singularity is not None:
        rep = traj.singularity
        report["singularity"] = {
            "T_est": rep.T_est,
            "location": [rep.location.real, rep.location.imag] if rep.location is not None else None,
            "rate_exponent_sigma": rep.sigma,
            "type_evidence": rep.type_evidence,
            "fit_quality": rep.fit_quality,
        }
    mon = fl.monitor_estimates(traj)
    report["curvature_monitor"] = {
        "sup_h_ratio": mon.sup_h_ratio,
        "sup_a_ratio": mon.sup_a_ratio,
        "initial_h_ratio": mon.initial_h_ratio,
        "initial_a_ratio": mon.initial_a_ratio,
        "growth_flag": mon.growth_flag,
    }
    if params.get("figure"):
        curves = [traj.snapshots[i].curve for i in picks[: min(6, picks.size)]]
        report["figure_data_hash"] = io.curves_figure(out / "flow.svg", curves)
    io.write_report(out, "report", report)


def save_trajectory(path, traj: fl.FlowTrajectory) -> None:
    """Machine artifact with all retained snapshots, for the blowup command."""
    offsets = np.cumsum([0] + [len(s.curve) for s in traj.snapshots])
    nodes = np.concatenate([s.curve.nodes for s in traj.snapshots])
    np.savez_compressed(
        path,
        nodes=nodes,
        offsets=offsets,
        times=np.array([s.t for s in traj.snapshots]),
        closed=np.array([s.curve.closed for s in traj.snapshots]),
        summary_t=traj.summary.t,
        summary_kappa=traj.summary.kappa_max,
        summary_rmin=traj.summary.r_min,
        summary_thmin=traj.summary.theta_min,
        summary_thmax=traj.summary.theta_max,
        n=traj.config.n,
        spacing=traj.config.spacing,
        termination=traj.termination,
    )


def load_trajectory(path) -> fl.FlowTrajectory:
    data = np.load(path, allow_pickle=False)
    n = int(data["n"])
    config = fl.FlowConfig(n=n, spacing=float(data["spacing"]))
    snaps = []
    off = data["offsets"]
    all_nodes = data["nodes"]  # materialise once; npz members decompress per access
    closed = data["closed"]
    for i, t in enumerate(data["times"]):
        nodes = all_nodes[off[i] : off[i + 1]].copy()
        snaps.append(fl.FlowState(t=float(t), curve=PlanarCurve(nodes, bool(closed[i])), n=n))
    summary = fl.FlowSummary(
        t=data["summary_t"],
        kappa_max=data["summary_kappa"],
        r_min=data["summary_rmin"],
        theta_min=data["summary_thmin"],
        theta_max=data["summary_thmax"],
    )
    traj = fl.FlowTrajectory(
        snapshots=snaps,
        summary=summary,
        termination=str(data["termination"]),
        config=config,
        singularity=None,
    )
    if traj.termination == fl.TERM_SINGULAR:
        traj.singularity = fl.classify_singularity_rate(traj)
    return traj


# ----------------------------------------------------------------- blowup

_BLOWUP_DEFAULTS = dict(
    trajectory=None, scales=(16.0, 32.0, 64.0), annulus=(5.0, 10.0), figure=False,
)


def cmd_blowup(params: dict, out: Path, seed: int, verbose: bool) -> None:
    if params["trajectory"] is None:
        raise ValidationError("blowup needs --trajectory DIR (output of the flow command)")
    traj_path = Path(params["trajectory"]) / "trajectory.npz"
    if not traj_path.exists():
        raise ValidationError(f"no trajectory archive at {traj_path}")
    traj = load_trajectory(traj_path)
    if traj.termination != fl.TERM_SINGULAR:
        raise DomainError("trajectory did not end in a singularity trigger")
    scales = tuple(float(x) for x in params["scales"])
    annulus = tuple(float(x) for x in params["annulus"])
    rep_i, rep_ii, cone_fits = bl.analyze_blowups(traj, scales=scales, annulus=annulus)
    T_est = fl.estimate_singular_time(traj.summary)[0]
    out.mkdir(parents=True, exist_ok=True)
    rescaled = bl.type1_rescale(traj, T_est, scales)
    for lam, curve in zip(scales, rescaled):
        io.write_curve(out / f"rescaled_mode1_lam{int(lam):04d}.csv", curve, n=traj.n)
    neck = bl.type2_rescale(traj, T_est)
    io.write_curve(out / "rescaled_mode2.csv", neck.curve, n=traj.n)
    report = {
        "command": "blowup",
        "seed": seed,
        "T_est": T_est,
        "mode_I": {
            "theta_bar": rep_i.theta_bar,
            "k": rep_i.k,
            "residual": rep_i.residual,
            "per_scale": [
                {"scale": s, "theta_bar": f.theta_bar, "k": f.k,
                 "residual": f.residual, "free_gap": f.free_gap}
                for s, f in zip(scales, cone_fits)
            ],
        },
        "mode_II": {
            "theta_bar": rep_ii.theta_bar,
            "k": rep_ii.k,
            "B": rep_ii.B,
            "residual": rep_ii.residual,
            "selected_time": neck.t_selected,
            "scale": neck.scale,
        },
        "consistency": bool(rep_i.consistency),
    }
    if params.get("figure"):
        report["figure_data_hash"] = io.curves_figure(out / "blowup.svg", [neck.curve] + rescaled)
    io.write_report(out, "report", report)


# --------------------------------------------------------------- symmetry

_SYMMETRY_DEFAULTS = dict(
    preset="so", n=None, p=None, q=None, basis_file=None, samples=100, tol=1e-10,
)


def cmd_symmetry(params: dict, out: Path, seed: int, verbose: bool) -> None:
    if params["basis_file"] is not None:
        entry = json.loads(Path(params["basis_file"]).read_text(encoding="utf-8"))
        action = pr.action_from_entry(entry)
    else:
        action = pr.build_preset(
            params["preset"],
            n=None if params["n"] is None else int(params["n"]),
            p=None if params["p"] is None else int(params["p"]),
            q=None if params["q"] is None else int(params["q"]),
        )
    rng = np.random.default_rng(seed)
    samples = int(params["samples"])
    worst_eq = 0.0
    for _ in range(samples):
        z = rng.normal(size=action.n) + 1j * rng.normal(size=action.n)
        c = rng.uniform(-1.0, 1.0, size=action.group_dim)
        worst_eq = max(worst_eq, sy.equivariance_residual(action, z, c))
    z0 = action.base_point
    report: dict = {
        "command": "symmetry",
        "action": action.name,
        "n": action.n,
        "group_dim": action.group_dim,
        "seed": seed,
        "equivariance_residual_max": worst_eq,
        "equivariance_samples": samples,
    }
    if z0 is not None:
        dims = sorted(
            {sy.orbit_dimension(action, rng.normal(size=action.n) + 1j * rng.normal(size=action.n)) for _ in range(16)}
            | {sy.orbit_dimension(action, z0)}
        )
        report["base_point_moment_max"] = sy.moment(action, z0).max_abs
        report["base_point_orbit_dim"] = sy.orbit_dimension(action, z0)
        report["observed_orbit_dims"] = dims
        report["zero_level_and_isotropic"] = sy.zero_level_and_isotropic(action, z0, float(params["tol"]))
        report["decomposition_residual"] = sy.orthogonal_decomposition_residual(action, z0)
        orders = []
        for m in range(1, 2 * action.n + 1):
            if (2 * action.n) % m == 0:
                ok, res = sy.cyclic_symmetry_order(action, z0, m, seed=seed)
                orders.append({"m": m, "witnessed": bool(ok), "residual": res})
        report["cyclic_orders"] = orders
        report["expected_m"] = action.expected_m
        amb = [
            sy.ambient_angle_check(
                action,
                complex(rng.normal() + 1j * rng.normal()),
                complex(rng.normal() + 1j * rng.normal()),
            )
            for _ in range(32)
        ]
        report["ambient_angle_residual_max"] = float(max(amb))
    out.mkdir(parents=True, exist_ok=True)
    io.write_report(out, "report", report)


# ------------------------------------------------------------------ atlas

_ATLAS_DEFAULTS = dict(n=2, q_max=13, figure=True)


def admissible_pairs(n: int, q_max: int) -> list[tuple[int, int]]:
    """Coprime (p, q), q <= q_max, with p/q strictly inside the window."""
    pairs = []
    for q in range(2, q_max + 1):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            if 2 * n * p > q and 2 * n * p * p < q * q:
                pairs.append((p, q))
    return sorted(pairs)


def cmd_atlas(params: dict, out: Path, seed: int, verbose: bool) -> None:
    n = int(params["n"])
    q_max = int(params["q_max"])
    pairs = admissible_pairs(n, q_max)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    gallery = []
    for p, q in pairs:
        res = so.find_shrinker(p, q, n)
        io.write_curve(out / f"shrinker_p{p:02d}_q{q:02d}.csv", res.curve, n=n)
        records.append(
            {
                "p": p,
                "q": q,
                "ratio": p / q,
                "r_apsis": res.r_apsis,
                "closure_gap": res.closure_gap,
                "winding": res.winding,
                "curvature_maxima": res.maxima,
                "residual": so.soliton_residual(res.curve, 1.0, n),
            }
        )
        gallery.append((f"({p},{q})", res.curve))
        if verbose:
            print(f"  ({p},{q}): r_apsis={res.r_apsis:.6f}", file=sys.stderr)
    report = {
        "command": "atlas",
        "n": n,
        "q_max": q_max,
        "seed": seed,
        "window": list(so.shrinker_ratio_window(n)),
        "count": len(records),
        "entries": records,
    }
    if params.get("figure") and gallery:
        report["figure_data_hash"] = io.gallery_figure(out / "atlas.svg", gallery)
    io.write_report(out, "report", report)


# ------------------------------------------------------------------- main

def _common_parent() -> argparse.ArgumentParser:
    # SUPPRESS keeps the subparser from clobbering flags given before the
    # subcommand; the main parser holds the real defaults
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", default=argparse.SUPPRESS, help="YAML or JSON configuration document")
    parent.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    parent.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    parent.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmcflab", description=__doc__)
    parser.add_argument("--config", default=None, help="YAML or JSON configuration document")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--verbose", action="store_true", default=False)
    parent = _common_parent()
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("soliton", help="construct a classified soliton profile", parents=[parent])
    p.add_argument("--kind", choices=["cone", "special-lagrangian", "shrinker", "expander", "grim-reaper"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--theta-bar", dest="theta_bar", type=float)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--figure", action="store_const", const=True)

    p = subs.add_parser("flow", help="integrate the reduced flow", parents=[parent])
    p.add_argument("--initial", choices=["circle", "neves", "shrinker", "expander", "special-lagrangian", "grim-reaper", "file"])
    p.add_argument("--file", help="curve file for --initial file")
    p.add_argument("--n", type=int)
    p.add_argument("--spacing", type=float)
    p.add_argument("--spacing-max", dest="spacing_max", type=float)
    p.add_argument("--cfl", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--r-floor", dest="r_floor", type=float)
    p.add_argument("--kappa-ceiling", dest="kappa_ceiling", type=float)
    p.add_argument("--redistribution-period", dest="redistribution_period", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--theta-bar", dest="theta_bar", type=float)
    p.add_argument("--snapshot-files", dest="snapshot_files", type=int)
    p.add_argument("--figure", action="store_const", const=True)

    p = subs.add_parser("blowup", help="rescale a singular trajectory and fit blowup models", parents=[parent])
    p.add_argument("--trajectory", help="directory produced by the flow command")
    p.add_argument("--scales", type=float, nargs="+")
    p.add_argument("--annulus", type=float, nargs=2)
    p.add_argument("--figure", action="store_const", const=True)

    p = subs.add_parser("symmetry", help="verify a group action", parents=[parent])
    p.add_argument("--preset", choices=["so", "torus", "su2-sym3", "s1-so-so"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--basis-file", dest="basis_file")
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)

    p = subs.add_parser("atlas", help="enumerate closed shrinking profiles", parents=[parent])
    p.add_argument("--n", type=int)
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--figure", action="store_const", const=True)
    return parser


_COMMANDS = {
    "soliton": (cmd_soliton, _SOLITON_DEFAULTS),
    "flow": (cmd_flow, _FLOW_DEFAULTS),
    "blowup": (cmd_blowup, _BLOWUP_DEFAULTS),
    "symmetry": (cmd_symmetry, _SYMMETRY_DEFAULTS),
    "atlas": (cmd_atlas, _ATLAS_DEFAULTS),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _load_config(args.config)
        runner, defaults = _COMMANDS[args.command]
        overrides = {
            k: v
            for k, v in vars(args).items()
            if k not in ("config", "out", "seed", "verbose", "command")
        }
        params = _merge(doc.get(args.command, {}), defaults, overrides)
        out = Path(args.out or doc.get("out") or f"out_{args.command}")
        seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
        runner(params, out, seed, bool(args.verbose))
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, NoFitError, MeshError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Result persistence: curve tables, key/value reports, and SVG figures.

Curve files are comma-delimited UTF-8 text with LF line endings, one header
row, and columns index, s, x, y, kappa, theta (angles in radians).  Floats are
written with repr-grade precision so a write/read round trip reproduces node
lists exactly.  Reports are emitted twice: an indented human-readable tree and
a JSON mirror with identical content.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .curves import PlanarCurve, curvature_and_radial, lagrangian_angle
from .errors import ValidationError

_FLOAT_FMT = "%.17g"


def write_curve(path, curve: PlanarCurve, n: int = 1) -> None:
    """Write a curve table; kappa and theta are derived at write time."""
    diag = curvature_and_radial(curve)
    try:
        theta = lagrangian_angle(curve, n).theta
    except Exception:
        theta = np.zeros(len(curve))
    topo = "closed-loop" if curve.closed else "open-arc"
    lines = [f"# topology={topo} n={n}", "index,s,x,y,kappa,theta"]
    for i, z in enumerate(curve.nodes):
        lines.append(
            ",".join(
                [
                    str(i),
                    _FLOAT_FMT % diag.arclength[i],
                    _FLOAT_FMT % z.real,
                    _FLOAT_FMT % z.imag,
                    _FLOAT_FMT % diag.kappa[i],
                    _FLOAT_FMT % theta[i],
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_curve(path) -> tuple[PlanarCurve, dict]:
    """Read a curve table back; returns (curve, metadata)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValidationError("curve file is missing its metadata line")
    meta = {}
    for tok in lines[0][1:].split():
        key, _, val = tok.partition("=")
        meta[key] = val
    header = lines[1].split(",")
    if header[:4] != ["index", "s", "x", "y"]:
        raise ValidationError("curve file header mismatch")
    xs, ys = [], []
    for ln in lines[2:]:
        parts = ln.split(",")
        xs.append(float(parts[2]))
        ys.append(float(parts[3]))
    closed = meta.get("topology") == "closed-loop"
    curve = PlanarCurve(np.array(xs) + 1j * np.array(ys), closed)
    meta["n"] = int(meta.get("n", 1))
    return curve, meta


def _render_tree(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, val in obj.items():
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.extend(_render_tree(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(val)}")
    elif isinstance(obj, list):
        for val in obj:
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render_tree(val, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(val)}")
    else:
        lines.append(f"{pad}{_scalar(obj)}")
    return lines


def _scalar(val):
    if isinstance(val, float):
        return "%.12g" % val
    return val


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return str(obj)
    return obj


def write_report(out_dir, name: str, payload: dict) -> None:
    """Emit <name>.txt (indented tree) and <name>.json (machine mirror)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = _jsonable(payload)
    (out / f"{name}.txt").write_text(
        "\n".join(_render_tree(payload)) + "\n", encoding="utf-8", newline="\n"
    )
    (out / f"{name}.json").write_text(
        json.dumps(payload, indent=1) + "\n", encoding="utf-8", newline="\n"
    )


_PALETTE = ("#1f6fb2", "#d1495b", "#3a7d44", "#8650a6", "#c78a2d", "#4a4e69")


def _polyline_svg(nodes: np.ndarray, scale: float, half: float, color: str) -> str:
    pts = " ".join(
        f"{half + scale * z.real:.2f},{half - scale * z.imag:.2f}" for z in nodes
    )
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>'


def curves_figure(path, curves: list[PlanarCurve], canvas: int = 640, labels=None) -> str:
    """Origin-centred SVG with one colour per component; returns a data hash."""
    half = canvas / 2.0
    rmax = max(float(np.abs(c.nodes).max()) for c in curves)
    scale = (0.92 * half) / max(rmax, 1e-12)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas}" height="{canvas}" viewBox="0 0 {canvas} {canvas}">',
        f'<rect width="{canvas}" height="{canvas}" fill="white"/>',
        f'<line x1="0" y1="{half:.1f}" x2="{canvas}" y2="{half:.1f}" stroke="#cccccc" stroke-width="0.6"/>',
        f'<line x1="{half:.1f}" y1="0" x2="{half:.1f}" y2="{canvas}" stroke="#cccccc" stroke-width="0.6"/>',
    ]
    hasher = hashlib.sha256()
    for i, c in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        nodes = c.nodes
        if c.closed:
            nodes = np.concatenate([nodes, nodes[:1]])
        parts.append(_polyline_svg(nodes, scale, half, color))
        hasher.update(np.ascontiguousarray(c.nodes).tobytes())
    if labels:
        for i, text in enumerate(labels):
            parts.append(
                f'<text x="8" y="{16 + 14 * i}" font-family="monospace" font-size="11" '
                f'fill="{_PALETTE[i % len(_PALETTE)]}">{text}</text>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8", newline="\n")
    return hasher.hexdigest()


def gallery_figure(path, entries: list[tuple[str, PlanarCurve]], columns: int = 4, cell: int = 220) -> str:
    """Grid of curve thumbnails with captions; returns a data hash."""
    rows = (len(entries) + columns - 1) // columns
    width, height = columns * cell, rows * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    hasher = hashlib.sha256()
    for i, (label, curve) in enumerate(entries):
        cx = (i % columns) * cell + cell / 2.0
        cy = (i // columns) * cell + cell / 2.0
        rmax = float(np.abs(curve.nodes).max())
        scale = (0.40 * cell) / max(rmax, 1e-12)
        nodes = curve.nodes
        if curve.closed:
            nodes = np.concatenate([nodes, nodes[:1]])
        pts = " ".join(
            f"{cx + scale * z.real:.2f},{cy - scale * z.imag:.2f}" for z in nodes
        )
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.0" points="{pts}"/>')
        parts.append(
            f'<text x="{cx:.1f}" y="{cy + 0.46 * cell:.1f}" text-anchor="middle" '
            f'font-family="monospace" font-size="11" fill="#333333">{label}</text>'
        )
        hasher.update(np.ascontiguousarray(curve.nodes).tobytes())
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8", newline="\n")
    return hasher.hexdigest()


def write_summary_csv(path, summary) -> None:
    lines = ["t,kappa_max,r_min,theta_min,theta_max"]
    for i in range(summary.t.size):
        lines.append(
            ",".join(
                _FLOAT_FMT % v
                for v in (
                    summary.t[i],
                    summary.kappa_max[i],
                    summary.r_min[i],
                    summary.theta_min[i],
                    summary.theta_max[i],
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_summary_csv(path):
    from .flow import FlowSummary

    rows = Path(path).read_text(encoding="utf-8").splitlines()
    data = np.array([[float(x) for x in ln.split(",")] for ln in rows[1:]])
    return FlowSummary(
        t=data[:, 0],
        kappa_max=data[:, 1],
        r_min=data[:, 2],
        theta_min=data[:, 3],
        theta_max=data[:, 4],
    )

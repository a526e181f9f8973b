"""Writers for OBJ meshes, JSON reports and SVG views.

Every writer is deterministic: the same input produces the same bytes.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from . import domain_carver as cv

PALETTE = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
]


class ExportError(OSError):
    pass


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def fmt9(x: float) -> str:
    """Nine decimals, with negative zero printed as zero."""
    s = f"{x:.9f}"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


# -- OBJ ----------------------------------------------------------------

def obj_text(cx: cv.PolyComplex, title: str = "") -> str:
    atlas = cx.atlas
    g = atlas.group
    mesh = cx.mesh
    partners = {}
    try:
        partners = {p.label: p.partner for p in cv.face_pairing(cx)}
    except cv.PairingIncompleteError:
        pass
    lines = [
        f"# fundamental domain {title}".rstrip(),
        "# signature {} level {} offsets {}".format(
            ",".join(map(str, g.signature.orders)), g.k, ",".join(map(str, g.offsets))),
        "# coordinates: Re z, Im z, t (chart of E_e, t along the rotation axis)",
    ]
    for fi, f in enumerate(cx.faces):
        partner = partners.get(f.label)
        lines.append(f"# face_{fi:03d} {cv.label_str(f.label)} word {cv.label_word(f.label, atlas)}"
                     + (f" partner {cv.label_str(partner)}" if partner else ""))
    for v in mesh.vertices:
        lines.append("v " + " ".join(fmt9(c) for c in v))
    for fi in range(len(cx.faces)):
        lines.append(f"g face_{fi:03d}")
        for t in mesh.triangles[mesh.triangle_face == fi]:
            lines.append("f {} {} {}".format(*(int(i) + 1 for i in t)))
    return "\n".join(lines) + "\n"


def write_obj(cx: cv.PolyComplex, path, title: str = "") -> Path:
    return _write(Path(path), obj_text(cx, title))


def read_obj(path):
    """Vertices and triangles of an OBJ file written by :func:`write_obj`."""
    V, T = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("v "):
            V.append([float(x) for x in line.split()[1:4]])
        elif line.startswith("f "):
            T.append([int(x) - 1 for x in line.split()[1:4]])
    return np.array(V), np.array(T, dtype=int)


# -- JSON -----------------------------------------------------------------

def json_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_json(report: dict, path) -> Path:
    return _write(Path(path), json_text(report))


def report_schema() -> dict:
    return json.loads(resources.files("lorentzfd").joinpath("report.schema.json").read_text())


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, report_schema())


# -- SVG ------------------------------------------------------------------

def _svg_header(width, height):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _pts(P):
    return " ".join(f"{x:.4f},{y:.4f}" for x, y in P)


def _face_colours(cx: cv.PolyComplex) -> dict:
    """Paired faces share a colour."""
    labels = cx.face_labels()
    try:
        partner = {p.label: p.partner for p in cv.face_pairing(cx)}
    except cv.PairingIncompleteError:
        partner = {}
    classes = []
    for lab in labels:
        key = min(cv.label_str(lab), cv.label_str(partner.get(lab, lab)))
        if key not in classes:
            classes.append(key)
    return {lab: PALETTE[classes.index(min(cv.label_str(lab), cv.label_str(partner.get(lab, lab))))
                         % len(PALETTE)] for lab in labels}


def svg_text(cx: cv.PolyComplex, title: str = "", panel: int = 360) -> str:
    """Orthographic views along the rotation axis and perpendicular to it."""
    colours = _face_colours(cx)
    polys = []
    for f in cx.faces:
        for poly in f.polygons:
            ring = f.plane.to3d(np.asarray(poly.exterior.coords)[:-1])
            polys.append((f, ring))
    allpts = np.vstack([r for _, r in polys])
    half = float(np.max(np.abs(allpts))) * 1.08
    s = (panel / 2) / half
    pad = 20
    width, height = 2 * panel + 3 * pad, panel + 2 * pad + 20
    out = _svg_header(width, height)
    if title:
        out.append(f'<text x="{pad}" y="{pad}" font-family="sans-serif" font-size="14">{title}</text>')
    views = [
        ("axis view", lambda P: P[:, [0, 1]] * [1, -1], lambda P: P[:, 2].mean()),
        ("side view", lambda P: P[:, [0, 2]] * [1, -1], lambda P: -P[:, 1].mean()),
    ]
    for vi, (name, proj, depth) in enumerate(views):
        cx0 = pad + vi * (panel + pad) + panel / 2
        cy0 = 2 * pad + panel / 2
        out.append(f'<g transform="translate({cx0:.4f},{cy0:.4f})">')
        out.append(f'<text x="{-panel / 2:.4f}" y="{panel / 2:.4f}" font-family="sans-serif" '
                   f'font-size="11">{name}</text>')
        for f, ring in sorted(polys, key=lambda fr: (round(depth(fr[1]), 9), cv.label_str(fr[0].label))):
            out.append(f'<polygon points="{_pts(proj(ring) * s)}" fill="{colours[f.label]}" '
                       f'fill-opacity="0.8" stroke="black" stroke-width="0.6"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(cx: cv.PolyComplex, path, title: str = "") -> Path:
    return _write(Path(path), svg_text(cx, title))


def so2_svg(dom, size: int = 300) -> str:
    s = size / 2 / (1.2 * float(dom.vertex_radius.max()))
    c = size / 2
    out = _svg_header(size, size)
    out.append(f'<circle cx="{c}" cy="{c}" r="{s:.4f}" fill="none" stroke="#999" stroke-width="1"/>')
    P = dom.vertices * [s, -s] + c
    out.append(f'<polygon points="{_pts(P)}" fill="none" stroke="black" stroke-width="1.5"/>')
    for j, (a0, a1) in enumerate(dom.arcs):
        x0, y0 = c + s * math.cos(a0), c - s * math.sin(a0)
        x1, y1 = c + s * math.cos(a1), c - s * math.sin(a1)
        large = 1 if a1 - a0 > math.pi else 0
        out.append(f'<path d="M {x0:.4f} {y0:.4f} A {s:.4f} {s:.4f} 0 {large} 0 {x1:.4f} {y1:.4f}" '
                   f'fill="none" stroke="{PALETTE[j % len(PALETTE)]}" stroke-width="4"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def so11_svg(dom, size: int = 400) -> str:
    from .analogues import hyperbola_point

    reach = dom.n * dom.d
    tt = np.linspace(-reach, reach, 400)
    ext = float(np.cosh(reach)) * 1.05
    s = size / 2 / ext
    c = size / 2
    out = _svg_header(size, size)
    for eps in (1, -1):
        H = hyperbola_point(tt, eps) * [s, -s] + c
        out.append(f'<polyline points="{_pts(H)}" fill="none" stroke="#999" stroke-width="1"/>')
        C = dom.corners[eps] * [s, -s] + c
        out.append(f'<polyline points="{_pts(C)}" fill="none" stroke="black" stroke-width="1.5"/>')
    out.append(f'<line x1="0" y1="0" x2="{size}" y2="{size}" stroke="#ccc"/>')
    out.append(f'<line x1="0" y1="{size}" x2="{size}" y2="0" stroke="#ccc"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- bundle ---------------------------------------------------------------

def write_artifacts(result) -> list[Path]:
    """Write the requested formats of a pipeline result into its output directory."""
    cfg = result.config
    out = Path(cfg.out)
    stem = cfg.label()
    written = [write_json(result.report, out / f"{stem}.json")]
    if result.complex is not None:
        if "obj" in cfg.formats:
            written.append(write_obj(result.complex, out / f"{stem}.obj", stem))
        if "svg" in cfg.formats:
            written.append(write_svg(result.complex, out / f"{stem}.svg", stem))
    if result.timings:
        timing = {k: round(v, 3) for k, v in sorted(result.timings.items())}
        written.append(_write(out / f"{stem}.timings.json", json.dumps(timing, indent=2) + "\n"))
    return written
